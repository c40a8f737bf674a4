//! Comma-separated traces and key-value summaries.
//!
//! Numbers use Rust's shortest round-trip float formatting, so reading a value back with
//! `str::parse::<f64>` recovers it bit for bit. Infinite gains on locked steps are written `inf`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use tcopc_core::{Summary, Trace};

pub fn trace_header(node_count: usize) -> String {
    let mut cols = vec!["n".to_owned(), "t".into(), "u_ext".into(), "y".into(), "x".into()];
    for i in 1..=node_count {
        cols.extend([format!("u{i}"), format!("uhat{i}"), format!("alpha{i}"), format!("D{i}")]);
    }
    cols.extend(["E_obs".to_owned(), "E_hat".into()]);
    cols.join(",")
}

/// Writes the header and every step whose index is a multiple of `decimation`.
pub fn write_trace_to<W: Write>(trace: &Trace, decimation: usize, out: W) -> io::Result<()> {
    let decimation = decimation.max(1);
    let mut out = BufWriter::new(out);
    writeln!(out, "{}", trace_header(trace.node_count))?;
    for r in trace.records.iter().filter(|r| r.n % decimation == 0) {
        write!(out, "{},{:?},{:?},{:?},{:?}", r.n, r.t, r.u_ext, r.velocity, r.position)?;
        for p in &r.ports {
            write!(out, ",{:?},{:?},{:?},{:?}", p.force, p.modified_force, p.gain, p.dissipated)?;
        }
        writeln!(out, ",{:?},{:?}", r.e_obs, r.e_hat)?;
    }
    out.flush()
}

pub fn write_trace(trace: &Trace, path: &Path, decimation: usize) -> io::Result<()> {
    write_trace_to(trace, decimation, File::create(path)?)
}

pub fn write_summary_to<W: Write>(summary: &Summary, xi: f64, fault: Option<&str>, out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "diverged={}", summary.diverged)?;
    writeln!(out, "steps={}", summary.steps)?;
    writeln!(out, "xi={xi:?}")?;
    writeln!(out, "min_E_hat={:?}", summary.min_e_hat)?;
    writeln!(out, "final_abs_y={:?}", summary.final_abs_velocity)?;
    writeln!(out, "max_abs_y={:?}", summary.max_abs_velocity)?;
    writeln!(out, "fired_steps={}", summary.fired_steps)?;
    writeln!(out, "locked_steps={}", summary.locked_steps)?;
    writeln!(out, "total_injected={:?}", summary.total_injected)?;
    for (i, d) in summary.dissipated.iter().enumerate() {
        writeln!(out, "D{}={d:?}", i + 1)?;
    }
    for (i, s) in summary.shares.iter().enumerate() {
        writeln!(out, "share{}={s:?}", i + 1)?;
    }
    if let Some(fault) = fault {
        writeln!(out, "fault={fault}")?;
    }
    out.flush()
}

pub fn write_summary(summary: &Summary, xi: f64, fault: Option<&str>, path: &Path) -> io::Result<()> {
    write_summary_to(summary, xi, fault, File::create(path)?)
}

/// Parses `key=value` lines.
pub fn read_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .collect()
}
