use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tcopc::{execute, load_config, selfcheck, InputKind, Overrides};

#[derive(Parser, Debug)]
#[command(name = "tcopc", version, about = "Centralized optimal passivity control simulator")]
struct Cli {
    /// Run configuration file.
    #[arg(long, required_unless_present = "seed_check")]
    config: Option<PathBuf>,
    /// Directory for the trace and summary files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Replace the configured input with a standard one: `impulse` or `dual-sine`.
    #[arg(long, value_parser = parse_kind)]
    scenario: Option<InputKind>,
    /// Replace the weight diagonal, e.g. `1,0.0001,1`.
    #[arg(long, value_parser = parse_weights)]
    q_diag: Option<Weights>,
    #[arg(long)]
    no_stabilizer: bool,
    /// Run the built-in invariant self-test suite.
    #[arg(long)]
    seed_check: bool,
}

#[derive(Debug, Clone)]
struct Weights(Vec<f64>);

fn parse_weights(s: &str) -> Result<Weights, String> {
    tcopc::parse_q_list(s).map(Weights)
}

fn parse_kind(s: &str) -> Result<InputKind, String> {
    match InputKind::parse(s) {
        Some(InputKind::Samples) | None => Err(format!("unknown scenario {s:?}; expected impulse or dual-sine")),
        Some(kind) => Ok(kind),
    }
}

fn seed_check() -> bool {
    let checks = selfcheck::run_all();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.seed_check && !seed_check() {
        return ExitCode::FAILURE;
    }
    let Some(path) = cli.config else {
        return ExitCode::SUCCESS;
    };

    let overrides = Overrides { scenario: cli.scenario, q_diag: cli.q_diag.map(|w| w.0), no_stabilizer: cli.no_stabilizer };
    let result = load_config(&path).and_then(|mut config| {
        overrides.apply(&mut config)?;
        execute(&config, &cli.out)
    });
    match result {
        Ok(w) => {
            let s = &w.output.summary;
            println!(
                "{} steps, diverged={}, min_E_hat={:e}, trace {}, summary {}",
                s.steps,
                s.diverged,
                s.min_e_hat,
                w.trace.display(),
                w.summary.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
