//! Runs `tcopc-core` simulations from configuration files and writes plot-ready traces.

pub mod config;
pub mod output;
pub mod selfcheck;

use std::path::{Path, PathBuf};

use tcopc_core::{RunOutput, Simulation};

pub use config::{parse_config, serialize_config, ConfigError, InputKind, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("cannot build simulation: {0}")]
    Build(tcopc_core::Error),
}

impl RunError {
    fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let context = context.into();
        move |source| RunError::Io { context, source }
    }
}

/// Command-line adjustments applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<InputKind>,
    pub q_diag: Option<Vec<f64>>,
    pub no_stabilizer: bool,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) -> Result<(), ConfigError> {
        if let Some(kind) = self.scenario {
            config.override_scenario(kind)?;
        }
        if let Some(q) = &self.q_diag {
            config.control.q_diag = q.clone();
        }
        if self.no_stabilizer {
            config.control.stabilizer = false;
        }
        config.validate()
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(RunError::io(format!("cannot read {}", path.display())))?;
    Ok(parse_config(&text)?)
}

/// Parses a comma-separated list of weights such as `1,0.0001,1`.
pub fn parse_q_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad weight {s:?}: {e}")))
        .collect()
}

pub struct Written {
    pub output: RunOutput,
    pub trace: PathBuf,
    pub summary: PathBuf,
}

/// Runs `config` and writes its trace and summary under `out_dir`.
pub fn execute(config: &RunConfig, out_dir: &Path) -> Result<Written, RunError> {
    let (topology, scenario) = config.build()?;
    let sim = Simulation::build(&topology, &scenario).map_err(RunError::Build)?;
    let xi = sim.xi();
    let output = sim.run();
    std::fs::create_dir_all(out_dir).map_err(RunError::io(format!("cannot create {}", out_dir.display())))?;
    let trace = out_dir.join(&config.output.trace);
    let summary = out_dir.join(&config.output.summary);
    output::write_trace(&output.trace, &trace, config.output.decimation)
        .map_err(RunError::io(format!("cannot write {}", trace.display())))?;
    let fault = output.fault.as_ref().map(|e| e.to_string());
    output::write_summary(&output.summary, xi, fault.as_deref(), &summary)
        .map_err(RunError::io(format!("cannot write {}", summary.display())))?;
    Ok(Written { output, trace, summary })
}
