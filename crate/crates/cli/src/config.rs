//! Run configuration: a TOML document with `topology`, `scenario`, `control` and `output`
//! tables. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tcopc_core::{
    AllocatorSettings, ContinuousTF, DelayProfile, ImpedanceTriple, InputSignal, NodeSpec, Scenario, Topology,
    WeightMatrix,
};

pub const DEFAULT_IMPULSE_AREA: f64 = 1.0;
pub const DEFAULT_DUAL_SINE_AMPLITUDE: f64 = 20.0;
pub const DEFAULT_DUAL_SINE_FREQUENCIES: [f64; 2] = [PI, 0.5 * PI];
pub const DEFAULT_TRACE: &str = "trace.csv";
pub const DEFAULT_SUMMARY: &str = "summary.txt";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, reason: impl ToString) -> Self {
        ConfigError::Invalid { field: field.into(), reason: reason.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub topology: TopologySection,
    pub scenario: ScenarioSection,
    pub control: ControlSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    /// Hub admittance numerator, descending powers of `s`.
    pub hub_num: Vec<f64>,
    pub hub_den: Vec<f64>,
    /// Explicit hub passivity index; estimated from the hub model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(rename = "node")]
    pub nodes: Vec<NodeSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    /// `[m, b, k]` of `m·s + b + k/s`.
    pub impedance: [f64; 3],
    /// Round-trip delay law; zero delay when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<DelaySection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySection {
    pub offset: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    Impulse,
    DualSine,
    Samples,
}

impl InputKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "impulse" => Some(InputKind::Impulse),
            "dual-sine" => Some(InputKind::DualSine),
            "samples" => Some(InputKind::Samples),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: InputKind,
    /// Impulse area, or the common sine amplitude.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// The two angular frequencies of the dual-sine input, rad/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    /// Per-step external force for `kind = "samples"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    pub duration: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub stabilizer: bool,
    pub q_diag: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_sing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_trace")]
    pub trace: PathBuf,
    #[serde(default = "default_summary")]
    pub summary: PathBuf,
    #[serde(default = "default_decimation")]
    pub decimation: usize,
}

fn default_trace() -> PathBuf {
    PathBuf::from(DEFAULT_TRACE)
}

fn default_summary() -> PathBuf {
    PathBuf::from(DEFAULT_SUMMARY)
}

fn default_decimation() -> usize {
    1
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { trace: default_trace(), summary: default_summary(), decimation: 1 }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text)?;
    config.validate()?;
    Ok(config)
}

pub fn serialize_config(config: &RunConfig) -> String {
    toml::to_string(config).expect("config is always representable as TOML")
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.build().map(|_| ())
    }

    /// Replaces the scenario input with one of the standard inputs, keeping duration and `ΔT`.
    pub fn override_scenario(&mut self, kind: InputKind) -> Result<(), ConfigError> {
        let s = &mut self.scenario;
        s.kind = kind;
        s.samples = None;
        match kind {
            InputKind::Impulse => {
                s.amplitude = Some(DEFAULT_IMPULSE_AREA);
                s.frequencies = None;
            }
            InputKind::DualSine => {
                s.amplitude = Some(DEFAULT_DUAL_SINE_AMPLITUDE);
                s.frequencies = Some(DEFAULT_DUAL_SINE_FREQUENCIES.to_vec());
            }
            InputKind::Samples => {
                return Err(ConfigError::invalid("--scenario", "samples input needs its sample list in the file"));
            }
        }
        Ok(())
    }

    pub fn topology(&self) -> Result<Topology, ConfigError> {
        let t = &self.topology;
        let hub = ContinuousTF::new(t.hub_num.clone(), t.hub_den.clone())
            .map_err(|e| ConfigError::invalid("topology.hub_num/hub_den", e))?;
        let nodes = t
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let [m, b, k] = n.impedance;
                let round_trip = match n.delay {
                    None => DelayProfile::zero(),
                    Some(d) => DelayProfile::new(d.offset, d.amplitude, d.frequency)
                        .map_err(|e| ConfigError::invalid(format!("topology.node[{i}].delay"), e))?,
                };
                Ok(NodeSpec { impedance: ImpedanceTriple::new(m, b, k), round_trip })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let weights = WeightMatrix::new(self.control.q_diag.clone())
            .map_err(|e| ConfigError::invalid("control.q_diag", e))?;
        let mut allocator = AllocatorSettings::default();
        if let Some(eps) = self.control.eps_sing {
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(ConfigError::invalid("control.eps_sing", "must be finite and nonnegative"));
            }
            allocator.singular_threshold = eps;
        }
        if let Some(cap) = self.control.alpha_max {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(ConfigError::invalid("control.alpha_max", "must be finite and positive"));
            }
            allocator.alpha_max = Some(cap);
        }
        let topology = Topology {
            hub,
            xi: t.xi,
            nodes,
            weights,
            stabilizer: self.control.stabilizer,
            allocator,
        };
        topology.validate().map_err(|e| ConfigError::invalid("topology", e))?;
        Ok(topology)
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let s = &self.scenario;
        let input = match s.kind {
            InputKind::Impulse => {
                reject_key(s.frequencies.is_some(), "scenario.frequencies", "impulse")?;
                reject_key(s.samples.is_some(), "scenario.samples", "impulse")?;
                InputSignal::Impulse { area: s.amplitude.unwrap_or(DEFAULT_IMPULSE_AREA) }
            }
            InputKind::DualSine => {
                reject_key(s.samples.is_some(), "scenario.samples", "dual-sine")?;
                let omegas = match s.frequencies.as_deref() {
                    None => DEFAULT_DUAL_SINE_FREQUENCIES,
                    Some([a, b]) => [*a, *b],
                    Some(other) => {
                        return Err(ConfigError::invalid(
                            "scenario.frequencies",
                            format!("dual-sine needs exactly 2 frequencies, got {}", other.len()),
                        ))
                    }
                };
                InputSignal::DualSine { amplitude: s.amplitude.unwrap_or(DEFAULT_DUAL_SINE_AMPLITUDE), omegas }
            }
            InputKind::Samples => {
                reject_key(s.amplitude.is_some(), "scenario.amplitude", "samples")?;
                reject_key(s.frequencies.is_some(), "scenario.frequencies", "samples")?;
                let samples = s
                    .samples
                    .clone()
                    .ok_or_else(|| ConfigError::invalid("scenario.samples", "required for kind = \"samples\""))?;
                InputSignal::Samples(samples)
            }
        };
        let scenario = Scenario { input, duration: s.duration, dt: s.dt };
        scenario.validate().map_err(|e| ConfigError::invalid("scenario", e))?;
        Ok(scenario)
    }

    /// Validated core models.
    pub fn build(&self) -> Result<(Topology, Scenario), ConfigError> {
        if self.output.decimation < 1 {
            return Err(ConfigError::invalid("output.decimation", "must be at least 1"));
        }
        Ok((self.topology()?, self.scenario()?))
    }
}

fn reject_key(present: bool, field: &str, kind: &str) -> Result<(), ConfigError> {
    if present {
        Err(ConfigError::invalid(field, format!("not used by kind = \"{kind}\"")))
    } else {
        Ok(())
    }
}
