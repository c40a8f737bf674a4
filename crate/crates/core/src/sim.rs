//! Hub + remote-node network simulation.
//!
//! The hub has direct feedthrough and every node impedance does too, so a zero-lag channel closes
//! an algebraic loop. Each step first writes every returned force as an affine function
//! `u_i = g_i·y + h_i` of the unknown hub velocity `y`, then picks `y` and the dissipation gains
//! together so that the hub, the ledger and the nodes all see the same `y`. When no nonzero
//! velocity lets the damping return `Ê` to zero, the stabilizer locks the hub for one step
//! (`y = 0`) with a brake force shared over the ports in proportion to `1/q_i`; that step moves
//! no energy and its gains are reported as infinite.
//!
//! Port sign convention: `u_i·y > 0` means node `i` absorbs energy from the hub.

use alloc::vec;
use alloc::vec::Vec;

use crate::allocator::{allocate_with, apply_dissipation, AllocatorSettings, WeightMatrix};
use crate::delay::{DelayLine, DelayProfile, Tap};
use crate::error::{ensure_finite, ensure_sample_period, Error, Result};
use crate::lti::{default_osp_grid, estimate_osp_index, ContinuousTF, HubAdmittance, ImpedanceTriple, NodeImpedance};
use crate::observer::EnergyLedger;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSpec {
    pub impedance: ImpedanceTriple,
    /// Round-trip delay; each leg carries half of it.
    pub round_trip: DelayProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub hub: ContinuousTF,
    /// Hub passivity index; estimated from `hub` when `None`.
    pub xi: Option<f64>,
    pub nodes: Vec<NodeSpec>,
    pub weights: WeightMatrix,
    pub stabilizer: bool,
    pub allocator: AllocatorSettings,
}

impl Topology {
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::EmptyTopology);
        }
        if self.weights.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                what: "weight diagonal",
                expected: self.nodes.len(),
                got: self.weights.len(),
            });
        }
        if let Some(xi) = self.xi {
            if !(xi.is_finite() && xi >= 0.0) {
                return Err(Error::InvalidScenario("hub passivity index must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSignal {
    /// Single-sample pulse of height `area/ΔT` at `n = 0`.
    Impulse { area: f64 },
    /// `amplitude·(sin(ω₁t) + sin(ω₂t))`
    DualSine { amplitude: f64, omegas: [f64; 2] },
    /// Explicit per-step values; zero past the end.
    Samples(Vec<f64>),
}

impl InputSignal {
    pub fn value_at(&self, n: usize, dt: f64) -> f64 {
        match self {
            InputSignal::Impulse { area } => {
                if n == 0 {
                    area / dt
                } else {
                    0.0
                }
            }
            InputSignal::DualSine { amplitude, omegas } => {
                let t = n as f64 * dt;
                amplitude * (libm::sin(omegas[0] * t) + libm::sin(omegas[1] * t))
            }
            InputSignal::Samples(values) => values.get(n).copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub input: InputSignal,
    pub duration: f64,
    pub dt: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        ensure_sample_period(self.dt)?;
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidScenario("duration must be positive and finite"));
        }
        let finite = match &self.input {
            InputSignal::Impulse { area } => area.is_finite(),
            InputSignal::DualSine { amplitude, omegas } => {
                amplitude.is_finite() && omegas.iter().all(|w| w.is_finite())
            }
            InputSignal::Samples(values) => values.iter().all(|v| v.is_finite()),
        };
        if !finite {
            return Err(Error::NonFinite("scenario input"));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        libm::round(self.duration / self.dt) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceLimits {
    pub velocity: f64,
    pub energy: f64,
}

impl Default for DivergenceLimits {
    fn default() -> Self {
        Self { velocity: 1e6, energy: 1e6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortRecord {
    /// Raw returned force.
    pub force: f64,
    /// Force after dissipation.
    pub modified_force: f64,
    pub gain: f64,
    /// Cumulative energy dissipated on this port.
    pub dissipated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub t: f64,
    pub u_ext: f64,
    pub velocity: f64,
    pub position: f64,
    pub ports: Vec<PortRecord>,
    pub e_obs: f64,
    pub e_hat: f64,
    /// The stabilizer acted: some gain was positive or the hub was locked.
    pub fired: bool,
    /// The hub was held at rest by a brake force this step.
    pub locked: bool,
}

struct NodeChannel {
    impedance: NodeImpedance,
    leg: DelayProfile,
    forward: DelayLine,
    backward: DelayLine,
}

enum Plan {
    Damped { velocity: f64, gains: Vec<f64> },
    Locked,
}

/// One port for the current step, affine in the hub velocity `y`.
struct PortLaw {
    /// Node input velocity is `carries·y + received`.
    carries: f64,
    received: f64,
    /// Returned force is `gain·y + bias`.
    gain: f64,
    bias: f64,
}

impl PortLaw {
    fn resolve(ch: &NodeChannel, t: f64) -> Result<Self> {
        let d = ch.leg.delay_at(t);
        let (carries, received) = match ch.forward.tap(t, d)? {
            Tap::Cold => (0.0, 0.0),
            Tap::Current => (1.0, 0.0),
            Tap::Past { value, .. } => (0.0, value),
        };
        let slope = ch.impedance.feedthrough();
        let free = ch.impedance.free_force();
        let (gain, bias) = match ch.backward.tap(t, d)? {
            Tap::Cold => (0.0, 0.0),
            Tap::Current => (slope * carries, slope * received + free),
            Tap::Past { value, .. } => (0.0, value),
        };
        Ok(Self { carries, received, gain, bias })
    }

    fn node_velocity(&self, y: f64) -> f64 {
        self.carries * y + self.received
    }

    fn force_at(&self, y: f64) -> f64 {
        self.gain * y + self.bias
    }
}

pub struct Simulation {
    hub: HubAdmittance,
    channels: Vec<NodeChannel>,
    ledger: EnergyLedger,
    weights: WeightMatrix,
    settings: AllocatorSettings,
    stabilizer: bool,
    input: InputSignal,
    dt: f64,
    total_steps: usize,
    n: usize,
    dissipated: Vec<f64>,
    limits: DivergenceLimits,
}

impl Simulation {
    pub fn build(topology: &Topology, scenario: &Scenario) -> Result<Self> {
        topology.validate()?;
        scenario.validate()?;
        let dt = scenario.dt;
        let hub = HubAdmittance::new(&topology.hub, dt)?;
        let xi = match topology.xi {
            Some(xi) => xi,
            None => estimate_osp_index(&topology.hub, &default_osp_grid())?,
        };
        let channels = topology
            .nodes
            .iter()
            .map(|spec| {
                let leg = spec.round_trip.scaled(0.5);
                Ok(NodeChannel {
                    impedance: NodeImpedance::new(spec.impedance, dt)?,
                    forward: DelayLine::for_profile(&leg, dt)?,
                    backward: DelayLine::for_profile(&leg, dt)?,
                    leg,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            hub,
            ledger: EnergyLedger::new(dt, xi)?,
            weights: topology.weights.clone(),
            settings: topology.allocator,
            stabilizer: topology.stabilizer,
            input: scenario.input.clone(),
            dt,
            total_steps: scenario.step_count(),
            n: 0,
            dissipated: vec![0.0; channels.len()],
            channels,
            limits: DivergenceLimits::default(),
        })
    }

    pub fn with_limits(mut self, limits: DivergenceLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn xi(&self) -> f64 {
        self.ledger.passivity_index()
    }

    pub fn node_count(&self) -> usize {
        self.channels.len()
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    pub fn is_finished(&self) -> bool {
        self.n >= self.total_steps
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn step(&mut self) -> Result<StepRecord> {
        if self.is_finished() {
            return Err(Error::InvalidScenario("simulation already reached its duration"));
        }
        let n = self.n;
        let t = n as f64 * self.dt;
        let u_ext = self.input.value_at(n, self.dt);
        ensure_finite(u_ext, "external force")?;

        let laws = self
            .channels
            .iter()
            .map(|ch| PortLaw::resolve(ch, t))
            .collect::<Result<Vec<_>>>()?;
        let y0 = self.hub.free_velocity();
        ensure_finite(y0, "hub velocity")?;
        let feed = self.hub.feedthrough();
        let gain: f64 = laws.iter().map(|l| l.gain).sum();
        let bias: f64 = laws.iter().map(|l| l.bias).sum();
        let loop_gain = 1.0 + feed * gain;
        if !(loop_gain > 0.0) {
            return Err(Error::IllPosedLoop(loop_gain));
        }
        // y·(1 + D·G + D·ΣA) = drive
        let drive = y0 + feed * (u_ext - bias);

        let m = laws.len();
        let plan = self.plan(&laws, drive, loop_gain, bias, feed, y0)?;
        let (y, gains, brake) = match plan {
            Plan::Damped { velocity, gains } => (velocity, gains, None),
            Plan::Locked => {
                let inv: Vec<f64> = self.weights.diagonal().iter().map(|q| 1.0 / q).collect();
                let total: f64 = inv.iter().sum();
                let brake: Vec<f64> = inv.iter().map(|w| drive / feed * w / total).collect();
                (0.0, vec![0.0; m], Some(brake))
            }
        };

        let outputs = vec![y; m];
        let feedback: Vec<f64> = laws.iter().map(|l| l.force_at(y)).collect();
        let squared = vec![y * y; m];
        let e_obs = self.ledger.ingest_step(y, &outputs, &feedback)?;
        let e_hat = self.ledger.record_injection(&gains, &squared)?;

        let mut net = u_ext;
        let mut ports = Vec::with_capacity(m);
        for i in 0..m {
            let u = feedback[i];
            let (modified, gain) = match &brake {
                Some(b) => (u + b[i], f64::INFINITY),
                None => (apply_dissipation(u, gains[i], y), gains[i]),
            };
            if brake.is_none() {
                self.dissipated[i] += self.dt * gains[i] * squared[i];
            }
            net -= modified;
            ports.push(PortRecord { force: u, modified_force: modified, gain, dissipated: self.dissipated[i] });
        }
        let force = if brake.is_some() { -y0 / feed } else { net };
        let (_, position) = self.hub.step(force)?;

        for (ch, law) in self.channels.iter_mut().zip(&laws) {
            let node_force = ch.impedance.step(law.node_velocity(y))?;
            ch.forward.push(y, t)?;
            ch.backward.push(node_force, t)?;
        }

        self.n += 1;
        Ok(StepRecord {
            n,
            t,
            u_ext,
            velocity: y,
            position,
            ports,
            e_obs,
            e_hat,
            fired: brake.is_some() || gains.iter().any(|a| *a > 0.0),
            locked: brake.is_some(),
        })
    }

    /// Chooses this step's hub velocity and gains.
    fn plan(&self, laws: &[PortLaw], drive: f64, loop_gain: f64, bias: f64, feed: f64, y0: f64) -> Result<Plan> {
        let m = laws.len();
        let preview = |y: f64| {
            let feedback: Vec<f64> = laws.iter().map(|l| l.force_at(y)).collect();
            self.ledger.preview_step(y, &vec![y; m], &feedback)
        };
        let allocate_at = |y: f64| -> Result<Vec<f64>> {
            let e_obs = preview(y)?;
            if !self.stabilizer {
                return Ok(vec![0.0; m]);
            }
            let r = allocate_with(e_obs, &vec![y * y; m], &self.weights, self.dt, &self.settings)?;
            Ok(if r.fired { r.gains } else { vec![0.0; m] })
        };

        if feed == 0.0 {
            // no loop: damping applied now only reaches the velocity next step
            return Ok(Plan::Damped { velocity: y0, gains: allocate_at(y0)? });
        }
        let free = drive / loop_gain;
        if !self.stabilizer || preview(free)? >= 0.0 {
            return Ok(Plan::Damped { velocity: free, gains: vec![0.0; m] });
        }

        let target = self.damped_root(drive, free, bias, feed);
        let gains = match target {
            Some(y) => {
                let e_obs = preview(y)?;
                let r = allocate_with(e_obs, &vec![y * y; m], &self.weights, self.dt, &self.settings)?;
                r.fired.then_some(r.gains)
            }
            None => None,
        };
        let gains = match (gains, self.settings.alpha_max) {
            (Some(g), _) => g,
            (None, Some(cap)) => vec![cap; m],
            (None, None) => return Ok(Plan::Locked),
        };
        // exact for unclamped gains up to rounding; for clamped ones this is the velocity they allow
        let total: f64 = gains.iter().sum();
        Ok(Plan::Damped { velocity: drive / (loop_gain + feed * total), gains })
    }

    /// The velocity closest to the undamped one at which some nonnegative total gain makes
    /// `Ê = 0`, found from `Ê(y) = B + ΔT·((ξ − 1/D)·y² + (H + drive/D)·y)`.
    fn damped_root(&self, drive: f64, free: f64, bias: f64, feed: f64) -> Option<f64> {
        let a = self.dt * (self.xi() - 1.0 / feed);
        let b = self.dt * (bias + drive / feed);
        let c = self.ledger.controlled_energy();
        let mut roots = [f64::NAN; 2];
        if a == 0.0 {
            if b != 0.0 {
                roots[0] = -c / b;
            }
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                return None;
            }
            let q = -0.5 * (b + libm::copysign(libm::sqrt(disc), b));
            roots[0] = q / a;
            if q != 0.0 {
                roots[1] = c / q;
            }
        }
        roots
            .into_iter()
            .filter(|r| r.is_finite() && *r * drive > 0.0 && libm::fabs(*r) <= libm::fabs(free))
            .fold(None, |best: Option<f64>, r| match best {
                Some(b) if libm::fabs(b) >= libm::fabs(r) => Some(b),
                _ => Some(r),
            })
    }

    fn exceeds_limits(&self, rec: &StepRecord) -> bool {
        !(libm::fabs(rec.velocity) <= self.limits.velocity && rec.e_obs >= -self.limits.energy)
    }

    /// Steps to the configured duration, or until the divergence limits are crossed or the state
    /// stops being finite.
    pub fn run(mut self) -> RunOutput {
        let node_count = self.channels.len();
        let mut records = Vec::with_capacity(self.total_steps);
        let mut diverged = false;
        let mut fault = None;
        while !self.is_finished() {
            match self.step() {
                Ok(rec) => {
                    let over = self.exceeds_limits(&rec);
                    records.push(rec);
                    if over {
                        diverged = true;
                        break;
                    }
                }
                Err(e) => {
                    fault = Some(e);
                    diverged = true;
                    break;
                }
            }
        }
        let trace = Trace { node_count, dt: self.dt, xi: self.xi(), records };
        let summary = Summary::from_trace(&trace, diverged, self.ledger.injected_energy());
        RunOutput { trace, summary, fault }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub node_count: usize,
    pub dt: f64,
    pub xi: f64,
    pub records: Vec<StepRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `5 + 4M + 2` columns in the flat trace layout.
    pub fn column_count(&self) -> usize {
        5 + 4 * self.node_count + 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub diverged: bool,
    pub steps: usize,
    pub min_e_hat: f64,
    pub final_abs_velocity: f64,
    pub max_abs_velocity: f64,
    pub fired_steps: usize,
    pub locked_steps: usize,
    pub dissipated: Vec<f64>,
    pub shares: Vec<f64>,
    pub total_injected: f64,
}

impl Summary {
    pub fn from_trace(trace: &Trace, diverged: bool, total_injected: f64) -> Self {
        let dissipated: Vec<f64> = trace
            .records
            .last()
            .map(|r| r.ports.iter().map(|p| p.dissipated).collect())
            .unwrap_or_else(|| vec![0.0; trace.node_count]);
        let total: f64 = dissipated.iter().sum();
        let shares = dissipated
            .iter()
            .map(|d| if total > 0.0 { d / total } else { 0.0 })
            .collect();
        Self {
            diverged,
            steps: trace.records.len(),
            min_e_hat: trace.records.iter().map(|r| r.e_hat).fold(f64::INFINITY, f64::min),
            final_abs_velocity: trace.records.last().map_or(0.0, |r| libm::fabs(r.velocity)),
            max_abs_velocity: trace
                .records
                .iter()
                .map(|r| libm::fabs(r.velocity))
                .fold(0.0, f64::max),
            fired_steps: trace.records.iter().filter(|r| r.fired).count(),
            locked_steps: trace.records.iter().filter(|r| r.locked).count(),
            dissipated,
            shares,
            total_injected,
        }
    }
}

pub struct RunOutput {
    pub trace: Trace,
    pub summary: Summary,
    /// Fault that ended the run early, if any. Counted as divergence in the summary.
    pub fault: Option<Error>,
}
