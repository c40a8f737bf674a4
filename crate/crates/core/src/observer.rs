//! Centralized passivity observer.
//!
//! Tracks, cumulatively over steps `k ≤ n`:
//!
//! ```text
//! E[n]     = ΔT·Σ (ξ·ȳᵀȳ + Σ_i u_iᵀy_i)        raw interconnection energy
//! D[n]     = ΔT·Σ Σ_i α_i·y_iᵀy_i              energy injected by the dissipation gains
//! E_obs[n] = E[n] + D[n−1]                      what the allocator sees
//! Ê[n]     = E[n] + D[n]                        controlled energy, kept ≥ 0
//! ```
//!
//! Every port carries the broadcast hub output, so the `ξ` term uses `ȳᵀȳ` exactly once.

use crate::error::{ensure_finite, ensure_sample_period, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    raw: f64,
    injected: f64,
    observed: f64,
    controlled: f64,
    steps: u64,
    dt: f64,
    xi: f64,
}

impl EnergyLedger {
    pub fn new(dt: f64, xi: f64) -> Result<Self> {
        ensure_sample_period(dt)?;
        ensure_finite(xi, "passivity index")?;
        if xi < 0.0 {
            return Err(Error::InvalidScenario("hub passivity index must be nonnegative"));
        }
        Ok(Self {
            raw: 0.0,
            injected: 0.0,
            observed: 0.0,
            controlled: 0.0,
            steps: 0,
            dt,
            xi,
        })
    }

    pub fn raw_energy(&self) -> f64 {
        self.raw
    }

    pub fn injected_energy(&self) -> f64 {
        self.injected
    }

    pub fn observed_energy(&self) -> f64 {
        self.observed
    }

    pub fn controlled_energy(&self) -> f64 {
        self.controlled
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn sample_period(&self) -> f64 {
        self.dt
    }

    pub fn passivity_index(&self) -> f64 {
        self.xi
    }

    fn step_energy(&self, hub_output: f64, outputs: &[f64], feedback: &[f64]) -> Result<f64> {
        if outputs.len() != feedback.len() {
            return Err(Error::LengthMismatch {
                what: "port feedback",
                expected: outputs.len(),
                got: feedback.len(),
            });
        }
        ensure_finite(hub_output, "hub output")?;
        let mut port_power = 0.0;
        for (y, u) in outputs.iter().zip(feedback) {
            ensure_finite(*y, "port output")?;
            ensure_finite(*u, "port feedback")?;
            port_power += u * y;
        }
        Ok(self.dt * (self.xi * hub_output * hub_output + port_power))
    }

    /// The `E_obs` that [`ingest_step`](Self::ingest_step) would return, without recording it.
    pub fn preview_step(&self, hub_output: f64, outputs: &[f64], feedback: &[f64]) -> Result<f64> {
        let increment = self.step_energy(hub_output, outputs, feedback)?;
        Ok(self.raw + increment + self.injected)
    }

    /// Adds this step's port energy to `E` and returns `E_obs = E + D`, where `D` still holds
    /// injections through the previous step only.
    ///
    /// `hub_output` is `ȳ`; `outputs[i]` is the output seen by port `i` and `feedback[i]` the raw
    /// force returned on it.
    pub fn ingest_step(&mut self, hub_output: f64, outputs: &[f64], feedback: &[f64]) -> Result<f64> {
        self.raw += self.step_energy(hub_output, outputs, feedback)?;
        self.steps += 1;
        self.observed = self.raw + self.injected;
        self.controlled = self.observed;
        Ok(self.observed)
    }

    /// Books the dissipation applied at the current step: `D += ΔT·AᵀS`, `Ê = E + D`.
    pub fn record_injection(&mut self, gains: &[f64], squared_outputs: &[f64]) -> Result<f64> {
        if gains.len() != squared_outputs.len() {
            return Err(Error::LengthMismatch {
                what: "dissipation gains",
                expected: squared_outputs.len(),
                got: gains.len(),
            });
        }
        let mut rate = 0.0;
        for (index, (a, s)) in gains.iter().zip(squared_outputs).enumerate() {
            ensure_finite(*a, "dissipation gain")?;
            ensure_finite(*s, "squared output")?;
            if *s < 0.0 {
                return Err(Error::NegativeSquaredOutput { index, value: *s });
            }
            if *a < 0.0 {
                return Err(Error::NegativeGain { index, value: *a });
            }
            rate += a * s;
        }
        self.injected += self.dt * rate;
        self.controlled = self.raw + self.injected;
        Ok(self.controlled)
    }
}
