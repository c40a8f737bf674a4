//! Optimal dissipation allocation across node ports.
//!
//! When the observed energy goes negative the allocator solves
//!
//! ```text
//! minimize ½·AᵀQA   subject to   AᵀS = −E_obs/ΔT
//! ```
//!
//! whose Lagrangian stationarity conditions `QA + λS = 0`, `AᵀS + E_obs/ΔT = 0` give
//! `λ = (SᵀQ⁻¹S)⁻¹·E_obs/ΔT` and `A = −Q⁻¹S·λ`, i.e. `A = S†·(−E_obs/ΔT)` with the
//! Q-weighted pseudoinverse `S† = Q⁻¹S(SᵀQ⁻¹S)⁻¹`. `Q` is diagonal, so `Q⁻¹S` is formed
//! elementwise.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure_finite, ensure_sample_period, Error, Result};

/// Diagonal penalty matrix; larger `q_i` means less dissipation on node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    diag: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::EmptyTopology);
        }
        for (index, &value) in diag.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        Ok(Self { diag })
    }

    pub fn identity(size: usize) -> Self {
        Self { diag: vec![1.0; size] }
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `AᵀQA`
    pub fn quadratic_form(&self, a: &[f64]) -> f64 {
        a.iter().zip(&self.diag).map(|(a, q)| q * a * a).sum()
    }
}

pub const DEFAULT_SINGULAR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocatorSettings {
    /// Below this value of `SᵀQ⁻¹S` the step is deferred rather than solved.
    pub singular_threshold: f64,
    /// Optional per-node ceiling on `α_i`. Clamping breaks the equality constraint.
    pub alpha_max: Option<f64>,
}

impl Default for AllocatorSettings {
    fn default() -> Self {
        Self { singular_threshold: DEFAULT_SINGULAR_THRESHOLD, alpha_max: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub gains: Vec<f64>,
    pub fired: bool,
    /// `AᵀS + E_obs/ΔT`; zero up to rounding when fired and unclamped.
    pub residual: f64,
    /// Lagrange multiplier of the equality constraint, zero when not fired.
    pub multiplier: f64,
}

impl AllocationResult {
    fn idle(size: usize, e_obs: f64, dt: f64) -> Self {
        Self { gains: vec![0.0; size], fired: false, residual: e_obs / dt, multiplier: 0.0 }
    }
}

pub fn allocate(
    e_obs: f64,
    squared_outputs: &[f64],
    weights: &WeightMatrix,
    dt: f64,
) -> Result<AllocationResult> {
    allocate_with(e_obs, squared_outputs, weights, dt, &AllocatorSettings::default())
}

pub fn allocate_with(
    e_obs: f64,
    squared_outputs: &[f64],
    weights: &WeightMatrix,
    dt: f64,
    settings: &AllocatorSettings,
) -> Result<AllocationResult> {
    ensure_sample_period(dt)?;
    ensure_finite(e_obs, "observed energy")?;
    if squared_outputs.len() != weights.len() {
        return Err(Error::LengthMismatch {
            what: "squared outputs",
            expected: weights.len(),
            got: squared_outputs.len(),
        });
    }
    for (index, &s) in squared_outputs.iter().enumerate() {
        ensure_finite(s, "squared output")?;
        if s < 0.0 {
            return Err(Error::NegativeSquaredOutput { index, value: s });
        }
    }

    let m = weights.len();
    if e_obs >= 0.0 {
        return Ok(AllocationResult::idle(m, e_obs, dt));
    }

    let weighted: Vec<f64> = squared_outputs
        .iter()
        .zip(weights.diagonal())
        .map(|(s, q)| s / q)
        .collect();
    let gram: f64 = weighted.iter().zip(squared_outputs).map(|(w, s)| w * s).sum();
    if !(gram > settings.singular_threshold) {
        return Ok(AllocationResult::idle(m, e_obs, dt));
    }

    let demand = -e_obs / dt;
    let scale = demand / gram;
    let mut gains: Vec<f64> = weighted.iter().map(|w| w * scale).collect();
    if let Some(cap) = settings.alpha_max {
        gains.iter_mut().for_each(|a| *a = a.min(cap));
    }
    let delivered: f64 = gains.iter().zip(squared_outputs).map(|(a, s)| a * s).sum();
    Ok(AllocationResult {
        gains,
        fired: true,
        residual: delivered - demand,
        multiplier: -scale,
    })
}

/// Modified port force `û = u + α·y`. Adds `ΔT·α·y²` to the port energy, which acts as
/// damping on the hub since the hub receives `−û`.
pub fn apply_dissipation(force: f64, gain: f64, output: f64) -> f64 {
    force + gain * output
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn positive_energy_needs_nothing() {
        let q = WeightMatrix::identity(3);
        let r = allocate(0.5, &[1.0, 1.0, 1.0], &q, 0.001).unwrap();
        assert!(!r.fired);
        assert_eq!(r.gains, [0.0; 3]);
    }

    #[test]
    fn identity_weights_split_evenly() {
        let q = WeightMatrix::identity(3);
        let r = allocate(-3.0, &[1.0, 1.0, 1.0], &q, 1.0).unwrap();
        assert!(r.fired);
        for a in &r.gains {
            assert!(close(*a, 1.0, 1e-15));
        }
        assert!(r.residual.abs() < 1e-12);
    }

    #[test]
    fn cheap_node_takes_the_load() {
        let q = WeightMatrix::new(vec![1.0, 1e-4, 1.0]).unwrap();
        let r = allocate(-1.0, &[1.0, 1.0, 1.0], &q, 1.0).unwrap();
        let expected = [1.0 / 10002.0, 10000.0 / 10002.0, 1.0 / 10002.0];
        for (a, e) in r.gains.iter().zip(expected) {
            assert!(close(*a, e, 1e-12), "{a} vs {e}");
        }
        let delivered: f64 = r.gains.iter().sum();
        assert!(close(delivered, 1.0, 1e-12));
    }

    #[test]
    fn zero_output_defers() {
        let q = WeightMatrix::identity(3);
        let r = allocate(-1.0, &[0.0; 3], &q, 1.0).unwrap();
        assert!(!r.fired);
        assert_eq!(r.gains, [0.0; 3]);
    }

    #[test]
    fn alpha_cap_limits_gains() {
        let q = WeightMatrix::identity(2);
        let settings = AllocatorSettings { alpha_max: Some(0.5), ..Default::default() };
        let r = allocate_with(-2.0, &[1.0, 1.0], &q, 1.0, &settings).unwrap();
        assert_eq!(r.gains, [0.5, 0.5]);
        assert!((r.residual + 1.0).abs() < 1e-15);
    }

    #[test]
    fn configuration_faults() {
        assert!(matches!(
            WeightMatrix::new(vec![1.0, -1.0]),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
        assert!(WeightMatrix::new(vec![0.0]).is_err());
        let q = WeightMatrix::identity(2);
        assert!(allocate(-1.0, &[1.0], &q, 1.0).is_err());
        assert!(allocate(-1.0, &[1.0, -1.0], &q, 1.0).is_err());
        assert!(allocate(f64::NAN, &[1.0, 1.0], &q, 1.0).is_err());
    }

    #[test]
    fn dissipation_sign() {
        assert_eq!(apply_dissipation(3.0, 0.0, 2.0), 3.0);
        assert_eq!(apply_dissipation(-20.0, 5.0, 1.0), -15.0);
        assert_eq!(apply_dissipation(7.5, 100.0, 0.0), 7.5);
    }
}
