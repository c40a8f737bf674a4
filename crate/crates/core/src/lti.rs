//! Continuous LTI models for the hub and the remote nodes, and their discrete realizations.
//!
//! The hub is an admittance (force in, velocity out) realized with backward Euler, so the
//! velocity at step `n` responds to the force applied at step `n`. Node impedances
//! `m·s + b + k/s` are improper and use a backward-difference derivative plus a trapezoidal
//! integral. Both discretizations keep positive-real models positive-real when port energy is
//! booked as `ΔT·Σ f[n]·v[n]`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{ensure_finite, ensure_sample_period, Error, Result};
use crate::dense::Square;

/// Rational transfer function, coefficients in descending powers of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTF {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl ContinuousTF {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.is_empty() || den.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        if den[0] == 0.0 {
            return Err(Error::ZeroLeadingCoefficient);
        }
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("transfer function coefficients"));
        }
        Ok(Self { num, den })
    }

    pub fn numerator(&self) -> &[f64] {
        &self.num
    }

    pub fn denominator(&self) -> &[f64] {
        &self.den
    }

    /// Numerator with leading zeros stripped; empty for the zero transfer function.
    fn trimmed_num(&self) -> &[f64] {
        let first = self.num.iter().position(|&c| c != 0.0).unwrap_or(self.num.len());
        &self.num[first..]
    }

    pub fn den_degree(&self) -> usize {
        self.den.len() - 1
    }

    /// Degree of the numerator, or `None` for the zero transfer function.
    pub fn num_degree(&self) -> Option<usize> {
        self.trimmed_num().len().checked_sub(1)
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num_degree().is_none_or(|d| d < self.den_degree())
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        horner(&self.num, s) / horner(&self.den, s)
    }

    /// Denominator roots.
    pub fn poles(&self) -> Vec<Complex64> {
        polynomial_roots(&self.den)
    }

    /// No pole strictly inside the right half-plane. Poles on the imaginary axis (lossless
    /// elements such as a pure integrator) are accepted.
    pub fn is_stable(&self) -> bool {
        self.poles()
            .iter()
            .all(|p| p.re <= POLE_AXIS_TOL * p.norm().max(1.0))
    }
}

const POLE_AXIS_TOL: f64 = 1e-7;

fn horner(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

/// Durand–Kerner iteration on the monic polynomial.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let lead = coeffs[0];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let degree = monic.len() - 1;
    match degree {
        0 => return Vec::new(),
        1 => return vec![Complex64::new(-monic[1], 0.0)],
        _ => {}
    }
    let radius = 1.0 + monic[1..].iter().map(|c| libm::fabs(*c)).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|k| seed.powu(k as u32) * radius)
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..degree {
            let zi = roots[i];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, zj) in roots.iter().enumerate() {
                if j != i {
                    denom *= zi - zj;
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(f64::EPSILON, 0.0);
            }
            let delta = horner(&monic, zi) / denom;
            roots[i] = zi - delta;
            moved = moved.max(delta.norm() / zi.norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    roots
}

/// Mass–damper–spring impedance `m·s + b + k/s` (velocity in, force out).
///
/// Signs are unrestricted; nonpassive nodes use negated triples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceTriple {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
}

impl ImpedanceTriple {
    pub const fn new(mass: f64, damping: f64, stiffness: f64) -> Self {
        Self { mass, damping, stiffness }
    }

    pub fn negated(self) -> Self {
        Self::new(-self.mass, -self.damping, -self.stiffness)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        s * self.mass + self.damping + s.inv() * self.stiffness
    }
}

/// How a continuous model was turned into a difference equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discretization {
    /// `s → (1 − z⁻¹)/ΔT` on the state-space realization.
    BackwardEuler,
    /// Backward-difference derivative, trapezoidal integral.
    ImpedanceTriple,
}

/// Backward-Euler realization of a strictly proper admittance.
///
/// With `P = (I − A·ΔT)⁻¹` the realization is `y[n] = C·P·s[n] + C·P·B·ΔT·f[n]` and
/// `s[n+1] = P·s[n] + P·B·ΔT·f[n]`. Backward Euler maps the unit circle onto a circle inside the
/// closed right half-plane, so when `1/Y` is analytic there, `Re{1/Y}` on the unit circle never
/// drops below its minimum along `jω`: the discrete hub keeps at least the continuous passivity
/// index with energy booked as `ΔT·f[n]·y[n]`. The cost is a positive direct feedthrough
/// `C·P·B·ΔT`.
///
/// Position is the trapezoidal running integral of velocity.
#[derive(Debug, Clone)]
pub struct HubAdmittance {
    phi: Square,
    gamma: Vec<f64>,
    c: Vec<f64>,
    feedthrough: f64,
    state: Vec<f64>,
    dt: f64,
    position: f64,
    last_velocity: f64,
}

impl HubAdmittance {
    pub fn new(tf: &ContinuousTF, dt: f64) -> Result<Self> {
        ensure_sample_period(dt)?;
        if !tf.is_strictly_proper() {
            return Err(Error::NotStrictlyProper {
                num_degree: tf.num_degree().unwrap_or(0),
                den_degree: tf.den_degree(),
            });
        }
        let n = tf.den_degree();
        let lead = tf.den[0];
        // Controllable canonical form: first row holds -a_k, ones on the subdiagonal, B = e1.
        let mut shifted = Square::identity(n);
        for k in 0..n {
            shifted.set(0, k, shifted.get(0, k) + tf.den[k + 1] / lead * dt);
        }
        for r in 1..n {
            shifted.set(r, r - 1, -dt);
        }
        let phi = shifted.inverse().ok_or(Error::SingularRealization)?;

        let num = tf.trimmed_num();
        let mut c = vec![0.0; n];
        for (i, coeff) in num.iter().enumerate() {
            c[n - num.len() + i] = coeff / lead;
        }
        let gamma: Vec<f64> = (0..n).map(|r| phi.get(r, 0) * dt).collect();
        let c_phi = phi.vec_mul(&c);
        let feedthrough: f64 = c.iter().zip(&gamma).map(|(c, g)| c * g).sum();
        if feedthrough < 0.0 {
            return Err(Error::NegativeFeedthrough(feedthrough));
        }

        Ok(Self {
            phi,
            gamma,
            c: c_phi,
            feedthrough,
            state: vec![0.0; n],
            dt,
            position: 0.0,
            last_velocity: 0.0,
        })
    }

    pub fn discretization(&self) -> Discretization {
        Discretization::BackwardEuler
    }

    pub fn sample_period(&self) -> f64 {
        self.dt
    }

    pub fn order(&self) -> usize {
        self.state.len()
    }

    /// Velocity this step would have under zero applied force.
    pub fn free_velocity(&self) -> f64 {
        self.c.iter().zip(&self.state).map(|(c, x)| c * x).sum()
    }

    /// Velocity change per unit force applied this step.
    pub fn feedthrough(&self) -> f64 {
        self.feedthrough
    }

    /// Velocity this step would have under `force`, without advancing.
    pub fn velocity_for(&self, force: f64) -> f64 {
        self.free_velocity() + self.feedthrough * force
    }

    /// Position at the end of the most recent step.
    pub fn position(&self) -> f64 {
        self.position
    }

    /// Applies `force` for this step, advances, and returns the resulting `(velocity, position)`.
    pub fn step(&mut self, force: f64) -> Result<(f64, f64)> {
        ensure_finite(force, "hub force")?;
        let velocity = self.velocity_for(force);
        let mut next = self.phi.mul_vec(&self.state);
        next.iter_mut().zip(&self.gamma).for_each(|(x, g)| *x += g * force);
        self.state = next;
        self.position += 0.5 * self.dt * (velocity + self.last_velocity);
        self.last_velocity = velocity;
        Ok((velocity, self.position))
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|x| *x = 0.0);
        self.position = 0.0;
        self.last_velocity = 0.0;
    }
}

/// Discrete node impedance:
/// `f[n] = m·(v[n] − v[n−1])/ΔT + b·v[n] + k·I[n]`, `I[n] = I[n−1] + ΔT·(v[n] + v[n−1])/2`.
#[derive(Debug, Clone)]
pub struct NodeImpedance {
    triple: ImpedanceTriple,
    dt: f64,
    prev_velocity: f64,
    integral: f64,
}

impl NodeImpedance {
    pub fn new(triple: ImpedanceTriple, dt: f64) -> Result<Self> {
        ensure_sample_period(dt)?;
        for v in [triple.mass, triple.damping, triple.stiffness] {
            ensure_finite(v, "impedance triple")?;
        }
        Ok(Self { triple, dt, prev_velocity: 0.0, integral: 0.0 })
    }

    pub fn discretization(&self) -> Discretization {
        Discretization::ImpedanceTriple
    }

    pub fn triple(&self) -> ImpedanceTriple {
        self.triple
    }

    /// `∂f[n]/∂v[n] = m/ΔT + b + k·ΔT/2`
    pub fn feedthrough(&self) -> f64 {
        let ImpedanceTriple { mass, damping, stiffness } = self.triple;
        mass / self.dt + damping + 0.5 * stiffness * self.dt
    }

    /// Force this step would produce at zero input velocity; `f[n] = feedthrough·v[n] + this`.
    pub fn free_force(&self) -> f64 {
        let ImpedanceTriple { mass, stiffness, .. } = self.triple;
        -mass * self.prev_velocity / self.dt
            + stiffness * (self.integral + 0.5 * self.dt * self.prev_velocity)
    }

    pub fn step(&mut self, velocity: f64) -> Result<f64> {
        ensure_finite(velocity, "node velocity")?;
        let force = self.feedthrough() * velocity + self.free_force();
        self.integral += 0.5 * self.dt * (velocity + self.prev_velocity);
        self.prev_velocity = velocity;
        Ok(force)
    }

    pub fn reset(&mut self) {
        self.prev_velocity = 0.0;
        self.integral = 0.0;
    }
}

/// Log-spaced grid of `count` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (libm::log10(lo), libm::log10(hi));
            (0..count)
                .map(|i| libm::pow(10.0, a + (b - a) * i as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

/// Frequency grid used when the hub passivity index is not supplied: 1e-3..1e4 rad/s, 1000 points.
pub fn default_osp_grid() -> Vec<f64> {
    log_grid(1e-3, 1e4, 1000)
}

/// Output-strict-passivity index of an admittance: `min_ω Re{Y(jω)} / |Y(jω)|²` over the
/// grid, clamped at zero. Grid points where `Y(jω) = 0` carry no constraint and are skipped.
pub fn estimate_osp_index(tf: &ContinuousTF, omega_grid: &[f64]) -> Result<f64> {
    if omega_grid.is_empty() || omega_grid.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(Error::InvalidFrequencyGrid);
    }
    if !tf.is_stable() {
        return Err(Error::Unstable);
    }
    let min_ratio = omega_grid
        .iter()
        .filter_map(|&w| {
            let y = tf.eval(Complex64::new(0.0, w));
            let mag2 = y.norm_sqr();
            (mag2 > 0.0).then(|| y.re / mag2)
        })
        .fold(f64::INFINITY, f64::min);
    if min_ratio.is_finite() {
        Ok(min_ratio.max(0.0))
    } else {
        Ok(0.0)
    }
}
