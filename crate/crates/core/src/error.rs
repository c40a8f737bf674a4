use core::fmt;

/// Faults raised by model construction, stepping, and allocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyCoefficients,
    ZeroLeadingCoefficient,
    NotStrictlyProper { num_degree: usize, den_degree: usize },
    Unstable,
    SingularRealization,
    NegativeFeedthrough(f64),
    IllPosedLoop(f64),
    InvalidSamplePeriod(f64),
    InvalidFrequencyGrid,
    NonFinite(&'static str),
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    NegativeSquaredOutput { index: usize, value: f64 },
    NonPositiveWeight { index: usize, value: f64 },
    NegativeDelay { offset: f64, amplitude: f64 },
    DelayExceedsCapacity { requested: f64, capacity: f64 },
    NegativeGain { index: usize, value: f64 },
    EmptyTopology,
    InvalidScenario(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyCoefficients => write!(f, "coefficient list is empty"),
            Error::ZeroLeadingCoefficient => {
                write!(f, "denominator leading coefficient must be nonzero")
            }
            Error::NotStrictlyProper { num_degree, den_degree } => write!(
                f,
                "transfer function is not strictly proper (numerator degree {num_degree} >= denominator degree {den_degree}); it has no finite state-space realization"
            ),
            Error::Unstable => write!(f, "transfer function has a pole in the open right half-plane"),
            Error::SingularRealization => {
                write!(f, "discrete realization is singular at this sample period")
            }
            Error::NegativeFeedthrough(d) => write!(
                f,
                "hub admittance has negative high-frequency gain {d}; it cannot be passive"
            ),
            Error::IllPosedLoop(gain) => write!(
                f,
                "hub/node algebraic loop is ill-posed (1 + D·G = {gain} <= 0)"
            ),
            Error::InvalidSamplePeriod(dt) => write!(f, "sample period must be positive and finite, got {dt}"),
            Error::InvalidFrequencyGrid => {
                write!(f, "frequency grid must be nonempty with positive finite entries")
            }
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::LengthMismatch { what, expected, got } => {
                write!(f, "{what}: expected length {expected}, got {got}")
            }
            Error::NegativeSquaredOutput { index, value } => {
                write!(f, "squared output S[{index}] = {value} is negative")
            }
            Error::NonPositiveWeight { index, value } => {
                write!(f, "weight q[{index}] = {value} must be strictly positive")
            }
            Error::NegativeDelay { offset, amplitude } => write!(
                f,
                "delay profile can go negative: offset {offset} < |amplitude| {amplitude}"
            ),
            Error::DelayExceedsCapacity { requested, capacity } => write!(
                f,
                "requested delay {requested} s exceeds delay line capacity {capacity} s"
            ),
            Error::NegativeGain { index, value } => {
                write!(f, "dissipation gain alpha[{index}] = {value} is negative")
            }
            Error::EmptyTopology => write!(f, "topology needs at least one remote node"),
            Error::InvalidScenario(why) => write!(f, "invalid scenario: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_finite(value: f64, what: &'static str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_sample_period(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSamplePeriod(dt))
    }
}
