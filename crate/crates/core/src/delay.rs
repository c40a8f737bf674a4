//! Time-varying transport delay channels.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure_finite, ensure_sample_period, Error, Result};

/// Sinusoidally modulated delay `d(t) = offset + amplitude·sin(frequency·t)`, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayProfile {
    offset: f64,
    amplitude: f64,
    frequency: f64,
}

impl DelayProfile {
    pub fn new(offset: f64, amplitude: f64, frequency: f64) -> Result<Self> {
        for v in [offset, amplitude, frequency] {
            ensure_finite(v, "delay profile")?;
        }
        if offset - libm::fabs(amplitude) < 0.0 {
            return Err(Error::NegativeDelay { offset, amplitude });
        }
        Ok(Self { offset, amplitude, frequency })
    }

    pub const fn zero() -> Self {
        Self { offset: 0.0, amplitude: 0.0, frequency: 0.0 }
    }

    pub fn constant(delay: f64) -> Result<Self> {
        Self::new(delay, 0.0, 0.0)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn delay_at(&self, t: f64) -> f64 {
        self.offset + self.amplitude * libm::sin(self.frequency * t)
    }

    pub fn max_delay(&self) -> f64 {
        self.offset + libm::fabs(self.amplitude)
    }

    /// The same law scaled by `factor`; used to split a round trip into two legs.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            offset: self.offset * factor,
            amplitude: self.amplitude * factor,
            frequency: self.frequency,
        }
    }
}

/// Ring buffer read back at a variable lag with nearest-sample indexing.
///
/// Timestamps of stored samples are monotone; each call must advance `t_now` by one sample period.
#[derive(Debug, Clone)]
pub struct DelayLine {
    values: Vec<f64>,
    stamps: Vec<f64>,
    written: usize,
    dt: f64,
}

impl DelayLine {
    /// Capacity is `ceil(max_delay/ΔT) + 2` samples.
    pub fn new(max_delay: f64, dt: f64) -> Result<Self> {
        ensure_sample_period(dt)?;
        ensure_finite(max_delay, "maximum delay")?;
        if max_delay < 0.0 {
            return Err(Error::NegativeDelay { offset: max_delay, amplitude: 0.0 });
        }
        let capacity = libm::ceil(max_delay / dt) as usize + 2;
        Ok(Self {
            values: vec![0.0; capacity],
            stamps: vec![f64::NEG_INFINITY; capacity],
            written: 0,
            dt,
        })
    }

    pub fn for_profile(profile: &DelayProfile, dt: f64) -> Result<Self> {
        Self::new(profile.max_delay(), dt)
    }

    pub fn capacity(&self) -> usize {
        self.values.len()
    }

    pub fn sample_period(&self) -> f64 {
        self.dt
    }

    /// Where a read at `t_now − delay` lands relative to the sample about to be pushed at `t_now`.
    pub fn tap(&self, t_now: f64, delay: f64) -> Result<Tap> {
        if !(delay >= 0.0) {
            return Err(Error::NegativeDelay { offset: delay, amplitude: 0.0 });
        }
        let cap = self.values.len();
        let lag = libm::round(delay / self.dt);
        if lag >= cap as f64 {
            return Err(Error::DelayExceedsCapacity {
                requested: delay,
                capacity: (cap - 1) as f64 * self.dt,
            });
        }
        let lag = lag as usize;
        if t_now - delay < 0.0 || lag > self.written {
            return Ok(Tap::Cold);
        }
        if lag == 0 {
            return Ok(Tap::Current);
        }
        let idx = (self.written - lag) % cap;
        Ok(Tap::Past { stamp: self.stamps[idx], value: self.values[idx] })
    }

    pub fn push(&mut self, sample: f64, t_now: f64) -> Result<()> {
        ensure_finite(sample, "delay line sample")?;
        let slot = self.written % self.values.len();
        self.values[slot] = sample;
        self.stamps[slot] = t_now;
        self.written += 1;
        Ok(())
    }

    /// Stores `(t_now, sample)` and returns the stored `(timestamp, value)` nearest to
    /// `t_now − delay`, or `None` before the channel has carried anything that old.
    pub fn push_and_sample_stamped(
        &mut self,
        sample: f64,
        t_now: f64,
        delay: f64,
    ) -> Result<Option<(f64, f64)>> {
        let tap = self.tap(t_now, delay)?;
        self.push(sample, t_now)?;
        Ok(match tap {
            Tap::Cold => None,
            Tap::Current => Some((t_now, sample)),
            Tap::Past { stamp, value } => Some((stamp, value)),
        })
    }

    /// Cold-start reads return 0.
    pub fn push_and_sample(&mut self, sample: f64, t_now: f64, delay: f64) -> Result<f64> {
        Ok(self
            .push_and_sample_stamped(sample, t_now, delay)?
            .map_or(0.0, |(_, v)| v))
    }
}

/// Result of a delayed read, resolved before the current sample is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tap {
    /// Nothing that old has been sent yet; reads as 0.
    Cold,
    /// Zero lag: the read returns the sample being pushed now.
    Current,
    Past { stamp: f64, value: f64 },
}
