//! Synthetic processes that must fail specific checks.

use crate::error::Result;
use crate::simulate::{FbmSampler, PathSampler};

/// Wraps a sampler and moves the value at the first time by `offset`.
pub struct ShiftedStart {
    inner: Box<dyn PathSampler>,
    offset: f64,
}

impl ShiftedStart {
    pub fn new(inner: Box<dyn PathSampler>, offset: f64) -> Self {
        Self { inner, offset }
    }
}

impl PathSampler for ShiftedStart {
    fn times(&self) -> &[f64] {
        self.inner.times()
    }

    fn sample(&self, seed: u64) -> Result<Vec<f64>> {
        let mut v = self.inner.sample(seed)?;
        if let Some(x) = v.first_mut() {
            *x += self.offset;
        }
        Ok(v)
    }
}

/// `B(t²)` for a standard Brownian motion `B`: Gaussian, starts at 0, but
/// `Var(X(t+h) − X(t)) = 2th + h²` depends on `t`.
pub struct TimeChangedBrownian {
    times: Vec<f64>,
    inner: FbmSampler,
}

impl TimeChangedBrownian {
    pub fn new(times: &[f64]) -> Result<Self> {
        let squared: Vec<f64> = times.iter().map(|t| t * t).collect();
        Ok(Self {
            times: times.to_vec(),
            inner: FbmSampler::new(0.5, 1.0, &squared)?,
        })
    }
}

impl PathSampler for TimeChangedBrownian {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn sample(&self, seed: u64) -> Result<Vec<f64>> {
        self.inner.sample(seed)
    }
}
