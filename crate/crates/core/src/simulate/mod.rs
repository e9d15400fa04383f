//! Path generators and the batch machinery shared by the verification harness.
//!
//! Every generator is a [`PathSampler`]: a fixed set of observation times and
//! a pure function from a seed to the values at those times. Batches derive
//! one seed per path index, so output is independent of thread count.

mod fbm;
mod flp;

pub use fbm::{simulate_fbm, FbmSampler, CHOLESKY_LIMIT, MAX_FBM_STEPS};
pub use flp::{simulate_flp, FlpSimulator, DEFAULT_WINDOW_FACTOR};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SamplePath;
use crate::seed::derive_seed;

/// Uniform grid `k·T/n`, `k = 0..=n`, with the master seed of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimGrid {
    pub horizon: f64,
    pub steps: usize,
    pub seed: u64,
}

impl SimGrid {
    pub fn new(horizon: f64, steps: usize, seed: u64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon must be > 0 (got {horizon})")));
        }
        if steps < 2 {
            return Err(Error::InvalidInput(format!("steps must be ≥ 2 (got {steps})")));
        }
        Ok(Self { horizon, steps, seed })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.horizon / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    /// Grid index of `t` if `t` is a grid point.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = (t / self.dt()).round();
        if k < 0.0 || k > self.steps as f64 {
            return None;
        }
        let k = k as usize;
        ((self.time(k) - t).abs() <= 1e-12 * t.abs()).then_some(k)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Closed-form paths used as exact inputs for the path statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum DeterministicPath {
    Identity,
    Power { beta: f64 },
    Zero,
}

impl DeterministicPath {
    pub fn power(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta.is_finite() {
            Ok(DeterministicPath::Power { beta })
        } else {
            Err(Error::InvalidInput(format!("power exponent must be > 0 (got {beta})")))
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            DeterministicPath::Identity => t,
            DeterministicPath::Power { beta } => t.powf(beta),
            DeterministicPath::Zero => 0.0,
        }
    }
}

pub fn deterministic_path(path: DeterministicPath, times: &[f64]) -> Result<SamplePath> {
    SamplePath::new(times.to_vec(), times.iter().map(|&t| path.eval(t)).collect())
}

/// A process observed at fixed times.
pub trait PathSampler: Send + Sync {
    fn times(&self) -> &[f64];

    /// Values at [`PathSampler::times`] for one realization.
    fn sample(&self, seed: u64) -> Result<Vec<f64>>;

    fn sample_path(&self, seed: u64) -> Result<SamplePath> {
        SamplePath::new(self.times().to_vec(), self.sample(seed)?)
    }
}

/// Deterministic path as a (trivial) sampler.
#[derive(Debug, Clone)]
pub struct DeterministicSampler {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl DeterministicSampler {
    pub fn new(path: DeterministicPath, times: &[f64]) -> Self {
        Self {
            times: times.to_vec(),
            values: times.iter().map(|&t| path.eval(t)).collect(),
        }
    }
}

impl PathSampler for DeterministicSampler {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn sample(&self, _seed: u64) -> Result<Vec<f64>> {
        Ok(self.values.clone())
    }
}

/// `paths` realizations, path `i` seeded with `derive_seed(master_seed, i)`.
/// Runs in parallel; the result is ordered by path index.
pub fn sample_batch(sampler: &dyn PathSampler, paths: usize, master_seed: u64) -> Result<Vec<Vec<f64>>> {
    (0..paths)
        .into_par_iter()
        .map(|i| sampler.sample(derive_seed(master_seed, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_times_and_lookup() {
        let g = SimGrid::new(2.0, 8, 0).unwrap();
        assert_eq!(g.times().len(), 9);
        assert_eq!(g.time(8), 2.0);
        assert_eq!(g.index_of(0.5), Some(2));
        assert_eq!(g.index_of(0.6), None);
        assert!(SimGrid::new(1.0, 1, 0).is_err());
    }

    #[test]
    fn deterministic_examples() {
        let times = [0.0, 0.5, 1.0];
        let id = deterministic_path(DeterministicPath::Identity, &times).unwrap();
        assert_eq!(id.value_at(0.5).unwrap(), 0.5);
        let pw = deterministic_path(DeterministicPath::power(0.8).unwrap(), &times).unwrap();
        assert_eq!(pw.value_at(1.0).unwrap(), 1.0);
        assert_eq!(pw.value_at(0.0).unwrap(), 0.0);
        let z = deterministic_path(DeterministicPath::Zero, &times).unwrap();
        assert!(z.values().iter().all(|v| *v == 0.0));
        assert!(DeterministicPath::power(0.0).is_err());
    }
}
