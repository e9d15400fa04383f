use std::sync::Arc;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{PathSampler, SimGrid};
use crate::error::{Error, Result};
use crate::model::{fbm_covariance, SamplePath};
use crate::seed::rng_from_seed;

/// Largest number of (nonzero) times factorized directly.
pub const CHOLESKY_LIMIT: usize = 4608;
/// Largest uniform grid accepted by [`simulate_fbm`].
pub const MAX_FBM_STEPS: usize = 1 << 16;
/// Uniform grids up to this many steps use Cholesky; larger ones use
/// circulant embedding.
const CHOLESKY_GRID_STEPS: usize = 4096;

enum Method {
    /// Packed lower-triangular factor of the covariance at the positive times.
    Cholesky { factor: Vec<f64>, offset: usize },
    /// Square roots of the circulant eigenvalues (already divided by the
    /// embedding length) for unit-lag fractional Gaussian noise.
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
        scale: f64,
    },
}

/// Exact Gaussian sampler for fractional Brownian motion at fixed times.
pub struct FbmSampler {
    hurst: f64,
    times: Vec<f64>,
    method: Method,
}

impl FbmSampler {
    /// Cholesky factorization of the covariance at arbitrary increasing times.
    /// A time 0 is allowed and always yields the value 0.
    pub fn new(hurst: f64, var1: f64, times: &[f64]) -> Result<Self> {
        check_hurst(hurst)?;
        if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|t| *t < 0.0) {
            return Err(Error::InvalidInput(
                "FBM times must be nonnegative and strictly increasing".into(),
            ));
        }
        let offset = usize::from(times.first() == Some(&0.0));
        let pos = &times[offset..];
        let m = pos.len();
        if m > CHOLESKY_LIMIT {
            return Err(Error::Generation(format!(
                "{m} sample times exceed the direct factorization limit {CHOLESKY_LIMIT}"
            )));
        }
        let cov = DMatrix::from_fn(m, m, |i, j| fbm_covariance(hurst, var1, pos[i], pos[j]));
        let chol = cov.cholesky().ok_or_else(|| {
            let min_gap = pos.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            Error::Generation(format!(
                "FBM covariance at {m} times is numerically not positive definite (H={hurst}, smallest spacing {min_gap:e})"
            ))
        })?;
        let l = chol.l();
        let mut factor = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in 0..=i {
                factor.push(l[(i, j)]);
            }
        }
        Ok(Self {
            hurst,
            times: times.to_vec(),
            method: Method::Cholesky { factor, offset },
        })
    }

    /// Sampler on the full uniform grid; circulant embedding above 4096 steps.
    pub fn on_grid(hurst: f64, var1: f64, grid: &SimGrid) -> Result<Self> {
        check_hurst(hurst)?;
        if grid.steps > MAX_FBM_STEPS {
            return Err(Error::InvalidInput(format!(
                "at most {MAX_FBM_STEPS} steps (got {})",
                grid.steps
            )));
        }
        if grid.steps <= CHOLESKY_GRID_STEPS {
            return Self::new(hurst, var1, &grid.times());
        }
        let n = grid.steps;
        let two_h = 2.0 * hurst;
        let gamma = |k: f64| 0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h));
        let m = 2 * n;
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|k| {
                let lag = if k <= n { k } else { m - k };
                Complex::new(gamma(lag as f64), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft.process(&mut row);
        let max_eig = row.iter().map(|c| c.re).fold(0.0, f64::max);
        let min_eig = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min_eig < -1e-8 * max_eig {
            return Err(Error::Generation(format!(
                "circulant embedding is not nonnegative definite (smallest eigenvalue {min_eig:e}, H={hurst}, n={n})"
            )));
        }
        let sqrt_eig = row.iter().map(|c| (c.re.max(0.0) / m as f64).sqrt()).collect();
        let scale = var1.sqrt() * grid.dt().powf(hurst);
        Ok(Self {
            hurst,
            times: grid.times(),
            method: Method::Circulant { sqrt_eig, fft, scale },
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }
}

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("FBM requires H ∈ (0,1) (got {hurst})")))
    }
}

impl PathSampler for FbmSampler {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn sample(&self, seed: u64) -> Result<Vec<f64>> {
        let mut rng = rng_from_seed(seed);
        match &self.method {
            Method::Cholesky { factor, offset } => {
                let m = self.times.len() - offset;
                let z: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                let mut out = vec![0.0; self.times.len()];
                let mut start = 0;
                for i in 0..m {
                    let row = &factor[start..start + i + 1];
                    out[offset + i] = row.iter().zip(&z).map(|(a, b)| a * b).sum();
                    start += i + 1;
                }
                Ok(out)
            }
            Method::Circulant { sqrt_eig, fft, scale } => {
                let mut w: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut w);
                let n = self.times.len() - 1;
                let mut out = Vec::with_capacity(n + 1);
                let mut acc = 0.0;
                out.push(0.0);
                for c in &w[..n] {
                    acc += scale * c.re;
                    out.push(acc);
                }
                Ok(out)
            }
        }
    }
}

/// One FBM path on `grid`, seeded with `grid.seed`.
pub fn simulate_fbm(hurst: f64, var1: f64, grid: &SimGrid) -> Result<SamplePath> {
    FbmSampler::on_grid(hurst, var1, grid)?.sample_path(grid.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::sample_batch;

    fn empirical_var(xs: impl Iterator<Item = f64>) -> f64 {
        let v: Vec<f64> = xs.collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn starts_at_zero_both_methods() {
        for steps in [64, 8192] {
            let grid = SimGrid::new(1.0, steps, 3).unwrap();
            let p = simulate_fbm(0.7, 1.0, &grid).unwrap();
            assert_eq!(p.values()[0], 0.0);
            assert_eq!(p.len(), steps + 1);
        }
    }

    #[test]
    fn reproducible_per_seed() {
        let grid = SimGrid::new(1.0, 128, 11).unwrap();
        assert_eq!(
            simulate_fbm(0.3, 1.0, &grid).unwrap(),
            simulate_fbm(0.3, 1.0, &grid).unwrap()
        );
        assert_ne!(
            simulate_fbm(0.3, 1.0, &grid).unwrap(),
            simulate_fbm(0.3, 1.0, &grid.with_seed(12)).unwrap()
        );
    }

    #[test]
    fn brownian_increments_have_dt_variance() {
        let grid = SimGrid::new(1.0, 64, 0).unwrap();
        let s = FbmSampler::on_grid(0.5, 1.0, &grid).unwrap();
        let paths = sample_batch(&s, 4000, 5).unwrap();
        let dt = grid.dt();
        let v = empirical_var(paths.iter().map(|p| p[10] - p[9]));
        // sd of a variance estimate ≈ dt·sqrt(2/4000)
        assert!((v - dt).abs() < 4.0 * dt * (2.0f64 / 4000.0).sqrt(), "{v} vs {dt}");
        let lag1: f64 = paths.iter().map(|p| (p[10] - p[9]) * (p[11] - p[10])).sum::<f64>() / 4000.0;
        assert!(lag1.abs() < 4.0 * dt / 4000f64.sqrt());
    }

    #[test]
    fn circulant_matches_unit_variance() {
        let grid = SimGrid::new(1.0, 8192, 0).unwrap();
        let s = FbmSampler::on_grid(0.75, 1.0, &grid).unwrap();
        let paths = sample_batch(&s, 600, 21).unwrap();
        let v = empirical_var(paths.iter().map(|p| p[8192]));
        assert!((v - 1.0).abs() < 4.0 * (2.0f64 / 600.0).sqrt(), "{v}");
        let half = empirical_var(paths.iter().map(|p| p[4096]));
        let expected = 0.5f64.powf(1.5);
        assert!(
            (half - expected).abs() < 4.0 * expected * (2.0f64 / 600.0).sqrt(),
            "{half}"
        );
    }

    #[test]
    fn rejects_out_of_range_hurst() {
        let grid = SimGrid::new(1.0, 16, 0).unwrap();
        assert!(simulate_fbm(1.5, 1.0, &grid).is_err());
        assert!(simulate_fbm(0.0, 1.0, &grid).is_err());
    }
}
