use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{PathSampler, SimGrid};
use crate::error::{Error, Result};
use crate::kernel::FlpKernel;
use crate::levy::LevySpec;
use crate::model::SamplePath;
use crate::seed::rng_from_seed;

/// Default truncation window as a multiple of the horizon.
pub const DEFAULT_WINDOW_FACTOR: f64 = 400.0;

struct GaussPlan {
    scale: f64,
    len: usize,
    kernel_hat: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Discretized moving average `X(t) = ∫_{−M}^{T} f(t,s) dL(s)`.
///
/// The driver lives on cells `[s_j, s_j + dt)`, `s_j = j·dt`, `j = −Mc..n−1`;
/// every jump and every Gaussian cell increment is attached to its left
/// point. Times on the lattice `k·dt` use a precomputed kernel table, other
/// times evaluate the kernel directly.
pub struct FlpSimulator {
    kernel: FlpKernel,
    levy: LevySpec,
    dt: f64,
    past_cells: usize,
    cells: usize,
    table: Vec<f64>,
    times: Vec<f64>,
    lattice: Vec<Option<usize>>,
    compensation: Vec<f64>,
    gauss: Option<GaussPlan>,
}

impl FlpSimulator {
    /// Simulator observed on every point of `grid`.
    pub fn new(hurst: f64, levy: LevySpec, grid: &SimGrid, window: f64) -> Result<Self> {
        Self::at_times(hurst, levy, grid, window, &grid.times())
    }

    /// Simulator with cell width `grid.dt()` observed at arbitrary `times ⊂ [0, T]`.
    pub fn at_times(hurst: f64, levy: LevySpec, grid: &SimGrid, window: f64, times: &[f64]) -> Result<Self> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(Error::InvalidInput(format!("FLP requires H ∈ (1/2,1) (got {hurst})")));
        }
        levy.validate()?;
        if !(window >= grid.horizon) {
            return Err(Error::Window {
                window,
                horizon: grid.horizon,
            });
        }
        if times.windows(2).any(|w| w[1] <= w[0])
            || times.iter().any(|t| !(*t >= 0.0 && *t <= grid.horizon * (1.0 + 1e-12)))
        {
            return Err(Error::InvalidInput(
                "FLP times must be increasing and lie in [0, T]".into(),
            ));
        }
        let kernel = FlpKernel::new(hurst);
        let dt = grid.dt();
        let past_cells = (window / dt).ceil() as usize;
        let cells = past_cells + grid.steps;
        let table: Vec<f64> = (0..=cells)
            .map(|m| kernel.power(m as f64 * dt) / kernel.normalization())
            .collect();
        let lattice: Vec<Option<usize>> = times.iter().map(|&t| grid.index_of(t)).collect();

        let drift_dt = levy.drift() * dt;
        let mut prefix = vec![0.0; cells + 1];
        for m in 1..=cells {
            prefix[m] = prefix[m - 1] + table[m];
        }
        let compensation = times
            .iter()
            .zip(&lattice)
            .map(|(&t, k)| match *k {
                Some(k) => drift_dt * (prefix[k + past_cells] - prefix[past_cells]),
                None => {
                    drift_dt
                        * (0..cells)
                            .map(|i| Self::direct_weight(&kernel, dt, past_cells, i, t))
                            .sum::<f64>()
                }
            })
            .collect();

        let sigma = levy.sigma();
        let gauss = (sigma > 0.0).then(|| {
            let len = (2 * cells + 1).next_power_of_two();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(len);
            let inverse = planner.plan_fft_inverse(len);
            let mut kernel_hat: Vec<Complex<f64>> = (0..len)
                .map(|i| Complex::new(if i <= cells { table[i] } else { 0.0 }, 0.0))
                .collect();
            forward.process(&mut kernel_hat);
            GaussPlan {
                scale: sigma * dt.sqrt(),
                len,
                kernel_hat,
                forward,
                inverse,
            }
        });

        Ok(Self {
            kernel,
            levy,
            dt,
            past_cells,
            cells,
            table,
            times: times.to_vec(),
            lattice,
            compensation,
            gauss,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.kernel.hurst()
    }

    pub fn window(&self) -> f64 {
        self.past_cells as f64 * self.dt
    }

    pub fn levy(&self) -> &LevySpec {
        &self.levy
    }

    /// Kernel weight of cell `i` (left point `(i − Mc)·dt`) at time `t`.
    fn direct_weight(kernel: &FlpKernel, dt: f64, past_cells: usize, i: usize, t: f64) -> f64 {
        let s = (i as f64 - past_cells as f64) * dt;
        kernel.weight(t, s)
    }

    /// Weight of cell `i` at observation `idx`.
    #[inline]
    fn weight(&self, idx: usize, i: usize) -> f64 {
        match self.lattice[idx] {
            Some(k) => {
                let kk = k + self.past_cells;
                let head = if kk > i { self.table[kk - i] } else { 0.0 };
                let tail = if i < self.past_cells {
                    self.table[self.past_cells - i]
                } else {
                    0.0
                };
                head - tail
            }
            None => Self::direct_weight(&self.kernel, self.dt, self.past_cells, i, self.times[idx]),
        }
    }
}

impl PathSampler for FlpSimulator {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn sample(&self, seed: u64) -> Result<Vec<f64>> {
        let mut rng = rng_from_seed(seed);
        let start = -(self.past_cells as f64) * self.dt;
        let end = start + self.cells as f64 * self.dt;
        let mut amounts = vec![0.0; self.cells];
        for jump in self.levy.sample_jumps(start, end, &mut rng) {
            let i = (((jump.time - start) / self.dt) as usize).min(self.cells - 1);
            amounts[i] += jump.size;
        }
        let mut out: Vec<f64> = self.compensation.iter().map(|c| -c).collect();
        for (i, &a) in amounts.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (idx, x) in out.iter_mut().enumerate() {
                *x += a * self.weight(idx, i);
            }
        }
        if let Some(g) = &self.gauss {
            let z: Vec<f64> = (0..self.cells).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut buf: Vec<Complex<f64>> = (0..g.len)
                .map(|i| Complex::new(if i < self.cells { z[i] } else { 0.0 }, 0.0))
                .collect();
            g.forward.process(&mut buf);
            for (b, k) in buf.iter_mut().zip(&g.kernel_hat) {
                *b *= k;
            }
            g.inverse.process(&mut buf);
            let norm = 1.0 / g.len as f64;
            let past: f64 = (0..self.past_cells)
                .map(|i| z[i] * self.table[self.past_cells - i])
                .sum();
            for (idx, x) in out.iter_mut().enumerate() {
                let value = match self.lattice[idx] {
                    Some(0) => 0.0,
                    Some(k) => buf[k + self.past_cells].re * norm - past,
                    None => (0..self.cells).map(|i| z[i] * self.weight(idx, i)).sum(),
                };
                *x += g.scale * value;
            }
        }
        Ok(out)
    }
}

/// One FLP path on `grid` with truncation window `window`, seeded with `grid.seed`.
pub fn simulate_flp(hurst: f64, levy: &LevySpec, grid: &SimGrid, window: f64) -> Result<SamplePath> {
    FlpSimulator::new(hurst, levy.clone(), grid, window)?.sample_path(grid.seed)
}
