use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::model::SamplePath;

/// How `log S_j` is adjusted before the regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderCentering {
    /// Subtract `E ln max` of `2^j` i.i.d. `|N(0,1)|`, the level-`j` bias of a
    /// Gaussian path with stationary increments.
    #[default]
    Gaussian,
    /// Plain `log S_j`.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HolderEstimate {
    Exponent { value: f64 },
    ConstantPath,
}

impl HolderEstimate {
    pub fn value(&self) -> Option<f64> {
        match self {
            HolderEstimate::Exponent { value } => Some(*value),
            HolderEstimate::ConstantPath => None,
        }
    }
}

/// `E ln max_{i ≤ m} |Z_i|` for i.i.d. standard normals.
pub fn expected_log_max_abs_normal(m: usize) -> f64 {
    let m = m.max(1) as f64;
    // density of the maximum: m · F(x)^{m−1} · 2φ(x), F(x) = 1 − erfc(x/√2)
    let density = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let tail = erfc(x * FRAC_1_SQRT_2);
        let log_cdf = if m > 1.0 { (m - 1.0) * (-tail).ln_1p() } else { 0.0 };
        m * (log_cdf - 0.5 * x * x).exp() * (2.0 / PI).sqrt()
    };
    let f = |x: f64| x.ln() * density(x);
    let mut total = 0.0;
    for w in [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 12.0].windows(2) {
        total += quadrature::integrate(f, w[0], w[1], 1e-12).integral;
    }
    total
}

/// Least-squares slope of `log S_j` against `log h_j`, `h_j = 2^{−j}·T`,
/// where `S_j` is the largest absolute increment over the `2^j`
/// non-overlapping windows of length `h_j`. Levels run over
/// `min_level..=max_level`; the path must be uniform with a multiple of
/// `2^{max_level}` steps.
pub fn estimate_holder_exponent(
    path: &SamplePath,
    min_level: u32,
    max_level: u32,
    centering: HolderCentering,
) -> Result<HolderEstimate> {
    if min_level >= max_level || max_level > 30 {
        return Err(Error::InvalidInput(format!(
            "need min_level < max_level ≤ 30 (got {min_level}, {max_level})"
        )));
    }
    let times = path.times();
    let values = path.values();
    let steps = times.len().saturating_sub(1);
    let cells = 1usize << max_level;
    if steps < cells || !steps.is_multiple_of(cells) {
        return Err(Error::InvalidInput(format!(
            "path with {steps} steps does not contain the 2^{max_level} dyadic grid"
        )));
    }
    let horizon = times[steps] - times[0];
    let dt = horizon / steps as f64;
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidInput("Hölder estimator needs a uniform time grid".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in min_level..=max_level {
        let windows = 1usize << j;
        let stride = steps / windows;
        let s = (0..windows)
            .map(|i| (values[(i + 1) * stride] - values[i * stride]).abs())
            .fold(0.0, f64::max);
        if s == 0.0 {
            continue;
        }
        let shift = match centering {
            HolderCentering::Gaussian => expected_log_max_abs_normal(windows),
            HolderCentering::Raw => 0.0,
        };
        xs.push((horizon / windows as f64).ln());
        ys.push(s.ln() - shift);
    }
    if xs.is_empty() {
        return Ok(HolderEstimate::ConstantPath);
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput(
            "fewer than two levels with nonzero increments".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(HolderEstimate::Exponent { value: sxy / sxx })
}
