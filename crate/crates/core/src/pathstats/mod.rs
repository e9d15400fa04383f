//! Path statistics along geometric sequences: sequences with an exact
//! root condition, ratio statistics `|X(t_n) − X(t_0)| / |t_n − t_0|^κ`,
//! the vanish/diverge dichotomy, the exponent estimator and the two-hypothesis
//! discriminator.
//!
//! Ratios are only ever read at exact sample times; a path lacking a
//! sequence point is a [`Error::SamplingMismatch`].

mod holder;

pub use holder::{estimate_holder_exponent, expected_log_max_abs_normal, HolderCentering, HolderEstimate};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SamplePath;

/// Floor applied to ratios before taking logarithms.
pub const RATIO_FLOOR: f64 = f64::MIN_POSITIVE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToAnchor,
    ToZero,
    ToInfinity,
}

/// `t_n = t0 + r^n` (towards the anchor or zero) or `t_n = r^{−n}` (towards
/// infinity), for `n = start..start+count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricGrid {
    pub anchor: f64,
    pub ratio: f64,
    pub count: usize,
    pub start: u32,
    pub direction: Direction,
}

impl GeometricGrid {
    pub fn new(anchor: f64, ratio: f64, count: usize, start: u32, direction: Direction) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidInput(format!("ratio must lie in (0,1) (got {ratio})")));
        }
        if count == 0 {
            return Err(Error::InvalidInput("geometric grid needs at least one point".into()));
        }
        if !(anchor >= 0.0 && anchor.is_finite()) {
            return Err(Error::InvalidInput(format!("anchor must be ≥ 0 (got {anchor})")));
        }
        if direction != Direction::ToAnchor && anchor != 0.0 {
            return Err(Error::InvalidInput(format!("{direction} sequences are anchored at 0")));
        }
        Ok(Self {
            anchor,
            ratio,
            count,
            start,
            direction,
        })
    }

    pub fn to_zero(ratio: f64, count: usize) -> Result<Self> {
        Self::new(0.0, ratio, count, 1, Direction::ToZero)
    }

    pub fn to_anchor(anchor: f64, ratio: f64, count: usize) -> Result<Self> {
        Self::new(anchor, ratio, count, 1, Direction::ToAnchor)
    }

    pub fn to_infinity(ratio: f64, count: usize) -> Result<Self> {
        Self::new(0.0, ratio, count, 1, Direction::ToInfinity)
    }

    pub fn with_start(self, start: u32) -> Self {
        Self { start, ..self }
    }

    /// Reference point `t0` of the ratios.
    pub fn reference(&self) -> f64 {
        self.anchor
    }

    /// Whether a vanishing ratio sequence means `κ` lies below the exponent.
    pub fn vanishes_below_exponent(&self) -> bool {
        self.direction != Direction::ToInfinity
    }

    pub fn build_sequence(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| {
                let n = (self.start as usize + i) as i32;
                match self.direction {
                    Direction::ToAnchor | Direction::ToZero => self.anchor + self.ratio.powi(n),
                    Direction::ToInfinity => self.ratio.powi(-n),
                }
            })
            .collect()
    }

    /// Anchors `k·T/anchors`, `k = 0..anchors`, sharing offsets `r^n` from the
    /// first `n` with `r^n < T/anchors` down to the resolution `T/steps`.
    pub fn anchored_family(horizon: f64, steps: usize, ratio: f64, anchors: usize) -> Result<Vec<Self>> {
        if anchors == 0 || !(horizon >= 1.0) {
            return Err(Error::InvalidInput(
                "anchored family needs ≥ 1 anchor and horizon ≥ 1".into(),
            ));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidInput(format!("ratio must lie in (0,1) (got {ratio})")));
        }
        let spacing = horizon / anchors as f64;
        let resolution = horizon / steps as f64;
        let mut start = 1u32;
        while ratio.powi(start as i32) >= spacing.min(1.0) {
            start += 1;
        }
        let mut end = start;
        while ratio.powi(end as i32 + 1) >= resolution {
            end += 1;
        }
        if ratio.powi(start as i32) < resolution {
            return Err(Error::InvalidInput(format!(
                "no offsets r^n between the resolution {resolution:e} and the anchor spacing {spacing}"
            )));
        }
        (0..anchors)
            .map(|k| {
                Self::new(
                    k as f64 * spacing,
                    ratio,
                    (end - start + 1) as usize,
                    start,
                    Direction::ToAnchor,
                )
            })
            .collect()
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::ToAnchor => "to-anchor",
            Direction::ToZero => "to-zero",
            Direction::ToInfinity => "to-infinity",
        })
    }
}

/// Sorted union of the reference points and sequence points of `grids`.
pub fn probe_times(grids: &[GeometricGrid]) -> Vec<f64> {
    let mut times: Vec<f64> = grids
        .iter()
        .flat_map(|g| std::iter::once(g.reference()).chain(g.build_sequence()))
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

/// `R_n = |X(t_n) − X(t_0)| / |t_n − t_0|^κ`.
pub fn ratio_statistics(path: &SamplePath, grid: &GeometricGrid, kappa: f64) -> Result<Vec<f64>> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidInput(format!("kappa must be > 0 (got {kappa})")));
    }
    let t0 = grid.reference();
    let x0 = path.value_at(t0)?;
    grid.build_sequence()
        .into_iter()
        .map(|t| Ok((path.value_at(t)? - x0).abs() / (t - t0).abs().powf(kappa)))
        .collect()
}

/// Mean over `grids` of `ln max(R_n, floor)`, index by index. All grids must
/// share ratio, start, count and direction.
pub fn pooled_log_ratios(path: &SamplePath, grids: &[GeometricGrid], kappa: f64) -> Result<Vec<f64>> {
    let first = grids
        .first()
        .ok_or_else(|| Error::InvalidInput("no geometric grids given".into()))?;
    if grids.iter().any(|g| {
        g.ratio != first.ratio || g.start != first.start || g.count != first.count || g.direction != first.direction
    }) {
        return Err(Error::InvalidInput(
            "pooled grids must share ratio, start, count and direction".into(),
        ));
    }
    let mut sum = vec![0.0; first.count];
    for g in grids {
        for (s, r) in sum.iter_mut().zip(ratio_statistics(path, g, kappa)?) {
            *s += r.max(RATIO_FLOOR).ln();
        }
    }
    let m = grids.len() as f64;
    Ok(sum.into_iter().map(|s| s / m).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DichotomyRule {
    pub window: usize,
    pub diverge_threshold: f64,
    pub vanish_threshold: f64,
}

impl DichotomyRule {
    pub fn new(window: usize, diverge_threshold: f64, vanish_threshold: f64) -> Result<Self> {
        if window < 2 {
            return Err(Error::InvalidInput(format!("window must be ≥ 2 (got {window})")));
        }
        if !(vanish_threshold < 1.0 && 1.0 < diverge_threshold) {
            return Err(Error::InvalidInput(format!(
                "thresholds must satisfy ρ⁻ < 1 < ρ⁺ (got {vanish_threshold}, {diverge_threshold})"
            )));
        }
        Ok(Self {
            window,
            diverge_threshold,
            vanish_threshold,
        })
    }
}

impl Default for DichotomyRule {
    fn default() -> Self {
        Self {
            window: 32,
            diverge_threshold: 1e-9f64.exp(),
            vanish_threshold: (-1e-9f64).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Vanishes,
    Diverges,
    Indeterminate,
}

/// Per-step geometric trend `exp(slope)` of the least-squares line through
/// `(n, ln R_n)` over the last `min(window + 1, len)` points.
pub fn log_trend(log_ratios: &[f64], window: usize) -> f64 {
    let take = (window + 1).min(log_ratios.len());
    if take < 2 {
        return 1.0;
    }
    let tail = &log_ratios[log_ratios.len() - take..];
    let n = take as f64;
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = tail.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in tail.iter().enumerate() {
        let dx = i as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    (sxy / sxx).exp()
}

pub fn classify_log_ratios(log_ratios: &[f64], rule: &DichotomyRule) -> Verdict {
    let g = log_trend(log_ratios, rule.window);
    if g >= rule.diverge_threshold {
        Verdict::Diverges
    } else if g <= rule.vanish_threshold {
        Verdict::Vanishes
    } else {
        Verdict::Indeterminate
    }
}

pub fn classify_dichotomy(ratios: &[f64], rule: &DichotomyRule) -> Verdict {
    let logs: Vec<f64> = ratios.iter().map(|r| r.max(RATIO_FLOOR).ln()).collect();
    classify_log_ratios(&logs, rule)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub trace: Vec<(f64, Verdict)>,
}

/// `κ = k/20`, `k = 1..=30`.
pub fn default_kappa_grid() -> Vec<f64> {
    (1..=30).map(|k| k as f64 / 20.0).collect()
}

fn format_trace(trace: &[(f64, Verdict)]) -> String {
    trace
        .iter()
        .map(|(k, v)| format!("{k}:{v:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Midpoint of the κ-interval where the verdict switches from "κ below the
/// exponent" to "κ above". Ratios are pooled over `grids`. With noisy
/// verdicts the split maximizing agreement with a single switch is used.
pub fn estimate_alpha(
    path: &SamplePath,
    grids: &[GeometricGrid],
    kappa_grid: &[f64],
    rule: &DichotomyRule,
) -> Result<AlphaEstimate> {
    if kappa_grid.is_empty() || kappa_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("kappa grid must be nonempty and increasing".into()));
    }
    let below_verdict = if grids.first().is_none_or(|g| g.vanishes_below_exponent()) {
        Verdict::Vanishes
    } else {
        Verdict::Diverges
    };
    let trace = kappa_grid
        .iter()
        .map(|&k| Ok((k, classify_log_ratios(&pooled_log_ratios(path, grids, k)?, rule))))
        .collect::<Result<Vec<_>>>()?;
    let side = |v: Verdict| match v {
        Verdict::Indeterminate => 0i32,
        v if v == below_verdict => -1,
        _ => 1,
    };
    let signs: Vec<i32> = trace.iter().map(|(_, v)| side(*v)).collect();
    if !signs.contains(&-1) || !signs.contains(&1) {
        return Err(Error::BracketFailure {
            trace: format_trace(&trace),
        });
    }
    // split s: entries < s should be below, entries ≥ s above
    let mut best = (i64::MIN, 0usize);
    for s in 0..=signs.len() {
        let score: i64 = signs[..s]
            .iter()
            .map(|&x| i64::from(x == -1) - i64::from(x == 1))
            .sum::<i64>()
            + signs[s..]
                .iter()
                .map(|&x| i64::from(x == 1) - i64::from(x == -1))
                .sum::<i64>();
        if score > best.0 {
            best = (score, s);
        }
    }
    let s = best.1;
    let lower = signs[..s].iter().rposition(|&x| x == -1).map(|i| trace[i].0);
    let upper = signs[s..].iter().position(|&x| x == 1).map(|i| trace[s + i].0);
    match (lower, upper) {
        (Some(lower), Some(upper)) => Ok(AlphaEstimate {
            estimate: 0.5 * (lower + upper),
            lower,
            upper,
            trace,
        }),
        _ => Err(Error::BracketFailure {
            trace: format_trace(&trace),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    /// The smaller of the two hypothesized exponents.
    First,
    /// The larger one.
    Second,
    Undecided,
}

/// Classifies the pooled ratios at `κ* = (H1 + H2)/2`.
pub fn discriminate(
    path: &SamplePath,
    grids: &[GeometricGrid],
    h1: f64,
    h2: f64,
    rule: &DichotomyRule,
) -> Result<Label> {
    let kappa = 0.5 * (h1 + h2);
    let verdict = classify_log_ratios(&pooled_log_ratios(path, grids, kappa)?, rule);
    let vanish_means_larger = grids.first().is_none_or(|g| g.vanishes_below_exponent());
    Ok(match (verdict, vanish_means_larger) {
        (Verdict::Indeterminate, _) => Label::Undecided,
        (Verdict::Vanishes, true) | (Verdict::Diverges, false) => Label::Second,
        _ => Label::First,
    })
}
