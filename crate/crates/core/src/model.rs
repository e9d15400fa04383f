//! Parameters, validity rules and closed-form scaling laws.
//!
//! A process is `(α, δ)`-dilatively stable when rescaling time by `T` is
//! equivalent in law to multiplying by `T^(α−δ/2)` and raising the law to the
//! convolution power `T^δ`. Convolution powers multiply every cumulant, which
//! is the only way they are represented here: all formulas below consume
//! cumulants of `X(1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::FlpKernel;
use crate::levy::LevySpec;
use crate::simulate::DeterministicPath;

/// Default highest cumulant order carried by a [`CumulantVector`].
pub const DEFAULT_P_MAX: usize = 8;

const EQ_TOL: f64 = 1e-12;

/// Scaling exponent `alpha` (the Hurst parameter `H` under stationary
/// increments) and convolution exponent `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilativeParams {
    pub alpha: f64,
    pub delta: f64,
    pub stationary_increments: bool,
}

/// A broken invariant of [`DilativeParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonFinite,
    NonPositiveAlpha { alpha: f64 },
    DeltaAboveTwoAlpha { delta: f64, two_alpha: f64 },
    HurstOutOfRange { hurst: f64 },
    DegenerateHurstNeedsZeroDelta { delta: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite => write!(f, "parameters must be finite"),
            Violation::NonPositiveAlpha { alpha } => write!(f, "alpha must be > 0 (got {alpha})"),
            Violation::DeltaAboveTwoAlpha { delta, two_alpha } => {
                write!(f, "delta ≤ 2α violated: {delta} > {two_alpha}")
            }
            Violation::HurstOutOfRange { hurst } => {
                write!(f, "stationary increments require H ∈ (0,1] (got {hurst})")
            }
            Violation::DegenerateHurstNeedsZeroDelta { delta } => {
                write!(f, "H=1 forces δ=0 (got δ={delta})")
            }
        }
    }
}

impl DilativeParams {
    pub fn new(alpha: f64, delta: f64) -> Self {
        Self {
            alpha,
            delta,
            stationary_increments: false,
        }
    }

    /// `(H, δ)` with stationary increments.
    pub fn stationary(hurst: f64, delta: f64) -> Self {
        Self {
            alpha: hurst,
            delta,
            stationary_increments: true,
        }
    }

    pub fn hurst(&self) -> f64 {
        self.alpha
    }

    /// Every violated invariant; empty when the parameters are admissible.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.alpha.is_finite() || !self.delta.is_finite() {
            out.push(Violation::NonFinite);
            return out;
        }
        if self.alpha <= 0.0 {
            out.push(Violation::NonPositiveAlpha { alpha: self.alpha });
        }
        if self.delta > 2.0 * self.alpha + EQ_TOL {
            out.push(Violation::DeltaAboveTwoAlpha {
                delta: self.delta,
                two_alpha: 2.0 * self.alpha,
            });
        }
        if self.stationary_increments {
            if self.alpha <= 0.0 || self.alpha > 1.0 {
                out.push(Violation::HurstOutOfRange { hurst: self.alpha });
            }
            if (self.alpha - 1.0).abs() <= EQ_TOL && self.delta.abs() > EQ_TOL {
                out.push(Violation::DegenerateHurstNeedsZeroDelta { delta: self.delta });
            }
        }
        out
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    /// Exponent of `t` in the order-`n` cumulant: `(α − δ/2)·n + δ`.
    pub fn cumulant_exponent(&self, n: usize) -> f64 {
        (self.alpha - self.delta / 2.0) * n as f64 + self.delta
    }
}

/// Cumulants `c_1..c_pmax` of `X(1)`. Index 0 holds `c_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantVector {
    entries: Vec<f64>,
}

impl CumulantVector {
    /// Builds from `c_1..c_pmax`. Requires zero mean, `c_2 > 0`, nonnegative
    /// even-order entries and an even `p_max ≥ 2`.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        let p = entries.len();
        if p < 2 || !p.is_multiple_of(2) {
            return Err(Error::InvalidCumulants(format!("p_max must be even and ≥ 2 (got {p})")));
        }
        if entries.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCumulants("entries must be finite".into()));
        }
        if entries[0] != 0.0 {
            return Err(Error::InvalidCumulants(format!("c_1 must be 0 (got {})", entries[0])));
        }
        if entries[1] <= 0.0 {
            return Err(Error::InvalidCumulants(format!("c_2 must be > 0 (got {})", entries[1])));
        }
        for (i, c) in entries.iter().enumerate() {
            let n = i + 1;
            if n % 2 == 0 && *c < 0.0 {
                return Err(Error::InvalidCumulants(format!(
                    "even-order cumulant c_{n} is negative ({c})"
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Zero-mean vector from `c_2, c_3, …`; pads with zeros to an even length.
    pub fn from_higher(higher: &[f64]) -> Result<Self> {
        let mut entries = Vec::with_capacity(higher.len() + 2);
        entries.push(0.0);
        entries.extend_from_slice(higher);
        if entries.len() % 2 != 0 {
            entries.push(0.0);
        }
        Self::new(entries)
    }

    /// Gaussian: only `c_2 = variance` is nonzero.
    pub fn gaussian(variance: f64, p_max: usize) -> Result<Self> {
        let mut entries = vec![0.0; p_max];
        if p_max >= 2 {
            entries[1] = variance;
        }
        Self::new(entries)
    }

    pub fn p_max(&self) -> usize {
        self.entries.len()
    }

    /// Cumulant of order `n` (1-based).
    pub fn get(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.entries.len() {
            return Err(Error::OrderOutOfRange {
                order: n,
                max: self.entries.len(),
            });
        }
        Ok(self.entries[n - 1])
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Multiplies every cumulant by `c`: the convolution power `X^{⊛c}`.
    pub fn convolution_power(&self, c: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|x| x * c).collect(),
        }
    }

    pub fn all_nonnegative(&self) -> bool {
        self.entries.iter().all(|c| *c >= 0.0)
    }
}

/// Cumulant of order `n` of `X(t)`: `t^((α−δ/2)n+δ) · c_n(1)`.
pub fn cumulant_at(params: &DilativeParams, c1: &CumulantVector, n: usize, t: f64) -> Result<f64> {
    if n < 2 || n > c1.p_max() {
        return Err(Error::OrderOutOfRange {
            order: n,
            max: c1.p_max(),
        });
    }
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("t must be > 0 (got {t})")));
    }
    let base = c1.get(n)?;
    if base == 0.0 {
        return Ok(0.0);
    }
    let e = params.cumulant_exponent(n);
    // exp(e·ln t + ln|c|) keeps wide time ranges from overflowing the power
    Ok(base.signum() * (e * t.ln() + base.abs().ln()).exp())
}

/// `½·var1·(t1^{2H} + t2^{2H} − |t1−t2|^{2H})`.
pub fn fbm_covariance(hurst: f64, var1: f64, t1: f64, t2: f64) -> f64 {
    let two_h = 2.0 * hurst;
    0.5 * var1 * (t1.powf(two_h) + t2.powf(two_h) - (t1 - t2).abs().powf(two_h))
}

/// Which branch of the Hölder continuity result applies, with the supremum of
/// guaranteed local Hölder orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum HolderCase {
    /// `δ < 0`: every `γ < H`.
    NegativeDelta { bound: f64 },
    /// `0 ≤ δ < 2H`: every `γ < H − δ/2`.
    Intermediate { bound: f64 },
    /// `δ = 2H`, `H > 1/2`: every `γ < H − 1/2`.
    Critical { bound: f64 },
}

impl HolderCase {
    pub fn bound(&self) -> f64 {
        match *self {
            HolderCase::NegativeDelta { bound }
            | HolderCase::Intermediate { bound }
            | HolderCase::Critical { bound } => bound,
        }
    }
}

pub fn holder_case(params: &DilativeParams) -> Result<HolderCase> {
    if !params.stationary_increments {
        return Err(Error::Unsupported("Hölder cases need stationary increments".into()));
    }
    if let Err(v) = params.validate() {
        return Err(Error::InvalidParams(v));
    }
    let h = params.alpha;
    let d = params.delta;
    if (d - 2.0 * h).abs() <= EQ_TOL {
        if h > 0.5 {
            Ok(HolderCase::Critical { bound: h - 0.5 })
        } else {
            Err(Error::Unsupported(format!(
                "δ = 2H with H = {h} ≤ 1/2 has no continuity guarantee"
            )))
        }
    } else if d < 0.0 {
        Ok(HolderCase::NegativeDelta { bound: h })
    } else {
        Ok(HolderCase::Intermediate { bound: h - d / 2.0 })
    }
}

/// Which concrete process a [`ProcessSpec`] describes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case")]
pub enum ProcessKind {
    Fbm { hurst: f64, var1: f64 },
    Flp { hurst: f64, levy: LevySpec },
    Deterministic { path: DeterministicPath },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub params: DilativeParams,
    /// Analytic cumulants of `X(1)` when available.
    pub cumulants: Option<CumulantVector>,
    /// Marginals are Gaussian. FBM is a baseline, not dilatively stable in
    /// the strict (non-Gaussian) sense; this is metadata only.
    pub gaussian: bool,
}

impl ProcessSpec {
    pub fn fbm(hurst: f64, var1: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::InvalidInput(format!("FBM requires H ∈ (0,1) (got {hurst})")));
        }
        if !(var1 > 0.0 && var1.is_finite()) {
            return Err(Error::InvalidInput(format!("var1 must be > 0 (got {var1})")));
        }
        Ok(Self {
            kind: ProcessKind::Fbm { hurst, var1 },
            params: DilativeParams::stationary(hurst, 0.0),
            cumulants: Some(CumulantVector::gaussian(var1, DEFAULT_P_MAX)?),
            gaussian: true,
        })
    }

    /// Fractional Lévy process, `(H, 1)`-dilatively stable.
    pub fn flp(hurst: f64, levy: LevySpec) -> Result<Self> {
        Self::flp_with_order(hurst, levy, DEFAULT_P_MAX)
    }

    pub fn flp_with_order(hurst: f64, levy: LevySpec, p_max: usize) -> Result<Self> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(Error::InvalidInput(format!("FLP requires H ∈ (1/2,1) (got {hurst})")));
        }
        levy.validate()?;
        let kernel = FlpKernel::new(hurst);
        let mut entries = vec![0.0; p_max];
        for n in 2..=p_max {
            entries[n - 1] = levy.cumulant(n) * kernel.moment_integral(n);
        }
        Ok(Self {
            kind: ProcessKind::Flp { hurst, levy },
            params: DilativeParams::stationary(hurst, 1.0),
            cumulants: Some(CumulantVector::new(entries)?),
            gaussian: false,
        })
    }

    pub fn deterministic(path: DeterministicPath) -> Self {
        let alpha = match path {
            DeterministicPath::Identity => 1.0,
            DeterministicPath::Power { beta } => beta,
            DeterministicPath::Zero => 1.0,
        };
        Self {
            kind: ProcessKind::Deterministic { path },
            params: DilativeParams::new(alpha, 0.0),
            cumulants: None,
            gaussian: false,
        }
    }

    pub fn hurst(&self) -> f64 {
        self.params.alpha
    }

    /// `c_2(1)`, the variance of `X(1)`, when known.
    pub fn variance_at_one(&self) -> Option<f64> {
        self.cumulants.as_ref().and_then(|c| c.get(2).ok())
    }
}

/// Strictly increasing sample times with the path values observed there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SamplePath {
    /// Checks the time grid only. The start-at-zero property is a property of
    /// the process and is checked by the verification harness.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "times ({}) and values ({}) differ in length",
                times.len(),
                values.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::InvalidInput("empty path".into()));
        }
        if times.iter().chain(values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite time or value".into()));
        }
        if times[0] < 0.0 {
            return Err(Error::InvalidInput("times must be ≥ 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("times must be strictly increasing".into()));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn starts_at_zero(&self) -> bool {
        self.times[0] != 0.0 || self.values[0] == 0.0
    }

    /// Index of the sample at `t`, matching to a relative 1e-12.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * t.abs();
        let i = self.times.partition_point(|x| *x < t - tol);
        (i < self.times.len() && (self.times[i] - t).abs() <= tol).then_some(i)
    }

    /// Observed value at `t`; no interpolation.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        self.index_of(t)
            .map(|i| self.values[i])
            .ok_or(Error::SamplingMismatch { time: t })
    }

    /// Multiplies all values by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.times, self.values)
    }
}
