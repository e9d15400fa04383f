//! Finite-activity Lévy drivers: compensated compound Poisson components plus
//! an optional Brownian part.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CumulantVector;
use crate::seed::rng_from_seed;

/// Law of a single jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum JumpLaw {
    /// `+up` with probability `prob_up`, otherwise `−down`.
    TwoPoint { up: f64, down: f64, prob_up: f64 },
    /// Exponential jumps with the given mean; the driver is compensated.
    Exponential { mean: f64 },
}

impl JumpLaw {
    /// `E[J^n]`.
    pub fn raw_moment(&self, n: usize) -> f64 {
        match *self {
            JumpLaw::TwoPoint { up, down, prob_up } => {
                prob_up * up.powi(n as i32) + (1.0 - prob_up) * (-down).powi(n as i32)
            }
            JumpLaw::Exponential { mean } => {
                let fact: f64 = (1..=n).map(|k| k as f64).product();
                fact * mean.powi(n as i32)
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpLaw::TwoPoint { up, down, prob_up } => {
                if rng.random::<f64>() < prob_up {
                    up
                } else {
                    -down
                }
            }
            JumpLaw::Exponential { mean } => Exp::new(1.0 / mean).expect("validated").sample(rng),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            JumpLaw::TwoPoint { up, down, prob_up } => {
                if !(up.is_finite() && down.is_finite() && up >= 0.0 && down >= 0.0) || up + down == 0.0 {
                    return Err(Error::InvalidLevy(format!(
                        "two-point jumps need a, b ≥ 0, not both 0 (got {up}, {down})"
                    )));
                }
                if !(0.0..=1.0).contains(&prob_up) {
                    return Err(Error::InvalidLevy(format!(
                        "two-point probability must be in [0,1] (got {prob_up})"
                    )));
                }
                Ok(())
            }
            JumpLaw::Exponential { mean } => {
                if mean > 0.0 && mean.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidLevy(format!("exponential mean must be > 0 (got {mean})")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "component", rename_all = "snake_case")]
pub enum LevyComponent {
    CompoundPoisson { rate: f64, jumps: JumpLaw },
    Gaussian { sigma: f64 },
}

/// Sum of independent components, compensated to zero mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevySpec {
    pub components: Vec<LevyComponent>,
}

/// One jump of a compound Poisson path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

impl LevySpec {
    /// Checks each component; see [`LevySpec::validate`] for the stricter
    /// non-Gaussian requirement.
    pub fn new(components: Vec<LevyComponent>) -> Result<Self> {
        let s = Self { components };
        s.validate_components()?;
        Ok(s)
    }

    pub fn brownian(sigma: f64) -> Result<Self> {
        Self::new(vec![LevyComponent::Gaussian { sigma }])
    }

    /// Compound Poisson with exponential jumps of mean `mean`.
    pub fn compound_poisson_exp(rate: f64, mean: f64) -> Result<Self> {
        Self::new(vec![LevyComponent::CompoundPoisson {
            rate,
            jumps: JumpLaw::Exponential { mean },
        }])
    }

    /// Driver of a dilatively stable process: valid components and at least
    /// one jump component with positive rate.
    pub fn validate(&self) -> Result<()> {
        self.validate_components()?;
        let has_jumps = self
            .components
            .iter()
            .any(|c| matches!(*c, LevyComponent::CompoundPoisson { rate, .. } if rate > 0.0));
        if !has_jumps {
            return Err(Error::InvalidLevy(
                "at least one compound Poisson component with rate > 0 is required (X(1) must be non-Gaussian)".into(),
            ));
        }
        Ok(())
    }

    fn validate_components(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidLevy("no components".into()));
        }
        for c in &self.components {
            match *c {
                LevyComponent::CompoundPoisson { rate, jumps } => {
                    if !(rate >= 0.0 && rate.is_finite()) {
                        return Err(Error::InvalidLevy(format!("jump rate must be ≥ 0 (got {rate})")));
                    }
                    jumps.validate()?;
                }
                LevyComponent::Gaussian { sigma } => {
                    if !(sigma >= 0.0 && sigma.is_finite()) {
                        return Err(Error::InvalidLevy(format!("sigma must be ≥ 0 (got {sigma})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Compensating drift per unit time, `Σ λ·E[J]`.
    pub fn drift(&self) -> f64 {
        self.components
            .iter()
            .map(|c| match *c {
                LevyComponent::CompoundPoisson { rate, jumps } => rate * jumps.raw_moment(1),
                LevyComponent::Gaussian { .. } => 0.0,
            })
            .sum()
    }

    pub fn sigma(&self) -> f64 {
        self.components
            .iter()
            .map(|c| match *c {
                LevyComponent::Gaussian { sigma } => sigma * sigma,
                _ => 0.0,
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn has_gaussian_component(&self) -> bool {
        self.sigma() > 0.0
    }

    /// Cumulant of order `n` of `L(1)`: `Σ λ·E[J^n]`, plus `σ²` at `n = 2`;
    /// zero at `n = 1` after compensation.
    pub fn cumulant(&self, n: usize) -> f64 {
        if n <= 1 {
            return 0.0;
        }
        let mut c: f64 = self
            .components
            .iter()
            .map(|comp| match *comp {
                LevyComponent::CompoundPoisson { rate, jumps } => rate * jumps.raw_moment(n),
                LevyComponent::Gaussian { .. } => 0.0,
            })
            .sum();
        if n == 2 {
            c += self.sigma().powi(2);
        }
        c
    }

    pub fn cumulants(&self, p_max: usize) -> Result<CumulantVector> {
        CumulantVector::new((1..=p_max).map(|n| self.cumulant(n)).collect())
    }

    /// Jumps of all compound Poisson components on `[start, end)`, unsorted.
    pub fn sample_jumps<R: Rng + ?Sized>(&self, start: f64, end: f64, rng: &mut R) -> Vec<Jump> {
        let span = end - start;
        let mut out = Vec::new();
        for c in &self.components {
            if let LevyComponent::CompoundPoisson { rate, jumps } = *c {
                let mean = rate * span;
                let count = if mean > 0.0 {
                    Poisson::new(mean).expect("positive mean").sample(rng) as usize
                } else {
                    0
                };
                out.reserve(count);
                for _ in 0..count {
                    let time = start + span * rng.random::<f64>();
                    out.push(Jump {
                        time,
                        size: jumps.sample(rng),
                    });
                }
            }
        }
        out
    }
}

impl fmt::Display for LevySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|c| match c {
                LevyComponent::CompoundPoisson {
                    rate,
                    jumps: JumpLaw::Exponential { mean },
                } => {
                    format!("cpois:rate={rate},jumps=cexp:mu={mean}")
                }
                LevyComponent::CompoundPoisson {
                    rate,
                    jumps: JumpLaw::TwoPoint { up, down, prob_up },
                } => {
                    format!("cpois:rate={rate},jumps=two:a={up},b={down},p={prob_up}")
                }
                LevyComponent::Gaussian { sigma } => format!("gauss:sigma={sigma}"),
            })
            .collect();
        f.write_str(&parts.join(";"))
    }
}

/// Parses `cpois:rate=5,jumps=cexp:mu=1`, `cpois:rate=2,jumps=two:a=1,b=1,p=0.5`
/// and `gauss:sigma=0.3`, with components joined by `;`.
impl FromStr for LevySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut components = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            components.push(parse_component(part)?);
        }
        LevySpec::new(components)
    }
}

fn parse_component(s: &str) -> Result<LevyComponent> {
    let bad = |msg: &str| Error::InvalidLevy(format!("{msg} in `{s}`"));
    let (kind, rest) = s.split_once(':').ok_or_else(|| bad("missing `kind:`"))?;
    match kind {
        "gauss" => {
            let kv = parse_pairs(rest)?;
            let sigma = lookup(&kv, "sigma").ok_or_else(|| bad("missing sigma"))?;
            Ok(LevyComponent::Gaussian { sigma })
        }
        "cpois" => {
            let (head, jumps) = match rest.split_once("jumps=") {
                Some((h, j)) => (h.trim_end_matches(','), j),
                None => return Err(bad("missing jumps=")),
            };
            let rate = lookup(&parse_pairs(head)?, "rate").ok_or_else(|| bad("missing rate"))?;
            let (law, args) = jumps.split_once(':').ok_or_else(|| bad("missing jump law"))?;
            let kv = parse_pairs(args)?;
            let jumps = match law {
                "cexp" | "exp" => JumpLaw::Exponential {
                    mean: lookup(&kv, "mu").ok_or_else(|| bad("missing mu"))?,
                },
                "two" => JumpLaw::TwoPoint {
                    up: lookup(&kv, "a").ok_or_else(|| bad("missing a"))?,
                    down: lookup(&kv, "b").ok_or_else(|| bad("missing b"))?,
                    prob_up: lookup(&kv, "p").ok_or_else(|| bad("missing p"))?,
                },
                other => return Err(bad(&format!("unknown jump law `{other}`"))),
            };
            Ok(LevyComponent::CompoundPoisson { rate, jumps })
        }
        other => Err(bad(&format!("unknown component `{other}`"))),
    }
}

fn parse_pairs(s: &str) -> Result<Vec<(String, f64)>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::InvalidLevy(format!("expected key=value, got `{p}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidLevy(format!("not a number: `{v}`")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn lookup(kv: &[(String, f64)], key: &str) -> Option<f64> {
    kv.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
}

/// I.i.d. increments over `count` windows of length `dt`: the jumps falling
/// in each window, minus the compensating drift, plus `N(0, σ²·dt)`.
pub fn simulate_levy_increments(levy: &LevySpec, dt: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    levy.validate_components()?;
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be > 0 (got {dt})")));
    }
    let mut rng = rng_from_seed(seed);
    let span = dt * count as f64;
    let mut out = vec![-levy.drift() * dt; count];
    for j in levy.sample_jumps(0.0, span, &mut rng) {
        let cell = ((j.time / dt) as usize).min(count.saturating_sub(1));
        out[cell] += j.size;
    }
    let sigma = levy.sigma();
    if sigma > 0.0 {
        let sd = sigma * dt.sqrt();
        for x in out.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x += sd * z;
        }
    }
    Ok(out)
}
