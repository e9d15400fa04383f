//! Set partitions and the moment expansions built on them.
//!
//! `E[Y^p] = Σ_Π Π_{B∈Π} c_{|B|}(Y)` over all partitions `Π` of `{1..p}`.
//! Zero mean kills every partition with a singleton block, so only
//! singleton-free partitions contribute, each with at most `p/2` blocks.
//! Under dilative stability the cumulant of order `n` of an increment over a
//! lag `h` is `h^{(H−δ/2)n+δ}·c_n(1)`, which gives the per-partition factor
//! `h^{δ|Π|}` used by [`scaled_increment_moment`].
//!
//! Partitions are generated as restricted growth strings in lexicographic
//! order, which yields blocks sorted by their smallest element.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{holder_case, CumulantVector, DilativeParams, HolderCase};

/// Largest set size accepted by the enumerator (`Bell(12) = 4,213,597`).
pub const MAX_PARTITION_SIZE: usize = 12;

/// Relative slack used when comparing a moment against its Kolmogorov bound.
pub const DOMINANCE_SLACK: f64 = 1e-12;

/// A partition of `{1..p}` into nonempty blocks, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().map(Vec::len)
    }

    pub fn has_singleton(&self) -> bool {
        self.blocks.iter().any(|b| b.len() == 1)
    }

    fn from_rgs(rgs: &[u8], num_blocks: usize) -> Self {
        let mut blocks = vec![Vec::new(); num_blocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b as usize].push(i + 1);
        }
        Self { blocks }
    }
}

/// Lexicographic walk over restricted growth strings `a` with `a[0] = 0` and
/// `a[i] ≤ 1 + max(a[..i])`.
#[derive(Debug, Clone)]
pub struct Partitions {
    rgs: Vec<u8>,
    // prefix maxima: max_prefix[i] = max(a[..=i])
    max_prefix: Vec<u8>,
    skip_singletons: bool,
    started: bool,
    done: bool,
}

impl Partitions {
    fn new(p: usize, skip_singletons: bool) -> Self {
        Self {
            rgs: vec![0; p],
            max_prefix: vec![0; p],
            skip_singletons,
            started: false,
            done: false,
        }
    }

    fn advance(&mut self) -> bool {
        let p = self.rgs.len();
        for i in (1..p).rev() {
            if self.rgs[i] <= self.max_prefix[i - 1] {
                self.rgs[i] += 1;
                self.max_prefix[i] = self.max_prefix[i - 1].max(self.rgs[i]);
                for j in i + 1..p {
                    self.rgs[j] = 0;
                    self.max_prefix[j] = self.max_prefix[i];
                }
                return true;
            }
        }
        false
    }

    fn num_blocks(&self) -> usize {
        self.max_prefix.last().map_or(0, |m| *m as usize + 1)
    }

    fn current_has_singleton(&self) -> bool {
        let mut counts = [0u8; MAX_PARTITION_SIZE];
        for &b in &self.rgs {
            counts[b as usize] += 1;
        }
        counts[..self.num_blocks()].contains(&1)
    }

    /// Calls `f` with the block sizes of each partition without allocating a
    /// [`SetPartition`].
    fn for_each_block_sizes(mut self, mut f: impl FnMut(&[usize])) {
        let mut sizes = [0usize; MAX_PARTITION_SIZE];
        while self.step() {
            let k = self.num_blocks();
            sizes[..k].fill(0);
            for &b in &self.rgs {
                sizes[b as usize] += 1;
            }
            f(&sizes[..k]);
        }
    }

    // moves to the next partition passing the filter
    fn step(&mut self) -> bool {
        if self.done {
            return false;
        }
        loop {
            if !self.started {
                self.started = true;
                if self.rgs.is_empty() {
                    self.done = true;
                    return false;
                }
            } else if !self.advance() {
                self.done = true;
                return false;
            }
            if !self.skip_singletons || !self.current_has_singleton() {
                return true;
            }
        }
    }
}

impl Iterator for Partitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        self.step()
            .then(|| SetPartition::from_rgs(&self.rgs, self.num_blocks()))
    }
}

/// Every partition of `{1..p}` exactly once, in canonical order; with
/// `skip_singletons` only those whose blocks all have size ≥ 2.
pub fn enumerate_partitions(p: usize, skip_singletons: bool) -> Result<Partitions> {
    if !(1..=MAX_PARTITION_SIZE).contains(&p) {
        return Err(Error::SizeLimit {
            p,
            max: MAX_PARTITION_SIZE,
        });
    }
    Ok(Partitions::new(p, skip_singletons))
}

/// Singleton-free partitions of `{1..p}` grouped by block-size multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionProfile {
    p: usize,
    /// (sorted block sizes, number of partitions with exactly those sizes)
    classes: Vec<(Vec<usize>, u64)>,
}

impl PartitionProfile {
    pub fn singleton_free(p: usize) -> Result<Self> {
        let mut classes: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        enumerate_partitions(p, true)?.for_each_block_sizes(|sizes| {
            let mut key = sizes.to_vec();
            key.sort_unstable();
            *classes.entry(key).or_insert(0) += 1;
        });
        Ok(Self {
            p,
            classes: classes.into_iter().collect(),
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn classes(&self) -> &[(Vec<usize>, u64)] {
        &self.classes
    }

    /// `Σ_Π w(|Π|) · Π_B c_{|B|}`.
    fn weighted_sum(&self, c: &CumulantVector, weight: impl Fn(usize) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for (sizes, count) in &self.classes {
            let mut prod = *count as f64;
            for &n in sizes {
                prod *= c.get(n)?;
            }
            total += weight(sizes.len()) * prod;
        }
        Ok(total)
    }
}

fn check_even_order(c: &CumulantVector, p: usize) -> Result<()> {
    if !p.is_multiple_of(2) {
        return Err(Error::OddOrder(p));
    }
    if p == 0 || p > MAX_PARTITION_SIZE {
        return Err(Error::SizeLimit {
            p,
            max: MAX_PARTITION_SIZE,
        });
    }
    if p > c.p_max() {
        return Err(Error::OrderOutOfRange {
            order: p,
            max: c.p_max(),
        });
    }
    Ok(())
}

/// `p`-th raw moment of the zero-mean law with cumulants `c`.
pub fn moment_from_cumulants(c: &CumulantVector, p: usize) -> Result<f64> {
    check_even_order(c, p)?;
    PartitionProfile::singleton_free(p)?.weighted_sum(c, |_| 1.0)
}

/// `E|X(t)−X(s)|^p` for `|t−s| = h`:
/// `h^{(H−δ/2)p} · Σ_Π h^{δ|Π|} Π_B c_{|B|}(1)`.
pub fn scaled_increment_moment(params: &DilativeParams, c: &CumulantVector, p: usize, h: f64) -> Result<f64> {
    check_even_order(c, p)?;
    require_stationary(params)?;
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("lag h must be > 0 (got {h})")));
    }
    let profile = PartitionProfile::singleton_free(p)?;
    scaled_with_profile(&profile, params, c, h)
}

fn scaled_with_profile(profile: &PartitionProfile, params: &DilativeParams, c: &CumulantVector, h: f64) -> Result<f64> {
    let lead = h.powf((params.alpha - params.delta / 2.0) * profile.p() as f64);
    let delta = params.delta;
    Ok(lead * profile.weighted_sum(c, |blocks| h.powf(delta * blocks as f64))?)
}

fn require_stationary(params: &DilativeParams) -> Result<()> {
    if !params.stationary_increments {
        return Err(Error::Unsupported(
            "increment moments need stationary increments".into(),
        ));
    }
    params.validate().map_err(Error::InvalidParams)
}

/// Upper bound on `E|X(t)−X(s)|^p` for `h = |t−s| < 1` used in the
/// Kolmogorov continuity argument.
pub fn kolmogorov_bound(params: &DilativeParams, c: &CumulantVector, p: usize, h: f64) -> Result<f64> {
    check_even_order(c, p)?;
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidInput(format!("lag h must lie in (0,1) (got {h})")));
    }
    let hurst = params.alpha;
    match holder_case(params)? {
        HolderCase::NegativeDelta { .. } => Ok(moment_from_cumulants(c, p)? * h.powf(hurst * p as f64)),
        HolderCase::Intermediate { bound } => Ok(moment_from_cumulants(c, p)? * h.powf(bound * p as f64)),
        HolderCase::Critical { .. } => {
            if p != 2 {
                return Err(Error::Unsupported(format!(
                    "δ = 2H uses the second moment only (requested p = {p})"
                )));
            }
            Ok(c.get(2)? * h.powf(2.0 * hurst))
        }
    }
}

/// Smallest even `p` at which the Kolmogorov condition holds with `q > 0`.
pub fn min_even_order(params: &DilativeParams) -> Result<usize> {
    let case = holder_case(params)?;
    if let HolderCase::Critical { .. } = case {
        return Ok(2);
    }
    let threshold = 1.0 / case.bound();
    let mut p = 2usize;
    while (p as f64) <= threshold {
        p += 2;
    }
    Ok(p)
}

/// Largest ratio `scaled_increment_moment / kolmogorov_bound` over `lags`.
pub fn dominance_ratio(params: &DilativeParams, c: &CumulantVector, p: usize, lags: &[f64]) -> Result<f64> {
    check_even_order(c, p)?;
    require_stationary(params)?;
    let profile = PartitionProfile::singleton_free(p)?;
    let mut worst = f64::NEG_INFINITY;
    for &h in lags {
        let lhs = scaled_with_profile(&profile, params, c, h)?;
        let rhs = kolmogorov_bound(params, c, p, h)?;
        worst = worst.max(if rhs == 0.0 {
            if lhs == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            lhs / rhs
        });
    }
    Ok(worst)
}
