//! How many random measurements suffice for the (group) RIP of order `k`
//! with constants `1 ± δ`, with probability at least `1 - ζ`.
//!
//! A single `k`-dimensional support fails with probability at most
//! `2 (12/δ)^k exp(-m δ²/32)` for Gaussian or Bernoulli ensembles; a union
//! bound over a collection `J` of supports multiplies this by `|J|`, and
//! solving for `m` gives
//!
//! `m ≥ 32/δ² · [k ln(12/δ) + ln|J| + ln(2/ζ)]`.
//!
//! `ln|J|` is bounded with Sauer's lemma: `k(1 + ln n - ln k)` for plain
//! sparsity and `s_max(1 + ln g - ln s_max)` for group sparsity. Natural
//! logarithms throughout; the bracket is evaluated in double-double
//! arithmetic and rounded up once.

use num_bigint::BigUint;
use serde::Serialize;

use crate::dd::Dd;
use crate::error::{invalid, Result};
use crate::groups::GroupPartition;

/// Concentration exponent `ε²/4 - ε³/6`, defined on `[0, 0.75]`.
pub fn c0(eps: f64) -> Result<f64> {
    if !(0.0..=0.75).contains(&eps) {
        return Err(invalid(format!("c0 is only used on [0, 0.75], got {eps}")));
    }
    Ok(eps * eps / 4.0 - eps * eps * eps / 6.0)
}

/// `c0(ε) ≥ ε²/8`.
pub fn c0_dominates_quadratic(eps: f64) -> Result<bool> {
    Ok(c0(eps)? >= eps * eps / 8.0)
}

fn check_sauer(n: u64, d: u64) -> Result<()> {
    if d == 0 || d > n {
        return Err(invalid(format!("Sauer bound needs 1 <= d <= n, got n = {n}, d = {d}")));
    }
    Ok(())
}

/// `(e n/d)^d`, possibly `+inf` for large arguments; see [`ln_sauer_bound`].
pub fn sauer_bound(n: u64, d: u64) -> Result<f64> {
    Ok(ln_sauer_bound(n, d)?.exp())
}

/// `d (1 + ln n - ln d)`
pub fn ln_sauer_bound(n: u64, d: u64) -> Result<f64> {
    check_sauer(n, d)?;
    Ok(ln_sauer_tf(n, d).hi)
}

fn ln_sauer_tf(n: u64, d: u64) -> Dd {
    let (n, d) = (Dd::from(n as f64), Dd::from(d as f64));
    d * (Dd::from(1.0) + n.ln() - d.ln())
}

/// `Σ_{i=0}^{d} C(n, i)`, exactly.
pub fn exact_count(n: u64, d: u64) -> BigUint {
    let mut total = BigUint::from(0u32);
    let mut term = BigUint::from(1u32);
    for i in 0..=d.min(n) {
        total += &term;
        term = term * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SparsityMode {
    Pure,
    Group { g: u64, s_max: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSizeQuery {
    pub n: u64,
    pub k: u64,
    pub delta: f64,
    pub zeta: f64,
    pub mode: SparsityMode,
}

impl SampleSizeQuery {
    pub fn new(n: u64, k: u64, delta: f64, zeta: f64, mode: SparsityMode) -> Result<Self> {
        if k == 0 || k > n {
            return Err(invalid(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
        }
        if !(delta > 0.0 && delta <= 0.75) {
            return Err(invalid(format!("delta = {delta} must lie in (0, 0.75]")));
        }
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(invalid(format!("zeta = {zeta} must lie in (0, 1)")));
        }
        if let SparsityMode::Group { g, s_max } = mode {
            if s_max == 0 || s_max > g {
                return Err(invalid(format!("need 1 <= s_max <= g, got s_max = {s_max}, g = {g}")));
            }
        }
        Ok(Self { n, k, delta, zeta, mode })
    }

    pub fn pure(n: u64, k: u64, delta: f64, zeta: f64) -> Result<Self> {
        Self::new(n, k, delta, zeta, SparsityMode::Pure)
    }

    pub fn group(n: u64, k: u64, g: u64, s_max: u64, delta: f64, zeta: f64) -> Result<Self> {
        Self::new(n, k, delta, zeta, SparsityMode::Group { g, s_max })
    }

    /// Group query with `g` groups and `s_max = min(⌊k/l_min⌋, g)`.
    pub fn from_partition(partition: &GroupPartition, k: u64, delta: f64, zeta: f64) -> Result<Self> {
        let g = partition.num_groups() as u64;
        let s_max = partition.s_max(k as usize).min(partition.num_groups()) as u64;
        if s_max == 0 {
            return Err(invalid(format!("k = {k} is smaller than every group")));
        }
        Self::group(partition.n() as u64, k, g, s_max, delta, zeta)
    }

    fn ln_family_tf(&self) -> Dd {
        match self.mode {
            SparsityMode::Pure => ln_sauer_tf(self.n, self.k),
            SparsityMode::Group { g, s_max } => ln_sauer_tf(g, s_max),
        }
    }

    /// Sauer bound on `ln|J|` for this query.
    pub fn ln_family_size(&self) -> f64 {
        self.ln_family_tf().hi
    }

    /// Union-bound failure probability at `m` measurements.
    pub fn failure_probability(&self, m: u64) -> f64 {
        ln_failure_tf(m, self.k, self.delta, self.ln_family_tf()).hi.exp()
    }
}

/// The additive terms of the bracket and the resulting `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSizePlan {
    pub m: u64,
    /// Unrounded right-hand side.
    pub value: f64,
    /// `32/δ²`
    pub factor: f64,
    /// `k ln(12/δ)`
    pub subspace_term: f64,
    /// Sauer bound on `ln|J|`
    pub family_term: f64,
    /// `ln(2/ζ)`
    pub confidence_term: f64,
}

pub fn min_measurements(q: &SampleSizeQuery) -> SampleSizePlan {
    let delta = Dd::from(q.delta);
    let factor = Dd::from(32.0) / (delta * delta);
    let subspace = Dd::from(q.k as f64) * (Dd::from(12.0) / delta).ln();
    let family = q.ln_family_tf();
    let confidence = (Dd::from(2.0) / Dd::from(q.zeta)).ln();
    let value = factor * (subspace + family + confidence);
    let m = value.ceil();
    SampleSizePlan {
        m: m as u64,
        value: value.hi,
        factor: factor.hi,
        subspace_term: subspace.hi,
        family_term: family.hi,
        confidence_term: confidence.hi,
    }
}

/// The same right-hand side as a double-double `(hi, lo)` pair.
pub fn min_measurements_exact(q: &SampleSizeQuery) -> (f64, f64) {
    let delta = Dd::from(q.delta);
    let value = Dd::from(32.0) / (delta * delta)
        * (Dd::from(q.k as f64) * (Dd::from(12.0) / delta).ln()
            + q.ln_family_tf()
            + (Dd::from(2.0) / Dd::from(q.zeta)).ln());
    (value.hi, value.lo)
}

fn ln_failure_tf(m: u64, k: u64, delta: f64, ln_family: Dd) -> Dd {
    let d = Dd::from(delta);
    Dd::from(2.0).ln() + ln_family + Dd::from(k as f64) * (Dd::from(12.0) / d).ln()
        - Dd::from(m as f64) * d * d / Dd::from(32.0)
}

/// `2 |J| (12/δ)^k exp(-m δ²/32)`, computed through its logarithm.
/// `ln_family = 0` is the single-support bound. Values above 1 are vacuous.
pub fn failure_probability(m: u64, k: u64, delta: f64, ln_family: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 0.75) {
        return Err(invalid(format!("delta = {delta} must lie in (0, 0.75]")));
    }
    Ok(ln_failure_tf(m, k, delta, Dd::from(ln_family)).hi.exp())
}

/// Worked figures printed alongside the planner's own values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedFigure {
    pub n: u64,
    pub k: u64,
    pub g: u64,
    pub s_max: u64,
    pub delta: f64,
    pub zeta: f64,
    pub m_pure: u64,
    pub m_group: u64,
}

pub const PUBLISHED_FIGURES: [PublishedFigure; 2] = [
    PublishedFigure {
        n: 20_000,
        k: 20,
        g: 6_000,
        s_max: 5,
        delta: 0.25,
        zeta: 1e-6,
        m_pure: 71_286,
        m_group: 47_960,
    },
    PublishedFigure {
        n: 1_000_000,
        k: 50,
        g: 300_000,
        s_max: 5,
        delta: 0.25,
        zeta: 1e-6,
        m_pure: 385_660,
        m_group: 137_260,
    },
];
