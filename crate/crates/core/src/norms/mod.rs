//! Penalty and approximation norms.
//!
//! Covers evaluation, dual norms (used for prox optimality certificates),
//! γ-decomposability constants, randomized decomposability checks and the
//! norm-comparison constants `a, b, c, d` (plus the tail constant `f`).

mod constants;
mod prox;
mod tree;

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{check_dim, invalid, Error, Result};
use crate::groups::{GksFamily, GroupPartition, Support};
use crate::{par, rng};

pub use constants::{pair_constants, ConstantsMode, NormPairConstants};
pub use prox::{block_shrink, prox, prox_sorted_l1, soft_threshold};
pub(crate) use prox::prox_in_place;
pub use tree::{InnerNorm, TreeNorm, TreeSet};

/// Non-increasing, strictly positive sorted-ℓ1 weights `λ_1 ≥ .. ≥ λ_n > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SortedWeights(Vec<f64>);

impl SortedWeights {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(invalid("sorted-l1 weights are empty"));
        }
        if lambda.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(invalid("sorted-l1 weights must be finite and positive"));
        }
        if lambda.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("sorted-l1 weights must be non-increasing"));
        }
        Ok(Self(lambda))
    }

    /// Parses one positive real per line (`#` comments allowed).
    pub fn parse(text: &str) -> Result<Self> {
        let mut lambda = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            lambda.push(line.parse::<f64>().map_err(|e| Error::Parse {
                line: lineno + 1,
                message: format!("bad weight {line:?}: {e}"),
            })?);
        }
        Self::new(lambda)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

/// A norm on `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    /// `Σ |x_i|`
    L1,
    /// Group LASSO norm `Σ_i ||x_{G_i}||_2`.
    GroupL2 { partition: GroupPartition },
    /// Sparse group LASSO norm `Σ_i (1-μ)||x_{G_i}||_1 + μ||x_{G_i}||_2`.
    SparseGroup { partition: GroupPartition, mu: f64 },
    /// Sorted-ℓ1 (SLOPE) norm `Σ λ_i |x|_(i)` over magnitudes sorted decreasingly.
    SortedL1 { lambda: SortedWeights },
    /// Weighted sum of inner norms over a nested-or-disjoint set system.
    Tree { tree: TreeNorm },
}

impl NormSpec {
    pub fn group_l2(partition: GroupPartition) -> Self {
        NormSpec::GroupL2 { partition }
    }

    pub fn sparse_group(partition: GroupPartition, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(invalid(format!("sparse group mu = {mu} outside [0, 1]")));
        }
        Ok(NormSpec::SparseGroup { partition, mu })
    }

    pub fn sorted_l1(lambda: Vec<f64>) -> Result<Self> {
        Ok(NormSpec::SortedL1 {
            lambda: SortedWeights::new(lambda)?,
        })
    }

    /// Short name used in reports: `l1`, `gl`, `sgl:<mu>`, `slope`, `tree`.
    pub fn label(&self) -> String {
        match self {
            NormSpec::L1 => "l1".into(),
            NormSpec::GroupL2 { .. } => "gl".into(),
            NormSpec::SparseGroup { mu, .. } => format!("sgl:{mu}"),
            NormSpec::SortedL1 { .. } => "slope".into(),
            NormSpec::Tree { .. } => "tree".into(),
        }
    }

    /// Dimension the norm is defined on, if fixed.
    pub fn dim(&self) -> Option<usize> {
        match self {
            NormSpec::L1 => None,
            NormSpec::GroupL2 { partition } | NormSpec::SparseGroup { partition, .. } => Some(partition.n()),
            NormSpec::SortedL1 { lambda } => Some(lambda.0.len()),
            NormSpec::Tree { tree } => Some(tree.n()),
        }
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        match self.dim() {
            Some(n) => check_dim(n, len, "norm"),
            None => Ok(()),
        }
    }

    /// Exact norm value.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.value(x))
    }

    /// Norm value without the dimension check.
    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        match self {
            NormSpec::L1 => l1(x),
            NormSpec::GroupL2 { partition } => partition.groups().iter().map(|g| group_l2(x, g)).sum(),
            NormSpec::SparseGroup { partition, mu } => partition
                .groups()
                .iter()
                .map(|g| (1.0 - mu) * g.iter().map(|&i| x[i].abs()).sum::<f64>() + mu * group_l2(x, g))
                .sum(),
            NormSpec::SortedL1 { lambda } => {
                let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                mags.sort_unstable_by(|a, b| b.total_cmp(a));
                lambda.0.iter().zip(&mags).map(|(l, m)| l * m).sum()
            }
            NormSpec::Tree { tree } => tree.value(x),
        }
    }

    /// The dual norm `sup { <y, z> : ||z|| ≤ 1 }`.
    pub fn dual(&self, y: &[f64]) -> Result<f64> {
        self.check_dim(y.len())?;
        match self {
            NormSpec::L1 => Ok(linf(y)),
            NormSpec::GroupL2 { partition } => Ok(partition.groups().iter().map(|g| group_l2(y, g)).fold(0.0, f64::max)),
            NormSpec::SparseGroup { partition, mu } => Ok(partition
                .groups()
                .iter()
                .map(|g| {
                    let block: Vec<f64> = g.iter().map(|&i| y[i]).collect();
                    sparse_group_block_dual(&block, *mu)
                })
                .fold(0.0, f64::max)),
            NormSpec::SortedL1 { lambda } => {
                let mut mags: Vec<f64> = y.iter().map(|v| v.abs()).collect();
                mags.sort_unstable_by(|a, b| b.total_cmp(a));
                let (mut num, mut den, mut best) = (0.0, 0.0, 0.0f64);
                for (m, l) in mags.iter().zip(&lambda.0) {
                    num += m;
                    den += l;
                    best = best.max(num / den);
                }
                Ok(best)
            }
            NormSpec::Tree { .. } => Err(Error::UnsupportedNorm {
                operation: "dual",
                norm: self.label(),
            }),
        }
    }

    /// Parses a norm specification: `l1 | gl | sgl:<mu> | slope:<lambda-file> | tree:<tree-file>`.
    ///
    /// `gl` and `sgl` use `partition`; file paths resolve against `base_dir`.
    pub fn parse_spec(spec: &str, partition: Option<&GroupPartition>, base_dir: Option<&Path>) -> Result<Self> {
        let spec = spec.trim();
        let (kind, arg) = match spec.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (spec, None),
        };
        let need_partition = || partition.cloned().ok_or_else(|| invalid(format!("norm {spec:?} needs a partition")));
        let resolve = |p: &str| match base_dir {
            Some(dir) if Path::new(p).is_relative() => dir.join(p),
            _ => Path::new(p).to_path_buf(),
        };
        match (kind, arg) {
            ("l1", None) => Ok(NormSpec::L1),
            ("gl", None) => Ok(NormSpec::group_l2(need_partition()?)),
            ("sgl", Some(mu)) => {
                let mu = mu.parse::<f64>().map_err(|e| invalid(format!("bad sgl mu {mu:?}: {e}")))?;
                NormSpec::sparse_group(need_partition()?, mu)
            }
            ("slope", Some(file)) => Ok(NormSpec::SortedL1 {
                lambda: SortedWeights::parse(&std::fs::read_to_string(resolve(file))?)?,
            }),
            ("tree", Some(file)) => Ok(NormSpec::Tree {
                tree: TreeNorm::parse(&std::fs::read_to_string(resolve(file))?)?,
            }),
            _ => Err(invalid(format!("unrecognized norm spec {spec:?}"))),
        }
    }
}

/// Free-function form of [`NormSpec::eval`].
pub fn eval_norm(norm: &NormSpec, x: &[f64]) -> Result<f64> {
    norm.eval(x)
}

/// γ such that the norm is γ-decomposable: `λ_n/λ_1` for sorted-ℓ1, 1 otherwise.
pub fn gamma_of(norm: &NormSpec) -> f64 {
    match norm {
        NormSpec::SortedL1 { lambda } => lambda.last() / lambda.first(),
        _ => 1.0,
    }
}

pub(crate) fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub(crate) fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn linf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn group_l2(x: &[f64], group: &[usize]) -> f64 {
    group.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt()
}

/// Gauge of `(1-μ)B_∞ + μB_2` at `y`: the smallest `t` with
/// `||soft(y, t(1-μ))||_2 ≤ tμ`, found by bisection.
fn sparse_group_block_dual(y: &[f64], mu: f64) -> f64 {
    let inf = linf(y);
    if inf == 0.0 {
        return 0.0;
    }
    let fits = |t: f64| {
        let thr = t * (1.0 - mu);
        let r = y.iter().map(|v| (v.abs() - thr).max(0.0).powi(2)).sum::<f64>().sqrt();
        r <= t * mu
    };
    let mut hi = f64::INFINITY;
    if mu < 1.0 {
        hi = hi.min(inf / (1.0 - mu));
    }
    if mu > 0.0 {
        hi = hi.min(l2(y) / mu);
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Which inequality [`check_decomposability`] tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecompositionTest {
    /// `||u+v|| = ||u|| + ||v||` to 1e-12 relative.
    Strict,
    /// `||u+v|| ≥ ||u|| + γ||v|| - 1e-12`.
    Gamma(f64),
}

/// Outcome of a randomized decomposability check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecomposabilityReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest observed `||u+v|| - ||u|| - γ||v||` (γ = 1 for the strict test).
    pub worst_slack: f64,
}

pub(crate) const EXACT_REL_TOL: f64 = 1e-12;

/// Samples `trials` pairs `(u, v)` supported on disjoint family members and
/// counts violations of the requested decomposability inequality.
///
/// Every fourth trial uses constant-magnitude vectors, which are the natural
/// witnesses against strict decomposability of sorted-ℓ1 norms; the rest are
/// Gaussian with random sparsification.
pub fn check_decomposability(
    norm: &NormSpec,
    family: &GksFamily,
    test: DecompositionTest,
    trials: usize,
    seed: u64,
) -> Result<DecomposabilityReport> {
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    norm.check_dim(family.n())?;
    if !family.has_disjoint_pair() {
        return Err(Error::NotTestable("family has no two disjoint members".into()));
    }
    let gamma = match test {
        DecompositionTest::Strict => 1.0,
        DecompositionTest::Gamma(g) => g,
    };
    let slacks = par::map_range(trials, |t| {
        let mut rng = rng::stream(seed, t as u64);
        let (su, sv) = sample_disjoint_pair(family, &mut rng);
        let constant = t % 4 == 0;
        let u = fill_on(su, family.n(), constant, &mut rng);
        let v = fill_on(sv, family.n(), constant, &mut rng);
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let (nu, nv, nsum) = (norm.value(&u), norm.value(&v), norm.value(&sum));
        let slack = nsum - nu - gamma * nv;
        let violated = match test {
            DecompositionTest::Strict => slack.abs() > EXACT_REL_TOL * (nu + nv).max(1.0),
            DecompositionTest::Gamma(_) => slack < -EXACT_REL_TOL,
        };
        (slack, violated)
    });
    Ok(DecomposabilityReport {
        trials,
        violations: slacks.iter().filter(|s| s.1).count(),
        worst_slack: slacks.iter().map(|s| s.0).fold(f64::INFINITY, f64::min),
    })
}

/// Draws two disjoint members of `family` (which must have such a pair).
pub(crate) fn sample_disjoint_pair<'a, R: Rng>(family: &'a GksFamily, rng: &mut R) -> (&'a Support, &'a Support) {
    let sets = family.sets();
    loop {
        let a = &sets[rng.random_range(0..sets.len())];
        for _ in 0..64 {
            let b = &sets[rng.random_range(0..sets.len())];
            if a.is_disjoint(b) {
                return (a, b);
            }
        }
        let partners: Vec<&Support> = sets.iter().filter(|b| a.is_disjoint(b)).collect();
        if !partners.is_empty() {
            return (a, partners[rng.random_range(0..partners.len())]);
        }
    }
}

/// A vector supported on `support`: Gaussian entries with each entry kept
/// with probability 3/4 (at least one kept), or random-sign unit entries.
pub(crate) fn fill_on<R: Rng>(support: &Support, n: usize, constant: bool, rng: &mut R) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for &i in support.indices() {
        x[i] = if constant {
            if rng.random::<bool>() { 1.0 } else { -1.0 }
        } else if rng.random::<f64>() < 0.75 {
            rng.sample(StandardNormal)
        } else {
            0.0
        };
    }
    if x.iter().all(|&v| v == 0.0) {
        let i = support.indices()[rng.random_range(0..support.len())];
        x[i] = rng.sample(StandardNormal);
    }
    x
}
