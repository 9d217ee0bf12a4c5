//! Norm-comparison constants between an approximation norm `||·||_A`, a
//! penalty norm `||·||_P` and the Euclidean norm:
//!
//! * `a = min_{x≠0} ||x||_A / ||x||_P` (over all of `R^n`)
//! * `b = max ||x||_A / ||x||_P` over group k-sparse `x`
//! * `c = min ||x||_A / ||x||_2`, `d = max ||x||_A / ||x||_2` over group k-sparse `x`
//! * `f`: any constant with `Σ_{j≥2} ||h_{Λ_j}||_2 ≤ ||h_{Λ_0^c}||_A / f` for
//!   optimal decompositions of `h_{Λ_0^c}`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{gamma_of, l2, NormSpec};
use crate::error::{Error, Result};
use crate::groups::{GksFamily, Support};
use crate::{par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormPairConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub gamma: f64,
    pub f: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantsMode {
    /// Closed-form values and bounds for the supported norm pairs.
    Analytic,
    /// Sampled extrema. The results are one-sided: the returned `a` and `c`
    /// are at least the true values, `b` and `d` at most.
    Empirical { trials: usize, seed: u64 },
}

/// Constants for the (approximation, penalty) pair over `family`.
///
/// Analytic mode supports (ℓ1, ℓ1), (GL, GL), (SGL, SGL) and
/// (ℓ1, sorted-ℓ1). For SGL the bound on `d` is `(1-μ)√K + μ√s_max` with `K`
/// the largest member cardinality. `f = √k` is reported for all-singleton partitions with
/// an ℓ1 approximation norm. For GL with equal-size groups the optimal
/// decomposition takes the `s_max` largest groups at each step, which gives
/// `f = √s_max` by the same argument; other pairs leave `f` absent.
pub fn pair_constants(
    approx: &NormSpec,
    penalty: &NormSpec,
    family: &GksFamily,
    mode: ConstantsMode,
) -> Result<NormPairConstants> {
    approx.check_dim(family.n())?;
    penalty.check_dim(family.n())?;
    match mode {
        ConstantsMode::Analytic => analytic(approx, penalty, family),
        ConstantsMode::Empirical { trials, seed } => Ok(empirical(approx, penalty, family, trials, seed)),
    }
}

fn analytic(approx: &NormSpec, penalty: &NormSpec, family: &GksFamily) -> Result<NormPairConstants> {
    let k = family.k() as f64;
    let part = family.partition();
    let singleton_f = part.is_singletons().then(|| k.sqrt());
    let same_partition = |p: &crate::groups::GroupPartition| p == part;
    match (approx, penalty) {
        (NormSpec::L1, NormSpec::L1) => Ok(NormPairConstants {
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: k.sqrt(),
            gamma: 1.0,
            f: singleton_f,
        }),
        (NormSpec::GroupL2 { partition: pa }, NormSpec::GroupL2 { partition: pp })
            if pa == pp && same_partition(pa) =>
        {
            let s = part.s_max(family.k()) as f64;
            Ok(NormPairConstants {
                a: 1.0,
                b: 1.0,
                c: 1.0,
                d: s.sqrt(),
                gamma: 1.0,
                f: part.is_uniform().then(|| s.sqrt()),
            })
        }
        (
            NormSpec::SparseGroup { partition: pa, mu: ma },
            NormSpec::SparseGroup { partition: pp, mu: mp },
        ) if pa == pp && ma == mp && same_partition(pa) => {
            // ℓ1 part: ||z_Λ||_1 ≤ √|Λ| ||z_Λ||_2, group part as for GL
            let s = part.s_max(family.k()) as f64;
            let widest = family.sets().iter().map(Support::len).max().unwrap_or(0) as f64;
            Ok(NormPairConstants {
                a: 1.0,
                b: 1.0,
                c: 1.0,
                d: (1.0 - ma) * widest.sqrt() + ma * s.sqrt(),
                gamma: 1.0,
                f: None,
            })
        }
        (NormSpec::L1, NormSpec::SortedL1 { lambda }) => Ok(NormPairConstants {
            a: 1.0 / lambda.first(),
            b: 1.0 / lambda.last(),
            c: 1.0,
            d: k.sqrt(),
            gamma: gamma_of(penalty),
            f: singleton_f,
        }),
        _ => Err(Error::UnsupportedPair(format!(
            "approx = {}, penalty = {}",
            approx.label(),
            penalty.label()
        ))),
    }
}

/// Largest number of members whose extremal candidates are all visited.
const EXHAUSTIVE_MEMBERS: usize = 4096;

fn empirical(approx: &NormSpec, penalty: &NormSpec, family: &GksFamily, trials: usize, seed: u64) -> NormPairConstants {
    let n = family.n();
    let ratios = |x: &[f64]| -> (f64, f64) {
        let na = approx.value(x);
        (na / penalty.value(x), na / l2(x))
    };

    // extremal candidates on members: all ones, equal ℓ2 mass per group, one-hot
    let members: Vec<&Support> = if family.len() <= EXHAUSTIVE_MEMBERS {
        family.sets().iter().collect()
    } else {
        let mut r = rng::stream(seed, u64::MAX);
        (0..EXHAUSTIVE_MEMBERS).map(|_| &family.sets()[r.random_range(0..family.len())]).collect()
    };
    let part = family.partition();
    let structured = par::map_slice(&members, |s| {
        let mut out = Vec::with_capacity(3);
        let mut ones = vec![0.0; n];
        let mut balanced = vec![0.0; n];
        for &i in s.indices() {
            ones[i] = 1.0;
            balanced[i] = 1.0 / (part.group(part.group_of(i)).len() as f64).sqrt();
        }
        let mut hot = vec![0.0; n];
        hot[s.indices()[0]] = 1.0;
        out.push(ratios(&ones));
        out.push(ratios(&balanced));
        out.push(ratios(&hot));
        out
    });
    let random = par::map_range(trials, |t| {
        let mut r = rng::stream(seed, t as u64);
        let s = &family.sets()[r.random_range(0..family.len())];
        let mut x = vec![0.0; n];
        for &i in s.indices() {
            x[i] = r.sample(StandardNormal);
        }
        let sparse = ratios(&x);
        let dense: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
        (sparse, approx.value(&dense) / penalty.value(&dense))
    });

    let sparse_iter = structured.iter().flatten().chain(random.iter().map(|r| &r.0));
    let (mut b, mut c, mut d) = (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let mut a = f64::INFINITY;
    for &(ap, a2) in sparse_iter {
        a = a.min(ap);
        b = b.max(ap);
        c = c.min(a2);
        d = d.max(a2);
    }
    // a ranges over all of R^n: also try dense vectors
    for r in &random {
        a = a.min(r.1);
    }
    let dense_ones = vec![1.0; n];
    a = a.min(approx.value(&dense_ones) / penalty.value(&dense_ones));

    NormPairConstants {
        a,
        b,
        c,
        d,
        gamma: gamma_of(penalty),
        f: None,
    }
}
