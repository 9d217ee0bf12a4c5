//! Tree-structured (nested-or-disjoint) set-system norms.
//!
//! Any two sets are either nested or disjoint, so the maximal sets form a
//! partition and the whole norm is a sum of per-maximal-set norms. That is
//! all we use: evaluation and decomposability w.r.t. the maximal partition.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::groups::{GroupPartition, Support};

/// Norm applied to `x` restricted to one set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerNorm {
    L1,
    L2,
    Linf,
}

impl InnerNorm {
    fn apply(self, x: &[f64], set: &Support) -> f64 {
        let it = set.indices().iter().map(|&i| x[i]);
        match self {
            InnerNorm::L1 => it.map(f64::abs).sum(),
            InnerNorm::L2 => it.map(|v| v * v).sum::<f64>().sqrt(),
            InnerNorm::Linf => it.fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeSet {
    pub indices: Support,
    pub inner: InnerNorm,
    pub weight: f64,
}

/// `Σ_j w_j ||x_{N_j}||_(j)` over a tree-structured set system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeNorm {
    n: usize,
    sets: Vec<TreeSet>,
}

impl TreeNorm {
    /// Validates nesting, positive weights, and that the sets cover `0..n`.
    pub fn new(n: usize, sets: Vec<TreeSet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(invalid("tree norm has no sets"));
        }
        for (j, s) in sets.iter().enumerate() {
            if s.indices.is_empty() {
                return Err(invalid(format!("tree set {j} is empty")));
            }
            if !(s.weight > 0.0 && s.weight.is_finite()) {
                return Err(invalid(format!("tree set {j} has non-positive weight")));
            }
            if s.indices.indices().iter().any(|&i| i >= n) {
                return Err(invalid(format!("tree set {j} has an index >= n = {n}")));
            }
        }
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                let (sa, sb) = (&sets[a].indices, &sets[b].indices);
                if !sa.is_disjoint(sb) && !sa.is_subset_of(sb) && !sb.is_subset_of(sa) {
                    return Err(invalid(format!("tree sets {a} and {b} overlap without nesting")));
                }
            }
        }
        let mut covered = vec![false; n];
        for s in &sets {
            for &i in s.indices.indices() {
                covered[i] = true;
            }
        }
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(invalid(format!("index {i} is in no tree set")));
        }
        Ok(Self { n, sets })
    }

    /// Parses one set per line: `<l1|l2|linf> <weight> <indices..>`.
    /// `n` is one more than the largest index mentioned.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sets = Vec::new();
        let mut n = 0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: lineno + 1, message };
            let mut toks = line.split_whitespace();
            let inner = match toks.next() {
                Some("l1") => InnerNorm::L1,
                Some("l2") => InnerNorm::L2,
                Some("linf") => InnerNorm::Linf,
                other => return Err(err(format!("unknown inner norm {other:?}"))),
            };
            let weight = toks
                .next()
                .ok_or_else(|| err("missing weight".into()))?
                .parse::<f64>()
                .map_err(|e| err(format!("bad weight: {e}")))?;
            let idx = toks
                .map(|t| t.parse::<usize>().map_err(|e| err(format!("bad index {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            n = n.max(idx.iter().max().map_or(0, |m| m + 1));
            sets.push(TreeSet {
                indices: Support::new(idx),
                inner,
                weight,
            });
        }
        Self::new(n, sets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[TreeSet] {
        &self.sets
    }

    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        self.sets.iter().map(|s| s.weight * s.inner.apply(x, &s.indices)).sum()
    }

    /// The partition formed by the maximal sets (duplicates removed).
    pub fn maximal_partition(&self) -> GroupPartition {
        let mut maximal: Vec<Support> = Vec::new();
        for s in &self.sets {
            let contained = self
                .sets
                .iter()
                .any(|o| o.indices.len() > s.indices.len() && s.indices.is_subset_of(&o.indices));
            if !contained && !maximal.contains(&s.indices) {
                maximal.push(s.indices.clone());
            }
        }
        maximal.sort();
        GroupPartition::new(self.n, maximal.into_iter().map(|s| s.indices().to_vec()).collect())
            .expect("maximal sets of a valid tree partition the index set")
    }
}
