//! Group structures, group k-sparse families, sparsity indices and optimal
//! group k-sparse decompositions.
//!
//! Indices are zero-based throughout. A group k-sparse *set* is a union of
//! complete groups with total cardinality at most `k`; a *vector* is group
//! k-sparse when its support is contained in (not necessarily equal to) such
//! a set.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{check_dim, invalid, Error, Result};
use crate::norms::NormSpec;
use crate::par;

/// Default cap on the number of enumerated family members.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// A partition of `{0, .., n-1}` into non-empty, pairwise disjoint groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupPartition {
    n: usize,
    groups: Vec<Vec<usize>>,
    #[serde(skip)]
    group_of: Vec<usize>,
}

impl GroupPartition {
    /// Builds a partition, checking disjointness and coverage.
    ///
    /// Indices inside each group are sorted; group order is kept as given.
    pub fn new(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("partition of an empty index set"));
        }
        let mut group_of = vec![usize::MAX; n];
        let mut sorted = Vec::with_capacity(groups.len());
        for (gi, mut g) in groups.into_iter().enumerate() {
            if g.is_empty() {
                return Err(invalid(format!("group {gi} is empty")));
            }
            g.sort_unstable();
            for &i in &g {
                if i >= n {
                    return Err(invalid(format!("group {gi}: index {i} out of range for n = {n}")));
                }
                if group_of[i] != usize::MAX {
                    return Err(invalid(format!(
                        "index {i} appears in groups {} and {gi}",
                        group_of[i]
                    )));
                }
                group_of[i] = gi;
            }
            sorted.push(g);
        }
        if let Some(i) = group_of.iter().position(|&g| g == usize::MAX) {
            return Err(invalid(format!("index {i} is not covered by any group")));
        }
        Ok(Self {
            n,
            groups: sorted,
            group_of,
        })
    }

    /// All-singleton partition: group sparsity reduces to conventional sparsity.
    pub fn singletons(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| vec![i]).collect())
    }

    /// Consecutive groups of `size` indices; `size` must divide `n`.
    pub fn uniform(n: usize, size: usize) -> Result<Self> {
        if size == 0 || !n.is_multiple_of(size) {
            return Err(invalid(format!("group size {size} does not divide n = {n}")));
        }
        Self::new(n, (0..n / size).map(|g| (g * size..(g + 1) * size).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &[usize] {
        &self.groups[i]
    }

    /// Index of the group containing position `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    pub fn l_min(&self) -> usize {
        self.groups.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn l_max(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `floor(k / l_min)`, the largest number of groups a member of GkS can hold.
    pub fn s_max(&self, k: usize) -> usize {
        k / self.l_min()
    }

    pub fn is_singletons(&self) -> bool {
        self.l_max() == 1
    }

    /// True when all groups share one cardinality.
    pub fn is_uniform(&self) -> bool {
        self.l_min() == self.l_max()
    }

    /// Parses the partition text format: one group per line, whitespace
    /// separated zero-based indices, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut groups = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let group = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        message: format!("bad index {tok:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            groups.push(group);
        }
        let n = groups.iter().map(Vec::len).sum();
        Self::new(n, groups)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Renders the partition in the text format accepted by [`parse`](Self::parse).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.groups {
            let line: Vec<String> = g.iter().map(usize::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Stable 16-hex-digit fingerprint of the partition.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A sorted set of positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Support(Vec<usize>);

impl Support {
    /// Builds a support from arbitrary indices (sorted and deduplicated).
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Support(indices)
    }

    /// The support `{i : x_i != 0}`.
    pub fn of(x: &[f64]) -> Self {
        Support(x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &Support) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &Support) -> bool {
        let (mut a, mut b) = (0, 0);
        while a < self.0.len() && b < other.0.len() {
            match self.0[a].cmp(&other.0[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &Support) -> Support {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Support::new(v)
    }

    /// `x_Λ`: a copy of `x` with every entry outside the support zeroed.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for &i in &self.0 {
            out[i] = x[i];
        }
        out
    }

    /// `x_{Λ^c}`: a copy of `x` with every entry inside the support zeroed.
    pub fn complement_restrict(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for &i in &self.0 {
            out[i] = 0.0;
        }
        out
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (j, i) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// The family GkS of all non-empty unions of complete groups with
/// cardinality at most `k`, in lexicographic order of their index lists.
#[derive(Debug, Clone)]
pub struct GksFamily {
    k: usize,
    partition: GroupPartition,
    sets: Vec<Support>,
}

impl GksFamily {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn sets(&self) -> &[Support] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn n(&self) -> usize {
        self.partition.n
    }

    /// True when two disjoint members exist, i.e. at least two groups fit in `k`.
    pub fn has_disjoint_pair(&self) -> bool {
        self.partition.groups.iter().filter(|g| g.len() <= self.k).count() >= 2
    }
}

/// Number of non-empty unions of groups with total size at most `k`
/// (saturating).
pub fn predicted_family_size(partition: &GroupPartition, k: usize) -> u128 {
    let mut ways = vec![0u128; k + 1];
    ways[0] = 1;
    for g in &partition.groups {
        let l = g.len();
        if l > k {
            continue;
        }
        for s in (l..=k).rev() {
            ways[s] = ways[s].saturating_add(ways[s - l]);
        }
    }
    ways[1..].iter().fold(0u128, |acc, &w| acc.saturating_add(w))
}

/// Enumerates GkS with the default cap.
pub fn enumerate_gks(partition: &GroupPartition, k: usize) -> Result<GksFamily> {
    enumerate_gks_capped(partition, k, DEFAULT_ENUMERATION_CAP)
}

/// Enumerates all non-empty unions of complete groups with cardinality at
/// most `k`. Groups larger than `k` can never appear and are skipped.
pub fn enumerate_gks_capped(partition: &GroupPartition, k: usize, cap: usize) -> Result<GksFamily> {
    if k == 0 {
        return Err(invalid("sparsity order k must be positive"));
    }
    let predicted = predicted_family_size(partition, k);
    if predicted > cap as u128 {
        return Err(Error::EnumerationTooLarge { predicted, cap });
    }
    let eligible: Vec<usize> = (0..partition.num_groups())
        .filter(|&g| partition.groups[g].len() <= k)
        .collect();

    let mut sets = Vec::with_capacity(predicted as usize);
    let mut chosen: Vec<usize> = Vec::new();
    fn walk(
        partition: &GroupPartition,
        eligible: &[usize],
        start: usize,
        room: usize,
        chosen: &mut Vec<usize>,
        sets: &mut Vec<Support>,
    ) {
        for pos in start..eligible.len() {
            let g = eligible[pos];
            let l = partition.groups[g].len();
            if l > room {
                continue;
            }
            chosen.push(g);
            let idx: Vec<usize> = chosen.iter().flat_map(|&c| partition.groups[c].iter().copied()).collect();
            sets.push(Support::new(idx));
            walk(partition, eligible, pos + 1, room - l, chosen, sets);
            chosen.pop();
        }
    }
    walk(partition, &eligible, 0, k, &mut chosen, &mut sets);
    sets.sort();
    debug_assert_eq!(sets.len() as u128, predicted);

    Ok(GksFamily {
        k,
        partition: partition.clone(),
        sets,
    })
}

/// True iff `supp(x)` is contained in some member of `family`.
pub fn is_group_k_sparse(x: &[f64], family: &GksFamily) -> Result<bool> {
    check_dim(family.n(), x.len(), "is_group_k_sparse")?;
    let supp = Support::of(x);
    if supp.is_empty() {
        return Ok(true);
    }
    Ok(family.sets.iter().any(|s| supp.is_subset_of(s)))
}

/// Best single-member approximation: the family index minimizing
/// `||x - x_Λ||`, and that minimum. Ties go to the lexicographically
/// smallest member. `None` for an empty family.
pub fn best_member(x: &[f64], norm: &NormSpec, family: &GksFamily) -> Result<Option<(usize, f64)>> {
    check_dim(family.n(), x.len(), "sparsity_index")?;
    norm.check_dim(x.len())?;
    Ok(best_member_where(x, norm, family, |_| true))
}

fn best_member_where<P>(x: &[f64], norm: &NormSpec, family: &GksFamily, allowed: P) -> Option<(usize, f64)>
where
    P: Fn(&Support) -> bool + Sync + Send,
{
    let values = par::map_slice(&family.sets, |s| {
        if allowed(s) {
            norm.value(&s.complement_restrict(x))
        } else {
            f64::NAN
        }
    });
    par::first_argmin(&values).map(|i| (i, values[i]))
}

/// The group k-sparsity index `min_Λ ||x - x_Λ||`, by exhaustive search.
/// Returns `||x||` for an empty family.
pub fn sparsity_index(x: &[f64], norm: &NormSpec, family: &GksFamily) -> Result<f64> {
    match best_member(x, norm, family)? {
        Some((_, v)) => Ok(v),
        None => norm.eval(x),
    }
}

/// One component `x_{Λ_i}` of a group k-sparse decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionPiece {
    pub support: Support,
    pub component: Vec<f64>,
}

/// Greedy optimal group k-sparse decomposition.
///
/// `Λ_0` minimizes `||x - x_Λ||`; each later `Λ_i` minimizes the norm of the
/// residual after removing the earlier pieces. The search at step `i` only
/// considers members disjoint from `Λ_0 ∪ .. ∪ Λ_{i-1}`: dropping already
/// used groups from a member leaves another member with the same residual
/// norm, so the minimum is unchanged and the pieces come out disjoint.
pub fn optimal_decomposition(x: &[f64], norm: &NormSpec, family: &GksFamily) -> Result<Vec<DecompositionPiece>> {
    check_dim(family.n(), x.len(), "optimal_decomposition")?;
    norm.check_dim(x.len())?;
    if family.is_empty() {
        return Err(invalid("optimal_decomposition needs a non-empty family"));
    }
    let mut residual = x.to_vec();
    let mut used = vec![false; x.len()];
    let mut pieces: Vec<DecompositionPiece> = Vec::new();
    loop {
        let (idx, _) = best_member_where(&residual, norm, family, |s| s.indices().iter().all(|&i| !used[i]))
            .ok_or(Error::DecompositionStalled { pieces: pieces.len() })?;
        let support = family.sets[idx].clone();
        let component = support.restrict(&residual);
        // the first piece may legitimately be zero (x = 0); later ones may not
        if !pieces.is_empty() && component.iter().all(|&v| v == 0.0) {
            return Err(Error::DecompositionStalled { pieces: pieces.len() });
        }
        for &i in support.indices() {
            used[i] = true;
            residual[i] = 0.0;
        }
        pieces.push(DecompositionPiece { support, component });
        if residual.iter().all(|&v| v == 0.0) {
            return Ok(pieces);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_n4() -> GroupPartition {
        GroupPartition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap()
    }

    fn worked_n8() -> GroupPartition {
        GroupPartition::new(8, vec![vec![0], vec![1, 2, 3], vec![4, 5], vec![6, 7]]).unwrap()
    }

    fn s(v: &[usize]) -> Support {
        Support::new(v.to_vec())
    }

    #[test]
    fn partition_rejects_overlap_gap_and_empty() {
        assert!(GroupPartition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(GroupPartition::new(3, vec![vec![0, 1]]).is_err());
        assert!(GroupPartition::new(2, vec![vec![0, 1], vec![]]).is_err());
        assert!(GroupPartition::new(2, vec![vec![0, 5], vec![1]]).is_err());
    }

    #[test]
    fn partition_text_round_trip() {
        let text = "# two groups\n1 0\n\n2 3 # trailing\n";
        let p = GroupPartition::parse(text).unwrap();
        assert_eq!(p.groups(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(GroupPartition::parse(&p.to_text()).unwrap(), p);
        assert!(GroupPartition::parse("0 x\n").is_err());
    }

    #[test]
    fn derived_sizes() {
        let p = worked_n8();
        assert_eq!((p.l_min(), p.l_max(), p.s_max(4)), (1, 3, 4));
        assert_eq!(p.group_of(3), 1);
    }

    #[test]
    fn n4_family() {
        let f = enumerate_gks(&worked_n4(), 2).unwrap();
        assert_eq!(f.sets(), &[s(&[0, 1]), s(&[2, 3])]);
    }

    #[test]
    fn singleton_family_n3_k2() {
        let f = enumerate_gks(&GroupPartition::singletons(3).unwrap(), 2).unwrap();
        assert_eq!(f.len(), 6);
        assert_eq!(
            f.sets(),
            &[s(&[0]), s(&[0, 1]), s(&[0, 2]), s(&[1]), s(&[1, 2]), s(&[2])]
        );
    }

    #[test]
    fn n8_family_membership() {
        let f = enumerate_gks(&worked_n8(), 4).unwrap();
        assert!(f.sets().contains(&s(&[4, 5, 6, 7])));
        assert!(f.sets().contains(&s(&[0, 1, 2, 3])));
        assert!(!f.sets().contains(&s(&[1, 2, 3, 4, 5])));
        assert!(f.sets().iter().all(|m| m.len() <= 4));
    }

    #[test]
    fn oversized_groups_are_unusable() {
        let p = GroupPartition::new(5, vec![vec![0, 1, 2], vec![3], vec![4]]).unwrap();
        let f = enumerate_gks(&p, 2).unwrap();
        assert_eq!(f.sets(), &[s(&[3]), s(&[3, 4]), s(&[4])]);
    }

    #[test]
    fn enumeration_errors() {
        let p = GroupPartition::singletons(30).unwrap();
        assert!(matches!(enumerate_gks(&p, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            enumerate_gks_capped(&p, 10, 1000),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn group_sparsity_membership() {
        let f = enumerate_gks(&worked_n4(), 2).unwrap();
        assert!(is_group_k_sparse(&[0.0; 4], &f).unwrap());
        assert!(is_group_k_sparse(&[0.0, 0.0, 0.6, 0.6], &f).unwrap());
        assert!(is_group_k_sparse(&[0.0, 0.0, 0.6, 0.0], &f).unwrap());
        assert!(!is_group_k_sparse(&[1.0, 0.0, 0.6, 0.0], &f).unwrap());
        assert!(is_group_k_sparse(&[1.0, 0.0], &f).is_err());
    }

    #[test]
    fn sparsity_index_n4() {
        let f = enumerate_gks(&worked_n4(), 2).unwrap();
        let x = [1.0, 0.1, 0.6, 0.6];
        // keep {2,3}: 1.0 + 0.1 = 1.1 ; keep {0,1}: 0.6 + 0.6 = 1.2
        let (idx, v) = best_member(&x, &NormSpec::L1, &f).unwrap().unwrap();
        assert_eq!(f.sets()[idx], s(&[2, 3]));
        assert!((v - 1.1).abs() < 1e-15);
        let scaled: Vec<f64> = x.iter().map(|v| -3.0 * v).collect();
        let vs = sparsity_index(&scaled, &NormSpec::L1, &f).unwrap();
        assert!((vs - 3.0 * v).abs() < 1e-12);
        assert_eq!(sparsity_index(&[0.0, 0.0, 0.6, 0.6], &NormSpec::L1, &f).unwrap(), 0.0);
    }

    #[test]
    fn sparsity_index_ties_break_lexicographically() {
        let f = enumerate_gks(&worked_n4(), 2).unwrap();
        let (idx, _) = best_member(&[1.0, 1.0, 1.0, 1.0], &NormSpec::L1, &f).unwrap().unwrap();
        assert_eq!(idx, 0);
    }

    #[test]
    fn decomposition_n4() {
        let f = enumerate_gks(&worked_n4(), 2).unwrap();
        let x = [1.0, 0.1, 0.6, 0.6];
        let pieces = optimal_decomposition(&x, &NormSpec::L1, &f).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].support, s(&[2, 3]));
        assert_eq!(pieces[0].component, vec![0.0, 0.0, 0.6, 0.6]);
        assert_eq!(pieces[1].support, s(&[0, 1]));
        assert_eq!(pieces[1].component, vec![1.0, 0.1, 0.0, 0.0]);
    }

    #[test]
    fn candes_tail_inequality_fails_for_groups() {
        // the next piece's largest entry exceeds the smallest nonzero of the first
        let f = enumerate_gks(&worked_n4(), 2).unwrap();
        let pieces = optimal_decomposition(&[1.0, 0.1, 0.6, 0.6], &NormSpec::L1, &f).unwrap();
        let min_first = pieces[0].component.iter().filter(|v| **v != 0.0).fold(f64::INFINITY, |a, v| a.min(v.abs()));
        let max_next = pieces[1].component.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max_next > min_first);
        let l2_next = pieces[1].component.iter().map(|v| v * v).sum::<f64>().sqrt();
        let l1_first: f64 = pieces[0].component.iter().map(|v| v.abs()).sum();
        assert!(l2_next > l1_first / 2f64.sqrt());
    }

    #[test]
    fn decomposition_n8() {
        let f = enumerate_gks(&worked_n8(), 4).unwrap();
        let x = [0.1, 1.0, 0.2, 0.3, 0.4, 0.5, 0.4, 0.7];
        let pieces = optimal_decomposition(&x, &NormSpec::L1, &f).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].support, s(&[4, 5, 6, 7]));
        assert_eq!(pieces[1].support, s(&[0, 1, 2, 3]));
    }

    #[test]
    fn decomposition_of_sparse_vector_is_one_piece() {
        let f = enumerate_gks(&worked_n8(), 4).unwrap();
        let x = [0.0, 2.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        let pieces = optimal_decomposition(&x, &NormSpec::L1, &f).unwrap();
        assert_eq!(pieces.len(), 1);
        assert!(Support::of(&x).is_subset_of(&pieces[0].support));
        assert_eq!(pieces[0].component, x.to_vec());
    }

    #[test]
    fn decomposition_stalls_when_nothing_fits() {
        // index 0 lives in a group larger than k, so no member can remove it
        let p = GroupPartition::new(4, vec![vec![0, 1, 2], vec![3]]).unwrap();
        let f = enumerate_gks(&p, 2).unwrap();
        let err = optimal_decomposition(&[1.0, 0.0, 0.0, 1.0], &NormSpec::L1, &f).unwrap_err();
        assert!(matches!(err, Error::DecompositionStalled { pieces: 1 }));
    }

    #[test]
    fn support_set_ops() {
        let a = s(&[1, 3, 5]);
        assert!(a.is_disjoint(&s(&[0, 2])));
        assert!(!a.is_disjoint(&s(&[5])));
        assert_eq!(a.union(&s(&[0, 3])), s(&[0, 1, 3, 5]));
        assert_eq!(a.to_string(), "{1,3,5}");
        assert_eq!(a.restrict(&[1.0; 6]), vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn hash_is_stable_under_reordering_within_groups() {
        let a = GroupPartition::new(4, vec![vec![1, 0], vec![3, 2]]).unwrap();
        assert_eq!(a.hash_hex(), worked_n4().hash_hex());
        assert_eq!(a.hash_hex().len(), 16);
    }
}
