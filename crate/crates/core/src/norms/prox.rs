//! Proximal operators `argmin_z ½||z - v||² + t||z||`.

use super::{NormSpec, SortedWeights};
use crate::error::{invalid, Error, Result};
use crate::groups::GroupPartition;

/// Proximal operator of `t·||·||` at `v`.
pub fn prox(norm: &NormSpec, v: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("prox step t = {t} must be positive")));
    }
    norm.check_dim(v.len())?;
    let mut out = v.to_vec();
    prox_in_place(norm, &mut out, t)?;
    Ok(out)
}

pub(crate) fn prox_in_place(norm: &NormSpec, v: &mut [f64], t: f64) -> Result<()> {
    match norm {
        NormSpec::L1 => soft_threshold_in_place(v, t),
        NormSpec::GroupL2 { partition } => block_shrink_in_place(v, partition, t),
        NormSpec::SparseGroup { partition, mu } => {
            soft_threshold_in_place(v, (1.0 - mu) * t);
            block_shrink_in_place(v, partition, mu * t);
        }
        NormSpec::SortedL1 { lambda } => {
            let z = sorted_l1_prox(v, lambda, t);
            v.copy_from_slice(&z);
        }
        NormSpec::Tree { .. } => {
            return Err(Error::UnsupportedNorm {
                operation: "prox",
                norm: norm.label(),
            })
        }
    }
    Ok(())
}

/// Entrywise soft threshold `sign(v_i)·max(|v_i| - t, 0)`.
pub fn soft_threshold(v: &[f64], t: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    soft_threshold_in_place(&mut out, t);
    out
}

fn soft_threshold_in_place(v: &mut [f64], t: f64) {
    if t <= 0.0 {
        return;
    }
    for x in v.iter_mut() {
        let m = x.abs() - t;
        *x = if m > 0.0 { m.copysign(*x) } else { 0.0 };
    }
}

/// Blockwise shrink `max(0, 1 - t/||v_G||)·v_G` on every group.
pub fn block_shrink(v: &[f64], partition: &GroupPartition, t: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    block_shrink_in_place(&mut out, partition, t);
    out
}

fn block_shrink_in_place(v: &mut [f64], partition: &GroupPartition, t: f64) {
    if t <= 0.0 {
        return;
    }
    for g in partition.groups() {
        let norm = g.iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt();
        let scale = if norm > t { 1.0 - t / norm } else { 0.0 };
        for &i in g {
            v[i] *= scale;
        }
    }
}

/// Sorted-ℓ1 prox with weights `lambda`; see [`sorted_l1_prox`].
pub fn prox_sorted_l1(v: &[f64], lambda: &[f64], t: f64) -> Result<Vec<f64>> {
    let w = SortedWeights::new(lambda.to_vec())?;
    if v.len() != lambda.len() {
        return Err(invalid("sorted-l1 prox: weight and vector lengths differ"));
    }
    if !(t > 0.0) {
        return Err(invalid(format!("prox step t = {t} must be positive")));
    }
    Ok(sorted_l1_prox(v, &w, t))
}

/// Sorts magnitudes decreasingly, subtracts `tλ`, projects onto the
/// non-increasing cone with a single stack-based pool-adjacent-violators
/// pass, clips at zero, then unsorts and restores signs.
pub(crate) fn sorted_l1_prox(v: &[f64], lambda: &SortedWeights, t: f64) -> Vec<f64> {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));

    // blocks of (start, len, sum)
    let mut stack: Vec<(usize, usize, f64)> = Vec::with_capacity(n);
    for (pos, &i) in order.iter().enumerate() {
        let mut block = (pos, 1usize, v[i].abs() - t * lambda.0[pos]);
        while let Some(&(s, len, sum)) = stack.last() {
            // pool while the fitted values would increase
            if sum / len as f64 <= block.2 / block.1 as f64 {
                stack.pop();
                block = (s, len + block.1, sum + block.2);
            } else {
                break;
            }
        }
        stack.push(block);
    }

    let mut out = vec![0.0; n];
    for (start, len, sum) in stack {
        let level = (sum / len as f64).max(0.0);
        for &i in &order[start..start + len] {
            out[i] = level.copysign(v[i]);
        }
    }
    // sign of an exact zero input: keep zero
    for (o, x) in out.iter_mut().zip(v) {
        if *x == 0.0 {
            *o = 0.0;
        }
    }
    out
}
