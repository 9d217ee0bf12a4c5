//! Both sides of the auxiliary inequalities behind the recovery bounds,
//! evaluated on concrete vectors so they can be property-tested.
//!
//! Every inequality is phrased for an error vector `h`, an arbitrary member
//! `Λ_0` of the family, and an optimal decomposition `h_{Λ_1}, .., h_{Λ_s}`
//! of `h_{Λ_0^c}` with respect to the approximation norm.

use serde::Serialize;

use crate::error::{check_dim, invalid, Result};
use crate::groups::{optimal_decomposition, DecompositionPiece, GksFamily, Support};
use crate::norms::{l2, NormSpec};
use crate::sensing::{GripCertificate, MeasurementMatrix};

/// Left and right side of one inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    /// `lhs ≤ rhs + tol·max(1, |rhs|)`.
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol * self.rhs.abs().max(1.0)
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `h` split around `Λ_0`.
#[derive(Debug, Clone)]
pub struct Split {
    pub h: Vec<f64>,
    pub lambda0: Support,
    /// `h_{Λ_0^c}`
    pub outside: Vec<f64>,
    /// `||h_{Λ_0^c}||_A`
    pub outside_norm: f64,
    /// `h_{Λ_1}, .., h_{Λ_s}`; empty when `h` vanishes off `Λ_0`.
    pub pieces: Vec<DecompositionPiece>,
}

impl Split {
    pub fn new(h: &[f64], lambda0: &Support, approx: &NormSpec, family: &GksFamily) -> Result<Self> {
        check_dim(family.n(), h.len(), "lemma split")?;
        if !family.sets().contains(lambda0) {
            return Err(invalid(format!("{lambda0} is not a member of the family")));
        }
        let outside = lambda0.complement_restrict(h);
        let outside_norm = approx.eval(&outside)?;
        let pieces = if outside.iter().all(|&v| v == 0.0) {
            Vec::new()
        } else {
            optimal_decomposition(&outside, approx, family)?
        };
        Ok(Self {
            h: h.to_vec(),
            lambda0: lambda0.clone(),
            outside,
            outside_norm,
            pieces,
        })
    }

    fn piece_l2_sum(&self, skip: usize) -> f64 {
        self.pieces.iter().skip(skip).map(|p| l2(&p.component)).sum()
    }

    /// `Λ_0 ∪ Λ_1`, or `Λ_0` when there is no first piece.
    pub fn head_support(&self) -> Support {
        match self.pieces.first() {
            Some(p) => self.lambda0.union(&p.support),
            None => self.lambda0.clone(),
        }
    }
}

/// `Σ_{j≥1} ||h_{Λ_j}||_2 ≤ ||h_{Λ_0^c}||_A / c`
pub fn tail_sum(split: &Split, c: f64) -> Sides {
    Sides {
        lhs: split.piece_l2_sum(0),
        rhs: split.outside_norm / c,
    }
}

/// `Σ_{j≥2} ||h_{Λ_j}||_2 ≤ ||h_{Λ_0^c}||_A / f`
pub fn tail_sum_after_first(split: &Split, f: f64) -> Sides {
    Sides {
        lhs: split.piece_l2_sum(1),
        rhs: split.outside_norm / f,
    }
}

/// `||h_{Λ_0}||_2 ≤ δ_2k/(c ρ̲_k) ||h_{Λ_0^c}||_A + √ρ̄_k/ρ̲_k ||Ah||_2`
pub fn head_bound(
    a: &MeasurementMatrix,
    split: &Split,
    c: f64,
    cert_k: &GripCertificate,
    cert_2k: &GripCertificate,
) -> Result<Sides> {
    check_orders(cert_k, cert_2k)?;
    let ah = l2(&a.apply(&split.h));
    let rl = cert_k.rho_low;
    Ok(Sides {
        lhs: l2(&split.lambda0.restrict(&split.h)),
        rhs: vacuous_unless(cert_k.injective(), || {
            cert_2k.delta / (c * rl) * split.outside_norm + cert_k.rho_high.sqrt() / rl * ah
        }),
    })
}

/// `||h_Λ||_2 ≤ √2 δ_2k/(f ρ̲_2k) ||h_{Λ_0^c}||_A + √ρ̄_2k/ρ̲_2k ||Ah||_2`
/// with `Λ = Λ_0 ∪ Λ_1`.
pub fn double_head_bound(a: &MeasurementMatrix, split: &Split, f: f64, cert_2k: &GripCertificate) -> Sides {
    let ah = l2(&a.apply(&split.h));
    let rl = cert_2k.rho_low;
    Sides {
        lhs: l2(&split.head_support().restrict(&split.h)),
        rhs: vacuous_unless(cert_2k.injective(), || {
            2f64.sqrt() * cert_2k.delta / (f * rl) * split.outside_norm + cert_2k.rho_high.sqrt() / rl * ah
        }),
    }
}

/// Without a positive lower RIP constant the head inequalities say nothing.
fn vacuous_unless(injective: bool, rhs: impl FnOnce() -> f64) -> f64 {
    if injective {
        rhs()
    } else {
        f64::INFINITY
    }
}

fn check_orders(cert_k: &GripCertificate, cert_2k: &GripCertificate) -> Result<()> {
    if cert_2k.order != 2 * cert_k.order {
        return Err(invalid(format!(
            "certificate orders {} and {} are not k and 2k",
            cert_k.order, cert_2k.order
        )));
    }
    if cert_k.partition_hash != cert_2k.partition_hash {
        return Err(invalid("certificates refer to different partitions"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{enumerate_gks, GroupPartition};
    use crate::sensing::certify_grip;

    #[test]
    fn split_on_singletons_sorts_by_magnitude() {
        let p = GroupPartition::singletons(6).unwrap();
        let fam = enumerate_gks(&p, 2).unwrap();
        let h = [5.0, -1.0, 4.0, 0.5, -3.0, 2.0];
        let s = Split::new(&h, &Support::new(vec![0, 2]), &NormSpec::L1, &fam).unwrap();
        assert_eq!(s.outside_norm, 6.5);
        let supports: Vec<_> = s.pieces.iter().map(|p| p.support.clone()).collect();
        assert_eq!(supports[0], Support::new(vec![4, 5]));
        assert_eq!(supports[1], Support::new(vec![1, 3]));
        // Σ_{j≥1} ||.||_2 = √13 + √1.25 ≤ 6.5
        let t = tail_sum(&s, 1.0);
        assert!((t.lhs - (13f64.sqrt() + 1.25f64.sqrt())).abs() < 1e-14);
        assert!(t.holds(0.0));
        assert!(tail_sum_after_first(&s, 2f64.sqrt()).holds(0.0));
        assert_eq!(s.head_support(), Support::new(vec![0, 2, 4, 5]));
    }

    #[test]
    fn vanishing_outside_has_no_pieces() {
        let p = GroupPartition::uniform(4, 2).unwrap();
        let fam = enumerate_gks(&p, 2).unwrap();
        let s = Split::new(&[1.0, 2.0, 0.0, 0.0], &Support::new(vec![0, 1]), &NormSpec::L1, &fam).unwrap();
        assert!(s.pieces.is_empty());
        assert_eq!(tail_sum(&s, 1.0).lhs, 0.0);
        assert!(Split::new(&[1.0; 4], &Support::new(vec![0]), &NormSpec::L1, &fam).is_err());
    }

    #[test]
    fn identity_head_bounds() {
        let p = GroupPartition::uniform(8, 2).unwrap();
        let fam = enumerate_gks(&p, 2).unwrap();
        let a = MeasurementMatrix::identity(8);
        let (ck, c2k) = (certify_grip(&a, &p, 2).unwrap(), certify_grip(&a, &p, 4).unwrap());
        let h = [1.0, -2.0, 0.5, 0.0, 3.0, 1.0, -0.2, 0.1];
        let s = Split::new(&h, &Support::new(vec![4, 5]), &NormSpec::group_l2(p), &fam).unwrap();
        let hb = head_bound(&a, &s, 1.0, &ck, &c2k).unwrap();
        // δ = 0 and ||Ah|| = ||h|| ≥ ||h_{Λ0}||
        assert!(hb.holds(0.0));
        assert!((hb.rhs - l2(&h)).abs() < 1e-14);
        assert!(double_head_bound(&a, &s, 1.0, &c2k).holds(0.0));
        assert!(head_bound(&a, &s, 1.0, &c2k, &ck).is_err());
    }
}
