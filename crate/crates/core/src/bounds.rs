//! Closed-form recovery-bound constants.
//!
//! Two bounds on `||x̂ - x||_2` in terms of `σ_A = σ_{k,G}(x, ||·||_A)` and
//! the noise level `ε` are evaluated:
//!
//! * the **c-form**, driven by the lower norm-equivalence constant `c`
//!   and the order-`k` RIP constants:
//!   `r1 = b/(aγ)`, `r2 = δ_2k d/(c ρ̲_k)`, `r3 = b(γ+1)/(aγ)`,
//!   `r4 = 2d√ρ̄_k/ρ̲_k`, compressible iff `r1 r2 < 1`, with
//!   `||x̂ - x||_A ≤ r3(r2+1)/(1-r1r2) σ_A + r4(r1+1)/(1-r1r2) ε`
//!   and the Euclidean coefficients equal to these divided by `a`;
//! * the **f-form**, driven by the tail constant `f` and the order-`2k`
//!   constants: `g = √2 δ_2k/(f ρ̲_2k)`, `w = r1 d g`,
//!   `r5 = 2√ρ̄_k/ρ̲_k`, compressible iff `w < 1`, with
//!   `||x̂ - x||_2 ≤ r3(g + 1/f)/(1-w) σ_A + r5(1 + r1 d/f)/(1-w) ε`.
//!
//! The f-form is also reported with `r5` computed from the order-`2k`
//! constants, `2√ρ̄_2k/ρ̲_2k`, which is the value its supporting head
//! inequality delivers.
//!
//! In the pure-sparsity case (`a = b = c = γ = 1`, `d = f = √k`) with
//! `ρ = 1 ± δ_2k` at both orders the f-form coefficients reduce to
//! `C0/√k` and `C2` of [`classical_constants`].

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::norms::NormPairConstants;
use crate::sensing::GripCertificate;

/// `α`, `C0` and `C2` for classical RIP recovery with defect `δ_2k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalConstants {
    pub alpha: f64,
    pub c0: f64,
    pub c2: f64,
}

/// `α = √2δ/(1-δ)`, `C0 = 2(1+α)/(1-α)`, `C2 = 4√(1+δ)/((1-δ)(1-α))`.
///
/// Requires `0 ≤ δ < √2 - 1`; at or above the threshold `α ≥ 1` and the
/// result is [`Error::NotCompressible`].
pub fn classical_constants(delta_2k: f64) -> Result<ClassicalConstants> {
    if !(delta_2k >= 0.0) || !delta_2k.is_finite() {
        return Err(invalid(format!("delta_2k = {delta_2k} must be a finite non-negative number")));
    }
    let alpha = 2f64.sqrt() * delta_2k / (1.0 - delta_2k);
    if delta_2k >= 2f64.sqrt() - 1.0 || alpha >= 1.0 {
        return Err(Error::NotCompressible(format!(
            "delta_2k = {delta_2k} is not below sqrt(2) - 1"
        )));
    }
    Ok(ClassicalConstants {
        alpha,
        c0: 2.0 * (1.0 + alpha) / (1.0 - alpha),
        c2: 4.0 * (1.0 + delta_2k).sqrt() / ((1.0 - delta_2k) * (1.0 - alpha)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CFormBound {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub compressible: bool,
    /// Coefficients of the bound on `||x̂ - x||_A`.
    pub coeff_sigma_a: Option<f64>,
    pub coeff_eps_a: Option<f64>,
    /// Coefficients of the bound on `||x̂ - x||_2`.
    pub coeff_sigma: Option<f64>,
    pub coeff_eps: Option<f64>,
}

pub fn c_form(consts: &NormPairConstants, cert_k: &GripCertificate, cert_2k: &GripCertificate) -> Result<CFormBound> {
    check_certificates(cert_k, cert_2k)?;
    let NormPairConstants { a, b, c, d, gamma, .. } = *consts;
    let r1 = b / (a * gamma);
    let r2 = cert_2k.delta * d / (c * cert_k.rho_low);
    let r3 = b * (gamma + 1.0) / (a * gamma);
    let r4 = 2.0 * d * cert_k.rho_high.sqrt() / cert_k.rho_low;
    let compressible = cert_k.injective() && r1 * r2 < 1.0;
    let det = 1.0 - r1 * r2;
    let (sa, ea) = if compressible {
        (Some(r3 * (r2 + 1.0) / det), Some(r4 * (r1 + 1.0) / det))
    } else {
        (None, None)
    };
    Ok(CFormBound {
        r1,
        r2,
        r3,
        r4,
        compressible,
        coeff_sigma_a: sa,
        coeff_eps_a: ea,
        coeff_sigma: sa.map(|v| v / a),
        coeff_eps: ea.map(|v| v / a),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FFormBound {
    pub f: f64,
    pub g: f64,
    pub w: f64,
    pub r5: f64,
    /// `r5` from order-`2k` constants.
    pub r5_2k: f64,
    pub compressible: bool,
    pub coeff_sigma: Option<f64>,
    pub coeff_eps: Option<f64>,
    /// Noise coefficient using `r5_2k`.
    pub coeff_eps_2k: Option<f64>,
}

/// Fails with [`Error::UnsupportedPair`] when `consts.f` is absent.
pub fn f_form(consts: &NormPairConstants, cert_k: &GripCertificate, cert_2k: &GripCertificate) -> Result<FFormBound> {
    check_certificates(cert_k, cert_2k)?;
    let f = consts.f.ok_or_else(|| Error::UnsupportedPair("no tail constant f for this norm pair".into()))?;
    let NormPairConstants { a, b, d, gamma, .. } = *consts;
    let r1 = b / (a * gamma);
    let r3 = b * (gamma + 1.0) / (a * gamma);
    let g = 2f64.sqrt() * cert_2k.delta / (f * cert_2k.rho_low);
    let w = r1 * d * g;
    let r5 = 2.0 * cert_k.rho_high.sqrt() / cert_k.rho_low;
    let r5_2k = 2.0 * cert_2k.rho_high.sqrt() / cert_2k.rho_low;
    let compressible = cert_2k.injective() && cert_k.injective() && w < 1.0;
    let tail = 1.0 + r1 * d / f;
    let (cs, ce, ce2) = if compressible {
        (
            Some(r3 * (g + 1.0 / f) / (1.0 - w)),
            Some(r5 * tail / (1.0 - w)),
            Some(r5_2k * tail / (1.0 - w)),
        )
    } else {
        (None, None, None)
    };
    Ok(FFormBound {
        f,
        g,
        w,
        r5,
        r5_2k,
        compressible,
        coeff_sigma: cs,
        coeff_eps: ce,
        coeff_eps_2k: ce2,
    })
}

fn check_certificates(cert_k: &GripCertificate, cert_2k: &GripCertificate) -> Result<()> {
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

/// Everything needed to judge one recovery instance, serialized flat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub gamma: f64,
    pub f: Option<f64>,
    pub rho_low_k: f64,
    pub rho_high_k: f64,
    pub rho_low_2k: f64,
    pub rho_high_2k: f64,
    pub delta_k: f64,
    pub delta_2k: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub r5: Option<f64>,
    pub r5_2k: Option<f64>,
    pub g: Option<f64>,
    pub w: Option<f64>,
    pub alpha: Option<f64>,
    pub c0: Option<f64>,
    pub c2: Option<f64>,
    pub compressible_c: bool,
    pub coeff_sigma_a_c: Option<f64>,
    pub coeff_eps_a_c: Option<f64>,
    pub coeff_sigma_c: Option<f64>,
    pub coeff_eps_c: Option<f64>,
    pub compressible_f: bool,
    pub coeff_sigma_f: Option<f64>,
    pub coeff_eps_f: Option<f64>,
    pub coeff_eps_f_2k: Option<f64>,
}

pub fn bound_report(consts: &NormPairConstants, cert_k: &GripCertificate, cert_2k: &GripCertificate) -> Result<BoundReport> {
    let cf = c_form(consts, cert_k, cert_2k)?;
    let ff = match consts.f {
        Some(_) => Some(f_form(consts, cert_k, cert_2k)?),
        None => None,
    };
    let classical = classical_constants(cert_2k.delta).ok();
    Ok(BoundReport {
        k: cert_k.order,
        a: consts.a,
        b: consts.b,
        c: consts.c,
        d: consts.d,
        gamma: consts.gamma,
        f: consts.f,
        rho_low_k: cert_k.rho_low,
        rho_high_k: cert_k.rho_high,
        rho_low_2k: cert_2k.rho_low,
        rho_high_2k: cert_2k.rho_high,
        delta_k: cert_k.delta,
        delta_2k: cert_2k.delta,
        r1: cf.r1,
        r2: cf.r2,
        r3: cf.r3,
        r4: cf.r4,
        r5: ff.map(|x| x.r5),
        r5_2k: ff.map(|x| x.r5_2k),
        g: ff.map(|x| x.g),
        w: ff.map(|x| x.w),
        alpha: classical.map(|x| x.alpha),
        c0: classical.map(|x| x.c0),
        c2: classical.map(|x| x.c2),
        compressible_c: cf.compressible,
        coeff_sigma_a_c: cf.coeff_sigma_a,
        coeff_eps_a_c: cf.coeff_eps_a,
        coeff_sigma_c: cf.coeff_sigma,
        coeff_eps_c: cf.coeff_eps,
        compressible_f: ff.is_some_and(|x| x.compressible),
        coeff_sigma_f: ff.and_then(|x| x.coeff_sigma),
        coeff_eps_f: ff.and_then(|x| x.coeff_eps),
        coeff_eps_f_2k: ff.and_then(|x| x.coeff_eps_2k),
    })
}

impl BoundReport {
    /// Euclidean c-form bound value, when compressible.
    pub fn c_form_value(&self, sigma_a: f64, eps: f64) -> Option<f64> {
        Some(self.coeff_sigma_c? * sigma_a + self.coeff_eps_c? * eps)
    }

    /// f-form bound value with the `r5` as defined, when compressible.
    pub fn f_form_value(&self, sigma_a: f64, eps: f64) -> Option<f64> {
        Some(self.coeff_sigma_f? * sigma_a + self.coeff_eps_f? * eps)
    }

    /// f-form bound value with `r5` from order-`2k` constants.
    pub fn f_form_value_2k(&self, sigma_a: f64, eps: f64) -> Option<f64> {
        Some(self.coeff_sigma_f? * sigma_a + self.coeff_eps_f_2k? * eps)
    }
}

/// Outcome of checking `||x̂ - x||_2 ≤ coeff_σ σ_A + coeff_ε ε`.
/// Entries are `None` where the corresponding bound is not available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveryCheck {
    pub error: f64,
    pub holds_c: Option<bool>,
    pub slack_c: Option<f64>,
    pub holds_f: Option<bool>,
    pub slack_f: Option<f64>,
    pub holds_f_2k: Option<bool>,
    pub slack_f_2k: Option<f64>,
}

pub fn verify_recovery_bound(
    x_true: &[f64],
    x_hat: &[f64],
    sigma_a: f64,
    eps: f64,
    report: &BoundReport,
) -> Result<RecoveryCheck> {
    crate::error::check_dim(x_true.len(), x_hat.len(), "verify_recovery_bound")?;
    let error = x_true
        .iter()
        .zip(x_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let judge = |bound: Option<f64>| bound.map(|v| (error <= v, v - error));
    let c = judge(report.c_form_value(sigma_a, eps));
    let f = judge(report.f_form_value(sigma_a, eps));
    let f2 = judge(report.f_form_value_2k(sigma_a, eps));
    Ok(RecoveryCheck {
        error,
        holds_c: c.map(|x| x.0),
        slack_c: c.map(|x| x.1),
        holds_f: f.map(|x| x.0),
        slack_f: f.map(|x| x.1),
        holds_f_2k: f2.map(|x| x.0),
        slack_f_2k: f2.map(|x| x.1),
    })
}
