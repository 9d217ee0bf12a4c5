//! `x̂ = argmin ||z||_P  s.t.  ||y - Az||_2 ≤ ε` by a first-order primal–dual
//! splitting (Chambolle–Pock).
//!
//! With `F` the indicator of the ball `B(y, ε)` the iteration is
//!
//! ```text
//! p   ← prox_{σF*}(p + σ A x̄),   prox_{σF*}(q) = q - σ proj_B(q/σ)
//! x⁺  ← prox_{τP}(x - τ Aᵀ p)
//! x̄   ← 2x⁺ - x
//! ```
//!
//! with fixed steps `σ τ ||A||² < 1`. `ε = 0` runs through the same code:
//! the ball degenerates to the point `y`.

use serde::Serialize;

use crate::error::{check_dim, invalid, Error, Result};
use crate::norms::{l2, prox_in_place, NormSpec};
use crate::sensing::MeasurementMatrix;

/// Power-iteration budget for estimating `||A||`.
pub const POWER_ITERS: usize = 50;
pub const POWER_TOL: f64 = 1e-10;

/// Returns `v` if it lies in the ball, otherwise its radial projection.
pub fn project_ball(v: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    project_ball_in_place(&mut out, center, radius);
    out
}

fn project_ball_in_place(v: &mut [f64], center: &[f64], radius: f64) {
    let dist = v.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if dist <= radius {
        return;
    }
    let scale = if dist > 0.0 { radius / dist } else { 0.0 };
    for (x, c) in v.iter_mut().zip(center) {
        *x = c + scale * (*x - c);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Absolute feasibility tolerance; `None` means `1e-9·(1 + ||y||_2)`.
    pub tol_feasibility: Option<f64>,
    /// Stop once `||x⁺ - x|| ≤ tol·max(1, ||x⁺||)` and the iterate is feasible.
    pub tol_relative_change: f64,
    /// `τ/σ`; the steps are `τ = θ√r/||A||`, `σ = θ/(√r ||A||)`.
    pub step_ratio: f64,
    /// `θ < 1` in the step formula above.
    pub step_scale: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            tol_feasibility: None,
            tol_relative_change: 1e-10,
            step_ratio: 1.0,
            step_scale: 0.99,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if self.tol_feasibility.is_some_and(|t| !(t > 0.0)) || !(self.tol_relative_change > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if !(self.step_ratio > 0.0 && self.step_ratio.is_finite()) {
            return Err(invalid("step_ratio must be positive"));
        }
        if !(self.step_scale > 0.0 && self.step_scale < 1.0) {
            return Err(invalid("step_scale must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn feasibility_tol(&self, y: &[f64]) -> f64 {
        self.tol_feasibility.unwrap_or(1e-9 * (1.0 + l2(y)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryResult {
    pub x_hat: Vec<f64>,
    pub iterations: usize,
    /// `max(0, ||y - A x̂||_2 - ε)`
    pub feasibility_residual: f64,
    /// `||x̂||_P`
    pub objective: f64,
    pub converged: bool,
    /// `A` has a zero column or is rank deficient; minimizers need not be unique.
    pub rank_deficient: bool,
    pub operator_norm: f64,
}

/// Runs the primal–dual iteration from `x = 0, p = 0`.
///
/// Hitting `max_iters` is not an error: the result comes back with
/// `converged = false`. An empty feasible set shows up the same way.
pub fn solve(a: &MeasurementMatrix, y: &[f64], eps: f64, penalty: &NormSpec, opts: &SolveOptions) -> Result<RecoveryResult> {
    opts.validate()?;
    check_dim(a.rows(), y.len(), "solve: y")?;
    penalty.check_dim(a.cols())?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(invalid(format!("eps = {eps} must be finite and non-negative")));
    }
    if matches!(penalty, NormSpec::Tree { .. }) {
        return Err(Error::UnsupportedNorm {
            operation: "solve",
            norm: penalty.label(),
        });
    }
    let (m, n) = (a.rows(), a.cols());
    let op_norm = a.operator_norm(POWER_ITERS, POWER_TOL);
    let rank_deficient = rank_deficient(a);
    let tol_feas = opts.feasibility_tol(y);

    if op_norm == 0.0 {
        // A = 0: every z is feasible or none is
        let x_hat = vec![0.0; n];
        let resid = (l2(y) - eps).max(0.0);
        return Ok(RecoveryResult {
            x_hat,
            iterations: 0,
            feasibility_residual: resid,
            objective: 0.0,
            converged: resid <= tol_feas,
            rank_deficient,
            operator_norm: 0.0,
        });
    }

    let root = opts.step_ratio.sqrt();
    let tau = opts.step_scale * root / op_norm;
    let sigma = opts.step_scale / (root * op_norm);

    let mut x = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut p = vec![0.0; m];
    let mut ax = vec![0.0; m];
    let mut q = vec![0.0; m];
    let mut atp = vec![0.0; n];

    // A x̄ = 2 A x⁺ - A x, so one forward product per iteration suffices
    let mut ax_bar = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iters {
        iterations += 1;
        // dual step
        for i in 0..m {
            p[i] += sigma * ax_bar[i];
            q[i] = p[i] / sigma;
        }
        project_ball_in_place(&mut q, y, eps);
        for i in 0..m {
            p[i] -= sigma * q[i];
        }
        // primal step
        mul_t(a, &p, &mut atp);
        for j in 0..n {
            x_new[j] = x[j] - tau * atp[j];
        }
        prox_in_place(penalty, &mut x_new, tau)?;

        let mut change = 0.0;
        for j in 0..n {
            let d = x_new[j] - x[j];
            change += d * d;
        }
        std::mem::swap(&mut x, &mut x_new);

        mul(a, &x, &mut q);
        for i in 0..m {
            ax_bar[i] = 2.0 * q[i] - ax[i];
        }
        std::mem::swap(&mut ax, &mut q);
        residual = (ax.iter().zip(y).map(|(u, v)| (v - u) * (v - u)).sum::<f64>().sqrt() - eps).max(0.0);
        if residual <= tol_feas && change.sqrt() <= opts.tol_relative_change * l2(&x).max(1.0) {
            converged = true;
            break;
        }
    }
    let objective = penalty.value(&x);
    Ok(RecoveryResult {
        x_hat: x,
        iterations,
        feasibility_residual: residual,
        objective,
        converged,
        rank_deficient,
        operator_norm: op_norm,
    })
}

fn mul(a: &MeasurementMatrix, x: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    let mat = a.matrix();
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            for (o, v) in out.iter_mut().zip(mat.column(j).iter()) {
                *o += v * xj;
            }
        }
    }
}

fn mul_t(a: &MeasurementMatrix, y: &[f64], out: &mut [f64]) {
    let mat = a.matrix();
    for (j, o) in out.iter_mut().enumerate() {
        *o = mat.column(j).iter().zip(y).map(|(u, v)| u * v).sum();
    }
}

/// A zero column, or numerical rank below `min(m, n)` (singular values
/// under `max(m, n)·ε·σ_max`).
fn rank_deficient(a: &MeasurementMatrix) -> bool {
    let (m, n) = (a.rows(), a.cols());
    let mat = a.matrix();
    if (0..n).any(|j| mat.column(j).iter().all(|&v| v == 0.0)) {
        return true;
    }
    let sv = mat.clone().svd(false, false).singular_values;
    let max = sv.max();
    let tol = max * (m.max(n) as f64) * f64::EPSILON;
    sv.iter().filter(|&&s| s > tol).count() < m.min(n)
}
