//! End-to-end experiments: generate a matrix, certify it at orders `k` and
//! `2k`, draw a signal and noise, solve, and compare the achieved error with
//! both recovery bounds.
//!
//! Every trial draws from its own seeded streams, derived from the master
//! seed, the trial id and a per-purpose lane, so results do not depend on
//! how trials are scheduled across threads.

mod config;
mod report;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

pub use config::{Ensemble, ExperimentConfig, MatrixMode, NoiseDraw, SignalModel};
pub use report::{ExperimentSummary, SlackStats, CSV_SCHEMA};

use crate::bounds::{bound_report, verify_recovery_bound, BoundReport};
use crate::error::Result;
use crate::groups::{enumerate_gks, sparsity_index, GksFamily};
use crate::norms::{eval_norm, l2, pair_constants, ConstantsMode, NormPairConstants};
use crate::sensing::{certify_family, gen_bernoulli, gen_gaussian, GripCertificate, MeasurementMatrix};
use crate::solver::solve;
use crate::{par, rng};

/// Draws a signal from `model` over the members of `family`.
///
/// The exact part is a uniformly chosen member filled with standard normal
/// entries and scaled to unit `ℓ2` norm. The compressible model adds
/// `±rate^(j+1)` on the remaining indices, visited in random order.
pub fn draw_signal(model: SignalModel, family: &GksFamily, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, 0);
    draw_signal_with(model, family, &mut r)
}

fn draw_signal_with<R: Rng>(model: SignalModel, family: &GksFamily, r: &mut R) -> Vec<f64> {
    let n = family.n();
    let member = &family.sets()[r.random_range(0..family.len())];
    let mut x = vec![0.0; n];
    for &i in member.indices() {
        x[i] = r.sample(StandardNormal);
    }
    let norm = l2(&x);
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    if let SignalModel::Compressible { rate } = model {
        let mut rest: Vec<usize> = (0..n).filter(|&i| !member.contains(i)).collect();
        rest.shuffle(r);
        let mut mag = 1.0;
        for i in rest {
            mag *= rate;
            x[i] = if r.random::<bool>() { mag } else { -mag };
        }
    }
    x
}

fn draw_noise<R: Rng>(m: usize, eps: f64, draw: NoiseDraw, r: &mut R) -> Vec<f64> {
    if eps == 0.0 {
        return vec![0.0; m];
    }
    let mut eta: Vec<f64> = (0..m).map(|_| r.sample(StandardNormal)).collect();
    let norm = l2(&eta);
    let radius = match draw {
        NoiseDraw::Sphere => eps,
        NoiseDraw::Ball => eps * r.random::<f64>().powf(1.0 / m as f64),
    };
    eta.iter_mut().for_each(|v| *v *= radius / norm);
    eta
}

/// One row of the experiment CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub matrix_seed: u64,
    pub signal_seed: u64,
    pub noise_seed: u64,
    /// `ok`, or the error that stopped the trial.
    pub status: String,
    pub rho_low_k: Option<f64>,
    pub rho_high_k: Option<f64>,
    pub delta_k: Option<f64>,
    pub rho_low_2k: Option<f64>,
    pub rho_high_2k: Option<f64>,
    pub delta_2k: Option<f64>,
    pub compressible_c: Option<bool>,
    pub compressible_f: Option<bool>,
    pub sigma_a: Option<f64>,
    pub error: Option<f64>,
    /// `ε` plus the solver's feasibility residual; the bounds are evaluated here.
    pub eps_effective: Option<f64>,
    /// `||x̂||_P - ||x||_P`
    pub objective_excess: Option<f64>,
    pub bound_c: Option<f64>,
    pub bound_f: Option<f64>,
    pub bound_f_2k: Option<f64>,
    pub slack_c: Option<f64>,
    pub slack_f: Option<f64>,
    pub slack_f_2k: Option<f64>,
    pub holds_c: Option<bool>,
    pub holds_f: Option<bool>,
    pub holds_f_2k: Option<bool>,
    /// Smaller of the c-form and f-form bounds, where available.
    pub bound_best: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub feasibility_residual: Option<f64>,
    /// Seconds; kept out of the CSV so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time: f64,
}

impl TrialRecord {
    fn empty(trial: usize, seeds: [u64; 3]) -> Self {
        Self {
            trial,
            matrix_seed: seeds[0],
            signal_seed: seeds[1],
            noise_seed: seeds[2],
            status: "ok".into(),
            rho_low_k: None,
            rho_high_k: None,
            delta_k: None,
            rho_low_2k: None,
            rho_high_2k: None,
            delta_2k: None,
            compressible_c: None,
            compressible_f: None,
            sigma_a: None,
            error: None,
            eps_effective: None,
            objective_excess: None,
            bound_c: None,
            bound_f: None,
            bound_f_2k: None,
            slack_c: None,
            slack_f: None,
            slack_f_2k: None,
            holds_c: None,
            holds_f: None,
            holds_f_2k: None,
            bound_best: None,
            iterations: None,
            converged: None,
            feasibility_residual: None,
            wall_time: 0.0,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.status == "ok"
    }
}

/// Records plus the aggregate summary of one run.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub summary: ExperimentSummary,
}

impl ExperimentOutput {
    pub fn csv(&self) -> Result<String> {
        report::to_csv(&self.records)
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary).map_err(std::io::Error::other)?)
    }

    /// Writes the CSV and JSON files named in `config`, if any.
    pub fn write(&self, config: &ExperimentConfig) -> Result<()> {
        for (path, body) in [(&config.csv, self.csv()?), (&config.json, self.summary_json()?)] {
            if let Some(path) = path {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(path, body)?;
            }
        }
        Ok(())
    }
}

struct Certified {
    a: MeasurementMatrix,
    cert_k: GripCertificate,
    cert_2k: GripCertificate,
}

struct Shared<'a> {
    config: &'a ExperimentConfig,
    family_k: GksFamily,
    family_2k: GksFamily,
    constants: NormPairConstants,
    matrix: Option<Certified>,
}

fn matrix_for(config: &ExperimentConfig, seed: u64) -> Result<MeasurementMatrix> {
    match config.ensemble {
        Ensemble::Gaussian => gen_gaussian(config.m, config.n, seed),
        Ensemble::Bernoulli => gen_bernoulli(config.m, config.n, seed),
    }
}

fn certified(config: &ExperimentConfig, fk: &GksFamily, f2k: &GksFamily, seed: u64) -> Result<Certified> {
    let a = matrix_for(config, seed)?;
    let cert_k = certify_family(&a, fk)?;
    let cert_2k = certify_family(&a, f2k)?;
    Ok(Certified { a, cert_k, cert_2k })
}

/// Seed shared by all trials in [`MatrixMode::Shared`].
const SHARED_TRIAL: u64 = u64::MAX;

/// Runs every trial of `config`.
///
/// Setup failures (family too large, unsupported norm pair) are errors.
/// Failures inside a trial are recorded in that trial's `status` and the
/// run continues.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let family_k = enumerate_gks(&config.partition, config.k)?;
    let family_2k = enumerate_gks(&config.partition, 2 * config.k)?;
    let mode = match config.constants {
        ConstantsMode::Empirical { trials, .. } => ConstantsMode::Empirical {
            trials,
            seed: rng::derive_seed(config.seed, 0, rng::lane::CONSTANTS),
        },
        m => m,
    };
    let constants = pair_constants(&config.approx, &config.penalty, &family_k, mode)?;
    let matrix = match config.matrix {
        MatrixMode::Shared => Some(certified(
            config,
            &family_k,
            &family_2k,
            rng::derive_seed(config.seed, SHARED_TRIAL, rng::lane::MATRIX),
        )?),
        MatrixMode::PerTrial => None,
    };
    let shared = Shared {
        config,
        family_k,
        family_2k,
        constants,
        matrix,
    };
    let records = par::map_range(config.trials, |t| run_trial(&shared, t));
    let summary = report::summarize(config, &constants, &records, start.elapsed().as_secs_f64());
    Ok(ExperimentOutput { records, summary })
}

fn run_trial(shared: &Shared, trial: usize) -> TrialRecord {
    let config = shared.config;
    let t = trial as u64;
    let matrix_seed = match config.matrix {
        MatrixMode::Shared => rng::derive_seed(config.seed, SHARED_TRIAL, rng::lane::MATRIX),
        MatrixMode::PerTrial => rng::derive_seed(config.seed, t, rng::lane::MATRIX),
    };
    let seeds = [
        matrix_seed,
        rng::derive_seed(config.seed, t, rng::lane::SIGNAL),
        rng::derive_seed(config.seed, t, rng::lane::NOISE),
    ];
    let start = Instant::now();
    let mut rec = TrialRecord::empty(trial, seeds);
    if let Err(e) = fill_trial(shared, &mut rec) {
        rec.status = format!("error: {e}");
    }
    rec.wall_time = start.elapsed().as_secs_f64();
    rec
}

fn fill_trial(shared: &Shared, rec: &mut TrialRecord) -> Result<()> {
    let config = shared.config;
    let own;
    let cm = match &shared.matrix {
        Some(c) => c,
        None => {
            own = certified(config, &shared.family_k, &shared.family_2k, rec.matrix_seed)?;
            &own
        }
    };
    let (ck, c2k) = (&cm.cert_k, &cm.cert_2k);
    rec.rho_low_k = Some(ck.rho_low);
    rec.rho_high_k = Some(ck.rho_high);
    rec.delta_k = Some(ck.delta);
    rec.rho_low_2k = Some(c2k.rho_low);
    rec.rho_high_2k = Some(c2k.rho_high);
    rec.delta_2k = Some(c2k.delta);

    let report: BoundReport = bound_report(&shared.constants, ck, c2k)?;
    rec.compressible_c = Some(report.compressible_c);
    rec.compressible_f = Some(report.compressible_f);

    let x = draw_signal(config.signal, &shared.family_k, rec.signal_seed);
    let mut nr = rng::stream(rec.noise_seed, 0);
    let eta = draw_noise(config.m, config.eps, config.noise, &mut nr);
    let y: Vec<f64> = cm.a.apply(&x).iter().zip(&eta).map(|(u, v)| u + v).collect();

    let result = solve(&cm.a, &y, config.eps, &config.penalty, &config.solver)?;
    rec.iterations = Some(result.iterations);
    rec.converged = Some(result.converged);
    rec.feasibility_residual = Some(result.feasibility_residual);

    let sigma_a = sparsity_index(&x, &config.approx, &shared.family_k)?;
    rec.sigma_a = Some(sigma_a);
    // x̂ is exactly feasible for the slightly larger radius, and so is x
    let eps = config.eps + result.feasibility_residual;
    rec.eps_effective = Some(eps);
    rec.objective_excess = Some(result.objective - eval_norm(&config.penalty, &x)?);
    let check = verify_recovery_bound(&x, &result.x_hat, sigma_a, eps, &report)?;
    rec.error = Some(check.error);
    rec.bound_c = report.c_form_value(sigma_a, eps);
    rec.bound_f = report.f_form_value(sigma_a, eps);
    rec.bound_f_2k = report.f_form_value_2k(sigma_a, eps);
    rec.slack_c = check.slack_c;
    rec.slack_f = check.slack_f;
    rec.slack_f_2k = check.slack_f_2k;
    rec.holds_c = check.holds_c;
    rec.holds_f = check.holds_f;
    rec.holds_f_2k = check.holds_f_2k;
    rec.bound_best = match (rec.bound_c, rec.bound_f) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    Ok(())
}
