use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::groups::GroupPartition;
use crate::norms::{ConstantsMode, NormSpec};
use crate::solver::SolveOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    Gaussian,
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalModel {
    /// Unit-norm Gaussian entries on a random family member.
    Exact,
    /// [`SignalModel::Exact`] plus a tail `±r^(j+1)` on the remaining
    /// indices in random order.
    Compressible { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDraw {
    /// `||η||_2 = ε`
    Sphere,
    /// Uniform in the ball of radius `ε`.
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixMode {
    /// A fresh matrix for every trial.
    PerTrial,
    /// One matrix shared by all trials.
    Shared,
}

/// A parsed experiment configuration.
///
/// Text form is `key = value` per line with `#` comments:
///
/// | key | values | default |
/// |---|---|---|
/// | `n`, `m`, `k` | positive integers | required |
/// | `partition` | `singletons`, `uniform:<size>`, `file:<path>` | `singletons` |
/// | `ensemble` | `gaussian`, `bernoulli` | `gaussian` |
/// | `matrix` | `per_trial`, `shared` | `per_trial` |
/// | `penalty` | `l1`, `gl`, `sgl:<mu>`, `slope:<file>`, `tree:<file>` (no prox, so solves fail) | required |
/// | `approx` | same forms | `l1` for `slope`, else the penalty |
/// | `constants` | `analytic`, `empirical:<trials>` | `analytic` |
/// | `signal` | `exact`, `compressible:<rate>` | `exact` |
/// | `eps` | non-negative real | `0` |
/// | `noise` | `sphere`, `ball` | `sphere` |
/// | `trials`, `seed` | integers | `1`, `0` |
/// | `max_iters`, `tol_relative_change`, `tol_feasibility`, `step_ratio`, `step_scale` | solver settings | solver defaults |
/// | `csv`, `json` | output paths | none |
///
/// Relative paths resolve against the configuration file's directory.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub partition: GroupPartition,
    pub partition_source: String,
    pub ensemble: Ensemble,
    pub matrix: MatrixMode,
    pub penalty: NormSpec,
    pub approx: NormSpec,
    #[serde(skip)]
    pub constants: ConstantsMode,
    pub constants_source: String,
    pub signal: SignalModel,
    pub eps: f64,
    pub noise: NoiseDraw,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolveOptions,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "n",
    "m",
    "k",
    "partition",
    "ensemble",
    "matrix",
    "penalty",
    "approx",
    "constants",
    "signal",
    "eps",
    "noise",
    "trials",
    "seed",
    "max_iters",
    "tol_relative_change",
    "tol_feasibility",
    "step_ratio",
    "step_scale",
    "csv",
    "json",
];

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("unknown key {key:?}"),
                });
            }
            if kv.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate key {key:?}"),
                });
            }
        }
        let get = |k: &str| kv.get(k).map(|(_, v)| v.as_str());
        fn num<T: std::str::FromStr>(kv: &BTreeMap<String, (usize, String)>, key: &str) -> Result<Option<T>>
        where
            T::Err: std::fmt::Display,
        {
            match kv.get(key) {
                None => Ok(None),
                Some((line, v)) => v.parse::<T>().map(Some).map_err(|e| Error::Parse {
                    line: *line,
                    message: format!("{key}: {e}"),
                }),
            }
        }
        let required = |key: &str| -> Result<usize> {
            num::<usize>(&kv, key)?.ok_or_else(|| invalid(format!("missing required key {key:?}")))
        };
        let resolve = |p: &str| -> PathBuf {
            let p = Path::new(p);
            match base_dir {
                Some(b) if p.is_relative() => b.join(p),
                _ => p.to_path_buf(),
            }
        };

        let (n, m, k) = (required("n")?, required("m")?, required("k")?);
        if n == 0 || m == 0 || k == 0 {
            return Err(invalid("n, m and k must be positive"));
        }
        let partition_source = get("partition").unwrap_or("singletons").to_string();
        let partition = parse_partition(&partition_source, n, &resolve)?;

        let ensemble = match get("ensemble").unwrap_or("gaussian") {
            "gaussian" => Ensemble::Gaussian,
            "bernoulli" => Ensemble::Bernoulli,
            other => return Err(invalid(format!("unknown ensemble {other:?}"))),
        };
        let matrix = match get("matrix").unwrap_or("per_trial") {
            "per_trial" => MatrixMode::PerTrial,
            "shared" => MatrixMode::Shared,
            other => return Err(invalid(format!("unknown matrix mode {other:?}"))),
        };

        let penalty_src = get("penalty").ok_or_else(|| invalid("missing required key \"penalty\""))?;
        let penalty = NormSpec::parse_spec(penalty_src, Some(&partition), base_dir)?;
        let approx = match get("approx") {
            Some(s) => NormSpec::parse_spec(s, Some(&partition), base_dir)?,
            None if matches!(penalty, NormSpec::SortedL1 { .. }) => NormSpec::L1,
            None => penalty.clone(),
        };
        penalty.check_dim(n)?;
        approx.check_dim(n)?;

        let constants_source = get("constants").unwrap_or("analytic").to_string();
        let constants = match constants_source.split_once(':') {
            None if constants_source == "analytic" => ConstantsMode::Analytic,
            Some(("empirical", t)) => ConstantsMode::Empirical {
                trials: t.parse().map_err(|e| invalid(format!("constants: {e}")))?,
                seed: 0,
            },
            _ => return Err(invalid(format!("unknown constants mode {constants_source:?}"))),
        };

        let signal = match get("signal").unwrap_or("exact").split_once(':') {
            None if get("signal").unwrap_or("exact") == "exact" => SignalModel::Exact,
            Some(("compressible", r)) => {
                let rate: f64 = r.parse().map_err(|e| invalid(format!("signal rate: {e}")))?;
                if !(0.0..1.0).contains(&rate) {
                    return Err(invalid(format!("decay rate {rate} must lie in [0, 1)")));
                }
                SignalModel::Compressible { rate }
            }
            _ => return Err(invalid(format!("unknown signal model {:?}", get("signal")))),
        };

        let eps = num::<f64>(&kv, "eps")?.unwrap_or(0.0);
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(invalid("eps must be finite and non-negative"));
        }
        let noise = match get("noise").unwrap_or("sphere") {
            "sphere" => NoiseDraw::Sphere,
            "ball" => NoiseDraw::Ball,
            other => return Err(invalid(format!("unknown noise draw {other:?}"))),
        };
        let trials = num::<usize>(&kv, "trials")?.unwrap_or(1);
        if trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        let seed = num::<u64>(&kv, "seed")?.unwrap_or(0);

        let mut solver = SolveOptions::default();
        if let Some(v) = num::<usize>(&kv, "max_iters")? {
            solver.max_iters = v;
        }
        if let Some(v) = num::<f64>(&kv, "tol_relative_change")? {
            solver.tol_relative_change = v;
        }
        if let Some(v) = num::<f64>(&kv, "tol_feasibility")? {
            solver.tol_feasibility = Some(v);
        }
        if let Some(v) = num::<f64>(&kv, "step_ratio")? {
            solver.step_ratio = v;
        }
        if let Some(v) = num::<f64>(&kv, "step_scale")? {
            solver.step_scale = v;
        }

        Ok(Self {
            n,
            m,
            k,
            partition,
            partition_source,
            ensemble,
            matrix,
            penalty,
            approx,
            constants,
            constants_source,
            signal,
            eps,
            noise,
            trials,
            seed,
            solver,
            csv: get("csv").map(resolve),
            json: get("json").map(resolve),
        })
    }
}

fn parse_partition(src: &str, n: usize, resolve: &dyn Fn(&str) -> PathBuf) -> Result<GroupPartition> {
    let p = match src.split_once(':') {
        None if src == "singletons" => GroupPartition::singletons(n)?,
        Some(("uniform", size)) => {
            let size: usize = size.parse().map_err(|e| invalid(format!("partition size: {e}")))?;
            GroupPartition::uniform(n, size)?
        }
        Some(("file", path)) => GroupPartition::load(resolve(path))?,
        _ => return Err(invalid(format!("unknown partition source {src:?}"))),
    };
    if p.n() != n {
        return Err(invalid(format!("partition covers {} indices but n = {n}", p.n())));
    }
    Ok(p)
}
