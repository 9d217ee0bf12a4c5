use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gcs_core::bounds::bound_report;
use gcs_core::groups::{enumerate_gks, optimal_decomposition, sparsity_index, GroupPartition};
use gcs_core::harness::{run_experiment, ExperimentConfig};
use gcs_core::norms::{pair_constants, ConstantsMode, NormSpec};
use gcs_core::samplesize::{min_measurements, SampleSizeQuery, SparsityMode};
use gcs_core::sensing::{certify_family, gen_bernoulli, gen_gaussian, MeasurementMatrix};
use gcs_core::solver::{solve, SolveOptions};
use gcs_core::par;

#[derive(Parser)]
#[command(name = "gcs", version, about = "Group-sparse compressed sensing toolkit")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random measurement matrix.
    GenMatrix {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EnsembleArg::Gaussian)]
        ensemble: EnsembleArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact group-RIP constants of a matrix at one or more orders.
    Certify {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        partition: PartitionArgs,
        #[arg(long, required = true, num_args = 1..)]
        order: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sparsity index and optimal group-sparse decomposition of a vector.
    Decompose {
        #[arg(long)]
        x: PathBuf,
        #[command(flatten)]
        partition: PartitionArgs,
        #[arg(long)]
        k: usize,
        /// l1, gl, sgl:<mu>, slope:<file> or tree:<file>
        #[arg(long, default_value = "gl")]
        norm: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the penalty norm subject to ||y - Ax||_2 <= eps.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value = "gl")]
        norm: String,
        #[command(flatten)]
        partition: PartitionArgs,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol_relative_change: Option<f64>,
        #[arg(long)]
        tol_feasibility: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate both recovery bounds for a matrix.
    Bounds {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        partition: PartitionArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "gl")]
        penalty: String,
        /// Defaults to l1 for slope penalties and to the penalty otherwise.
        #[arg(long)]
        approx: Option<String>,
        /// analytic or empirical:<trials>
        #[arg(long, default_value = "analytic")]
        constants: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// With --eps, also print the bound values at this sparsity index.
        #[arg(long, requires = "eps")]
        sigma: Option<f64>,
        #[arg(long, requires = "sigma")]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measurements sufficient for group RIP with high probability.
    SampleSize {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        zeta: f64,
        /// Number of groups; requires --smax.
        #[arg(long, requires = "smax")]
        g: Option<u64>,
        #[arg(long, requires = "g")]
        smax: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Run a configured experiment and write its CSV and JSON summary.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's csv path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Overrides the config's json path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Gaussian,
    Bernoulli,
}

#[derive(Args)]
struct PartitionArgs {
    /// Partition file: one group per line of zero-based indices.
    #[arg(long, conflicts_with = "groups")]
    partition: Option<PathBuf>,
    /// `singletons` or `uniform:<size>` (default: singletons).
    #[arg(long)]
    groups: Option<String>,
}

impl PartitionArgs {
    fn resolve(&self, n: usize) -> Result<GroupPartition, Failure> {
        let p = match (&self.partition, self.groups.as_deref()) {
            (Some(path), _) => GroupPartition::load(path)?,
            (None, None | Some("singletons")) => GroupPartition::singletons(n)?,
            (None, Some(spec)) => match spec.split_once(':') {
                Some(("uniform", s)) => {
                    let size = s.parse().map_err(|_| Failure::Usage(format!("bad group size {s:?}")))?;
                    GroupPartition::uniform(n, size)?
                }
                _ => return Err(Failure::Usage(format!("unknown --groups value {spec:?}"))),
            },
        };
        if p.n() != n {
            return Err(Failure::Usage(format!("partition covers {} indices, expected {n}", p.n())));
        }
        Ok(p)
    }
}

enum Failure {
    Usage(String),
    NoSuccessfulTrials,
}

impl From<gcs_core::Error> for Failure {
    fn from(e: gcs_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.threads {
        Some(t) => par::with_threads(t, || run(cli.command)),
        None => run(cli.command),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::NoSuccessfulTrials) => {
            eprintln!("error: no trial completed successfully");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}

/// Whitespace-separated reals; `#` starts a comment.
fn read_vector(path: &Path) -> Result<Vec<f64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    text.lines()
        .flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace())
        .map(|t| t.parse().map_err(|_| Failure::Usage(format!("{}: bad number {t:?}", path.display()))))
        .collect()
}

fn constants_mode(src: &str, seed: u64) -> Result<ConstantsMode, Failure> {
    match src.split_once(':') {
        None if src == "analytic" => Ok(ConstantsMode::Analytic),
        Some(("empirical", t)) => Ok(ConstantsMode::Empirical {
            trials: t.parse().map_err(|_| Failure::Usage(format!("bad trial count {t:?}")))?,
            seed,
        }),
        _ => Err(Failure::Usage(format!("unknown constants mode {src:?}"))),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::GenMatrix { m, n, seed, ensemble, out } => {
            let a = match ensemble {
                EnsembleArg::Gaussian => gen_gaussian(m, n, seed)?,
                EnsembleArg::Bernoulli => gen_bernoulli(m, n, seed)?,
            };
            emit(out.as_deref(), &a.to_text())
        }
        Command::Certify { matrix, partition, order, out } => {
            let a = MeasurementMatrix::load(&matrix)?;
            let p = partition.resolve(a.cols())?;
            let mut text = String::new();
            for (i, &o) in order.iter().enumerate() {
                let cert = certify_family(&a, &enumerate_gks(&p, o)?)?;
                if i > 0 {
                    text.push('\n');
                }
                text.push_str(&cert.to_key_value());
            }
            emit(out.as_deref(), &text)
        }
        Command::Decompose { x, partition, k, norm, out } => {
            let x = read_vector(&x)?;
            let p = partition.resolve(x.len())?;
            let norm = NormSpec::parse_spec(&norm, Some(&p), None)?;
            let family = enumerate_gks(&p, k)?;
            let sigma = sparsity_index(&x, &norm, &family)?;
            let pieces = optimal_decomposition(&x, &norm, &family)?;
            emit_json(
                out.as_deref(),
                &json!({
                    "norm": norm.label(),
                    "k": k,
                    "sparsity_index": sigma,
                    "pieces": pieces,
                }),
            )
        }
        Command::Solve {
            matrix,
            y,
            eps,
            norm,
            partition,
            max_iters,
            tol_relative_change,
            tol_feasibility,
            out,
        } => {
            let a = MeasurementMatrix::load(&matrix)?;
            let y = read_vector(&y)?;
            let p = partition.resolve(a.cols())?;
            let penalty = NormSpec::parse_spec(&norm, Some(&p), None)?;
            let mut opts = SolveOptions::default();
            if let Some(v) = max_iters {
                opts.max_iters = v;
            }
            if let Some(v) = tol_relative_change {
                opts.tol_relative_change = v;
            }
            opts.tol_feasibility = tol_feasibility.or(opts.tol_feasibility);
            let result = solve(&a, &y, eps, &penalty, &opts)?;
            let mut value = serde_json::to_value(&result).map_err(|e| Failure::Usage(e.to_string()))?;
            value["options"] = json!(opts);
            value["eps"] = json!(eps);
            value["norm"] = json!(penalty.label());
            emit_json(out.as_deref(), &value)
        }
        Command::Bounds {
            matrix,
            partition,
            k,
            penalty,
            approx,
            constants,
            seed,
            sigma,
            eps,
            out,
        } => {
            let a = MeasurementMatrix::load(&matrix)?;
            let p = partition.resolve(a.cols())?;
            let penalty = NormSpec::parse_spec(&penalty, Some(&p), None)?;
            let approx = match approx {
                Some(s) => NormSpec::parse_spec(&s, Some(&p), None)?,
                None if matches!(penalty, NormSpec::SortedL1 { .. }) => NormSpec::L1,
                None => penalty.clone(),
            };
            let family_k = enumerate_gks(&p, k)?;
            let consts = pair_constants(&approx, &penalty, &family_k, constants_mode(&constants, seed)?)?;
            let cert_k = certify_family(&a, &family_k)?;
            let cert_2k = certify_family(&a, &enumerate_gks(&p, 2 * k)?)?;
            let report = bound_report(&consts, &cert_k, &cert_2k)?;
            let mut value = serde_json::to_value(&report).map_err(|e| Failure::Usage(e.to_string()))?;
            if let (Some(s), Some(e)) = (sigma, eps) {
                value["bound_c"] = json!(report.c_form_value(s, e));
                value["bound_f"] = json!(report.f_form_value(s, e));
                value["bound_f_2k"] = json!(report.f_form_value_2k(s, e));
            }
            emit_json(out.as_deref(), &value)
        }
        Command::SampleSize {
            n,
            k,
            delta,
            zeta,
            g,
            smax,
            json,
        } => {
            let mode = match (g, smax) {
                (Some(g), Some(s_max)) => SparsityMode::Group { g, s_max },
                _ => SparsityMode::Pure,
            };
            let plan = min_measurements(&SampleSizeQuery::new(n, k, delta, zeta, mode)?);
            if json {
                emit_json(None, &json!(plan))
            } else {
                emit(
                    None,
                    &format!(
                        "m = {}\nvalue = {}\nfactor = {}\nsubspace_term = {}\nfamily_term = {}\nconfidence_term = {}\n",
                        plan.m, plan.value, plan.factor, plan.subspace_term, plan.family_term, plan.confidence_term
                    ),
                )
            }
        }
        Command::Experiment { config, csv, json } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.csv = csv.or(cfg.csv);
            cfg.json = json.or(cfg.json);
            let output = run_experiment(&cfg)?;
            output.write(&cfg)?;
            let s = &output.summary;
            eprintln!(
                "trials {} | successful {} | certified c-form {} f-form {} | violations c-form {} f-form {}",
                s.trials, s.successful, s.certified_c, s.certified_f, s.violations_c, s.violations_f
            );
            if cfg.csv.is_none() {
                print!("{}", output.csv()?);
            }
            if s.successful == 0 {
                return Err(Failure::NoSuccessfulTrials);
            }
            Ok(())
        }
    }
}
