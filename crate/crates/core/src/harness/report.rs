use serde::Serialize;

use super::{ExperimentConfig, TrialRecord};
use crate::error::Result;
use crate::norms::NormPairConstants;

/// First line of every experiment CSV.
pub const CSV_SCHEMA: &str = "# gcs-experiment-csv v1";

pub(super) fn to_csv(records: &[TrialRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    let body = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    let mut out = String::from(CSV_SCHEMA);
    out.push('\n');
    out.push_str(&String::from_utf8(body).map_err(std::io::Error::other)?);
    Ok(out)
}

/// Minimum and median of a set of slacks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlackStats {
    pub count: usize,
    pub min: f64,
    pub median: f64,
}

impl SlackStats {
    fn of(mut values: Vec<f64>) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let median = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        Some(Self {
            count: n,
            min: values[0],
            median,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub constants: NormPairConstants,
    pub trials: usize,
    pub successful: usize,
    pub failed: usize,
    pub not_converged: usize,
    /// Trials meeting the c-form compressibility condition.
    pub certified_c: usize,
    /// Trials meeting the f-form compressibility condition.
    pub certified_f: usize,
    pub violations_c: usize,
    pub violations_f: usize,
    pub violations_f_2k: usize,
    pub slack_c: Option<SlackStats>,
    pub slack_f: Option<SlackStats>,
    pub slack_f_2k: Option<SlackStats>,
    /// Largest error over all successful trials.
    pub max_error: Option<f64>,
    /// Largest error over c-form certified trials.
    pub max_error_certified: Option<f64>,
    /// Successful trials with error at most 1e-5.
    pub recovered_1e5: usize,
    pub wall_time_total: f64,
    pub wall_time_trials: Vec<f64>,
}

pub(super) fn summarize(
    config: &ExperimentConfig,
    constants: &NormPairConstants,
    records: &[TrialRecord],
    wall: f64,
) -> ExperimentSummary {
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.succeeded()).collect();
    let count = |f: &dyn Fn(&TrialRecord) -> bool| ok.iter().filter(|r| f(r)).count();
    let slacks = |f: &dyn Fn(&TrialRecord) -> Option<f64>| SlackStats::of(ok.iter().filter_map(|r| f(r)).collect());
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    ExperimentSummary {
        schema: CSV_SCHEMA,
        config: config.clone(),
        constants: *constants,
        trials: records.len(),
        successful: ok.len(),
        failed: records.len() - ok.len(),
        not_converged: count(&|r| r.converged == Some(false)),
        certified_c: count(&|r| r.compressible_c == Some(true)),
        certified_f: count(&|r| r.compressible_f == Some(true)),
        violations_c: count(&|r| r.holds_c == Some(false)),
        violations_f: count(&|r| r.holds_f == Some(false)),
        violations_f_2k: count(&|r| r.holds_f_2k == Some(false)),
        slack_c: slacks(&|r| r.slack_c),
        slack_f: slacks(&|r| r.slack_f),
        slack_f_2k: slacks(&|r| r.slack_f_2k),
        max_error: max(&mut ok.iter().filter_map(|r| r.error)),
        max_error_certified: max(&mut ok.iter().filter(|r| r.compressible_c == Some(true)).filter_map(|r| r.error)),
        recovered_1e5: count(&|r| r.error.is_some_and(|e| e <= 1e-5)),
        wall_time_total: wall,
        wall_time_trials: records.iter().map(|r| r.wall_time).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_stats() {
        let s = SlackStats::of(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!((s.count, s.min, s.median), (3, 1.0, 2.0));
        let s = SlackStats::of(vec![4.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert!(SlackStats::of(vec![]).is_none());
    }
}
