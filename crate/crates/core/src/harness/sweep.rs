//! Error-versus-mean and error-versus-queries sweeps.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{job_seed, loglog_slope, run_series, sweep_oracle, JobOutcome, RunContext, Series, SweepSpec};
use crate::error::Result;
use crate::estimators::{rng_from_seed, select_optimal_k, ErrorTable};

const F_STREAM: u64 = 0xf0;
const ORACLE_STREAM: u64 = 0x0a;
const OPTIMAL_STREAM: u64 = 0x0b;

/// One estimator run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub series: String,
    pub budget: u64,
    pub f_true: f64,
    /// Empty for exact QSS rows.
    pub f_est: Option<f64>,
    pub abs_error: f64,
    pub queries: u64,
    pub seed: u64,
    pub trace: String,
}

/// Mean absolute error over the repetitions of one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub series: String,
    /// Empty when the point averages over drawn means.
    pub f: Option<f64>,
    pub budget: u64,
    pub mean_queries: f64,
    pub repetitions: usize,
    pub mean_abs_error: f64,
    pub std_error: f64,
    /// `k` used by the optimal-`k` series.
    pub k: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeRow {
    pub series: String,
    pub slope: Option<f64>,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueSweepResult {
    pub aggregates: Vec<AggregateRow>,
    pub trials: Vec<TrialRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceResult {
    pub aggregates: Vec<AggregateRow>,
    pub trials: Vec<TrialRow>,
    pub slopes: Vec<SlopeRow>,
    pub error_table: ErrorTable,
    /// True mean of every point, shared by all series and budgets.
    pub means: Vec<f64>,
}

impl ConvergenceResult {
    pub fn slope(&self, series: &str) -> Option<f64> {
        self.slopes.iter().find(|s| s.series == series).and_then(|s| s.slope)
    }

    pub fn aggregate(&self, series: &str, budget: u64) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.series == series && a.budget == budget)
    }
}

#[derive(Clone, Copy, Debug)]
struct Job {
    series: Series,
    /// Series actually run; differs from `series` for optimal-`k` jobs.
    run_as: Series,
    f_idx: Option<usize>,
    budget_idx: usize,
    budget: u64,
    f: f64,
    seed: u64,
    oracle_seed: u64,
}

struct JobResult {
    job: Job,
    outcome: Option<JobOutcome>,
}

fn execute(jobs: Vec<Job>, spec: &SweepSpec, ctx: &RunContext) -> Result<Vec<JobResult>> {
    jobs.into_par_iter()
        .map(|job| {
            let oracle = sweep_oracle(job.f, spec.n_input, spec.integrand, spec.hardware_circuits, job.oracle_seed)?;
            let outcome = run_series(job.run_as, &oracle, job.budget, ctx, job.seed)?;
            Ok(JobResult { job, outcome })
        })
        .collect()
}

fn trial_rows(results: &[JobResult]) -> Vec<TrialRow> {
    results
        .iter()
        .filter_map(|r| {
            let outcome = r.outcome.as_ref()?;
            let (f_est, trace) = match outcome {
                JobOutcome::Sampled(e) => (Some(e.value), e.trace_string()),
                JobOutcome::Exact { .. } => (None, String::new()),
            };
            Some(TrialRow {
                series: r.job.series.to_string(),
                budget: r.job.budget,
                f_true: r.job.f,
                f_est,
                abs_error: outcome.error(r.job.f),
                queries: outcome.queries(),
                seed: r.job.seed,
                trace,
            })
        })
        .collect()
}

/// Groups by `(series, f index, budget index)` in key order.
fn aggregate(results: &[JobResult], f_values: Option<&[f64]>) -> Vec<AggregateRow> {
    type Key = (Series, Option<usize>, usize);
    let mut groups: BTreeMap<Key, (u64, Vec<f64>, f64, Option<usize>)> = BTreeMap::new();
    for r in results {
        let Some(outcome) = &r.outcome else { continue };
        let entry = groups.entry((r.job.series, r.job.f_idx, r.job.budget_idx)).or_insert_with(|| {
            let k = match (r.job.series, r.job.run_as) {
                (Series::QcoinOptimal, Series::Qcoin(k)) => Some(k),
                _ => None,
            };
            (r.job.budget, Vec::new(), 0.0, k)
        });
        entry.1.push(outcome.error(r.job.f));
        entry.2 += outcome.queries() as f64;
    }
    groups
        .into_iter()
        .map(|((series, f_idx, _), (budget, errors, queries, k))| {
            let n = errors.len() as f64;
            let mean = errors.iter().sum::<f64>() / n;
            let var =
                if errors.len() > 1 { errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            AggregateRow {
                series: series.to_string(),
                f: f_idx.and_then(|i| f_values.map(|v| v[i])),
                budget,
                mean_queries: queries / n,
                repetitions: errors.len(),
                mean_abs_error: mean,
                std_error: (var / n).sqrt(),
                k,
            }
        })
        .collect()
}

/// Error against the true mean: every `(f, budget, series)` point averaged
/// over the repetitions. Noiseless QSS uses its exact error, once per point.
pub fn run_value_sweep(spec: &SweepSpec) -> Result<ValueSweepResult> {
    spec.validate()?;
    let ctx = spec.context()?;
    let f_values = match spec.f.fixed_values() {
        Some(v) => v,
        None => {
            let mut rng = rng_from_seed(job_seed(spec.seed_base, &[F_STREAM]));
            (0..spec.repetitions).map(|_| rng.random::<f64>()).collect()
        }
    };
    let mut jobs = Vec::new();
    for (fi, &f) in f_values.iter().enumerate() {
        for (bi, &budget) in spec.budgets.iter().enumerate() {
            for series in spec.series() {
                let reps = if series == Series::Qss && ctx.exact_qss() { 1 } else { spec.repetitions };
                for rep in 0..reps {
                    jobs.push(Job {
                        series,
                        run_as: series,
                        f_idx: Some(fi),
                        budget_idx: bi,
                        budget,
                        f,
                        seed: job_seed(spec.seed_base, &[fi as u64, bi as u64, rep as u64]),
                        oracle_seed: job_seed(spec.seed_base, &[ORACLE_STREAM, fi as u64, rep as u64]),
                    });
                }
            }
        }
    }
    let results = execute(jobs, spec, &ctx)?;
    Ok(ValueSweepResult {
        aggregates: aggregate(&results, Some(&f_values)),
        trials: if spec.write_trials { trial_rows(&results) } else { Vec::new() },
    })
}

/// Mean error against queries, averaged over the configured means, with a
/// log-log slope per series that leaves out the smallest budget.
///
/// With `optimal_k`, the fixed-`k` QCoin series form the calibration table
/// and a separate set of runs, on fresh seeds, uses the selected `k` per
/// budget.
pub fn run_convergence_sweep(spec: &SweepSpec) -> Result<ConvergenceResult> {
    spec.validate()?;
    let ctx = spec.context()?;
    let points: Vec<f64> = match spec.f.fixed_values() {
        Some(values) => values.iter().flat_map(|&f| std::iter::repeat_n(f, spec.repetitions)).collect(),
        None => (0..spec.repetitions)
            .map(|rep| rng_from_seed(job_seed(spec.seed_base, &[F_STREAM, rep as u64])).random::<f64>())
            .collect(),
    };

    let make_jobs = |series: Series, run_as: Series, stream: &[u64], bi: usize| {
        let budget = spec.budgets[bi];
        points
            .iter()
            .enumerate()
            .map(|(pt, &f)| {
                let mut key = stream.to_vec();
                key.extend([bi as u64, pt as u64]);
                Job {
                    series,
                    run_as,
                    f_idx: None,
                    budget_idx: bi,
                    budget,
                    f,
                    seed: job_seed(spec.seed_base, &key),
                    oracle_seed: job_seed(spec.seed_base, &[ORACLE_STREAM, pt as u64]),
                }
            })
            .collect::<Vec<_>>()
    };

    let mut jobs = Vec::new();
    for series in spec.series() {
        for bi in 0..spec.budgets.len() {
            jobs.extend(make_jobs(series, series, &[], bi));
        }
    }
    let mut results = execute(jobs, spec, &ctx)?;

    let mut error_table = ErrorTable::new();
    for row in aggregate(&results, None) {
        if let Some(k) = row.series.strip_prefix("qcoin-k").and_then(|k| k.parse().ok()) {
            error_table.insert(row.budget, k, row.mean_abs_error);
        }
    }
    if spec.optimal_k && !error_table.is_empty() {
        let mut jobs = Vec::new();
        for (bi, &budget) in spec.budgets.iter().enumerate() {
            let k = select_optimal_k(&error_table, budget);
            jobs.extend(make_jobs(Series::QcoinOptimal, Series::Qcoin(k), &[OPTIMAL_STREAM], bi));
        }
        results.extend(execute(jobs, spec, &ctx)?);
    }

    let aggregates = aggregate(&results, None);
    let smallest = spec.budgets[0];
    let mut by_series: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &aggregates {
        let pts = by_series.entry(row.series.as_str()).or_default();
        if row.budget != smallest {
            pts.push((row.mean_queries, row.mean_abs_error));
        }
    }
    let slopes = by_series
        .into_iter()
        .map(|(series, pts)| SlopeRow { series: series.to_string(), slope: loglog_slope(&pts), points: pts.len() })
        .collect();
    let trials = if spec.write_trials { trial_rows(&results) } else { Vec::new() };
    Ok(ConvergenceResult { aggregates, trials, slopes, error_table, means: points })
}

/// Writes `rows` as CSV with a header row.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
