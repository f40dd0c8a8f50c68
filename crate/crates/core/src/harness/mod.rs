//! Experiment suites: value and convergence sweeps, supersampling, and
//! resource reports. Every job draws from its own seed derived from the seed
//! base and the job key, so results do not depend on scheduling.

pub mod config;
pub mod resources;
pub mod supersample;
pub mod sweep;

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimators::{
    monte_carlo_with, qcoin_queries, qcoin_with, qss_expected_error, qss_queries, qss_with, rng_from_seed,
    AngleDivisor, AngleInput, Estimate, FirstCoin, QcoinOptions,
};
use crate::noise::NoiseModel;
use crate::primitives::{Encoding, OracleSpec};

pub use config::{FSource, Integrand, NoiseSetting, SupersampleConfig, SweepSpec};
pub use resources::{report_resources, ResourceReport};
pub use supersample::{
    read_pgm, run_supersample, synthetic_test_card, write_pgm, GrayImage, Region, RegionError, SupersampleResult,
};
pub use sweep::{
    run_convergence_sweep, run_value_sweep, write_csv, AggregateRow, ConvergenceResult, SlopeRow, TrialRow,
    ValueSweepResult,
};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the job keyed by `parts` under `base`.
pub fn job_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(base), |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// Least-squares slope of `log10 y` against `log10 x`. Points with a
/// non-positive coordinate are skipped; `None` with fewer than two left.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// One estimator configuration tracked through a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Series {
    MonteCarlo,
    Qss,
    Qcoin(usize),
    /// QCoin with `k` chosen per budget from the calibration table.
    QcoinOptimal,
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Series::MonteCarlo => f.write_str("monte-carlo"),
            Series::Qss => f.write_str("qss"),
            Series::Qcoin(k) => write!(f, "qcoin-k{k}"),
            Series::QcoinOptimal => f.write_str("qcoin-opt"),
        }
    }
}

/// Settings shared by every estimator call of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunContext {
    pub noise: NoiseModel,
    /// Single-qubit circuits with the value written straight into the
    /// target; both counting baselines then read the linear-amplitude coin.
    pub hardware_circuits: bool,
    pub angle_input: AngleInput,
    pub divisor: AngleDivisor,
}

impl RunContext {
    pub fn noiseless() -> Self {
        RunContext {
            noise: NoiseModel::noiseless(),
            hardware_circuits: false,
            angle_input: AngleInput::default(),
            divisor: AngleDivisor::default(),
        }
    }

    /// QSS error is taken from the exact outcome distribution.
    pub fn exact_qss(&self) -> bool {
        self.noise.is_noiseless()
    }

    fn qcoin_options(&self, k: usize, l: u64) -> QcoinOptions {
        let mut opts = QcoinOptions::new(k, l);
        opts.angle_input = self.angle_input;
        opts.divisor = self.divisor;
        if self.hardware_circuits {
            opts.first_coin = FirstCoin::Amplitude;
        }
        opts
    }
}

/// Largest `P` with `2P - 1 <= budget`, if any.
pub fn qss_p_for_budget(budget: u64) -> Option<usize> {
    if budget < qss_queries(2) {
        return None;
    }
    let mut p = 2usize;
    while qss_queries(p * 2) <= budget {
        p *= 2;
    }
    Some(p)
}

/// Outcome of one job: an estimate, or the exact expected error for QSS.
#[derive(Clone, Debug, PartialEq)]
pub enum JobOutcome {
    Sampled(Estimate),
    Exact { error: f64, queries: u64 },
}

impl JobOutcome {
    pub fn error(&self, f_true: f64) -> f64 {
        match self {
            JobOutcome::Sampled(e) => (e.value - f_true).abs(),
            JobOutcome::Exact { error, .. } => *error,
        }
    }

    pub fn queries(&self) -> u64 {
        match self {
            JobOutcome::Sampled(e) => e.queries_used,
            JobOutcome::Exact { queries, .. } => *queries,
        }
    }
}

/// Runs `series` on `oracle` within `budget` queries. `None` when the budget
/// cannot pay for a single run.
pub fn run_series(
    series: Series,
    oracle: &OracleSpec,
    budget: u64,
    ctx: &RunContext,
    seed: u64,
) -> Result<Option<JobOutcome>> {
    run_series_with(series, oracle, budget, ctx, true, &mut rng_from_seed(seed))
}

/// Like [`run_series`] but always samples, so QSS yields an estimate too.
pub fn sample_series(
    series: Series,
    oracle: &OracleSpec,
    budget: u64,
    ctx: &RunContext,
    seed: u64,
) -> Result<Option<Estimate>> {
    Ok(match run_series_with(series, oracle, budget, ctx, false, &mut rng_from_seed(seed))? {
        Some(JobOutcome::Sampled(e)) => Some(e),
        _ => None,
    })
}

fn run_series_with<R: Rng + ?Sized>(
    series: Series,
    oracle: &OracleSpec,
    budget: u64,
    ctx: &RunContext,
    allow_exact: bool,
    rng: &mut R,
) -> Result<Option<JobOutcome>> {
    match series {
        Series::MonteCarlo if ctx.hardware_circuits => {
            let opts = ctx.qcoin_options(0, budget);
            Ok(Some(JobOutcome::Sampled(qcoin_with(oracle, &opts, &ctx.noise, rng)?).relabel_mc()))
        }
        Series::MonteCarlo => Ok(Some(JobOutcome::Sampled(monte_carlo_with(oracle, budget, &ctx.noise, rng)?))),
        Series::Qss => {
            let Some(p) = qss_p_for_budget(budget) else { return Ok(None) };
            if allow_exact && ctx.exact_qss() {
                let error = qss_expected_error(oracle.mean(), p)?;
                return Ok(Some(JobOutcome::Exact { error, queries: qss_queries(p) }));
            }
            Ok(Some(JobOutcome::Sampled(qss_with(oracle, p, &ctx.noise, rng)?)))
        }
        Series::Qcoin(k) => {
            let l = budget / qcoin_queries(k, 1);
            if l == 0 {
                return Ok(None);
            }
            let opts = ctx.qcoin_options(k, l);
            Ok(Some(JobOutcome::Sampled(qcoin_with(oracle, &opts, &ctx.noise, rng)?)))
        }
        Series::QcoinOptimal => Err(Error::param("optimal-k runs need a calibrated k")),
    }
}

impl JobOutcome {
    fn relabel_mc(self) -> Self {
        match self {
            JobOutcome::Sampled(mut e) => {
                e.algorithm = crate::estimators::Algorithm::MonteCarlo;
                JobOutcome::Sampled(e)
            }
            other => other,
        }
    }
}

/// Oracle for a sweep point with mean `f`.
pub fn sweep_oracle(f: f64, n_input: usize, integrand: Integrand, hardware: bool, seed: u64) -> Result<OracleSpec> {
    if hardware {
        return OracleSpec::direct(f, Encoding::SqrtAmplitude);
    }
    match integrand {
        Integrand::Constant => OracleSpec::constant(f, n_input, Encoding::SqrtAmplitude),
        Integrand::Random => {
            let mut rng = rng_from_seed(seed);
            let n = 1usize << n_input;
            let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let mean = u.iter().sum::<f64>() / n as f64;
            // Largest spread around f that keeps every value inside [0, 1].
            let mut scale = 1.0f64;
            for &x in &u {
                let d = x - mean;
                if d > 0.0 {
                    scale = scale.min((1.0 - f) / d);
                } else if d < 0.0 {
                    scale = scale.min(f / -d);
                }
            }
            let values = u.iter().map(|x| (f + scale * (x - mean)).clamp(0.0, 1.0)).collect();
            OracleSpec::sqrt_amplitude(values)
        }
    }
}

/// Runs `f` with at most `jobs` worker threads, or rayon's default pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::param(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
