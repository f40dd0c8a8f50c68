//! Mean estimators sharing one shape: an integrand table, a query budget and
//! a seed in; an [`Estimate`] with its exact query count out.
//!
//! Every estimator accepts the table in either encoding and re-encodes it as
//! needed, so one [`OracleSpec`] can be handed to all three.

mod optimal_k;
mod qcoin;
mod qss;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::QueryLedger;
use crate::noise::{count_heads, NoiseModel};
use crate::primitives::{qss_preparation_circuit, Encoding, Layout, OracleSpec};

pub use optimal_k::{select_optimal_k, ErrorTable};
pub use qcoin::{
    estimate_qcoin, qcoin_queries, qcoin_step_cost, qcoin_with, AngleDivisor, AngleInput, FirstCoin, QcoinOptions,
    TrialSchedule,
};
pub use qss::{
    estimate_qss, qss_estimate_grid, qss_expected_error, qss_outcome_distribution, qss_outcome_distribution_analytic,
    qss_queries, qss_with,
};

/// Deterministic generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    MonteCarlo,
    Qss,
    Qcoin,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MonteCarlo => "monte-carlo",
            Algorithm::Qss => "qss",
            Algorithm::Qcoin => "qcoin",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monte-carlo" | "mc" => Ok(Algorithm::MonteCarlo),
            "qss" => Ok(Algorithm::Qss),
            "qcoin" => Ok(Algorithm::Qcoin),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// One estimation step: the interval the step worked in, the measured head
/// fraction and the resulting estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepTrace {
    pub step: usize,
    pub lower: f64,
    pub upper: f64,
    pub raw_fraction: f64,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub algorithm: Algorithm,
    pub value: f64,
    pub queries_used: u64,
    pub trace: Vec<StepTrace>,
}

impl Estimate {
    /// Trace rendered as `step:lower:upper:fraction:estimate` entries joined by `;`.
    pub fn trace_string(&self) -> String {
        self.trace
            .iter()
            .map(|s| format!("{}:{:.6}:{:.6}:{:.6}:{:.6}", s.step, s.lower, s.upper, s.raw_fraction, s.estimate))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Final `[lower, upper]` interval reported by the last step.
    pub fn final_interval(&self) -> Option<(f64, f64)> {
        self.trace.last().map(|s| (s.lower, s.upper))
    }
}

/// Flat record for CSV output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub algorithm: Algorithm,
    pub f_true: f64,
    pub f_est: f64,
    pub queries: u64,
    pub seed: u64,
    pub trace: String,
}

impl EstimateRecord {
    pub fn new(estimate: &Estimate, f_true: f64, seed: u64) -> Self {
        EstimateRecord {
            algorithm: estimate.algorithm,
            f_true,
            f_est: estimate.value,
            queries: estimate.queries_used,
            seed,
            trace: estimate.trace_string(),
        }
    }
}

/// Classical Monte Carlo through the quantum state: prepare the
/// sqrt-amplitude state, measure the target, count heads. One query per trial.
pub fn estimate_monte_carlo(oracle: &OracleSpec, trials: u64, seed: u64) -> Result<Estimate> {
    monte_carlo_with(oracle, trials, &NoiseModel::noiseless(), &mut rng_from_seed(seed))
}

pub fn monte_carlo_with<R: rand::Rng + ?Sized>(
    oracle: &OracleSpec,
    trials: u64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::param("Monte Carlo needs at least one trial"));
    }
    let oracle = oracle.with_encoding(Encoding::SqrtAmplitude);
    let layout = Layout::for_oracle(&oracle);
    let circuit = qss_preparation_circuit(&oracle, layout.n_qubits())?;
    let mut ledger = QueryLedger::new();
    let heads = count_heads(&circuit, &layout.target_one(), noise, trials, rng, &mut ledger)?;
    let value = heads as f64 / trials as f64;
    Ok(Estimate {
        algorithm: Algorithm::MonteCarlo,
        value,
        queries_used: ledger.count(),
        trace: vec![StepTrace { step: 0, lower: 0.0, upper: 1.0, raw_fraction: value, estimate: value }],
    })
}

/// Per-algorithm parameters. With a query budget the free parameter of each
/// algorithm (trials, `P`, or `L`) is derived from it.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub algorithm: Algorithm,
    pub query_budget: Option<u64>,
    pub qss_p: usize,
    pub qcoin_k: usize,
    pub qcoin_l: u64,
    pub seed: u64,
    pub noise: NoiseModel,
}

impl EstimatorConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        EstimatorConfig {
            algorithm,
            query_budget: None,
            qss_p: 16,
            qcoin_k: 3,
            qcoin_l: 20,
            seed,
            noise: NoiseModel::noiseless(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qss_p == 0 || !self.qss_p.is_power_of_two() {
            return Err(Error::param(format!("qss_P = {} is not a power of two", self.qss_p)));
        }
        if self.qcoin_l == 0 {
            return Err(Error::param("qcoin_L must be at least 1"));
        }
        if self.query_budget == Some(0) {
            return Err(Error::param("query budget must be positive"));
        }
        self.noise.validate()
    }

    /// Trials for Monte Carlo.
    pub fn mc_trials(&self) -> u64 {
        self.query_budget.unwrap_or(self.qcoin_l)
    }

    /// Largest `P` with `2P - 1` within the budget, or the configured `P`.
    pub fn effective_p(&self) -> usize {
        match self.query_budget {
            Some(b) => {
                let mut p = 1usize;
                while qss_queries(p * 2) <= b {
                    p *= 2;
                }
                p
            }
            None => self.qss_p,
        }
    }

    /// Constant `L` fitting the budget (at least one trial per step).
    pub fn effective_l(&self) -> u64 {
        match self.query_budget {
            Some(b) => (b / qcoin_queries(self.qcoin_k, 1)).max(1),
            None => self.qcoin_l,
        }
    }
}

/// Runs the configured estimator.
pub fn run_estimator(config: &EstimatorConfig, oracle: &OracleSpec) -> Result<Estimate> {
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    match config.algorithm {
        Algorithm::MonteCarlo => monte_carlo_with(oracle, config.mc_trials(), &config.noise, &mut rng),
        Algorithm::Qss => qss_with(oracle, config.effective_p(), &config.noise, &mut rng),
        Algorithm::Qcoin => {
            let opts = QcoinOptions::new(config.qcoin_k, config.effective_l());
            qcoin_with(oracle, &opts, &config.noise, &mut rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monte_carlo_extremes() {
        let ones = OracleSpec::sqrt_amplitude(vec![1.0; 4]).unwrap();
        let zeros = OracleSpec::sqrt_amplitude(vec![0.0; 4]).unwrap();
        for trials in [1, 7, 1000] {
            let e = estimate_monte_carlo(&ones, trials, 3).unwrap();
            assert_eq!(e.value, 1.0);
            assert_eq!(e.queries_used, trials);
            assert_eq!(estimate_monte_carlo(&zeros, trials, 3).unwrap().value, 0.0);
        }
        assert!(estimate_monte_carlo(&ones, 0, 3).is_err());
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let o = OracleSpec::sqrt_amplitude(vec![0.1, 0.5, 0.7, 0.3]).unwrap();
        let a = estimate_monte_carlo(&o, 500, 42).unwrap();
        let b = estimate_monte_carlo(&o, 500, 42).unwrap();
        assert_eq!(a, b);
        assert!((a.value - 0.4).abs() < 0.1);
    }

    #[test]
    fn config_derivations() {
        let mut c = EstimatorConfig::new(Algorithm::Qss, 0);
        c.query_budget = Some(255);
        assert_eq!(c.effective_p(), 128);
        c.query_budget = Some(254);
        assert_eq!(c.effective_p(), 64);
        c.qcoin_k = 3;
        c.query_budget = Some(240);
        assert_eq!(c.effective_l(), 13);
        c.qss_p = 12;
        assert!(c.validate().is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::MonteCarlo, Algorithm::Qss, Algorithm::Qcoin] {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("vegas".parse::<Algorithm>().is_err());
    }
}
