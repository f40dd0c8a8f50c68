//! Quantum coin method: a rough Monte Carlo estimate, then `k` steps that each
//! shift the coin by the current lower bound, amplify it and re-estimate it
//! with plain counting.

use std::f64::consts::PI;

use rand::Rng;

use super::{rng_from_seed, Algorithm, Estimate, StepTrace};
use crate::error::{Error, Result};
use crate::ledger::QueryLedger;
use crate::noise::{count_heads, NoiseModel};
use crate::primitives::{qcoin_shot_circuit, qss_preparation_circuit, Encoding, Layout, OracleSpec};

/// Trials per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrialSchedule {
    Constant(u64),
    /// Entry `i` is used at step `i`; the vector needs `k + 1` entries.
    PerStep(Vec<u64>),
}

impl TrialSchedule {
    pub fn trials(&self, step: usize) -> u64 {
        match self {
            TrialSchedule::Constant(l) => *l,
            TrialSchedule::PerStep(v) => v[step],
        }
    }
}

/// What the measured head fraction is turned into before taking `asin`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AngleInput {
    /// `√fraction`, the amplitude the fraction estimates.
    #[default]
    Amplitude,
    /// The raw fraction, as written in the original pseudocode.
    Probability,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AngleDivisor {
    /// `2m + 1` for `m` AA steps.
    #[default]
    Exact,
    /// `2^i` at step `i`.
    PowerOfTwo,
}

/// Coin used at step 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FirstCoin {
    /// Sqrt-amplitude state, head probability `f`.
    #[default]
    Probability,
    /// Linear-amplitude coin without offset, head probability `f²`; the
    /// estimate is `√fraction`. Matches circuits where only `Q_{F,E}` exists.
    Amplitude,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QcoinOptions {
    pub k: usize,
    pub trials: TrialSchedule,
    pub angle_input: AngleInput,
    pub divisor: AngleDivisor,
    pub first_coin: FirstCoin,
    /// Step `i` runs at level `i + level_offset`: `δ = sin(π/2^(level+1))`
    /// and `2^(level-1)` AA steps.
    pub level_offset: usize,
}

impl QcoinOptions {
    pub fn new(k: usize, trials: u64) -> Self {
        QcoinOptions {
            k,
            trials: TrialSchedule::Constant(trials),
            angle_input: AngleInput::default(),
            divisor: AngleDivisor::default(),
            first_coin: FirstCoin::default(),
            level_offset: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.trials {
            TrialSchedule::Constant(0) => return Err(Error::param("QCoin needs L >= 1")),
            TrialSchedule::PerStep(v) if v.len() != self.k + 1 => {
                return Err(Error::param(format!("trial schedule has {} entries, k + 1 = {}", v.len(), self.k + 1)))
            }
            TrialSchedule::PerStep(v) if v.contains(&0) => {
                return Err(Error::param("QCoin needs L >= 1 at every step"))
            }
            _ => {}
        }
        if self.k + self.level_offset > 40 {
            return Err(Error::param(format!("k = {} is too large", self.k)));
        }
        Ok(())
    }

    fn level(&self, step: usize) -> usize {
        step + self.level_offset
    }

    /// Total queries these options spend.
    pub fn queries(&self) -> u64 {
        (0..=self.k)
            .map(|i| {
                let cost = if i == 0 { 1 } else { qcoin_step_cost(self.level(i)) };
                cost * self.trials.trials(i)
            })
            .sum()
    }
}

/// Queries per trial at step `i`: one for `i = 0`, else `1 + 2^i`.
pub fn qcoin_step_cost(i: usize) -> u64 {
    if i == 0 {
        1
    } else {
        1 + (1u64 << i)
    }
}

/// `L (1 + Σ_{i=1..k} (1 + 2^i))`.
pub fn qcoin_queries(k: usize, l: u64) -> u64 {
    l * (0..=k).map(qcoin_step_cost).sum::<u64>()
}

pub fn estimate_qcoin(oracle: &OracleSpec, k: usize, l: u64, seed: u64) -> Result<Estimate> {
    qcoin_with(oracle, &QcoinOptions::new(k, l), &NoiseModel::noiseless(), &mut rng_from_seed(seed))
}

pub fn qcoin_with<R: Rng + ?Sized>(
    oracle: &OracleSpec,
    opts: &QcoinOptions,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Estimate> {
    opts.validate()?;
    noise.validate()?;
    let mut ledger = QueryLedger::new();
    let mut trace = Vec::with_capacity(opts.k + 1);

    let l0 = opts.trials.trials(0);
    let (fraction, mut f) = match opts.first_coin {
        FirstCoin::Probability => {
            let sq = oracle.with_encoding(Encoding::SqrtAmplitude);
            let layout = Layout::for_oracle(&sq);
            let c = qss_preparation_circuit(&sq, layout.n_qubits())?;
            let heads = count_heads(&c, &layout.target_one(), noise, l0, rng, &mut ledger)?;
            let frac = heads as f64 / l0 as f64;
            (frac, frac)
        }
        FirstCoin::Amplitude => {
            let lin = oracle.with_encoding(Encoding::LinearAmplitude);
            let (c, layout) = qcoin_shot_circuit(&lin, 0)?;
            let heads = count_heads(&c, &layout.coin_head(), noise, l0, rng, &mut ledger)?;
            let frac = heads as f64 / l0 as f64;
            (frac, frac.sqrt())
        }
    };
    trace.push(StepTrace { step: 0, lower: 0.0, upper: 1.0, raw_fraction: fraction, estimate: f });

    let linear = oracle.with_encoding(Encoding::LinearAmplitude);
    let (mut lower, mut upper) = (0.0f64, 1.0f64);
    for i in 1..=opts.k {
        let level = opts.level(i);
        let delta = (PI / 2f64.powi(level as i32 + 1)).sin();
        lower = (f - delta / 2.0).max(lower);
        upper = (f + delta / 2.0).min(upper);
        let reps = 1usize << (level - 1);
        let coin = linear.with_offset(lower)?;
        let (c, layout) = qcoin_shot_circuit(&coin, reps)?;
        let l = opts.trials.trials(i);
        let heads = count_heads(&c, &layout.coin_head(), noise, l, rng, &mut ledger)?;
        let frac = heads as f64 / l as f64;
        let amp = match opts.angle_input {
            AngleInput::Amplitude => frac.sqrt(),
            AngleInput::Probability => frac,
        };
        let divisor = match opts.divisor {
            AngleDivisor::Exact => (2 * reps + 1) as f64,
            AngleDivisor::PowerOfTwo => 2f64.powi(level as i32),
        };
        f = (lower + (amp.min(1.0).asin() / divisor).sin()).min(upper);
        trace.push(StepTrace { step: i, lower, upper, raw_fraction: frac, estimate: f });
    }

    Ok(Estimate { algorithm: Algorithm::Qcoin, value: f, queries_used: ledger.count(), trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::estimate_monte_carlo;

    #[test]
    fn query_closed_form() {
        assert_eq!(qcoin_queries(0, 7), 7);
        assert_eq!(qcoin_queries(3, 1), 18);
        assert_eq!(qcoin_queries(3, 13), 234);
        let o = OracleSpec::constant(0.4, 2, Encoding::LinearAmplitude).unwrap();
        for k in 0..5 {
            let e = estimate_qcoin(&o, k, 5, 2).unwrap();
            assert_eq!(e.queries_used, qcoin_queries(k, 5));
            assert_eq!(e.trace.len(), k + 1);
        }
    }

    #[test]
    fn options_query_count_with_offset_and_schedule() {
        let mut opts = QcoinOptions::new(1, 1);
        opts.level_offset = 2;
        opts.trials = TrialSchedule::PerStep(vec![4, 3]);
        assert_eq!(opts.queries(), 4 + 3 * 9);
        let o = OracleSpec::constant(0.4, 1, Encoding::SqrtAmplitude).unwrap();
        let e = qcoin_with(&o, &opts, &NoiseModel::noiseless(), &mut rng_from_seed(1)).unwrap();
        assert_eq!(e.queries_used, 31);
        opts.trials = TrialSchedule::PerStep(vec![4]);
        assert!(opts.validate().is_err());
    }

    #[test]
    fn k_zero_is_monte_carlo() {
        let o = OracleSpec::sqrt_amplitude(vec![0.1, 0.9, 0.35, 0.6]).unwrap();
        for seed in 0..20 {
            let q = estimate_qcoin(&o, 0, 50, seed).unwrap();
            let m = estimate_monte_carlo(&o, 50, seed).unwrap();
            assert_eq!(q.value, m.value);
            assert_eq!(q.queries_used, m.queries_used);
        }
    }

    #[test]
    fn interval_brackets_the_estimate() {
        let o = OracleSpec::sqrt_amplitude(vec![0.2, 0.45, 0.5, 0.95]).unwrap();
        for seed in 0..20 {
            let e = estimate_qcoin(&o, 4, 30, seed).unwrap();
            for s in &e.trace[1..] {
                assert!(s.lower <= s.estimate && s.estimate <= s.upper);
                assert!((0.0..=1.0).contains(&s.lower) && s.upper <= 1.0);
            }
        }
    }

    #[test]
    fn converges_with_many_trials() {
        let o = OracleSpec::sqrt_amplitude(vec![0.2, 0.45, 0.5, 0.95]).unwrap();
        let e = estimate_qcoin(&o, 4, 4000, 11).unwrap();
        assert!((e.value - 0.525).abs() < 0.005, "{}", e.value);
    }

    #[test]
    fn extremes() {
        // Monte Carlo is exact at f = 1, the scaled coins are not.
        let ones = OracleSpec::constant(1.0, 2, Encoding::SqrtAmplitude).unwrap();
        let err: f64 = (0..50).map(|s| 1.0 - estimate_qcoin(&ones, 3, 1000, s).unwrap().value).sum::<f64>() / 50.0;
        assert!(err > 0.0 && err < 0.01, "{err}");
        assert_eq!(estimate_monte_carlo(&ones, 1000, 0).unwrap().value, 1.0);
        let zeros = OracleSpec::constant(0.0, 2, Encoding::SqrtAmplitude).unwrap();
        assert!(estimate_qcoin(&zeros, 3, 10, 0).unwrap().value.abs() < 1e-12);
    }
}
