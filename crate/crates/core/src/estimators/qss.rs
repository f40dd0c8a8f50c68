//! Quantum supersampling: controlled powers of the AA operator on a counting
//! register, then a QFT. Outcome `t` maps to `f' = sin²(tπ/P)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use super::{rng_from_seed, Algorithm, Estimate, StepTrace};
use crate::error::{Error, Result};
use crate::ledger::QueryLedger;
use crate::noise::{run_noisy, NoiseModel};
use crate::primitives::{qss_circuit, OracleSpec};
use crate::statevector::{sample_index, StateVector};

/// Largest `P` simulated on the full statevector when the result only needs
/// the outcome distribution.
pub(crate) const STATEVECTOR_MAX_P: usize = 256;

/// `2P - 1`: one preparation plus `P - 1` AA steps of two queries each.
pub fn qss_queries(p: usize) -> u64 {
    2 * p as u64 - 1
}

fn check_p(p: usize) -> Result<()> {
    if p < 2 || !p.is_power_of_two() {
        return Err(Error::param(format!("P = {p} must be a power of two >= 2")));
    }
    Ok(())
}

/// `sin²(tπ/P)` for every outcome `t`.
pub fn qss_estimate_grid(p: usize) -> Vec<f64> {
    (0..p).map(|t| (t as f64 * PI / p as f64).sin().powi(2)).collect()
}

pub fn estimate_qss(oracle: &OracleSpec, p: usize, seed: u64) -> Result<Estimate> {
    qss_with(oracle, p, &NoiseModel::noiseless(), &mut rng_from_seed(seed))
}

/// One QSS run. Without gate noise and for large `P` the register outcome is
/// drawn from the exact distribution instead of simulating the register.
pub fn qss_with<R: Rng + ?Sized>(oracle: &OracleSpec, p: usize, noise: &NoiseModel, rng: &mut R) -> Result<Estimate> {
    check_p(p)?;
    noise.validate()?;
    let mut ledger = QueryLedger::new();
    let r = p.trailing_zeros() as usize;
    let mut bits = vec![false; r];
    if !noise.has_gate_noise() && p > STATEVECTOR_MAX_P {
        let dist = qss_outcome_distribution_analytic(oracle.mean(), p)?;
        let t = sample_index(&dist, rng);
        for (j, b) in bits.iter_mut().enumerate() {
            *b = (t >> j) & 1 == 1;
        }
        ledger.charge(qss_queries(p));
    } else {
        let q = qss_circuit(oracle, p)?;
        let mut state = StateVector::new(q.layout.n_qubits())?;
        run_noisy(&q.amplify, &mut state, noise, rng, &mut ledger)?;
        let mut state = state.measure(&[q.layout.target()], rng)?.post_state;
        run_noisy(&q.qft, &mut state, noise, rng, &mut ledger)?;
        bits = state.measure(&q.layout.register(), rng)?.observed_bits;
    }
    noise.corrupt_readout(&mut bits, rng);
    let t = bits.iter().enumerate().fold(0usize, |acc, (j, &b)| acc | (usize::from(b) << j));
    let value = (t as f64 * PI / p as f64).sin().powi(2);
    Ok(Estimate {
        algorithm: Algorithm::Qss,
        value,
        queries_used: ledger.count(),
        trace: vec![StepTrace { step: 0, lower: 0.0, upper: 1.0, raw_fraction: t as f64 / p as f64, estimate: value }],
    })
}

/// Exact distribution of the register outcome `t`, from the statevector.
pub fn qss_outcome_distribution(oracle: &OracleSpec, p: usize) -> Result<Vec<f64>> {
    check_p(p)?;
    let q = qss_circuit(oracle, p)?;
    // The target measurement commutes with the QFT on the register, so the
    // register marginal of the full circuit is the outcome distribution.
    let state = q.full().execute(&mut QueryLedger::new())?;
    state.marginal(&q.layout.register())
}

/// Exact distribution of `t` for mean `f`, without the statevector.
///
/// With `sin θ = √f`, register value `m` holds `cos((2m+1)θ)` on the bad and
/// `sin((2m+1)θ)` on the good component; the QFT maps each sequence to its
/// DFT and the two contributions add in probability.
pub fn qss_outcome_distribution_analytic(f: f64, p: usize) -> Result<Vec<f64>> {
    check_p(p)?;
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::param(format!("mean {f} outside [0, 1]")));
    }
    let theta = f.sqrt().asin();
    let mut bad: Vec<Complex64> = (0..p).map(|m| Complex64::new(((2 * m + 1) as f64 * theta).cos(), 0.0)).collect();
    let mut good: Vec<Complex64> = (0..p).map(|m| Complex64::new(((2 * m + 1) as f64 * theta).sin(), 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(p);
    fft.process(&mut bad);
    fft.process(&mut good);
    let scale = (p * p) as f64;
    Ok(bad.iter().zip(&good).map(|(a, b)| (a.norm_sqr() + b.norm_sqr()) / scale).collect())
}

/// `Σ_t P(t) |sin²(tπ/P) - f|`, computed exactly.
pub fn qss_expected_error(f: f64, p: usize) -> Result<f64> {
    let dist = qss_outcome_distribution_analytic(f, p)?;
    Ok(dist.iter().zip(qss_estimate_grid(p)).map(|(w, g)| w * (g - f).abs()).sum())
}
