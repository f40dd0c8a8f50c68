//! Stochastic noise injection for emulating NISQ hardware.
//!
//! Gate errors are Pauli twirls: after an operation, with the gate-error
//! probability for its width, every qubit it touched receives an independent
//! uniformly chosen `X`, `Y` or `Z`. Readout errors flip each measured bit
//! independently. A model with all probabilities zero draws no random numbers,
//! so noisy and noiseless runs with the same seed agree bit for bit.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Op};
use crate::error::{Error, Result};
use crate::ledger::QueryLedger;
use crate::statevector::{sample_index, BitPattern, GateMatrix, MeasurementOutcome, StateVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub readout_flip_prob: f64,
    pub gate_error_1q: f64,
    pub gate_error_mq: f64,
}

impl NoiseModel {
    pub fn new(readout_flip_prob: f64, gate_error_1q: f64, gate_error_mq: f64) -> Result<Self> {
        let model = NoiseModel { readout_flip_prob, gate_error_1q, gate_error_mq };
        model.validate()?;
        Ok(model)
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    /// Hardware-like preset: 5% readout flips, 0.1% single-qubit and 5%
    /// multi-qubit depolarizing errors.
    pub fn hardware_like() -> Self {
        NoiseModel { readout_flip_prob: 0.05, gate_error_1q: 0.001, gate_error_mq: 0.05 }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "none" | "noiseless" => Ok(Self::noiseless()),
            "hardware" | "hardware-like" => Ok(Self::hardware_like()),
            other => Err(Error::Config(format!("unknown noise preset `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("readout_flip_prob", self.readout_flip_prob),
            ("gate_error_1q", self.gate_error_1q),
            ("gate_error_mq", self.gate_error_mq),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn has_gate_noise(&self) -> bool {
        self.gate_error_1q > 0.0 || self.gate_error_mq > 0.0
    }

    pub fn is_noiseless(&self) -> bool {
        !self.has_gate_noise() && self.readout_flip_prob == 0.0
    }

    fn gate_error_for(&self, width: usize) -> f64 {
        match width {
            0 => 0.0,
            1 => self.gate_error_1q,
            _ => self.gate_error_mq,
        }
    }

    /// Flips each bit with the readout probability.
    pub fn corrupt_readout<R: Rng + ?Sized>(&self, bits: &mut [bool], rng: &mut R) {
        if self.readout_flip_prob > 0.0 {
            for b in bits.iter_mut() {
                if rng.random::<f64>() < self.readout_flip_prob {
                    *b = !*b;
                }
            }
        }
    }

    /// Probability that `pattern` is reported, given the true distribution of
    /// the pattern's qubits and independent readout flips.
    pub fn reported_probability(&self, state: &StateVector, pattern: &BitPattern) -> Result<f64> {
        if self.readout_flip_prob == 0.0 {
            return state.probability_of(pattern);
        }
        let qubits = pattern.qubits();
        let wanted = pattern.bits();
        let r = self.readout_flip_prob;
        let p = state
            .marginal(&qubits)?
            .iter()
            .enumerate()
            .map(|(v, &pv)| {
                wanted.iter().enumerate().fold(pv, |acc, (j, &bit)| {
                    let observed = (v >> j) & 1 == 1;
                    acc * if observed == bit { 1.0 - r } else { r }
                })
            })
            .sum::<f64>();
        Ok(p.clamp(0.0, 1.0))
    }
}

fn random_pauli<R: Rng + ?Sized>(rng: &mut R) -> GateMatrix {
    match rng.random_range(0..3) {
        0 => GateMatrix::pauli_x(),
        1 => GateMatrix::pauli_y(),
        _ => GateMatrix::pauli_z(),
    }
}

/// Runs one noisy trajectory of `circuit` on `state`.
pub fn run_noisy<R: Rng + ?Sized>(
    circuit: &Circuit,
    state: &mut StateVector,
    model: &NoiseModel,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<()> {
    circuit.check_width(state)?;
    for op in circuit.ops() {
        op.apply(state)?;
        if op.is_query() {
            ledger.charge(1);
        }
        if matches!(op, Op::Marker(_)) {
            continue;
        }
        let touched = op.touched_qubits();
        let p = model.gate_error_for(touched.len());
        if p > 0.0 && rng.random::<f64>() < p {
            for q in touched {
                state.apply_gate(&random_pauli(rng), &[q], &[])?;
            }
        }
    }
    Ok(())
}

/// Runs `circuit` from `|0...0>` under `model` and measures `qubits`.
///
/// `post_state` is the true collapsed state; `observed_bits` carry the
/// readout errors.
pub fn noisy_execute<R: Rng + ?Sized>(
    circuit: &Circuit,
    qubits: &[usize],
    model: &NoiseModel,
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    model.validate()?;
    let mut state = StateVector::new(circuit.n_qubits())?;
    run_noisy(circuit, &mut state, model, rng, &mut QueryLedger::new())?;
    let mut outcome = state.measure(qubits, rng)?;
    model.corrupt_readout(&mut outcome.observed_bits, rng);
    Ok(outcome)
}

/// Repeats "run `circuit` from `|0...0>`, measure the qubits of `head`" for
/// `trials` shots and counts the shots reporting exactly `head`.
///
/// Shots are independent and identically distributed, so without gate noise
/// the circuit is simulated once and the count drawn from the binomial
/// distribution of the reported head probability. With gate noise every shot
/// is its own trajectory. Queries are charged per shot either way.
pub fn count_heads<R: Rng + ?Sized>(
    circuit: &Circuit,
    head: &BitPattern,
    model: &NoiseModel,
    trials: u64,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<u64> {
    model.validate()?;
    ledger.charge(circuit.query_count() * trials);
    let mut scratch = QueryLedger::new();
    if !model.has_gate_noise() {
        let state = circuit.execute(&mut scratch)?;
        let p = model.reported_probability(&state, head)?;
        return binomial(trials, p, rng);
    }
    let qubits = head.qubits();
    let wanted = head.bits();
    let mut heads = 0;
    let mut bits = vec![false; qubits.len()];
    for _ in 0..trials {
        let mut state = StateVector::new(circuit.n_qubits())?;
        run_noisy(circuit, &mut state, model, rng, &mut scratch)?;
        let value = sample_index(&state.marginal(&qubits)?, rng);
        for (j, b) in bits.iter_mut().enumerate() {
            *b = (value >> j) & 1 == 1;
        }
        model.corrupt_readout(&mut bits, rng);
        if bits == wanted {
            heads += 1;
        }
    }
    Ok(heads)
}

pub(crate) fn binomial<R: Rng + ?Sized>(trials: u64, p: f64, rng: &mut R) -> Result<u64> {
    let dist = Binomial::new(trials, p.clamp(0.0, 1.0)).map_err(|e| Error::param(e.to_string()))?;
    Ok(dist.sample(rng))
}
