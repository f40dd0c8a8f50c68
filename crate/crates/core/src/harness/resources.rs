//! Qubit, gate and connectivity counts of the QSS and QCoin circuits.

use std::fmt;

use serde::Serialize;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::estimators::Algorithm;
use crate::primitives::{qcoin_shot_circuit, qss_circuit, Encoding, OracleSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceReport {
    pub algorithm: Algorithm,
    pub n: usize,
    pub p: usize,
    /// Qubits including the target.
    pub qubits: usize,
    /// Register qubits only (`log N + log P` for QSS, `log N` for QCoin).
    pub qubits_without_target: usize,
    pub queries: u64,
    pub gates: usize,
    pub multi_qubit_gates: usize,
    pub connectivity_edges: usize,
}

impl fmt::Display for ResourceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} N={} P={} qubits={} qubits_without_target={} queries={} gates={} multi_qubit_gates={} connectivity_edges={}",
            self.algorithm,
            self.n,
            self.p,
            self.qubits,
            self.qubits_without_target,
            self.queries,
            self.gates,
            self.multi_qubit_gates,
            self.connectivity_edges
        )
    }
}

fn report(algorithm: Algorithm, n: usize, p: usize, circuit: &Circuit) -> ResourceReport {
    ResourceReport {
        algorithm,
        n,
        p,
        qubits: circuit.n_qubits(),
        qubits_without_target: circuit.n_qubits() - 1,
        queries: circuit.query_count(),
        gates: circuit.gate_count(),
        multi_qubit_gates: circuit.multi_qubit_gate_count(),
        connectivity_edges: circuit.connectivity().len(),
    }
}

/// Counts for QSS with resolution `P` and, at the same `2P - 1` queries, one
/// QCoin shot with `P - 1` AA steps, both over `N` input bins.
pub fn report_resources(n: usize, p: usize) -> Result<Vec<ResourceReport>> {
    if n == 0 || !n.is_power_of_two() || p < 2 || !p.is_power_of_two() {
        return Err(Error::param(format!("N = {n} and P = {p} must be powers of two, P >= 2")));
    }
    let n_input = n.trailing_zeros() as usize;
    let qss = qss_circuit(&OracleSpec::constant(0.5, n_input, Encoding::SqrtAmplitude)?, p)?;
    let (coin, _) = qcoin_shot_circuit(&OracleSpec::constant(0.5, n_input, Encoding::LinearAmplitude)?, p - 1)?;
    Ok(vec![report(Algorithm::Qss, n, p, &qss.full()), report(Algorithm::Qcoin, n, p, &coin)])
}
