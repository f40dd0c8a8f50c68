//! Quantum Fourier transform over an arbitrary sub-register.
//!
//! Forward convention: for a sub-register holding `a_k` on value `k`
//! (little-endian over the given qubits) the output is
//! `b_j = (1/sqrt(P)) Σ_k exp(-2πi jk/P) a_k`.

use std::f64::consts::PI;

use crate::circuit::{Circuit, GateKind, Op};
use crate::error::Result;
use crate::ledger::QueryLedger;
use crate::statevector::StateVector;

/// Gate sequence for the forward transform on `qubits` inside an `n_qubits` register.
pub fn qft_circuit(n_qubits: usize, qubits: &[usize]) -> Circuit {
    let mut c = Circuit::new(n_qubits);
    let r = qubits.len();
    for i in (0..r).rev() {
        c.gate(GateKind::H, qubits[i]);
        for j in (0..i).rev() {
            let angle = -2.0 * PI / f64::from(1u32 << (i - j + 1));
            c.push(Op::controlled(GateKind::Phase(angle), qubits[i], vec![qubits[j]]));
        }
    }
    for i in 0..r / 2 {
        c.push(Op::Gate { kind: GateKind::Swap, targets: vec![qubits[i], qubits[r - 1 - i]], controls: Vec::new() });
    }
    c
}

/// Applies the forward transform in place.
pub fn qft(state: &mut StateVector, qubits: &[usize]) -> Result<()> {
    let circuit = qft_circuit(state.n_qubits(), qubits);
    circuit.run(state, &mut QueryLedger::new())
}

/// Applies the inverse transform in place.
pub fn inverse_qft(state: &mut StateVector, qubits: &[usize]) -> Result<()> {
    let circuit = qft_circuit(state.n_qubits(), qubits).inverse();
    circuit.run(state, &mut QueryLedger::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use num_complex::Complex64;

    #[test]
    fn uniform_input_concentrates_on_zero() {
        let mut s = StateVector::new(3).unwrap();
        let mut c = Circuit::new(3);
        c.layer(GateKind::H, &[0, 1, 2]);
        c.run(&mut s, &mut QueryLedger::new()).unwrap();
        qft(&mut s, &[0, 1, 2]).unwrap();
        assert!((s.amplitude(0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_input_becomes_uniform() {
        let mut s = StateVector::new(4).unwrap();
        qft(&mut s, &[0, 1, 2, 3]).unwrap();
        for a in s.amplitudes() {
            assert!((a - Complex64::new(0.25, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut s = StateVector::new(4).unwrap();
        s.apply_rotation(0.4, 0).unwrap();
        s.apply_rotation(1.3, 2).unwrap();
        let start = s.clone();
        qft(&mut s, &[2, 0, 3]).unwrap();
        inverse_qft(&mut s, &[2, 0, 3]).unwrap();
        assert!(s.distance_up_to_phase(&start) < 1e-12);
    }
}
