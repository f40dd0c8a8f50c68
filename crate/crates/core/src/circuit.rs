//! Gate sequences shared by the noiseless runner, the noisy runner, the
//! circuit dumps and the resource counts.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ledger::QueryLedger;
use crate::primitives::oracle::{Encoding, OracleSpec};
use crate::statevector::{GateMatrix, StateVector};

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    /// Real rotation `U_θ`.
    Rotation(f64),
    /// `|1> -> e^{iφ}|1>`.
    Phase(f64),
    Swap,
    Matrix(GateMatrix),
}

impl GateKind {
    pub fn matrix(&self) -> GateMatrix {
        match self {
            GateKind::H => GateMatrix::hadamard(),
            GateKind::X => GateMatrix::pauli_x(),
            GateKind::Y => GateMatrix::pauli_y(),
            GateKind::Z => GateMatrix::pauli_z(),
            GateKind::Rotation(t) => GateMatrix::rotation(*t),
            GateKind::Phase(p) => GateMatrix::phase(*p),
            GateKind::Swap => GateMatrix::swap(),
            GateKind::Matrix(m) => m.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::Rotation(_) => "U",
            GateKind::Phase(_) => "P",
            GateKind::Swap => "SWAP",
            GateKind::Matrix(_) => "MAT",
        }
    }

    fn angle(&self) -> Option<f64> {
        match self {
            GateKind::Rotation(t) | GateKind::Phase(t) => Some(*t),
            _ => None,
        }
    }

    fn inverse(&self) -> GateKind {
        match self {
            GateKind::Rotation(t) => GateKind::Rotation(-t),
            GateKind::Phase(p) => GateKind::Phase(-p),
            GateKind::Matrix(m) => GateKind::Matrix(m.adjoint()),
            other => other.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Gate {
        kind: GateKind,
        targets: Vec<usize>,
        controls: Vec<usize>,
    },
    /// Oracle unitary: a rotation of `target` selected by the value of `inputs`.
    Oracle {
        spec: OracleSpec,
        target: usize,
        inputs: Vec<usize>,
        controls: Vec<usize>,
        inverse: bool,
    },
    /// `e^{iφ}` on the subspace where all controls are 1.
    GlobalPhase {
        angle: f64,
        controls: Vec<usize>,
    },
    /// Labelled block boundary; no effect on the state.
    Marker(String),
}

impl Op {
    pub fn gate(kind: GateKind, target: usize) -> Op {
        Op::Gate { kind, targets: vec![target], controls: Vec::new() }
    }

    pub fn controlled(kind: GateKind, target: usize, controls: Vec<usize>) -> Op {
        Op::Gate { kind, targets: vec![target], controls }
    }

    /// All qubits the operation reads or writes.
    pub fn touched_qubits(&self) -> Vec<usize> {
        match self {
            Op::Gate { targets, controls, .. } => targets.iter().chain(controls).copied().collect(),
            Op::Oracle { target, inputs, controls, .. } => {
                std::iter::once(*target).chain(inputs.iter().copied()).chain(controls.iter().copied()).collect()
            }
            Op::GlobalPhase { controls, .. } => controls.clone(),
            Op::Marker(_) => Vec::new(),
        }
    }

    pub fn is_query(&self) -> bool {
        matches!(self, Op::Oracle { .. })
    }

    fn with_control(&self, control: usize) -> Op {
        let mut op = self.clone();
        match &mut op {
            Op::Gate { controls, .. } | Op::Oracle { controls, .. } | Op::GlobalPhase { controls, .. } => {
                controls.push(control)
            }
            Op::Marker(_) => {}
        }
        op
    }

    fn inverse(&self) -> Op {
        match self {
            Op::Gate { kind, targets, controls } => {
                Op::Gate { kind: kind.inverse(), targets: targets.clone(), controls: controls.clone() }
            }
            Op::Oracle { spec, target, inputs, controls, inverse } => Op::Oracle {
                spec: spec.clone(),
                target: *target,
                inputs: inputs.clone(),
                controls: controls.clone(),
                inverse: !inverse,
            },
            Op::GlobalPhase { angle, controls } => Op::GlobalPhase { angle: -angle, controls: controls.clone() },
            Op::Marker(m) => Op::Marker(m.clone()),
        }
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match self {
            Op::Gate { kind, targets, controls } => state.apply_gate(&kind.matrix(), targets, controls),
            Op::Oracle { spec, target, inputs, controls, inverse } => {
                apply_oracle(state, spec, *target, inputs, controls, *inverse)
            }
            Op::GlobalPhase { angle, controls } => state.apply_phase(*angle, controls),
            Op::Marker(_) => Ok(()),
        }
    }

    fn dump_line(&self) -> String {
        fn list(qs: &[usize]) -> String {
            if qs.is_empty() {
                "-".to_string()
            } else {
                qs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            }
        }
        fn angle(a: Option<f64>) -> String {
            a.map_or_else(|| "-".to_string(), |a| format!("{a:.6}"))
        }
        match self {
            Op::Gate { kind, targets, controls } => {
                format!("{}\t{}\t{}\t{}", kind.name(), list(targets), list(controls), angle(kind.angle()))
            }
            Op::Oracle { spec, target, inputs, controls, inverse } => {
                let base = match spec.encoding() {
                    Encoding::SqrtAmplitude => "Q_F",
                    Encoding::LinearAmplitude => "Q_FE",
                };
                let name = if *inverse { format!("{base}_INV") } else { base.to_string() };
                let targets: Vec<usize> = std::iter::once(*target).chain(inputs.iter().copied()).collect();
                let offset = (spec.encoding() == Encoding::LinearAmplitude).then_some(spec.offset());
                format!("{name}\t{}\t{}\t{}", list(&targets), list(controls), angle(offset))
            }
            Op::GlobalPhase { angle: a, controls } => {
                format!("PHASE\t-\t{}\t{}", list(controls), angle(Some(*a)))
            }
            Op::Marker(label) => format!("# {label}"),
        }
    }
}

fn apply_oracle(
    state: &mut StateVector,
    spec: &OracleSpec,
    target: usize,
    inputs: &[usize],
    controls: &[usize],
    inverse: bool,
) -> Result<()> {
    if inputs.len() != spec.n_input_qubits() {
        return Err(Error::InvalidOracle(format!(
            "oracle over {} bins wired to {} input qubits",
            spec.len(),
            inputs.len()
        )));
    }
    let n = state.n_qubits();
    let mut seen = BTreeSet::new();
    for &q in std::iter::once(&target).chain(inputs).chain(controls) {
        if q >= n {
            return Err(Error::QubitOutOfRange { qubit: q, n_qubits: n });
        }
        if !seen.insert(q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    let sign = if inverse { -1.0 } else { 1.0 };
    let rotations: Vec<(f64, f64)> = (0..spec.len())
        .map(|i| {
            let (s, c) = (sign * spec.rotation_angle(i)).sin_cos();
            (c, s)
        })
        .collect();
    let tbit = 1usize << target;
    let control_mask = controls.iter().fold(0usize, |m, &q| m | 1 << q);
    let amps = state.amplitudes_mut();
    for i in 0..amps.len() {
        if i & tbit != 0 || i & control_mask != control_mask {
            continue;
        }
        let bin = inputs.iter().enumerate().fold(0usize, |acc, (j, &q)| acc | (((i >> q) & 1) << j));
        let (c, s) = rotations[bin];
        let a0 = amps[i];
        let a1 = amps[i | tbit];
        amps[i] = a0 * c - a1 * s;
        amps[i | tbit] = a0 * s + a1 * c;
    }
    Ok(())
}

/// An ordered list of operations on a fixed-size register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, ops: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn push(&mut self, op: Op) -> &mut Self {
        self.ops.push(op);
        self
    }

    pub fn append(&mut self, other: &Circuit) -> &mut Self {
        self.ops.extend(other.ops.iter().cloned());
        self
    }

    pub fn mark(&mut self, label: impl Into<String>) -> &mut Self {
        self.push(Op::Marker(label.into()))
    }

    pub fn gate(&mut self, kind: GateKind, target: usize) -> &mut Self {
        self.push(Op::gate(kind, target))
    }

    pub fn layer(&mut self, kind: GateKind, qubits: &[usize]) -> &mut Self {
        for &q in qubits {
            self.gate(kind.clone(), q);
        }
        self
    }

    /// Every operation additionally conditioned on `control`.
    pub fn controlled_by(&self, control: usize) -> Circuit {
        Circuit { n_qubits: self.n_qubits, ops: self.ops.iter().map(|op| op.with_control(control)).collect() }
    }

    pub fn inverse(&self) -> Circuit {
        Circuit { n_qubits: self.n_qubits, ops: self.ops.iter().rev().map(Op::inverse).collect() }
    }

    /// Applies the circuit, charging one query per oracle application.
    pub fn run(&self, state: &mut StateVector, ledger: &mut QueryLedger) -> Result<()> {
        self.check_width(state)?;
        for op in &self.ops {
            op.apply(state)?;
            if op.is_query() {
                ledger.charge(1);
            }
        }
        Ok(())
    }

    pub(crate) fn check_width(&self, state: &StateVector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::InvalidState(format!(
                "{}-qubit circuit run on a {}-qubit state",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        Ok(())
    }

    /// Runs from `|0...0>`.
    pub fn execute(&self, ledger: &mut QueryLedger) -> Result<StateVector> {
        let mut state = StateVector::new(self.n_qubits)?;
        self.run(&mut state, ledger)?;
        Ok(state)
    }

    pub fn query_count(&self) -> u64 {
        self.ops.iter().filter(|op| op.is_query()).count() as u64
    }

    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|op| !matches!(op, Op::Marker(_))).count()
    }

    /// Operations acting on two or more qubits (controls included).
    pub fn multi_qubit_gate_count(&self) -> usize {
        self.ops.iter().filter(|op| op.touched_qubits().len() >= 2).count()
    }

    /// Qubit pairs that must interact directly: every control with every
    /// target, and an oracle's target with each of its inputs.
    pub fn connectivity(&self) -> BTreeSet<(usize, usize)> {
        let mut edges = BTreeSet::new();
        let mut add = |a: usize, b: usize| {
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        };
        for op in &self.ops {
            match op {
                Op::Gate { targets, controls, .. } => {
                    for &c in controls {
                        targets.iter().for_each(|&t| add(c, t));
                    }
                    for (j, &a) in targets.iter().enumerate() {
                        targets[j + 1..].iter().for_each(|&b| add(a, b));
                    }
                }
                Op::Oracle { target, inputs, controls, .. } => {
                    inputs.iter().for_each(|&i| add(*target, i));
                    controls.iter().for_each(|&c| add(c, *target));
                }
                Op::GlobalPhase { controls, .. } => {
                    for (j, &a) in controls.iter().enumerate() {
                        controls[j + 1..].iter().for_each(|&b| add(a, b));
                    }
                }
                Op::Marker(_) => {}
            }
        }
        edges
    }

    /// Plain-text listing, one operation per line:
    /// `NAME<TAB>targets<TAB>controls<TAB>angle`, lists comma-separated, `-` for empty.
    /// Markers are emitted as `# label` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qubits {}", self.n_qubits);
        for op in &self.ops {
            let _ = writeln!(out, "{}", op.dump_line());
        }
        out
    }

    /// Dense matrix of the circuit, column `j` being the image of basis state `j`.
    /// Intended for small registers in tests and diagnostics.
    pub fn to_matrix(&self) -> Result<Vec<Vec<Complex64>>> {
        let dim = 1usize << self.n_qubits;
        let mut ledger = QueryLedger::new();
        (0..dim)
            .map(|j| {
                let mut s = StateVector::basis(self.n_qubits, j)?;
                self.run(&mut s, &mut ledger)?;
                Ok(s.amplitudes().to_vec())
            })
            .collect()
    }
}
