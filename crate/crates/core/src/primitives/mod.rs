//! Building blocks of the estimators: oracle preparation, the quantum coin,
//! amplitude amplification, reflections and the QFT.
//!
//! Register layout (qubit 0 least significant): the `n` input qubits are
//! `0..n`, the target qubit is `n`, and any QSS counting register follows at
//! `n+1..`. A basis index therefore reads `register | target | input` from the
//! most to the least significant bits.

pub mod oracle;
pub mod qft;

use std::f64::consts::PI;

use crate::circuit::{Circuit, GateKind, Op};
use crate::error::{Error, Result};
use crate::ledger::QueryLedger;
use crate::statevector::{BitPattern, StateVector};

pub use oracle::{Encoding, OracleSpec};
pub use qft::{inverse_qft, qft, qft_circuit};

/// Qubit assignment for an oracle with `n_input` input qubits and an optional
/// counting register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n_input: usize,
    pub n_register: usize,
}

impl Layout {
    pub fn for_oracle(oracle: &OracleSpec) -> Self {
        Layout { n_input: oracle.n_input_qubits(), n_register: 0 }
    }

    pub fn with_register(mut self, n_register: usize) -> Self {
        self.n_register = n_register;
        self
    }

    pub fn inputs(&self) -> Vec<usize> {
        (0..self.n_input).collect()
    }

    pub fn target(&self) -> usize {
        self.n_input
    }

    /// Target followed by the inputs.
    pub fn target_and_inputs(&self) -> Vec<usize> {
        std::iter::once(self.target()).chain(self.inputs()).collect()
    }

    pub fn register(&self) -> Vec<usize> {
        (self.n_input + 1..self.n_qubits()).collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_input + 1 + self.n_register
    }

    /// `target = 1`, the head outcome of the QSS-style state.
    pub fn target_one(&self) -> BitPattern {
        BitPattern::new().with(self.target(), true)
    }

    /// `|1>|0)`: target 1 and every input 0, the head outcome of the quantum coin.
    pub fn coin_head(&self) -> BitPattern {
        BitPattern::new().with(self.target(), true).with_register(&self.inputs(), 0)
    }

    /// Basis index of `|1>|0)`.
    pub fn coin_head_index(&self) -> usize {
        1 << self.target()
    }
}

fn oracle_op(oracle: &OracleSpec, layout: &Layout, inverse: bool) -> Op {
    Op::Oracle { spec: oracle.clone(), target: layout.target(), inputs: layout.inputs(), controls: Vec::new(), inverse }
}

/// Exact `2|0...0><0...0| - I` on `qubits`.
///
/// A single qubit needs only `Z`. Larger sets use an `X` layer around a
/// multi-controlled `Z`, which realizes `I - 2|0...0><0...0|`, followed by a
/// global phase of `π` to restore the sign. The phase matters once the
/// reflection is conditioned on a control qubit.
pub fn reflection_about_zero(n_qubits: usize, qubits: &[usize]) -> Result<Circuit> {
    if qubits.is_empty() {
        return Err(Error::param("reflection needs at least one qubit"));
    }
    let mut c = Circuit::new(n_qubits);
    if let [q] = qubits {
        c.gate(GateKind::Z, *q);
        return Ok(c);
    }
    c.layer(GateKind::X, qubits);
    c.push(Op::controlled(GateKind::Z, qubits[0], qubits[1..].to_vec()));
    c.layer(GateKind::X, qubits);
    c.push(Op::GlobalPhase { angle: PI, controls: Vec::new() });
    Ok(c)
}

/// `I - 2|b><b|` for the single basis pattern `|1>|0)` (target 1, inputs 0).
fn flip_coin_head(n_qubits: usize, layout: &Layout) -> Circuit {
    let mut c = Circuit::new(n_qubits);
    let inputs = layout.inputs();
    c.layer(GateKind::X, &inputs);
    c.push(Op::controlled(GateKind::Z, layout.target(), inputs.clone()));
    c.layer(GateKind::X, &inputs);
    c
}

/// `H` on the inputs followed by the sqrt-amplitude oracle.
pub fn qss_preparation_circuit(oracle: &OracleSpec, n_qubits: usize) -> Result<Circuit> {
    oracle.require(Encoding::SqrtAmplitude)?;
    let layout = Layout::for_oracle(oracle);
    let mut c = Circuit::new(n_qubits);
    c.layer(GateKind::H, &layout.inputs());
    c.push(oracle_op(oracle, &layout, false));
    Ok(c)
}

/// `H` on the inputs, the linear-amplitude oracle, then `H` on the inputs again.
pub fn coin_preparation_circuit(oracle: &OracleSpec, n_qubits: usize) -> Result<Circuit> {
    oracle.require(Encoding::LinearAmplitude)?;
    let layout = Layout::for_oracle(oracle);
    let inputs = layout.inputs();
    let mut c = Circuit::new(n_qubits);
    c.layer(GateKind::H, &inputs);
    c.push(oracle_op(oracle, &layout, false));
    c.layer(GateKind::H, &inputs);
    Ok(c)
}

/// State whose target-qubit `|1>` probability equals the mean of `F`. One query.
pub fn prepare_qss_state(oracle: &OracleSpec, ledger: &mut QueryLedger) -> Result<StateVector> {
    let layout = Layout::for_oracle(oracle);
    qss_preparation_circuit(oracle, layout.n_qubits())?.execute(ledger)
}

/// Quantum coin: the amplitude of `|1>|0)` equals `(1/N) Σ (F(i) - E)`. One query.
pub fn prepare_coin(oracle: &OracleSpec, ledger: &mut QueryLedger) -> Result<StateVector> {
    let layout = Layout::for_oracle(oracle);
    coin_preparation_circuit(oracle, layout.n_qubits())?.execute(ledger)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AaVariant {
    /// Rotation of the sqrt-amplitude state; good states are `target = 1`.
    Qss,
    /// Rotation of the quantum coin; the good state is `|1>|0)`.
    Qcoin,
}

/// One amplitude-amplification step `G` for a given oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct AaOperator {
    oracle: OracleSpec,
    variant: AaVariant,
}

impl AaOperator {
    pub fn new(oracle: OracleSpec, variant: AaVariant) -> Result<Self> {
        match variant {
            AaVariant::Qss => oracle.require(Encoding::SqrtAmplitude)?,
            AaVariant::Qcoin => oracle.require(Encoding::LinearAmplitude)?,
        }
        Ok(AaOperator { oracle, variant })
    }

    pub fn qss(oracle: OracleSpec) -> Result<Self> {
        Self::new(oracle, AaVariant::Qss)
    }

    pub fn qcoin(oracle: OracleSpec) -> Result<Self> {
        Self::new(oracle, AaVariant::Qcoin)
    }

    pub fn oracle(&self) -> &OracleSpec {
        &self.oracle
    }

    pub fn variant(&self) -> AaVariant {
        self.variant
    }

    pub fn layout(&self) -> Layout {
        Layout::for_oracle(&self.oracle)
    }

    /// Gates of one `G` in time order, inside an `n_qubits` register.
    ///
    /// QSS: `G = Q (H⊗I)(2|0>|0)(0|<0| - I)(H⊗I) Q⁻¹ Z`, which equals the
    /// form with a leading minus and `R = I - 2|0>|0)(0|<0|`.
    ///
    /// QCoin: `G = (H) Q (H) R_{|0>|0)} (H) Q⁻¹ (H) R_{|1>|0)}` where
    /// `R_{|0>|0)} = 2|0>|0)(0|<0| - I` and `R_{|1>|0)}` negates `|1>|0)`.
    pub fn circuit(&self, n_qubits: usize) -> Result<Circuit> {
        let layout = self.layout();
        if layout.n_qubits() > n_qubits {
            return Err(Error::InvalidState(format!(
                "AA operator needs {} qubits, register has {n_qubits}",
                layout.n_qubits()
            )));
        }
        let inputs = layout.inputs();
        let zero_reflection = reflection_about_zero(n_qubits, &layout.target_and_inputs())?;
        let mut c = Circuit::new(n_qubits);
        match self.variant {
            AaVariant::Qss => {
                c.gate(GateKind::Z, layout.target());
                c.push(oracle_op(&self.oracle, &layout, true));
                c.layer(GateKind::H, &inputs);
                c.append(&zero_reflection);
                c.layer(GateKind::H, &inputs);
                c.push(oracle_op(&self.oracle, &layout, false));
            }
            AaVariant::Qcoin => {
                c.append(&flip_coin_head(n_qubits, &layout));
                c.layer(GateKind::H, &inputs);
                c.push(oracle_op(&self.oracle, &layout, true));
                c.layer(GateKind::H, &inputs);
                c.append(&zero_reflection);
                c.layer(GateKind::H, &inputs);
                c.push(oracle_op(&self.oracle, &layout, false));
                c.layer(GateKind::H, &inputs);
            }
        }
        Ok(c)
    }

    /// Circuit preparing the state this operator rotates.
    pub fn preparation(&self, n_qubits: usize) -> Result<Circuit> {
        match self.variant {
            AaVariant::Qss => qss_preparation_circuit(&self.oracle, n_qubits),
            AaVariant::Qcoin => coin_preparation_circuit(&self.oracle, n_qubits),
        }
    }

    /// Preparation followed by `repetitions` applications of `G`.
    pub fn amplified_circuit(&self, repetitions: usize, n_qubits: usize) -> Result<Circuit> {
        let mut c = self.preparation(n_qubits)?;
        let g = self.circuit(n_qubits)?;
        for _ in 0..repetitions {
            c.append(&g);
        }
        Ok(c)
    }
}

/// Applies `G` `repetitions` times. Each repetition costs two queries.
pub fn apply_aa(state: &mut StateVector, op: &AaOperator, repetitions: usize, ledger: &mut QueryLedger) -> Result<()> {
    if repetitions == 0 {
        return Ok(());
    }
    let g = op.circuit(state.n_qubits())?;
    for _ in 0..repetitions {
        g.run(state, ledger)?;
    }
    Ok(())
}

/// QSS circuit with a `log2 P` counting register, split where the target is
/// measured.
#[derive(Clone, Debug, PartialEq)]
pub struct QssCircuit {
    /// `H` on the register, state preparation, and register qubit `j`
    /// controlling `G^(2^j)`.
    pub amplify: Circuit,
    /// Forward QFT on the register.
    pub qft: Circuit,
    pub layout: Layout,
}

impl QssCircuit {
    /// Both halves with block markers, as listed by circuit dumps.
    pub fn full(&self) -> Circuit {
        let mut c = self.amplify.clone();
        c.mark(format!("measure target={}", self.layout.target()));
        c.mark("qft");
        c.append(&self.qft);
        c.mark("measure register");
        c
    }
}

pub fn qss_circuit(oracle: &OracleSpec, p: usize) -> Result<QssCircuit> {
    if p == 0 || !p.is_power_of_two() {
        return Err(Error::param(format!("P = {p} is not a power of two")));
    }
    let oracle = oracle.with_encoding(Encoding::SqrtAmplitude);
    let layout = Layout::for_oracle(&oracle).with_register(p.trailing_zeros() as usize);
    let n = layout.n_qubits();
    let register = layout.register();
    let g = AaOperator::qss(oracle.clone())?.circuit(n)?;

    let mut c = Circuit::new(n);
    c.mark("prepare");
    c.layer(GateKind::H, &register);
    c.append(&qss_preparation_circuit(&oracle, n)?);
    for (j, &control) in register.iter().enumerate() {
        let reps = 1usize << j;
        c.mark(format!("amplify control={control} repetitions={reps}"));
        let cg = g.controlled_by(control);
        for _ in 0..reps {
            c.append(&cg);
        }
    }
    Ok(QssCircuit { amplify: c, qft: qft_circuit(n, &register), layout })
}

/// One shot of the quantum coin after `repetitions` AA steps.
pub fn qcoin_shot_circuit(oracle: &OracleSpec, repetitions: usize) -> Result<(Circuit, Layout)> {
    let op = AaOperator::qcoin(oracle.clone())?;
    let layout = op.layout();
    let n = layout.n_qubits();
    let mut c = Circuit::new(n);
    c.mark("coin");
    c.append(&op.preparation(n)?);
    for rep in 0..repetitions {
        c.mark(format!("amplify {}", rep + 1));
        c.append(&op.circuit(n)?);
    }
    c.mark(format!("measure target={} inputs", layout.target()));
    Ok((c, layout))
}
