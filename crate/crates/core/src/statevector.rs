//! Dense statevector simulation.
//!
//! Qubit `q` is bit `q` of the basis-state index, so qubit 0 is the least
//! significant bit. A register written `|i)` with `i = i_{n-1} ... i_1 i_0`
//! therefore stores `i_0` on qubit 0. For two qubits the amplitudes are laid
//! out as `[|00>, |01>, |10>, |11>]` where the rightmost digit is qubit 0.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance used for unitarity and normalization checks.
pub const TOLERANCE: f64 = 1e-10;

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A square unitary acting on `arity` qubits, stored row-major.
///
/// Row and column indices follow the same little-endian convention as the
/// state: bit `j` of a matrix index is the `j`-th entry of the target list.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    arity: usize,
    entries: Vec<Complex64>,
}

impl GateMatrix {
    /// Builds a gate, rejecting anything that is not unitary within [`TOLERANCE`].
    pub fn new(arity: usize, entries: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << arity;
        if arity == 0 || entries.len() != dim * dim {
            return Err(Error::InvalidGate(format!(
                "expected {dim}x{dim} entries for arity {arity}, got {}",
                entries.len()
            )));
        }
        let gate = GateMatrix { arity, entries };
        let deviation = gate.unitarity_deviation();
        if deviation > TOLERANCE {
            return Err(Error::NonUnitary(deviation));
        }
        Ok(gate)
    }

    fn from_real_unchecked(arity: usize, entries: &[f64]) -> Self {
        GateMatrix { arity, entries: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn identity() -> Self {
        Self::from_real_unchecked(1, &[1.0, 0.0, 0.0, 1.0])
    }

    pub fn hadamard() -> Self {
        let h = FRAC_1_SQRT_2;
        Self::from_real_unchecked(1, &[h, h, h, -h])
    }

    pub fn pauli_x() -> Self {
        Self::from_real_unchecked(1, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> Self {
        GateMatrix { arity: 1, entries: vec![ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO] }
    }

    pub fn pauli_z() -> Self {
        Self::from_real_unchecked(1, &[1.0, 0.0, 0.0, -1.0])
    }

    /// Real rotation `U_θ|0> = cos θ|0> + sin θ|1>`, `U_θ|1> = -sin θ|0> + cos θ|1>`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_real_unchecked(1, &[c, -s, s, c])
    }

    /// Phase shift `|1> -> e^{iφ}|1>`.
    pub fn phase(phi: f64) -> Self {
        GateMatrix { arity: 1, entries: vec![ONE, ZERO, ZERO, Complex64::from_polar(1.0, phi)] }
    }

    pub fn swap() -> Self {
        #[rustfmt::skip]
        let m = [
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ];
        Self::from_real_unchecked(2, &m)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let dim = self.dim();
        let mut entries = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[c * dim + r] = self.entries[r * dim + c].conj();
            }
        }
        GateMatrix { arity: self.arity, entries }
    }

    /// Largest element-wise deviation of `M M†` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = ZERO;
                for k in 0..dim {
                    acc += self.entries[r * dim + k] * self.entries[c * dim + k].conj();
                }
                let expected = if r == c { ONE } else { ZERO };
                worst = worst.max((acc - expected).norm());
            }
        }
        worst
    }
}

/// A partial assignment of bits to qubits, e.g. `{q3 = 1, q0 = 0}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitPattern {
    assignments: Vec<(usize, bool)>,
}

impl BitPattern {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, qubit: usize, bit: bool) -> Self {
        self.assignments.retain(|&(q, _)| q != qubit);
        self.assignments.push((qubit, bit));
        self
    }

    /// Assigns `value` little-endian across `qubits`.
    pub fn with_register(mut self, qubits: &[usize], value: usize) -> Self {
        for (j, &q) in qubits.iter().enumerate() {
            self = self.with(q, (value >> j) & 1 == 1);
        }
        self
    }

    pub fn assignments(&self) -> &[(usize, bool)] {
        &self.assignments
    }

    pub fn qubits(&self) -> Vec<usize> {
        self.assignments.iter().map(|&(q, _)| q).collect()
    }

    pub fn bits(&self) -> Vec<bool> {
        self.assignments.iter().map(|&(_, b)| b).collect()
    }

    /// `(mask, value)` such that a basis index `i` matches iff `i & mask == value`.
    pub fn mask_value(&self) -> (usize, usize) {
        self.assignments.iter().fold((0, 0), |(m, v), &(q, b)| (m | 1 << q, v | (usize::from(b) << q)))
    }

    pub fn matches(&self, index: usize) -> bool {
        let (m, v) = self.mask_value();
        index & m == v
    }
}

/// Result of a projective measurement on a subset of qubits.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub qubit_indices: Vec<usize>,
    pub observed_bits: Vec<bool>,
    pub post_state: StateVector,
}

impl MeasurementOutcome {
    /// Observed bits read as a little-endian integer over `qubit_indices`.
    pub fn value(&self) -> usize {
        self.observed_bits.iter().enumerate().fold(0, |acc, (j, &b)| acc | (usize::from(b) << j))
    }
}

/// Normalized amplitudes over the `2^n` computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::QubitOutOfRange { qubit: index, n_qubits });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Wraps caller-provided amplitudes. The length must be a power of two and
    /// the vector must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!("length {dim} is not a power of two")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let state = StateVector { n_qubits, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::InvalidState(format!("squared norm {norm} differs from 1")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn renormalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        for (j, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
            }
            if qubits[..j].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    /// Applies `gate` to `targets`, conditioned on every qubit in `controls` being 1.
    pub fn apply_gate(&mut self, gate: &GateMatrix, targets: &[usize], controls: &[usize]) -> Result<()> {
        if gate.arity() != targets.len() {
            return Err(Error::ArityMismatch { arity: gate.arity(), targets: targets.len() });
        }
        let all: Vec<usize> = targets.iter().chain(controls).copied().collect();
        self.check_qubits(&all)?;
        let control_mask = controls.iter().fold(0usize, |m, &q| m | 1 << q);
        if targets.len() == 1 {
            self.apply_single(gate, targets[0], control_mask);
        } else {
            self.apply_multi(gate, targets, control_mask);
        }
        Ok(())
    }

    fn apply_single(&mut self, gate: &GateMatrix, target: usize, control_mask: usize) {
        let bit = 1usize << target;
        let [m00, m01, m10, m11] = [gate.entries[0], gate.entries[1], gate.entries[2], gate.entries[3]];
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 || i & control_mask != control_mask {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | bit];
            self.amplitudes[i] = m00 * a0 + m01 * a1;
            self.amplitudes[i | bit] = m10 * a0 + m11 * a1;
        }
    }

    fn apply_multi(&mut self, gate: &GateMatrix, targets: &[usize], control_mask: usize) {
        let dim = gate.dim();
        let target_mask = targets.iter().fold(0usize, |m, &q| m | 1 << q);
        let offsets: Vec<usize> = (0..dim)
            .map(|local| targets.iter().enumerate().fold(0, |acc, (j, &q)| acc | (((local >> j) & 1) << q)))
            .collect();
        let mut buf = vec![ZERO; dim];
        for base in 0..self.amplitudes.len() {
            if base & target_mask != 0 || base & control_mask != control_mask {
                continue;
            }
            for (slot, &off) in buf.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let row = &gate.entries[r * dim..(r + 1) * dim];
                self.amplitudes[base | off] = row.iter().zip(&buf).map(|(m, a)| m * a).sum();
            }
        }
    }

    /// Applies the real rotation `U_θ` to `target`.
    pub fn apply_rotation(&mut self, theta: f64, target: usize) -> Result<()> {
        self.apply_gate(&GateMatrix::rotation(theta), &[target], &[])
    }

    /// Multiplies the amplitudes of the subspace where all `controls` are 1 by `e^{iφ}`.
    /// Without controls this is a global phase.
    pub fn apply_phase(&mut self, phi: f64, controls: &[usize]) -> Result<()> {
        self.check_qubits(controls)?;
        let control_mask = controls.iter().fold(0usize, |m, &q| m | 1 << q);
        let factor = Complex64::from_polar(1.0, phi);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & control_mask == control_mask {
                *a *= factor;
            }
        }
        Ok(())
    }

    /// Total probability of the basis states consistent with `pattern`.
    pub fn probability_of(&self, pattern: &BitPattern) -> Result<f64> {
        self.check_qubits(&pattern.qubits())?;
        let (mask, value) = pattern.mask_value();
        let p: f64 =
            self.amplitudes.iter().enumerate().filter(|(i, _)| i & mask == value).map(|(_, a)| a.norm_sqr()).sum();
        Ok(p.clamp(0.0, 1.0))
    }

    /// Marginal distribution of the little-endian value of `qubits`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_qubits(qubits)?;
        let mut dist = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let v = qubits.iter().enumerate().fold(0, |acc, (j, &q)| acc | (((i >> q) & 1) << j));
            dist[v] += a.norm_sqr();
        }
        Ok(dist)
    }

    /// Samples `qubits`, collapses onto the observed outcome and renormalizes.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> Result<MeasurementOutcome> {
        let dist = self.marginal(qubits)?;
        let value = sample_index(&dist, rng);
        let bits: Vec<bool> = (0..qubits.len()).map(|j| (value >> j) & 1 == 1).collect();
        let pattern = BitPattern::new().with_register(qubits, value);
        let (mask, val) = pattern.mask_value();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask != val {
                *a = ZERO;
            }
        }
        self.renormalize();
        Ok(MeasurementOutcome { qubit_indices: qubits.to_vec(), observed_bits: bits, post_state: self.clone() })
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `1 - |<self|other>|`, zero iff the states agree up to a global phase.
    pub fn distance_up_to_phase(&self, other: &StateVector) -> f64 {
        (1.0 - self.inner(other).norm()).abs()
    }
}

/// Draws an index from a discrete distribution. Zero-weight entries are never
/// returned; the last positive entry absorbs rounding in the cumulative sum.
pub fn sample_index<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> usize {
    let total: f64 = dist.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last_positive = i;
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}
