//! Tabulated integrands encoded into a target qubit's amplitude.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// How `F(i)` is written into the target qubit for input basis state `|i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    /// `|0>|i) -> (sqrt(1-F(i))|0> + sqrt(F(i))|1>)|i)`, so P(target = 1) averages to the mean.
    SqrtAmplitude,
    /// `|0>|i) -> (sqrt(1-(F(i)-E)^2)|0> + (F(i)-E)|1>)|i)`, the quantum-coin oracle.
    LinearAmplitude,
}

impl Encoding {
    pub fn name(self) -> &'static str {
        match self {
            Encoding::SqrtAmplitude => "sqrt-amplitude",
            Encoding::LinearAmplitude => "linear-amplitude",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An integrand `F` tabulated over `N = 2^n` bins, plus the offset `E`.
///
/// The values are shared, so re-offsetting an oracle between estimation steps
/// does not copy the table.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSpec {
    values: Arc<[f64]>,
    offset: f64,
    encoding: Encoding,
}

impl OracleSpec {
    pub fn new(values: Vec<f64>, offset: f64, encoding: Encoding) -> Result<Self> {
        let n = values.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidOracle(format!("N = {n} is not a power of two")));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidOracle(format!("F({i}) = {v} outside [0, 1]")));
        }
        if !(0.0..1.0).contains(&offset) {
            return Err(Error::InvalidOracle(format!("offset {offset} outside [0, 1)")));
        }
        if encoding == Encoding::SqrtAmplitude && offset != 0.0 {
            return Err(Error::InvalidOracle("sqrt-amplitude oracles take no offset".into()));
        }
        Ok(OracleSpec { values: values.into(), offset, encoding })
    }

    pub fn sqrt_amplitude(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 0.0, Encoding::SqrtAmplitude)
    }

    pub fn linear_amplitude(values: Vec<f64>, offset: f64) -> Result<Self> {
        Self::new(values, offset, Encoding::LinearAmplitude)
    }

    /// Constant integrand `F ≡ f` over `2^n_input` bins.
    pub fn constant(f: f64, n_input: usize, encoding: Encoding) -> Result<Self> {
        Self::new(vec![f; 1 << n_input], 0.0, encoding)
    }

    /// Single-bin oracle acting on the target qubit alone, as used for the
    /// minimal hardware circuits with no input register.
    pub fn direct(f: f64, encoding: Encoding) -> Result<Self> {
        Self::constant(f, 0, encoding)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_input_qubits(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    /// `f = (1/N) Σ F(i)`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn with_offset(&self, offset: f64) -> Result<Self> {
        Self::new(self.values.to_vec(), offset, self.encoding).map(|mut o| {
            o.values = Arc::clone(&self.values);
            o
        })
    }

    pub fn with_encoding(&self, encoding: Encoding) -> Self {
        OracleSpec { values: Arc::clone(&self.values), offset: 0.0, encoding }
    }

    /// Angle `φ_i` with `U_{φ_i}|0> = cos φ_i|0> + sin φ_i|1>` realizing bin `i`.
    pub fn rotation_angle(&self, i: usize) -> f64 {
        match self.encoding {
            Encoding::SqrtAmplitude => self.values[i].sqrt().asin(),
            Encoding::LinearAmplitude => (self.values[i] - self.offset).clamp(-1.0, 1.0).asin(),
        }
    }

    pub(crate) fn require(&self, encoding: Encoding) -> Result<()> {
        if self.encoding == encoding {
            Ok(())
        } else {
            Err(Error::WrongEncoding { expected: encoding.name(), found: self.encoding.name() })
        }
    }
}
