//! TOML experiment configs.

use serde::{Deserialize, Serialize};

use super::supersample::Region;
use super::{RunContext, Series};
use crate::error::{Error, Result};
use crate::estimators::{Algorithm, AngleDivisor, AngleInput};
use crate::noise::NoiseModel;

/// Noise given by preset name or by its three probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSetting {
    Preset(String),
    Model(NoiseModel),
}

impl Default for NoiseSetting {
    fn default() -> Self {
        NoiseSetting::Preset("none".into())
    }
}

impl NoiseSetting {
    pub fn resolve(&self) -> Result<NoiseModel> {
        match self {
            NoiseSetting::Preset(name) => NoiseModel::preset(name),
            NoiseSetting::Model(m) => {
                m.validate()?;
                Ok(*m)
            }
        }
    }
}

/// Where the true means of a sweep come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FSource {
    Values {
        values: Vec<f64>,
    },
    /// `count` evenly spaced values from `lo` to `hi` inclusive.
    Grid {
        count: usize,
        #[serde(default)]
        lo: f64,
        #[serde(default = "one")]
        hi: f64,
    },
    /// A fresh uniform draw per repetition.
    Random,
}

fn one() -> f64 {
    1.0
}

impl FSource {
    /// Fixed means, or `None` for per-repetition draws.
    pub fn fixed_values(&self) -> Option<Vec<f64>> {
        match self {
            FSource::Values { values } => Some(values.clone()),
            FSource::Grid { count: 1, lo, .. } => Some(vec![*lo]),
            FSource::Grid { count, lo, hi } => {
                Some((0..*count).map(|i| lo + (hi - lo) * i as f64 / (*count - 1) as f64).collect())
            }
            FSource::Random => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::param(msg));
        match self {
            FSource::Values { values } if values.is_empty() => bad("f values are empty".into()),
            FSource::Grid { count: 0, .. } => bad("f grid count must be positive".into()),
            FSource::Grid { lo, hi, .. } if !(0.0 <= *lo && lo <= hi && *hi <= 1.0) => {
                bad(format!("f grid [{lo}, {hi}] is not inside [0, 1]"))
            }
            _ => match self.fixed_values() {
                Some(v) if v.iter().any(|f| !(0.0..=1.0).contains(f)) => bad("f values must lie in [0, 1]".into()),
                _ => Ok(()),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrand {
    /// `F ≡ f`.
    #[default]
    Constant,
    /// Random values rescaled to mean exactly `f`.
    Random,
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::MonteCarlo, Algorithm::Qss, Algorithm::Qcoin]
}

fn default_k() -> Vec<usize> {
    vec![3]
}

fn default_n_input() -> usize {
    2
}

fn default_repetitions() -> usize {
    100
}

/// Value and convergence sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub seed_base: u64,
    pub budgets: Vec<u64>,
    pub f: FSource,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_k")]
    pub qcoin_k: Vec<usize>,
    /// Add a QCoin series whose `k` is selected per budget from the fixed-`k`
    /// series (convergence sweeps only).
    #[serde(default)]
    pub optimal_k: bool,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_n_input")]
    pub n_input: usize,
    #[serde(default)]
    pub integrand: Integrand,
    #[serde(default)]
    pub noise: NoiseSetting,
    #[serde(default)]
    pub hardware_circuits: bool,
    #[serde(default)]
    pub qcoin_angle_input: AngleInputSetting,
    #[serde(default)]
    pub qcoin_divisor: DivisorSetting,
    #[serde(default)]
    pub write_trials: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleInputSetting {
    #[default]
    Amplitude,
    Probability,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivisorSetting {
    #[default]
    Exact,
    PowerOfTwo,
}

impl SweepSpec {
    pub fn new(seed_base: u64, budgets: Vec<u64>, f: FSource) -> Self {
        SweepSpec {
            seed_base,
            budgets,
            f,
            algorithms: default_algorithms(),
            qcoin_k: default_k(),
            optimal_k: false,
            repetitions: default_repetitions(),
            n_input: default_n_input(),
            integrand: Integrand::Constant,
            noise: NoiseSetting::default(),
            hardware_circuits: false,
            qcoin_angle_input: AngleInputSetting::default(),
            qcoin_divisor: DivisorSetting::default(),
            write_trials: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sweep spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::param("repetitions must be at least 1"));
        }
        if self.budgets.is_empty() || self.budgets.contains(&0) {
            return Err(Error::param("budgets must be non-empty and positive"));
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("budgets must be strictly ascending"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::param("no algorithms selected"));
        }
        if self.algorithms.contains(&Algorithm::Qcoin) && self.qcoin_k.is_empty() {
            return Err(Error::param("qcoin selected without any k"));
        }
        if self.qcoin_k.iter().any(|&k| k > 20) {
            return Err(Error::param("qcoin k above 20"));
        }
        if self.n_input > 12 {
            return Err(Error::param("n_input above 12"));
        }
        self.f.validate()?;
        self.noise.resolve()?;
        Ok(())
    }

    pub fn context(&self) -> Result<RunContext> {
        Ok(RunContext {
            noise: self.noise.resolve()?,
            hardware_circuits: self.hardware_circuits,
            angle_input: match self.qcoin_angle_input {
                AngleInputSetting::Amplitude => AngleInput::Amplitude,
                AngleInputSetting::Probability => AngleInput::Probability,
            },
            divisor: match self.qcoin_divisor {
                DivisorSetting::Exact => AngleDivisor::Exact,
                DivisorSetting::PowerOfTwo => AngleDivisor::PowerOfTwo,
            },
        })
    }

    /// Series in output order, without the optimal-`k` series.
    pub fn series(&self) -> Vec<Series> {
        let mut out = Vec::new();
        for a in &self.algorithms {
            match a {
                Algorithm::MonteCarlo => out.push(Series::MonteCarlo),
                Algorithm::Qss => out.push(Series::Qss),
                Algorithm::Qcoin => out.extend(self.qcoin_k.iter().map(|&k| Series::Qcoin(k))),
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Image to supersample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ImageSource {
    /// Built-in test card, `width x height` output pixels.
    Synthetic { width: usize, height: usize },
    /// Binary graymap whose dimensions are multiples of the block size.
    File { path: String },
}

fn default_block() -> usize {
    8
}

fn default_runs() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupersampleConfig {
    pub seed_base: u64,
    pub image: ImageSource,
    pub budget: u64,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_k")]
    pub qcoin_k: Vec<usize>,
    #[serde(default = "default_block")]
    pub block: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub noise: NoiseSetting,
    #[serde(default)]
    pub hardware_circuits: bool,
    /// Regions for the MAE table; empty means the built-in layout of the
    /// synthetic image (or the whole image for files).
    #[serde(default)]
    pub regions: Vec<Region>,
}

impl SupersampleConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("supersample config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.runs == 0 {
            return Err(Error::param("budget and runs must be positive"));
        }
        if self.block == 0 || !(self.block * self.block).is_power_of_two() {
            return Err(Error::param(format!("block {} does not give a power-of-two N", self.block)));
        }
        if self.algorithms.is_empty() {
            return Err(Error::param("no algorithms selected"));
        }
        if let ImageSource::Synthetic { width, height } = self.image {
            if width == 0 || height == 0 {
                return Err(Error::param("synthetic image needs positive dimensions"));
            }
        }
        self.noise.resolve()?;
        Ok(())
    }

    pub fn context(&self) -> Result<RunContext> {
        Ok(RunContext {
            noise: self.noise.resolve()?,
            hardware_circuits: self.hardware_circuits,
            ..RunContext::noiseless()
        })
    }

    pub fn series(&self) -> Vec<Series> {
        let spec = SweepSpec {
            algorithms: self.algorithms.clone(),
            qcoin_k: self.qcoin_k.clone(),
            ..SweepSpec::new(0, vec![1], FSource::Random)
        };
        spec.series()
    }
}
