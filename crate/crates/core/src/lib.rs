//! Statevector simulation of quantum mean estimators: Monte Carlo through a
//! quantum state, quantum supersampling (QSS) and the quantum coin method
//! (QCoin), with a noise model and experiment harness.

pub mod circuit;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod ledger;
pub mod noise;
pub mod primitives;
pub mod statevector;

pub use error::{Error, Result};
