//! Scenario generation, baselines, parameter sweeps and CSV output for the
//! rotatable-antenna secrecy solvers in `rotsec-core`.

pub mod baselines;
pub mod checks;
pub mod config;
pub mod error;
pub mod output;
pub mod rng;
pub mod scenario_gen;
pub mod stats;
pub mod trends;
pub mod sweep;

pub use error::{HarnessError, Result};
