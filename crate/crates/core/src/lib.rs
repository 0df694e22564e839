//! Secrecy-rate maximization for MIMO wiretap channels with rotatable
//! antennas: channel synthesis, MMSE-based alternating optimization of the
//! precoder, artificial noise and antenna boresights, a closed-form
//! single-antenna solver and a multicast extension.

pub mod ao_solver;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod multicast;
pub mod orient_opt;
pub mod rate;
pub mod scenario;
pub mod siso;

pub use error::{Error, Result};
