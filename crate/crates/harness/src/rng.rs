//! Seeded random streams.
//!
//! Every draw comes from ChaCha8 keyed by the scenario seed, with a fixed
//! stream id per purpose. Adding draws to one stream, or a new baseline with
//! its own stream, leaves the others untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Eavesdropper position and cluster positions.
pub const GEOMETRY: u64 = 1;
/// Cluster scattering phases.
pub const PHASES: u64 = 2;
/// Random boresights of the `random_orient` baseline.
pub const ORIENTATION: u64 = 3;
/// Legitimate receiver positions.
pub const RECEIVERS: u64 = 4;
/// First of the streams used by the self-checks.
pub const CHECKS: u64 = 16;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
