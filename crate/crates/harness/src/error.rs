use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown baseline `{0}` (expected one of proposed, rfoa, foa, isotropic, random_orient, discrete)")]
    UnknownBaseline(String),

    #[error("could not place nodes without overlap after {0} attempts")]
    Placement(usize),

    #[error("i/o error: {0}")]
    Io(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Solver(#[from] rotsec_core::Error),
}
