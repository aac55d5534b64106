//! Simulation of optical loss and coherent crosstalk noise in MZI-based
//! coherent silicon-photonic neural networks.
//!
//! The crate models a photonic network bottom-up: single 2x2 Mach-Zehnder
//! interferometers ([`device`]), universal meshes of them with Reck, Clements
//! and Diamond layouts ([`mesh`]), coherent field propagation through
//! multi-layer networks with per-MZI loss and crosstalk injection
//! ([`netsim`]), optoelectronic nonlinear activation units ([`nau`]),
//! Monte-Carlo statistics and power-penalty analysis ([`analysis`]), and a
//! small training/inference pipeline for accuracy-degradation studies
//! ([`pipeline`]).
//!
//! Conventions used throughout:
//!
//! * Complex field amplitudes are dimensioned so that `|a|^2` is optical
//!   power in milliwatts (0 dBm = 1 mW).
//! * Loss values quoted in dB become amplitude factors `10^(-dB/20)` inside
//!   transfer matrices; reported losses and powers are in dB / dBm.
//! * Zero optical power is reported as an explicit `-inf` dBm sentinel,
//!   never as NaN.

pub mod analysis;
pub mod cli;
pub mod device;
pub mod matrix;
pub mod mesh;
pub mod nau;
pub mod netsim;
pub mod pipeline;
pub mod rng;
pub mod units;

pub use matrix::{CMatrix, CVector, Complex, OpticalField};
pub use rng::SeededRng;
pub use units::{Db, Dbm};

/// Errors surfaced by the library API.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("power-penalty inequality unsatisfiable on {count} output(s)")]
    PenaltyDivergence { count: usize },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
