//! Quantum-autoencoder laboratory.
//!
//! Compresses and reconstructs mixed quantum states using mixed reference
//! states: hybrid fidelity/QMI cost function, QAE-pure bound, reference
//! selection strategies, spin-chain control encoders, and evolution-strategy
//! training, with an experiment harness that writes CSV/SVG artifacts.

pub mod dynamics;
pub mod es;
pub mod experiment;
pub mod linalg;
pub mod qae;
pub mod qinfo;
pub mod states;
pub mod test_support;

use thiserror::Error as ThisError;

/// Crate-wide error type.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("matrix contains NaN or Inf entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),
    #[error("not a valid pure state: {0}")]
    InvalidPureState(String),
    #[error("not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("objective returned NaN at iteration {iteration}")]
    ObjectiveFailure {
        iteration: usize,
        /// Training records collected before the failure.
        trace: Box<es::TrainingTrace>,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
