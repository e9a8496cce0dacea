//! Reference solutions for cross-checking the boundary-element solver:
//! a cell-centred finite-volume solver on a uniform voxel grid (transient,
//! steady and time-harmonic) and closed-form one-dimensional solutions.
//!
//! Nothing here shares code with the boundary-element crate.

pub mod analytic;
pub mod compare;
pub mod grid;
pub mod krylov;

pub use analytic::{slab_step_response, two_layer_harmonic, TwoLayerHarmonic};
pub use compare::{compare_fields, write_probe_csv, ErrorReport};
pub use grid::{fd_solve_harmonic, probe_complex, fd_solve_steady, fd_solve_transient, FaceCondition, FdGrid, ProbeSeries};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("solver did not converge: {0}")]
    Convergence(String),
    #[error("comparison: {0}")]
    Compare(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, OracleError>;
