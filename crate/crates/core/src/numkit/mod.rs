//! Dense complex linear algebra: Hermitian eigensystems, spectral functions
//! and the canonical form of projector pairs.

mod eigen;
mod matrix;
mod projectors;
pub mod random;

pub use eigen::{
    eig_hermitian, eigvalsh, hermitian_norm, spectral_function, SpectralDecomposition,
    HERMITIAN_TOL, OFFDIAG_TOL,
};
pub use matrix::{inner, norm, ComplexMatrix, C64, ONE, ZERO};
pub use projectors::{
    checked_projector, principal_angles, projector_difference_bound, CommutingBlocks,
    DifferenceBound, PrincipalAngleReport, PROJECTOR_TOL,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("matrix is not Hermitian: max |M_ij - conj(M_ji)| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("matrix is not idempotent: max |M^2 - M| = {defect:e}")]
    NotIdempotent { defect: f64 },
    #[error("{entries} entries do not form a square matrix")]
    NotSquare { entries: usize },
    #[error("matrix of dimension {dim} needs {} entries, found {found}", dim * dim)]
    EntryCount { dim: usize, found: usize },
    #[error("matrix dimension must be positive")]
    EmptyMatrix,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {residual:e})"
    )]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("rank accounting failed: rank {rank} but {accounted} dimensions already assigned")]
    RankAccounting { rank: usize, accounted: usize },
}
