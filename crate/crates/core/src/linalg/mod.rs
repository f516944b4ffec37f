//! Dense real linear algebra: Householder QR, the Jacobi eigen oracle,
//! singular-value extremes, and principal angles between subspaces.

mod angles;
mod eigen;
mod matrix;
mod qr;
mod random;

pub use angles::{principal_angles, PrincipalAngles, SubspaceReference, DEGENERATE_COS};
pub use eigen::{
    smallest_singular_value, spectral_norm, symmetric_eigen, symmetric_eigenvalues,
    EigenDecomposition, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE,
};
pub use matrix::Matrix;
pub use qr::{complement_basis, qr_decompose, QrResult, RANK_TOLERANCE};
pub use random::{gaussian_matrix, gaussian_matrix_from, random_orthonormal, seeded_rng};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix shape {rows}x{cols} has an empty dimension")]
    EmptyShape { rows: usize, cols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix of shape {0:?} is not square")]
    NotSquare((usize, usize)),
    #[error("matrix is not symmetric (‖A − Aᵀ‖_F = {0:e})")]
    NotSymmetric(f64),
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("rank deficient input: Householder pivot {column} below threshold")]
    RankDeficient { column: usize },
    #[error("QR needs rows >= cols, got {rows}x{cols}")]
    WideMatrix { rows: usize, cols: usize },
    #[error("columns are not orthonormal (‖UᵀU − I‖_F = {0:e})")]
    NotOrthonormal(f64),
    #[error("a {rows}x{cols} basis has no proper orthogonal complement")]
    NoComplement { rows: usize, cols: usize },
    #[error("matrix is numerically singular")]
    Singular,
    #[error("degenerate principal angle (cos θ = {cos_theta:e})")]
    DegenerateAngle { cos_theta: f64 },
}
