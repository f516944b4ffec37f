//! Decentralized and centralized power iterations for top-k PCA.
//!
//! All three procedures share one driver: a per-iteration step that maps the
//! agents' [`AgentState`]s forward, followed by metric collection into a
//! [`TraceRecord`]. Per-agent work runs on the rayon pool; every reduction
//! (means, sums, consensus errors) is taken in agent-index order, so results do
//! not depend on scheduling.

mod centralized;
mod deepca;
mod depca;
mod driver;
mod problem;

pub use centralized::run_centralized_pm;
pub use deepca::{deepca_step, run_deepca};
pub use depca::{depca_step, run_depca, DepcaOptions};
pub use driver::{RunResult, RunSettings, StopRule};
pub use problem::{GroundTruth, ProblemInstance};

use thiserror::Error;

use crate::linalg::{LinalgError, Matrix};
use crate::mixing::MixingError;

pub use crate::harness::TraceRecord;

#[derive(Debug, Clone, Error)]
pub enum AlgorithmError {
    #[error("agent {agent}: {source}")]
    Agent {
        agent: usize,
        #[source]
        source: LinalgError,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mixing(#[from] MixingError),
    #[error("problem has no local matrices")]
    EmptyProblem,
    #[error("local matrix {index} has shape {found:?}, expected {expected:?}")]
    LocalShape {
        index: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("local matrix {0} is not symmetric")]
    LocalNotSymmetric(usize),
    #[error("mean matrix is not positive semi-definite (λ_min = {0:e})")]
    NotPsd(f64),
    #[error("rank k={k} must satisfy 1 <= k <= d={d}")]
    InvalidRank { k: usize, d: usize },
    #[error("initial point has shape {found:?}, expected {expected:?}")]
    InitShape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("initial point is not orthonormal (‖WᵀW − I‖_F = {0:e})")]
    InitNotOrthonormal(f64),
    #[error("initial point is orthogonal to the target subspace (tan θ = ∞)")]
    InfiniteInitialAngle,
    #[error("stopping on tan θ needs a ground truth")]
    MissingGroundTruth,
    #[error("non-finite iterate at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("problem has {problem} agents but the network has {network}")]
    AgentCountMismatch { problem: usize, network: usize },
}

/// One agent's local iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    /// Orthonormal iterate `W_j`.
    pub w: Matrix,
    /// Tracking variable `S_j` (for the baselines: the matrix that was orthonormalized).
    pub s: Matrix,
    /// `A_j·W_j` from the previous iteration.
    pub g_prev: Matrix,
}

impl AgentState {
    /// `W_j = S_j = W⁰` with the convention `A_j·W_j^{(−1)} = W⁰`.
    pub fn initial(w0: &Matrix) -> Self {
        Self {
            w: w0.clone(),
            s: w0.clone(),
            g_prev: w0.clone(),
        }
    }
}

/// `m` identical initial states.
pub fn init_agent_states(w0: &Matrix, m: usize) -> Vec<AgentState> {
    vec![AgentState::initial(w0); m]
}

/// Flips column `i` of `w` when `⟨w(:,i), w0(:,i)⟩ < 0`. A zero inner product leaves the column alone.
pub fn sign_adjust(w: &Matrix, w0: &Matrix) -> Matrix {
    assert_eq!(w.shape(), w0.shape(), "sign_adjust needs matching shapes");
    let mut out = w.clone();
    for i in 0..w.cols() {
        if w.dot_columns(i, w0, i) < 0.0 {
            out.negate_column(i);
        }
    }
    out
}

/// Smallest column inner product `⟨w(:,i), w0(:,i)⟩`.
pub fn min_sign_alignment(w: &Matrix, w0: &Matrix) -> f64 {
    (0..w.cols())
        .map(|i| w.dot_columns(i, w0, i))
        .fold(f64::INFINITY, f64::min)
}
