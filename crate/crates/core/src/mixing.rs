//! Consensus over per-agent matrices: Chebyshev-accelerated FastMix and plain gossip.
//!
//! One gossip step maps the stack `X` to `X·L`, i.e. agent `j` receives
//! `Σ_i L(i, j)·X_i`. Only neighbours (non-zero `L(i, j)`) contribute.

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::topology::WeightMatrix;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MixingError {
    #[error("tensor has {tensor} agents but the weight matrix is {weights}x{weights}")]
    DimensionMismatch { tensor: usize, weights: usize },
    #[error("agent tensor needs at least one slice")]
    Empty,
    #[error("slice {index} has shape {found:?}, expected {expected:?}")]
    SliceShape {
        index: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
}

/// Stack of `m` equally shaped `d×k` matrices; slice `j` is agent `j`'s copy.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTensor {
    slices: Vec<Matrix>,
}

impl AgentTensor {
    pub fn new(slices: Vec<Matrix>) -> Result<Self, MixingError> {
        let first = slices.first().ok_or(MixingError::Empty)?.shape();
        if let Some((index, s)) = slices.iter().enumerate().find(|(_, s)| s.shape() != first) {
            return Err(MixingError::SliceShape {
                index,
                expected: first,
                found: s.shape(),
            });
        }
        Ok(Self { slices })
    }

    /// `m` copies of `x`.
    pub fn replicate(x: &Matrix, m: usize) -> Self {
        assert!(m > 0);
        Self {
            slices: vec![x.clone(); m],
        }
    }

    pub fn m(&self) -> usize {
        self.slices.len()
    }

    pub fn d(&self) -> usize {
        self.slices[0].rows()
    }

    pub fn k(&self) -> usize {
        self.slices[0].cols()
    }

    pub fn slices(&self) -> &[Matrix] {
        &self.slices
    }

    pub fn slice(&self, j: usize) -> &Matrix {
        &self.slices[j]
    }

    pub fn into_slices(self) -> Vec<Matrix> {
        self.slices
    }

    /// `α·self + β·other`, slice by slice.
    pub fn linear_combination(&self, alpha: f64, other: &AgentTensor, beta: f64) -> AgentTensor {
        assert_eq!(self.m(), other.m());
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| {
                let mut out = a.scale(alpha);
                out.axpy(beta, b).expect("equal shapes");
                out
            })
            .collect();
        AgentTensor { slices }
    }
}

/// Before/after summary of one consensus call.
#[derive(Debug, Clone)]
pub struct ConsensusReport {
    pub mean_before: Matrix,
    pub mean_after: Matrix,
    pub err_before: f64,
    pub err_after: f64,
    /// Guaranteed contraction factor for `err_after / err_before`.
    pub rho_bound: f64,
}

/// `(1/m)·Σ_j X_j`, summed in agent order.
pub fn agent_mean(x: &AgentTensor) -> Matrix {
    let mut sum = x.slices[0].clone();
    for s in &x.slices[1..] {
        sum.add_assign(s).expect("equal shapes");
    }
    sum.scale_mut(1.0 / x.m() as f64);
    sum
}

/// `‖X − X̄⊗1‖_F = sqrt(Σ_j ‖X_j − X̄‖_F²)`.
pub fn consensus_error(x: &AgentTensor) -> f64 {
    let mean = agent_mean(x);
    x.slices
        .iter()
        .map(|s| {
            s.as_slice()
                .iter()
                .zip(mean.as_slice())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// Chebyshev momentum weight `η = (1 − √(1−λ₂²)) / (1 + √(1−λ₂²))`.
pub fn fast_mix_step_size(lambda2: f64) -> f64 {
    let s = (1.0 - lambda2 * lambda2).max(0.0).sqrt();
    (1.0 - s) / (1.0 + s)
}

/// `(1 − √(1−λ₂))^K`.
pub fn fast_mix_rate(lambda2: f64, k_steps: usize) -> f64 {
    (1.0 - (1.0 - lambda2).max(0.0).sqrt()).powi(k_steps as i32)
}

// slice j of X·L, accumulated over i in index order
fn gossip(x: &[Matrix], l: &Matrix) -> Vec<Matrix> {
    let m = x.len();
    (0..m)
        .into_par_iter()
        .map(|j| {
            let mut out = Matrix::zeros(x[0].rows(), x[0].cols());
            for (i, xi) in x.iter().enumerate() {
                let w = l[(i, j)];
                if w != 0.0 {
                    out.axpy(w, xi).expect("equal shapes");
                }
            }
            out
        })
        .collect()
}

fn check_dims(x: &AgentTensor, w: &WeightMatrix) -> Result<(), MixingError> {
    if x.m() != w.m() {
        return Err(MixingError::DimensionMismatch {
            tensor: x.m(),
            weights: w.m(),
        });
    }
    Ok(())
}

fn report(before: &AgentTensor, after: &AgentTensor, rho_bound: f64) -> ConsensusReport {
    ConsensusReport {
        mean_before: agent_mean(before),
        mean_after: agent_mean(after),
        err_before: consensus_error(before),
        err_after: consensus_error(after),
        rho_bound,
    }
}

/// FastMix: `X^{t+1} = (1+η)·X^t·L − η·X^{t−1}` from `X^0 = X^{−1} = x`,
/// returning `X^{k_steps}`.
///
/// Each step is a barrier: step `t+1` reads only `X^t` and `X^{t−1}`.
pub fn fast_mix(
    x: &AgentTensor,
    w: &WeightMatrix,
    k_steps: usize,
) -> Result<(AgentTensor, ConsensusReport), MixingError> {
    check_dims(x, w)?;
    let eta = fast_mix_step_size(w.lambda2());
    let mut prev = x.slices.clone();
    let mut cur = x.slices.clone();
    for _ in 0..k_steps {
        let mut next = gossip(&cur, w.matrix());
        next.par_iter_mut().zip(&prev).for_each(|(n, p)| {
            n.scale_mut(1.0 + eta);
            if eta != 0.0 {
                n.axpy(-eta, p).expect("equal shapes");
            }
        });
        prev = std::mem::replace(&mut cur, next);
    }
    let out = AgentTensor { slices: cur };
    let rep = report(x, &out, fast_mix_rate(w.lambda2(), k_steps));
    Ok((out, rep))
}

/// Plain gossip: `X^{t+1} = X^t·L`, `k_steps` times.
pub fn plain_mix(
    x: &AgentTensor,
    w: &WeightMatrix,
    k_steps: usize,
) -> Result<(AgentTensor, ConsensusReport), MixingError> {
    check_dims(x, w)?;
    let mut cur = x.slices.clone();
    for _ in 0..k_steps {
        cur = gossip(&cur, w.matrix());
    }
    let out = AgentTensor { slices: cur };
    let rep = report(x, &out, w.lambda2().powi(k_steps as i32));
    Ok((out, rep))
}
