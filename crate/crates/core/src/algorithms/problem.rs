use rayon::prelude::*;

use super::AlgorithmError;
use crate::linalg::{symmetric_eigen, symmetric_eigenvalues, Matrix, SubspaceReference};

/// Relative asymmetry tolerated in a local matrix.
const LOCAL_SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Relative tolerance on negative eigenvalues of the mean.
const PSD_TOLERANCE: f64 = 1e-8;

/// Local symmetric matrices `A_1..A_m` and their mean.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    local: Vec<Matrix>,
    mean: Matrix,
    spectral_bound: f64,
}

impl ProblemInstance {
    /// Computes the mean as `(1/m)·Σ_j A_j`, summed in agent order.
    pub fn new(local: Vec<Matrix>) -> Result<Self, AlgorithmError> {
        let first = local.first().ok_or(AlgorithmError::EmptyProblem)?;
        let mut mean = Matrix::zeros(first.rows(), first.cols());
        for (index, a) in local.iter().enumerate() {
            mean.add_assign(a).map_err(|_| AlgorithmError::LocalShape {
                index,
                expected: first.shape(),
                found: a.shape(),
            })?;
        }
        mean.scale_mut(1.0 / local.len() as f64);
        Self::with_mean(local, mean)
    }

    /// Uses a mean supplied by the caller, e.g. a generator that constructs `A` exactly.
    pub fn with_mean(local: Vec<Matrix>, mean: Matrix) -> Result<Self, AlgorithmError> {
        if local.is_empty() {
            return Err(AlgorithmError::EmptyProblem);
        }
        let d = mean.rows();
        if !mean.is_square() {
            return Err(AlgorithmError::LocalShape {
                index: 0,
                expected: (d, d),
                found: mean.shape(),
            });
        }
        for (index, a) in local.iter().enumerate() {
            if a.shape() != (d, d) {
                return Err(AlgorithmError::LocalShape {
                    index,
                    expected: (d, d),
                    found: a.shape(),
                });
            }
            let asym = a.sub(&a.transpose())?.frobenius_norm();
            if asym > LOCAL_SYMMETRY_TOLERANCE * a.frobenius_norm().max(1.0) {
                return Err(AlgorithmError::LocalNotSymmetric(index));
            }
        }
        let norms: Vec<f64> = local
            .par_iter()
            .enumerate()
            .map(|(agent, a)| {
                let ev = symmetric_eigenvalues(a).map_err(|source| AlgorithmError::Agent { agent, source })?;
                Ok(ev.first().unwrap().abs().max(ev.last().unwrap().abs()))
            })
            .collect::<Result<_, AlgorithmError>>()?;
        let spectral_bound = norms.into_iter().fold(0.0, f64::max);
        Ok(Self {
            local,
            mean,
            spectral_bound,
        })
    }

    pub fn d(&self) -> usize {
        self.mean.rows()
    }

    pub fn m(&self) -> usize {
        self.local.len()
    }

    pub fn local_matrices(&self) -> &[Matrix] {
        &self.local
    }

    pub fn local(&self, j: usize) -> &Matrix {
        &self.local[j]
    }

    pub fn mean(&self) -> &Matrix {
        &self.mean
    }

    /// `L = max_j ‖A_j‖₂`.
    pub fn spectral_bound(&self) -> f64 {
        self.spectral_bound
    }
}

/// Exact eigendecomposition of the mean, used as the convergence oracle.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    k: usize,
    eigenvalues: Vec<f64>,
    reference: SubspaceReference,
    spectral_bound: f64,
}

impl GroundTruth {
    pub fn new(problem: &ProblemInstance, k: usize) -> Result<Self, AlgorithmError> {
        Self::from_matrix(problem.mean(), k, problem.spectral_bound())
    }

    /// Oracle for an arbitrary symmetric PSD matrix with a given local bound `L`.
    pub fn from_matrix(a: &Matrix, k: usize, spectral_bound: f64) -> Result<Self, AlgorithmError> {
        let d = a.rows();
        if k == 0 || k > d {
            return Err(AlgorithmError::InvalidRank { k, d });
        }
        let eig = symmetric_eigen(a)?;
        let lambda_min = *eig.eigenvalues.last().unwrap();
        if lambda_min < -PSD_TOLERANCE * eig.eigenvalues[0].abs().max(1.0) {
            return Err(AlgorithmError::NotPsd(lambda_min));
        }
        let u = eig.leading_vectors(k);
        let v = (k < d).then(|| eig.eigenvectors.columns(k, d));
        Ok(Self {
            k,
            eigenvalues: eig.eigenvalues,
            reference: SubspaceReference::with_complement(u, v),
            spectral_bound,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// All eigenvalues of the mean in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_k(&self) -> f64 {
        self.eigenvalues[self.k - 1]
    }

    /// `λ_{k+1}`, or 0 when `k = d`.
    pub fn lambda_k_plus_1(&self) -> f64 {
        self.eigenvalues.get(self.k).copied().unwrap_or(0.0)
    }

    pub fn gap(&self) -> f64 {
        self.lambda_k() - self.lambda_k_plus_1()
    }

    pub fn spectral_bound(&self) -> f64 {
        self.spectral_bound
    }

    /// `U`, the leading `k` eigenvectors.
    pub fn basis(&self) -> &Matrix {
        self.reference.basis()
    }

    pub fn reference(&self) -> &SubspaceReference {
        &self.reference
    }

    /// `tan θ_k(U, X)` with the infinity sentinel for degenerate or rank-deficient `X`.
    pub fn tan_theta(&self, x: &Matrix) -> Result<f64, AlgorithmError> {
        Ok(self.reference.tan_theta(x)?)
    }
}
