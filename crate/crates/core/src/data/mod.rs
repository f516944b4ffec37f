//! Dataset ingestion and problem construction.

mod libsvm;
mod synthetic;

pub use libsvm::{parse_libsvm, to_libsvm_string, Sample, SampleSet};
pub use synthetic::{generate_synthetic, spectrum_with_tail, SyntheticSpec};

use rayon::prelude::*;
use thiserror::Error;

use crate::algorithms::{AlgorithmError, ProblemInstance};
use crate::linalg::{LinalgError, Matrix};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("need {needed} samples, only {available} available")]
    InsufficientSamples { needed: usize, available: usize },
    #[error("m, n and d must all be positive")]
    EmptyShape,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense `d`-vector of a sample: indices above `d` are dropped, absent ones are zero.
pub fn densify(sample: &Sample, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    for &(idx, val) in &sample.features {
        if idx <= d {
            v[idx - 1] = val;
        }
    }
    v
}

/// `A_j = Σ_{i<n} v v ᵀ` over the `j`-th contiguous block of `n` samples, in file order.
pub fn build_agent_matrices(s: &SampleSet, m: usize, n: usize, d: usize) -> Result<ProblemInstance, DataError> {
    if m == 0 || n == 0 || d == 0 {
        return Err(DataError::EmptyShape);
    }
    let needed = m * n;
    if s.len() < needed {
        return Err(DataError::InsufficientSamples {
            needed,
            available: s.len(),
        });
    }
    let local = (0..m)
        .into_par_iter()
        .map(|j| {
            let rows: Vec<f64> = s.samples[j * n..(j + 1) * n]
                .iter()
                .flat_map(|sample| densify(sample, d))
                .collect();
            Ok(Matrix::from_vec(n, d, rows)?.gram())
        })
        .collect::<Result<Vec<_>, DataError>>()?;
    Ok(ProblemInstance::new(local)?)
}
