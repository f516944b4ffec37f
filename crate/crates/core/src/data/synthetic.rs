use rand_distr::{Distribution, StandardNormal};

use super::DataError;
use crate::algorithms::ProblemInstance;
use crate::linalg::{random_orthonormal, seeded_rng, Matrix};

/// A controlled-spectrum problem: `A = U·diag(eigenvalues)·Uᵀ` split across `m` agents.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub d: usize,
    pub k: usize,
    pub m: usize,
    /// Descending, length `d`.
    pub eigenvalues: Vec<f64>,
    /// Frobenius norm of each agent's perturbation before the zero-sum correction.
    pub heterogeneity: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |msg: &str| Err(DataError::InvalidSpec(msg.to_string()));
        if self.d == 0 || self.m == 0 {
            return bad("d and m must be positive");
        }
        if self.k == 0 || self.k > self.d {
            return bad("k must satisfy 1 <= k <= d");
        }
        if self.eigenvalues.len() != self.d {
            return bad("need exactly d eigenvalues");
        }
        if self.eigenvalues.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("eigenvalues must be finite and non-negative");
        }
        if self.eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return bad("eigenvalues must be sorted in descending order");
        }
        if !self.heterogeneity.is_finite() || self.heterogeneity < 0.0 {
            return bad("heterogeneity must be finite and non-negative");
        }
        Ok(())
    }
}

/// Eigenvalues `top` followed by `d − top.len()` values spaced linearly from `hi` down to `lo`.
pub fn spectrum_with_tail(top: &[f64], d: usize, hi: f64, lo: f64) -> Vec<f64> {
    let tail = d.saturating_sub(top.len());
    let mut out = top.to_vec();
    out.extend((0..tail).map(|i| {
        if tail == 1 {
            hi
        } else {
            hi + (lo - hi) * i as f64 / (tail - 1) as f64
        }
    }));
    out
}

/// Builds the instance. `A` is stored exactly, and `A_j = A + E_j` with `E_m = −Σ_{j<m} E_j`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<ProblemInstance, DataError> {
    spec.validate()?;
    let d = spec.d;
    let u = random_orthonormal(d, d, spec.seed);
    let mut scaled = u.clone();
    for j in 0..d {
        for i in 0..d {
            scaled[(i, j)] *= spec.eigenvalues[j];
        }
    }
    let mut a = scaled.matmul(&u.transpose())?;
    a.symmetrize();

    let mut rng = seeded_rng(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut perturbations = Vec::with_capacity(spec.m);
    let mut sum = Matrix::zeros(d, d);
    for _ in 1..spec.m {
        let mut e = Matrix::zeros(d, d);
        if spec.heterogeneity > 0.0 {
            for i in 0..d {
                for j in i..d {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    e[(i, j)] = v;
                    e[(j, i)] = v;
                }
            }
            let norm = e.frobenius_norm();
            e.scale_mut(spec.heterogeneity / norm);
        }
        sum.add_assign(&e)?;
        perturbations.push(e);
    }
    perturbations.push(sum.scale(-1.0));

    let local = perturbations
        .iter()
        .map(|e| a.add(e))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProblemInstance::with_mean(local, a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigenvalues;

    fn spec(m: usize, heterogeneity: f64) -> SyntheticSpec {
        SyntheticSpec {
            d: 4,
            k: 2,
            m,
            eigenvalues: vec![3.0, 2.0, 1.0, 0.5],
            heterogeneity,
            seed: 11,
        }
    }

    #[test]
    fn homogeneous_agents_equal_mean() {
        let p = generate_synthetic(&spec(3, 0.0)).unwrap();
        for a in p.local_matrices() {
            assert_eq!(a, p.mean());
        }
    }

    #[test]
    fn two_agents_cancel() {
        let p = generate_synthetic(&spec(2, 0.1)).unwrap();
        let sum = p.local(0).add(p.local(1)).unwrap();
        assert!(sum.max_abs_diff(&p.mean().scale(2.0)) <= 1e-14);
        let ev = symmetric_eigenvalues(p.mean()).unwrap();
        for (got, want) in ev.iter().zip([3.0, 2.0, 1.0, 0.5]) {
            assert!((got - want).abs() <= 1e-10);
        }
        let e0 = p.local(0).sub(p.mean()).unwrap().frobenius_norm();
        assert!((e0 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_agent_is_unperturbed() {
        let p = generate_synthetic(&spec(1, 5.0)).unwrap();
        assert_eq!(p.local(0), p.mean());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic(&spec(3, 0.3)).unwrap();
        let b = generate_synthetic(&spec(3, 0.3)).unwrap();
        assert_eq!(a.local_matrices(), b.local_matrices());
    }

    #[test]
    fn rejects_unsorted_spectrum() {
        let mut s = spec(2, 0.0);
        s.eigenvalues = vec![1.0, 2.0, 0.5, 0.1];
        assert!(matches!(generate_synthetic(&s), Err(DataError::InvalidSpec(_))));
    }

    #[test]
    fn tail_spectrum() {
        assert_eq!(spectrum_with_tail(&[4.0], 4, 1.0, 0.0), vec![4.0, 1.0, 0.5, 0.0]);
        assert_eq!(spectrum_with_tail(&[4.0], 2, 1.0, 0.0), vec![4.0, 1.0]);
    }
}
