//! Cyclic Jacobi eigensolver for real symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair `(p, q)` in row order and applies
//! the plane rotation that annihilates `a[p][q]`. The accumulated rotations form
//! the eigenvector matrix. Iteration stops once the off-diagonal Frobenius mass
//! drops below `1e-12·‖a‖_F`.

use super::{LinalgError, Matrix};

pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Relative asymmetry accepted by [`symmetric_eigen`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Eigenpairs sorted by descending eigenvalue; column `i` of `eigenvectors` pairs with `eigenvalues[i]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    /// Eigenvectors of the `k` largest eigenvalues as a `d×k` matrix.
    pub fn leading_vectors(&self, k: usize) -> Matrix {
        self.eigenvectors.columns(0, k)
    }

    /// `U·diag(λ)·Uᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for j in 0..u.cols() {
            for i in 0..u.rows() {
                scaled[(i, j)] *= self.eigenvalues[j];
            }
        }
        scaled.matmul(&u.transpose()).expect("square factors")
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Runs Jacobi sweeps in place. Returns the rotation product (if requested) and
/// whether the tolerance was met within the sweep cap.
fn jacobi(a: &mut Matrix, accumulate: bool) -> (Option<Matrix>, bool) {
    let n = a.rows();
    let mut v = accumulate.then(|| Matrix::identity(n));
    let threshold = JACOBI_TOLERANCE * a.frobenius_norm();
    let skip_below = 1e-3 * threshold / n as f64;

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(a) <= threshold {
            return (v, true);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= skip_below || apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + 1f64.hypot(theta));
                let c = 1.0 / 1f64.hypot(t);
                let s = t * c;

                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let new_p = c * arp - s * arq;
                    let new_q = s * arp + c * arq;
                    a[(r, p)] = new_p;
                    a[(p, r)] = new_p;
                    a[(r, q)] = new_q;
                    a[(q, r)] = new_q;
                }
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                if let Some(v) = v.as_mut() {
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
        }
    }
    let converged = off_diagonal_norm(a) <= threshold;
    (v, converged)
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx
}

fn check_symmetric(a: &Matrix) -> Result<(), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare(a.shape()));
    }
    let asym = a.sub(&a.transpose())?.frobenius_norm();
    if asym > SYMMETRY_TOLERANCE * a.frobenius_norm() {
        return Err(LinalgError::NotSymmetric(asym));
    }
    Ok(())
}

fn symmetric_copy(a: &Matrix) -> Matrix {
    let mut work = a.clone();
    work.symmetrize();
    work
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues in descending order.
pub fn symmetric_eigen(a: &Matrix) -> Result<EigenDecomposition, LinalgError> {
    check_symmetric(a)?;
    let mut work = symmetric_copy(a);
    let (v, converged) = jacobi(&mut work, true);
    if !converged {
        return Err(LinalgError::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }
    let v = v.expect("accumulated");
    let diag = work.diagonal();
    let order = descending_order(&diag);
    let n = a.rows();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues: order.iter().map(|&i| diag[i]).collect(),
        eigenvectors,
    })
}

/// Eigenvalues only (descending), skipping the rotation accumulation.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>, LinalgError> {
    check_symmetric(a)?;
    let mut work = symmetric_copy(a);
    let (_, converged) = jacobi(&mut work, false);
    if !converged {
        return Err(LinalgError::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }
    let diag = work.diagonal();
    Ok(descending_order(&diag).into_iter().map(|i| diag[i]).collect())
}

// Gram matrix on the smaller side: its eigenvalues are the squared singular values.
fn gram_eigenvalues(x: &Matrix) -> Vec<f64> {
    let g = if x.rows() >= x.cols() {
        x.gram()
    } else {
        x.transpose().gram()
    };
    // Gram matrices are exactly symmetric, so only the sweep cap can stop us;
    // the partially reduced diagonal is still the best available estimate.
    let mut work = g;
    jacobi(&mut work, false);
    let diag = work.diagonal();
    descending_order(&diag).into_iter().map(|i| diag[i]).collect()
}

/// Largest singular value `σ₁(x)`.
pub fn spectral_norm(x: &Matrix) -> f64 {
    gram_eigenvalues(x).first().map_or(0.0, |&l| l.max(0.0).sqrt())
}

/// Smallest of the `min(rows, cols)` singular values.
pub fn smallest_singular_value(x: &Matrix) -> f64 {
    gram_eigenvalues(x).last().map_or(0.0, |&l| l.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_matrix;

    #[test]
    fn diagonal_input() {
        let e = symmetric_eigen(&Matrix::from_diag(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.eigenvectors, Matrix::identity(3));

        let e = symmetric_eigen(&Matrix::from_diag(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.eigenvectors.column(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn analytic_two_by_two() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigen(&a).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u0 = e.eigenvectors.column(0);
        let u1 = e.eigenvectors.column(1);
        assert!((u0[0].abs() - h).abs() < 1e-14 && (u0[0] - u0[1]).abs() < 1e-14);
        assert!((u1[0].abs() - h).abs() < 1e-14 && (u1[0] + u1[1]).abs() < 1e-14);
    }

    #[test]
    fn random_psd_residuals() {
        let b = gaussian_matrix(20, 20, 7);
        let a = b.gram();
        let e = symmetric_eigen(&a).unwrap();
        let l1 = e.eigenvalues[0];
        for i in 0..20 {
            let u = Matrix::column_vector(&e.eigenvectors.column(i));
            let res = a.matmul(&u).unwrap().sub(&u.scale(e.eigenvalues[i])).unwrap();
            assert!(res.frobenius_norm() <= 1e-8 * l1, "column {i}");
        }
        let sum: f64 = e.eigenvalues.iter().sum();
        assert!((sum - a.trace()).abs() <= 1e-10 * a.trace().abs());
        assert!(e.eigenvectors.orthonormality_error() <= 1e-10);
        let recon = e.reconstruct().sub(&a).unwrap().frobenius_norm();
        assert!(recon <= 1e-8 * a.frobenius_norm());
    }

    #[test]
    fn deterministic_output() {
        let a = gaussian_matrix(12, 12, 1).gram();
        let e1 = symmetric_eigen(&a).unwrap();
        let e2 = symmetric_eigen(&a).unwrap();
        assert_eq!(e1.eigenvalues, e2.eigenvalues);
        assert_eq!(e1.eigenvectors, e2.eigenvectors);
        assert_eq!(symmetric_eigenvalues(&a).unwrap(), e1.eigenvalues);
    }

    #[test]
    fn rejects_asymmetric() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(symmetric_eigen(&a), Err(LinalgError::NotSymmetric(_))));
        assert!(matches!(
            symmetric_eigen(&Matrix::zeros(2, 3)),
            Err(LinalgError::NotSquare(_))
        ));
    }

    #[test]
    fn zero_matrix() {
        let e = symmetric_eigen(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&Matrix::from_diag(&[5.0, 1.0])), 5.0);
        assert_eq!(spectral_norm(&Matrix::zeros(3, 3)), 0.0);
        let x = Matrix::from_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert!((spectral_norm(&x) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn smallest_singular_value_examples() {
        assert_eq!(smallest_singular_value(&Matrix::identity(4)), 1.0);
        assert!((smallest_singular_value(&Matrix::from_diag(&[3.0, 0.5])) - 0.5).abs() < 1e-15);

        let mut x = Matrix::zeros(5, 2);
        x[(0, 0)] = 1.0;
        x[(0, 1)] = 1.0;
        x[(1, 1)] = 1e-3;
        // Gram = [[1, 1], [1, 1 + eps]]: det = eps, λ_max = (2 + eps + sqrt(4 + eps²)) / 2.
        let eps: f64 = 1e-3 * 1e-3;
        let lmax = (2.0 + eps + (4.0 + eps * eps).sqrt()) / 2.0;
        let expected = (eps / lmax).sqrt();
        assert!((expected - 7.07e-4).abs() < 1e-6);
        let got = smallest_singular_value(&x);
        assert!((got - expected).abs() <= 1e-8 * expected, "{got} vs {expected}");
    }

    #[test]
    fn norm_ordering() {
        let x = gaussian_matrix(7, 3, 11);
        assert!(spectral_norm(&x) >= smallest_singular_value(&x));
        let col = gaussian_matrix(7, 1, 12);
        let a = spectral_norm(&col);
        let b = smallest_singular_value(&col);
        assert!((a - b).abs() <= 1e-15 * a);
        assert!((a - col.frobenius_norm()).abs() <= 1e-14 * a);
    }
}
