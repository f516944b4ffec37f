//! Householder QR with a non-negative diagonal on `R`.

use super::{LinalgError, Matrix};

/// Relative threshold on a Householder pivot below which the input is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-13;

/// Thin QR factorization `x = q·r`.
#[derive(Debug, Clone)]
pub struct QrResult {
    /// `d×k` with orthonormal columns.
    pub q: Matrix,
    /// `k×k` upper triangular with non-negative diagonal.
    pub r: Matrix,
}

struct Reflectors {
    // reflector j acts on rows j.. and is stored with unit norm
    vectors: Vec<Vec<f64>>,
    r: Matrix,
}

fn householder(x: &Matrix) -> Result<Reflectors, LinalgError> {
    let (d, k) = x.shape();
    if d < k {
        return Err(LinalgError::WideMatrix { rows: d, cols: k });
    }
    let threshold = RANK_TOLERANCE * x.frobenius_norm();
    let mut a = x.clone();
    let mut vectors = Vec::with_capacity(k);
    for j in 0..k {
        let mut v: Vec<f64> = (j..d).map(|i| a[(i, j)]).collect();
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm <= threshold || norm == 0.0 {
            return Err(LinalgError::RankDeficient { column: j });
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        v.iter_mut().for_each(|t| *t /= vnorm);
        for c in j..k {
            let s: f64 = 2.0 * v.iter().enumerate().map(|(i, vi)| vi * a[(j + i, c)]).sum::<f64>();
            for (i, vi) in v.iter().enumerate() {
                a[(j + i, c)] -= s * vi;
            }
        }
        vectors.push(v);
    }
    let mut r = Matrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            r[(i, j)] = a[(i, j)];
        }
    }
    Ok(Reflectors { vectors, r })
}

fn apply_reflectors(reflectors: &[Vec<f64>], target: &mut Matrix) {
    for (j, v) in reflectors.iter().enumerate().rev() {
        for c in 0..target.cols() {
            let s: f64 = 2.0
                * v.iter()
                    .enumerate()
                    .map(|(i, vi)| vi * target[(j + i, c)])
                    .sum::<f64>();
            if s == 0.0 {
                continue;
            }
            for (i, vi) in v.iter().enumerate() {
                target[(j + i, c)] -= s * vi;
            }
        }
    }
}

/// Thin Householder QR of a tall matrix.
///
/// The diagonal of `r` is made non-negative, so the factorization is unique for
/// full-rank input. Fails with [`LinalgError::RankDeficient`] when a pivot falls
/// below `1e-13·‖x‖_F`.
pub fn qr_decompose(x: &Matrix) -> Result<QrResult, LinalgError> {
    let (d, k) = x.shape();
    let Reflectors { vectors, mut r } = householder(x)?;
    let mut q = Matrix::eye_columns(d, k);
    apply_reflectors(&vectors, &mut q);
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.negate_column(j);
            for c in j..k {
                r[(j, c)] = -r[(j, c)];
            }
        }
    }
    Ok(QrResult { q, r })
}

/// Orthonormal basis of the orthogonal complement of `span(u)`.
///
/// `u` must have orthonormal columns and fewer columns than rows.
pub fn complement_basis(u: &Matrix) -> Result<Matrix, LinalgError> {
    let (d, k) = u.shape();
    if k >= d {
        return Err(LinalgError::NoComplement { rows: d, cols: k });
    }
    let err = u.orthonormality_error();
    if err > 1e-8 {
        return Err(LinalgError::NotOrthonormal(err));
    }
    let Reflectors { vectors, .. } = householder(u)?;
    let mut full = Matrix::identity(d);
    apply_reflectors(&vectors, &mut full);
    Ok(full.columns(k, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_matrix;

    #[test]
    fn identity_is_fixed() {
        let QrResult { q, r } = qr_decompose(&Matrix::identity(3)).unwrap();
        assert!(q.max_abs_diff(&Matrix::identity(3)) < 1e-15);
        assert!(r.max_abs_diff(&Matrix::identity(3)) < 1e-15);
    }

    #[test]
    fn single_column_normalization() {
        let x = Matrix::column_vector(&[3.0, 4.0]);
        let QrResult { q, r } = qr_decompose(&x).unwrap();
        assert!((q[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((q[(1, 0)] - 0.8).abs() < 1e-15);
        assert!((r[(0, 0)] - 5.0).abs() < 1e-14);
    }

    // Classical Gram–Schmidt written independently of the Householder path.
    fn gram_schmidt(x: &Matrix) -> Matrix {
        let (d, k) = x.shape();
        let mut q = Matrix::zeros(d, k);
        for j in 0..k {
            let mut v = x.column(j);
            for p in 0..j {
                let qp = q.column(p);
                let c: f64 = qp.iter().zip(&x.column(j)).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(&qp).for_each(|(vi, qi)| *vi -= c * qi);
            }
            let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            q.set_column(j, &v.iter().map(|t| t / n).collect::<Vec<_>>());
        }
        q
    }

    #[test]
    fn random_tall_matrix_matches_gram_schmidt_span() {
        let x = gaussian_matrix(6, 3, 42);
        let QrResult { q, r } = qr_decompose(&x).unwrap();
        let recon = q.matmul(&r).unwrap().sub(&x).unwrap().frobenius_norm();
        assert!(recon <= 1e-10 * x.frobenius_norm());
        assert!(q.gram().max_abs_diff(&Matrix::identity(3)) <= 1e-12);
        for i in 0..3 {
            assert!(r[(i, i)] >= 0.0);
            for j in 0..i {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
        let gs = gram_schmidt(&x);
        let p1 = q.matmul(&q.transpose()).unwrap();
        let p2 = gs.matmul(&gs.transpose()).unwrap();
        assert!(p1.max_abs_diff(&p2) < 1e-12);
    }

    #[test]
    fn rank_deficient_input_rejected() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        assert!(matches!(
            qr_decompose(&x),
            Err(LinalgError::RankDeficient { column: 1 })
        ));
        let wide = Matrix::zeros(2, 3);
        assert!(matches!(qr_decompose(&wide), Err(LinalgError::WideMatrix { .. })));
    }

    #[test]
    fn complement_of_e1() {
        let u = Matrix::column_vector(&[1.0, 0.0, 0.0]);
        let v = complement_basis(&u).unwrap();
        assert_eq!(v.shape(), (3, 2));
        let vvt = v.matmul(&v.transpose()).unwrap();
        let mut proj = Matrix::identity(3);
        proj[(0, 0)] = 0.0;
        assert!(vvt.max_abs_diff(&proj) < 1e-15);
    }

    #[test]
    fn complement_projector_sum() {
        let u = qr_decompose(&gaussian_matrix(8, 3, 3)).unwrap().q;
        let v = complement_basis(&u).unwrap();
        assert!(v.t_matmul(&u).unwrap().max_abs() <= 1e-10);
        assert!(v.gram().max_abs_diff(&Matrix::identity(5)) <= 1e-10);
        let sum = u
            .matmul(&u.transpose())
            .unwrap()
            .add(&v.matmul(&v.transpose()).unwrap())
            .unwrap();
        assert!(sum.max_abs_diff(&Matrix::identity(8)) <= 1e-10);
    }

    #[test]
    fn complement_requires_proper_subspace() {
        assert!(matches!(
            complement_basis(&Matrix::identity(3)),
            Err(LinalgError::NoComplement { .. })
        ));
    }
}
