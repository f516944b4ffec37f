//! Principal angles between a reference subspace and the span of a tall matrix.

use super::{complement_basis, qr_decompose, smallest_singular_value, spectral_norm};
use super::{LinalgError, Matrix};

/// `cos θ` at or below this value is reported as a degenerate angle.
pub const DEGENERATE_COS: f64 = 1e-13;

/// Cosine, sine and tangent of the largest principal angle `θ_k`.
///
/// `tan_theta` is `f64::INFINITY` when the spans are (numerically) orthogonal in
/// some direction, i.e. `uᵀq` is singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalAngles {
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub tan_theta: f64,
}

impl PrincipalAngles {
    pub fn is_degenerate(&self) -> bool {
        self.tan_theta.is_infinite()
    }

    /// `tan θ`, or [`LinalgError::DegenerateAngle`] in place of the infinity sentinel.
    pub fn tan_checked(&self) -> Result<f64, LinalgError> {
        if self.is_degenerate() {
            Err(LinalgError::DegenerateAngle {
                cos_theta: self.cos_theta,
            })
        } else {
            Ok(self.tan_theta)
        }
    }
}

/// An orthonormal `U` together with an orthonormal basis `V` of its complement.
///
/// Building this once avoids recomputing `V` when many iterates are compared
/// against the same target subspace.
#[derive(Debug, Clone)]
pub struct SubspaceReference {
    u: Matrix,
    v: Option<Matrix>,
}

impl SubspaceReference {
    pub fn new(u: Matrix) -> Result<Self, LinalgError> {
        let err = u.orthonormality_error();
        if err > 1e-8 {
            return Err(LinalgError::NotOrthonormal(err));
        }
        let v = if u.cols() < u.rows() {
            Some(complement_basis(&u)?)
        } else {
            None
        };
        Ok(Self { u, v })
    }

    /// Uses a caller-supplied complement, e.g. the trailing eigenvectors of the same decomposition.
    pub fn with_complement(u: Matrix, v: Option<Matrix>) -> Self {
        Self { u, v }
    }

    pub fn basis(&self) -> &Matrix {
        &self.u
    }

    pub fn complement(&self) -> Option<&Matrix> {
        self.v.as_ref()
    }

    /// Angles between `span(u)` and `span(x)`; `x` is orthonormalized first.
    pub fn angles(&self, x: &Matrix) -> Result<PrincipalAngles, LinalgError> {
        if x.shape() != self.u.shape() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.u.shape(),
                found: x.shape(),
            });
        }
        let q = qr_decompose(x)?.q;
        let c = self.u.t_matmul(&q)?;
        let cos_theta = smallest_singular_value(&c).min(1.0);
        let Some(v) = &self.v else {
            return Ok(PrincipalAngles {
                cos_theta,
                sin_theta: 0.0,
                tan_theta: 0.0,
            });
        };
        let vq = v.t_matmul(&q)?;
        let sin_theta = spectral_norm(&vq).min(1.0);
        let tan_theta = if cos_theta <= DEGENERATE_COS {
            f64::INFINITY
        } else {
            match c.inverse() {
                Ok(c_inv) => spectral_norm(&vq.matmul(&c_inv)?),
                Err(LinalgError::Singular) => f64::INFINITY,
                Err(e) => return Err(e),
            }
        };
        Ok(PrincipalAngles {
            cos_theta,
            sin_theta,
            tan_theta,
        })
    }

    /// Shorthand for `angles(x)?.tan_theta`, with rank-deficient `x` mapped to the infinity sentinel.
    pub fn tan_theta(&self, x: &Matrix) -> Result<f64, LinalgError> {
        match self.angles(x) {
            Ok(a) => Ok(a.tan_theta),
            Err(LinalgError::RankDeficient { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }
}

/// Principal angles `θ_k(U, X)` for orthonormal `u` and full-column-rank `x`.
pub fn principal_angles(u: &Matrix, x: &Matrix) -> Result<PrincipalAngles, LinalgError> {
    SubspaceReference::new(u.clone())?.angles(x)
}
