//! Closed-form step and iteration counts from the convergence analysis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::GroundTruth;

/// Gap and eigenvalue floors below which the bounds are not evaluated.
const GAP_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("no eigengap: λ_k = {lambda_k}, λ_(k+1) = {lambda_k1}")]
    GapViolation { lambda_k: f64, lambda_k1: f64 },
    #[error("λ_(k+1) = {0} is zero; the bounds divide by it")]
    ZeroEigenvalue(f64),
    #[error("initial tan θ must be finite")]
    InfiniteAngle,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

/// Instance constants the formulas are evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub k: usize,
    pub m: usize,
    pub lambda_k: f64,
    pub lambda_k1: f64,
    /// `L ≥ max_j ‖A_j‖₂`.
    pub spectral_bound: f64,
    /// `λ₂` of the gossip matrix.
    pub lambda2: f64,
    /// `tan θ_k(U, W⁰)`.
    pub tan_theta0: f64,
}

impl BoundInputs {
    pub fn new(gt: &GroundTruth, m: usize, lambda2: f64, tan_theta0: f64) -> Self {
        Self {
            k: gt.k(),
            m,
            lambda_k: gt.lambda_k(),
            lambda_k1: gt.lambda_k_plus_1(),
            spectral_bound: gt.spectral_bound(),
            lambda2,
            tan_theta0,
        }
    }

    fn check(&self) -> Result<(), BoundsError> {
        if self.lambda_k <= self.lambda_k1 + GAP_FLOOR {
            return Err(BoundsError::GapViolation {
                lambda_k: self.lambda_k,
                lambda_k1: self.lambda_k1,
            });
        }
        if self.lambda_k1 <= GAP_FLOOR {
            return Err(BoundsError::ZeroEigenvalue(self.lambda_k1));
        }
        if !self.tan_theta0.is_finite() {
            return Err(BoundsError::InfiniteAngle);
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        1.0 - (self.lambda_k - self.lambda_k1) / (2.0 * self.lambda_k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryBounds {
    pub gamma: f64,
    /// `(1 − √(1−λ₂))^K` for the configured `K`.
    pub rho: f64,
    /// Admissible `ρ` at `t = max_iters`.
    pub rho_cap: f64,
    /// Admissible `ρ` at `t = 1`.
    pub rho_cap_first: f64,
    pub k_sufficient: u64,
    pub t_sufficient: u64,
    pub c_total: u64,
    pub k_steps_sufficient: bool,
    pub max_iters_sufficient: bool,
    /// `rho ≤ rho_cap`.
    pub rho_condition_met: bool,
}

pub fn consensus_rate(lambda2: f64, k_steps: usize) -> f64 {
    (1.0 - (1.0 - lambda2).max(0.0).sqrt()).powi(k_steps as i32)
}

/// The three terms bounding `ρ` at iteration `t`; the cap is their minimum.
pub fn rho_cap_terms(p: &BoundInputs, t: usize) -> [f64; 3] {
    let (lk, lk1, l) = (p.lambda_k, p.lambda_k1, p.spectral_bound);
    let k = p.k as f64;
    let ell = p.tan_theta0;
    let g = p.gamma();
    let t = t as i32;
    let sk = k.sqrt() + 1.0;
    let spread = lk1 + 2.0 * l + (lk + 2.0 * l) * g.powi(t + 1) * ell;
    let grow = 1.0 + g.powi(2 * t) * ell * ell;
    let second = (lk - lk1) * (lk * lk1 + 2.0 * l * lk1) * g * g / (96.0 * k * l * sk * grow * spread * spread);
    let third = (lk * lk1 + 2.0 * l * lk)
        / (16.0 * l * k * sk * (p.m as f64).sqrt() * g.powi(t - 1) * ell * grow.sqrt() * spread);
    [g / 2.0, second, third]
}

pub fn rho_cap_at(p: &BoundInputs, t: usize) -> f64 {
    rho_cap_terms(p, t).into_iter().fold(f64::INFINITY, f64::min)
}

fn ceil_count(x: f64) -> u64 {
    if x.is_nan() || x <= 0.0 {
        0
    } else if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x.ceil() as u64
    }
}

/// Sufficient gossip rounds per iteration.
pub fn k_sufficient(p: &BoundInputs) -> u64 {
    let (lk, lk1, l) = (p.lambda_k, p.lambda_k1, p.spectral_bound);
    let k = p.k as f64;
    let g = p.gamma();
    let arg = 96.0 * k * l * (k.sqrt() + 1.0) * (lk + 2.0 * l) * (1.0 + p.tan_theta0).powi(4)
        / (lk1 * (lk - lk1) * g * g);
    ceil_count(arg.ln() / (1.0 - p.lambda2).max(0.0).sqrt())
}

/// Sufficient iterations for `tan θ ≤ tol` on every agent.
pub fn t_sufficient(p: &BoundInputs, tol: f64) -> u64 {
    let (lk, lk1, l) = (p.lambda_k, p.lambda_k1, p.spectral_bound);
    let ell = p.tan_theta0;
    let a = (4.0 * ell / tol).ln();
    let b = (4.0 * (lk + 2.0 * l) * ell / ((p.m as f64).sqrt() * (lk - lk1) * tol)).ln();
    ceil_count(2.0 * lk / (lk - lk1) * a.max(b))
}

pub fn compute_theory_bounds(
    p: &BoundInputs,
    k_steps: usize,
    max_iters: usize,
    tol: f64,
) -> Result<TheoryBounds, BoundsError> {
    p.check()?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(BoundsError::InvalidTolerance(tol));
    }
    let rho = consensus_rate(p.lambda2, k_steps);
    let rho_cap = rho_cap_at(p, max_iters.max(1));
    let k_suff = k_sufficient(p);
    let t_suff = t_sufficient(p, tol);
    Ok(TheoryBounds {
        gamma: p.gamma(),
        rho,
        rho_cap,
        rho_cap_first: rho_cap_at(p, 1),
        k_sufficient: k_suff,
        t_sufficient: t_suff,
        c_total: k_suff.saturating_mul(t_suff),
        k_steps_sufficient: k_steps as u64 >= k_suff,
        max_iters_sufficient: max_iters as u64 >= t_suff,
        rho_condition_met: rho <= rho_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> BoundInputs {
        BoundInputs {
            k: 3,
            m: 10,
            lambda_k: 2.0,
            lambda_k1: 1.0,
            spectral_bound: 4.5,
            lambda2: 0.5437,
            tan_theta0: 3.0,
        }
    }

    #[test]
    fn gamma_from_gap() {
        assert_eq!(inputs().gamma(), 0.75);
    }

    #[test]
    fn complete_graph_rate_is_zero() {
        for k in 1..5 {
            assert_eq!(consensus_rate(0.0, k), 0.0);
        }
        assert_eq!(consensus_rate(0.3, 0), 1.0);
    }

    #[test]
    fn errors() {
        let mut p = inputs();
        p.lambda_k1 = 2.0;
        assert!(matches!(compute_theory_bounds(&p, 1, 1, 1e-6), Err(BoundsError::GapViolation { .. })));
        p.lambda_k1 = 0.0;
        assert!(matches!(compute_theory_bounds(&p, 1, 1, 1e-6), Err(BoundsError::ZeroEigenvalue(_))));
        let mut p = inputs();
        p.tan_theta0 = f64::INFINITY;
        assert!(matches!(compute_theory_bounds(&p, 1, 1, 1e-6), Err(BoundsError::InfiniteAngle)));
        assert!(matches!(
            compute_theory_bounds(&inputs(), 1, 1, 0.0),
            Err(BoundsError::InvalidTolerance(_))
        ));
    }

    #[test]
    fn flags_follow_counts() {
        let p = inputs();
        let b = compute_theory_bounds(&p, 1, 10, 1e-6).unwrap();
        assert!(!b.k_steps_sufficient);
        assert!(!b.max_iters_sufficient);
        let b = compute_theory_bounds(&p, b.k_sufficient as usize, b.t_sufficient as usize, 1e-6).unwrap();
        assert!(b.k_steps_sufficient && b.max_iters_sufficient);
        assert!(b.rho < b.rho_cap);
        assert_eq!(b.c_total, b.k_sufficient * b.t_sufficient);
    }
}
