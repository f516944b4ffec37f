use rayon::prelude::*;

use super::{min_sign_alignment, AgentState, AlgorithmError, GroundTruth, TraceRecord};
use crate::linalg::{smallest_singular_value, Matrix};
use crate::mixing::{agent_mean, consensus_error, AgentTensor};

/// Orthonormality slack accepted for `W⁰`.
const INIT_ORTHONORMALITY: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Mean over agents of `tan θ_k(U, W_j)` at most `tol`. Needs a ground truth.
    TanTheta(f64),
    /// No oracle: `consensus_error(W)/√m ≤ tol` and `max_j ‖W_jᵗ − W_j^{t−1}‖_F ≤ tol`.
    Stationary(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    /// Gossip rounds per iteration (ignored by the centralized method).
    pub k_steps: usize,
    pub max_iters: usize,
    pub stop: StopRule,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_states: Vec<AgentState>,
    /// One record per executed iteration plus the `t = 0` snapshot.
    pub trace: Vec<TraceRecord>,
    /// Smallest `⟨W_jᵗ(:,i), W⁰(:,i)⟩` over agents and columns, aligned with `trace`.
    pub sign_alignment: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    /// Error that cut the run short, if any. The trace holds everything before it.
    pub failure: Option<AlgorithmError>,
}

impl RunResult {
    pub fn last(&self) -> &TraceRecord {
        self.trace.last().expect("trace always holds t = 0")
    }

    /// `(1/m)·Σ_j W_j` of the final states.
    pub fn mean_w(&self) -> Matrix {
        let tensor = AgentTensor::new(self.final_states.iter().map(|s| s.w.clone()).collect())
            .expect("states share a shape");
        agent_mean(&tensor)
    }
}

pub(crate) fn check_init(w0: &Matrix, d: usize, gt: Option<&GroundTruth>) -> Result<(), AlgorithmError> {
    let k = gt.map_or(w0.cols(), GroundTruth::k);
    if w0.shape() != (d, k) || k == 0 || k > d {
        return Err(AlgorithmError::InitShape {
            expected: (d, k),
            found: w0.shape(),
        });
    }
    let err = w0.orthonormality_error();
    if err > INIT_ORTHONORMALITY {
        return Err(AlgorithmError::InitNotOrthonormal(err));
    }
    if let Some(gt) = gt {
        if gt.basis().rows() != d {
            return Err(AlgorithmError::InitShape {
                expected: (gt.basis().rows(), k),
                found: w0.shape(),
            });
        }
        if !gt.tan_theta(w0)?.is_finite() {
            return Err(AlgorithmError::InfiniteInitialAngle);
        }
    }
    Ok(())
}

fn tensor(states: &[AgentState], pick: impl Fn(&AgentState) -> &Matrix) -> Result<AgentTensor, AlgorithmError> {
    Ok(AgentTensor::new(states.iter().map(|s| pick(s).clone()).collect())?)
}

fn record(t: usize, states: &[AgentState], gt: Option<&GroundTruth>) -> Result<TraceRecord, AlgorithmError> {
    let w = tensor(states, |s| &s.w)?;
    let s = tensor(states, |s| &s.s)?;
    let g = tensor(states, |s| &s.g_prev)?;
    let s_bar = agent_mean(&s);
    let g_bar = agent_mean(&g);
    let tracking_residual = s_bar.sub(&g_bar)?.frobenius_norm() / g_bar.frobenius_norm().max(1.0);
    let (mean_tan_theta, tan_theta_sbar) = match gt {
        Some(gt) => {
            let tans = states
                .par_iter()
                .enumerate()
                .map(|(agent, st)| {
                    gt.reference()
                        .tan_theta(&st.w)
                        .map_err(|source| AlgorithmError::Agent { agent, source })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let mean = if tans.iter().any(|v| v.is_infinite()) {
                f64::INFINITY
            } else {
                tans.iter().sum::<f64>() / tans.len() as f64
            };
            (mean, gt.tan_theta(&s_bar)?)
        }
        None => (f64::NAN, f64::NAN),
    };
    Ok(TraceRecord {
        t,
        mean_tan_theta,
        tan_theta_sbar,
        s_consensus_err: consensus_error(&s),
        w_consensus_err: consensus_error(&w),
        tracking_residual,
        sigma_min_sbar: smallest_singular_value(&s_bar),
    })
}

fn alignment(states: &[AgentState], w0: &Matrix) -> f64 {
    states
        .iter()
        .map(|s| min_sign_alignment(&s.w, w0))
        .fold(f64::INFINITY, f64::min)
}

fn max_change(prev: &[AgentState], next: &[AgentState]) -> f64 {
    prev.iter()
        .zip(next)
        .map(|(a, b)| b.w.sub(&a.w).map(|d| d.frobenius_norm()).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// Runs `step` from `init` until the stop rule fires or `max_iters` is reached.
pub(crate) fn drive<F>(
    init: Vec<AgentState>,
    w0: &Matrix,
    settings: &RunSettings,
    gt: Option<&GroundTruth>,
    mut step: F,
) -> Result<RunResult, AlgorithmError>
where
    F: FnMut(&[AgentState]) -> Result<Vec<AgentState>, AlgorithmError>,
{
    let m = init.len() as f64;
    if matches!(settings.stop, StopRule::TanTheta(_)) && gt.is_none() {
        return Err(AlgorithmError::MissingGroundTruth);
    }
    let first = record(0, &init, gt)?;
    let mut converged = matches!(settings.stop, StopRule::TanTheta(tol) if first.mean_tan_theta <= tol);
    let mut result = RunResult {
        sign_alignment: vec![alignment(&init, w0)],
        trace: vec![first],
        final_states: init,
        iterations_run: 0,
        converged: false,
        failure: None,
    };
    for t in 1..=settings.max_iters {
        if converged {
            break;
        }
        let next = match step(&result.final_states) {
            Ok(next) => next,
            Err(e) => {
                result.failure = Some(e);
                break;
            }
        };
        if next.iter().any(|s| !(s.w.is_finite() && s.s.is_finite() && s.g_prev.is_finite())) {
            result.failure = Some(AlgorithmError::NonFinite { iteration: t });
            break;
        }
        let rec = match record(t, &next, gt) {
            Ok(rec) => rec,
            Err(e) => {
                result.failure = Some(e);
                break;
            }
        };
        converged = match settings.stop {
            StopRule::TanTheta(tol) => rec.mean_tan_theta <= tol,
            StopRule::Stationary(tol) => {
                rec.w_consensus_err / m.sqrt() <= tol && max_change(&result.final_states, &next) <= tol
            }
        };
        result.sign_alignment.push(alignment(&next, w0));
        result.trace.push(rec);
        result.final_states = next;
        result.iterations_run = t;
    }
    result.converged = converged;
    Ok(result)
}
