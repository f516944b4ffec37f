use rayon::prelude::*;

use super::driver::{check_init, drive};
use super::{init_agent_states, sign_adjust, AgentState, AlgorithmError, GroundTruth, ProblemInstance, RunResult, RunSettings};
use crate::linalg::{qr_decompose, Matrix};
use crate::mixing::{fast_mix, AgentTensor};
use crate::topology::WeightMatrix;

/// One synchronous iteration: tracking update, FastMix over `S`, then per-agent QR and sign adjustment.
pub fn deepca_step(
    states: &[AgentState],
    problem: &ProblemInstance,
    weights: &WeightMatrix,
    k_steps: usize,
    w0: &Matrix,
) -> Result<Vec<AgentState>, AlgorithmError> {
    let tracked = states
        .par_iter()
        .enumerate()
        .map(|(agent, st)| {
            let wrap = |source| AlgorithmError::Agent { agent, source };
            let g = problem.local(agent).matmul(&st.w).map_err(wrap)?;
            let s = st.s.add(&g).and_then(|s| s.sub(&st.g_prev)).map_err(wrap)?;
            Ok((s, g))
        })
        .collect::<Result<Vec<_>, AlgorithmError>>()?;
    let (s, g): (Vec<Matrix>, Vec<Matrix>) = tracked.into_iter().unzip();
    let (mixed, _) = fast_mix(&AgentTensor::new(s)?, weights, k_steps)?;
    mixed
        .into_slices()
        .into_par_iter()
        .zip(g)
        .enumerate()
        .map(|(agent, (s, g_prev))| {
            let q = qr_decompose(&s).map_err(|source| AlgorithmError::Agent { agent, source })?.q;
            Ok(AgentState {
                w: sign_adjust(&q, w0),
                s,
                g_prev,
            })
        })
        .collect()
}

pub(crate) fn check_network(problem: &ProblemInstance, weights: &WeightMatrix) -> Result<(), AlgorithmError> {
    if problem.m() != weights.m() {
        return Err(AlgorithmError::AgentCountMismatch {
            problem: problem.m(),
            network: weights.m(),
        });
    }
    Ok(())
}

/// Runs DeEPCA from the shared start `w0`.
///
/// Precondition failures return `Err`; failures during iteration end the run
/// early with the partial trace and the error in [`RunResult::failure`].
pub fn run_deepca(
    problem: &ProblemInstance,
    weights: &WeightMatrix,
    w0: &Matrix,
    settings: &RunSettings,
    ground_truth: Option<&GroundTruth>,
) -> Result<RunResult, AlgorithmError> {
    check_network(problem, weights)?;
    check_init(w0, problem.d(), ground_truth)?;
    let init = init_agent_states(w0, problem.m());
    drive(init, w0, settings, ground_truth, |states| {
        deepca_step(states, problem, weights, settings.k_steps, w0)
    })
}
