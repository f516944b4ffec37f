use rayon::prelude::*;

use super::deepca::check_network;
use super::driver::{check_init, drive};
use super::{init_agent_states, sign_adjust, AgentState, AlgorithmError, GroundTruth, ProblemInstance, RunResult, RunSettings};
use crate::linalg::{qr_decompose, Matrix};
use crate::mixing::{fast_mix, plain_mix, AgentTensor};
use crate::topology::WeightMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepcaOptions {
    /// FastMix when set, plain gossip otherwise.
    pub use_fast_mix: bool,
    pub use_sign_adjust: bool,
}

impl Default for DepcaOptions {
    fn default() -> Self {
        Self {
            use_fast_mix: true,
            use_sign_adjust: true,
        }
    }
}

/// Local power step, multi-consensus over the products, then QR.
///
/// The returned `s` is the mixed product before QR and `g_prev` the unmixed local product.
pub fn depca_step(
    states: &[AgentState],
    problem: &ProblemInstance,
    weights: &WeightMatrix,
    k_steps: usize,
    w0: &Matrix,
    options: DepcaOptions,
) -> Result<Vec<AgentState>, AlgorithmError> {
    let products = states
        .par_iter()
        .enumerate()
        .map(|(agent, st)| {
            problem
                .local(agent)
                .matmul(&st.w)
                .map_err(|source| AlgorithmError::Agent { agent, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let tensor = AgentTensor::new(products.clone())?;
    let (mixed, _) = if options.use_fast_mix {
        fast_mix(&tensor, weights, k_steps)?
    } else {
        plain_mix(&tensor, weights, k_steps)?
    };
    mixed
        .into_slices()
        .into_par_iter()
        .zip(products)
        .enumerate()
        .map(|(agent, (s, g_prev))| {
            let q = qr_decompose(&s).map_err(|source| AlgorithmError::Agent { agent, source })?.q;
            let w = if options.use_sign_adjust { sign_adjust(&q, w0) } else { q };
            Ok(AgentState { w, s, g_prev })
        })
        .collect()
}

/// Runs the multi-consensus baseline from the shared start `w0`.
pub fn run_depca(
    problem: &ProblemInstance,
    weights: &WeightMatrix,
    w0: &Matrix,
    settings: &RunSettings,
    ground_truth: Option<&GroundTruth>,
    options: DepcaOptions,
) -> Result<RunResult, AlgorithmError> {
    check_network(problem, weights)?;
    check_init(w0, problem.d(), ground_truth)?;
    let init = init_agent_states(w0, problem.m());
    drive(init, w0, settings, ground_truth, |states| {
        depca_step(states, problem, weights, settings.k_steps, w0, options)
    })
}
