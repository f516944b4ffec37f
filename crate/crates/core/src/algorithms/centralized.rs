use super::driver::{check_init, drive};
use super::{sign_adjust, AgentState, AlgorithmError, GroundTruth, RunResult, RunSettings};
use crate::linalg::{qr_decompose, Matrix};

/// Power method `W ← SignAdjust(QR(A·W), W⁰)` on a single node.
///
/// The trace uses the same fields as the decentralized runs with `m = 1`:
/// `s` holds `A·W^{t−1}` so consensus errors are zero and the tracking residual vanishes.
/// `settings.k_steps` is ignored.
pub fn run_centralized_pm(
    a: &Matrix,
    w0: &Matrix,
    settings: &RunSettings,
    ground_truth: Option<&GroundTruth>,
) -> Result<RunResult, AlgorithmError> {
    if !a.is_square() {
        return Err(AlgorithmError::LocalShape {
            index: 0,
            expected: (a.rows(), a.rows()),
            found: a.shape(),
        });
    }
    check_init(w0, a.rows(), ground_truth)?;
    drive(vec![AgentState::initial(w0)], w0, settings, ground_truth, |states| {
        let product = a.matmul(&states[0].w)?;
        let q = qr_decompose(&product).map_err(|source| AlgorithmError::Agent { agent: 0, source })?.q;
        Ok(vec![AgentState {
            w: sign_adjust(&q, w0),
            s: product.clone(),
            g_prev: product,
        }])
    })
}
