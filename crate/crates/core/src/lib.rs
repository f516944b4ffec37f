//! Decentralized top-k PCA over a gossip network.
//!
//! Agents each hold a local symmetric matrix `A_j` and cooperate, exchanging
//! data only with graph neighbours, to find the top-k eigenspace of
//! `A = (1/m)·Σ A_j`. The crate provides:
//!
//! * [`algorithms::run_deepca`]: power iteration with subspace tracking and
//!   Chebyshev-accelerated consensus, which converges linearly with a fixed
//!   number of gossip rounds per iteration;
//! * [`algorithms::run_depca`]: the multi-consensus baseline without tracking;
//! * [`algorithms::run_centralized_pm`]: the centralized power method;
//! * a deterministic experiment harness with CSV traces and a JSON manifest.

pub mod algorithms;
pub mod data;
pub mod harness;
pub mod linalg;
pub mod mixing;
pub mod topology;
