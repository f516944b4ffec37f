//! Experiment configuration, orchestration, theory diagnostics and trace output.

mod bounds;
mod cli;
mod config;
mod experiment;
mod trace;

pub use bounds::{
    compute_theory_bounds, consensus_rate, k_sufficient, rho_cap_at, rho_cap_terms, t_sufficient, BoundInputs,
    BoundsError, TheoryBounds,
};
pub use cli::cli_main;
pub use config::{Algorithm, ConfigError, DataSource, ExperimentConfig, SourceKind};
pub use experiment::{
    load_problem, prepare_experiment, run_algorithm, run_experiment, AlgorithmRun, ExperimentOutcome, HarnessError,
    Manifest, PreparedExperiment, RunSummary, TRACKING_TOLERANCE,
};
pub use trace::{
    format_real, parse_real, read_trace, read_trace_csv, write_trace, write_trace_csv, TraceError, TraceRecord,
    TRACE_HEADER,
};
