//! Builds one experiment from a config, runs the selected algorithms and writes the artifacts.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::bounds::{compute_theory_bounds, BoundInputs, BoundsError, TheoryBounds};
use super::config::{Algorithm, ConfigError, DataSource, ExperimentConfig};
use super::trace::{write_trace_csv, TraceError};
use crate::algorithms::{
    run_centralized_pm, run_deepca, run_depca, AlgorithmError, DepcaOptions, GroundTruth, ProblemInstance, RunResult,
    RunSettings, StopRule,
};
use crate::data::{build_agent_matrices, generate_synthetic, parse_libsvm, DataError};
use crate::linalg::{random_orthonormal, Matrix};
use crate::topology::{laplacian_weight_matrix, random_graph, Graph, TopologyError, WeightMatrix};

/// Tracking residual allowed on any DeEPCA row.
pub const TRACKING_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Data {
        context: String,
        #[source]
        source: DataError,
    },
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("{context}: {source}")]
    Algorithm {
        context: String,
        #[source]
        source: AlgorithmError,
    },
    #[error("writing {path}: {source}")]
    Trace {
        path: PathBuf,
        #[source]
        source: TraceError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn algo_err(context: &str) -> impl FnOnce(AlgorithmError) -> HarnessError + '_ {
    move |source| HarnessError::Algorithm {
        context: context.to_string(),
        source,
    }
}

/// Everything shared by the algorithms of one experiment.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    pub problem: ProblemInstance,
    pub graph: Graph,
    pub weights: WeightMatrix,
    pub ground_truth: GroundTruth,
    pub w0: Matrix,
    pub tan_theta0: f64,
    pub bounds: Result<TheoryBounds, BoundsError>,
}

pub fn load_problem(source: &DataSource) -> Result<ProblemInstance, HarnessError> {
    match source {
        DataSource::Synthetic(spec) => generate_synthetic(spec).map_err(|source| HarnessError::Data {
            context: "synthetic problem".into(),
            source,
        }),
        DataSource::Libsvm { path, m, n, d } => {
            let data_err = |source| HarnessError::Data {
                context: path.display().to_string(),
                source,
            };
            let file = File::open(path).map_err(io_err(path))?;
            let samples = parse_libsvm(BufReader::new(file)).map_err(data_err)?;
            build_agent_matrices(&samples, *m, *n, *d).map_err(data_err)
        }
    }
}

pub fn prepare_experiment(config: &ExperimentConfig) -> Result<PreparedExperiment, HarnessError> {
    config.validate()?;
    let problem = load_problem(&config.data_source()?)?;
    let graph = random_graph(config.m, config.graph_p, config.graph_seed)?;
    let weights = laplacian_weight_matrix(&graph)?;
    let ground_truth = GroundTruth::new(&problem, config.k).map_err(algo_err("ground truth"))?;
    let w0 = random_orthonormal(config.d, config.k, config.init_seed);
    let tan_theta0 = ground_truth.tan_theta(&w0).map_err(algo_err("initial angle"))?;
    let inputs = BoundInputs::new(&ground_truth, config.m, weights.lambda2(), tan_theta0);
    let bounds = compute_theory_bounds(&inputs, config.k_steps, config.max_iters, config.tol);
    Ok(PreparedExperiment {
        problem,
        graph,
        weights,
        ground_truth,
        w0,
        tan_theta0,
        bounds,
    })
}

fn hash_matrices<'a>(ms: impl IntoIterator<Item = &'a Matrix>) -> String {
    let mut h = Sha256::new();
    for m in ms {
        h.update((m.rows() as u64).to_le_bytes());
        h.update((m.cols() as u64).to_le_bytes());
        for v in m.as_slice() {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Seeds {
    pub data_seed: u64,
    pub graph_seed: u64,
    pub init_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hashes {
    pub problem: String,
    pub weights: String,
    pub w0: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub csv: String,
    pub iterations_run: usize,
    pub converged: bool,
    pub final_mean_tan_theta: f64,
    /// `iterations_run × k_steps` tensor exchanges.
    pub communication_rounds: u64,
    pub wall_clock_seconds: f64,
    /// DeEPCA only: every row kept the tracking residual within tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tracking_identity_ok: Option<bool>,
    pub sign_coherent: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub seeds: Seeds,
    pub m: usize,
    pub d: usize,
    pub k: usize,
    pub lambda2: f64,
    pub spectral_bound: f64,
    pub lambda_k: f64,
    pub lambda_k_plus_1: f64,
    pub tan_theta0: f64,
    pub theory_bounds: Option<TheoryBounds>,
    pub theory_bounds_error: Option<String>,
    pub hashes: Hashes,
    pub graph_file: String,
    pub runs: Vec<RunSummary>,
    /// Set when any run stopped on an error.
    pub partial: bool,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub result: RunResult,
    pub csv_path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub prepared: PreparedExperiment,
    pub runs: Vec<AlgorithmRun>,
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
}

impl ExperimentOutcome {
    pub fn run(&self, algorithm: Algorithm) -> Option<&AlgorithmRun> {
        self.runs.iter().find(|r| r.algorithm == algorithm)
    }
}

pub fn run_algorithm(
    algorithm: Algorithm,
    config: &ExperimentConfig,
    prepared: &PreparedExperiment,
) -> Result<RunResult, AlgorithmError> {
    let settings = RunSettings {
        k_steps: config.k_steps,
        max_iters: config.max_iters,
        stop: StopRule::TanTheta(config.tol),
    };
    let gt = Some(&prepared.ground_truth);
    match algorithm {
        Algorithm::Deepca => run_deepca(&prepared.problem, &prepared.weights, &prepared.w0, &settings, gt),
        Algorithm::Depca => run_depca(
            &prepared.problem,
            &prepared.weights,
            &prepared.w0,
            &settings,
            gt,
            DepcaOptions {
                use_fast_mix: config.depca_use_fast_mix,
                use_sign_adjust: config.depca_use_sign_adjust,
            },
        ),
        Algorithm::Centralized => run_centralized_pm(prepared.problem.mean(), &prepared.w0, &settings, gt),
    }
}

/// Runs every selected algorithm on a shared problem, topology and `W⁰`, then writes
/// `<algorithm>.csv`, `graph.txt` and `manifest.json` under `output_path`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    let started = Instant::now();
    let prepared = prepare_experiment(config)?;
    let out_dir = &config.output_path;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let graph_file = "graph.txt";
    let graph_path = out_dir.join(graph_file);
    let f = File::create(&graph_path).map_err(io_err(&graph_path))?;
    prepared
        .graph
        .write_edge_list(BufWriter::new(f))
        .map_err(io_err(&graph_path))?;

    let mut runs = Vec::new();
    let mut summaries = Vec::new();
    for &algorithm in &config.algorithms {
        let t0 = Instant::now();
        let result = run_algorithm(algorithm, config, &prepared).map_err(algo_err(algorithm.name()))?;
        let elapsed = t0.elapsed().as_secs_f64();
        let csv = format!("{}.csv", algorithm.name());
        let csv_path = out_dir.join(&csv);
        write_trace_csv(&result.trace, &csv_path).map_err(|source| HarnessError::Trace {
            path: csv_path.clone(),
            source,
        })?;
        let k_steps = if algorithm == Algorithm::Centralized { 0 } else { config.k_steps };
        summaries.push(RunSummary {
            algorithm,
            csv,
            iterations_run: result.iterations_run,
            converged: result.converged,
            final_mean_tan_theta: result.last().mean_tan_theta,
            communication_rounds: (result.iterations_run as u64).saturating_mul(k_steps as u64),
            wall_clock_seconds: elapsed,
            tracking_identity_ok: (algorithm == Algorithm::Deepca)
                .then(|| result.trace.iter().all(|r| r.tracking_residual <= TRACKING_TOLERANCE)),
            sign_coherent: result.sign_alignment.iter().all(|&a| a >= 0.0),
            failure: result.failure.as_ref().map(ToString::to_string),
        });
        runs.push(AlgorithmRun {
            algorithm,
            result,
            csv_path,
        });
    }

    let gt = &prepared.ground_truth;
    let (theory_bounds, theory_bounds_error) = match &prepared.bounds {
        Ok(b) => (Some(b.clone()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let manifest = Manifest {
        config: config.clone(),
        seeds: Seeds {
            data_seed: config.data_seed,
            graph_seed: config.graph_seed,
            init_seed: config.init_seed,
        },
        m: config.m,
        d: config.d,
        k: config.k,
        lambda2: prepared.weights.lambda2(),
        spectral_bound: prepared.problem.spectral_bound(),
        lambda_k: gt.lambda_k(),
        lambda_k_plus_1: gt.lambda_k_plus_1(),
        tan_theta0: prepared.tan_theta0,
        theory_bounds,
        theory_bounds_error,
        hashes: Hashes {
            problem: hash_matrices(prepared.problem.local_matrices()),
            weights: hash_matrices([prepared.weights.matrix()]),
            w0: hash_matrices([&prepared.w0]),
        },
        graph_file: graph_file.into(),
        partial: summaries.iter().any(|s| s.failure.is_some()),
        runs: summaries,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let manifest_path = out_dir.join("manifest.json");
    let f = File::create(&manifest_path).map_err(io_err(&manifest_path))?;
    serde_json::to_writer_pretty(BufWriter::new(f), &manifest)?;
    Ok(ExperimentOutcome {
        prepared,
        runs,
        manifest,
        manifest_path,
    })
}
