use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::ExperimentConfig;
use super::experiment::{load_problem, prepare_experiment, run_experiment, HarnessError};
use super::trace::format_real;
use super::config::DataSource;
use crate::linalg::symmetric_eigenvalues;
use crate::topology::validate_weight_matrix;

#[derive(Debug, Parser)]
#[command(name = "deepca", version, about = "Decentralized top-k PCA simulator")]
struct Cli {
    /// Override every seed in the config (data = SEED, graph = SEED+1, init = SEED+2)
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write traces plus a manifest
    Run { config: PathBuf },
    /// Check a config and its topology, print the theory bounds
    Validate { config: PathBuf },
    /// Print the leading eigenvalues of the mean matrix
    Eigen(EigenArgs),
}

#[derive(Debug, Args)]
struct EigenArgs {
    /// Take the problem from a config file
    #[arg(long, conflicts_with = "dataset")]
    config: Option<PathBuf>,
    /// libsvm file
    #[arg(long, requires_all = ["m", "n", "d"])]
    dataset: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// How many eigenvalues to print
    #[arg(long, default_value_t = 10)]
    top: usize,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Run(e.to_string())
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(path).map_err(|e| Failure::Run(e.to_string()))?;
    if let Some(seed) = seed {
        cfg.override_seeds(seed);
        cfg.validate().map_err(|e| Failure::Run(e.to_string()))?;
    }
    Ok(cfg)
}

fn show(x: f64) -> String {
    format_real(x)
}

fn cmd_run(path: &Path, seed: Option<u64>, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = load_config(path, seed)?;
    let outcome = run_experiment(&cfg)?;
    let m = &outcome.manifest;
    let _ = writeln!(out, "lambda2 {}", show(m.lambda2));
    for r in &m.runs {
        let _ = writeln!(
            out,
            "{:<12} iterations {:>5}  converged {:<5}  tan_theta {}  -> {}",
            r.algorithm.name(),
            r.iterations_run,
            r.converged,
            show(r.final_mean_tan_theta),
            r.csv
        );
        if let Some(f) = &r.failure {
            let _ = writeln!(out, "{:<12} stopped early: {f}", r.algorithm.name());
        }
    }
    let _ = writeln!(out, "manifest {}", outcome.manifest_path.display());
    Ok(())
}

fn cmd_validate(path: &Path, seed: Option<u64>, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = load_config(path, seed)?;
    let prepared = prepare_experiment(&cfg)?;
    let violations = validate_weight_matrix(&prepared.weights);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Failure::Run(format!("weight matrix invalid: {}", list.join("; "))));
    }
    let gt = &prepared.ground_truth;
    let _ = writeln!(out, "config ok: m = {}, d = {}, k = {}", cfg.m, cfg.d, cfg.k);
    let _ = writeln!(out, "edges {}", prepared.graph.edges().len());
    let _ = writeln!(out, "lambda2 {}", show(prepared.weights.lambda2()));
    let _ = writeln!(out, "lambda_k {}", show(gt.lambda_k()));
    let _ = writeln!(out, "lambda_k+1 {}", show(gt.lambda_k_plus_1()));
    let _ = writeln!(out, "L {}", show(gt.spectral_bound()));
    let _ = writeln!(out, "tan_theta0 {}", show(prepared.tan_theta0));
    match &prepared.bounds {
        Ok(b) => {
            let _ = writeln!(out, "gamma {}", show(b.gamma));
            let _ = writeln!(out, "rho {}", show(b.rho));
            let _ = writeln!(out, "rho_cap {}", show(b.rho_cap));
            let _ = writeln!(out, "rho_cap_first {}", show(b.rho_cap_first));
            let _ = writeln!(
                out,
                "K_sufficient {} (configured {}, {})",
                b.k_sufficient,
                cfg.k_steps,
                if b.k_steps_sufficient { "sufficient" } else { "insufficient" }
            );
            let _ = writeln!(
                out,
                "T_sufficient {} (configured {}, {})",
                b.t_sufficient,
                cfg.max_iters,
                if b.max_iters_sufficient { "sufficient" } else { "insufficient" }
            );
            let _ = writeln!(out, "C_total {}", b.c_total);
        }
        Err(e) => {
            let _ = writeln!(out, "theory bounds unavailable: {e}");
        }
    }
    Ok(())
}

fn cmd_eigen(args: &EigenArgs, seed: Option<u64>, out: &mut dyn Write) -> Result<(), Failure> {
    let source = match (&args.config, &args.dataset) {
        (Some(path), None) => load_config(path, seed)?.data_source().map_err(|e| Failure::Run(e.to_string()))?,
        (None, Some(path)) => DataSource::Libsvm {
            path: path.clone(),
            m: args.m.unwrap_or(0),
            n: args.n.unwrap_or(0),
            d: args.d.unwrap_or(0),
        },
        _ => return Err(Failure::Usage("eigen needs --config FILE or --dataset FILE --m M --n N --d D".into())),
    };
    let problem = load_problem(&source)?;
    let ev = symmetric_eigenvalues(problem.mean()).map_err(|e| Failure::Run(e.to_string()))?;
    for (i, v) in ev.iter().take(args.top).enumerate() {
        let _ = writeln!(out, "{} {}", i + 1, show(*v));
    }
    let _ = writeln!(out, "L {}", show(problem.spectral_bound()));
    Ok(())
}

/// Entry point behind the binary. Returns the process exit status: 0 on success,
/// 1 on a failed command, 2 on a usage error.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config, cli.seed, out),
        Command::Validate { config } => cmd_validate(config, cli.seed, out),
        Command::Eigen(args) => cmd_eigen(args, cli.seed, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            let _ = writeln!(err, "usage: deepca [--seed SEED] <run|validate|eigen> ...");
            2
        }
        Err(Failure::Run(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}
