use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fwsparse_cli::compare::{run_comparison, write_comparison};
use fwsparse_cli::config::ExperimentConfig;
use fwsparse_cli::io::{load_dictionary, load_instance_file, trace_to_csv, write_file};
use fwsparse_cli::runner::{run_experiment, write_experiment};
use fwsparse_core::analysis::analyze_dictionary;
use fwsparse_core::solvers::{solve, Algorithm, SolverConfig, DEFAULT_TOL_RESIDUAL};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "fwsparse",
    version,
    about = "Sparse recovery with Frank-Wolfe, MP and OMP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coherence, Babel profile and recoverable sparsity of a dictionary file.
    Analyze {
        dictionary: PathBuf,
        /// Largest Babel order to report.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Solve one instance and print a JSON summary.
    Solve {
        dictionary: PathBuf,
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "fw")]
        algo: Algo,
        /// l1 radius (Frank-Wolfe only).
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL_RESIDUAL)]
        tol: f64,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Write the per-iteration trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a seeded experiment; exits 1 if any invariant fails.
    Experiment {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run all three solvers on the experiment's instances.
    Compare {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Fw,
    Mp,
    Omp,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Fw => Algorithm::FrankWolfe,
            Algo::Mp => Algorithm::MatchingPursuit,
            Algo::Omp => Algorithm::OrthogonalMatchingPursuit,
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load_config(path: &Path, output_dir: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analyze { dictionary, m } => {
            let dict = load_dictionary(&dictionary)?;
            if let Some(m) = m {
                if m >= dict.n_atoms() {
                    bail!("--m must be below the number of atoms ({})", dict.n_atoms());
                }
            }
            print_json(&analyze_dictionary(&dict, m)?)?;
            Ok(true)
        }
        Command::Solve {
            dictionary,
            instance,
            algo,
            beta,
            tol,
            max_iters,
            trace,
        } => {
            let dict = load_dictionary(&dictionary)?;
            let inst = load_instance_file(&instance)?.to_instance(&dict, &instance)?;
            let algorithm = Algorithm::from(algo);
            let beta = match (algorithm, beta) {
                (_, Some(b)) => b,
                (Algorithm::FrankWolfe, None) => bail!("--beta is required for fw"),
                (_, None) => f64::INFINITY,
            };
            let mut cfg = SolverConfig::new(algorithm, beta).with_tol(tol);
            cfg.max_iters = max_iters;
            let res = solve(&dict, &inst.y, &cfg, Some(&inst))?;
            if let Some(path) = trace {
                write_file(&path, trace_to_csv(&res).as_bytes())?;
            }
            print_json(&json!({
                "algorithm": algorithm,
                "beta": beta.is_finite().then_some(beta),
                "iterations": res.iterations(),
                "final_residual": res.final_residual_norm(),
                "terminated_by": res.terminated_by,
                "support_purity": res.support_purity(),
                "x_l1": res.final_x.norm_l1(),
                "final_x": res.final_x,
            }))?;
            Ok(true)
        }
        Command::Experiment { config, output_dir } => {
            let cfg = load_config(&config, output_dir)?;
            let outcome = run_experiment(&cfg)?;
            write_experiment(&outcome, &cfg.output_dir)
                .with_context(|| format!("writing {}", cfg.output_dir.display()))?;
            let s = &outcome.summary;
            for t in &s.trials {
                for f in &t.failures {
                    eprintln!("FAIL {f}");
                }
            }
            println!(
                "{} trials ({} guaranteed), {} failures, reports in {}",
                s.trials.len(),
                s.guaranteed_trials,
                s.failure_count,
                cfg.output_dir.display()
            );
            Ok(s.passed)
        }
        Command::Compare { config, output_dir } => {
            let cfg = load_config(&config, output_dir)?;
            let summary = run_comparison(&cfg)?;
            write_comparison(&summary, &cfg.output_dir)
                .with_context(|| format!("writing {}", cfg.output_dir.display()))?;
            for f in &summary.failures {
                eprintln!("FAIL {f}");
            }
            println!(
                "{} rows, {} failures, reports in {}",
                summary.rows.len(),
                summary.failures.len(),
                cfg.output_dir.display()
            );
            Ok(summary.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
