//! Frank-Wolfe, MP and OMP side by side on the same instances.

use std::fmt::Write as _;
use std::path::Path;

use fwsparse_core::certify::{check_trace, Invariant};
use fwsparse_core::instances::GENERATOR_NAME;
use fwsparse_core::solvers::{solve, Algorithm, SolveResult, Termination};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::io::{ensure_dir, fmt_csv_float, save_json, write_file};
use crate::runner::{build_dictionary, ConfigEcho, TrialSetup};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub trial: usize,
    pub seed: u64,
    pub solver: Algorithm,
    pub m: usize,
    pub beta: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub terminated_by: Termination,
    pub support_purity: Option<f64>,
    pub first_atom: Option<usize>,
    /// `[‖r_0‖, …, ‖r_T‖]`
    #[serde(skip)]
    pub residual_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub rng: &'static str,
    pub config: ConfigEcho,
    pub rows: Vec<ComparisonRow>,
    pub failures: Vec<String>,
    pub passed: bool,
}

fn row(setup: &TrialSetup, algorithm: Algorithm, res: &SolveResult) -> ComparisonRow {
    ComparisonRow {
        trial: setup.trial,
        seed: setup.seed,
        solver: algorithm,
        m: setup.instance.m(),
        beta: setup.beta,
        iterations: res.iterations(),
        final_residual: res.final_residual_norm(),
        terminated_by: res.terminated_by,
        support_purity: res.support_purity(),
        first_atom: res.trace.first().map(|r| r.selected_atom),
        residual_norms: res.residual_norms(),
    }
}

/// Runs all three solvers per trial. Failures: general trace invariants,
/// off-support picks and OMP taking other than `m` steps in the guaranteed
/// regime, and Frank-Wolfe and MP disagreeing on the first atom.
pub fn run_comparison(cfg: &ExperimentConfig) -> Result<ComparisonSummary, HarnessError> {
    cfg.validate()?;
    let dict = build_dictionary(&cfg.generator)?;
    let per_trial: Vec<(Vec<ComparisonRow>, Vec<String>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let setup = TrialSetup::new(&dict, cfg, trial)?;
            let mut rows = Vec::with_capacity(3);
            let mut failures = Vec::new();
            let mut fail =
                |invariant: Invariant, algorithm: Algorithm, k: Option<usize>, detail: String| {
                    let mut s = format!(
                        "invariant={} solver={} seed={} trial={}",
                        invariant.name(),
                        algorithm.short_name(),
                        setup.seed,
                        trial
                    );
                    if let Some(k) = k {
                        let _ = write!(s, " k={k}");
                    }
                    s.push(' ');
                    s.push_str(&detail);
                    failures.push(s);
                };
            for algorithm in Algorithm::ALL {
                let solver_cfg = cfg.solver.solver_config(algorithm, setup.beta);
                let res = solve(&dict, &setup.instance.y, &solver_cfg, Some(&setup.instance))?;
                let guaranteed = setup.guaranteed(algorithm);
                for v in check_trace(&res, algorithm, setup.beta) {
                    if v.invariant != Invariant::SupportPurity || guaranteed {
                        fail(
                            v.invariant,
                            algorithm,
                            v.k,
                            format!("value={:e} bound={:e}", v.value, v.bound),
                        );
                    }
                }
                let m = setup.instance.m();
                if guaranteed
                    && algorithm == Algorithm::OrthogonalMatchingPursuit
                    && res.iterations() != m
                {
                    fail(
                        Invariant::OmpIterationCount,
                        algorithm,
                        None,
                        format!("value={} bound={m}", res.iterations()),
                    );
                }
                rows.push(row(&setup, algorithm, &res));
            }
            let (fw, mp) = (&rows[0], &rows[1]);
            if let (Some(a), Some(b)) = (fw.first_atom, mp.first_atom) {
                if a != b {
                    fail(
                        Invariant::FirstSelection,
                        Algorithm::FrankWolfe,
                        Some(0),
                        format!("first_atom={a} mp_first_atom={b}"),
                    );
                }
            }
            Ok((rows, failures))
        })
        .collect::<Result<_, HarnessError>>()?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_trial {
        rows.extend(r);
        failures.extend(f);
    }
    Ok(ComparisonSummary {
        rng: GENERATOR_NAME,
        config: cfg.into(),
        passed: failures.is_empty(),
        rows,
        failures,
    })
}

pub const COMPARISON_HEADER: &str =
    "trial,seed,solver,m,iterations,final_residual,terminated_by,support_purity,first_atom";
pub const CURVES_HEADER: &str = "trial,solver,k,residual_norm";

pub fn comparison_csv(summary: &ComparisonSummary) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.seed,
            r.solver.short_name(),
            r.m,
            r.iterations,
            fmt_csv_float(r.final_residual),
            match r.terminated_by {
                Termination::Tolerance => "tolerance",
                Termination::MaxIters => "max_iters",
            },
            r.support_purity.map(fmt_csv_float).unwrap_or_default(),
            r.first_atom.map(|a| a.to_string()).unwrap_or_default()
        );
    }
    out
}

pub fn curves_csv(summary: &ComparisonSummary) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for r in &summary.rows {
        for (k, norm) in r.residual_norms.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.trial,
                r.solver.short_name(),
                k,
                fmt_csv_float(*norm)
            );
        }
    }
    out
}

/// Writes `comparison.csv`, `curves.csv` and `comparison.json` into `dir`.
pub fn write_comparison(summary: &ComparisonSummary, dir: &Path) -> Result<(), HarnessError> {
    ensure_dir(dir)?;
    write_file(
        &dir.join("comparison.csv"),
        comparison_csv(summary).as_bytes(),
    )?;
    write_file(&dir.join("curves.csv"), curves_csv(summary).as_bytes())?;
    save_json(summary, &dir.join("comparison.json"))
}
