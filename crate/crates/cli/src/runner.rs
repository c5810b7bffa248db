//! Seeded experiments: build a dictionary, draw one instance per trial, solve,
//! certify and write reports.

use std::fmt::Write as _;
use std::path::Path;

use fwsparse_core::analysis::{
    analyze_dictionary, analyze_instance, recovery_condition, AnalysisReport,
};
use fwsparse_core::certify::{
    check_span, check_trace, detect_ball_entry, detect_k, rate_violations, Invariant,
};
use fwsparse_core::instances::{
    build_identity_hadamard, build_random_unit, sample_instance, SparseInstance, GENERATOR_NAME,
};
use fwsparse_core::linalg::Dictionary;
use fwsparse_core::solvers::{solve, Algorithm, SolveResult, Termination};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    BetaPolicy, ExperimentConfig, GeneratorKind, GeneratorSpec, SolverSettings, LEMMA1_MARGIN,
};
use crate::error::HarnessError;
use crate::io::{
    ensure_dir, fmt_csv_float, load_dictionary, save_dictionary, save_json, trace_to_csv,
    write_file, InstanceFile,
};

pub fn build_dictionary(spec: &GeneratorSpec) -> Result<Dictionary, HarnessError> {
    let dict = match spec.kind {
        GeneratorKind::IdentityHadamard => build_identity_hadamard(spec.d)?,
        GeneratorKind::RandomUnit => build_random_unit(spec.d, spec.n, spec.seed)?,
        GeneratorKind::FromFile => {
            let path = spec
                .dictionary_path
                .as_deref()
                .ok_or_else(|| HarnessError::Config("from_file needs dictionary_path".into()))?;
            load_dictionary(path)?
        }
    };
    if dict.dim() != spec.d || dict.n_atoms() != spec.n {
        return Err(HarnessError::Config(format!(
            "dictionary is {}x{}, configuration says {}x{}",
            dict.dim(),
            dict.n_atoms(),
            spec.d,
            spec.n
        )));
    }
    Ok(dict)
}

/// One drawn instance with its radius and analysis.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub trial: usize,
    pub seed: u64,
    pub instance: SparseInstance,
    pub beta: f64,
    pub analysis: AnalysisReport,
    /// Recovery condition holds for `m ≥ 1`.
    pub recoverable: bool,
}

impl TrialSetup {
    pub fn new(
        dict: &Dictionary,
        cfg: &ExperimentConfig,
        trial: usize,
    ) -> Result<Self, HarnessError> {
        let seed = cfg.generator.trial_seed(trial);
        let instance = sample_instance(dict, cfg.generator.m, cfg.generator.coeff_range(), seed)?;
        let eps = cfg.beta_policy.lemma1_epsilon();
        let beta = match cfg.beta_policy {
            BetaPolicy::MultipleOfXstarL1(f) => f * instance.x_star_l1,
            BetaPolicy::Absolute(b) => b,
            BetaPolicy::Lemma1Auto(_) => {
                let threshold = analyze_instance(dict, &instance, instance.x_star_l1, eps)?
                    .lemma1_beta_threshold
                    .ok_or_else(|| {
                        HarnessError::Config(format!(
                            "trial {trial}: no beta threshold (support Gram matrix is singular)"
                        ))
                    })?;
                threshold * (1.0 + LEMMA1_MARGIN)
            }
        };
        let analysis = analyze_instance(dict, &instance, beta, eps)?;
        let m = instance.m();
        let recoverable = m >= 1 && recovery_condition(analysis.mu, m);
        Ok(TrialSetup {
            trial,
            seed,
            instance,
            beta,
            analysis,
            recoverable,
        })
    }

    /// Regime in which support purity (and for Frank-Wolfe the rate) is guaranteed.
    pub fn guaranteed(&self, algorithm: Algorithm) -> bool {
        self.recoverable
            && (algorithm != Algorithm::FrankWolfe || self.beta > self.instance.x_star_l1)
    }

    pub fn epsilon(&self) -> Option<f64> {
        (self.beta > self.instance.x_star_l1).then_some(0.5 * (self.beta - self.instance.x_star_l1))
    }
}

fn failure(
    setup: &TrialSetup,
    invariant: Invariant,
    k: Option<usize>,
    value: f64,
    bound: f64,
) -> String {
    let mut s = format!(
        "invariant={} seed={} trial={}",
        invariant.name(),
        setup.seed,
        setup.trial
    );
    if let Some(k) = k {
        let _ = write!(s, " k={k}");
    }
    let _ = write!(s, " value={value:e} bound={bound:e}");
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub m: usize,
    pub support: Vec<usize>,
    pub x_star_l1: f64,
    pub y_l2: f64,
    pub beta: f64,
    pub epsilon: Option<f64>,
    pub recovery_condition: bool,
    pub guaranteed: bool,
    pub analysis: AnalysisReport,
    pub iterations: usize,
    pub final_residual: f64,
    pub terminated_by: Termination,
    pub support_purity: Option<f64>,
    pub empirical_k: Option<usize>,
    pub ball_entry_k: Option<usize>,
    pub rate_violations_after_k: usize,
    pub max_residual_drift: f64,
    pub failures: Vec<String>,
}

/// Solves one trial and certifies the trace.
pub fn run_trial(
    dict: &Dictionary,
    setup: &TrialSetup,
    settings: &SolverSettings,
    algorithm: Algorithm,
    policy: BetaPolicy,
) -> Result<(TrialReport, SolveResult), HarnessError> {
    let inst = &setup.instance;
    let guaranteed = setup.guaranteed(algorithm);
    let epsilon = setup.epsilon();
    let has_rate =
        algorithm == Algorithm::FrankWolfe && setup.analysis.theoretical_ratio_q.is_some();

    let mut solver_cfg = settings.solver_config(algorithm, setup.beta);
    solver_cfg.record_iterates = guaranteed || has_rate;
    let mut result = solve(dict, &inst.y, &solver_cfg, Some(inst))?;

    let mut failures = Vec::new();
    for v in check_trace(&result, algorithm, setup.beta) {
        if v.invariant != Invariant::SupportPurity || guaranteed {
            failures.push(failure(setup, v.invariant, v.k, v.value, v.bound));
        }
    }
    if guaranteed {
        let iterates = result.iterates.as_deref().unwrap_or_default();
        for v in check_span(dict, &inst.support, &inst.y, iterates)? {
            failures.push(failure(setup, v.invariant, v.k, v.value, v.bound));
        }
    }

    let norms = result.residual_norms();
    let mut empirical_k = None;
    let mut ball_entry_k = None;
    let mut rate_violation_count = 0;
    if let (true, Some(q), Some(eps)) = (has_rate, setup.analysis.theoretical_ratio_q, epsilon) {
        empirical_k = detect_k(&norms, q);
        if let Some(iterates) = result.iterates.as_deref() {
            ball_entry_k = detect_ball_entry(iterates, &inst.x_star, eps);
        }
        let from = ball_entry_k.or(empirical_k).unwrap_or(0);
        let violations = rate_violations(&norms, q, from);
        rate_violation_count = violations.len();
        if guaranteed {
            if empirical_k.is_none() {
                failures.push(failure(setup, Invariant::EntryIteration, None, f64::NAN, q));
            }
            if ball_entry_k.is_some() {
                for k in violations {
                    let ratio = (norms[k + 1] / norms[k]).powi(2);
                    failures.push(failure(setup, Invariant::RateAfterEntry, Some(k), ratio, q));
                }
            }
            if matches!(policy, BetaPolicy::Lemma1Auto(_)) && empirical_k != Some(0) {
                let k = empirical_k.map_or(f64::NAN, |k| k as f64);
                failures.push(failure(setup, Invariant::EntryIteration, None, k, 0.0));
            }
        }
    }
    if guaranteed && algorithm == Algorithm::OrthogonalMatchingPursuit {
        let m = inst.m();
        if result.iterations() != m {
            failures.push(failure(
                setup,
                Invariant::OmpIterationCount,
                None,
                result.iterations() as f64,
                m as f64,
            ));
        }
        if result.final_residual_norm() > settings.tol_residual {
            failures.push(failure(
                setup,
                Invariant::OmpIterationCount,
                Some(result.iterations()),
                result.final_residual_norm(),
                settings.tol_residual,
            ));
        }
    }
    result.iterates = None;

    let report = TrialReport {
        trial: setup.trial,
        seed: setup.seed,
        algorithm,
        m: inst.m(),
        support: inst.support.indices().to_vec(),
        x_star_l1: inst.x_star_l1,
        y_l2: inst.y.norm_l2(),
        beta: setup.beta,
        epsilon,
        recovery_condition: setup.recoverable,
        guaranteed,
        analysis: setup.analysis.clone(),
        iterations: result.iterations(),
        final_residual: result.final_residual_norm(),
        terminated_by: result.terminated_by,
        support_purity: result.support_purity(),
        empirical_k,
        ball_entry_k,
        rate_violations_after_k: rate_violation_count,
        max_residual_drift: result.max_residual_drift,
        failures,
    };
    Ok((report, result))
}

/// The configuration minus `output_dir`, echoed into the summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub generator: GeneratorSpec,
    pub beta_policy: BetaPolicy,
    pub trials: usize,
    pub solver: SolverSettings,
}

impl From<&ExperimentConfig> for ConfigEcho {
    fn from(cfg: &ExperimentConfig) -> Self {
        ConfigEcho {
            generator: cfg.generator.clone(),
            beta_policy: cfg.beta_policy,
            trials: cfg.trials,
            solver: cfg.solver.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub rng: &'static str,
    pub config: ConfigEcho,
    pub dictionary: AnalysisReport,
    pub guaranteed_trials: usize,
    pub failure_count: usize,
    pub passed: bool,
    pub trials: Vec<TrialReport>,
}

pub struct ExperimentOutcome {
    pub summary: ExperimentSummary,
    pub dictionary: Dictionary,
    pub instances: Vec<InstanceFile>,
    pub results: Vec<SolveResult>,
}

/// Runs every trial (in parallel, collected in trial order) without touching disk.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    cfg.validate()?;
    let dict = build_dictionary(&cfg.generator)?;
    let dictionary = analyze_dictionary(&dict, None)?;
    let algorithm = cfg.solver.algorithm;

    let per_trial: Vec<(TrialReport, SolveResult, InstanceFile)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let setup = TrialSetup::new(&dict, cfg, trial)?;
            let (report, result) =
                run_trial(&dict, &setup, &cfg.solver, algorithm, cfg.beta_policy)?;
            let file =
                InstanceFile::from_instance(&dict, &setup.instance, GENERATOR_NAME, setup.seed);
            Ok((report, result, file))
        })
        .collect::<Result<_, HarnessError>>()?;

    let mut trials = Vec::with_capacity(per_trial.len());
    let mut results = Vec::with_capacity(per_trial.len());
    let mut instances = Vec::with_capacity(per_trial.len());
    for (report, result, file) in per_trial {
        trials.push(report);
        results.push(result);
        instances.push(file);
    }
    let failure_count = trials.iter().map(|t| t.failures.len()).sum();
    let summary = ExperimentSummary {
        rng: GENERATOR_NAME,
        config: cfg.into(),
        dictionary,
        guaranteed_trials: trials.iter().filter(|t| t.guaranteed).count(),
        failure_count,
        passed: failure_count == 0,
        trials,
    };
    Ok(ExperimentOutcome {
        summary,
        dictionary: dict,
        instances,
        results,
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub const SUMMARY_HEADER: &str = "trial,seed,algorithm,m,beta,recovery_condition,guaranteed,iterations,\
final_residual,terminated_by,support_purity,empirical_k,ball_entry_k,rate_violations_after_k,failures";

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Tolerance => "tolerance",
        Termination::MaxIters => "max_iters",
    }
}

pub fn summary_csv(summary: &ExperimentSummary) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for t in &summary.trials {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.trial,
            t.seed,
            t.algorithm.short_name(),
            t.m,
            fmt_csv_float(t.beta),
            t.recovery_condition,
            t.guaranteed,
            t.iterations,
            fmt_csv_float(t.final_residual),
            termination_name(t.terminated_by),
            opt(t.support_purity.map(fmt_csv_float)),
            opt(t.empirical_k),
            opt(t.ball_entry_k),
            t.rate_violations_after_k,
            t.failures.len()
        );
    }
    out
}

/// Writes `dictionary.txt`, `instance_NNNN.json`, `trace_NNNN.csv`,
/// `summary.json` and `summary.csv` into `dir`.
pub fn write_experiment(outcome: &ExperimentOutcome, dir: &Path) -> Result<(), HarnessError> {
    ensure_dir(dir)?;
    save_dictionary(&outcome.dictionary, &dir.join("dictionary.txt"))?;
    for (i, (file, result)) in outcome.instances.iter().zip(&outcome.results).enumerate() {
        save_json(file, &dir.join(format!("instance_{i:04}.json")))?;
        write_file(
            &dir.join(format!("trace_{i:04}.csv")),
            trace_to_csv(result).as_bytes(),
        )?;
    }
    save_json(&outcome.summary, &dir.join("summary.json"))?;
    write_file(
        &dir.join("summary.csv"),
        summary_csv(&outcome.summary).as_bytes(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn config(policy: BetaPolicy, m: usize) -> ExperimentConfig {
        ExperimentConfig {
            generator: GeneratorSpec {
                kind: GeneratorKind::IdentityHadamard,
                d: 16,
                n: 32,
                m,
                coeff_min_abs: 0.1,
                coeff_max_abs: 1.0,
                seed: 11,
                dictionary_path: None,
            },
            beta_policy: policy,
            trials: 6,
            solver: SolverSettings::default(),
            output_dir: PathBuf::from("unused"),
        }
    }

    #[test]
    fn guaranteed_regime_passes() {
        let out = run_experiment(&config(BetaPolicy::MultipleOfXstarL1(2.0), 2)).unwrap();
        let s = &out.summary;
        assert!(
            s.passed,
            "{:?}",
            s.trials
                .iter()
                .flat_map(|t| &t.failures)
                .collect::<Vec<_>>()
        );
        assert_eq!(s.guaranteed_trials, 6);
        assert!(s
            .trials
            .iter()
            .all(|t| t.support_purity == Some(1.0) && t.empirical_k.is_some()));
        assert_eq!(out.results.len(), 6);
    }

    #[test]
    fn lemma1_auto_starts_contracting_immediately() {
        let out = run_experiment(&config(BetaPolicy::Lemma1Auto(0.5), 2)).unwrap();
        for t in &out.summary.trials {
            let threshold = t.analysis.lemma1_beta_threshold.unwrap();
            assert!(t.beta > threshold);
            assert_eq!(t.empirical_k, Some(0));
        }
        assert!(out.summary.passed);
    }

    #[test]
    fn beta_at_or_below_sparse_norm_is_not_guaranteed() {
        let out = run_experiment(&config(BetaPolicy::MultipleOfXstarL1(0.5), 2)).unwrap();
        assert_eq!(out.summary.guaranteed_trials, 0);
        assert!(out
            .summary
            .trials
            .iter()
            .all(|t| t.epsilon.is_none() && t.empirical_k.is_none()));
    }

    #[test]
    fn trials_are_seeded_independently_of_thread_count() {
        let cfg = config(BetaPolicy::MultipleOfXstarL1(2.0), 3);
        let a = run_experiment(&cfg).unwrap().summary;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| run_experiment(&cfg).unwrap().summary);
        assert_eq!(a, b);
    }

    #[test]
    fn summary_csv_has_one_row_per_trial() {
        let out = run_experiment(&config(BetaPolicy::Absolute(3.0), 1)).unwrap();
        let csv = summary_csv(&out.summary);
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("trial,seed,algorithm"));
    }
}
