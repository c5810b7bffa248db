//! Experiment configuration (JSON).

use std::fs;
use std::path::{Path, PathBuf};

use fwsparse_core::instances::CoeffRange;
use fwsparse_core::solvers::{Algorithm, SolverConfig, DEFAULT_TOL_RESIDUAL};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// ε used for the reported β threshold when the policy does not fix one.
pub const DEFAULT_LEMMA1_EPSILON: f64 = 0.5;
/// `lemma1_auto` sets β this far (relatively) above the threshold.
pub const LEMMA1_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    IdentityHadamard,
    RandomUnit,
    FromFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub d: usize,
    pub n: usize,
    pub m: usize,
    #[serde(default = "default_min_abs")]
    pub coeff_min_abs: f64,
    #[serde(default = "default_max_abs")]
    pub coeff_max_abs: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary_path: Option<PathBuf>,
}

fn default_min_abs() -> f64 {
    CoeffRange::default().min_abs
}

fn default_max_abs() -> f64 {
    CoeffRange::default().max_abs
}

impl GeneratorSpec {
    pub fn coeff_range(&self) -> CoeffRange {
        CoeffRange {
            min_abs: self.coeff_min_abs,
            max_abs: self.coeff_max_abs,
        }
    }

    /// Seed of the instance drawn for `trial`; the dictionary uses `seed` itself.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(1).wrapping_add(trial as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaPolicy {
    /// β = f·‖x*‖₁
    MultipleOfXstarL1(f64),
    Absolute(f64),
    /// β just above the threshold `(m‖y‖/(ε σ_min))(1 + σ_max/σ_min)` for the given ε.
    Lemma1Auto(f64),
}

impl BetaPolicy {
    pub fn lemma1_epsilon(self) -> f64 {
        match self {
            BetaPolicy::Lemma1Auto(eps) => eps,
            _ => DEFAULT_LEMMA1_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_tol")]
    pub tol_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}

fn default_algorithm() -> Algorithm {
    Algorithm::FrankWolfe
}

fn default_tol() -> f64 {
    DEFAULT_TOL_RESIDUAL
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            algorithm: default_algorithm(),
            tol_residual: default_tol(),
            max_iters: None,
        }
    }
}

impl SolverSettings {
    pub fn solver_config(&self, algorithm: Algorithm, beta: f64) -> SolverConfig {
        let mut cfg = SolverConfig::new(algorithm, beta).with_tol(self.tol_residual);
        cfg.max_iters = self.max_iters;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    pub beta_policy: BetaPolicy,
    pub trials: usize,
    #[serde(default)]
    pub solver: SolverSettings,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| HarnessError::json(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let g = &self.generator;
        if g.d == 0 || g.n == 0 {
            return bad(format!(
                "d and n must be positive (d = {}, n = {})",
                g.d, g.n
            ));
        }
        if g.m > g.n {
            return bad(format!("m = {} exceeds n = {}", g.m, g.n));
        }
        match g.kind {
            GeneratorKind::IdentityHadamard if g.n != 2 * g.d => {
                return bad(format!(
                    "identity_hadamard needs n = 2d, got d = {}, n = {}",
                    g.d, g.n
                ))
            }
            GeneratorKind::FromFile if g.dictionary_path.is_none() => {
                return bad("from_file needs dictionary_path".into())
            }
            _ => {}
        }
        if !(g.coeff_min_abs > 0.0
            && g.coeff_max_abs >= g.coeff_min_abs
            && g.coeff_max_abs.is_finite())
        {
            return bad(format!(
                "coefficient range [{}, {}] must satisfy 0 < min <= max",
                g.coeff_min_abs, g.coeff_max_abs
            ));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                bad(format!("{name} must be positive and finite, got {v}"))
            }
        };
        match self.beta_policy {
            BetaPolicy::MultipleOfXstarL1(f) => positive("multiple_of_xstar_l1", f)?,
            BetaPolicy::Absolute(b) => positive("absolute", b)?,
            BetaPolicy::Lemma1Auto(eps) if !(eps > 0.0 && eps < 1.0) => {
                return bad(format!("lemma1_auto epsilon must lie in (0, 1), got {eps}"))
            }
            BetaPolicy::Lemma1Auto(_) if g.m == 0 => return bad("lemma1_auto needs m >= 1".into()),
            BetaPolicy::Lemma1Auto(_) => {}
        }
        if !(self.solver.tol_residual > 0.0) {
            return bad(format!(
                "tol_residual must be positive, got {}",
                self.solver.tol_residual
            ));
        }
        Ok(())
    }
}
