//! Frank-Wolfe over the ℓ1 ball, Matching Pursuit and Orthogonal Matching Pursuit.
//!
//! All three solvers start from `x₀ = 0`, keep the residual `r_k = y − Φx_k`
//! up to date incrementally and stop as soon as `‖r_k‖₂ ≤ tol_residual` or the
//! iteration budget is spent. Atom selection maximizes `|⟨φ_i, r_k⟩|` and breaks
//! ties towards the lowest index.

mod frank_wolfe;
mod pursuit;

use alloc::vec::Vec;

pub use frank_wolfe::{clamped_step, fw_line_search, fw_select, fw_solve, Vertex};
pub use pursuit::{mp_solve, omp_solve};

use crate::error::{Error, Result};
use crate::instances::SparseInstance;
use crate::linalg::{mat_vec, norm_l2, Dictionary, SupportSet, Vector};

pub const DEFAULT_TOL_RESIDUAL: f64 = 1e-9;

/// The incremental residual is compared with `y − Φx` every this many iterations.
pub const RESIDUAL_CHECK_INTERVAL: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum Algorithm {
    #[cfg_attr(feature = "serde", serde(alias = "fw"))]
    FrankWolfe,
    #[cfg_attr(feature = "serde", serde(rename = "mp"))]
    MatchingPursuit,
    #[cfg_attr(feature = "serde", serde(rename = "omp"))]
    OrthogonalMatchingPursuit,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::FrankWolfe,
        Algorithm::MatchingPursuit,
        Algorithm::OrthogonalMatchingPursuit,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Algorithm::FrankWolfe => "fw",
            Algorithm::MatchingPursuit => "mp",
            Algorithm::OrthogonalMatchingPursuit => "omp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// ℓ1 radius; only read by Frank-Wolfe.
    pub beta: f64,
    pub tol_residual: f64,
    /// `None` means `10·n`.
    pub max_iters: Option<usize>,
    /// Keep every iterate `x_k` in the result (O(k·n) memory).
    pub record_iterates: bool,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, beta: f64) -> Self {
        SolverConfig {
            algorithm,
            beta,
            tol_residual: DEFAULT_TOL_RESIDUAL,
            max_iters: None,
            record_iterates: false,
        }
    }

    pub fn frank_wolfe(beta: f64) -> Self {
        Self::new(Algorithm::FrankWolfe, beta)
    }

    pub fn matching_pursuit() -> Self {
        Self::new(Algorithm::MatchingPursuit, f64::INFINITY)
    }

    pub fn orthogonal_matching_pursuit() -> Self {
        Self::new(Algorithm::OrthogonalMatchingPursuit, f64::INFINITY)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_residual = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = Some(max_iters);
        self
    }

    pub fn recording_iterates(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    pub fn max_iters_for(&self, n_atoms: usize) -> usize {
        self.max_iters.unwrap_or(10 * n_atoms)
    }

    fn validate(&self, expected: Algorithm) -> Result<()> {
        if self.algorithm != expected {
            return Err(Error::InvalidParameter {
                name: "algorithm",
                value: self.algorithm as u8 as f64,
            });
        }
        if expected == Algorithm::FrankWolfe && !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: self.beta,
            });
        }
        if !(self.tol_residual > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol_residual",
                value: self.tol_residual,
            });
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                value: 0.0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize),
    serde(rename_all = "snake_case")
)]
pub enum Termination {
    Tolerance,
    MaxIters,
}

/// Frank-Wolfe step diagnostics: `⟨r_k, Φ(s_k − x_k)⟩` and `‖Φ(s_k − x_k)‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FwStep {
    pub descent: f64,
    pub direction_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IterationRecord {
    pub k: usize,
    pub selected_atom: usize,
    /// Step size for Frank-Wolfe; coefficient update for MP; refit coefficient
    /// of the new atom for OMP.
    pub gamma: f64,
    /// `‖r_{k+1}‖₂` after the update.
    pub residual_norm: f64,
    /// `‖x_{k+1}‖₁`.
    pub x_l1: f64,
    pub in_support: Option<bool>,
    pub fw_step: Option<FwStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub final_x: Vector,
    pub trace: Vec<IterationRecord>,
    pub terminated_by: Termination,
    /// `‖r_0‖₂ = ‖y‖₂`.
    pub initial_residual_norm: f64,
    /// `x_0, x_1, …` when requested.
    pub iterates: Option<Vec<Vector>>,
    /// Largest `‖r_inc − (y − Φx)‖₂ / ‖y‖₂` seen at the periodic checks.
    pub max_residual_drift: f64,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn final_residual_norm(&self) -> f64 {
        self.trace
            .last()
            .map_or(self.initial_residual_norm, |r| r.residual_norm)
    }

    /// `[‖r_0‖, ‖r_1‖, …, ‖r_T‖]`.
    pub fn residual_norms(&self) -> Vec<f64> {
        core::iter::once(self.initial_residual_norm)
            .chain(self.trace.iter().map(|r| r.residual_norm))
            .collect()
    }

    /// Fraction of iterations whose atom lies in the true support; `None`
    /// without ground truth or without iterations.
    pub fn support_purity(&self) -> Option<f64> {
        if self.trace.is_empty() {
            return None;
        }
        let mut hits = 0usize;
        for record in &self.trace {
            if record.in_support? {
                hits += 1;
            }
        }
        Some(hits as f64 / self.trace.len() as f64)
    }
}

/// Dispatches on `cfg.algorithm`.
pub fn solve(
    dict: &Dictionary,
    y: &[f64],
    cfg: &SolverConfig,
    ground_truth: Option<&SparseInstance>,
) -> Result<SolveResult> {
    match cfg.algorithm {
        Algorithm::FrankWolfe => fw_solve(dict, y, cfg, ground_truth),
        Algorithm::MatchingPursuit => mp_solve(dict, y, cfg, ground_truth),
        Algorithm::OrthogonalMatchingPursuit => omp_solve(dict, y, cfg, ground_truth),
    }
}

/// Lowest index attaining `max |c_i|` among allowed entries, or `None` when
/// every allowed entry is zero.
pub(crate) fn argmax_abs(corr: &[f64], skip: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in corr.iter().enumerate() {
        if skip(i) {
            continue;
        }
        let a = c.abs();
        if a > best.map_or(0.0, |(_, b)| b) {
            best = Some((i, a));
        }
    }
    best.map(|(i, _)| i)
}

pub(crate) fn check_signal(dict: &Dictionary, y: &[f64]) -> Result<()> {
    if y.len() != dict.dim() {
        return Err(Error::DimensionMismatch {
            what: "signal",
            expected: dict.dim(),
            actual: y.len(),
        });
    }
    Ok(())
}

pub(crate) fn ground_truth_support<'a>(
    dict: &Dictionary,
    ground_truth: Option<&'a SparseInstance>,
) -> Result<Option<&'a SupportSet>> {
    match ground_truth {
        Some(gt) if gt.x_star.len() != dict.n_atoms() => Err(Error::DimensionMismatch {
            what: "ground-truth coefficients",
            expected: dict.n_atoms(),
            actual: gt.x_star.len(),
        }),
        Some(gt) => Ok(Some(&gt.support)),
        None => Ok(None),
    }
}

/// `‖r − (y − Φx)‖₂ / ‖y‖₂`.
pub(crate) fn residual_drift(dict: &Dictionary, y: &[f64], x: &[f64], r: &[f64]) -> Result<f64> {
    let phi_x = mat_vec(dict, x)?;
    let diff: Vec<f64> = y
        .iter()
        .zip(phi_x.iter())
        .zip(r)
        .map(|((yi, pi), ri)| ri - (yi - pi))
        .collect();
    let scale = norm_l2(y);
    Ok(if scale > 0.0 {
        norm_l2(&diff) / scale
    } else {
        0.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax_abs(&[2.0, -2.0, 1.0], |_| false), Some(0));
        assert_eq!(argmax_abs(&[1.0, -3.0, 3.0], |_| false), Some(1));
        assert_eq!(argmax_abs(&[0.0, 0.0], |_| false), None);
        assert_eq!(argmax_abs(&[5.0, 1.0], |i| i == 0), Some(1));
    }

    #[test]
    fn config_validation() {
        let cfg = SolverConfig::frank_wolfe(0.0);
        assert!(cfg.validate(Algorithm::FrankWolfe).is_err());
        let cfg = SolverConfig::frank_wolfe(1.0).with_tol(0.0);
        assert!(cfg.validate(Algorithm::FrankWolfe).is_err());
        let cfg = SolverConfig::matching_pursuit();
        assert!(cfg.validate(Algorithm::MatchingPursuit).is_ok());
        assert!(cfg.validate(Algorithm::FrankWolfe).is_err());
        assert_eq!(cfg.max_iters_for(12), 120);
        assert!(SolverConfig::matching_pursuit()
            .with_max_iters(0)
            .validate(Algorithm::MatchingPursuit)
            .is_err());
    }
}
