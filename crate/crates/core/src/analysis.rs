//! Incoherence measures of a dictionary and the recovery / rate constants built on them.
//!
//! * coherence `μ = max_{j≠k} |⟨φ_j, φ_k⟩|`
//! * Babel function `μ1(m) = max_{|Λ|=m} max_{i∉Λ} Σ_{j∈Λ} |⟨φ_i, φ_j⟩|`
//! * recovery condition `m < (1/μ + 1) / 2`
//! * contraction factor `q = 1 − ε²(1 − μ1(m−1)) / (4β²)` with `ε = (β − ‖x*‖₁)/2`
//! * the β threshold `(m‖y‖₂ / (ε σ_min)) (1 + σ_max/σ_min)` above which the
//!   contraction holds from the first iteration.
//!
//! A weaker contraction factor, with the decrement divided by the ambient
//! dimension `d`, is reported next to the d-free one ([`AnalysisReport::theoretical_ratio_q`] and
//! [`AnalysisReport::theoretical_ratio_q_over_d`]); certification uses the
//! d-free factor, which is the stronger claim.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instances::SparseInstance;
use crate::linalg::{dot, extremal_singular_values, submatrix, Dictionary, SupportSet};

/// Absolute off-diagonal Gram entries of atom `i`, sorted descending.
fn sorted_abs_correlations(dict: &Dictionary, i: usize) -> Vec<f64> {
    let atom = dict.atom(i);
    let mut row: Vec<f64> = (0..dict.n_atoms())
        .filter(|&j| j != i)
        .map(|j| dot(atom, dict.atom(j)).abs())
        .collect();
    row.sort_by(|a, b| b.total_cmp(a));
    row
}

pub fn coherence(dict: &Dictionary) -> Result<f64> {
    let n = dict.n_atoms();
    if n < 2 {
        return Err(Error::CoherenceUndefined { n });
    }
    let mut mu: f64 = 0.0;
    for j in 0..n {
        for k in (j + 1)..n {
            mu = mu.max(dot(dict.atom(j), dict.atom(k)).abs());
        }
    }
    Ok(mu)
}

/// `μ1(m)`, with `μ1(0) = 0`.
///
/// For a fixed excluded atom `i` the inner maximum over `Λ` is attained by the
/// `m` atoms most correlated with `φ_i`, so a per-row sort is exact.
pub fn babel(dict: &Dictionary, m: usize) -> Result<f64> {
    Ok(babel_profile(dict, m)?[m])
}

/// `[μ1(0), μ1(1), …, μ1(m_max)]`, sharing one sort per atom.
pub fn babel_profile(dict: &Dictionary, m_max: usize) -> Result<Vec<f64>> {
    let n = dict.n_atoms();
    if m_max > n - 1 {
        return Err(Error::BabelOrderTooLarge {
            m: m_max,
            max: n - 1,
        });
    }
    let mut profile = alloc::vec![0.0; m_max + 1];
    if m_max == 0 {
        return Ok(profile);
    }
    for i in 0..n {
        let row = sorted_abs_correlations(dict, i);
        let mut partial = 0.0;
        for (m, value) in row.iter().take(m_max).enumerate() {
            partial += value;
            if partial > profile[m + 1] {
                profile[m + 1] = partial;
            }
        }
    }
    Ok(profile)
}

/// `m < (1/μ + 1)/2`. `μ = 0` always passes.
pub fn recovery_condition(mu: f64, m: usize) -> bool {
    if mu <= 0.0 {
        return true;
    }
    (m as f64) < 0.5 * (1.0 / mu + 1.0)
}

/// Largest sparsity satisfying [`recovery_condition`], capped at the ambient dimension.
pub fn max_recoverable_m(mu: f64, d: usize) -> usize {
    let mut m = 0;
    while m < d && recovery_condition(mu, m + 1) {
        m += 1;
    }
    m
}

/// ε and the guaranteed per-step contraction `q` of the squared residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBound {
    pub epsilon: f64,
    pub q: f64,
}

pub fn theorem2_ratio(beta: f64, x_star_l1: f64, babel_m_minus_1: f64) -> Result<RateBound> {
    if !(x_star_l1 >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "x_star_l1",
            value: x_star_l1,
        });
    }
    if !(beta > x_star_l1) {
        return Err(Error::BetaNotAboveSparseNorm { beta, x_star_l1 });
    }
    if !(babel_m_minus_1 >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "babel_m_minus_1",
            value: babel_m_minus_1,
        });
    }
    if babel_m_minus_1 >= 1.0 {
        return Err(Error::NotQuasiIncoherent {
            babel: babel_m_minus_1,
        });
    }
    let epsilon = 0.5 * (beta - x_star_l1);
    let q = 1.0 - epsilon * epsilon * (1.0 - babel_m_minus_1) / (4.0 * beta * beta);
    Ok(RateBound { epsilon, q })
}

/// Same as [`theorem2_ratio`] but with the decrement divided by `d`.
pub fn theorem2_ratio_over_d(
    beta: f64,
    x_star_l1: f64,
    babel_m_minus_1: f64,
    d: usize,
) -> Result<f64> {
    let bound = theorem2_ratio(beta, x_star_l1, babel_m_minus_1)?;
    Ok(1.0 - (1.0 - bound.q) / d as f64)
}

pub fn lemma1_beta_threshold(
    m: usize,
    y_l2: f64,
    epsilon: f64,
    sigma_min: f64,
    sigma_max: f64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: 0.0,
        });
    }
    if !(y_l2 >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "y_l2",
            value: y_l2,
        });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
        });
    }
    if !(sigma_min > 0.0) {
        return Err(Error::DegenerateSpectrum { sigma_min });
    }
    if !(sigma_max >= sigma_min) {
        return Err(Error::InvalidParameter {
            name: "sigma_max",
            value: sigma_max,
        });
    }
    Ok(m as f64 * y_l2 / (epsilon * sigma_min) * (1.0 + sigma_max / sigma_min))
}

/// Absolute slack on the spectral bound; at `|S| = 1` both sides are 1.
pub const SPECTRUM_BOUND_TOL: f64 = 1e-12;

/// `σ_min(Φ_S) ≥ 1 − μ1(|S| − 1)`. Any failure to evaluate counts as `false`.
pub fn support_spectrum_bound_check(dict: &Dictionary, support: &SupportSet) -> bool {
    let m = support.len();
    if m == 0 {
        return false;
    }
    let Ok(sub) = submatrix(dict, support) else {
        return false;
    };
    let Ok((sigma_min, _)) = extremal_singular_values(&sub) else {
        return false;
    };
    let Ok(b) = babel(dict, m - 1) else {
        return false;
    };
    sigma_min + SPECTRUM_BOUND_TOL >= 1.0 - b
}

/// Dictionary-level and (optionally) instance-level analysis.
///
/// `babel[m]` is `μ1(m)`, so `babel[0] = 0` and `babel[1] = mu`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AnalysisReport {
    pub mu: f64,
    pub babel: Vec<f64>,
    pub max_recoverable_m: usize,
    pub support_sigma_min: Option<f64>,
    pub support_sigma_max: Option<f64>,
    pub theoretical_ratio_q: Option<f64>,
    pub theoretical_ratio_q_over_d: Option<f64>,
    pub lemma1_beta_threshold: Option<f64>,
}

/// Coherence, Babel profile up to `m_max` (default: the recoverable sparsity,
/// clamped to `[1, n−1]`) and the recoverable sparsity.
pub fn analyze_dictionary(dict: &Dictionary, m_max: Option<usize>) -> Result<AnalysisReport> {
    let mu = coherence(dict)?;
    let max_m = max_recoverable_m(mu, dict.dim());
    let m_max = m_max.unwrap_or_else(|| max_m.clamp(1, dict.n_atoms() - 1));
    Ok(AnalysisReport {
        mu,
        babel: babel_profile(dict, m_max)?,
        max_recoverable_m: max_m,
        support_sigma_min: None,
        support_sigma_max: None,
        theoretical_ratio_q: None,
        theoretical_ratio_q_over_d: None,
        lemma1_beta_threshold: None,
    })
}

/// Extends a dictionary report with the support spectrum of `instance`, the
/// contraction factor for `beta` and the β threshold for `lemma1_epsilon`.
///
/// Quantities whose preconditions fail (β ≤ ‖x*‖₁, μ1(m−1) ≥ 1, singular
/// support) are left as `None`.
pub fn analyze_instance(
    dict: &Dictionary,
    instance: &SparseInstance,
    beta: f64,
    lemma1_epsilon: f64,
) -> Result<AnalysisReport> {
    let m = instance.m();
    let mut report = analyze_dictionary(dict, Some(m.clamp(1, dict.n_atoms() - 1)))?;
    if m == 0 {
        return Ok(report);
    }
    let sub = submatrix(dict, &instance.support)?;
    if let Ok((lo, hi)) = extremal_singular_values(&sub) {
        report.support_sigma_min = Some(lo);
        report.support_sigma_max = Some(hi);
        report.lemma1_beta_threshold =
            lemma1_beta_threshold(m, instance.y.norm_l2(), lemma1_epsilon, lo, hi).ok();
    }
    let b = report.babel[m - 1];
    report.theoretical_ratio_q = theorem2_ratio(beta, instance.x_star_l1, b)
        .ok()
        .map(|r| r.q);
    report.theoretical_ratio_q_over_d =
        theorem2_ratio_over_d(beta, instance.x_star_l1, b, dict.dim()).ok();
    Ok(report)
}
