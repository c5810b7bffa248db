//! Post-hoc certification of solver traces.
//!
//! The solvers never see `x*`; everything that needs ground truth (entry
//! iteration of the geometric rate, ball entry, span membership) is computed
//! here from the recorded trace.

use alloc::vec::Vec;
use core::fmt;

use crate::error::Result;
use crate::linalg::{
    mat_vec, norm_l2, project_onto_columns, submatrix, Dictionary, SupportSet, Vector,
};
use crate::solvers::{Algorithm, SolveResult};

/// Absolute slack on `‖r_{k+1}‖² ≤ q‖r_k‖²`.
pub const RATE_SLACK: f64 = 1e-14;
/// Relative slack on `‖x_k‖₁ ≤ β`.
pub const FEASIBILITY_REL_TOL: f64 = 1e-10;
/// Relative slack on `‖Φ(s_k − x_k)‖₂ ≤ 2β`.
pub const DIRECTION_REL_TOL: f64 = 1e-12;
/// Relative slack on `‖r_{k+1}‖ ≤ ‖r_k‖`.
pub const MONOTONE_REL_TOL: f64 = 1e-12;
/// Agreement of the closed-form decrement with the observed one.
pub const RECURRENCE_REL_TOL: f64 = 1e-10;
/// Absolute floor of the recurrence check, relative to `‖r_k‖²`: the observed
/// `‖r_k‖² − ‖r_{k+1}‖²` carries O(d·ε) rounding of `‖r_k‖²`.
pub const RECURRENCE_ROUNDING_FLOOR: f64 = 1e-13;
/// Agreement of the incremental residual with `y − Φx`, relative to `‖y‖`.
pub const DRIFT_REL_TOL: f64 = 1e-10;
/// Distance from `r_k` to the support span, relative to `‖r_k‖`.
pub const SPAN_REL_TOL: f64 = 1e-9;
/// Absolute floor for the span check, relative to `‖y‖`. Recomputing `y − Φx_k`
/// cannot resolve anything below a few ulps of `‖y‖`.
pub const SPAN_ABS_TOL: f64 = 1e-12;

/// Whether one step contracts the squared residual by `q`.
pub fn rate_holds(prev_norm: f64, next_norm: f64, q: f64) -> bool {
    next_norm * next_norm <= q * prev_norm * prev_norm + RATE_SLACK
}

/// Smallest `K` such that every step `k ≥ K` of `norms = [‖r_0‖, …, ‖r_T‖]`
/// satisfies the contraction, or `None` if the final step violates it.
pub fn detect_k(norms: &[f64], q: f64) -> Option<usize> {
    let steps = norms.len().saturating_sub(1);
    let mut k = steps;
    while k > 0 && rate_holds(norms[k - 1], norms[k], q) {
        k -= 1;
    }
    if k == steps && steps > 0 && !rate_holds(norms[steps - 1], norms[steps], q) {
        return None;
    }
    Some(k)
}

/// Steps `k ≥ from` whose contraction fails.
pub fn rate_violations(norms: &[f64], q: f64, from: usize) -> Vec<usize> {
    (from..norms.len().saturating_sub(1))
        .filter(|&k| !rate_holds(norms[k], norms[k + 1], q))
        .collect()
}

/// First `k` with `‖x_j − x*‖₂ ≤ ε` for every recorded `j ≥ k`, or `None`
/// when the last iterate is outside the ball (or nothing was recorded).
pub fn detect_ball_entry(iterates: &[Vector], x_star: &[f64], epsilon: f64) -> Option<usize> {
    let inside = |x: &Vector| {
        let dist_sq: f64 = x.iter().zip(x_star).map(|(a, b)| (a - b) * (a - b)).sum();
        libm::sqrt(dist_sq) <= epsilon
    };
    let mut k = iterates.len();
    while k > 0 && inside(&iterates[k - 1]) {
        k -= 1;
    }
    (k < iterates.len()).then_some(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize),
    serde(rename_all = "snake_case")
)]
pub enum Invariant {
    SupportPurity,
    Feasibility,
    Monotonicity,
    DirectionBound,
    ResidualRecurrence,
    ResidualDrift,
    SpanMembership,
    RateAfterEntry,
    EntryIteration,
    OmpIterationCount,
    FirstSelection,
}

impl Invariant {
    pub fn name(self) -> &'static str {
        match self {
            Invariant::SupportPurity => "support_purity",
            Invariant::Feasibility => "feasibility",
            Invariant::Monotonicity => "monotonicity",
            Invariant::DirectionBound => "direction_bound",
            Invariant::ResidualRecurrence => "residual_recurrence",
            Invariant::ResidualDrift => "residual_drift",
            Invariant::SpanMembership => "span_membership",
            Invariant::RateAfterEntry => "rate_after_entry",
            Invariant::EntryIteration => "entry_iteration",
            Invariant::OmpIterationCount => "omp_iteration_count",
            Invariant::FirstSelection => "first_selection",
        }
    }
}

/// A failed check: `value` was observed where `bound` was required.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Violation {
    pub invariant: Invariant,
    pub k: Option<usize>,
    pub value: f64,
    pub bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invariant={}", self.invariant.name())?;
        if let Some(k) = self.k {
            write!(f, " k={k}")?;
        }
        write!(f, " value={:e} bound={:e}", self.value, self.bound)
    }
}

fn violation(invariant: Invariant, k: usize, value: f64, bound: f64) -> Violation {
    Violation {
        invariant,
        k: Some(k),
        value,
        bound,
    }
}

/// Checks every invariant that needs only the trace.
///
/// * every algorithm: support membership (when ground truth was given) and
///   incremental-residual drift;
/// * Frank-Wolfe and OMP: non-increasing residual;
/// * Frank-Wolfe: `‖x_k‖₁ ≤ β`, `‖Φ(s_k − x_k)‖ ≤ 2β` and, for steps with
///   `γ_k ∈ (0, 1)`, the closed-form decrement
///   `‖r_k‖² − ‖r_{k+1}‖² = ⟨r_k, Φ(s_k − x_k)⟩² / ‖Φ(s_k − x_k)‖²`,
///   relative to the larger side plus [`RECURRENCE_ROUNDING_FLOOR`]`·‖r_k‖²` for the rounding of the
///   observed difference.
pub fn check_trace(result: &SolveResult, algorithm: Algorithm, beta: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    if result.max_residual_drift > DRIFT_REL_TOL {
        out.push(Violation {
            invariant: Invariant::ResidualDrift,
            k: None,
            value: result.max_residual_drift,
            bound: DRIFT_REL_TOL,
        });
    }
    let norms = result.residual_norms();
    for (k, rec) in result.trace.iter().enumerate() {
        if rec.in_support == Some(false) {
            out.push(violation(
                Invariant::SupportPurity,
                k,
                rec.selected_atom as f64,
                0.0,
            ));
        }
        let (prev, next) = (norms[k], norms[k + 1]);
        if algorithm != Algorithm::MatchingPursuit && next > prev * (1.0 + MONOTONE_REL_TOL) {
            out.push(violation(Invariant::Monotonicity, k, next, prev));
        }
        if algorithm != Algorithm::FrankWolfe {
            continue;
        }
        let feas_bound = beta * (1.0 + FEASIBILITY_REL_TOL);
        if rec.x_l1 > feas_bound {
            out.push(violation(Invariant::Feasibility, k, rec.x_l1, feas_bound));
        }
        let Some(step) = rec.fw_step else {
            continue;
        };
        let dir_bound = 2.0 * beta * (1.0 + DIRECTION_REL_TOL);
        if step.direction_norm > dir_bound {
            out.push(violation(
                Invariant::DirectionBound,
                k,
                step.direction_norm,
                dir_bound,
            ));
        }
        if rec.gamma > 0.0 && rec.gamma < 1.0 {
            let predicted =
                step.descent * step.descent / (step.direction_norm * step.direction_norm);
            let observed = prev * prev - next * next;
            let scale = predicted.abs().max(observed.abs());
            let floor = RECURRENCE_ROUNDING_FLOOR * prev * prev;
            if (predicted - observed).abs() > RECURRENCE_REL_TOL * scale + floor {
                out.push(violation(
                    Invariant::ResidualRecurrence,
                    k,
                    (predicted - observed).abs() / scale,
                    RECURRENCE_REL_TOL,
                ));
            }
        }
    }
    out
}

/// Distance from `r = y − Φx` to `span{φ_j : j ∈ support}`.
pub fn span_distance(
    dict: &Dictionary,
    support: &SupportSet,
    y: &[f64],
    x: &[f64],
) -> Result<(f64, f64)> {
    let sub = submatrix(dict, support)?;
    let phi_x = mat_vec(dict, x)?;
    let r: Vec<f64> = y.iter().zip(phi_x.iter()).map(|(a, b)| a - b).collect();
    let (_, dist) = project_onto_columns(&sub, &r)?;
    Ok((dist, norm_l2(&r)))
}

/// Span membership of every recorded residual.
pub fn check_span(
    dict: &Dictionary,
    support: &SupportSet,
    y: &[f64],
    iterates: &[Vector],
) -> Result<Vec<Violation>> {
    let floor = SPAN_ABS_TOL * norm_l2(y);
    let mut out = Vec::new();
    for (k, x) in iterates.iter().enumerate() {
        let (dist, r_norm) = span_distance(dict, support, y, x)?;
        let bound = SPAN_REL_TOL * r_norm + floor;
        if dist > bound {
            out.push(violation(Invariant::SpanMembership, k, dist, bound));
        }
    }
    Ok(out)
}
