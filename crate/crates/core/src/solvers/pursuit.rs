//! Matching Pursuit and Orthogonal Matching Pursuit baselines.

use alloc::vec;
use alloc::vec::Vec;

use super::{
    argmax_abs, check_signal, ground_truth_support, residual_drift, Algorithm, IterationRecord,
    SolveResult, SolverConfig, Termination, RESIDUAL_CHECK_INTERVAL,
};
use crate::error::{Error, Result};
use crate::instances::SparseInstance;
use crate::linalg::{axpy, correlations, norm_l1, norm_l2, solve_spd, Dictionary, Matrix, Vector};

/// Matching Pursuit: `x(i_k) += ⟨φ_{i_k}, r_k⟩`, `r_{k+1} = r_k − ⟨φ_{i_k}, r_k⟩ φ_{i_k}`.
pub fn mp_solve(
    dict: &Dictionary,
    y: &[f64],
    cfg: &SolverConfig,
    ground_truth: Option<&SparseInstance>,
) -> Result<SolveResult> {
    cfg.validate(Algorithm::MatchingPursuit)?;
    check_signal(dict, y)?;
    let support = ground_truth_support(dict, ground_truth)?;
    let n = dict.n_atoms();
    let max_iters = cfg.max_iters_for(n);

    let mut x = vec![0.0; n];
    let mut r = y.to_vec();
    let mut r_norm = norm_l2(&r);
    let initial_residual_norm = r_norm;
    let mut trace = Vec::new();
    let mut iterates = cfg.record_iterates.then(|| vec![Vector::zeros(n)]);
    let mut max_drift: f64 = 0.0;

    let terminated_by = loop {
        if r_norm <= cfg.tol_residual {
            break Termination::Tolerance;
        }
        let k = trace.len();
        if k >= max_iters {
            break Termination::MaxIters;
        }
        let corr = correlations(dict, &r)?;
        let atom = argmax_abs(&corr, |_| false).ok_or(Error::OrthogonalResidual)?;
        let step = corr[atom];
        x[atom] += step;
        axpy(-step, dict.atom(atom), &mut r);
        r_norm = norm_l2(&r);

        trace.push(IterationRecord {
            k,
            selected_atom: atom,
            gamma: step,
            residual_norm: r_norm,
            x_l1: norm_l1(&x),
            in_support: support.map(|s| s.contains(atom)),
            fw_step: None,
        });
        if let Some(its) = iterates.as_mut() {
            its.push(Vector::new(x.clone())?);
        }
        if (k + 1) % RESIDUAL_CHECK_INTERVAL == 0 {
            max_drift = max_drift.max(residual_drift(dict, y, &x, &r)?);
        }
    };
    max_drift = max_drift.max(residual_drift(dict, y, &x, &r)?);

    Ok(SolveResult {
        final_x: Vector::new(x)?,
        trace,
        terminated_by,
        initial_residual_norm,
        iterates,
        max_residual_drift: max_drift,
    })
}

/// Orthogonal Matching Pursuit: MP selection over the atoms not yet chosen,
/// then a least-squares refit on every chosen atom via the normal equations.
pub fn omp_solve(
    dict: &Dictionary,
    y: &[f64],
    cfg: &SolverConfig,
    ground_truth: Option<&SparseInstance>,
) -> Result<SolveResult> {
    cfg.validate(Algorithm::OrthogonalMatchingPursuit)?;
    check_signal(dict, y)?;
    let support = ground_truth_support(dict, ground_truth)?;
    let n = dict.n_atoms();
    let max_iters = cfg.max_iters_for(n);

    let mut x = vec![0.0; n];
    let mut r = y.to_vec();
    let mut r_norm = norm_l2(&r);
    let initial_residual_norm = r_norm;
    let mut trace = Vec::new();
    let mut iterates = cfg.record_iterates.then(|| vec![Vector::zeros(n)]);
    let mut max_drift: f64 = 0.0;
    let mut chosen: Vec<usize> = Vec::new();
    let mut is_chosen = vec![false; n];

    let terminated_by = loop {
        if r_norm <= cfg.tol_residual {
            break Termination::Tolerance;
        }
        let k = trace.len();
        if k >= max_iters || chosen.len() == n {
            break Termination::MaxIters;
        }
        let corr = correlations(dict, &r)?;
        let atom = argmax_abs(&corr, |i| is_chosen[i]).ok_or(Error::OrthogonalResidual)?;
        chosen.push(atom);
        is_chosen[atom] = true;

        let columns: Vec<&[f64]> = chosen.iter().map(|&j| dict.atom(j)).collect();
        let sub = Matrix::from_columns(dict.dim(), &columns)?;
        let rhs = sub.tr_mul_vec(y)?;
        let coeffs = solve_spd(&sub.gram(), &rhs)?;

        r.copy_from_slice(y);
        for (&j, &c) in chosen.iter().zip(&coeffs) {
            x[j] = c;
            axpy(-c, dict.atom(j), &mut r);
        }
        r_norm = norm_l2(&r);

        trace.push(IterationRecord {
            k,
            selected_atom: atom,
            gamma: coeffs[coeffs.len() - 1],
            residual_norm: r_norm,
            x_l1: norm_l1(&x),
            in_support: support.map(|s| s.contains(atom)),
            fw_step: None,
        });
        if let Some(its) = iterates.as_mut() {
            its.push(Vector::new(x.clone())?);
        }
        if (k + 1) % RESIDUAL_CHECK_INTERVAL == 0 {
            max_drift = max_drift.max(residual_drift(dict, y, &x, &r)?);
        }
    };
    max_drift = max_drift.max(residual_drift(dict, y, &x, &r)?);

    Ok(SolveResult {
        final_x: Vector::new(x)?,
        trace,
        terminated_by,
        initial_residual_norm,
        iterates,
        max_residual_drift: max_drift,
    })
}
