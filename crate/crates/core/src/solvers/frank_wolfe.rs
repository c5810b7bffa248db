use alloc::vec;
use alloc::vec::Vec;

use super::{
    argmax_abs, check_signal, ground_truth_support, residual_drift, Algorithm, FwStep,
    IterationRecord, SolveResult, SolverConfig, Termination, RESIDUAL_CHECK_INTERVAL,
};
use crate::error::{Error, Result};
use crate::instances::SparseInstance;
use crate::linalg::{correlations, dot, mat_vec, norm_l1, norm_l2, Dictionary, Vector};

/// Vertex `sign · β · e_atom` of the ℓ1 ball returned by the linear minimization oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub atom: usize,
    pub sign: f64,
    pub beta: f64,
}

impl Vertex {
    pub fn dense(&self, n: usize) -> Vector {
        Vector::basis(n, self.atom, self.sign * self.beta)
    }
}

/// Linear minimization oracle over the ℓ1 ball of radius `beta`.
///
/// The gradient is `−Φᵗr`, so the minimizing vertex is `sign(⟨φ_i, r⟩) β e_i`
/// for the atom with the largest `|⟨φ_i, r⟩|` (lowest index on ties).
pub fn fw_select(dict: &Dictionary, r: &[f64], beta: f64) -> Result<Vertex> {
    let corr = correlations(dict, r)?;
    select_from_correlations(&corr, beta)
}

fn select_from_correlations(corr: &[f64], beta: f64) -> Result<Vertex> {
    let atom = argmax_abs(corr, |_| false).ok_or(Error::OrthogonalResidual)?;
    Ok(Vertex {
        atom,
        sign: if corr[atom] > 0.0 { 1.0 } else { -1.0 },
        beta,
    })
}

/// Minimizer over `[0, 1]` of the convex quadratic `‖r − γ v‖²`, given
/// `descent = ⟨r, v⟩` and `direction_sq = ‖v‖²`. A null direction gives 0.
pub fn clamped_step(descent: f64, direction_sq: f64) -> f64 {
    if direction_sq <= 0.0 {
        return 0.0;
    }
    (descent / direction_sq).clamp(0.0, 1.0)
}

/// Exact line search on the segment `[x, s]`, with `r = y − Φx`.
pub fn fw_line_search(dict: &Dictionary, r: &[f64], x: &[f64], s: &[f64]) -> Result<f64> {
    if s.len() != x.len() {
        return Err(Error::DimensionMismatch {
            what: "vertex",
            expected: x.len(),
            actual: s.len(),
        });
    }
    let diff: Vec<f64> = s.iter().zip(x).map(|(a, b)| a - b).collect();
    let direction = mat_vec(dict, &diff)?;
    if r.len() != direction.len() {
        return Err(Error::DimensionMismatch {
            what: "residual",
            expected: direction.len(),
            actual: r.len(),
        });
    }
    Ok(clamped_step(
        dot(r, &direction),
        dot(&direction, &direction),
    ))
}

/// Frank-Wolfe with exact line search for `min ½‖y − Φx‖²` s.t. `‖x‖₁ ≤ β`.
pub fn fw_solve(
    dict: &Dictionary,
    y: &[f64],
    cfg: &SolverConfig,
    ground_truth: Option<&SparseInstance>,
) -> Result<SolveResult> {
    cfg.validate(Algorithm::FrankWolfe)?;
    check_signal(dict, y)?;
    let support = ground_truth_support(dict, ground_truth)?;
    let n = dict.n_atoms();
    let d = dict.dim();
    let beta = cfg.beta;
    let max_iters = cfg.max_iters_for(n);

    let mut x = vec![0.0; n];
    let mut r = y.to_vec();
    let mut r_norm = norm_l2(&r);
    let initial_residual_norm = r_norm;
    let mut trace = Vec::new();
    let mut iterates = cfg.record_iterates.then(|| vec![Vector::zeros(n)]);
    let mut max_drift: f64 = 0.0;
    let mut direction = vec![0.0; d];

    let terminated_by = loop {
        if r_norm <= cfg.tol_residual {
            break Termination::Tolerance;
        }
        let k = trace.len();
        if k >= max_iters {
            break Termination::MaxIters;
        }

        let vertex = fw_select(dict, &r, beta)?;
        // Φ(s − x) = sign·β·φ_i − Φx, with Φx = y − r.
        let atom = dict.atom(vertex.atom);
        let scale = vertex.sign * beta;
        for i in 0..d {
            direction[i] = scale * atom[i] - (y[i] - r[i]);
        }
        let descent = dot(&r, &direction);
        let direction_sq = dot(&direction, &direction);
        let gamma = clamped_step(descent, direction_sq);

        for xi in x.iter_mut() {
            *xi *= 1.0 - gamma;
        }
        x[vertex.atom] += gamma * scale;
        for (ri, di) in r.iter_mut().zip(&direction) {
            *ri -= gamma * di;
        }
        r_norm = norm_l2(&r);

        trace.push(IterationRecord {
            k,
            selected_atom: vertex.atom,
            gamma,
            residual_norm: r_norm,
            x_l1: norm_l1(&x),
            in_support: support.map(|s| s.contains(vertex.atom)),
            fw_step: Some(FwStep {
                descent,
                direction_norm: libm::sqrt(direction_sq),
            }),
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::build_identity_hadamard;
    use crate::linalg::{Matrix, SupportSet};

    fn sixty_degree_pair() -> Dictionary {
        let s = libm::sqrt(3.0) / 2.0;
        Dictionary::new(Matrix::from_col_major(2, 2, vec![1.0, 0.0, 0.5, s]).unwrap()).unwrap()
    }

    #[test]
    fn select_examples() {
        let id = Dictionary::identity(2);
        let v = fw_select(&id, &[0.0, 3.0], 5.0).unwrap();
        assert_eq!(v.atom, 1);
        assert_eq!(v.dense(2).as_slice(), &[0.0, 5.0]);

        assert_eq!(fw_select(&id, &[2.0, 2.0], 1.0).unwrap().atom, 0);

        let v = fw_select(&id, &[0.0, -3.0], 5.0).unwrap();
        assert_eq!(v.dense(2).as_slice(), &[0.0, -5.0]);

        let v = fw_select(&sixty_degree_pair(), &[1.0, 0.0], 1.0).unwrap();
        assert_eq!(v.atom, 0);
        assert_eq!(v.dense(2).as_slice(), &[1.0, 0.0]);

        assert_eq!(
            fw_select(&id, &[0.0, 0.0], 1.0),
            Err(Error::OrthogonalResidual)
        );
    }

    #[test]
    fn line_search_examples() {
        // orthonormal, x = 0, y = c φ_1, s = sign(c) β e_1 → γ = |c|/β
        let id = Dictionary::identity(3);
        let c = -0.75;
        let beta = 2.0;
        let y = [0.0, c, 0.0];
        let s = Vector::basis(3, 1, -beta);
        let gamma = fw_line_search(&id, &y, &[0.0; 3], &s).unwrap();
        assert!((gamma - c.abs() / beta).abs() < 1e-15);

        // r orthogonal to Φ(s − x)
        let gamma = fw_line_search(&id, &[0.0, 0.0, 1.0], &[0.0; 3], &s).unwrap();
        assert_eq!(gamma, 0.0);

        // unconstrained optimum 1.7 clamps to 1
        let s = Vector::basis(3, 0, 1.0);
        let gamma = fw_line_search(&id, &[1.7, 0.0, 0.0], &[0.0; 3], &s).unwrap();
        assert_eq!(gamma, 1.0);

        // s = x is a null direction
        assert_eq!(fw_line_search(&id, &[1.0, 0.0, 0.0], &s, &s).unwrap(), 0.0);
        assert_eq!(clamped_step(-1.0, 2.0), 0.0);
    }

    #[test]
    fn zero_signal_returns_immediately() {
        let dict = build_identity_hadamard(4).unwrap();
        let res = fw_solve(&dict, &[0.0; 4], &SolverConfig::frank_wolfe(1.0), None).unwrap();
        assert!(res.trace.is_empty());
        assert_eq!(res.terminated_by, Termination::Tolerance);
        assert_eq!(res.final_x, Vector::zeros(8));
        assert_eq!(res.support_purity(), None);
    }

    #[test]
    fn orthonormal_one_shot() {
        let id = Dictionary::identity(4);
        for (atom, c) in [(0usize, 0.8f64), (2, -0.3), (3, 1.5)] {
            let beta = 2.0 * c.abs() + 0.1;
            let y = Vector::basis(4, atom, c);
            let res = fw_solve(&id, &y, &SolverConfig::frank_wolfe(beta), None).unwrap();
            assert_eq!(res.iterations(), 1);
            let rec = &res.trace[0];
            assert_eq!(rec.selected_atom, atom);
            assert!((rec.gamma - c.abs() / beta).abs() < 1e-15);
            assert!(rec.residual_norm <= 1e-12);
            assert!((res.final_x[atom] - c).abs() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let id = Dictionary::identity(3);
        assert!(matches!(
            fw_solve(&id, &[1.0, 2.0], &SolverConfig::frank_wolfe(1.0), None),
            Err(Error::DimensionMismatch {
                expected: 3,
                actual: 2,
                ..
            })
        ));
    }

    #[test]
    fn max_iters_terminates() {
        let dict = build_identity_hadamard(16).unwrap();
        let inst = crate::instances::SparseInstance::from_parts(
            &dict,
            SupportSet::new(vec![0, 3], 32).unwrap(),
            &[1.0, -0.5],
        )
        .unwrap();
        let cfg = SolverConfig::frank_wolfe(3.0)
            .with_max_iters(3)
            .recording_iterates();
        let res = fw_solve(&dict, &inst.y, &cfg, Some(&inst)).unwrap();
        assert_eq!(res.terminated_by, Termination::MaxIters);
        assert_eq!(res.iterations(), 3);
        assert_eq!(res.iterates.as_ref().unwrap().len(), 4);
        assert_eq!(res.support_purity(), Some(1.0));
    }
}
