//! Independent oracles for the linear-algebra and dictionary-analysis routines.

use fwsparse_core::analysis::{
    babel, babel_profile, coherence, recovery_condition, support_spectrum_bound_check,
    theorem2_ratio,
};
use fwsparse_core::instances::{build_identity_hadamard, build_random_unit, seeded_rng};
use fwsparse_core::linalg::{
    correlations, extremal_singular_values, mat_vec, norm_l1, norm_l2, submatrix, Dictionary,
    Matrix, SupportSet,
};
use proptest::prelude::*;
use rand::seq::index;

/// `μ1(m)` by enumerating every `Λ` of size `m` and every `i ∉ Λ`.
fn babel_brute_force(dict: &Dictionary, m: usize) -> f64 {
    let n = dict.n_atoms();
    let g = |i: usize, j: usize| -> f64 {
        dict.atom(i)
            .iter()
            .zip(dict.atom(j))
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .abs()
    };
    let mut best: f64 = 0.0;
    // bitmask enumeration, n ≤ 12
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        for i in 0..n {
            if mask & (1 << i) != 0 {
                continue;
            }
            let s: f64 = (0..n)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| g(i, j))
                .sum();
            best = best.max(s);
        }
    }
    best
}

fn nalgebra_singular_values(m: &Matrix) -> (f64, f64) {
    let mat = nalgebra::DMatrix::from_column_slice(m.rows(), m.cols(), m.col_major_data());
    let sv = mat.singular_values();
    (sv.min(), sv.max())
}

#[test]
fn babel_sort_matches_enumeration_small() {
    for seed in 0..10 {
        let dict = build_random_unit(4, 7, seed).unwrap();
        for m in 0..7 {
            let fast = babel(&dict, m).unwrap();
            let slow = babel_brute_force(&dict, m);
            assert!(
                (fast - slow).abs() <= 1e-12,
                "seed {seed} m {m}: {fast} vs {slow}"
            );
        }
    }
}

#[test]
fn babel_of_identity_hadamard_16() {
    let dict = build_identity_hadamard(16).unwrap();
    let profile = babel_profile(&dict, 5).unwrap();
    for (m, value) in profile.iter().enumerate() {
        assert!((value - 0.25 * m as f64).abs() < 1e-14);
    }
}

#[test]
fn hadamard_coherence_is_analytic() {
    for d in [2usize, 4, 8, 16, 32, 64, 128] {
        let dict = build_identity_hadamard(d).unwrap();
        let analytic = 1.0 / (d as f64).sqrt();
        assert!(
            (coherence(&dict).unwrap() - analytic).abs() <= 1e-12,
            "d = {d}"
        );
    }
}

#[test]
fn singular_values_match_svd_on_random_5x3() {
    for seed in 0..200 {
        let mut rng = seeded_rng(seed);
        let data: Vec<f64> = (0..15)
            .map(|_| rand::Rng::sample(&mut rng, rand_distr::StandardNormal))
            .collect();
        let m = Matrix::from_col_major(5, 3, data).unwrap();
        let (lo, hi) = extremal_singular_values(&m).unwrap();
        let (lo_ref, hi_ref) = nalgebra_singular_values(&m);
        assert!(
            (lo - lo_ref).abs() <= 1e-8 * lo_ref,
            "seed {seed}: {lo} vs {lo_ref}"
        );
        assert!(
            (hi - hi_ref).abs() <= 1e-8 * hi_ref,
            "seed {seed}: {hi} vs {hi_ref}"
        );
    }
}

#[test]
fn spectral_bound_on_random_supports() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let d = 8 + (seed as usize % 5) * 12;
        let n = d + d / 2;
        let dict = build_random_unit(d, n, seed).unwrap();
        let mut rng = seeded_rng(seed ^ 0xABCD);
        let mut m = 1;
        while m < d && babel(&dict, m).unwrap() < 1.0 {
            m += 1;
        }
        let k = rand::Rng::random_range(&mut rng, 1..=m);
        let support =
            SupportSet::from_unsorted(index::sample(&mut rng, n, k).into_vec(), n).unwrap();
        assert!(babel(&dict, k - 1).unwrap() < 1.0);
        assert!(support_spectrum_bound_check(&dict, &support), "seed {seed}");
        checked += 1;
    }
    assert_eq!(checked, 60);
}

fn random_dictionary() -> impl Strategy<Value = Dictionary> {
    (1usize..=8, 2usize..=12, any::<u64>())
        .prop_map(|(d, n, seed)| build_random_unit(d, n, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesis_norm_bounded_by_l1(
        dict in random_dictionary(),
        raw in prop::collection::vec(-10.0f64..10.0, 12),
    ) {
        let x = &raw[..dict.n_atoms()];
        let y = mat_vec(&dict, x).unwrap();
        prop_assert!(y.norm_l2() <= norm_l1(x) * (1.0 + 1e-12));
    }

    #[test]
    fn correlations_match_explicit_transpose(
        dict in random_dictionary(),
        raw in prop::collection::vec(-5.0f64..5.0, 8),
    ) {
        let v = &raw[..dict.dim()];
        let fast = correlations(&dict, v).unwrap();
        // rows of Φᵗ, built entry by entry
        let (d, n) = (dict.dim(), dict.n_atoms());
        let phi = dict.matrix();
        for i in 0..n {
            let row: Vec<f64> = (0..d).map(|r| phi.get(r, i)).collect();
            let slow: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            let scale = norm_l2(v).max(f64::MIN_POSITIVE);
            prop_assert!((fast[i] - slow).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn singular_values_ordered_and_bounded(dict in random_dictionary(), seed in any::<u64>()) {
        let n = dict.n_atoms();
        let k_max = dict.dim().min(n);
        let mut rng = seeded_rng(seed);
        let k = rand::Rng::random_range(&mut rng, 1..=k_max);
        let support = SupportSet::from_unsorted(index::sample(&mut rng, n, k).into_vec(), n).unwrap();
        let sub = submatrix(&dict, &support).unwrap();
        let (lo, hi) = extremal_singular_values(&sub).unwrap();
        prop_assert!(lo >= 0.0 && lo <= hi);
        prop_assert!(hi <= (k as f64).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn babel_profile_properties(dict in random_dictionary()) {
        let n = dict.n_atoms();
        let mu = coherence(&dict).unwrap();
        let profile = babel_profile(&dict, n - 1).unwrap();
        prop_assert_eq!(profile[0], 0.0);
        prop_assert_eq!(profile[1], mu);
        for m in 1..n {
            prop_assert!(profile[m] >= profile[m - 1]);
            prop_assert!(profile[m] <= m as f64 * mu * (1.0 + 1e-12));
            let slow = babel_brute_force(&dict, m);
            prop_assert!((profile[m] - slow).abs() <= 1e-12);
        }
    }

    #[test]
    fn quasi_incoherence_bounds_babel_sum(d in 16usize..64, extra in 0usize..16, seed in any::<u64>()) {
        let dict = build_random_unit(d, d + extra, seed).unwrap();
        let mu = coherence(&dict).unwrap();
        let n = dict.n_atoms();
        for m in 1..n {
            if !recovery_condition(mu, m) {
                break;
            }
            let sum = babel(&dict, m).unwrap() + babel(&dict, m - 1).unwrap();
            prop_assert!(sum < 1.0, "m = {}, sum = {}", m, sum);
        }
    }

    #[test]
    fn contraction_factor_in_unit_interval(
        x_l1 in 0.0f64..100.0,
        gap in 1e-3f64..100.0,
        b in 0.0f64..0.999,
    ) {
        let r = theorem2_ratio(x_l1 + gap, x_l1, b).unwrap();
        prop_assert!(r.q > 0.0 && r.q < 1.0);
        prop_assert!((r.epsilon - gap / 2.0).abs() <= 1e-12 * (x_l1 + gap));
    }
}
