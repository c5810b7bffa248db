//! Seeded construction of dictionaries and m-sparse ground-truth instances.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{mat_vec, norm_l2, Dictionary, Matrix, SupportSet, Vector};

/// Name of the seeded generator, recorded alongside generated data. Seeds are
/// only reproducible under the same generator.
pub const GENERATOR_NAME: &str = "chacha8-rand0.9-v1";

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `[I_d | H_d/√d]` with a Sylvester Hadamard matrix; coherence `1/√d`.
pub fn build_identity_hadamard(d: usize) -> Result<Dictionary> {
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { d });
    }
    // Sylvester: H_{2k} = [[H, H], [H, -H]], stored row-major as ±1.
    let mut h = vec![1i8];
    let mut size = 1;
    while size < d {
        let next = size * 2;
        let mut grown = vec![0i8; next * next];
        for i in 0..size {
            for j in 0..size {
                let v = h[i * size + j];
                grown[i * next + j] = v;
                grown[i * next + j + size] = v;
                grown[(i + size) * next + j] = v;
                grown[(i + size) * next + j + size] = -v;
            }
        }
        h = grown;
        size = next;
    }

    let scale = 1.0 / libm::sqrt(d as f64);
    let mut data = Matrix::identity(d).col_major_data().to_vec();
    data.reserve(d * d);
    for j in 0..d {
        for i in 0..d {
            data.push(h[i * d + j] as f64 * scale);
        }
    }
    Dictionary::new(Matrix::from_col_major(d, 2 * d, data)?)
}

/// `n` standard-normal columns in `d` dimensions, each normalized to unit norm.
pub fn build_random_unit(d: usize, n: usize, seed: u64) -> Result<Dictionary> {
    if d == 0 || n == 0 {
        return Err(Error::EmptyMatrix { rows: d, cols: n });
    }
    let mut rng = seeded_rng(seed);
    let mut data = Vec::with_capacity(d * n);
    for _ in 0..n {
        loop {
            let col: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = norm_l2(&col);
            if norm > 0.0 {
                data.extend(col.iter().map(|v| v / norm));
                break;
            }
        }
    }
    Dictionary::new(Matrix::from_col_major(d, n, data)?)
}

/// Ground-truth coefficients `x*`, their support and the signal `y = Φx*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseInstance {
    pub x_star: Vector,
    pub support: SupportSet,
    pub y: Vector,
    pub x_star_l1: f64,
}

impl SparseInstance {
    /// Builds the instance from support indices and the matching nonzero values.
    pub fn from_parts(dict: &Dictionary, support: SupportSet, values: &[f64]) -> Result<Self> {
        if values.len() != support.len() {
            return Err(Error::DimensionMismatch {
                what: "support values",
                expected: support.len(),
                actual: values.len(),
            });
        }
        let n = dict.n_atoms();
        if let Some(&index) = support.indices().iter().find(|&&i| i >= n) {
            return Err(Error::SupportIndexOutOfRange { index, n });
        }
        if let Some(pos) = values.iter().position(|&v| v == 0.0) {
            return Err(Error::ZeroCoefficient {
                index: support.indices()[pos],
            });
        }
        let mut x = vec![0.0; n];
        for (&i, &v) in support.indices().iter().zip(values) {
            x[i] = v;
        }
        let x_star = Vector::new(x)?;
        let y = mat_vec(dict, &x_star)?;
        Ok(SparseInstance {
            x_star_l1: x_star.norm_l1(),
            x_star,
            support,
            y,
        })
    }

    pub fn m(&self) -> usize {
        self.support.len()
    }

    /// Nonzero values of `x*` in support order.
    pub fn support_values(&self) -> Vec<f64> {
        self.support
            .indices()
            .iter()
            .map(|&i| self.x_star[i])
            .collect()
    }
}

/// Magnitude range for nonzero coefficients: `|x*(i)| ∈ [min_abs, max_abs]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffRange {
    pub min_abs: f64,
    pub max_abs: f64,
}

impl Default for CoeffRange {
    fn default() -> Self {
        CoeffRange {
            min_abs: 0.1,
            max_abs: 1.0,
        }
    }
}

/// Uniform support of size `m`, magnitudes uniform in the range, random signs.
pub fn sample_instance(
    dict: &Dictionary,
    m: usize,
    range: CoeffRange,
    seed: u64,
) -> Result<SparseInstance> {
    let n = dict.n_atoms();
    if m > n {
        return Err(Error::SparsityTooLarge { m, n });
    }
    if !(range.min_abs > 0.0) {
        return Err(Error::InvalidParameter {
            name: "coeff_min_abs",
            value: range.min_abs,
        });
    }
    if !(range.max_abs >= range.min_abs) || !range.max_abs.is_finite() {
        return Err(Error::InvalidParameter {
            name: "coeff_max_abs",
            value: range.max_abs,
        });
    }
    let mut rng = seeded_rng(seed);
    let support = SupportSet::from_unsorted(index::sample(&mut rng, n, m).into_vec(), n)?;
    let values: Vec<f64> = (0..m)
        .map(|_| {
            let magnitude = if range.max_abs > range.min_abs {
                rng.random_range(range.min_abs..=range.max_abs)
            } else {
                range.min_abs
            };
            if rng.random::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    SparseInstance::from_parts(dict, support, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::coherence;

    #[test]
    fn identity_hadamard_coherence() {
        for (d, mu) in [(4, 0.5), (16, 0.25), (64, 0.125)] {
            let dict = build_identity_hadamard(d).unwrap();
            assert_eq!(dict.n_atoms(), 2 * d);
            assert!((coherence(&dict).unwrap() - mu).abs() < 1e-12);
        }
        let d2 = build_identity_hadamard(2).unwrap();
        assert!((coherence(&d2).unwrap() - 1.0 / libm::sqrt(2.0)).abs() < 1e-12);
    }

    #[test]
    fn identity_hadamard_rejects_non_powers() {
        assert_eq!(
            build_identity_hadamard(12),
            Err(Error::NotPowerOfTwo { d: 12 })
        );
        assert_eq!(
            build_identity_hadamard(0),
            Err(Error::NotPowerOfTwo { d: 0 })
        );
    }

    #[test]
    fn random_unit_is_deterministic_and_normalized() {
        let a = build_random_unit(8, 16, 3).unwrap();
        let b = build_random_unit(8, 16, 3).unwrap();
        let c = build_random_unit(8, 16, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for col in a.matrix().columns() {
            assert!((norm_l2(col) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_unit_coherence_below_one() {
        let dict = build_random_unit(32, 64, 7).unwrap();
        let mu = coherence(&dict).unwrap();
        assert!(mu > 0.0 && mu < 1.0, "mu = {mu}");
    }

    #[test]
    fn sample_instance_edge_cases() {
        let dict = Dictionary::identity(5);
        let empty = sample_instance(&dict, 0, CoeffRange::default(), 1).unwrap();
        assert_eq!(empty.x_star.as_slice(), &[0.0; 5]);
        assert_eq!(empty.y.as_slice(), &[0.0; 5]);
        assert_eq!(empty.m(), 0);

        let full = sample_instance(&dict, 5, CoeffRange::default(), 1).unwrap();
        assert_eq!(full.y, full.x_star);
        assert_eq!(full.m(), 5);

        assert_eq!(
            sample_instance(&dict, 6, CoeffRange::default(), 1),
            Err(Error::SparsityTooLarge { m: 6, n: 5 })
        );
    }

    #[test]
    fn sample_instance_respects_invariants() {
        let dict = build_identity_hadamard(16).unwrap();
        let range = CoeffRange::default();
        for seed in 0..20 {
            let inst = sample_instance(&dict, 3, range, seed).unwrap();
            assert_eq!(inst.x_star.support(), inst.support);
            assert_eq!(inst.m(), 3);
            for v in inst.support_values() {
                assert!(v.abs() >= range.min_abs && v.abs() <= range.max_abs);
            }
            let y = mat_vec(&dict, &inst.x_star).unwrap();
            assert_eq!(y, inst.y);
            assert!((inst.x_star_l1 - inst.x_star.norm_l1()).abs() == 0.0);
        }
        let a = sample_instance(&dict, 4, range, 9).unwrap();
        let b = sample_instance(&dict, 4, range, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn from_parts_validation() {
        let dict = Dictionary::identity(3);
        let s = SupportSet::new(alloc::vec![0, 2], 3).unwrap();
        assert!(matches!(
            SparseInstance::from_parts(&dict, s.clone(), &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            SparseInstance::from_parts(&dict, s, &[1.0, 0.0]),
            Err(Error::ZeroCoefficient { index: 2 })
        );
    }
}
