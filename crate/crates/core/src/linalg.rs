//! Dense vectors and matrices, the dictionary type, and small spectral utilities.
//!
//! Matrices are stored column-major: column `j` of a [`Dictionary`] is the atom
//! `φ_j`, and most operations walk whole columns.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};

/// Atoms must have unit ℓ2 norm to within this tolerance.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Gram eigenvalues in `[-NEGATIVE_EIGEN_CLAMP, 0)` are treated as zero.
pub const NEGATIVE_EIGEN_CLAMP: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 64;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_l2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn norm_l1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn check_finite(entries: &[f64]) -> Result<()> {
    match entries.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Fixed-length real vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(transparent))]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_finite(&entries)?;
        Ok(Vector(entries))
    }

    pub fn zeros(len: usize) -> Self {
        Vector(vec![0.0; len])
    }

    /// Scaled canonical basis vector `scale * e_index`.
    pub fn basis(len: usize, index: usize, scale: f64) -> Self {
        let mut v = vec![0.0; len];
        v[index] = scale;
        Vector(v)
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        debug_assert!(entries.iter().all(|v| v.is_finite()));
        Vector(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_l2(&self) -> f64 {
        norm_l2(&self.0)
    }

    pub fn norm_l1(&self) -> f64 {
        norm_l1(&self.0)
    }

    /// Indices of the nonzero entries.
    pub fn support(&self) -> SupportSet {
        SupportSet {
            indices: (0..self.0.len()).filter(|&i| self.0[i] != 0.0).collect(),
        }
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix data",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        check_finite(&data)?;
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from row-major data (the order used by text files).
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix data",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        let mut col_major = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                col_major[j * rows + i] = data[i * cols + j];
            }
        }
        Matrix::from_col_major(rows, cols, col_major)
    }

    pub fn from_columns(rows: usize, columns: &[&[f64]]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    what: if j == 0 { "first column" } else { "column" },
                    expected: rows,
                    actual: col.len(),
                });
            }
            data.extend_from_slice(col);
        }
        Matrix::from_col_major(rows, columns.len(), data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.rows)
    }

    pub fn col_major_data(&self) -> &[f64] {
        &self.data
    }

    /// `M x` as a linear combination of columns.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                what: "coefficient vector",
                expected: self.cols,
                actual: x.len(),
            });
        }
        let mut out = vec![0.0; self.rows];
        for (col, &xj) in self.columns().zip(x) {
            if xj != 0.0 {
                axpy(xj, col, &mut out);
            }
        }
        Ok(Vector::from_vec_unchecked(out))
    }

    /// `Mᵗ v`, one dot product per column.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vector> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                what: "signal vector",
                expected: self.rows,
                actual: v.len(),
            });
        }
        Ok(Vector::from_vec_unchecked(
            self.columns().map(|col| dot(col, v)).collect(),
        ))
    }

    /// `MᵗM`.
    pub fn gram(&self) -> Matrix {
        let k = self.cols;
        let mut data = vec![0.0; k * k];
        for a in 0..k {
            for b in a..k {
                let g = dot(self.column(a), self.column(b));
                data[b * k + a] = g;
                data[a * k + b] = g;
            }
        }
        Matrix {
            rows: k,
            cols: k,
            data,
        }
    }
}

/// A d×n matrix whose columns (atoms) all have unit ℓ2 norm.
///
/// Construction validates but never renormalizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: Matrix,
}

impl Dictionary {
    pub fn new(atoms: Matrix) -> Result<Self> {
        for (column, col) in atoms.columns().enumerate() {
            let norm = norm_l2(col);
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::NotUnitNorm { column, norm });
            }
        }
        Ok(Dictionary { atoms })
    }

    pub fn identity(d: usize) -> Self {
        Dictionary {
            atoms: Matrix::identity(d),
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.atoms.rows
    }

    /// Number of atoms.
    pub fn n_atoms(&self) -> usize {
        self.atoms.cols
    }

    pub fn atom(&self, j: usize) -> &[f64] {
        self.atoms.column(j)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.atoms
    }
}

/// Strictly increasing set of atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(transparent))]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    /// `indices` must be strictly increasing and below `n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::SupportNotSorted);
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::SupportIndexOutOfRange { index, n });
        }
        Ok(SupportSet { indices })
    }

    /// Sorts first; duplicates are still rejected.
    pub fn from_unsorted(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        SupportSet::new(indices, n)
    }

    pub fn full(n: usize) -> Self {
        SupportSet {
            indices: (0..n).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// `Φx`.
pub fn mat_vec(dict: &Dictionary, x: &[f64]) -> Result<Vector> {
    dict.atoms.mul_vec(x)
}

/// All inner products `⟨φ_i, v⟩`.
pub fn correlations(dict: &Dictionary, v: &[f64]) -> Result<Vector> {
    dict.atoms.tr_mul_vec(v)
}

/// Columns of `dict` indexed by `support`, in support order.
pub fn submatrix(dict: &Dictionary, support: &SupportSet) -> Result<Matrix> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    if let Some(&index) = support.indices().iter().find(|&&i| i >= dict.n_atoms()) {
        return Err(Error::SupportIndexOutOfRange {
            index,
            n: dict.n_atoms(),
        });
    }
    let columns: Vec<&[f64]> = support.indices().iter().map(|&j| dict.atom(j)).collect();
    Matrix::from_columns(dict.dim(), &columns)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch {
            what: "symmetric matrix columns",
            expected: a.rows,
            actual: a.cols,
        });
    }
    let n = a.rows;
    let mut m = a.data.clone();
    let idx = |i: usize, j: usize| j * n + i;
    let scale: f64 = m.iter().map(|v| v * v).sum();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for q in 1..n {
            for p in 0..q {
                off += m[idx(p, q)] * m[idx(p, q)];
            }
        }
        if off <= f64::EPSILON * f64::EPSILON * scale * 1e-4 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[idx(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[idx(q, q)] - m[idx(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[idx(k, p)];
                    let mkq = m[idx(k, q)];
                    m[idx(k, p)] = c * mkp - s * mkq;
                    m[idx(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[idx(p, k)];
                    let mqk = m[idx(q, k)];
                    m[idx(p, k)] = c * mpk - s * mqk;
                    m[idx(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[idx(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Smallest and largest singular values of a d×k matrix with k ≤ d,
/// from the eigenvalues of its k×k Gram matrix.
pub fn extremal_singular_values(m: &Matrix) -> Result<(f64, f64)> {
    if m.cols > m.rows {
        return Err(Error::SupportExceedsDimension {
            k: m.cols,
            d: m.rows,
        });
    }
    let eig = symmetric_eigenvalues(&m.gram())?;
    let to_sigma = |lambda: f64| -> Result<f64> {
        if lambda >= 0.0 {
            Ok(libm::sqrt(lambda))
        } else if lambda >= -NEGATIVE_EIGEN_CLAMP {
            Ok(0.0)
        } else {
            Err(Error::NegativeEigenvalue { value: lambda })
        }
    };
    let sigma_min = to_sigma(eig[0])?;
    let sigma_max = to_sigma(eig[eig.len() - 1])?;
    Ok((sigma_min, sigma_max))
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky factorization.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::DimensionMismatch {
            what: "system matrix columns",
            expected: n,
            actual: a.cols,
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            what: "right-hand side",
            expected: n,
            actual: b.len(),
        });
    }
    // Lower factor, row-major.
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::NotPositiveDefinite);
                }
                l[i * n + i] = libm::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i * n + i];
    }
    Ok(x)
}

/// Least-squares coefficients of `v` on the columns of `m` and the residual
/// norm `‖v − m c‖₂` (the distance from `v` to the column span).
pub fn project_onto_columns(m: &Matrix, v: &[f64]) -> Result<(Vec<f64>, f64)> {
    let rhs = m.tr_mul_vec(v)?;
    let coeffs = solve_spd(&m.gram(), &rhs)?;
    let fitted = m.mul_vec(&coeffs)?;
    let dist = libm::sqrt(
        v.iter()
            .zip(fitted.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum(),
    );
    Ok((coeffs, dist))
}
