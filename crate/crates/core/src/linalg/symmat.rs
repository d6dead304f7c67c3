use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use super::dense::Mat;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense real symmetric matrix.
///
/// Storage is a full row-major `d × d` array kept exactly symmetric: every
/// constructor either writes both triangles from one value or symmetrizes as
/// `(A + Aᵀ) / 2`. Entries are always finite.
#[derive(Clone)]
pub struct SymMat<T> {
    dim: usize,
    data: Vec<T>,
    symmetrized: bool,
}

impl<T: Real> SymMat<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
            symmetrized: false,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![T::one(); dim])
    }

    pub fn scaled_identity(dim: usize, c: T) -> Self {
        Self::from_diag(&vec![c; dim])
    }

    /// Diagonal matrix. Panics on non-finite input.
    pub fn from_diag(diag: &[T]) -> Self {
        assert!(diag.iter().all(|x| x.is_finite()), "non-finite diagonal");
        let d = diag.len();
        let mut m = Self::zeros(d);
        for (i, &x) in diag.iter().enumerate() {
            m.data[i * d + i] = x;
        }
        m
    }

    /// Builds a matrix from an entry function evaluated on the upper
    /// triangle `i <= j`; the lower triangle is mirrored.
    ///
    /// Panics on non-finite values.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite entry at ({i}, {j})");
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Builds from a row-major square array, symmetrizing if the input is
    /// not exactly symmetric. [`SymMat::was_symmetrized`] reports whether
    /// that happened.
    pub fn from_row_major(dim: usize, data: &[T]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim.max(1),
                col: pos % dim.max(1),
            });
        }
        let half = T::lit(0.5);
        let mut symmetrized = false;
        let mut out = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                if a != b {
                    symmetrized = true;
                    out.push((a + b) * half);
                } else {
                    out.push(a);
                }
            }
        }
        Ok(Self {
            dim,
            data: out,
            symmetrized,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.len();
        let mut flat = Vec::with_capacity(d * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::DimMismatch {
                    expected: d,
                    got: rows[i].len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::from_row_major(d, &flat)
    }

    pub fn from_mat(m: &Mat<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        Self::from_row_major(m.rows(), m.as_slice())
    }

    /// `u uᵀ`.
    pub fn outer(u: &[T]) -> Self {
        Self::from_upper_fn(u.len(), |i, j| u[i] * u[j])
    }

    /// `e_i e_iᵀ`.
    pub fn unit_rank_one(dim: usize, i: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[i * dim + i] = T::one();
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    /// Row-major view of all `d²` entries.
    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn was_symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub fn to_mat(&self) -> Mat<T> {
        Mat::from_row_major(self.dim, self.dim, self.data.clone()).expect("square storage")
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    /// Largest absolute entry (entrywise sup norm).
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(
            T::zero(),
            |acc, &x| if x.abs() > acc { x.abs() } else { acc },
        )
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// Matrix product. The result is generally not symmetric.
    pub fn matmul(&self, rhs: &SymMat<T>) -> Result<Mat<T>> {
        self.check_dim(rhs)?;
        self.to_mat().matmul(&rhs.to_mat())
    }

    /// `A B + B A`, which is symmetric for symmetric `A`, `B`.
    pub fn anticommutator(&self, rhs: &SymMat<T>) -> Result<SymMat<T>> {
        let ab = self.matmul(rhs)?;
        Ok(Self::from_upper_fn(self.dim, |i, j| {
            ab[(i, j)] + ab[(j, i)]
        }))
    }

    /// `A B A` for symmetric `B`.
    pub fn sandwich(&self, inner: &SymMat<T>) -> Result<SymMat<T>> {
        let ab = self.matmul(inner)?;
        let aba = ab.matmul(&self.to_mat())?;
        Ok(Self::from_upper_fn(self.dim, |i, j| {
            (aba[(i, j)] + aba[(j, i)]) * T::lit(0.5)
        }))
    }

    /// `A²`, symmetrized against rounding.
    pub fn square(&self) -> SymMat<T> {
        let d = self.dim;
        Self::from_upper_fn(d, |i, j| {
            (0..d).map(|k| self.get(i, k) * self.get(k, j)).sum()
        })
    }

    pub fn zip_map(&self, rhs: &SymMat<T>, f: impl Fn(T, T) -> T) -> Result<SymMat<T>> {
        self.check_dim(rhs)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            symmetrized: false,
        })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> SymMat<T> {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| f(x)).collect(),
            symmetrized: false,
        }
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> SymMat<U> {
        SymMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|&x| U::from_f64(x.to_f64_lossy()).expect("finite"))
                .collect(),
            symmetrized: self.symmetrized,
        }
    }

    pub(crate) fn check_dim(&self, rhs: &SymMat<T>) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: rhs.dim,
            });
        }
        Ok(())
    }
}

impl<T> Index<(usize, usize)> for SymMat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.dim + j]
    }
}

/// Equality compares entries only, not the symmetrization flag.
impl<T: PartialEq> PartialEq for SymMat<T> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.data == other.data
    }
}

impl<T: fmt::Debug> fmt::Debug for SymMat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.dim {
            list.entry(&&self.data[i * self.dim..(i + 1) * self.dim]);
        }
        list.finish()
    }
}

// Operator sugar panics on dimension mismatch, the fallible versions live on
// `zip_map` / `check_dim`.
impl<'a, T: Real> Add<&'a SymMat<T>> for &'a SymMat<T> {
    type Output = SymMat<T>;
    fn add(self, rhs: &SymMat<T>) -> SymMat<T> {
        self.zip_map(rhs, |a, b| a + b)
            .expect("dimension mismatch in +")
    }
}

impl<'a, T: Real> Sub<&'a SymMat<T>> for &'a SymMat<T> {
    type Output = SymMat<T>;
    fn sub(self, rhs: &SymMat<T>) -> SymMat<T> {
        self.zip_map(rhs, |a, b| a - b)
            .expect("dimension mismatch in -")
    }
}

impl<T: Real> Mul<T> for &SymMat<T> {
    type Output = SymMat<T>;
    fn mul(self, c: T) -> SymMat<T> {
        self.scale(c)
    }
}

impl<T: Real> Neg for &SymMat<T> {
    type Output = SymMat<T>;
    fn neg(self) -> SymMat<T> {
        self.map(|x| -x)
    }
}
