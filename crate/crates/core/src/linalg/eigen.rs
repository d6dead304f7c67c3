//! Symmetric eigendecomposition by the cyclic Jacobi method.
//!
//! The sweep order is fixed (row-major over the strict upper triangle) and
//! the output is sorted ascending with a stable sort, so repeated calls on
//! the same input produce bit-identical results on one platform.

use super::dense::Mat;
use super::symmat::SymMat;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sweeps allowed per unit of dimension before giving up.
pub const SWEEPS_PER_DIM: usize = 64;

/// Eigenvalues (ascending) with orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomp<T> {
    eigenvalues: Vec<T>,
    eigenvectors: Mat<T>,
}

impl<T: Real> SpectralDecomp<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    #[inline]
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Column `j` is the unit eigenvector for `eigenvalues()[j]`.
    #[inline]
    pub fn eigenvectors(&self) -> &Mat<T> {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    /// Operator norm `max |λ|`.
    pub fn spectral_radius(&self) -> T {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }

    /// `U g(Λ) Uᵀ`.
    pub fn map_spectrum(&self, mut g: impl FnMut(T) -> T) -> SymMat<T> {
        let weights: Vec<T> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        self.recompose_with(&weights)
    }

    /// `U diag(w) Uᵀ` for arbitrary weights.
    pub fn recompose_with(&self, weights: &[T]) -> SymMat<T> {
        let d = self.dim();
        let u = &self.eigenvectors;
        SymMat::from_upper_fn(d, |i, j| {
            let ui = u.row(i);
            let uj = u.row(j);
            let mut acc = T::zero();
            for k in 0..d {
                acc += ui[k] * weights[k] * uj[k];
            }
            acc
        })
    }

    /// `U Λ Uᵀ`.
    pub fn recompose(&self) -> SymMat<T> {
        self.recompose_with(&self.eigenvalues)
    }

    /// `Uᵀ H U`: `H` expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, h: &SymMat<T>) -> Result<SymMat<T>> {
        if h.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: h.dim(),
            });
        }
        let u = &self.eigenvectors;
        let hu = h.to_mat().matmul(u)?;
        let ut = u.transpose();
        let m = ut.matmul(&hu)?;
        Ok(SymMat::from_upper_fn(self.dim(), |i, j| {
            (m[(i, j)] + m[(j, i)]) * T::lit(0.5)
        }))
    }

    /// `U M Uᵀ`: inverse of [`SpectralDecomp::to_eigenbasis`].
    pub fn from_eigenbasis(&self, m: &SymMat<T>) -> Result<SymMat<T>> {
        if m.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: m.dim(),
            });
        }
        let u = &self.eigenvectors;
        let um = u.matmul(&m.to_mat())?;
        let r = um.matmul(&u.transpose())?;
        Ok(SymMat::from_upper_fn(self.dim(), |i, j| {
            (r[(i, j)] + r[(j, i)]) * T::lit(0.5)
        }))
    }
}

/// Full eigendecomposition of a symmetric matrix.
pub fn eigh<T: Real>(a: &SymMat<T>) -> Result<SpectralDecomp<T>> {
    let (vals, vecs) = jacobi(a, true)?;
    let vecs = vecs.expect("vectors requested");
    let d = a.dim();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).expect("finite eigenvalues"));

    let eigenvalues: Vec<T> = order.iter().map(|&k| vals[k]).collect();
    let mut eigenvectors = Mat::zeros(d, d);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Sign convention: the largest-magnitude component is positive.
        let mut pivot = 0;
        for i in 0..d {
            if vecs[(i, old_col)].abs() > vecs[(pivot, old_col)].abs() {
                pivot = i;
            }
        }
        let sign = if vecs[(pivot, old_col)] < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        for i in 0..d {
            eigenvectors[(i, new_col)] = sign * vecs[(i, old_col)];
        }
    }
    Ok(SpectralDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh<T: Real>(a: &SymMat<T>) -> Result<Vec<T>> {
    let (mut vals, _) = jacobi(a, false)?;
    vals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(vals)
}

fn jacobi<T: Real>(a: &SymMat<T>, want_vectors: bool) -> Result<(Vec<T>, Option<Mat<T>>)> {
    let d = a.dim();
    let mut m = a.to_mat();
    let mut v = want_vectors.then(|| Mat::identity(d));
    if d <= 1 {
        return Ok((m.as_slice().to_vec(), v));
    }

    let max_sweeps = SWEEPS_PER_DIM * d;
    let frob2: T = a.as_slice().iter().map(|&x| x * x).sum();
    let tol2 = frob2 * T::epsilon() * T::epsilon();
    let hundred = T::lit(100.0);
    let half = T::lit(0.5);

    for sweep in 0..max_sweeps {
        let mut off = T::zero();
        for p in 0..d {
            for q in (p + 1)..d {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off <= tol2 || off == T::zero() {
            let vals = (0..d).map(|i| m[(i, i)]).collect();
            return Ok((vals, v));
        }

        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let g = hundred * apq.abs();
                // Once converged to working precision relative to both
                // diagonal entries, drop the element outright.
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[(p, q)] = T::zero();
                    m[(q, p)] = T::zero();
                    continue;
                }

                let theta = (aqq - app) * half / apq;
                let t = {
                    let r = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -r
                    } else {
                        r
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for k in 0..d {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();

                if let Some(v) = v.as_mut() {
                    for k in 0..d {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    Err(Error::EigFailure { sweeps: max_sweeps })
}
