//! Spectral matrix functions and their first-order calculus.

use super::eigen::{eigh, SpectralDecomp};
use super::function::ScalarFunction;
use super::symmat::SymMat;
use crate::error::Result;
use crate::scalar::Real;

/// Relative threshold below which two eigenvalues are treated as equal in
/// the Loewner matrix.
pub const LOEWNER_REL_TOL: f64 = 1e-8;

/// `1e-8 · max(1, λ_max − λ_min)`.
pub fn default_loewner_tol<T: Real>(eigs: &[T]) -> T {
    let spread = match (eigs.first(), eigs.last()) {
        (Some(&lo), Some(&hi)) => hi - lo,
        _ => T::zero(),
    };
    T::lit(LOEWNER_REL_TOL) * spread.max(T::one())
}

fn check_spectrum<T: Real>(eigs: &[T], f: &ScalarFunction<T>) -> Result<()> {
    eigs.iter().try_for_each(|&l| f.check_domain(l))
}

/// `f(A) = U f(Λ) Uᵀ`.
pub fn apply_scalar_function<T: Real>(
    decomp: &SpectralDecomp<T>,
    f: &ScalarFunction<T>,
) -> Result<SymMat<T>> {
    check_spectrum(decomp.eigenvalues(), f)?;
    Ok(decomp.map_spectrum(|l| f.eval(l)))
}

/// Convenience: `f(A)` from the matrix itself.
pub fn matrix_function<T: Real>(a: &SymMat<T>, f: &ScalarFunction<T>) -> Result<SymMat<T>> {
    apply_scalar_function(&eigh(a)?, f)
}

/// Matrix of first divided differences `f^{[1]}(λ_i, λ_j)`.
///
/// Pairs closer than `tol` use `f'` at their midpoint.
pub fn loewner_first_difference<T: Real>(
    eigs: &[T],
    f: &ScalarFunction<T>,
    tol: T,
) -> Result<SymMat<T>> {
    check_spectrum(eigs, f)?;
    let values: Vec<T> = eigs.iter().map(|&l| f.eval(l)).collect();
    let half = T::lit(0.5);
    Ok(SymMat::from_upper_fn(eigs.len(), |i, j| {
        let (li, lj) = (eigs[i], eigs[j]);
        if (li - lj).abs() > tol {
            (values[i] - values[j]) / (li - lj)
        } else {
            f.deriv((li + lj) * half)
        }
    }))
}

/// Fréchet derivative `Df(A; H) = U (L ∘ (Uᵀ H U)) Uᵀ` where `L` is the
/// Loewner matrix of `A`'s spectrum.
pub fn frechet_derivative<T: Real>(
    decomp: &SpectralDecomp<T>,
    f: &ScalarFunction<T>,
    h: &SymMat<T>,
    tol: T,
) -> Result<SymMat<T>> {
    let rotated = decomp.to_eigenbasis(h)?;
    let loewner = loewner_first_difference(decomp.eigenvalues(), f, tol)?;
    let schur = rotated.zip_map(&loewner, |x, l| x * l)?;
    decomp.from_eigenbasis(&schur)
}

/// [`frechet_derivative`] with [`default_loewner_tol`].
pub fn frechet_derivative_default<T: Real>(
    decomp: &SpectralDecomp<T>,
    f: &ScalarFunction<T>,
    h: &SymMat<T>,
) -> Result<SymMat<T>> {
    frechet_derivative(decomp, f, h, default_loewner_tol(decomp.eigenvalues()))
}

/// First-order Taylor remainder `S_f(A; H) = f(A+H) − f(A) − Df(A; H)`.
pub fn taylor_remainder<T: Real>(
    a: &SymMat<T>,
    h: &SymMat<T>,
    f: &ScalarFunction<T>,
    tol: T,
) -> Result<SymMat<T>> {
    a.check_dim(h)?;
    let base = eigh(a)?;
    let fa = apply_scalar_function(&base, f)?;
    let fah = matrix_function(&(a + h), f)?;
    let df = frechet_derivative(&base, f, h, tol)?;
    Ok(SymMat::from_upper_fn(a.dim(), |i, j| {
        (fah.get(i, j) - fa.get(i, j)) - df.get(i, j)
    }))
}
