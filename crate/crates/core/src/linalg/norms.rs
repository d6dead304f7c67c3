use super::eigen::eigvalsh;
use super::symmat::SymMat;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative tolerance on negative eigenvalues for positive semidefiniteness.
pub const PSD_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchattenP {
    /// Nuclear norm.
    One,
    /// Hilbert–Schmidt (Frobenius) norm.
    Two,
    /// Operator norm.
    Inf,
}

/// Schatten norm computed from the spectrum.
pub fn schatten_norm<T: Real>(a: &SymMat<T>, p: SchattenP) -> Result<T> {
    match p {
        SchattenP::Two => Ok(a.frobenius()),
        SchattenP::One => Ok(eigvalsh(a)?.iter().map(|l| l.abs()).sum()),
        SchattenP::Inf => Ok(operator_norm(a)?),
    }
}

pub fn operator_norm<T: Real>(a: &SymMat<T>) -> Result<T> {
    let eigs = eigvalsh(a)?;
    Ok(eigs.iter().fold(
        T::zero(),
        |acc, l| if l.abs() > acc { l.abs() } else { acc },
    ))
}

/// Hilbert–Schmidt inner product `tr(AB) = Σ_ij A_ij B_ij`.
pub fn trace_inner_product<T: Real>(a: &SymMat<T>, b: &SymMat<T>) -> Result<T> {
    a.check_dim(b)?;
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| x * y)
        .sum())
}

/// Effective rank `tr(A) / ‖A‖_op` of a positive semidefinite matrix.
pub fn effective_rank<T: Real>(a: &SymMat<T>) -> Result<T> {
    let eigs = eigvalsh(a)?;
    let (lo, hi) = match (eigs.first(), eigs.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::ZeroMatrix),
    };
    let norm = lo.abs().max(hi.abs());
    if norm == T::zero() {
        return Err(Error::ZeroMatrix);
    }
    if lo < -T::lit(PSD_REL_TOL) * norm {
        return Err(Error::NotPsd {
            min_eigenvalue: lo.to_f64_lossy(),
        });
    }
    Ok(a.trace() / norm)
}
