//! Exact action of the Wishart expectation operator on quadratic matrix
//! polynomials of the covariance.
//!
//! For `Σ̂ = n⁻¹ Σ_j X_j X_jᵀ` with `X_j ~ N(0, Σ)` i.i.d., Isserlis'
//! theorem gives
//!
//! ```text
//! E Σ̂²          = Σ² + (Σ² + tr(Σ) Σ) / n
//! E tr(Σ̂) Σ̂     = tr(Σ) Σ + 2 Σ² / n
//! E tr(Σ̂²) I    = tr(Σ²) I + (tr(Σ²) + tr(Σ)²) I / n
//! E tr(Σ̂)² I    = tr(Σ)² I + 2 tr(Σ²) I / n
//! E Σ̂ = Σ,  E tr(Σ̂) I = tr(Σ) I,  E I = I
//! ```
//!
//! so the span of these seven matrix functions is closed under the operator
//! and the bias operator acts as `(1/n) M` for an integer matrix `M`. States
//! are therefore polynomials in `ε = 1/n` with coefficients in any ring;
//! with integer coefficients every computation is exact.

use std::ops::Neg;

use num_traits::{Num, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg::SymMat;
use crate::scalar::Real;

/// Largest correction order accepted by [`quad_wishart_oracle`].
pub const MAX_ORACLE_ORDER: usize = 20;

/// The closed family of matrix functions of `Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadBasis {
    /// `Σ²`
    Square,
    /// `tr(Σ) Σ`
    TraceTimesSigma,
    /// `tr(Σ²) I`
    TraceOfSquare,
    /// `tr(Σ)² I`
    TraceSquared,
    /// `Σ`
    Sigma,
    /// `tr(Σ) I`
    Trace,
    /// `I`
    Identity,
}

impl QuadBasis {
    pub const ALL: [QuadBasis; 7] = [
        QuadBasis::Square,
        QuadBasis::TraceTimesSigma,
        QuadBasis::TraceOfSquare,
        QuadBasis::TraceSquared,
        QuadBasis::Sigma,
        QuadBasis::Trace,
        QuadBasis::Identity,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Evaluates this basis function at `Σ`.
    pub fn eval<T: Real>(self, sigma: &SymMat<T>) -> SymMat<T> {
        let d = sigma.dim();
        let tr = sigma.trace();
        match self {
            QuadBasis::Square => sigma.square(),
            QuadBasis::TraceTimesSigma => sigma.scale(tr),
            QuadBasis::TraceOfSquare => {
                SymMat::scaled_identity(d, sigma.as_slice().iter().map(|&x| x * x).sum())
            }
            QuadBasis::TraceSquared => SymMat::scaled_identity(d, tr * tr),
            QuadBasis::Sigma => sigma.clone(),
            QuadBasis::Trace => SymMat::scaled_identity(d, tr),
            QuadBasis::Identity => SymMat::identity(d),
        }
    }

    /// `n · 𝓑(self)` as `(coefficient, basis)` pairs with integer
    /// coefficients.
    fn bias_image(self) -> &'static [(u8, QuadBasis)] {
        match self {
            QuadBasis::Square => &[(1, QuadBasis::Square), (1, QuadBasis::TraceTimesSigma)],
            QuadBasis::TraceTimesSigma => &[(2, QuadBasis::Square)],
            QuadBasis::TraceOfSquare => {
                &[(1, QuadBasis::TraceOfSquare), (1, QuadBasis::TraceSquared)]
            }
            QuadBasis::TraceSquared => &[(2, QuadBasis::TraceOfSquare)],
            QuadBasis::Sigma | QuadBasis::Trace | QuadBasis::Identity => &[],
        }
    }
}

type Coeffs<C> = [C; 7];

fn zero_coeffs<C: Num + Clone>() -> Coeffs<C> {
    std::array::from_fn(|_| C::zero())
}

fn small<C: Num + Clone>(k: u8) -> C {
    (0..k).fold(C::zero(), |acc, _| acc + C::one())
}

/// A matrix-valued function of `Σ` in the closed quadratic family, as a
/// polynomial in `ε = 1/n`: `Σ_p ε^p Σ_b c[p][b] · b(Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadMomentState<C> {
    terms: Vec<Coeffs<C>>,
}

impl<C> QuadMomentState<C>
where
    C: Num + Clone + Neg<Output = C>,
{
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    /// The single basis function `b(Σ)`.
    pub fn basis(b: QuadBasis) -> Self {
        let mut c = zero_coeffs();
        c[b.index()] = C::one();
        Self { terms: vec![c] }
    }

    /// `f(Σ) = Σ²`.
    pub fn square() -> Self {
        Self::basis(QuadBasis::Square)
    }

    /// Coefficient of `ε^power · b(Σ)`.
    pub fn coefficient(&self, power: usize, b: QuadBasis) -> C {
        self.terms
            .get(power)
            .map_or_else(C::zero, |c| c[b.index()].clone())
    }

    /// Highest power of `1/n` present (including zero coefficients).
    pub fn degree(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }

    /// Lowest power of `1/n` carrying a nonzero coefficient; `None` for the
    /// zero state.
    pub fn min_inv_n_power(&self) -> Option<usize> {
        self.terms
            .iter()
            .position(|c| c.iter().any(|x| !x.is_zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.min_inv_n_power().is_none()
    }

    /// `𝓑 = 𝓣 − 𝓘` applied exactly.
    pub fn bias(&self) -> Self {
        let mut terms = vec![zero_coeffs(); self.terms.len() + 1];
        for (p, coeffs) in self.terms.iter().enumerate() {
            for b in QuadBasis::ALL {
                let c = &coeffs[b.index()];
                if c.is_zero() {
                    continue;
                }
                for &(m, target) in b.bias_image() {
                    let slot: &mut C = &mut terms[p + 1][target.index()];
                    *slot = slot.clone() + c.clone() * small::<C>(m);
                }
            }
        }
        Self { terms }.trimmed()
    }

    /// Wishart operator `𝓣 = 𝓘 + 𝓑`: `g ↦ E_Σ g(Σ̂)`.
    pub fn expectation(&self) -> Self {
        self.plus(&self.bias())
    }

    /// `𝓑^power`.
    pub fn bias_power(&self, power: usize) -> Self {
        (0..power).fold(self.clone(), |s, _| s.bias())
    }

    pub fn plus(&self, rhs: &Self) -> Self {
        let len = self.terms.len().max(rhs.terms.len());
        let terms = (0..len)
            .map(|p| {
                let mut c = zero_coeffs();
                for (i, slot) in c.iter_mut().enumerate() {
                    let a = self.terms.get(p).map_or_else(C::zero, |t| t[i].clone());
                    let b = rhs.terms.get(p).map_or_else(C::zero, |t| t[i].clone());
                    *slot = a + b;
                }
                c
            })
            .collect();
        Self { terms }.trimmed()
    }

    pub fn negated(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|c| std::array::from_fn(|i| -c[i].clone()))
                .collect(),
        }
    }

    /// Bias-reduced functional `g_k = Σ_{j≤k} (−1)^j 𝓑^j g`.
    pub fn bias_reduced(&self, k: usize) -> Self {
        let mut acc = Self::zero();
        let mut term = self.clone();
        for j in 0..=k {
            acc = if j % 2 == 0 {
                acc.plus(&term)
            } else {
                acc.plus(&term.negated())
            };
            term = term.bias();
        }
        acc
    }

    fn trimmed(mut self) -> Self {
        while self
            .terms
            .last()
            .is_some_and(|c| c.iter().all(|x| x.is_zero()))
        {
            self.terms.pop();
        }
        self
    }
}

impl<C> QuadMomentState<C>
where
    C: Num + Clone + Neg<Output = C> + ToPrimitive,
{
    /// Evaluates the state at `Σ` for sample size `n`.
    pub fn evaluate<T: Real>(&self, sigma: &SymMat<T>, n: usize) -> Result<SymMat<T>> {
        if n == 0 {
            return Err(Error::invalid("sample size must be at least 1"));
        }
        let inv_n = T::one() / T::from_usize(n).expect("n fits");
        let values: Vec<SymMat<T>> = QuadBasis::ALL.iter().map(|b| b.eval(sigma)).collect();
        let mut out = SymMat::zeros(sigma.dim());
        for (p, coeffs) in self.terms.iter().enumerate() {
            let scale = inv_n.powi(p as i32);
            for (c, v) in coeffs.iter().zip(&values) {
                if c.is_zero() {
                    continue;
                }
                let c = c
                    .to_f64()
                    .ok_or_else(|| Error::Overflow("coefficient not representable".into()))?;
                let w = T::lit(c) * scale;
                out = &out + &v.scale(w);
            }
        }
        Ok(out)
    }
}

/// Exact bias `E_Σ f_k(Σ̂) − Σ²` of the order-`k` bias-reduced estimator of
/// `f(x) = x²`, i.e. `(−1)^k 𝓑^{k+1}(x²)` evaluated at `Σ`.
pub fn quad_wishart_oracle<T: Real>(sigma: &SymMat<T>, n: usize, k: usize) -> Result<SymMat<T>> {
    if k > MAX_ORACLE_ORDER {
        return Err(Error::invalid(format!(
            "oracle order {k} exceeds {MAX_ORACLE_ORDER}"
        )));
    }
    quad_bias_state(k).evaluate(sigma, n)
}

/// The symbolic bias state `(−1)^k 𝓑^{k+1}(x²)` with exact integer
/// coefficients.
pub fn quad_bias_state(k: usize) -> QuadMomentState<i64> {
    let b = QuadMomentState::<i64>::square().bias_power(k + 1);
    if k.is_multiple_of(2) {
        b
    } else {
        b.negated()
    }
}
