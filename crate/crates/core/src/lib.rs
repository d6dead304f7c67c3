//! Estimation of smooth functionals `⟨f(Σ), B⟩` of a covariance matrix from
//! centered Gaussian samples.
//!
//! The crate provides the plug-in estimator, a bias-reduced estimator built
//! on Monte Carlo simulation of the bootstrap chain of sample covariances,
//! the asymptotic standard deviation `σ_f(Σ; B)`, and simulation studies for
//! bias decay, normal approximation and operator-norm concentration.
//!
//! Numerical code is generic over [`Real`] (`f32`/`f64`); the exact
//! Wishart-moment oracle is generic over any ring of coefficients
//! (integers, rationals, floats). Concrete aliases for the common `f64`
//! instantiation live at the crate root.

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod sampling;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SymMat64 = linalg::SymMat<f64>;
pub type SymMat32 = linalg::SymMat<f32>;
pub type SpectralDecomp64 = linalg::SpectralDecomp<f64>;
pub type ScalarFunction64 = linalg::ScalarFunction<f64>;
pub type DataMatrix64 = sampling::DataMatrix<f64>;
pub type ChainSegment64 = sampling::ChainSegment<f64>;
pub type EstimateReport64 = estimators::EstimateReport<f64>;
/// Exact Wishart moment state with integer coefficients in powers of `1/n`.
pub type QuadMomentStateExact = estimators::QuadMomentState<i64>;

/// Crate version embedded in every output artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
