//! Estimators of `⟨f(Σ), B⟩`: plug-in, bootstrap-chain bias reduction,
//! asymptotic standard deviation and normal confidence intervals.

mod wishart;

use rayon::prelude::*;

pub use wishart::{
    quad_bias_state, quad_wishart_oracle, QuadBasis, QuadMomentState, MAX_ORACLE_ORDER,
};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_scalar_function, default_loewner_tol, eigh, loewner_first_difference,
    trace_inner_product, ScalarFunction, SpectralDecomp, SymMat, PSD_REL_TOL,
};
use crate::sampling::{bootstrap_chain, sample_covariance, DataMatrix, RngStream};
use crate::scalar::Real;
use crate::stats::normal_quantile;

/// Largest correction order whose weights fit in `i64`.
pub const MAX_WEIGHT_ORDER: usize = 62;

/// Largest fraction of bootstrap chains allowed to leave the domain of `f`.
pub const MAX_CHAIN_FAILURE_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Plugin,
    BiasReduced { k: usize },
}

/// Point estimate with its uncertainty summaries and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport<T> {
    pub functional_value: T,
    pub kind: EstimatorKind,
    /// Monte Carlo standard error from the chain replicates (0 when no
    /// chains were simulated).
    pub mc_stderr: T,
    /// Plug-in `σ_f(Σ̂; B)`.
    pub sigma_hat: T,
    pub ci: (T, T),
    pub alpha: f64,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub chains: usize,
    /// Chains dropped because a state left the domain of `f`.
    pub chain_failures: usize,
    /// `(master_seed, stream_id)` of the stream chains were drawn from.
    pub stream: Option<(u64, u64)>,
}

/// `c_{k,i} = (−1)^i C(k+1, i+1)` for `i = 0..=k`.
///
/// These collapse `Σ_{j≤k} (−1)^j 𝓑^j f` onto a single chain:
/// `f_k(Σ̂) = E Σ_i c_{k,i} f(Σ̂^(i))`.
pub fn hockey_stick_weights(k: usize) -> Result<Vec<i64>> {
    if k > MAX_WEIGHT_ORDER {
        return Err(Error::Overflow(format!(
            "weights for k = {k} exceed 64-bit range (max {MAX_WEIGHT_ORDER})"
        )));
    }
    let m = (k + 1) as u128;
    let mut out = Vec::with_capacity(k + 1);
    // C(m, 1), C(m, 2), ... by the multiplicative recurrence
    let mut binom: u128 = 1;
    for i in 0..=k {
        let r = (i + 1) as u128;
        binom = binom * (m - r + 1) / r;
        let v = i64::try_from(binom).map_err(|_| Error::Overflow(format!("C({m}, {r})")))?;
        out.push(if i % 2 == 0 { v } else { -v });
    }
    Ok(out)
}

/// Symmetric normal interval `point ± z_{1−α/2} σ̂ / √n`.
pub fn confidence_interval<T: Real>(
    point: T,
    sigma_hat: T,
    n: usize,
    alpha: f64,
) -> Result<(T, T)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadAlpha(alpha));
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    if sigma_hat.is_nan() || sigma_hat < T::zero() {
        return Err(Error::invalid("sigma_hat must be nonnegative"));
    }
    let z = T::lit(normal_quantile(1.0 - alpha / 2.0));
    let half = z * sigma_hat / T::from_usize(n).expect("n fits").sqrt();
    Ok((point - half, point + half))
}

fn check_psd<T: Real>(decomp: &SpectralDecomp<T>) -> Result<()> {
    let min = decomp.min_eigenvalue();
    if min < -T::lit(PSD_REL_TOL) * decomp.spectral_radius() {
        return Err(Error::NotPsd {
            min_eigenvalue: min.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `σ_f(Σ; B) = √2 ‖Σ^{1/2} Df(Σ; B) Σ^{1/2}‖₂` from a precomputed
/// decomposition of `Σ`.
///
/// In the eigenbasis `Σ^{1/2} Df Σ^{1/2}` has entries
/// `√(λ_i λ_j) L_ij B̃_ij`, so no square root of `Σ` is formed.
pub fn sigma_f_from_decomp<T: Real>(
    decomp: &SpectralDecomp<T>,
    f: &ScalarFunction<T>,
    b: &SymMat<T>,
) -> Result<T> {
    check_psd(decomp)?;
    let eigs = decomp.eigenvalues();
    let loewner = loewner_first_difference(eigs, f, default_loewner_tol(eigs))?;
    let rotated = decomp.to_eigenbasis(b)?;
    let mut acc = T::zero();
    for (i, &li) in eigs.iter().enumerate() {
        let li = li.max(T::zero());
        for (j, &lj) in eigs.iter().enumerate() {
            let lj = lj.max(T::zero());
            let v = loewner.get(i, j) * rotated.get(i, j);
            acc += li * lj * v * v;
        }
    }
    Ok(T::lit(2.0).sqrt() * acc.sqrt())
}

pub fn sigma_f<T: Real>(sigma: &SymMat<T>, f: &ScalarFunction<T>, b: &SymMat<T>) -> Result<T> {
    sigma_f_from_decomp(&eigh(sigma)?, f, b)
}

fn functional<T: Real>(
    decomp: &SpectralDecomp<T>,
    f: &ScalarFunction<T>,
    b: &SymMat<T>,
) -> Result<T> {
    trace_inner_product(&apply_scalar_function(decomp, f)?, b)
}

fn functional_at<T: Real>(a: &SymMat<T>, f: &ScalarFunction<T>, b: &SymMat<T>) -> Result<T> {
    functional(&eigh(a)?, f, b)
}

fn check_inputs<T: Real>(x: &DataMatrix<T>, b: &SymMat<T>) -> Result<()> {
    if b.dim() != x.d() {
        return Err(Error::DimMismatch {
            expected: x.d(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Plug-in estimate `⟨f(Σ̂), B⟩`.
pub fn plugin_estimate<T: Real>(
    x: &DataMatrix<T>,
    f: &ScalarFunction<T>,
    b: &SymMat<T>,
    alpha: f64,
) -> Result<EstimateReport<T>> {
    check_inputs(x, b)?;
    let sigma_hat_mat = sample_covariance(x);
    let decomp = eigh(&sigma_hat_mat)?;
    let value = functional(&decomp, f, b)?;
    let sigma_hat = sigma_f_from_decomp(&decomp, f, b)?;
    let ci = confidence_interval(value, sigma_hat, x.n(), alpha)?;
    Ok(EstimateReport {
        functional_value: value,
        kind: EstimatorKind::Plugin,
        mc_stderr: T::zero(),
        sigma_hat,
        ci,
        alpha,
        n: x.n(),
        d: x.d(),
        k: 0,
        chains: 0,
        chain_failures: 0,
        stream: None,
    })
}

/// Bias-reduced estimate `⟨f_k(Σ̂), B⟩` by Monte Carlo over `chains`
/// independent bootstrap chains started at `Σ̂`.
///
/// Chain `r` (1-based) draws from `rng.substream(r)`, so results do not
/// depend on thread scheduling. With `k = 0` no chains are simulated and the
/// result equals [`plugin_estimate`].
pub fn bias_reduced_estimate<T: Real>(
    x: &DataMatrix<T>,
    f: &ScalarFunction<T>,
    b: &SymMat<T>,
    k: usize,
    chains: usize,
    rng: &RngStream,
    alpha: f64,
) -> Result<EstimateReport<T>> {
    let mut report = plugin_estimate(x, f, b, alpha)?;
    report.kind = EstimatorKind::BiasReduced { k };
    report.k = k;
    if k == 0 {
        return Ok(report);
    }
    if chains == 0 {
        return Err(Error::invalid("bias reduction needs at least one chain"));
    }

    let weights: Vec<T> = hockey_stick_weights(k)?
        .into_iter()
        .map(|w| T::from_i64(w).expect("weight fits"))
        .collect();
    let start = sample_covariance(x);
    let plugin_value = report.functional_value;
    let n = x.n();

    let replicates: Vec<Result<Option<T>>> = (1..=chains as u64)
        .into_par_iter()
        .map(|r| {
            let mut stream = rng.substream(r);
            let seg = bootstrap_chain(&start, k, n, &mut stream)?;
            let mut y = weights[0] * plugin_value;
            for (w, state) in weights.iter().zip(seg.states()).skip(1) {
                match functional_at(state, f, b) {
                    Ok(v) => y += *w * v,
                    Err(Error::Domain { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(Some(y))
        })
        .collect();

    let mut values = Vec::with_capacity(chains);
    let mut failures = 0usize;
    for r in replicates {
        match r? {
            Some(v) => values.push(v),
            None => failures += 1,
        }
    }
    if failures as f64 > MAX_CHAIN_FAILURE_RATE * chains as f64 || values.is_empty() {
        return Err(Error::ChainFailures {
            function: f.to_string(),
            failed: failures,
            total: chains,
        });
    }

    let count = T::from_usize(values.len()).expect("count fits");
    let mean = values.iter().copied().sum::<T>() / count;
    let mc_stderr = if values.len() > 1 {
        let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
        (ss / (count - T::one()) / count).sqrt()
    } else {
        T::zero()
    };

    report.functional_value = mean;
    report.mc_stderr = mc_stderr;
    report.ci = confidence_interval(mean, report.sigma_hat, n, alpha)?;
    report.chains = chains;
    report.chain_failures = failures;
    report.stream = Some((rng.master_seed(), rng.stream_id()));
    Ok(report)
}
