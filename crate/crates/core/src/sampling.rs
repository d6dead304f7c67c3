//! Seeded Gaussian sampling, sample covariances and the bootstrap chain.
//!
//! Random streams are ChaCha8 generators keyed by `(master_seed, stream_id)`:
//! the master seed is expanded into the key and the stream id selects the
//! ChaCha stream, so distinct pairs never share keystream. Standard normals
//! come from the `rand_distr` ziggurat sampler. Changing either choice
//! changes every seeded output, so both are fixed for the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eigh, Mat, SymMat, PSD_REL_TOL};
use crate::scalar::Real;

/// Negative-eigenvalue tolerance (relative to `1 + ‖Σ‖`) accepted by
/// [`psd_factor`]; smaller negatives are clipped to zero.
pub const FACTOR_NEG_TOL: f64 = 1e-8;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A reproducible random stream identified by `(master_seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            rng,
        }
    }

    #[inline]
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    #[inline]
    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream `index`, a pure function of this stream's identity
    /// (not of how much of it has been consumed).
    pub fn substream(&self, index: u64) -> RngStream {
        let derived = splitmix64(self.master_seed ^ splitmix64(self.stream_id).rotate_left(23));
        RngStream::new(derived, index)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Symmetric square root of a clipped PSD matrix: `F Fᵀ = Σ_clipped`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdFactor<T> {
    factor: SymMat<T>,
    clipped_mass: T,
}

impl<T: Real> PsdFactor<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    #[inline]
    pub fn factor(&self) -> &SymMat<T> {
        &self.factor
    }

    /// Sum of the negative eigenvalues that were zeroed (≤ 0).
    #[inline]
    pub fn clipped_mass(&self) -> T {
        self.clipped_mass
    }
}

/// `F = U diag(√max(λ, 0)) Uᵀ`.
pub fn psd_factor<T: Real>(sigma: &SymMat<T>) -> Result<PsdFactor<T>> {
    let decomp = eigh(sigma)?;
    let norm = decomp.spectral_radius();
    let min = decomp.min_eigenvalue();
    if min < -T::lit(FACTOR_NEG_TOL) * (T::one() + norm) {
        return Err(Error::NotPsd {
            min_eigenvalue: min.to_f64_lossy(),
        });
    }
    let clipped_mass = decomp
        .eigenvalues()
        .iter()
        .filter(|&&l| l < T::zero())
        .copied()
        .sum();
    let factor = decomp.map_spectrum(|l| l.max(T::zero()).sqrt());
    Ok(PsdFactor {
        factor,
        clipped_mass,
    })
}

/// `n` observations of a `d`-dimensional vector, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T> {
    rows: Mat<T>,
}

impl<T: Real> DataMatrix<T> {
    pub fn new(rows: Mat<T>) -> Result<Self> {
        if rows.rows() == 0 {
            return Err(Error::invalid("data matrix needs at least one row"));
        }
        if let Some(pos) = rows.as_slice().iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / rows.cols().max(1),
                col: pos % rows.cols().max(1),
            });
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(n * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::new(Mat::from_row_major(n, d, flat)?)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.rows.rows()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.rows.cols()
    }

    #[inline]
    pub fn row(&self, j: usize) -> &[T] {
        self.rows.row(j)
    }

    #[inline]
    pub fn matrix(&self) -> &Mat<T> {
        &self.rows
    }
}

/// `n` i.i.d. rows `X_j = F Z_j`, `Z_j ~ N(0, I_d)`.
pub fn gaussian_sample<T: Real>(
    factor: &PsdFactor<T>,
    n: usize,
    rng: &mut RngStream,
) -> Result<DataMatrix<T>> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let d = factor.dim();
    let f = factor.factor();
    let mut rows = Mat::zeros(n, d);
    let mut z = vec![T::zero(); d];
    for j in 0..n {
        for zi in z.iter_mut() {
            *zi = T::lit(rng.standard_normal());
        }
        let row = rows.row_mut(j);
        for (i, out) in row.iter_mut().enumerate() {
            let fi = &f.as_slice()[i * d..(i + 1) * d];
            *out = fi.iter().zip(&z).map(|(&a, &b)| a * b).sum();
        }
    }
    DataMatrix::new(rows)
}

/// `Σ̂ = n⁻¹ Σ_j X_j X_jᵀ` (no mean-centering).
pub fn sample_covariance<T: Real>(x: &DataMatrix<T>) -> SymMat<T> {
    let d = x.d();
    let n = x.n();
    let mut acc = vec![T::zero(); d * d];
    for j in 0..n {
        let r = x.row(j);
        for a in 0..d {
            let ra = r[a];
            if ra == T::zero() {
                continue;
            }
            for b in a..d {
                acc[a * d + b] += ra * r[b];
            }
        }
    }
    let inv_n = T::one() / T::from_usize(n).expect("sample size fits");
    SymMat::from_upper_fn(d, |a, b| acc[a * d + b] * inv_n)
}

/// A realized segment `Σ̂^(0), …, Σ̂^(k)` of the bootstrap chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSegment<T> {
    states: Vec<SymMat<T>>,
    n_per_step: usize,
    master_seed: u64,
    stream_id: u64,
}

impl<T: Real> ChainSegment<T> {
    #[inline]
    pub fn states(&self) -> &[SymMat<T>] {
        &self.states
    }

    #[inline]
    pub fn start(&self) -> &SymMat<T> {
        &self.states[0]
    }

    /// Chain length `k` (number of transitions).
    #[inline]
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    #[inline]
    pub fn n_per_step(&self) -> usize {
        self.n_per_step
    }

    /// `(master_seed, stream_id)` of the stream that drove the chain.
    #[inline]
    pub fn stream(&self) -> (u64, u64) {
        (self.master_seed, self.stream_id)
    }
}

/// Simulates `k` steps of the bootstrap chain: each state is the sample
/// covariance of `n` draws from `N(0, previous state)`.
pub fn bootstrap_chain<T: Real>(
    start: &SymMat<T>,
    k: usize,
    n: usize,
    rng: &mut RngStream,
) -> Result<ChainSegment<T>> {
    if n == 0 {
        return Err(Error::invalid("chain sample size must be at least 1"));
    }
    let (master_seed, stream_id) = (rng.master_seed(), rng.stream_id());
    let mut states = Vec::with_capacity(k + 1);
    states.push(start.clone());
    for t in 0..k {
        let factor = psd_factor(&states[t])?;
        let x = gaussian_sample(&factor, n, rng)?;
        states.push(sample_covariance(&x));
    }
    Ok(ChainSegment {
        states,
        n_per_step: n,
        master_seed,
        stream_id,
    })
}

/// True when the smallest eigenvalue is at least `-PSD_REL_TOL · ‖A‖`.
pub fn is_psd<T: Real>(a: &SymMat<T>) -> Result<bool> {
    let eigs = crate::linalg::eigvalsh(a)?;
    let (lo, hi) = match (eigs.first(), eigs.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Ok(true),
    };
    let norm = lo.abs().max(hi.abs());
    Ok(lo >= -T::lit(PSD_REL_TOL) * norm)
}
