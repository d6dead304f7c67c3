#![allow(dead_code)]

use covfn::linalg::{eigh, SymMat};
use covfn::sampling::RngStream;
use proptest::prelude::*;

/// Symmetric matrix with entries uniform in `[-scale, scale]`.
pub fn random_symmetric(d: usize, scale: f64, rng: &mut RngStream) -> SymMat<f64> {
    SymMat::from_upper_fn(d, |_, _| scale * (2.0 * rng.uniform() - 1.0))
}

/// Random rotation of an equispaced spectrum in `[lo, hi]`.
pub fn random_spd(d: usize, lo: f64, hi: f64, rng: &mut RngStream) -> SymMat<f64> {
    let basis = eigh(&random_symmetric(d, 1.0, rng)).unwrap();
    let spectrum: Vec<f64> = (0..d)
        .map(|i| lo + (hi - lo) * i as f64 / (d.max(2) - 1) as f64)
        .collect();
    basis.recompose_with(&spectrum)
}

/// Random direction normalized to unit Frobenius norm.
pub fn random_unit(d: usize, rng: &mut RngStream) -> SymMat<f64> {
    let h = random_symmetric(d, 1.0, rng);
    let norm = h.frobenius();
    h.scale(1.0 / norm)
}

pub fn max_abs_diff(a: &SymMat<f64>, b: &SymMat<f64>) -> f64 {
    (a - b).max_abs()
}

/// Strategy for symmetric matrices of dimension `1..=max_d`.
pub fn sym_strategy(max_d: usize) -> impl Strategy<Value = SymMat<f64>> {
    (1..=max_d).prop_flat_map(|d| {
        prop::collection::vec(-10.0f64..10.0, d * d)
            .prop_map(move |v| SymMat::from_row_major(d, &v).unwrap())
    })
}

/// Strategy for SPD matrices with spectrum in `[lo, hi]` and dimension
/// `2..=max_d`, driven by a seed.
pub fn spd_strategy(max_d: usize, lo: f64, hi: f64) -> impl Strategy<Value = (SymMat<f64>, u64)> {
    (2..=max_d, any::<u64>()).prop_map(move |(d, seed)| {
        let mut rng = RngStream::new(seed, 0);
        (random_spd(d, lo, hi, &mut rng), seed)
    })
}
