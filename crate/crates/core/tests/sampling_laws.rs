mod common;

use common::random_spd;
use covfn::linalg::SymMat;
use covfn::sampling::{
    bootstrap_chain, gaussian_sample, is_psd, psd_factor, sample_covariance, RngStream,
};
use covfn::stats::Moments;

#[test]
fn sample_covariance_is_unbiased() {
    let sigma = SymMat::<f64>::from_rows(&[
        vec![2.0, 0.5, -0.3],
        vec![0.5, 1.0, 0.2],
        vec![-0.3, 0.2, 0.7],
    ])
    .unwrap();
    let factor = psd_factor(&sigma).unwrap();
    let root = RngStream::new(21, 0);
    let mut acc = vec![Moments::default(); 9];
    for m in 0..10_000 {
        let x = gaussian_sample(&factor, 4, &mut root.substream(m)).unwrap();
        let s = sample_covariance(&x);
        for (slot, &v) in acc.iter_mut().zip(s.as_slice()) {
            slot.push(v);
        }
    }
    for (idx, mom) in acc.iter().enumerate() {
        let target = sigma.as_slice()[idx];
        assert!(
            (mom.mean - target).abs() <= 5.0 * mom.std_err(),
            "entry {idx}: mean {} target {target} se {}",
            mom.mean,
            mom.std_err()
        );
    }
}

#[test]
fn large_sample_covariance_is_consistent() {
    let sigma = SymMat::<f64>::from_diag(&[1.0, 2.0]);
    let x = gaussian_sample(
        &psd_factor(&sigma).unwrap(),
        100_000,
        &mut RngStream::new(8, 3),
    )
    .unwrap();
    let s = sample_covariance(&x);
    // per-entry standard errors: Var(x_i x_j) / n
    let n = 100_000f64;
    let se = [
        (2.0 * 1.0f64 / n).sqrt(),
        (1.0 * 2.0 / n).sqrt(),
        (1.0 * 2.0 / n).sqrt(),
        (2.0 * 4.0 / n).sqrt(),
    ];
    for (idx, (&v, &t)) in s.as_slice().iter().zip(sigma.as_slice()).enumerate() {
        assert!((v - t).abs() <= 5.0 * se[idx], "entry {idx}: {v}");
    }
}

#[test]
fn unit_normals_obey_law_of_large_numbers() {
    let f = psd_factor(&SymMat::<f64>::identity(1)).unwrap();
    let x = gaussian_sample(&f, 100_000, &mut RngStream::new(1, 1)).unwrap();
    let values: Vec<f64> = (0..x.n()).map(|j| x.row(j)[0]).collect();
    let mom = Moments::from_slice(&values);
    assert!(
        mom.mean.abs() <= 4.0 / 100_000f64.sqrt(),
        "mean {}",
        mom.mean
    );
    assert!(
        (0.97..=1.03).contains(&mom.variance()),
        "variance {}",
        mom.variance()
    );
}

#[test]
fn chain_concentrates_for_large_n() {
    let seg = bootstrap_chain(
        &SymMat::<f64>::identity(5),
        1,
        100_000,
        &mut RngStream::new(2, 2),
    )
    .unwrap();
    let err = (&seg.states()[1] - &SymMat::identity(5)).max_abs();
    assert!(err <= 0.05, "deviation {err}");
}

#[test]
fn chain_states_stay_psd() {
    let root = RngStream::new(99, 0);
    for run in 0..1000u64 {
        let mut rng = root.substream(run);
        let d = 1 + (run as usize % 20);
        let n = d + 5 + (run as usize % 7);
        let k = 1 + (run as usize % 3);
        let start = random_spd(d, 0.1, 4.0, &mut rng);
        let seg = bootstrap_chain(&start, k, n, &mut rng).unwrap();
        assert_eq!(seg.states().len(), k + 1);
        for state in seg.states() {
            assert!(is_psd(state).unwrap(), "run {run}: state left the PSD cone");
        }
    }
}

#[test]
fn chain_segments_reproduce_bitwise() {
    let start = SymMat::<f64>::from_diag(&[1.0, 0.5, 2.0]);
    let a = bootstrap_chain(&start, 3, 12, &mut RngStream::new(5, 9)).unwrap();
    let b = bootstrap_chain(&start, 3, 12, &mut RngStream::new(5, 9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.stream(), (5, 9));
    let c = bootstrap_chain(&start, 3, 12, &mut RngStream::new(5, 10)).unwrap();
    assert_ne!(a.states()[1], c.states()[1]);
}

#[test]
fn neighbouring_streams_are_uncorrelated() {
    let mut s0 = RngStream::new(0, 0);
    let mut s1 = RngStream::new(0, 1);
    let n = 10_000;
    let a: Vec<f64> = (0..n).map(|_| s0.standard_normal()).collect();
    let b: Vec<f64> = (0..n).map(|_| s1.standard_normal()).collect();
    let (ma, mb) = (Moments::from_slice(&a), Moments::from_slice(&b));
    let cov: f64 = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - ma.mean) * (y - mb.mean))
        .sum::<f64>()
        / (n - 1) as f64;
    let corr = cov / (ma.std_dev() * mb.std_dev());
    assert!(corr.abs() < 0.03, "correlation {corr}");
}
