//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run alone with `cargo test -p covfn-cli --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use covfn::estimators::{
    bias_reduced_estimate, hockey_stick_weights, plugin_estimate, quad_wishart_oracle,
};
use covfn::experiments::{
    run_bias_scaling, run_coverage, run_opnorm, run_quadform, BSpec, ExperimentConfig,
    ExperimentKind, ResultTable, SigmaSpec,
};
use covfn::linalg::{
    eigh, frechet_derivative_default, matrix_function, trace_inner_product, ScalarFunction, SymMat,
};
use covfn::sampling::{gaussian_sample, psd_factor, sample_covariance, RngStream};
use covfn::stats::{ls_slope, Moments};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_spd(d: usize, lo: f64, hi: f64, rng: &mut RngStream) -> SymMat<f64> {
    let g = SymMat::from_upper_fn(d, |_, _| rng.standard_normal());
    let spectrum: Vec<f64> = (0..d)
        .map(|i| lo + (hi - lo) * i as f64 / (d - 1) as f64)
        .collect();
    eigh(&g).unwrap().recompose_with(&spectrum)
}

fn random_unit(d: usize, rng: &mut RngStream) -> SymMat<f64> {
    let h = SymMat::from_upper_fn(d, |_, _| rng.standard_normal());
    let norm = h.frobenius();
    h.scale(1.0 / norm)
}

fn column(t: &ResultTable, name: &str) -> Vec<f64> {
    t.column_f64(name)
        .unwrap()
        .into_iter()
        .map(|v| v.unwrap_or(f64::NAN))
        .collect()
}

fn base_config(experiment: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        d: vec![1],
        n: vec![1],
        k: vec![0],
        f: ScalarFunction::Square,
        b: BSpec::RankOne(0),
        sigma: SigmaSpec::Identity,
        m: 1,
        chains: 1,
        alpha: 0.05,
        seed: 20_240_601,
    }
}

fn derivative_correctness() -> Outcome {
    let fs = [
        ScalarFunction::Square,
        ScalarFunction::Cube,
        ScalarFunction::Log,
        ScalarFunction::Exp,
        ScalarFunction::smoothstep(1.0, 2.0, 0.5).unwrap(),
    ];
    let mut rng = RngStream::new(1, 0);
    let sigma = random_spd(15, 0.5, 3.0, &mut rng);
    let decomp = eigh(&sigma).unwrap();
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for f in &fs {
        for _ in 0..20 {
            let h = random_unit(15, &mut rng);
            let df = frechet_derivative_default(&decomp, f, &h).unwrap();
            let plus = matrix_function(&(&sigma + &h.scale(step)), f).unwrap();
            let minus = matrix_function(&(&sigma - &h.scale(step)), f).unwrap();
            let fd = (&plus - &minus).scale(0.5 / step);
            worst = worst.max((&fd - &df).max_abs() / (1.0 + df.max_abs()));
        }
    }
    outcome(
        worst <= 1e-6,
        format!("worst relative error {worst:.3e} (<= 1e-6)"),
    )
}

fn quadratic_bias_identity() -> Outcome {
    let sigma = SymMat::<f64>::from_diag(&[1.0, 2.0, 3.0]);
    let n = 50;
    let reps = 200_000u64;
    let factor = psd_factor(&sigma).unwrap();
    let sq = sigma.square();
    let root = RngStream::new(2, 0);
    let mut acc = vec![Moments::default(); 9];
    for m in 0..reps {
        let s = sample_covariance(&gaussian_sample(&factor, n, &mut root.substream(m)).unwrap());
        let diff = &s.square() - &sq;
        for (mom, &v) in acc.iter_mut().zip(diff.as_slice()) {
            mom.push(v);
        }
    }
    let expected = (&sigma.scale(sigma.trace()) + &sq).scale(1.0 / n as f64);
    let mut worst_z: f64 = 0.0;
    for (mom, &t) in acc.iter().zip(expected.as_slice()) {
        let se = mom.std_err();
        let z = if se > 0.0 {
            (mom.mean - t).abs() / se
        } else {
            0.0
        };
        worst_z = worst_z.max(z);
    }
    outcome(
        worst_z <= 5.0,
        format!("max |mean - closed form| = {worst_z:.2} stderr (<= 5)"),
    )
}

/// `Σ_{j=i}^{k} (−1)^j (−1)^{j−i} C(j, i)` with `C` from Pascal's triangle.
fn brute_force_weights(k: usize) -> Vec<i64> {
    let mut pascal: Vec<Vec<i64>> = vec![vec![1]];
    for j in 1..=k {
        let prev = pascal[j - 1].clone();
        pascal.push(
            (0..=j)
                .map(|i| {
                    if i == 0 || i == j {
                        1
                    } else {
                        prev[i - 1] + prev[i]
                    }
                })
                .collect(),
        );
    }
    (0..=k)
        .map(|i| {
            (i..=k)
                .map(|j| {
                    if (2 * j - i) % 2 == 0 {
                        pascal[j][i]
                    } else {
                        -pascal[j][i]
                    }
                })
                .sum()
        })
        .collect()
}

fn weight_oracle() -> Outcome {
    let exact = (0..=6).all(|k| hockey_stick_weights(k).unwrap() == brute_force_weights(k));
    let sums = (0..=62).all(|k| hockey_stick_weights(k).unwrap().iter().sum::<i64>() == 1);
    outcome(
        exact && sums,
        format!("brute-force match k<=6: {exact}; unit sums k<=62: {sums}"),
    )
}

fn order_zero_degeneracy() -> Outcome {
    let root = RngStream::new(4, 0);
    let fs = [
        ScalarFunction::Square,
        ScalarFunction::Log,
        ScalarFunction::Exp,
        ScalarFunction::Identity,
    ];
    let mut mismatches = 0;
    for i in 0..100u64 {
        let mut rng = root.substream(i);
        let d = 2 + (i as usize % 7);
        let n = d + 5 + (i as usize % 13);
        let sigma = random_spd(d, 0.5, 2.5, &mut rng);
        let x = gaussian_sample(&psd_factor(&sigma).unwrap(), n, &mut rng).unwrap();
        let b = SymMat::from_upper_fn(d, |_, _| rng.standard_normal());
        let f = &fs[i as usize % fs.len()];
        let plug = plugin_estimate(&x, f, &b, 0.05).unwrap();
        let red = bias_reduced_estimate(&x, f, &b, 0, 200, &rng, 0.05).unwrap();
        let same = red.functional_value == plug.functional_value
            && red.ci == plug.ci
            && red.sigma_hat == plug.sigma_hat;
        mismatches += usize::from(!same);
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} of 100 inputs differ"),
    )
}

fn bias_reduction_rate() -> Outcome {
    let sigma = SymMat::from_diag(&(0..10).map(|i| 1.0 + i as f64 / 9.0).collect::<Vec<_>>());
    let b = SymMat::unit_rank_one(10, 0);
    let ns = [50usize, 100, 200, 400, 800];
    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 0..=2 {
        let log_bias: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let o = quad_wishart_oracle(&sigma, n, k).unwrap();
                trace_inner_product(&o, &b).unwrap().abs().ln()
            })
            .collect();
        let slope = ls_slope(&log_n, &log_bias).unwrap();
        pass &= (slope + (k as f64 + 1.0)).abs() <= 0.05;
        parts.push(format!("k={k}: {slope:.4}"));
    }
    outcome(
        pass,
        format!("slopes {} (target -(k+1) +/- 0.05)", parts.join(", ")),
    )
}

fn mc_oracle_agreement() -> Outcome {
    let mut cfg = base_config(ExperimentKind::BiasScaling);
    cfg.d = vec![5];
    cfg.n = vec![100];
    cfg.k = vec![1];
    cfg.sigma = SigmaSpec::Linspace { lo: 1.0, hi: 2.0 };
    cfg.m = 5000;
    cfg.chains = 200;
    let t = run_bias_scaling(&cfg).unwrap();
    let (mc, se, oracle) = (
        column(&t, "bias_mc")[0],
        column(&t, "stderr")[0],
        column(&t, "bias_oracle")[0],
    );
    let failures = column(&t, "failures")[0];
    let z = (mc - oracle).abs() / se;
    outcome(
        z <= 5.0 && failures == 0.0,
        format!("bias_mc {mc:.4e}, oracle {oracle:.4e}, stderr {se:.2e}: {z:.2} stderr (<= 5)"),
    )
}

fn normal_approximation() -> Outcome {
    let mut cfg = base_config(ExperimentKind::Coverage);
    cfg.d = vec![10];
    cfg.n = vec![500];
    cfg.k = vec![1];
    cfg.sigma = SigmaSpec::Spiked {
        base: 1.0,
        spikes: vec![2.0],
    };
    cfg.m = 2000;
    cfg.chains = 200;
    let t = run_coverage(&cfg).unwrap();
    let ks = column(&t, "ks_distance")[0];
    let cov = column(&t, "coverage")[0];
    let practical = column(&t, "coverage_practical")[0];
    outcome(
        ks <= 0.06 && (0.92..=0.975).contains(&cov),
        format!("KS {ks:.4} (<= 0.06), coverage {cov:.4} in [0.92, 0.975], plug-in coverage {practical:.4}"),
    )
}

fn opnorm_concentration() -> Outcome {
    let mut cfg = base_config(ExperimentKind::OpNorm);
    cfg.d = vec![5, 20, 80];
    cfg.n = vec![200];
    cfg.m = 500;
    let t = run_opnorm(&cfg).unwrap();
    let ratios = column(&t, "ratio");
    let pass = ratios.iter().all(|r| (0.5..=4.0).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    outcome(pass, format!("ratios [{}] in [0.5, 4]", shown.join(", ")))
}

fn quadratic_form_law() -> Outcome {
    let literal_critical = 1.95 * (2.0f64 / 1e4).sqrt();
    let mut pass = true;
    let mut parts = Vec::new();
    for seed in [11u64, 12, 13] {
        let mut cfg = base_config(ExperimentKind::QuadForm);
        cfg.d = vec![5];
        cfg.m = 10_000;
        cfg.b = BSpec::Random;
        cfg.sigma = SigmaSpec::Random { lo: 0.5, hi: 2.0 };
        cfg.seed = seed;
        let t = run_quadform(&cfg).unwrap();
        let ks = column(&t, "ks_stat")[0];
        let critical = column(&t, "critical")[0].min(literal_critical);
        pass &= ks < critical;
        parts.push(format!("{ks:.4}"));
    }
    outcome(
        pass,
        format!(
            "KS [{}] below {:.4}",
            parts.join(", "),
            literal_critical.min(covfn::stats::ks_two_sample_critical(0.001, 10_000, 10_000),)
        ),
    )
}

fn run_binary(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_covfn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!(
            "{args:?} exited with {:?}: {}",
            status.status.code(),
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn numeric_cells(bytes: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(bytes)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .flat_map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
        .collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    let mut rng = RngStream::new(10, 0);
    let rows: String = (0..40)
        .map(|_| {
            let v: Vec<String> = (0..3)
                .map(|_| format!("{}", rng.standard_normal()))
                .collect();
            v.join(",") + "\n"
        })
        .collect();
    std::fs::write(&data, rows).unwrap();
    let data = data.to_str().unwrap().to_string();
    let config = dir.path().join("study.cfg");
    std::fs::write(
        &config,
        "experiment=coverage\nd=3\nn=40\nk=1\nfn=square\nB=rank1:0\nM=30\nN=20\n",
    )
    .unwrap();
    let config = config.to_str().unwrap().to_string();

    let invocations: Vec<Vec<String>> = vec![
        vec![
            "estimate", "--data", &data, "--fn", "identity", "--B", "rank1:0",
        ],
        vec![
            "estimate", "--data", &data, "--fn", "square", "--k", "2", "--chains", "50",
        ],
        vec![
            "estimate", "--data", &data, "--fn", "log", "--k", "1", "--format", "json",
        ],
        vec!["simulate", "--config", &config],
        vec!["simulate", "--config", &config, "--format", "json"],
        vec![
            "simulate",
            "--experiment",
            "bias_scaling",
            "--d",
            "2",
            "--n",
            "20,40",
            "--k",
            "0,1",
            "--fn",
            "square",
            "--M",
            "20",
            "--N",
            "10",
        ],
        vec![
            "simulate",
            "--experiment",
            "opnorm",
            "--d",
            "4",
            "--n",
            "30",
            "--M",
            "20",
        ],
        vec![
            "simulate",
            "--experiment",
            "quadform",
            "--d",
            "3",
            "--n",
            "1",
            "--B",
            "random",
            "--sigma",
            "random:0.5,2",
            "--M",
            "500",
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();

    let mut problems = Vec::new();
    for (i, inv) in invocations.iter().enumerate() {
        let args: Vec<&str> = inv.iter().map(String::as_str).collect();
        let run = |seed: &str, tag: &str| {
            let mut a = args.clone();
            a.extend(["--seed", seed]);
            run_binary(&a, &dir.path().join(format!("out{i}{tag}")))
        };
        match (run("7", "a"), run("7", "b"), run("8", "c")) {
            (Ok(a), Ok(b), Ok(c)) => {
                if a != b {
                    problems.push(format!("invocation {i}: repeated output differs"));
                }
                if numeric_cells(&a) == numeric_cells(&c) {
                    problems.push(format!(
                        "invocation {i}: seed change left all cells unchanged"
                    ));
                }
            }
            (a, b, c) => {
                for r in [a, b, c] {
                    if let Err(e) = r {
                        problems.push(e);
                    }
                }
            }
        }
    }
    let n = invocations.len();
    if problems.is_empty() {
        outcome(
            true,
            format!("{n} invocations byte-identical on repeat, all seed-sensitive"),
        )
    } else {
        outcome(false, problems.join("; "))
    }
}

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (
            1,
            "derivative correctness",
            Duration::from_secs(5),
            derivative_correctness,
        ),
        (
            2,
            "quadratic bias identity",
            Duration::from_secs(120),
            quadratic_bias_identity,
        ),
        (3, "weight oracle", Duration::MAX, weight_oracle),
        (4, "k = 0 degeneracy", Duration::MAX, order_zero_degeneracy),
        (
            5,
            "bias-reduction rate",
            Duration::from_secs(1),
            bias_reduction_rate,
        ),
        (
            6,
            "MC/oracle agreement",
            Duration::from_secs(600),
            mc_oracle_agreement,
        ),
        (
            7,
            "normal approximation and coverage",
            Duration::from_secs(900),
            normal_approximation,
        ),
        (
            8,
            "operator-norm concentration",
            Duration::from_secs(180),
            opnorm_concentration,
        ),
        (
            9,
            "quadratic-form law",
            Duration::from_secs(30),
            quadratic_form_law,
        ),
        (10, "determinism", Duration::MAX, determinism),
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();

    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let started = Instant::now();
        let result = check();
        let elapsed = started.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.pass && in_time;
        failed += usize::from(!pass);
        let budget_note = if budget == Duration::MAX {
            String::new()
        } else {
            format!(", budget {}s", budget.as_secs())
        };
        println!(
            "{} [{id:>2}] {name}: {} ({:.2}s{budget_note})",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
