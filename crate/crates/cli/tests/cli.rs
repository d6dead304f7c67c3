use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn covfn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covfn"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn estimate_reports_first_variance_with_interval() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "x.csv", "1,0\n0,1\n2,1\n-1,0.5\n");
    let out = covfn(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--fn",
        "identity",
        "--B",
        "rank1:0",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with(&format!("# covfn {} seed=7", covfn::VERSION)));
    assert!(lines[1].starts_with("estimate,ci_lower,ci_upper"));
    let cells: Vec<f64> = lines[2]
        .split(',')
        .take(3)
        .map(|c| c.parse().unwrap())
        .collect();
    // Σ̂[0][0] = (1 + 0 + 4 + 1) / 4
    assert!((cells[0] - 1.5).abs() < 1e-14);
    assert!(cells[1] < 1.5 && 1.5 < cells[2]);
}

#[test]
fn singular_log_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "s.csv", "1,0\n2,0\n0,0\n");
    let out = covfn(&["estimate", "--fn", "log", "--data", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("log") && err.contains("domain"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        covfn(&["estimate", "--data", "x.csv", "--bogus"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(covfn(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(covfn(&[]).status.code(), Some(1));
    assert_eq!(
        covfn(&["estimate", "--data", "x.csv", "--fn", "sqrt"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        covfn(&["simulate", "--experiment", "opnorm"]).status.code(),
        Some(1)
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "experiment=opnorm\nd=2\nn=5\ncolour=blue\n",
    );
    let out = covfn(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = write(dir.path(), "r.csv", "1,2\n3\n");
    let out = covfn(&["estimate", "--data", ragged.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(
        covfn(&["estimate", "--data", "/nonexistent.csv"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn file_test_matrix_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "x.csv", "1,0\n0,1\n2,1\n-1,0.5\n");
    let b = write(dir.path(), "b.csv", "2,0\n0,-2\n");
    let out = covfn(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--B",
        &format!("file:{}", b.to_str().unwrap()),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        json["meta"]["B_scale"]
            .as_str()
            .unwrap()
            .parse::<f64>()
            .unwrap(),
        0.25
    );
    // ⟨Σ̂, diag(1/2, −1/2)⟩ = (1.5 − 0.5625) / 2
    let est = json["rows"][0][0].as_f64().unwrap();
    assert!((est - 0.46875).abs() < 1e-15);
}

#[test]
fn csv_and_json_carry_identical_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "study.cfg",
        "# small coverage run\nexperiment=coverage\nd=2,3\nn=30\nk=0,1\nfn=exp\nB=identity\nM=25\nN=10\nseed=3\n",
    );
    let cfg = cfg.to_str().unwrap();
    let csv_text = stdout(&covfn(&["simulate", "--config", cfg]));
    let json: serde_json::Value = serde_json::from_str(&stdout(&covfn(&[
        "simulate", "--config", cfg, "--format", "json",
    ])))
    .unwrap();
    let csv_rows: Vec<Vec<String>> = csv_text
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let json_rows = json["rows"].as_array().unwrap();
    assert_eq!(csv_rows.len(), 4);
    assert_eq!(csv_rows.len(), json_rows.len());
    for (c, j) in csv_rows.iter().zip(json_rows) {
        for (cell, value) in c.iter().zip(j.as_array().unwrap()) {
            match value {
                serde_json::Value::Null => assert!(cell.is_empty()),
                v => assert_eq!(cell.parse::<f64>().unwrap(), v.as_f64().unwrap()),
            }
        }
    }
    assert_eq!(json["meta"]["fn"], "exp");
    assert_eq!(json["meta"]["M"], "25");
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "experiment=opnorm\nd=2\nn=10\nM=5\nseed=1\n",
    );
    let out = covfn(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--d",
        "3,4",
        "--seed",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with(&format!("# covfn {} seed=9", covfn::VERSION)));
    assert!(text.lines().next().unwrap().contains(" d=3,4 "));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = [
        "simulate",
        "--experiment",
        "coverage",
        "--d",
        "3",
        "--n",
        "25",
        "--k",
        "1",
        "--fn",
        "square",
        "--M",
        "30",
        "--N",
        "15",
    ];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_covfn"))
            .args(args)
            .env("COVFN_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("3"));
    assert_eq!(run("1"), run("0"));
}
