//! End-to-end CLI contract tests: exit codes, file formats, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn specgap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specgap"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn no_arguments_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = specgap(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = specgap(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_is_io_error_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = specgap(
        dir.path(),
        &[
            "experiment",
            "--config",
            "missing.json",
            "--out",
            "o",
            "--seed",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing.json"), "stderr: {err}");
}

#[test]
fn experiment_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), "{}").unwrap();
    let out = specgap(
        dir.path(),
        &["experiment", "--config", "cfg.json", "--out", "o"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    let out = specgap(
        dir.path(),
        &[
            "experiment",
            "--config",
            "bad.json",
            "--out",
            "o",
            "--seed",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn graph_pipeline_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |out: &str, seed: &str| {
        specgap(
            dir.path(),
            &[
                "gen-graph",
                "--n",
                "20",
                "--d",
                "4",
                "--swaps",
                "30",
                "--seed",
                seed,
                "--out",
                out,
            ],
        )
    };
    assert!(gen("a.txt", "9").status.success());
    assert!(gen("b.txt", "9").status.success());
    assert!(gen("c.txt", "10").status.success());
    let a = std::fs::read_to_string(dir.path().join("a.txt")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.txt")).unwrap();
    let c = std::fs::read_to_string(dir.path().join("c.txt")).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(dir.path().join("a.txt.manifest.json").exists());

    let out = specgap(dir.path(), &["graph-lambda", "a.txt"]);
    assert!(out.status.success());
    let lambda: f64 = stdout(&out).trim().parse().unwrap();
    assert!(lambda > 0.0 && lambda < 4.0);

    let out = specgap(
        dir.path(),
        &["lift", "--graph", "a.txt", "--t", "3", "--out", "m.txt"],
    );
    assert!(out.status.success());
    let mask = std::fs::read_to_string(dir.path().join("m.txt")).unwrap();
    assert!(mask.starts_with("3 20 20 20 320\n"));

    let out = specgap(
        dir.path(),
        &["estimate-gap", "--mask", "m.txt", "--seed", "4"],
    );
    assert!(out.status.success());
    let est: f64 = stdout(&out).trim().parse().unwrap();
    assert!(est > 0.0);
}

#[test]
fn atomic_norm_of_sign_matrix_prints_value() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("h.txt"), "2 2 2\n1 1 1 -1\n").unwrap();
    let out = specgap(dir.path(), &["atomic-norm", "h.txt"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("atomic_norm 2"), "stdout: {text}");
}

#[test]
fn malformed_tensor_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "2 2 2\n1 2 3\n").unwrap();
    let out = specgap(dir.path(), &["atomic-norm", "bad.txt"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn complete_reports_error_against_truth() {
    let dir = tempfile::tempdir().unwrap();
    // rank-1 4×4×4 target, fully observed
    let mut vals = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                vals.push(((i + 1) * (j + 1) * (k + 1)) as f64 / 8.0);
            }
        }
    }
    let body = format!(
        "3 4 4 4\n{}\n",
        vals.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    std::fs::write(dir.path().join("t.txt"), &body).unwrap();
    let out = specgap(
        dir.path(),
        &[
            "grid-mask",
            "--dims",
            "4,4,4",
            "--fraction",
            "1.0",
            "--out",
            "full.txt",
        ],
    );
    assert!(out.status.success());
    let out = specgap(
        dir.path(),
        &[
            "complete",
            "--algo",
            "ridge",
            "--mask",
            "full.txt",
            "--tensor",
            "t.txt",
            "--truth",
            "t.txt",
            "--seed",
            "1",
            "--r-fit",
            "2",
            "--out-estimate",
            "est.txt",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let rel: f64 = text
        .lines()
        .find(|l| l.starts_with("rel_error "))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rel < 0.05, "rel_error {rel}");
    assert!(dir.path().join("est.txt").exists());
    assert!(dir.path().join("est.txt.manifest.json").exists());
}

#[test]
fn complete_accepts_inline_tensor_config_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "solver": {"fit_rank": 1, "max_sweeps": 5, "seed": 11},
        "tensor": {"dims": [3, 3], "values": [2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]}
    });
    std::fs::write(dir.path().join("cfg.json"), cfg.to_string()).unwrap();
    let out = specgap(
        dir.path(),
        &[
            "grid-mask",
            "--dims",
            "3,3",
            "--fraction",
            "1.0",
            "--out",
            "m.txt",
        ],
    );
    assert!(out.status.success());
    // --max-sweeps overrides the config value
    let out = specgap(
        dir.path(),
        &[
            "complete",
            "--algo",
            "ridge",
            "--mask",
            "m.txt",
            "--config",
            "cfg.json",
            "--max-sweeps",
            "40",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let sweeps: usize = text
        .lines()
        .find(|l| l.starts_with("sweeps "))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(sweeps > 5, "flag did not override config: {sweeps} sweeps");
}

#[test]
fn bound_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = specgap(
        dir.path(),
        &[
            "bound",
            "--kind",
            "thm3",
            "--n",
            "4",
            "--t",
            "3",
            "--lambda2-h",
            "1",
            "--e-count",
            "32",
            "--atomic-norm",
            "1",
            "--json",
        ],
    );
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["value"], 8.0);
    // missing inputs are a usage error
    let out = specgap(
        dir.path(),
        &["bound", "--kind", "thm3", "--n", "4", "--t", "3"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_writes_outputs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "algorithm": "ridge",
        "n": 6, "t": 3, "r": 1, "r_fit": 2,
        "trials": 2,
        "normalization": {"mode": "frobenius_sqrt_nt"},
        "scheme": {"kind": "graph_lift", "d": 2, "swaps": [0, 10]},
        "max_sweeps": 8
    });
    std::fs::write(dir.path().join("cfg.json"), cfg.to_string()).unwrap();
    let run = |out: &str| {
        specgap(
            dir.path(),
            &[
                "experiment",
                "--config",
                "cfg.json",
                "--out",
                out,
                "--seed",
                "5",
            ],
        )
    };
    let out = run("r1");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(run("r2").status.success());
    for name in [
        "records.csv",
        "regression.json",
        "scatter.svg",
        "manifest.json",
    ] {
        assert!(dir.path().join("r1").join(name).exists(), "missing {name}");
    }
    let strip_wall = |path: &Path| {
        let csv = std::fs::read_to_string(path).unwrap();
        csv.lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                if f.len() == 13 {
                    f.remove(11);
                }
                f.join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip_wall(&dir.path().join("r1/records.csv")),
        strip_wall(&dir.path().join("r2/records.csv"))
    );
    let svg = std::fs::read_to_string(dir.path().join("r1/scatter.svg")).unwrap();
    assert!(svg.starts_with("<svg"));

    // re-running from the emitted manifest reproduces the records
    let out = specgap(
        dir.path(),
        &[
            "experiment",
            "--config",
            "r1/manifest.json",
            "--out",
            "r3",
            "--seed",
            "5",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        strip_wall(&dir.path().join("r1/records.csv")),
        strip_wall(&dir.path().join("r3/records.csv"))
    );
}

#[test]
fn verify_quick_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = specgap(dir.path(), &["verify", "--quick", "--seed", "3"]);
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        stdout(&out),
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("PASS atomic"));
    assert!(text.contains("PASS mask"));
    assert!(text.contains("PASS bounds"));
}

#[test]
fn verify_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = specgap(dir.path(), &["verify", "--quick"]);
    assert_eq!(out.status.code(), Some(2));
}
