//! End-to-end checks of the compiled binary: CSV shapes, config handling,
//! exit codes, and output determinism.

use std::process::{Command, Output};

fn toplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toplab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

const ALL_SYSTEMS: [&str; 13] = [
    "euler-top",
    "pendulum",
    "euler-top-dde-z",
    "euler-top-dde-x",
    "pendulum-dde-h",
    "pendulum-dde-k",
    "euler-top-frac-z",
    "euler-top-frac-x",
    "pendulum-frac-h",
    "pendulum-frac-k",
    "euler-top-sde-a",
    "euler-top-sde-b",
    "pendulum-sde",
];

#[test]
fn long_top_run_emits_one_row_per_grid_node() {
    let out = toplab(&[
        "simulate",
        "--system",
        "euler-top",
        "--ic",
        "0.1,0.1,0.2",
        "--t0",
        "0",
        "--t1",
        "100",
        "--dt",
        "1e-3",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,x3"));
    assert_eq!(lines.count(), 100_001);
}

#[test]
fn help_lists_every_system_id() {
    let out = toplab(&["--help"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    for id in ALL_SYSTEMS {
        assert!(text.contains(id), "--help is missing `{id}`");
    }
}

#[test]
fn every_system_simulates_with_suitable_flags() {
    for id in ALL_SYSTEMS {
        let mut args = vec![
            "simulate", "--system", id, "--t0", "1", "--t1", "2", "--dt", "0.125",
        ];
        let pendulum = id.starts_with("pendulum");
        if pendulum {
            args.extend(["--theta0", "1.0", "--level", "0.5"]);
        } else {
            args.extend(["--ic", "0.5,0.4,0.3"]);
        }
        if id.contains("dde") {
            args.extend(["--tau", "0.5"]);
        }
        if id.contains("frac") {
            args.extend(["--alpha", "0.8"]);
        }
        if id.contains("sde") {
            args.extend(["--seed", "1"]);
        }
        let out = toplab(&args);
        assert!(out.status.success(), "{id}: {}", stderr_str(&out));
        let text = stdout_str(&out);
        let want = if pendulum {
            "t,theta,omega"
        } else {
            "t,x1,x2,x3"
        };
        assert!(text.starts_with(want), "{id} header");
        assert_eq!(text.lines().count(), 10, "{id} rows");
    }
}

#[test]
fn verify_reports_json_and_exit_zero() {
    let out = toplab(&["verify", "conservation"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).expect("json report");
    let checks = report.as_array().expect("array of checks");
    assert!(!checks.is_empty());
    for c in checks {
        assert_eq!(c["suite"], "conservation");
        assert!(c["check"].is_string());
        assert!(c["observed"].is_number());
        assert!(c["bound"].is_number());
        assert_eq!(c["pass"], true);
    }
}

#[test]
fn verify_rejects_unknown_suites() {
    let out = toplab(&["verify", "spectral"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("spectral"));
}

#[test]
fn config_file_and_flags_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"system":"euler-top-sde-a","ic":[0.1,0.1,0.1],"t0":1.0,"t1":2.0,"dt":0.015625,"seed":5}"#,
    )
    .unwrap();
    let from_cfg = toplab(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(from_cfg.status.success(), "{}", stderr_str(&from_cfg));
    let from_flags = toplab(&[
        "simulate",
        "--system",
        "euler-top-sde-a",
        "--ic",
        "0.1,0.1,0.1",
        "--t0",
        "1",
        "--t1",
        "2",
        "--dt",
        "0.015625",
        "--seed",
        "5",
    ]);
    assert_eq!(from_cfg.stdout, from_flags.stdout);

    let again = toplab(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_cfg.stdout, again.stdout);
}

#[test]
fn flags_take_precedence_over_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"system":"euler-top","ic":[0.1,0.1,0.2],"t1":1.0,"dt":0.5}"#,
    )
    .unwrap();
    let coarse = toplab(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(stdout_str(&coarse).lines().count(), 4);
    let fine = toplab(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--dt",
        "0.25",
    ]);
    assert_eq!(stdout_str(&fine).lines().count(), 6);
}

#[test]
fn missing_and_extraneous_fields_exit_2_with_the_field_name() {
    let out = toplab(&["simulate", "--system", "pendulum"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_str(&out).contains("`theta0`"),
        "{}",
        stderr_str(&out)
    );

    let out = toplab(&[
        "simulate",
        "--system",
        "euler-top",
        "--ic",
        "0.1,0.1,0.2",
        "--alpha",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("`alpha`"), "{}", stderr_str(&out));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"system":"euler-top","ic":[0.1,0.1,0.2],"stride":2}"#,
    )
    .unwrap();
    let out = toplab(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("stride"), "{}", stderr_str(&out));
}

#[test]
fn ensemble_requires_a_stochastic_system() {
    let out = toplab(&[
        "ensemble", "--system", "pendulum", "--theta0", "1", "--level", "0.5", "--paths", "8",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_str(&out).contains("deterministic"),
        "{}",
        stderr_str(&out)
    );
}

#[test]
fn ensemble_half_widths_shrink_with_more_paths() {
    let run = |paths: &str| {
        let out = toplab(&[
            "ensemble",
            "--system",
            "pendulum-sde",
            "--theta0",
            "1",
            "--omega0",
            "0.8",
            "--level",
            "0.5",
            "--t0",
            "1",
            "--t1",
            "2",
            "--dt",
            "0.015625",
            "--paths",
            paths,
            "--seed",
            "3",
        ]);
        assert!(out.status.success(), "{}", stderr_str(&out));
        let text = stdout_str(&out);
        let last = text.lines().last().unwrap().to_string();
        let ci_1: f64 = last.split(',').nth(5).unwrap().parse().unwrap();
        ci_1
    };
    let wide = run("100");
    let narrow = run("1600");
    assert!(narrow < wide, "ci {narrow} should shrink below {wide}");
    // 16x the paths ≈ 4x narrower; allow slack for sampling noise
    assert!(narrow < 0.5 * wide);
}

#[test]
fn ensemble_reruns_are_byte_identical() {
    let args = [
        "ensemble",
        "--system",
        "euler-top-sde-b",
        "--ic",
        "1,0.8,0.2",
        "--t0",
        "1",
        "--t1",
        "2",
        "--dt",
        "0.0078125",
        "--paths",
        "192",
        "--seed",
        "21",
    ];
    let a = toplab(&args);
    assert!(a.status.success(), "{}", stderr_str(&a));
    let b = toplab(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout_str(&a);
    assert!(text.starts_with("t,mean_1,mean_2,mean_3,var_1,var_2,var_3,ci_1,ci_2,ci_3\n"));
    assert_eq!(text.lines().count(), 130);
}

#[test]
fn output_file_matches_stdout_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let common = [
        "simulate",
        "--system",
        "pendulum-frac-k",
        "--theta0",
        "2",
        "--level",
        "0.3",
        "--alpha",
        "0.9",
        "--t1",
        "1",
        "--dt",
        "0.01",
    ];
    let mut with_file: Vec<&str> = common.to_vec();
    let p = path.to_str().unwrap();
    with_file.extend(["--output", p]);
    let out = toplab(&with_file);
    assert!(out.status.success(), "{}", stderr_str(&out));
    assert!(out.stdout.is_empty());
    let on_disk = std::fs::read(&path).unwrap();
    let direct = toplab(&common);
    assert_eq!(on_disk, direct.stdout);
}

#[test]
fn ragged_stochastic_grids_are_rejected() {
    let out = toplab(&[
        "simulate",
        "--system",
        "euler-top-sde-a",
        "--ic",
        "0.1,0.1,0.1",
        "--t0",
        "0",
        "--t1",
        "1",
        "--dt",
        "0.3",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("`dt`"), "{}", stderr_str(&out));
}
