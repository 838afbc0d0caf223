//! Subcommand behavior: exit codes, payload shapes, determinism, file
//! formats.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn csframes(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csframes"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_then_validate_sts15() {
    let dir = tempfile::tempdir().unwrap();
    let out = csframes(
        &["designs", "gen", "--family", "sts", "--v", "15", "-o", "sts15.pbd"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("sts15.pbd")).unwrap();
    assert!(text.starts_with("v 15 PBD\n"));
    assert_eq!(text.lines().count(), 36); // header + 35 blocks

    let check = csframes(&["designs", "validate", "sts15.pbd"], dir.path());
    assert!(check.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&check)).unwrap();
    assert_eq!(body["status"], "OK");
    assert_eq!(body["payload"]["ok"], true);
}

#[test]
fn validate_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.pbd");
    fs::write(&path, "v 7 PBD\n0 1 2\n0 3 4\n").unwrap();
    let out = csframes(&["designs", "validate", "broken.pbd"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let first_line = stdout(&out).lines().next().unwrap().to_string();
    let body: serde_json::Value = serde_json::from_str(&first_line).unwrap();
    assert_eq!(body["payload"]["ok"], false);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // clap-level: unknown flag
    let out = csframes(&["plan", "--n", "24"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // cross-flag validation: sts without --v
    let out = csframes(
        &["designs", "gen", "--family", "sts", "-o", "x.pbd"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    // both --k and --h conflict
    let out = csframes(&["plan", "--n", "24", "--k", "5", "--h", "5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = csframes(
        &["designs", "gen", "--family", "sts", "--v", "10", "-o", "x.pbd"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    let body: serde_json::Value =
        serde_json::from_str(stdout(&out).lines().next().unwrap()).unwrap();
    assert_eq!(body["status"], "ERROR");
    assert!(body["payload"]["message"]
        .as_str()
        .unwrap()
        .starts_with("design_core:"));
}

#[test]
fn plan_not_found_is_ok_payload() {
    let dir = tempfile::tempdir().unwrap();
    let out = csframes(&["plan", "--n", "24", "--h", "5", "--json"], dir.path());
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["status"], "OK");
    assert_eq!(body["payload"]["result"], "NOT_FOUND");
}

#[test]
fn plan_found_payload_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = csframes(&["plan", "--n", "3000", "--k", "5", "--json"], dir.path());
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = &body["payload"];
    assert_eq!(p["v"], 249);
    assert_eq!(p["tau"], 126);
    assert_eq!(p["k_values"], serde_json::json!([4, 5, 6]));
    assert_eq!(p["alpha"], serde_json::json!([876, 1248, 876]));
    assert_eq!(p["n"], 3000);
    assert_eq!(p["N"], 15000);
    assert_eq!(p["existence"], "asymptotic-only");
    assert_eq!(p["certificates"]["feasible"], true);
    assert_eq!(p["certificates"]["inequalities"], true);
    assert!(p["certificates"]["mx_solution"].is_array());
}

#[test]
fn frame_build_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let gen = csframes(
        &["designs", "gen", "--family", "ag2", "--q", "3", "-o", "ag23.pbd"],
        dir.path(),
    );
    assert!(gen.status.success());
    let build = csframes(
        &[
            "frame", "build", "--design", "ag23.pbd", "--construction", "con0",
            "--hadamard", "sylvester", "-o", "ag23.fmf",
        ],
        dir.path(),
    );
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let analyze = csframes(
        &["frame", "analyze", "ag23.fmf", "--design", "ag23.pbd", "--json"],
        dir.path(),
    );
    assert!(analyze.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&analyze)).unwrap();
    let report = &body["payload"]["report"];
    assert_eq!(report["n"], 12);
    assert_eq!(report["N"], 36);
    assert!((report["mip"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(body["payload"]["bounds"]["certified_epsilon"], 1.0);

    // byte-identical reruns
    let again = csframes(
        &["frame", "analyze", "ag23.fmf", "--design", "ag23.pbd", "--json"],
        dir.path(),
    );
    assert_eq!(out_bytes(&analyze), out_bytes(&again));
}

fn out_bytes(out: &Output) -> &[u8] {
    &out.stdout
}

#[test]
fn recover_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert!(csframes(
        &["designs", "gen", "--family", "pg2", "--q", "2", "-o", "fano.pbd"],
        dir.path()
    )
    .status
    .success());
    assert!(csframes(
        &[
            "frame", "build", "--design", "fano.pbd", "--construction", "con0",
            "--hadamard", "dft", "-o", "fano.fmf",
        ],
        dir.path()
    )
    .status
    .success());
    let out = csframes(
        &[
            "recover", "--frame", "fano.fmf", "--sparsity", "1", "--trials", "10",
            "--seed", "3", "--solver", "omp", "--json", "--csv", "trials.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let body: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(body["payload"]["successes"], 10);
    assert_eq!(body["payload"]["solver"], "omp");
    let csv = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "trial,t,solver,rel_error,iters,success");
    assert_eq!(lines.len(), 11);
    assert!(lines[1].starts_with("0,1,omp,"));
}

#[test]
fn mub_pipeline_needs_e_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = csframes(
        &[
            "pipeline", "--family", "pg2", "--q", "2", "--construction", "mub",
            "--sparsity", "1", "--trials", "2", "--seed", "1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_family_reports_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let out = csframes(
        &[
            "designs", "gen", "--family", "search", "--v", "6", "--k-set", "3",
            "-o", "none.pbd",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("NOT_FOUND"));
    assert!(!dir.path().join("none.pbd").exists());
}
