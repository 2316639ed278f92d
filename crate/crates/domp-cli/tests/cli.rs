//! End-to-end runs of the `domp` binary: every subcommand, both output
//! modes, exit codes, and determinism of the emitted JSON.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn domp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_domp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("domp-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn gen_instance_file(dir: &Path, n: &str, p: &str, seed: &str) -> PathBuf {
    let path = dir.join(format!("inst-{n}-{p}-{seed}.json"));
    let out = domp(&["gen", "--n", n, "--p", p, "--seed", seed, "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    path
}

#[test]
fn gen_is_deterministic_and_well_formed() {
    let a = domp(&["gen", "--n", "4", "--p", "2", "--seed", "11"]);
    let b = domp(&["gen", "--n", "4", "--p", "2", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout, "same seed must emit identical bytes");
    let doc = stdout_json(&a);
    assert_eq!(doc["n"], 4);
    assert_eq!(doc["p"], 2);
    assert_eq!(doc["lambda"].as_array().unwrap().len(), 4);
    let c = doc["C"].as_array().unwrap();
    assert_eq!(c.len(), 4);
    for (j, row) in c.iter().enumerate() {
        assert_eq!(row[j], 0.0, "free self-service diagonal");
    }
    let other = domp(&["gen", "--n", "4", "--p", "2", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout, "different seeds, different costs");
}

#[test]
fn gen_presets_and_custom_weights() {
    let center = stdout_json(&domp(&["gen", "--n", "3", "--p", "1", "--preset", "center"]));
    assert_eq!(center["lambda"], serde_json::json!([0.0, 0.0, 1.0]));
    let trimmed = stdout_json(&domp(&["gen", "--n", "4", "--p", "2", "--preset", "trimmed:1,1"]));
    assert_eq!(trimmed["lambda"], serde_json::json!([0.0, 1.0, 1.0, 0.0]));
    let custom = stdout_json(&domp(&["gen", "--n", "3", "--p", "1", "--lambda", "0.5, 1, 2"]));
    assert_eq!(custom["lambda"], serde_json::json!([0.5, 1.0, 2.0]));
    let bad = domp(&["gen", "--n", "3", "--p", "1", "--preset", "nonsense"]);
    assert!(!bad.status.success());
}

#[test]
fn solve_exact_matches_library_oracle() {
    let dir = temp_dir("solve");
    let path = gen_instance_file(&dir, "4", "2", "3");
    let doc = stdout_json(&domp(&["solve-exact", "--instance", path.to_str().unwrap(), "--json"]));

    let instance = domp_core::gen::gen_instance(4, 2, 3, &domp_core::gen::WeightPreset::Median)
        .unwrap();
    let (value, winners) = domp_core::oracle::solve_enumerate(&instance).unwrap();
    assert_eq!(doc["value"].as_f64().unwrap(), value);
    let reported: Vec<Vec<usize>> = serde_json::from_value(doc["open_sets"].clone()).unwrap();
    assert_eq!(reported, winners);
}

#[test]
fn build_miqp_counts_and_ordering() {
    let dir = temp_dir("miqp");
    let path = gen_instance_file(&dir, "3", "2", "5");
    let doc = stdout_json(&domp(&["build-miqp", "--instance", path.to_str().unwrap()]));
    assert_eq!(doc["m"], 26); // n^2 + 5n + 2 at n = 3
    assert_eq!(doc["N"], 39); // 3n^2 + 4n
    assert_eq!(doc["labels"].as_array().unwrap().len(), 26);
    assert_eq!(doc["b"].as_array().unwrap().len(), 26);
    let triplets = doc["triplets"].as_array().unwrap();
    let keys: Vec<(u64, u64)> = triplets
        .iter()
        .map(|t| (t[0].as_u64().unwrap(), t[1].as_u64().unwrap()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    assert_eq!(keys, sorted, "triplets sorted by (row, col)");
}

#[test]
fn build_cp_variants_and_replacement_log() {
    let dir = temp_dir("cp");
    let path = gen_instance_file(&dir, "3", "1", "8");
    let inst = path.to_str().unwrap();

    let cp0 = stdout_json(&domp(&["build-cp", "--instance", inst]));
    assert_eq!(cp0["cone"], "dnn");
    assert_eq!(cp0["N1"], 40);
    assert_eq!(cp0["equalities"].as_array().unwrap().len(), 58);

    let literal = domp(&["build-cp", "--instance", inst, "--variant", "explicit"]);
    let corrected = domp(&["build-cp", "--instance", inst, "--variant", "explicit-corrected"]);
    for out in [&literal, &corrected] {
        let doc = stdout_json(out);
        assert_eq!(doc["cone"], "exact-lift-verification");
        assert_eq!(doc["equalities"].as_array().unwrap().len(), 54);
    }
    let log = String::from_utf8_lossy(&corrected.stderr);
    assert_eq!(log.lines().count(), 4, "four families get replaced");
    assert!(log.contains("replaced by"));
    let literal_log = String::from_utf8_lossy(&literal.stderr);
    assert!(literal_log.contains("kept over"));
    // The log is part of the contract: stable across runs.
    let again = domp(&["build-cp", "--instance", inst, "--variant", "explicit-corrected"]);
    assert_eq!(corrected.stderr, again.stderr);
    assert_eq!(corrected.stdout, again.stdout);
}

#[test]
fn relax_dnn_reports_a_converged_bound() {
    let dir = temp_dir("relax");
    let path = gen_instance_file(&dir, "3", "2", "21");
    let csv = dir.join("solution.csv");
    let doc = stdout_json(&domp(&[
        "relax-dnn",
        "--instance",
        path.to_str().unwrap(),
        "--json",
        "--matrix-out",
        csv.to_str().unwrap(),
    ]));
    assert_eq!(doc["status"], "converged");
    assert!(doc["primal_res"].as_f64().unwrap() <= 1e-7);
    assert!(doc["dual_res"].as_f64().unwrap() <= 1e-7);

    let instance = domp_core::gen::gen_instance(3, 2, 21, &domp_core::gen::WeightPreset::Median)
        .unwrap();
    let (optimum, _) = domp_core::oracle::solve_enumerate(&instance).unwrap();
    let bound = doc["bound"].as_f64().unwrap();
    assert!(bound <= optimum + 1e-4, "bound {bound} vs optimum {optimum}");

    let grid = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(grid.lines().count(), 40, "dense 40x40 dump");
    assert_eq!(grid.lines().next().unwrap().split(',').count(), 40);

    // Determinism end to end: repeated runs emit identical bytes.
    let again = domp(&["relax-dnn", "--instance", path.to_str().unwrap(), "--json"]);
    assert_eq!(serde_json::to_vec(&doc).unwrap(), serde_json::to_vec(&stdout_json(&again)).unwrap());
}

#[test]
fn verify_exit_codes_follow_the_report() {
    let dir = temp_dir("verify");
    let path = gen_instance_file(&dir, "3", "2", "2");
    let ok = domp(&[
        "verify",
        "--instance",
        path.to_str().unwrap(),
        "--checks",
        "lift,recover,surrogate,mu,sort",
        "--json",
    ]);
    let report = stdout_json(&ok);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 5);
    assert!(checks.iter().all(|c| c["pass"] == true));
    assert_eq!(report["instance"]["n"], 3);

    // Size guards surface as failed checks and a nonzero exit, not a crash.
    let big = gen_instance_file(&dir, "6", "2", "2");
    let guarded = domp(&["verify", "--instance", big.to_str().unwrap(), "--checks", "recover"]);
    assert!(!guarded.status.success());
    assert!(String::from_utf8_lossy(&guarded.stdout).contains("not run:"));

    let unknown = domp(&["verify", "--instance", path.to_str().unwrap(), "--checks", "banana"]);
    assert!(!unknown.status.success());
}

#[test]
fn export_writes_every_artifact() {
    let dir = temp_dir("export");
    let path = gen_instance_file(&dir, "3", "2", "14");
    let out_dir = dir.join("artifacts");
    let run = domp(&[
        "export",
        "--instance",
        path.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    for name in [
        "instance.json",
        "miqp.json",
        "cp0.json",
        "explicit.json",
        "explicit-corrected.json",
    ] {
        let text = std::fs::read_to_string(out_dir.join(name)).unwrap();
        let _: Value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    // The exported instance round-trips through the solver.
    let echoed = out_dir.join("instance.json");
    let solved = domp(&["solve-exact", "--instance", echoed.to_str().unwrap(), "--json"]);
    assert!(solved.status.success());
}

#[test]
fn malformed_input_fails_cleanly() {
    let dir = temp_dir("malformed");
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\"n\": 3, \"p\": 9, \"lambda\": [1,1,1], \"C\": [[0,1,2],[1,0,1],[2,1,0]]}")
        .unwrap();
    let out = domp(&["solve-exact", "--instance", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let missing = domp(&["solve-exact", "--instance", dir.join("nope.json").to_str().unwrap()]);
    assert!(!missing.status.success());
}
