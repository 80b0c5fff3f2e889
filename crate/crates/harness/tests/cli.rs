//! CLI-level checks: exit codes, deterministic reports, run diffing.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_whitney-w2p")
}

fn out_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("w2p-cli-{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn read_reports(dir: &Path) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir.join("reports")).unwrap() {
        let path = entry.unwrap().path();
        out.push((
            path.file_name().unwrap().to_string_lossy().to_string(),
            std::fs::read_to_string(&path).unwrap(),
        ));
    }
    out.sort();
    out
}

#[test]
fn whitney_verb_passes_and_writes_outputs() {
    let out = out_dir("whitney");
    let status = Command::new(bin())
        .args(["whitney", "--domain", "flat", "--smax", "6", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("manifest.json").exists());
    assert!(out.join("reports/whitney.csv").exists());
}

#[test]
fn unknown_estimate_id_exits_2() {
    let output = Command::new(bin())
        .args(["verify", "lem9.9", "--out"])
        .arg(out_dir("bad-id"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown experiment id"));
}

#[test]
fn invalid_h_exits_2() {
    let output = Command::new(bin())
        .args(["verify", "mms", "--h", "0.1", "--out"])
        .arg(out_dir("bad-h"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn identical_seed_reproduces_reports_bitwise() {
    let (out_a, out_b) = (out_dir("det-a"), out_dir("det-b"));
    for out in [&out_a, &out_b] {
        let status = Command::new(bin())
            .args([
                "verify",
                "lem2.6",
                "--domain",
                "cusp:0.6",
                "--smax",
                "8",
                "--seed",
                "11",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let (ra, rb) = (read_reports(&out_a), read_reports(&out_b));
    assert!(!ra.is_empty());
    assert_eq!(ra, rb, "same config + seed must give bit-identical CSVs");
}

#[test]
fn different_seed_changes_sampled_reports() {
    let (out_a, out_b) = (out_dir("seed-a"), out_dir("seed-b"));
    for (out, seed) in [(&out_a, "11"), (&out_b, "12")] {
        let status = Command::new(bin())
            .args([
                "verify", "lem2.6", "--domain", "cusp:0.6", "--smax", "8", "--seed", seed,
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_ne!(read_reports(&out_a), read_reports(&out_b));
}

#[test]
fn report_diff_identical_runs_is_empty() {
    let (out_a, out_b) = (out_dir("diff-a"), out_dir("diff-b"));
    for out in [&out_a, &out_b] {
        let status = Command::new(bin())
            .args([
                "verify", "thm3.4", "--alpha", "0.9", "--h", "1/128", "--h", "1/256", "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let diff = w2p_harness::compare_runs(&out_a, &out_b).unwrap();
    assert!(diff.is_empty());
    assert!(!diff.rows.is_empty());
}

#[test]
fn report_diff_across_resolutions_is_positive() {
    // Ladder rungs of the same estimate: the observed constant grows under
    // refinement, so all per-key deltas are strictly positive.
    let (out_a, out_b) = (out_dir("ladder-a"), out_dir("ladder-b"));
    for (out, h) in [(&out_a, "1/64"), (&out_b, "1/128")] {
        let status = Command::new(bin())
            .args(["verify", "thm3.4", "--alpha", "0.9", "--h", h, "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let diff = w2p_harness::compare_runs(&out_a, &out_b).unwrap();
    assert!(!diff.rows.is_empty());
    assert!(diff.all_deltas_positive);
    assert!(diff.max_abs_delta > 0.0);
}

#[test]
fn schema_mismatch_between_experiments() {
    let (out_a, out_b) = (out_dir("mismatch-a"), out_dir("mismatch-b"));
    Command::new(bin())
        .args(["verify", "thm3.4", "--alpha", "0.9", "--h", "1/64", "--out"])
        .arg(&out_a)
        .status()
        .unwrap();
    Command::new(bin())
        .args(["verify", "eq3.12", "--domain", "cusp:0.9", "--h", "1/256", "--out"])
        .arg(&out_b)
        .status()
        .unwrap();
    let err = w2p_harness::compare_runs(&out_a, &out_b).unwrap_err();
    assert!(err.to_string().contains("SchemaMismatch"));
}

#[test]
fn solve_verb_dumps_fields() {
    let out = out_dir("solve");
    let status = Command::new(bin())
        .args(["solve", "--domain", "bump", "--h", "1/32", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let grid = std::fs::read_to_string(out.join("fields/grid.csv")).unwrap();
    assert!(grid.starts_with("i,j,class,theta_e"));
    let sol = std::fs::read_to_string(out.join("fields/solution.csv")).unwrap();
    assert!(sol.lines().count() > 100);
}

#[test]
fn sweep_emits_plot() {
    let out = out_dir("sweep");
    let status = Command::new(bin())
        .args([
            "sweep", "--alpha", "0.9", "--h", "1/256", "--h", "1/512", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let svg = std::fs::read_to_string(out.join("plots/blowup_sweep.svg")).unwrap();
    assert!(svg.contains("<svg"));
}

#[test]
fn config_file_with_flag_overrides() {
    let out = out_dir("config");
    let status = Command::new(bin())
        .args(["verify", "thm3.4", "--config", "../../configs/thm41-ladder.json"])
        .args(["--h", "1/128", "--h", "1/256", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"experiment\": \"thm34\""));
}
