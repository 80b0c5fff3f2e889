//! Acceptance suite: one test per quantitative criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! Tolerances and ceilings are pinned in code; observed-constant ceilings
//! carry ~2x headroom over the reference run (seed 7) and are documented
//! at their definition sites.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use w2p_harness::config::{DomainRef, ExperimentConfig, ExperimentId};
use w2p_harness::manifest::{RunManifest, TaskOutcome};

use w2p_core::geometry::{Domain, GraphDomainSpec};
use w2p_core::whitney::{decompose, AmbientDomain};

fn out_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("w2p-acceptance-{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(cfg: &ExperimentConfig) -> RunManifest {
    w2p_harness::run(cfg).expect("experiment runs")
}

fn assert_all_pass(criterion: &str, manifest: &RunManifest) {
    let mut all = true;
    for t in &manifest.tasks {
        if matches!(t.outcome, TaskOutcome::Fail | TaskOutcome::Error) {
            all = false;
            println!("  [{criterion}] offending task {} — {}", t.id, t.detail);
        }
    }
    println!(
        "ACCEPTANCE {criterion}: {} ({} tasks, {:.1}s)",
        if all { "PASS" } else { "FAIL" },
        manifest.tasks.len(),
        manifest.wall_clock_secs
    );
    assert!(all, "criterion {criterion} failed");
}

#[test]
fn criterion_01_whitney_invariant_suite() {
    // Two-dimensional domains at s_max = 10, the 3-D flat fixture at 7;
    // every check exact with zero violations, under 2 minutes per domain.
    let domains = ["flat", "bump", "cusp:0.3", "cusp:0.5", "cusp:0.6", "cusp:0.9", "flat3d"];
    for name in domains {
        let mut cfg = ExperimentConfig::new(ExperimentId::WhitneySuite);
        cfg.domains = vec![DomainRef::Named(name.into())];
        cfg.smax = 10;
        cfg.out = out_dir(&format!("c1-{}", name.replace(':', "_")));
        let started = Instant::now();
        let manifest = run(&cfg);
        let elapsed = started.elapsed().as_secs_f64();
        assert_all_pass(&format!("1 whitney-suite[{name}]"), &manifest);
        assert!(elapsed < 120.0, "{name} took {elapsed:.1}s (budget 120s)");
    }
}

#[test]
fn criterion_02_collar_and_diameter_sums() {
    let mut cfg = ExperimentConfig::new(ExperimentId::Collar);
    cfg.domains = ["flat", "bump", "cusp:0.3", "cusp:0.6"]
        .iter()
        .map(|n| DomainRef::Named(n.to_string()))
        .collect();
    cfg.out = out_dir("c2-collar");
    let manifest = run(&cfg);
    assert_all_pass("2 collar", &manifest);

    let mut cfg = ExperimentConfig::new(ExperimentId::DiamSums);
    cfg.domains = ["flat", "bump", "cusp:0.6"]
        .iter()
        .map(|n| DomainRef::Named(n.to_string()))
        .collect();
    cfg.smax = 10;
    cfg.out = out_dir("c2-diam");
    let manifest = run(&cfg);
    assert_all_pass("2 diam-sums", &manifest);
}

#[test]
fn criterion_03_family_sweeps() {
    let mut cfg = ExperimentConfig::new(ExperimentId::FamilySuite);
    cfg.domains = ["flat", "bump", "cusp:0.3", "cusp:0.5", "cusp:0.6", "cusp:0.9"]
        .iter()
        .map(|n| DomainRef::Named(n.to_string()))
        .collect();
    cfg.smax = 10;
    cfg.out = out_dir("c3-family");
    let manifest = run(&cfg);
    // At least 200 probes per domain, from the info tasks.
    for t in &manifest.tasks {
        if t.id.ends_with("/probes") {
            let n: usize = t.detail.parse().expect("probe count");
            assert!(n >= 200, "{} has only {n} probes", t.id);
        }
    }
    assert_all_pass("3 family-suite", &manifest);
}

#[test]
fn criterion_04_solver_mms() {
    let mut cfg = ExperimentConfig::new(ExperimentId::Mms);
    cfg.out = out_dir("c4-mms");
    let started = Instant::now();
    let manifest = run(&cfg);
    let elapsed = started.elapsed().as_secs_f64();
    assert_all_pass("4 mms", &manifest);
    assert!(elapsed < 60.0, "mms took {elapsed:.1}s (budget 60s)");
}

#[test]
fn criterion_05_greens_bound_stability() {
    let mut cfg = ExperimentConfig::new(ExperimentId::Greens);
    cfg.pairs = 100;
    cfg.out = out_dir("c5-greens");
    let manifest = run(&cfg);
    assert_all_pass("5 greens", &manifest);
}

#[test]
fn criterion_06_c1alpha_decay() {
    let mut cfg = ExperimentConfig::new(ExperimentId::C1alpha);
    cfg.out = out_dir("c6-c1alpha");
    let manifest = run(&cfg);
    assert_all_pass("6 c1alpha", &manifest);
}

#[test]
fn criterion_07_per_cube_slope() {
    let mut cfg = ExperimentConfig::new(ExperimentId::Percube);
    cfg.out = out_dir("c7-percube");
    let manifest = run(&cfg);
    assert_all_pass("7 percube", &manifest);
}

#[test]
fn criterion_08_ratio_stability_above_threshold() {
    // Verdicts on the resolved ladders (Ω_{1/12} from h = 1/128, Ω_{1/24}
    // from h = 1/256); a 1/64 rung leaves those regions with few or zero
    // full-stencil nodes, so its numbers are printed for reference without
    // a verdict.
    for (id, name) in [(ExperimentId::Thm34, "thm3.4"), (ExperimentId::Thm41, "thm4.1")] {
        let mut cfg = ExperimentConfig::new(id);
        cfg.alphas = vec![0.6, 0.9];
        cfg.out = out_dir(&format!("c8-{name}"));
        let manifest = run(&cfg);
        assert_all_pass(&format!("8 {name}"), &manifest);
    }
    // Reference: the literal pinned ladder, under-resolved at its coarse
    // rung (reported, not asserted).
    let mut cfg = ExperimentConfig::new(ExperimentId::Thm34);
    cfg.alphas = vec![0.9];
    cfg.hs = vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    cfg.out = out_dir("c8-literal");
    let manifest = run(&cfg);
    for t in &manifest.tasks {
        println!("  [8 reference, literal ladder] {} — {}", t.id, t.detail);
    }
}

#[test]
fn criterion_09_threshold_degradation() {
    let mut cfg = ExperimentConfig::new(ExperimentId::BlowupSweep);
    cfg.alphas = vec![0.3];
    cfg.out = out_dir("c9-blowup");
    let manifest = run(&cfg);
    assert_all_pass("9 blowup[alpha=0.3]", &manifest);
}

#[test]
fn criterion_10_splitting_structure() {
    // vw-split residuals at h = 1/128 on cusp(0.75).
    let tol = 1e-10;
    let domain = Arc::new(Domain::build(GraphDomainSpec::cusp(0.75)).unwrap());
    let dec = decompose(Arc::clone(&domain) as Arc<dyn AmbientDomain<2>>, 10);
    let split =
        w2p_harness::experiments::vw_split_report(&domain, &dec, 1.0 / 128.0, tol).unwrap();
    let scale = split.u.max_abs().max(1.0);
    let combo_ok = split.combo_err <= 10.0 * tol * scale;
    let residual_ok = split.v_residual_max <= 10.0 * tol * scale;
    let cover_ok = split.uncovered_nodes == 0 && split.checked_nodes > 50;
    println!(
        "ACCEPTANCE 10 vw-split: {} (|u-v-w| {:.2e}, v-residual {:.2e}, {} checked / {} collar)",
        if combo_ok && residual_ok && cover_ok { "PASS" } else { "FAIL" },
        split.combo_err,
        split.v_residual_max,
        split.checked_nodes,
        split.collar_nodes
    );
    assert!(combo_ok && residual_ok && cover_ok);

    // Lemma 4.2 sweep, at most 40 cells, ratios bounded by the frozen
    // run-constant; band locality exact.
    let mut cfg = ExperimentConfig::new(ExperimentId::Lemma42);
    cfg.max_cells = 40;
    cfg.out = out_dir("c10-lemma42");
    let manifest = run(&cfg);
    assert_all_pass("10 lemma42", &manifest);
}

#[test]
fn criterion_11_aggregation_and_gate() {
    let mut cfg = ExperimentConfig::new(ExperimentId::Thm51Aggregate);
    cfg.out = out_dir("c11-thm51");
    let manifest = run(&cfg);
    assert_all_pass("11 thm51-aggregate", &manifest);
}
