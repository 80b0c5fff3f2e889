//! `whitney-w2p`: Whitney-decomposition suites, cut-cell Poisson solves and
//! estimate verification runs.
//!
//! Exit codes: 0 all checks pass, 1 at least one estimate verdict FAIL,
//! 2 configuration or IO error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use w2p_harness::config::{parse_h, DomainRef, ExperimentConfig, ExperimentId};
use w2p_harness::manifest::TaskOutcome;
use w2p_harness::{compare_runs, experiments, RunManifest};

#[derive(Parser)]
#[command(name = "whitney-w2p", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Domain name: flat | flat3d | bump | cusp:<alpha> (repeatable).
    #[arg(long = "domain")]
    domains: Vec<String>,
    /// Cusp exponents; each adds a cusp:<alpha> domain (repeatable).
    #[arg(long = "alpha")]
    alphas: Vec<f64>,
    /// Lebesgue exponents (repeatable).
    #[arg(long = "p")]
    ps: Vec<f64>,
    /// Grid spacings, e.g. 1/128 or 2^-7 (repeatable).
    #[arg(long = "h")]
    hs: Vec<String>,
    /// Truncation generation of the decomposition.
    #[arg(long)]
    smax: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Cap on sweep cells (lemma42).
    #[arg(long)]
    cells: Option<usize>,
    /// Number of random (D,E) pairs (greens).
    #[arg(long)]
    pairs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Emit SVG plots.
    #[arg(long)]
    plots: bool,
    /// Emit decomposition/field dumps.
    #[arg(long)]
    dump: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Whitney invariant suite (disjointness, distance bounds, overlap,
    /// cover, band partition) on one or more domains.
    Whitney(CommonOpts),
    /// One cut-cell Poisson solve with grid/field dumps.
    Solve {
        #[arg(long, default_value = "flat")]
        domain: String,
        #[arg(long, default_value = "1/64")]
        h: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Run the verification experiment for an estimate id (e.g. thm4.1,
    /// lem2.6, eq3.12, cor3.3) or an experiment name.
    Verify {
        estimate_id: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Blow-up sweep of the Thm4.1 constant across (alpha, p, h).
    Sweep(CommonOpts),
    /// Summarize a run; with --against, diff two runs of one experiment.
    Report {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        against: Option<PathBuf>,
    },
}

fn build_config(id: ExperimentId, opts: &CommonOpts) -> Result<ExperimentConfig> {
    let mut cfg = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::new(id),
    };
    cfg.experiment = id;
    // List flags replace the config lists wholesale.
    if !opts.domains.is_empty() {
        cfg.domains = opts
            .domains
            .iter()
            .map(|d| DomainRef::Named(d.clone()))
            .collect();
    }
    if !opts.alphas.is_empty() {
        cfg.alphas = opts.alphas.clone();
    }
    if !opts.ps.is_empty() {
        cfg.ps = opts.ps.clone();
    }
    if !opts.hs.is_empty() {
        cfg.hs = opts.hs.iter().map(|h| parse_h(h)).collect::<Result<_>>()?;
    }
    if let Some(s) = opts.smax {
        cfg.smax = s;
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(t) = opts.tol {
        cfg.tol = t;
    }
    if let Some(c) = opts.cells {
        cfg.max_cells = c;
    }
    if let Some(p) = opts.pairs {
        cfg.pairs = p;
    }
    cfg.out = opts.out.clone();
    cfg.plots |= opts.plots;
    cfg.dump_fields |= opts.dump;
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(manifest: &RunManifest) {
    println!(
        "experiment {} ({} tasks, {:.1}s)",
        manifest.experiment,
        manifest.tasks.len(),
        manifest.wall_clock_secs
    );
    for t in &manifest.tasks {
        let tag = match t.outcome {
            TaskOutcome::Pass => "PASS",
            TaskOutcome::Fail => "FAIL",
            TaskOutcome::Error => "ERROR",
            TaskOutcome::Info => "info",
        };
        println!("  [{tag}] {} — {}", t.id, t.detail);
    }
}

fn run_and_report(cfg: &ExperimentConfig) -> Result<bool> {
    let manifest = experiments::run(cfg)?;
    print_summary(&manifest);
    Ok(!manifest.any_failure())
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Whitney(opts) => {
            let cfg = build_config(ExperimentId::WhitneySuite, &opts)?;
            run_and_report(&cfg)
        }
        Command::Solve { domain, h, out, tol } => {
            let manifest = experiments::solve_once(
                &DomainRef::Named(domain),
                parse_h(&h)?,
                &out,
                tol,
            )?;
            print_summary(&manifest);
            Ok(!manifest.any_failure())
        }
        Command::Verify { estimate_id, opts } => {
            let id = ExperimentId::parse(&estimate_id)?;
            let cfg = build_config(id, &opts)?;
            run_and_report(&cfg)
        }
        Command::Sweep(opts) => {
            let mut cfg = build_config(ExperimentId::BlowupSweep, &opts)?;
            cfg.plots = true;
            run_and_report(&cfg)
        }
        Command::Report { run, against } => {
            let manifest = RunManifest::load(&run)?;
            print_summary(&manifest);
            if let Some(other) = against {
                let diff = compare_runs(&run, &other)?;
                if diff.is_empty() {
                    println!("diff: empty (all ratio deltas zero)");
                } else {
                    println!(
                        "diff: {} rows, max |delta| {:.3}%, all positive: {}",
                        diff.rows.len(),
                        diff.max_abs_delta * 100.0,
                        diff.all_deltas_positive
                    );
                    for row in &diff.rows {
                        println!(
                            "  {} : {:.6e} -> {:.6e} ({:+.2}%)",
                            row.key,
                            row.ratio_a,
                            row.ratio_b,
                            row.delta * 100.0
                        );
                    }
                }
            }
            Ok(!manifest.any_failure())
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
