//! Run manifests and run-to-run diffing.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TaskOutcome {
    Pass,
    Fail,
    Error,
    Info,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaskStatus {
    pub id: String,
    pub outcome: TaskOutcome,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub artifact_version: String,
    pub wall_clock_secs: f64,
    pub seed: u64,
    pub s_max: u32,
    pub tolerance: f64,
    pub tasks: Vec<TaskStatus>,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn any_failure(&self) -> bool {
        self.tasks
            .iter()
            .any(|t| matches!(t.outcome, TaskOutcome::Fail | TaskOutcome::Error))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<RunManifest> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Clone, Debug)]
pub struct DiffRow {
    pub key: String,
    pub ratio_a: f64,
    pub ratio_b: f64,
    /// Relative delta `ratio_b / ratio_a − 1`.
    pub delta: f64,
}

#[derive(Clone, Debug, Default)]
pub struct DiffReport {
    pub rows: Vec<DiffRow>,
    pub max_abs_delta: f64,
    pub all_deltas_positive: bool,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.delta == 0.0)
    }
}

/// Joins the estimate tables of two runs of the same experiment on their
/// non-resolution key columns and reports per-row ratio deltas.
pub fn compare_runs(dir_a: &Path, dir_b: &Path) -> Result<DiffReport> {
    let ma = RunManifest::load(dir_a)?;
    let mb = RunManifest::load(dir_b)?;
    if ma.experiment != mb.experiment {
        bail!(
            "SchemaMismatch: experiments differ ({} vs {})",
            ma.experiment,
            mb.experiment
        );
    }
    let name = "estimates.csv";
    let ta = crate::report::CsvTable::parse(
        &std::fs::read_to_string(dir_a.join("reports").join(name))
            .with_context(|| "run A has no estimates.csv")?,
    )
    .context("parse A")?;
    let tb = crate::report::CsvTable::parse(
        &std::fs::read_to_string(dir_b.join("reports").join(name))
            .with_context(|| "run B has no estimates.csv")?,
    )
    .context("parse B")?;
    if ta.header != tb.header {
        bail!("SchemaMismatch: estimate headers differ");
    }
    let ratio_col = ta.column("ratio").context("no ratio column")?;
    // Join on the identity columns only: the measured sides and the
    // resolution vary between runs of one ladder.
    let excluded: Vec<usize> = ["ratio", "h", "left", "right", "verdict"]
        .iter()
        .filter_map(|c| ta.column(c))
        .collect();
    let key_of = |row: &[String]| -> String {
        row.iter()
            .enumerate()
            .filter(|(i, _)| !excluded.contains(i))
            .map(|(_, v)| v.clone())
            .collect::<Vec<_>>()
            .join("|")
    };
    // Repeated keys (a ladder inside one run) pair positionally; the rows
    // are sorted on disk, so occurrence order is deterministic.
    let with_occurrence = |rows: &[Vec<String>]| -> Vec<(String, String)> {
        let mut counts = std::collections::BTreeMap::new();
        rows.iter()
            .map(|row| {
                let base = key_of(row);
                let k = counts.entry(base.clone()).or_insert(0usize);
                let key = format!("{base}#{k}");
                *k += 1;
                (key, row[ratio_col].clone())
            })
            .collect()
    };
    let map_b: std::collections::BTreeMap<String, String> =
        with_occurrence(&tb.rows).into_iter().collect();
    let mut out = DiffReport {
        all_deltas_positive: true,
        ..Default::default()
    };
    for (key, ratio_a) in with_occurrence(&ta.rows) {
        if let Some(rb) = map_b.get(&key) {
            let a: f64 = ratio_a.parse().unwrap_or(f64::NAN);
            let b: f64 = rb.parse().unwrap_or(f64::NAN);
            let delta = if a != 0.0 { b / a - 1.0 } else { f64::NAN };
            out.max_abs_delta = out.max_abs_delta.max(delta.abs());
            if !(delta > 0.0) {
                out.all_deltas_positive = false;
            }
            out.rows.push(DiffRow {
                key,
                ratio_a: a,
                ratio_b: b,
                delta,
            });
        }
    }
    Ok(out)
}
