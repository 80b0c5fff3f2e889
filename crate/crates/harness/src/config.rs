//! Experiment configuration: JSON file plus flag overrides.

use std::path::PathBuf;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use w2p_core::geometry::{Domain, GraphDomainSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    WhitneySuite,
    Collar,
    DiamSums,
    FamilySuite,
    Mms,
    Greens,
    C1alpha,
    Percube,
    Thm34,
    Thm41,
    Lemma42,
    Thm51Aggregate,
    BlowupSweep,
}

impl ExperimentId {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::WhitneySuite => "whitney-suite",
            ExperimentId::Collar => "collar",
            ExperimentId::DiamSums => "diam-sums",
            ExperimentId::FamilySuite => "family-suite",
            ExperimentId::Mms => "mms",
            ExperimentId::Greens => "greens",
            ExperimentId::C1alpha => "c1alpha",
            ExperimentId::Percube => "percube",
            ExperimentId::Thm34 => "thm34",
            ExperimentId::Thm41 => "thm41",
            ExperimentId::Lemma42 => "lemma42",
            ExperimentId::Thm51Aggregate => "thm51-aggregate",
            ExperimentId::BlowupSweep => "blowup-sweep",
        }
    }

    pub fn parse(text: &str) -> Result<ExperimentId> {
        // Experiment names plus the estimate-id aliases used by `verify`.
        let id = match text.to_ascii_lowercase().as_str() {
            "whitney-suite" | "whitney" | "lem2.1" | "lem2.2" | "lem2.3" => {
                ExperimentId::WhitneySuite
            }
            "collar" | "lem2.4" => ExperimentId::Collar,
            "diam-sums" | "lem2.5" => ExperimentId::DiamSums,
            "family-suite" | "lem2.6" | "lem2.7" => ExperimentId::FamilySuite,
            "mms" => ExperimentId::Mms,
            "greens" | "lem3.1" => ExperimentId::Greens,
            "c1alpha" | "cor3.3" => ExperimentId::C1alpha,
            "percube" | "eq3.12" => ExperimentId::Percube,
            "thm34" | "thm3.4" => ExperimentId::Thm34,
            "thm41" | "thm4.1" => ExperimentId::Thm41,
            "lemma42" | "lem4.2" => ExperimentId::Lemma42,
            "thm51-aggregate" | "thm5.1" => ExperimentId::Thm51Aggregate,
            "blowup-sweep" | "blowup" => ExperimentId::BlowupSweep,
            other => bail!("unknown experiment id: {other}"),
        };
        Ok(id)
    }
}

/// Domain selector: a named family or an inline spec.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainRef {
    Named(String),
    Inline(GraphDomainSpec),
}

impl DomainRef {
    /// `flat`, `flat3d`, `bump`, `cusp:<alpha>`, or an inline spec.
    pub fn spec(&self) -> Result<GraphDomainSpec> {
        match self {
            DomainRef::Inline(s) => Ok(s.clone()),
            DomainRef::Named(name) => {
                let name = name.trim();
                if name == "flat" {
                    Ok(GraphDomainSpec::flat(2))
                } else if name == "flat3d" {
                    Ok(GraphDomainSpec::flat(3))
                } else if name == "bump" {
                    Ok(GraphDomainSpec::bump())
                } else if let Some(a) = name.strip_prefix("cusp:") {
                    let alpha: f64 = a.parse()?;
                    Ok(GraphDomainSpec::cusp(alpha))
                } else {
                    bail!("unknown domain name: {name} (use flat|flat3d|bump|cusp:<alpha>)")
                }
            }
        }
    }

    pub fn build2(&self) -> Result<Domain<2>> {
        Ok(Domain::build(self.spec()?)?)
    }

    pub fn label(&self) -> String {
        match self {
            DomainRef::Named(n) => n.clone(),
            DomainRef::Inline(s) => s.label.clone(),
        }
    }
}

fn default_seed() -> u64 {
    7
}
fn default_tol() -> f64 {
    1e-10
}
fn default_smax() -> u32 {
    10
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_cells() -> usize {
    40
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub domains: Vec<DomainRef>,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub ps: Vec<f64>,
    /// Grid spacings; each must be a negative power of two.
    #[serde(default)]
    pub hs: Vec<f64>,
    #[serde(default = "default_smax")]
    pub smax: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_cells")]
    pub max_cells: usize,
    #[serde(default)]
    pub pairs: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Emit field/grid dumps under `fields/`.
    #[serde(default)]
    pub dump_fields: bool,
    /// Emit SVG plots under `plots/`.
    #[serde(default)]
    pub plots: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        ExperimentConfig {
            experiment,
            domains: Vec::new(),
            alphas: Vec::new(),
            ps: Vec::new(),
            hs: Vec::new(),
            smax: default_smax(),
            seed: default_seed(),
            tol: default_tol(),
            max_cells: default_cells(),
            pairs: 0,
            out: default_out(),
            dump_fields: false,
            plots: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for h in &self.hs {
            let m = -h.log2();
            if !(h > &0.0) || m.fract() != 0.0 {
                bail!("h = {h} is not a negative power of two");
            }
        }
        for a in &self.alphas {
            if !(*a > 0.0 && *a <= 1.0) {
                bail!("alpha = {a} outside (0, 1]");
            }
        }
        for p in &self.ps {
            if *p <= 1.0 {
                bail!("p = {p} must exceed 1");
            }
        }
        if self.smax < 4 {
            bail!("smax must be at least 4");
        }
        Ok(())
    }

    /// Hash of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_string(self).expect("config serializes"));
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses `1/128`, `0.0078125`, or `2^-7`.
pub fn parse_h(text: &str) -> Result<f64> {
    let t = text.trim();
    if let Some((a, b)) = t.split_once('/') {
        let num: f64 = a.trim().parse()?;
        let den: f64 = b.trim().parse()?;
        return Ok(num / den);
    }
    if let Some(e) = t.strip_prefix("2^") {
        let exp: i32 = e.parse()?;
        return Ok(2f64.powi(exp));
    }
    Ok(t.parse()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_aliases() {
        assert_eq!(ExperimentId::parse("lem2.6").unwrap(), ExperimentId::FamilySuite);
        assert_eq!(ExperimentId::parse("thm4.1").unwrap(), ExperimentId::Thm41);
        assert!(ExperimentId::parse("nonsense").is_err());
    }

    #[test]
    fn h_parsing() {
        assert_eq!(parse_h("1/128").unwrap(), 1.0 / 128.0);
        assert_eq!(parse_h("2^-7").unwrap(), 1.0 / 128.0);
        assert_eq!(parse_h("0.25").unwrap(), 0.25);
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::new(ExperimentId::Mms);
        let mut b = ExperimentConfig::new(ExperimentId::Mms);
        assert_eq!(a.hash(), b.hash());
        b.seed = 8;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::new(ExperimentId::Greens);
        cfg.hs = vec![0.1];
        assert!(cfg.validate().is_err());
        cfg.hs = vec![1.0 / 64.0];
        cfg.alphas = vec![1.5];
        assert!(cfg.validate().is_err());
        cfg.alphas = vec![0.6];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn unknown_experiment_in_json_is_rejected() {
        let err = ExperimentConfig::from_json(r#"{"experiment":"mystery"}"#);
        assert!(err.is_err());
    }
}
