//! Experiment orchestration for the Whitney/W^{2,p} verification suite:
//! configs, the sweep runners, CSV/SVG/manifest emission and run diffing.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod pool;
pub mod report;
pub mod svg;

pub use config::{DomainRef, ExperimentConfig, ExperimentId};
pub use experiments::run;
pub use manifest::{compare_runs, DiffReport, RunManifest};
