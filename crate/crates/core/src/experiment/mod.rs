//! Config-driven scenarios, report files and the bundled example catalog.
//!
//! A run is fully determined by the config text and the seed. Reports embed
//! the SHA-256 of the config and the hashes of their CSV side files, and
//! carry a list of invariants that `circlelab verify` re-checks.

mod catalog;
mod config;
mod report;
mod scenarios;

pub use catalog::{builtin_config, list_builtin_examples, BuiltinExample};
pub use config::{
    sha256_hex, BoundarySection, Config, DistortionSection, EntropySection, GeneratorEntry, LoadedConfig, LyapunovSection,
    NearIdentitySection, Scenario, SchwarzianSection, StationarySection, Weights,
};
pub use report::{verify_report, write_report, Comparison, Invariant, Output, Report, SideFile, Verification};
pub use scenarios::Run;

use crate::{Error, Result};
use std::path::{Path, PathBuf};

/// Runs the config's scenario and builds the report; `seed` overrides the config seed.
pub fn run_config(loaded: &LoadedConfig, seed: Option<u64>) -> Result<(Report, Vec<(String, String)>)> {
    let cfg = &loaded.config;
    let seed = seed.unwrap_or(cfg.seed);
    let mut run = Run::new(cfg, seed)?;
    let out = run.run(cfg.scenario)?;
    let report = Report {
        tool: "circlelab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_name: cfg.name.clone(),
        config_sha256: loaded.sha256.clone(),
        scenario: cfg.scenario.to_string(),
        seed,
        invariants: out.invariants,
        side_files: Vec::new(),
        results: serde_json::Value::Object(out.results),
    };
    Ok((report, out.csv))
}

/// Runs a config file on `workers` threads and writes the report into `out_dir`.
///
/// The worker count changes wall time only.
pub fn run_experiment(config: &Path, seed: Option<u64>, workers: Option<usize>, out_dir: &Path) -> Result<(PathBuf, Report)> {
    let text = std::fs::read_to_string(config).map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
    run_source(&config.display().to_string(), &text, seed, workers, out_dir)
}

/// Same as [`run_experiment`] for config text; `label` prefixes config errors.
pub fn run_source(label: &str, text: &str, seed: Option<u64>, workers: Option<usize>, out_dir: &Path) -> Result<(PathBuf, Report)> {
    let loaded = Config::parse(text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{label}: {msg}")),
        other => other,
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (report, csv) = pool.install(|| run_config(&loaded, seed))?;
    write_report(out_dir, report, &csv)
}
