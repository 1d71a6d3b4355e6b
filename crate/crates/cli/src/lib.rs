//! Scenario driver, data export and acceptance suite for `amt-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod config;
pub mod manifest;
pub mod scenarios;

use std::path::{Path, PathBuf};
use std::time::Instant;

use amt_core::AmtError;

pub use acceptance::{
    run_acceptance, AcceptanceReport, CriterionResult, Tolerances, PRIMARY_SUITE,
};
pub use config::{ConfigError, Scenario, ScenarioConfig};
pub use manifest::{FileRecord, Manifest, MANIFEST_NAME};
pub use scenarios::{run_scenario, ScenarioOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INTEGRATION: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

#[derive(Debug)]
pub enum Error {
    Config(ConfigError),
    Integration(AmtError),
    Io(std::io::Error),
    Acceptance(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => EXIT_CONFIG,
            Error::Integration(_) | Error::Io(_) => EXIT_INTEGRATION,
            Error::Acceptance(_) => EXIT_ACCEPTANCE,
        }
    }
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::Config(e) => write!(f, "config error: {e}"),
            Error::Integration(e) => write!(f, "integration failure: {e}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Acceptance(e) => write!(f, "acceptance failure: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        Error::Config(e)
    }
}

impl From<AmtError> for Error {
    fn from(e: AmtError) -> Self {
        match e {
            AmtError::InvalidParameter(_) | AmtError::InvalidGrid(_) => {
                Error::Config(ConfigError(e.to_string()))
            }
            other => Error::Integration(other),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

/// Loads a TOML config, or the config echoed in a manifest.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, Error> {
    if manifest::is_manifest(path) {
        Ok(Manifest::load(path)?.config()?)
    } else {
        Ok(ScenarioConfig::load(path)?)
    }
}

/// Runs `cfg`, writes its files and the manifest into `out_dir`.
pub fn run_to_dir(cfg: &ScenarioConfig, out_dir: &Path) -> Result<Manifest, Error> {
    let start = Instant::now();
    let output = run_scenario(cfg)?;
    let wall_clock_s = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::with_capacity(output.files.len());
    for f in &output.files {
        std::fs::write(out_dir.join(&f.name), &f.contents)?;
        files.push(FileRecord {
            name: f.name.clone(),
            bytes: f.contents.len(),
            sha256: manifest::sha256_hex(f.contents.as_bytes()),
        });
    }
    let m = Manifest {
        tool: "amt".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: cfg.scenario.name().into(),
        config: cfg.to_toml(),
        derived: output.derived,
        warnings: output.warnings,
        threads: rayon::current_num_threads(),
        wall_clock_s,
        files,
    };
    std::fs::write(out_dir.join(MANIFEST_NAME), m.to_json())?;
    Ok(m)
}

/// Output directory: command line, then config, then the fallback.
pub fn resolve_out_dir(cli: Option<PathBuf>, cfg: &ScenarioConfig, fallback: PathBuf) -> PathBuf {
    cli.or_else(|| cfg.out_dir.clone()).unwrap_or(fallback)
}
