//! Command-line front end: parameter reports, round trips, Monte Carlo DFR
//! runs, channel statistics and bound sweeps, each emitting a stable CSV
//! table and a JSON summary.

mod commands;
pub mod config;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use hqc_gmd::analysis::AnalysisError;
use hqc_gmd::pipeline::PipelineError;
use serde::Serialize;
use thiserror::Error;

pub use commands::{cmd_bound, cmd_dfr, cmd_params, cmd_roundtrip, cmd_stats, KNOWN_LENGTHS};
pub use config::{Args, Command, RunConfig, StatsMode};

/// Printed with every channel-driven result.
pub const CHANNEL_NOTE: &str =
    "note: the channel is an abstract bit-flip model standing in for the HQC \
noise term; failure rates and bounds computed here are not HQC decryption failure rates";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Every error is reported as a configuration error; 1 is reserved for
    /// runs that completed but failed a check.
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

/// Result of one command.
#[derive(Debug, Clone)]
pub struct Output {
    pub command: Command,
    /// Human-readable report for stdout.
    pub report: String,
    pub csv: String,
    /// JSON summary embedding the configuration and version.
    pub summary: serde_json::Value,
    /// False when a verification check failed.
    pub verified: bool,
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    version: &'a str,
    config: &'a RunConfig,
    channel_note: &'a str,
    verified: bool,
    results: T,
}

impl Output {
    pub(crate) fn new<T: Serialize>(
        config: &RunConfig,
        report: String,
        csv: String,
        results: T,
        verified: bool,
    ) -> Result<Self, CliError> {
        let summary = serde_json::to_value(Summary {
            version: VERSION,
            config,
            channel_note: CHANNEL_NOTE,
            verified,
            results,
        })?;
        Ok(Output {
            command: config.command,
            report,
            csv,
            summary,
            verified,
        })
    }

    pub fn exit_code(&self) -> i32 {
        if self.verified {
            EXIT_OK
        } else {
            EXIT_VERIFICATION
        }
    }

    fn stem(&self) -> String {
        serde_json::to_value(self.command)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_else(|| "run".to_string())
    }

    /// Writes `<command>.csv` and `<command>.json` into `dir`, returning the
    /// paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir)?;
        let stem = self.stem();
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        fs::write(&csv_path, &self.csv)?;
        fs::write(
            &json_path,
            serde_json::to_string_pretty(&self.summary)? + "\n",
        )?;
        Ok(vec![csv_path, json_path])
    }
}

/// Runs `config` on a worker pool of the configured size.
pub fn run(config: &RunConfig) -> Result<Output, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()?;
    pool.install(|| match config.command {
        Command::Params => cmd_params(config),
        Command::Roundtrip => cmd_roundtrip(config),
        Command::Dfr => cmd_dfr(config),
        Command::Stats => cmd_stats(config),
        Command::Bound => cmd_bound(config),
    })
}

/// Serializes rows to CSV text with a header line.
pub(crate) fn to_csv<R: Serialize>(rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
