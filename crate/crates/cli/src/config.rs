use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use hqc_gmd::gmd::UpdateVariant;
use hqc_gmd::pipeline::{Channel, DecoderKind, HqcPreset};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Preset used when neither `--preset` nor `--n-rs` is given.
pub const DEFAULT_PRESET: &str = "gmd-128";
pub const DEFAULT_K_RS: usize = 16;
pub const DEFAULT_MULTIPLICITY: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Code parameters and ambient-length cross-check.
    Params,
    /// Encode, corrupt and decode random messages.
    Roundtrip,
    /// Paired Monte Carlo decoding failure rates.
    Dfr,
    /// Per-trial erasure statistics of the RM stage.
    Stats,
    /// Per-trial and overall GMD failure bounds over an n_rs sweep.
    Bound,
}

/// How `bound` turns one reliability histogram into per-code statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StatsMode {
    /// Thresholds re-derived for every n_rs of the sweep.
    PerCode,
    /// q[i], eps[i] derived once for the base code and reused for every n_rs.
    Fixed,
}

/// Everything a run depends on. A run is reproducible from this alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<String>,
    pub n_rs: Option<usize>,
    pub k_rs: Option<usize>,
    pub m: Option<usize>,
    pub channels: Vec<Channel>,
    pub decoders: Vec<DecoderKind>,
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub workers: usize,
    /// Symbols sampled for channel statistics.
    pub samples: u64,
    /// Inclusive n_rs range for `bound`, stepped by 2.
    pub n_rs_sweep: Option<(usize, usize)>,
    pub stats_mode: StatsMode,
    /// Output directory for CSV and JSON files.
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            preset: None,
            n_rs: None,
            k_rs: None,
            m: None,
            channels: Vec::new(),
            decoders: Vec::new(),
            trials: 1000,
            seed: 1,
            workers: 0,
            samples: 1_000_000,
            n_rs_sweep: None,
            stats_mode: StatsMode::PerCode,
            out: None,
        }
    }

    /// Whether the user picked a code explicitly.
    pub fn has_code(&self) -> bool {
        self.preset.is_some() || self.n_rs.is_some()
    }

    pub fn code(&self) -> Result<HqcPreset, CliError> {
        match (&self.preset, self.n_rs) {
            (Some(_), Some(_)) => Err(CliError::Config("--preset and --n-rs are exclusive".into())),
            (Some(name), None) => {
                if self.k_rs.is_some() || self.m.is_some() {
                    return Err(CliError::Config("--k-rs and --m need --n-rs".into()));
                }
                Ok(HqcPreset::named(name)?)
            }
            (None, Some(n_rs)) => Ok(HqcPreset::custom(
                n_rs,
                self.k_rs.unwrap_or(DEFAULT_K_RS),
                self.m.unwrap_or(DEFAULT_MULTIPLICITY),
            )?),
            (None, None) => {
                if self.k_rs.is_some() || self.m.is_some() {
                    return Err(CliError::Config("--k-rs and --m need --n-rs".into()));
                }
                Ok(HqcPreset::named(DEFAULT_PRESET)?)
            }
        }
    }

    /// Channel sweep, requiring at least one point.
    pub fn channel_sweep(&self) -> Result<&[Channel], CliError> {
        if self.channels.is_empty() {
            return Err(CliError::Config(
                "at least one --channel is required".into(),
            ));
        }
        Ok(&self.channels)
    }

    /// Decoders to run; defaults to all four families.
    pub fn decoder_set(&self) -> Vec<DecoderKind> {
        if self.decoders.is_empty() {
            vec![
                DecoderKind::Hard,
                DecoderKind::ErasureOnly,
                DecoderKind::Chase(3),
                DecoderKind::Gmd(UpdateVariant::Literal),
            ]
        } else {
            self.decoders.clone()
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hqc-gmd",
    version,
    about = "Concatenated RM/RS decoding with GMD soft decisions"
)]
pub struct Args {
    pub command: Command,
    /// hqc-128, hqc-192, hqc-256 or gmd-128.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long = "n-rs")]
    pub n_rs: Option<usize>,
    #[arg(long = "k-rs")]
    pub k_rs: Option<usize>,
    /// RM repetition multiplicity.
    #[arg(long)]
    pub m: Option<usize>,
    /// bernoulli:<p> or fixed:<w>; repeat for a sweep.
    #[arg(long = "channel")]
    pub channels: Vec<Channel>,
    /// Comma-separated list of hard, erasure, chase:<depth>, gmd, gmd-scaled.
    #[arg(long, value_delimiter = ',')]
    pub decoders: Vec<DecoderKind>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 0 picks the number of CPUs.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Symbols sampled for channel statistics.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// n_rs range LO:HI for bound sweeps.
    #[arg(long = "n-rs-sweep", value_parser = parse_range)]
    pub n_rs_sweep: Option<(usize, usize)>,
    #[arg(long = "stats-mode", value_enum, default_value_t = StatsMode::PerCode)]
    pub stats_mode: StatsMode,
    /// Directory receiving <command>.csv and <command>.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: usize = lo.parse().map_err(|e| format!("{e}"))?;
    let hi: usize = hi.parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err("LO exceeds HI".into());
    }
    Ok((lo, hi))
}

impl From<Args> for RunConfig {
    fn from(a: Args) -> Self {
        RunConfig {
            command: a.command,
            preset: a.preset,
            n_rs: a.n_rs,
            k_rs: a.k_rs,
            m: a.m,
            channels: a.channels,
            decoders: a.decoders,
            trials: a.trials,
            seed: a.seed,
            workers: a.workers,
            samples: a.samples,
            n_rs_sweep: a.n_rs_sweep,
            stats_mode: a.stats_mode,
            out: a.out,
        }
    }
}
