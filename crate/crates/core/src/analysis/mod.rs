//! DFR analytics: channel statistics, the per-trial Chernoff bound and its
//! minimum over GMD trials, Monte Carlo DFR estimation and parameter helpers.

mod bound;
mod montecarlo;
mod primes;
mod stats;

use thiserror::Error;

use crate::pipeline::PipelineError;

pub use bound::{gmd_bound, kl_divergence, ln_trial_bound, trial_bound, BoundResult};
pub use montecarlo::{
    monte_carlo_dfr, trial_failure_harness, wilson_interval, DecoderTally, DfrReport, ErasureModel,
    TrialFailures, SHARD_SIZE,
};
pub use primes::{ambient_length, is_prime, smallest_prime_above, two_is_primitive_root};
pub use stats::{
    estimate_channel_stats, payload_symbols, ChannelStats, ReliabilityHistogram, MIN_SAMPLES,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("divergence undefined for x = {x}, y = {y}")]
    Domain { x: f64, y: f64 },
    #[error("{got} samples given, at least {need} required")]
    InsufficientSamples { got: u64, need: u64 },
    #[error("statistics cover trials 0..{len}, need 0..={need}")]
    StatsTooShort { len: usize, need: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}
