use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::pipeline::{Channel, HqcPreset};

/// Smallest sample count accepted by [`estimate_channel_stats`].
pub const MIN_SAMPLES: u64 = 10_000;

/// Payload experiments per parallel shard.
const STATS_SHARD: u64 = 64;

/// Counts of RM decoding outcomes per reliability value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliabilityHistogram {
    /// `total[v]` symbols had max1 = v; `errors[v]` of them decoded wrong.
    pub total: Vec<u64>,
    pub errors: Vec<u64>,
}

impl ReliabilityHistogram {
    pub fn new(max_reliability: u32) -> Self {
        let len = max_reliability as usize + 1;
        ReliabilityHistogram {
            total: vec![0; len],
            errors: vec![0; len],
        }
    }

    pub fn record(&mut self, max1: u32, correct: bool) {
        self.total[max1 as usize] += 1;
        if !correct {
            self.errors[max1 as usize] += 1;
        }
    }

    pub fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.total.iter_mut().zip(&other.total) {
            *a += b;
        }
        for (a, b) in self.errors.iter_mut().zip(&other.errors) {
            *a += b;
        }
        self
    }

    pub fn samples(&self) -> u64 {
        self.total.iter().sum()
    }

    /// (count, errors) of symbols with max1 ≤ θ; `None` erases nothing.
    fn at_most(&self, theta: Option<u32>) -> (u64, u64) {
        match theta {
            None => (0, 0),
            Some(th) => {
                let end = (th as usize + 1).min(self.total.len());
                (
                    self.total[..end].iter().sum(),
                    self.errors[..end].iter().sum(),
                )
            }
        }
    }
}

/// Per-trial survival probability q[i] and conditional error rate eps[i]
/// under threshold erasing: a symbol is erased in trial i iff max1 ≤ θ_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub q: Vec<f64>,
    pub eps: Vec<f64>,
    /// θ_i, `None` when nothing is erased.
    pub thresholds: Vec<Option<u32>>,
    /// Symbols above θ_i and how many of them were wrong.
    pub outside: Vec<u64>,
    pub outside_errors: Vec<u64>,
    pub samples: u64,
    pub histogram: Option<ReliabilityHistogram>,
}

impl ChannelStats {
    /// Stats given directly as rates, without sampling information.
    pub fn from_rates(q: Vec<f64>, eps: Vec<f64>) -> Self {
        let len = q.len();
        ChannelStats {
            q,
            eps,
            thresholds: vec![None; len],
            outside: vec![0; len],
            outside_errors: vec![0; len],
            samples: 0,
            histogram: None,
        }
    }

    /// Chooses θ_i so that the expected number of erased symbols in a word
    /// of `n_rs` symbols is closest to 2i (lower θ on ties), never erasing
    /// every observed symbol.
    pub fn from_histogram(hist: &ReliabilityHistogram, n_rs: usize, t: usize) -> Self {
        let n = hist.samples();
        let mut candidates: Vec<Option<u32>> = vec![None];
        candidates.extend(
            (0..hist.total.len() as u32)
                .filter(|&v| hist.total[v as usize] > 0)
                .map(Some)
                .filter(|&th| hist.at_most(th).0 < n),
        );
        let mut stats = ChannelStats::from_rates(Vec::new(), Vec::new());
        stats.thresholds.clear();
        stats.outside.clear();
        stats.outside_errors.clear();
        for i in 0..=t {
            // |erased/n - 2i/n_rs| compared as |erased·n_rs - 2i·n| in integers.
            let target = 2 * i as u128 * n as u128;
            let theta = *candidates
                .iter()
                .min_by_key(|&&th| (hist.at_most(th).0 as u128 * n_rs as u128).abs_diff(target))
                .expect("the empty threshold is always a candidate");
            let (erased, erased_errors) = hist.at_most(theta);
            let outside = n - erased;
            let outside_errors = hist.errors.iter().sum::<u64>() - erased_errors;
            stats.q.push(if n == 0 {
                1.0
            } else {
                outside as f64 / n as f64
            });
            stats.eps.push(if outside == 0 {
                0.0
            } else {
                outside_errors as f64 / outside as f64
            });
            stats.thresholds.push(theta);
            stats.outside.push(outside);
            stats.outside_errors.push(outside_errors);
        }
        stats.samples = n;
        stats.histogram = Some(hist.clone());
        stats
    }

    /// eps[i] when errors were observed, otherwise the rule-of-three upper
    /// estimate 3 / (symbols outside the erasure set).
    pub fn eps_upper(&self, i: usize) -> f64 {
        if self.outside_errors[i] > 0 || self.outside[i] == 0 {
            self.eps[i]
        } else {
            (3.0 / self.outside[i] as f64).min(1.0)
        }
    }

    /// Copy with every unobserved eps[i] replaced by its rule-of-three upper
    /// estimate, so bounds never rest on a zero error count.
    pub fn conservative(&self) -> ChannelStats {
        let mut out = self.clone();
        for i in 0..out.eps.len() {
            out.eps[i] = self.eps_upper(i);
        }
        out
    }

    /// True when eps[i] rests on zero observed errors.
    pub fn eps_unobserved(&self, i: usize) -> bool {
        self.outside_errors[i] == 0 && self.outside[i] > 0
    }
}

/// One payload through the channel and the RM stage: (max1, correct) for
/// every RS position. The RS layer plays no role, so symbols are uniform.
pub fn payload_symbols<R: Rng + ?Sized>(
    preset: &HqcPreset,
    channel: &Channel,
    rng: &mut R,
) -> Vec<(u32, bool)> {
    let block = preset.rm.block_len();
    let symbols: Vec<u8> = (0..preset.rs.n()).map(|_| rng.gen()).collect();
    let mut payload = vec![0u8; preset.payload_len()];
    for (&s, chunk) in symbols.iter().zip(payload.chunks_exact_mut(block)) {
        preset.rm.encode_into(s, chunk);
    }
    channel.corrupt(&mut payload, rng);
    payload
        .chunks_exact(block)
        .zip(&symbols)
        .map(|(seg, &s)| {
            let d = preset.rm.decode(seg).expect("segment length matches");
            (d.max1, d.best == s)
        })
        .collect()
}

/// Samples at least `samples` symbols (whole payloads of `preset`) and
/// derives threshold stats for trials 0..=t of `preset`'s RS code.
pub fn estimate_channel_stats(
    preset: &HqcPreset,
    channel: &Channel,
    samples: u64,
    seed: u64,
) -> Result<ChannelStats, AnalysisError> {
    if samples < MIN_SAMPLES {
        return Err(AnalysisError::InsufficientSamples {
            got: samples,
            need: MIN_SAMPLES,
        });
    }
    channel.validate(preset.payload_len())?;
    let n_rs = preset.rs.n() as u64;
    let payloads = samples.div_ceil(n_rs);
    let shards = payloads.div_ceil(STATS_SHARD);
    let empty = ReliabilityHistogram::new(preset.rm.max_reliability());
    let hist = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let mut h = empty.clone();
            let count = STATS_SHARD.min(payloads - shard * STATS_SHARD);
            for _ in 0..count {
                for (max1, ok) in payload_symbols(preset, channel, &mut rng) {
                    h.record(max1, ok);
                }
            }
            h
        })
        .reduce(|| empty.clone(), |a, b| a.merge(&b));
    Ok(ChannelStats::from_histogram(
        &hist,
        preset.rs.n(),
        preset.rs.t(),
    ))
}
