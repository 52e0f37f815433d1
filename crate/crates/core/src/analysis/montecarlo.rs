use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, ChannelStats};
use crate::analysis::payload_symbols;
use crate::pipeline::{
    concat_encode, decode_soft, random_message, rm_stage, Channel, DecoderKind, HqcPreset,
};

/// Trials per shard. Shard s draws from stream s of the run seed, so results
/// do not depend on how shards are spread over threads.
pub const SHARD_SIZE: u64 = 256;

/// 97.5 % standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95 % confidence.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if failures == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderTally {
    pub decoder: DecoderKind,
    pub failures: u64,
    pub trials: u64,
}

impl DecoderTally {
    pub fn dfr(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.failures as f64 / self.trials as f64
        }
    }

    pub fn ci(&self) -> (f64, f64) {
        wilson_interval(self.failures, self.trials)
    }

    pub fn log2_dfr(&self) -> f64 {
        self.dfr().log2()
    }
}

/// Paired Monte Carlo outcome: every decoder saw the same corrupted words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfrReport {
    pub tallies: Vec<DecoderTally>,
    /// `escapes[a][b]`: samples where decoder a recovered the message and
    /// decoder b did not. Zero means success(a) ⊆ success(b).
    pub escapes: Vec<Vec<u64>>,
    /// Samples where some decoder reported success with a wrong message.
    pub miscorrections: Vec<u64>,
}

impl DfrReport {
    fn index(&self, d: DecoderKind) -> Option<usize> {
        self.tallies.iter().position(|t| t.decoder == d)
    }

    pub fn tally(&self, d: DecoderKind) -> Option<&DecoderTally> {
        self.index(d).map(|i| &self.tallies[i])
    }

    /// Samples violating success(a) ⊆ success(b).
    pub fn inclusion_violations(&self, a: DecoderKind, b: DecoderKind) -> Option<u64> {
        Some(self.escapes[self.index(a)?][self.index(b)?])
    }
}

#[derive(Clone)]
struct Shard {
    failures: Vec<u64>,
    miscorrections: Vec<u64>,
    escapes: Vec<Vec<u64>>,
    trials: u64,
}

impl Shard {
    fn new(d: usize) -> Self {
        Shard {
            failures: vec![0; d],
            miscorrections: vec![0; d],
            escapes: vec![vec![0; d]; d],
            trials: 0,
        }
    }

    fn merge(mut self, other: Shard) -> Shard {
        for (a, b) in self.failures.iter_mut().zip(other.failures) {
            *a += b;
        }
        for (a, b) in self.miscorrections.iter_mut().zip(other.miscorrections) {
            *a += b;
        }
        for (row, other_row) in self.escapes.iter_mut().zip(other.escapes) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
        self.trials += other.trials;
        self
    }
}

/// Runs `trials` random messages through encode, `channel` and the RM stage
/// once, then through every decoder in `decoders`. A decoder fails on a
/// sample unless it returns the transmitted message.
pub fn monte_carlo_dfr(
    preset: &HqcPreset,
    channel: &Channel,
    decoders: &[DecoderKind],
    trials: u64,
    seed: u64,
) -> Result<DfrReport, AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::NoTrials);
    }
    channel.validate(preset.payload_len())?;
    let d = decoders.len();
    let shards = trials.div_ceil(SHARD_SIZE);
    let total = (0..shards)
        .into_par_iter()
        .map(|shard| -> Result<Shard, AnalysisError> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let mut acc = Shard::new(d);
            let count = SHARD_SIZE.min(trials - shard * SHARD_SIZE);
            let mut ok = vec![false; d];
            for _ in 0..count {
                let msg = random_message(preset, &mut rng);
                let mut payload = concat_encode(&msg, preset)?;
                channel.corrupt(&mut payload, &mut rng);
                let soft = rm_stage(&payload, preset)?;
                for (k, &dec) in decoders.iter().enumerate() {
                    let res = decode_soft(&soft, &preset.rs, dec)?;
                    ok[k] = res.message.as_deref() == Some(&msg[..]);
                    if !ok[k] {
                        acc.failures[k] += 1;
                        if res.is_success() {
                            acc.miscorrections[k] += 1;
                        }
                    }
                }
                for a in 0..d {
                    for b in 0..d {
                        if ok[a] && !ok[b] {
                            acc.escapes[a][b] += 1;
                        }
                    }
                }
                acc.trials += 1;
            }
            Ok(acc)
        })
        .try_reduce(|| Shard::new(d), |a, b| Ok(a.merge(b)))?;
    Ok(DfrReport {
        tallies: decoders
            .iter()
            .zip(&total.failures)
            .map(|(&decoder, &failures)| DecoderTally {
                decoder,
                failures,
                trials: total.trials,
            })
            .collect(),
        escapes: total.escapes,
        miscorrections: total.miscorrections,
    })
}

/// How trial i selects its erasures in [`trial_failure_harness`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErasureModel {
    /// Erase every symbol with max1 ≤ θ_i, independently per symbol.
    Threshold,
    /// Erase exactly the 2i least reliable symbols of the word.
    Rank,
}

/// Per-trial failure counts: trial i fails when more than t - i erroneous
/// symbols survive its erasure set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailures {
    pub model: ErasureModel,
    pub failures: Vec<u64>,
    pub words: u64,
}

impl TrialFailures {
    pub fn rate(&self, i: usize) -> f64 {
        self.failures[i] as f64 / self.words as f64
    }

    pub fn ci(&self, i: usize) -> (f64, f64) {
        wilson_interval(self.failures[i], self.words)
    }
}

/// Counts per-trial failures over `words` channel realisations of the
/// preset's payload. Thresholds for [`ErasureModel::Threshold`] come from
/// `stats`, which should be estimated from an independent run.
pub fn trial_failure_harness(
    preset: &HqcPreset,
    channel: &Channel,
    stats: &ChannelStats,
    model: ErasureModel,
    words: u64,
    seed: u64,
) -> Result<TrialFailures, AnalysisError> {
    if words == 0 {
        return Err(AnalysisError::NoTrials);
    }
    channel.validate(preset.payload_len())?;
    let t = preset.rs.t();
    if stats.thresholds.len() <= t {
        return Err(AnalysisError::StatsTooShort {
            len: stats.thresholds.len(),
            need: t,
        });
    }
    let shards = words.div_ceil(SHARD_SIZE);
    let failures = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let mut fails = vec![0u64; t + 1];
            let count = SHARD_SIZE.min(words - shard * SHARD_SIZE);
            for _ in 0..count {
                let mut symbols = payload_symbols(preset, channel, &mut rng);
                match model {
                    ErasureModel::Threshold => {
                        for (i, f) in fails.iter_mut().enumerate() {
                            let theta = stats.thresholds[i];
                            let outside_errors = symbols
                                .iter()
                                .filter(|&&(m, ok)| !ok && theta.is_none_or(|th| m > th))
                                .count();
                            if outside_errors > t - i {
                                *f += 1;
                            }
                        }
                    }
                    ErasureModel::Rank => {
                        // Stable sort keeps ties in position order.
                        symbols.sort_by_key(|&(m, _)| m);
                        let mut outside_errors = symbols.iter().filter(|&&(_, ok)| !ok).count();
                        for (i, f) in fails.iter_mut().enumerate() {
                            if i > 0 {
                                outside_errors -= symbols[2 * i - 2..2 * i]
                                    .iter()
                                    .filter(|&&(_, ok)| !ok)
                                    .count();
                            }
                            if outside_errors > t - i {
                                *f += 1;
                            }
                        }
                    }
                }
            }
            fails
        })
        .reduce(
            || vec![0u64; t + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(TrialFailures {
        model,
        failures,
        words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmd::UpdateVariant;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_993_5).abs() < 1e-6);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403_831_7).abs() < 1e-6);
        assert!((hi - 0.596_168_3).abs() < 1e-6);
        assert_eq!(wilson_interval(10, 10).1, 1.0);
    }

    #[test]
    fn noiseless_run_has_no_failures() {
        let p = HqcPreset::named("gmd-128").unwrap();
        let decoders = [
            DecoderKind::Hard,
            DecoderKind::ErasureOnly,
            DecoderKind::Chase(3),
            DecoderKind::Gmd(UpdateVariant::Literal),
        ];
        let r = monte_carlo_dfr(&p, &Channel::Bernoulli(0.0), &decoders, 300, 4).unwrap();
        for t in &r.tallies {
            assert_eq!((t.failures, t.trials), (0, 300));
        }
    }

    #[test]
    fn paired_counts_are_consistent() {
        let p = HqcPreset::named("gmd-128").unwrap();
        let decoders = [DecoderKind::Hard, DecoderKind::Gmd(UpdateVariant::Literal)];
        let r = monte_carlo_dfr(&p, &Channel::Bernoulli(0.41), &decoders, 600, 5).unwrap();
        let hard = r.tally(DecoderKind::Hard).unwrap().failures;
        let gmd = r.tally(decoders[1]).unwrap().failures;
        // failures(b) - failures(a) = escapes[a][b] - escapes[b][a].
        assert_eq!(
            gmd as i64 - hard as i64,
            r.escapes[0][1] as i64 - r.escapes[1][0] as i64
        );
        assert_eq!(r.inclusion_violations(decoders[0], decoders[1]), Some(0));
        assert!(hard > 0);
    }

    #[test]
    fn shard_layout_is_fixed() {
        let p = HqcPreset::named("gmd-128").unwrap();
        let d = [DecoderKind::Hard];
        let a = monte_carlo_dfr(&p, &Channel::Bernoulli(0.33), &d, 700, 6).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b =
            pool.install(|| monte_carlo_dfr(&p, &Channel::Bernoulli(0.33), &d, 700, 6).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rank_and_threshold_agree_at_trial_zero() {
        let p = HqcPreset::named("gmd-128").unwrap();
        let ch = Channel::Bernoulli(0.33);
        let stats = crate::analysis::estimate_channel_stats(&p, &ch, 20_000, 8).unwrap();
        let th = trial_failure_harness(&p, &ch, &stats, ErasureModel::Threshold, 500, 9).unwrap();
        let rk = trial_failure_harness(&p, &ch, &stats, ErasureModel::Rank, 500, 9).unwrap();
        // Same words, and trial 0 erases nothing in either model.
        assert_eq!(th.failures[0], rk.failures[0]);
        assert_eq!(th.words, 500);
    }
}
