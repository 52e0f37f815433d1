use std::fmt::Write as _;

use hqc_gmd::analysis::{
    ambient_length, estimate_channel_stats, gmd_bound, is_prime, monte_carlo_dfr,
    smallest_prime_above, two_is_primitive_root, ChannelStats, DfrReport,
};
use hqc_gmd::pipeline::{Channel, HqcPreset};
use serde::Serialize;

use crate::config::{RunConfig, StatsMode};
use crate::{to_csv, CliError, Output, CHANNEL_NOTE};

/// Published ambient lengths of the named presets.
pub const KNOWN_LENGTHS: [(&str, u64); 4] = [
    ("hqc-128", 17669),
    ("hqc-192", 35851),
    ("hqc-256", 57637),
    ("gmd-128", 13829),
];

#[derive(Debug, Serialize)]
struct ParamsRow {
    preset: String,
    security: Option<u32>,
    n_rs: usize,
    k_rs: usize,
    t: usize,
    m: usize,
    payload_bits: u64,
    n: u64,
    smallest_prime_above: u64,
    two_is_primitive_root: bool,
    ratio_to_hqc128: f64,
}

pub fn cmd_params(config: &RunConfig) -> Result<Output, CliError> {
    let presets = if config.has_code() {
        vec![config.code()?]
    } else {
        HqcPreset::NAMES
            .iter()
            .map(|name| HqcPreset::named(name))
            .collect::<Result<_, _>>()?
    };
    let reference = HqcPreset::named("hqc-128")?.n as f64;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut report = String::new();
    writeln!(
        report,
        "{:<8} {:>4} {:>5} {:>5} {:>3} {:>2} {:>8} {:>7} {:>7} {:>6}",
        "preset", "sec", "n_rs", "k_rs", "t", "m", "payload", "n", "p>pay", "ratio"
    )
    .unwrap();
    for p in &presets {
        let payload = p.payload_len() as u64;
        let plain = smallest_prime_above(payload);
        let row = ParamsRow {
            preset: p.name.clone(),
            security: p.security,
            n_rs: p.rs.n(),
            k_rs: p.rs.k(),
            t: p.rs.t(),
            m: p.rm.multiplicity(),
            payload_bits: payload,
            n: p.n,
            smallest_prime_above: plain,
            two_is_primitive_root: two_is_primitive_root(p.n),
            ratio_to_hqc128: p.n as f64 / reference,
        };
        if !(is_prime(p.n)
            && row.two_is_primitive_root
            && p.n > payload
            && p.n == ambient_length(payload))
        {
            failures.push(format!(
                "{}: n = {} is not the ambient length of {payload}",
                p.name, p.n
            ));
        }
        if let Some(&(_, known)) = KNOWN_LENGTHS.iter().find(|(name, _)| *name == p.name) {
            if known != p.n {
                failures.push(format!(
                    "{}: n = {} differs from the published {known}",
                    p.name, p.n
                ));
            }
        }
        writeln!(
            report,
            "{:<8} {:>4} {:>5} {:>5} {:>3} {:>2} {:>8} {:>7} {:>7} {:>6.3}",
            row.preset,
            row.security.map_or("-".to_string(), |s| s.to_string()),
            row.n_rs,
            row.k_rs,
            row.t,
            row.m,
            row.payload_bits,
            row.n,
            row.smallest_prime_above,
            row.ratio_to_hqc128
        )
        .unwrap();
        rows.push(row);
    }
    writeln!(
        report,
        "n is the least prime above m*128*n_rs modulo which 2 is a primitive root; \
         p>pay is the plain least prime above the payload, shown where the two differ"
    )
    .unwrap();
    for f in &failures {
        writeln!(report, "check failed: {f}").unwrap();
    }
    let csv = to_csv(&rows)?;
    Output::new(config, report, csv, &rows, failures.is_empty())
}

#[derive(Debug, Serialize)]
struct RoundtripRow {
    channel_param: f64,
    decoder: String,
    n_rs: usize,
    trials: u64,
    recovered: u64,
    flagged: u64,
    miscorrected: u64,
}

/// Paired runs for every channel point, in sweep order.
fn paired_runs(
    config: &RunConfig,
    preset: &HqcPreset,
    channels: &[Channel],
) -> Result<Vec<(Channel, DfrReport)>, CliError> {
    let decoders = config.decoder_set();
    channels
        .iter()
        .map(|ch| {
            Ok((
                *ch,
                monte_carlo_dfr(preset, ch, &decoders, config.trials, config.seed)?,
            ))
        })
        .collect()
}

pub fn cmd_roundtrip(config: &RunConfig) -> Result<Output, CliError> {
    let preset = config.code()?;
    let channels = if config.channels.is_empty() {
        vec![Channel::Bernoulli(0.0)]
    } else {
        config.channels.clone()
    };
    let runs = paired_runs(config, &preset, &channels)?;
    let mut rows = Vec::new();
    let mut report = String::new();
    writeln!(
        report,
        "{} RS({},{}) m={}",
        preset.name,
        preset.rs.n(),
        preset.rs.k(),
        preset.rm.multiplicity()
    )
    .unwrap();
    for (ch, run) in &runs {
        writeln!(report, "{ch}").unwrap();
        for (tally, &mis) in run.tallies.iter().zip(&run.miscorrections) {
            let row = RoundtripRow {
                channel_param: ch.param(),
                decoder: tally.decoder.to_string(),
                n_rs: preset.rs.n(),
                trials: tally.trials,
                recovered: tally.trials - tally.failures,
                flagged: tally.failures - mis,
                miscorrected: mis,
            };
            writeln!(
                report,
                "  {:<10} recovered {:>8}/{:<8} flagged {:>8} miscorrected {:>8}",
                row.decoder, row.recovered, row.trials, row.flagged, row.miscorrected
            )
            .unwrap();
            rows.push(row);
        }
    }
    let verified = rows.iter().all(|r| r.miscorrected == 0);
    if !verified {
        writeln!(
            report,
            "check failed: a decoder reported success with a wrong message"
        )
        .unwrap();
    }
    writeln!(report, "{CHANNEL_NOTE}").unwrap();
    let csv = to_csv(&rows)?;
    Output::new(config, report, csv, &rows, verified)
}

#[derive(Debug, Serialize)]
struct DfrRow {
    channel_param: f64,
    decoder: String,
    n_rs: usize,
    failures: u64,
    trials: u64,
    dfr: f64,
    ci_low: f64,
    ci_high: f64,
    log2_dfr: f64,
}

#[derive(Debug, Serialize)]
struct DfrPoint {
    channel: Channel,
    decoders: Vec<String>,
    failures: Vec<u64>,
    miscorrections: Vec<u64>,
    /// `escapes[a][b]`: samples decoder a recovered and decoder b did not.
    escapes: Vec<Vec<u64>>,
    trials: u64,
}

pub fn cmd_dfr(config: &RunConfig) -> Result<Output, CliError> {
    let preset = config.code()?;
    let runs = paired_runs(config, &preset, config.channel_sweep()?)?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut report = String::new();
    writeln!(
        report,
        "{} RS({},{}) m={}",
        preset.name,
        preset.rs.n(),
        preset.rs.k(),
        preset.rm.multiplicity()
    )
    .unwrap();
    for (ch, run) in runs {
        writeln!(report, "{ch}").unwrap();
        for tally in &run.tallies {
            let (ci_low, ci_high) = tally.ci();
            let row = DfrRow {
                channel_param: ch.param(),
                decoder: tally.decoder.to_string(),
                n_rs: preset.rs.n(),
                failures: tally.failures,
                trials: tally.trials,
                dfr: tally.dfr(),
                ci_low,
                ci_high,
                log2_dfr: tally.log2_dfr(),
            };
            writeln!(
                report,
                "  {:<10} {:>8}/{:<8} dfr {:.4e} [{:.4e}, {:.4e}]",
                row.decoder, row.failures, row.trials, row.dfr, row.ci_low, row.ci_high
            )
            .unwrap();
            rows.push(row);
        }
        points.push(DfrPoint {
            channel: ch,
            decoders: run.tallies.iter().map(|t| t.decoder.to_string()).collect(),
            failures: run.tallies.iter().map(|t| t.failures).collect(),
            miscorrections: run.miscorrections,
            escapes: run.escapes,
            trials: config.trials,
        });
    }
    writeln!(report, "{CHANNEL_NOTE}").unwrap();
    let csv = to_csv(&rows)?;
    Output::new(config, report, csv, &points, true)
}

#[derive(Debug, Serialize)]
struct StatsRow {
    channel_param: f64,
    trial: usize,
    threshold: Option<u32>,
    q: f64,
    eps: f64,
    eps_upper: f64,
    eps_unobserved: bool,
    outside: u64,
    outside_errors: u64,
}

fn stats_rows(ch: &Channel, stats: &ChannelStats, rows: &mut Vec<StatsRow>) {
    for i in 0..stats.q.len() {
        rows.push(StatsRow {
            channel_param: ch.param(),
            trial: i,
            threshold: stats.thresholds[i],
            q: stats.q[i],
            eps: stats.eps[i],
            eps_upper: stats.eps_upper(i),
            eps_unobserved: stats.eps_unobserved(i),
            outside: stats.outside[i],
            outside_errors: stats.outside_errors[i],
        });
    }
}

fn quality_warnings(
    ch: &Channel,
    n_rs: usize,
    stats: &ChannelStats,
    report: &mut String,
) -> Vec<String> {
    let flagged: Vec<usize> = (0..stats.q.len())
        .filter(|&i| stats.eps_unobserved(i))
        .collect();
    if flagged.is_empty() {
        return Vec::new();
    }
    let w = format!(
        "{ch} n_rs={n_rs}: no errors observed outside the erasure set for trials {flagged:?}; \
         eps = 0 there is an estimate, eps_upper gives the rule-of-three bound"
    );
    writeln!(report, "warning: {w}").unwrap();
    vec![w]
}

#[derive(Debug, Serialize)]
struct StatsPoint {
    channel: Channel,
    stats: ChannelStats,
}

pub fn cmd_stats(config: &RunConfig) -> Result<Output, CliError> {
    let preset = config.code()?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut report = String::new();
    for ch in config.channel_sweep()? {
        let stats = estimate_channel_stats(&preset, ch, config.samples, config.seed)?;
        writeln!(report, "{ch}: {} symbols", stats.samples).unwrap();
        writeln!(
            report,
            "  {:>5} {:>9} {:>8} {:>11} {:>11}",
            "trial", "threshold", "q", "eps", "eps_upper"
        )
        .unwrap();
        for i in 0..stats.q.len() {
            writeln!(
                report,
                "  {:>5} {:>9} {:>8.5} {:>11.4e} {:>11.4e}",
                i,
                stats.thresholds[i].map_or("-".to_string(), |th| th.to_string()),
                stats.q[i],
                stats.eps[i],
                stats.eps_upper(i)
            )
            .unwrap();
        }
        quality_warnings(ch, preset.rs.n(), &stats, &mut report);
        stats_rows(ch, &stats, &mut rows);
        points.push(StatsPoint {
            channel: *ch,
            stats,
        });
    }
    writeln!(report, "{CHANNEL_NOTE}").unwrap();
    let csv = to_csv(&rows)?;
    Output::new(config, report, csv, &points, true)
}

#[derive(Debug, Serialize)]
struct BoundRow {
    channel_param: f64,
    n_rs: usize,
    t: usize,
    /// Trial index, or "min" for the overall bound.
    trial: String,
    threshold: Option<u32>,
    q: f64,
    eps: f64,
    eps_unobserved: bool,
    log2_bound: f64,
}

#[derive(Debug, Serialize)]
struct BoundPoint {
    channel: Channel,
    n_rs: usize,
    t: usize,
    per_trial_log2: Vec<f64>,
    overall_log2: f64,
    best_trial: usize,
}

/// Code lengths of the bound sweep: every n_rs in range with n_rs - k_rs
/// even and positive.
fn sweep_lengths(config: &RunConfig, preset: &HqcPreset) -> Result<Vec<usize>, CliError> {
    let k = preset.rs.k();
    let (lo, hi) = config.n_rs_sweep.unwrap_or((preset.rs.n(), preset.rs.n()));
    let lengths: Vec<usize> = (lo..=hi)
        .filter(|&n| n > k && (n - k).is_multiple_of(2) && n <= 255)
        .collect();
    if lengths.is_empty() {
        return Err(CliError::Config(format!(
            "no valid n_rs in {lo}:{hi} for k_rs = {k}"
        )));
    }
    Ok(lengths)
}

pub fn cmd_bound(config: &RunConfig) -> Result<Output, CliError> {
    let preset = config.code()?;
    let lengths = sweep_lengths(config, &preset)?;
    let k = preset.rs.k();
    let t_max = (lengths[lengths.len() - 1] - k) / 2;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    let mut report = String::new();
    for ch in config.channel_sweep()? {
        let base = estimate_channel_stats(&preset, ch, config.samples, config.seed)?;
        let hist = base
            .histogram
            .as_ref()
            .expect("estimated stats carry their histogram");
        let fixed = ChannelStats::from_histogram(hist, preset.rs.n(), t_max);
        writeln!(
            report,
            "{ch}: {} symbols, {:?} stats",
            base.samples, config.stats_mode
        )
        .unwrap();
        writeln!(
            report,
            "  {:>4} {:>3} {:>12} {:>5}",
            "n_rs", "t", "log2 bound", "trial"
        )
        .unwrap();
        for &n_rs in &lengths {
            let t = (n_rs - k) / 2;
            let stats = match config.stats_mode {
                StatsMode::PerCode => ChannelStats::from_histogram(hist, n_rs, t),
                StatsMode::Fixed => fixed.clone(),
            };
            let bound = gmd_bound(n_rs, t, &stats)?;
            let log2 = bound.per_trial_log2();
            for (i, &b) in log2.iter().enumerate() {
                rows.push(BoundRow {
                    channel_param: ch.param(),
                    n_rs,
                    t,
                    trial: i.to_string(),
                    threshold: stats.thresholds[i],
                    q: stats.q[i],
                    eps: stats.eps[i],
                    eps_unobserved: stats.eps_unobserved(i),
                    log2_bound: b,
                });
            }
            let best = bound.best_trial();
            rows.push(BoundRow {
                channel_param: ch.param(),
                n_rs,
                t,
                trial: "min".to_string(),
                threshold: stats.thresholds[best],
                q: stats.q[best],
                eps: stats.eps[best],
                eps_unobserved: stats.eps_unobserved(best),
                log2_bound: bound.overall_log2(),
            });
            writeln!(
                report,
                "  {:>4} {:>3} {:>12.3} {:>5}",
                n_rs,
                t,
                bound.overall_log2(),
                best
            )
            .unwrap();
            let mut trimmed = stats.clone();
            trimmed.q.truncate(t + 1);
            trimmed.eps.truncate(t + 1);
            trimmed.thresholds.truncate(t + 1);
            trimmed.outside.truncate(t + 1);
            trimmed.outside_errors.truncate(t + 1);
            warnings.extend(quality_warnings(ch, n_rs, &trimmed, &mut report));
            points.push(BoundPoint {
                channel: *ch,
                n_rs,
                t,
                per_trial_log2: log2,
                overall_log2: bound.overall_log2(),
                best_trial: best,
            });
        }
    }
    writeln!(report, "{CHANNEL_NOTE}").unwrap();
    let csv = to_csv(&rows)?;
    #[derive(Serialize)]
    struct BoundResults {
        points: Vec<BoundPoint>,
        warnings: Vec<String>,
    }
    Output::new(config, report, csv, BoundResults { points, warnings }, true)
}
