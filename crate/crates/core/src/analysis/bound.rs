use serde::{Deserialize, Serialize};

use super::{AnalysisError, ChannelStats};

/// h(r) = r ln r - r + 1, the per-outcome term of the divergence written so
/// that D(x‖y) = y·h(x/y) + (1-y)·h((1-x)/(1-y)). Both terms are
/// non-negative, so there is no cancellation between them.
fn h(r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let u = r - 1.0;
    if u.abs() < 0.1 {
        // Σ_{k≥2} (-1)^k u^k / (k(k-1)).
        let mut sum = 0.0f64;
        let mut pow = u * u;
        let mut k = 2.0;
        while pow.abs() > 1e-20 * sum.abs().max(f64::MIN_POSITIVE) {
            sum += pow / (k * (k - 1.0));
            pow *= -u;
            k += 1.0;
        }
        sum
    } else {
        r * r.ln() - u
    }
}

/// Kullback-Leibler divergence between Bernoulli(x) and Bernoulli(y), in
/// nats, with 0·ln 0 = 0. For y ∈ {0, 1} the result is 0 when x = y and
/// +∞ otherwise.
pub fn kl_divergence(x: f64, y: f64) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(AnalysisError::Domain { x, y });
    }
    if y == 0.0 || y == 1.0 {
        return Ok(if x == y { 0.0 } else { f64::INFINITY });
    }
    if x == y {
        return Ok(0.0);
    }
    Ok(y * h(x / y) + (1.0 - y) * h((1.0 - x) / (1.0 - y)))
}

/// Natural log of the Chernoff bound on Pr(Bin(n_rs·q, ε) > t - i):
/// -n_rs·q·D((t-i)/(n_rs·q) ‖ ε).
///
/// Returns 0 (bound 1) when the threshold does not exceed the mean, and -∞
/// (bound 0) when no error can occur (ε = 0) or when the threshold exceeds
/// the number of surviving symbols.
pub fn ln_trial_bound(n_rs: usize, t: usize, i: usize, q: f64, eps: f64) -> f64 {
    let budget = t.saturating_sub(i) as f64;
    let mean_symbols = n_rs as f64 * q;
    if mean_symbols <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let x = budget / mean_symbols;
    if x <= eps {
        return 0.0;
    }
    if eps == 0.0 || x > 1.0 {
        return f64::NEG_INFINITY;
    }
    let d = kl_divergence(x, eps).expect("x and eps are probabilities here");
    -mean_symbols * d
}

/// Per-trial bound in [0, 1].
pub fn trial_bound(
    i: usize,
    n_rs: usize,
    t: usize,
    stats: &ChannelStats,
) -> Result<f64, AnalysisError> {
    if stats.q.len() <= i || stats.eps.len() <= i {
        return Err(AnalysisError::StatsTooShort {
            len: stats.q.len().min(stats.eps.len()),
            need: i,
        });
    }
    Ok(ln_trial_bound(n_rs, t, i, stats.q[i], stats.eps[i]).exp())
}

/// Per-trial bounds for i = 0..=t and their minimum, kept as natural logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub per_trial_ln: Vec<f64>,
}

impl BoundResult {
    pub fn per_trial(&self) -> Vec<f64> {
        self.per_trial_ln.iter().map(|v| v.exp()).collect()
    }

    pub fn overall_ln(&self) -> f64 {
        self.per_trial_ln
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn overall(&self) -> f64 {
        self.overall_ln().exp()
    }

    pub fn overall_log2(&self) -> f64 {
        self.overall_ln() / std::f64::consts::LN_2
    }

    pub fn per_trial_log2(&self) -> Vec<f64> {
        self.per_trial_ln
            .iter()
            .map(|v| v / std::f64::consts::LN_2)
            .collect()
    }

    /// Index of the trial attaining the minimum (lowest index on ties).
    pub fn best_trial(&self) -> usize {
        let best = self.overall_ln();
        self.per_trial_ln
            .iter()
            .position(|&v| v == best)
            .unwrap_or(0)
    }
}

pub fn gmd_bound(
    n_rs: usize,
    t: usize,
    stats: &ChannelStats,
) -> Result<BoundResult, AnalysisError> {
    let len = stats.q.len().min(stats.eps.len());
    if len <= t {
        return Err(AnalysisError::StatsTooShort { len, need: t });
    }
    Ok(BoundResult {
        per_trial_ln: (0..=t)
            .map(|i| ln_trial_bound(n_rs, t, i, stats.q[i], stats.eps[i]))
            .collect(),
    })
}
