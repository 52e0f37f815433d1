//! Soft-input RS decoders: GMD with one-pass erasure addition, plain
//! errors-and-erasures on the 2t least reliable positions, and Chase-II.
//!
//! GMD trial i erases the 2i least reliable symbols. Instead of rerunning
//! the key equation solver for every i, the error-only solution (Λ, B) is
//! extended by one erasure locator at a time. After 2i steps Λ^(2i) is the
//! errata locator for trial i.
//!
//! Magnitudes: the updated auxiliary polynomial 𝓑 vanishes at every
//! inserted erasure, so the Horiguchi-Kötter formula only holds at
//! non-erased roots, after dividing 𝓑 by x·Γ(x) and compensating the scalar
//! accumulated by the updates. Erased roots use Forney with Λ^(2i).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Field, Gf};
use crate::poly::{self, Poly};
use crate::rm::SoftSymbol;
use crate::rs::{
    Correction, DecodeFailure, Decoded, ErrataList, KesOutput, RsCode, RsError, Syndromes,
};

/// Largest supported Chase depth (2^8 test patterns).
pub const MAX_CHASE_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GmdError {
    #[error(transparent)]
    Rs(#[from] RsError),
    #[error("expected {expected} reliabilities, got {got}")]
    ReliabilityLength { expected: usize, got: usize },
    #[error("reliability order lists {got} positions, need at least {need}")]
    OrderTooShort { got: usize, need: usize },
    #[error("position {0} appears twice in the reliability order")]
    DuplicatePosition(usize),
    #[error("position {position} out of range for length {n}")]
    PositionOutOfRange { position: usize, n: usize },
    #[error("chase depth {depth} outside 0..={max}")]
    ChaseDepth { depth: usize, max: usize },
}

/// How 𝓑 is updated when the erasure extends Λ directly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UpdateVariant {
    /// 𝓑' = 𝓑_i·xΛ + α_i^{-1}Λ_i·𝓑.
    #[default]
    Literal,
    /// 𝓑' = α_i𝓑_i·xΛ + Λ_i·𝓑, i.e. the literal update times α_i.
    Scaled,
}

/// Which update an erasure addition step took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepBranch {
    /// Λ' = 𝓑_iΛ + Λ_i𝓑 and 𝓑' = (x + α_i^{-1})𝓑.
    Combine,
    /// Λ' = (x + α_i^{-1})Λ.
    Extend,
}

/// Positions ordered from least to most reliable, ties by position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliabilityOrder {
    positions: Vec<usize>,
}

impl ReliabilityOrder {
    /// Sorts all positions by ascending reliability; equal values keep the
    /// lower position first.
    pub fn from_reliabilities<T: Ord>(reliabilities: &[T]) -> Self {
        let mut positions: Vec<usize> = (0..reliabilities.len()).collect();
        positions.sort_by(|&a, &b| reliabilities[a].cmp(&reliabilities[b]).then(a.cmp(&b)));
        ReliabilityOrder { positions }
    }

    /// An explicit order, least reliable first. It may list only a prefix.
    pub fn from_positions(positions: Vec<usize>, n: usize) -> Result<Self, GmdError> {
        let mut seen = vec![false; n];
        for &p in &positions {
            if p >= n {
                return Err(GmdError::PositionOutOfRange { position: p, n });
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(GmdError::DuplicatePosition(p));
            }
        }
        Ok(ReliabilityOrder { positions })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// The `count` least reliable positions, or `None` if fewer are known.
    pub fn least_reliable(&self, count: usize) -> Option<&[usize]> {
        self.positions.get(..count)
    }

    fn require(&self, count: usize) -> Result<&[usize], GmdError> {
        self.least_reliable(count).ok_or(GmdError::OrderTooShort {
            got: self.positions.len(),
            need: count,
        })
    }
}

/// State of the erasure addition recursion after some number of steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasureAdditionState {
    pub lambda: Poly,
    /// The auxiliary polynomial, x·B(x) before the first step.
    pub b: Poly,
    pub l_lambda: usize,
    pub l_b: usize,
    /// γΛ_0 of the error-only solution times the scalars picked up so far.
    pub scale: Gf,
    /// Exponent of α still owed by the scaled variant, mod the field order.
    pub scale_log: u64,
    /// Erased positions in insertion order.
    pub erased: Vec<usize>,
}

impl ErasureAdditionState {
    /// Starts from the error-only key equation solution of a code with
    /// redundancy 2t: Λ, x·B, L_Λ = L and L_𝓑 = 2t + 1 - L.
    pub fn from_kes(code: &RsCode, kes: &KesOutput) -> Self {
        let f = code.field();
        let lambda0 = kes.lambda.first().copied().unwrap_or_default();
        ErasureAdditionState {
            lambda: kes.lambda.clone(),
            b: poly::shift(&kes.b),
            l_lambda: kes.l_lambda,
            l_b: (2 * code.t() + 1).saturating_sub(kes.l_lambda),
            scale: f.mul(kes.gamma, lambda0),
            scale_log: 0,
            erased: Vec::new(),
        }
    }

    pub fn steps(&self) -> usize {
        self.erased.len()
    }

    /// Inserts the erasure at `position`.
    pub fn step(&mut self, f: &Field, position: usize, variant: UpdateVariant) -> StepBranch {
        let loc = f.pow_alpha(position as i64);
        let a = f.pow_alpha(-(position as i64));
        let li = f.eval(&self.lambda, a);
        let bi = f.eval(&self.b, a);
        let combine = li.is_zero() || (!bi.is_zero() && self.l_lambda >= self.l_b);
        let branch = if combine {
            let lambda = poly::add(
                &poly::scale(f, &self.lambda, bi),
                &poly::scale(f, &self.b, li),
            );
            self.b = poly::mul_linear(f, &self.b, a);
            self.lambda = poly::trim(lambda);
            self.l_b += 1;
            self.scale = f.mul(self.scale, bi);
            StepBranch::Combine
        } else {
            let x_lambda = poly::shift(&self.lambda);
            let b = match variant {
                UpdateVariant::Literal => poly::add(
                    &poly::scale(f, &x_lambda, bi),
                    &poly::scale(f, &self.b, f.mul(a, li)),
                ),
                UpdateVariant::Scaled => {
                    self.scale_log = (self.scale_log + position as u64) % f.order() as u64;
                    poly::add(
                        &poly::scale(f, &x_lambda, f.mul(loc, bi)),
                        &poly::scale(f, &self.b, li),
                    )
                }
            };
            self.lambda = poly::trim(poly::mul_linear(f, &self.lambda, a));
            self.b = poly::trim(b);
            self.l_lambda += 1;
            self.scale = f.mul(self.scale, f.mul(a, li));
            StepBranch::Extend
        };
        self.erased.push(position);
        branch
    }

    /// α^{scale_log}, the factor the scaled variant needs in the magnitudes.
    pub fn scale_fix(&self, f: &Field) -> Gf {
        f.pow_alpha(self.scale_log as i64)
    }

    /// Recasts the state as a key equation solution valid at the roots of
    /// Λ that were not erased: B = 𝓑 / (x·Π(x + α^{-l_j})) and γ chosen so
    /// that γΛ_0 equals the accumulated scale. `None` if the division is not
    /// exact or Λ_0 vanishes.
    pub fn trial_kes(&self, f: &Field) -> Option<KesOutput> {
        let divisor = self.erased.iter().fold(vec![Gf::ZERO, Gf::ONE], |acc, &p| {
            poly::mul_linear(f, &acc, f.pow_alpha(-(p as i64)))
        });
        let (quot, rem) = poly::div_rem(f, &self.b, &divisor)?;
        if !rem.is_empty() {
            return None;
        }
        let lambda0 = self.lambda.first().copied().unwrap_or_default();
        let gamma = f.div(self.scale, lambda0).ok()?;
        Some(KesOutput {
            lambda: self.lambda.clone(),
            b: quot,
            gamma,
            l_lambda: self.l_lambda,
        })
    }
}

/// Functional form of [`ErasureAdditionState::step`], taking α_i^{-1}.
pub fn erasure_add_step(
    state: &ErasureAdditionState,
    f: &Field,
    erasure_locator_inv: Gf,
    variant: UpdateVariant,
) -> ErasureAdditionState {
    let log = f
        .log(erasure_locator_inv)
        .expect("erasure locator must be nonzero");
    let position = (f.order() - log) % f.order();
    let mut next = state.clone();
    next.step(f, position as usize, variant);
    next
}

/// One GMD trial: 2·index erasures plus up to t - index errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GmdTrial {
    pub index: usize,
    pub errata_locator: Poly,
    pub degree: Option<usize>,
    pub root_count: usize,
    pub outcome: Decoded,
}

impl GmdTrial {
    pub fn passed(&self) -> bool {
        self.outcome.is_corrected()
    }
}

/// Result of a soft-input decoder on one RS word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoftOutcome {
    pub correction: Option<Correction>,
    /// GMD trial index or Chase test pattern that produced the result.
    pub selected: Option<usize>,
    /// Number of hard decoding attempts made.
    pub attempts: usize,
}

fn trial_outcome(
    code: &RsCode,
    received: &[Gf],
    s: &Syndromes,
    state: &ErasureAdditionState,
    index: usize,
) -> GmdTrial {
    let f = code.field();
    let degree = poly::degree(&state.lambda);
    let mut root_count = 0;
    let outcome = (|| {
        let Some(d) = degree else {
            return Decoded::Failed(DecodeFailure::DegenerateLocator);
        };
        let limit = code.t() + index;
        if d > limit {
            return Decoded::Failed(DecodeFailure::TooManyErrata { degree: d, limit });
        }
        let roots = code.chien_search(&state.lambda).roots;
        root_count = roots.len();
        if roots.len() != d {
            return Decoded::Failed(DecodeFailure::RootCountMismatch {
                roots: roots.len(),
                degree: d,
            });
        }
        let (erased, other): (Vec<usize>, Vec<usize>) =
            roots.iter().partition(|l| state.erased.contains(l));
        let mut entries = Vec::with_capacity(roots.len());
        if !other.is_empty() {
            let Some(kes) = state.trial_kes(f) else {
                return Decoded::Failed(DecodeFailure::DegenerateLocator);
            };
            match code.magnitudes_hk(&kes, &other, state.scale_fix(f)) {
                Ok(e) => entries.extend(e.entries),
                Err(e) => return Decoded::Failed(e),
            }
        }
        match code.magnitudes_forney(&state.lambda, s, &erased) {
            Ok(e) => entries.extend(e.entries),
            Err(e) => return Decoded::Failed(e),
        }
        code.finish(received, &ErrataList::from_unsorted(entries))
    })();
    GmdTrial {
        index,
        errata_locator: state.lambda.clone(),
        degree,
        root_count,
        outcome,
    }
}

/// Runs trials 0..=t in order, stopping after the first success when
/// `first_only` is set.
fn run_trials(
    code: &RsCode,
    received: &[Gf],
    order: &ReliabilityOrder,
    variant: UpdateVariant,
    first_only: bool,
) -> Result<Vec<GmdTrial>, GmdError> {
    code.check_word(received, code.n())?;
    let positions = order.require(2 * code.t())?;
    let f = code.field();
    let s = code.syndromes(received);
    let kes = code.kes(&s);
    let hard = code.correct_with_kes(received, &kes);
    let mut trials = vec![GmdTrial {
        index: 0,
        errata_locator: kes.lambda.clone(),
        degree: poly::degree(&kes.lambda),
        root_count: match &hard {
            Decoded::Failed(DecodeFailure::RootCountMismatch { roots, .. }) => *roots,
            Decoded::Failed(DecodeFailure::TooManyErrata { .. }) => 0,
            _ => poly::degree(&kes.lambda).unwrap_or(0),
        },
        outcome: hard,
    }];
    if first_only && trials[0].passed() {
        return Ok(trials);
    }
    let mut state = ErasureAdditionState::from_kes(code, &kes);
    for pair in positions.chunks_exact(2) {
        state.step(f, pair[0], variant);
        state.step(f, pair[1], variant);
        let trial = trial_outcome(code, received, &s, &state, state.steps() / 2);
        let done = first_only && trial.passed();
        trials.push(trial);
        if done {
            break;
        }
    }
    Ok(trials)
}

/// GMD decoding: the first trial (fewest erasures) that yields a codeword.
pub fn gmd_decode(
    code: &RsCode,
    received: &[Gf],
    order: &ReliabilityOrder,
    variant: UpdateVariant,
) -> Result<SoftOutcome, GmdError> {
    let trials = run_trials(code, received, order, variant, true)?;
    let attempts = trials.len();
    let winner = trials.into_iter().find(|t| t.passed());
    Ok(match winner {
        Some(GmdTrial {
            index,
            outcome: Decoded::Corrected(c),
            ..
        }) => SoftOutcome {
            correction: Some(c),
            selected: Some(index),
            attempts,
        },
        _ => SoftOutcome {
            correction: None,
            selected: None,
            attempts,
        },
    })
}

/// All t + 1 trials, for inspection.
pub fn gmd_trials(
    code: &RsCode,
    received: &[Gf],
    order: &ReliabilityOrder,
    variant: UpdateVariant,
) -> Result<Vec<GmdTrial>, GmdError> {
    run_trials(code, received, order, variant, false)
}

/// Errors-and-erasures decoding with the 2t least reliable positions erased.
pub fn erasure_only_decode(
    code: &RsCode,
    received: &[Gf],
    order: &ReliabilityOrder,
) -> Result<SoftOutcome, GmdError> {
    let erasures = order.require(2 * code.t())?;
    let decoded = code.decode_errors_erasures(received, erasures)?;
    Ok(SoftOutcome {
        correction: match decoded {
            Decoded::Corrected(c) => Some(c),
            Decoded::Failed(_) => None,
        },
        selected: Some(code.t()),
        attempts: 1,
    })
}

/// Chase-II: flips the `depth` least reliable symbols to their second-best
/// candidates in every combination, hard-decodes each test word and keeps
/// the codeword closest to the hard decisions. Ties go to the lower pattern.
pub fn chase_decode(
    code: &RsCode,
    soft: &[SoftSymbol],
    depth: usize,
) -> Result<SoftOutcome, GmdError> {
    if depth > MAX_CHASE_DEPTH || depth > code.n() {
        return Err(GmdError::ChaseDepth {
            depth,
            max: MAX_CHASE_DEPTH.min(code.n()),
        });
    }
    if soft.len() != code.n() {
        return Err(GmdError::ReliabilityLength {
            expected: code.n(),
            got: soft.len(),
        });
    }
    let received: Vec<Gf> = soft.iter().map(|s| Gf(s.best as u16)).collect();
    let reliabilities: Vec<u32> = soft.iter().map(|s| s.max1).collect();
    let order = ReliabilityOrder::from_reliabilities(&reliabilities);
    let flips = &order.positions()[..depth];
    let mut best: Option<(usize, usize, Vec<Gf>)> = None;
    let patterns = 1usize << depth;
    for pattern in 0..patterns {
        let mut word = received.clone();
        for (bit, &pos) in flips.iter().enumerate() {
            if pattern >> bit & 1 == 1 {
                word[pos] = Gf(soft[pos].second as u16);
            }
        }
        if let Decoded::Corrected(c) = code.decode_hard(&word)? {
            let distance = hamming(&c.codeword, &received);
            if best.as_ref().is_none_or(|(d, _, _)| distance < *d) {
                best = Some((distance, pattern, c.codeword));
            }
        }
    }
    Ok(match best {
        Some((corrections, pattern, codeword)) => SoftOutcome {
            correction: Some(Correction {
                codeword,
                corrections,
            }),
            selected: Some(pattern),
            attempts: patterns,
        },
        None => SoftOutcome {
            correction: None,
            selected: None,
            attempts: patterns,
        },
    })
}

pub(crate) fn hamming(a: &[Gf], b: &[Gf]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
