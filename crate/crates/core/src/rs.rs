//! Reed-Solomon codes over GF(2^m): systematic encoding, syndromes, the
//! inversionless Berlekamp-Massey key equation solver, Chien search and the
//! two magnitude formulas (Horiguchi-Kötter and Forney).
//!
//! Conventions used throughout the crate:
//!
//! * a word `r` is the polynomial r(X) = Σ r_l X^l, position 0 first;
//! * the generator polynomial is g(X) = Π_{j=1..2t} (X - α^j), so the
//!   syndromes are S_j = r(α^j) for j = 1..2t;
//! * an error at position l has locator α^l, and the error locator Λ(X) has
//!   a root at α^{-l}.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::{Field, Gf};
use crate::poly::{self, Poly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RsError {
    #[error("invalid RS parameters n = {n}, k = {k}: {reason}")]
    InvalidParameters {
        n: usize,
        k: usize,
        reason: &'static str,
    },
    #[error("expected {expected} symbols, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("symbol {0:?} is not an element of the field")]
    SymbolOutOfRange(Gf),
    #[error("erasure position {0} out of range")]
    ErasureOutOfRange(usize),
    #[error("erasure position {0} listed twice")]
    DuplicateErasure(usize),
    #[error("{got} erasures exceed the {max} the code can fill")]
    TooManyErasures { got: usize, max: usize },
}

/// Why a decoding attempt was rejected. Failures are ordinary outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeFailure {
    /// The locator degree exceeds what the errata budget allows.
    TooManyErrata { degree: usize, limit: usize },
    /// Chien search found a different number of roots than the degree.
    RootCountMismatch { roots: usize, degree: usize },
    /// A magnitude formula divided by zero at this position.
    ZeroDenominator { position: usize },
    /// The locator or its scaling constant vanished.
    DegenerateLocator,
    /// The corrected word is not a codeword.
    NonzeroSyndrome,
}

/// A successful correction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correction {
    pub codeword: Vec<Gf>,
    /// Number of positions whose symbol was changed.
    pub corrections: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Corrected(Correction),
    Failed(DecodeFailure),
}

impl Decoded {
    pub fn is_corrected(&self) -> bool {
        matches!(self, Decoded::Corrected(_))
    }

    pub fn codeword(&self) -> Option<&[Gf]> {
        match self {
            Decoded::Corrected(c) => Some(&c.codeword),
            Decoded::Failed(_) => None,
        }
    }
}

/// S_1..S_2t, stored as `s[j - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndromes(pub Vec<Gf>);

impl Syndromes {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|s| s.is_zero())
    }
}

/// Output of the key equation solver: Λ(X), the auxiliary B(X) and the
/// scalar γ such that e_l = γ Λ_0 α^{-2tl} / (B(α^{-l}) Λ_odd(α^{-l})).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KesOutput {
    pub lambda: Poly,
    pub b: Poly,
    pub gamma: Gf,
    /// Register length L of the final LFSR.
    pub l_lambda: usize,
}

/// Evaluations of a polynomial at α^{-l} for every code position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChienResult {
    pub roots: Vec<usize>,
    pub evals: Vec<Gf>,
}

/// Corrections to apply, sorted by position, all magnitudes nonzero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ErrataList {
    pub entries: Vec<(usize, Gf)>,
}

impl ErrataList {
    pub(crate) fn from_unsorted(mut entries: Vec<(usize, Gf)>) -> Self {
        entries.retain(|(_, e)| !e.is_zero());
        entries.sort_by_key(|&(l, _)| l);
        entries.dedup_by_key(|&mut (l, _)| l);
        ErrataList { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds every magnitude onto `word` in place.
    pub fn apply(&self, word: &mut [Gf]) {
        for &(l, e) in &self.entries {
            word[l] += e;
        }
    }
}

/// An (n, k) narrow-sense RS code with t = (n - k) / 2.
#[derive(Debug, Clone)]
pub struct RsCode {
    n: usize,
    k: usize,
    t: usize,
    field: Arc<Field>,
    generator: Poly,
}

impl RsCode {
    pub fn new(n: usize, k: usize, field: Arc<Field>) -> Result<Self, RsError> {
        let bad = |reason| RsError::InvalidParameters { n, k, reason };
        if k == 0 || k >= n {
            return Err(bad("need 0 < k < n"));
        }
        if !(n - k).is_multiple_of(2) {
            return Err(bad("n - k must be even"));
        }
        if n > field.order() as usize {
            return Err(bad("n exceeds 2^m - 1"));
        }
        let t = (n - k) / 2;
        let generator = (1..=2 * t as i64).fold(vec![Gf::ONE], |g, j| {
            poly::mul_linear(&field, &g, field.pow_alpha(j))
        });
        Ok(RsCode {
            n,
            k,
            t,
            field,
            generator,
        })
    }

    /// Code over the default GF(2^8).
    pub fn gf256(n: usize, k: usize) -> Result<Self, RsError> {
        Self::new(n, k, Arc::new(Field::gf256()))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn t(&self) -> usize {
        self.t
    }

    #[inline]
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<Field> {
        Arc::clone(&self.field)
    }

    pub fn generator(&self) -> &[Gf] {
        &self.generator
    }

    /// α^l, the locator of position l.
    #[inline]
    pub fn locator(&self, position: usize) -> Gf {
        self.field.pow_alpha(position as i64)
    }

    pub(crate) fn check_word(&self, word: &[Gf], expected: usize) -> Result<(), RsError> {
        if word.len() != expected {
            return Err(RsError::WrongLength {
                expected,
                got: word.len(),
            });
        }
        if let Some(&s) = word.iter().find(|&&s| !self.field.contains(s)) {
            return Err(RsError::SymbolOutOfRange(s));
        }
        Ok(())
    }

    /// Systematic encoding: parity in positions 0..2t, message in 2t..n.
    pub fn encode(&self, message: &[Gf]) -> Result<Vec<Gf>, RsError> {
        self.check_word(message, self.k)?;
        let f = &*self.field;
        let parity_len = 2 * self.t;
        // LFSR division of m(X)·X^{2t} by the monic g(X).
        let mut parity = vec![Gf::ZERO; parity_len];
        for &m in message.iter().rev() {
            let feedback = m + parity[parity_len - 1];
            for j in (1..parity_len).rev() {
                parity[j] = parity[j - 1] + f.mul(feedback, self.generator[j]);
            }
            parity[0] = f.mul(feedback, self.generator[0]);
        }
        let mut codeword = parity;
        codeword.extend_from_slice(message);
        Ok(codeword)
    }

    /// Message part of a systematic codeword.
    pub fn message_of<'a>(&self, codeword: &'a [Gf]) -> &'a [Gf] {
        &codeword[2 * self.t..]
    }

    pub fn syndromes(&self, r: &[Gf]) -> Syndromes {
        let f = &*self.field;
        Syndromes(
            (1..=2 * self.t as i64)
                .map(|j| f.eval(r, f.pow_alpha(j)))
                .collect(),
        )
    }

    /// Inversionless Berlekamp-Massey over 2t iterations.
    pub fn kes(&self, s: &Syndromes) -> KesOutput {
        self.errata_kes(s, &[])
    }

    /// Inversionless Berlekamp-Massey started from the erasure locator
    /// Γ(X) = Π (1 + α^{l_j} X); with no erasures this is [`RsCode::kes`].
    pub fn errata_kes(&self, s: &Syndromes, erasures: &[usize]) -> KesOutput {
        let f = &*self.field;
        let two_t = 2 * self.t;
        let nu = erasures.len();
        let gamma0 = poly::from_locators(f, erasures.iter().map(|&l| self.locator(l)));
        let mut lambda = gamma0.clone();
        let mut b = gamma0;
        let mut gamma = Gf::ONE;
        let mut len = nu;
        for r in nu..two_t {
            let delta = lambda
                .iter()
                .take(r + 1)
                .enumerate()
                .fold(Gf::ZERO, |acc, (i, &c)| acc + f.mul(c, s.0[r - i]));
            let next = poly::trim(poly::add(
                &poly::scale(f, &lambda, gamma),
                &poly::scale(f, &poly::shift(&b), delta),
            ));
            if !delta.is_zero() && 2 * len <= r + nu {
                b = lambda;
                len = r + 1 + nu - len;
                gamma = delta;
            } else {
                b = poly::shift(&b);
            }
            lambda = next;
        }
        KesOutput {
            lambda,
            b: poly::trim(b),
            gamma,
            l_lambda: len,
        }
    }

    /// Evaluates `p` at α^{-l} for l in 0..n.
    pub fn chien_search(&self, p: &[Gf]) -> ChienResult {
        let f = &*self.field;
        // Term-by-term update: term_i <- term_i · α^{-i} per position step.
        let steps: Vec<Gf> = (0..p.len()).map(|i| f.pow_alpha(-(i as i64))).collect();
        let mut terms = p.to_vec();
        let mut evals = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            evals.push(terms.iter().fold(Gf::ZERO, |acc, &c| acc + c));
            for (term, &step) in terms.iter_mut().zip(&steps) {
                *term = f.mul(*term, step);
            }
        }
        let roots = evals
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_zero())
            .map(|(l, _)| l)
            .collect();
        ChienResult { roots, evals }
    }

    /// Horiguchi-Kötter magnitudes
    /// e_l = scale_fix · γ Λ_0 α^{-2tl} / (B(α^{-l}) Λ_odd(α^{-l})).
    pub fn magnitudes_hk(
        &self,
        kes: &KesOutput,
        roots: &[usize],
        scale_fix: Gf,
    ) -> Result<ErrataList, DecodeFailure> {
        let f = &*self.field;
        let lambda0 = kes.lambda.first().copied().unwrap_or_default();
        let c = f.mul(f.mul(kes.gamma, lambda0), scale_fix);
        if c.is_zero() {
            return Err(DecodeFailure::DegenerateLocator);
        }
        let lambda_odd = poly::odd_part(&kes.lambda);
        let two_t = 2 * self.t as i64;
        let mut entries = Vec::with_capacity(roots.len());
        for &l in roots {
            let x_inv = f.pow_alpha(-(l as i64));
            let den = f.mul(f.eval(&kes.b, x_inv), f.eval(&lambda_odd, x_inv));
            let num = f.mul(c, f.pow_alpha(-two_t * l as i64));
            let e = f
                .div(num, den)
                .map_err(|_| DecodeFailure::ZeroDenominator { position: l })?;
            entries.push((l, e));
        }
        Ok(ErrataList::from_unsorted(entries))
    }

    /// Forney magnitudes e_l = Ω(α^{-l}) / Λ'(α^{-l}) with
    /// Ω(X) = S(X) Λ(X) mod X^{2t}, S(X) = Σ_{j=0}^{2t-1} S_{j+1} X^j.
    pub fn magnitudes_forney(
        &self,
        lambda: &[Gf],
        s: &Syndromes,
        roots: &[usize],
    ) -> Result<ErrataList, DecodeFailure> {
        let f = &*self.field;
        let mut omega = poly::mul(f, &s.0, lambda);
        omega.truncate(2 * self.t);
        let dlambda = poly::derivative(lambda);
        let mut entries = Vec::with_capacity(roots.len());
        for &l in roots {
            let x_inv = f.pow_alpha(-(l as i64));
            let e = f
                .div(f.eval(&omega, x_inv), f.eval(&dlambda, x_inv))
                .map_err(|_| DecodeFailure::ZeroDenominator { position: l })?;
            entries.push((l, e));
        }
        Ok(ErrataList::from_unsorted(entries))
    }

    /// Applies `errata` to `received` and re-checks the syndromes.
    pub fn finish(&self, received: &[Gf], errata: &ErrataList) -> Decoded {
        let mut codeword = received.to_vec();
        errata.apply(&mut codeword);
        if !self.syndromes(&codeword).is_zero() {
            return Decoded::Failed(DecodeFailure::NonzeroSyndrome);
        }
        Decoded::Corrected(Correction {
            codeword,
            corrections: errata.len(),
        })
    }

    /// Error-only decoding: KES, Chien search, Horiguchi-Kötter magnitudes.
    pub fn decode_hard(&self, received: &[Gf]) -> Result<Decoded, RsError> {
        self.check_word(received, self.n)?;
        let s = self.syndromes(received);
        let kes = self.kes(&s);
        Ok(self.correct_with_kes(received, &kes))
    }

    /// Root counting and Horiguchi-Kötter magnitudes for an error-only KES result.
    pub(crate) fn correct_with_kes(&self, received: &[Gf], kes: &KesOutput) -> Decoded {
        let Some(degree) = poly::degree(&kes.lambda) else {
            return Decoded::Failed(DecodeFailure::DegenerateLocator);
        };
        if degree > self.t {
            return Decoded::Failed(DecodeFailure::TooManyErrata {
                degree,
                limit: self.t,
            });
        }
        let chien = self.chien_search(&kes.lambda);
        if chien.roots.len() != degree {
            return Decoded::Failed(DecodeFailure::RootCountMismatch {
                roots: chien.roots.len(),
                degree,
            });
        }
        match self.magnitudes_hk(kes, &chien.roots, Gf::ONE) {
            Ok(errata) => self.finish(received, &errata),
            Err(e) => Decoded::Failed(e),
        }
    }

    /// Classic errors-and-erasures decoding. Erased positions are zero-filled
    /// before the syndromes are computed; up to t - |erasures|/2 further
    /// errors are corrected.
    pub fn decode_errors_erasures(
        &self,
        received: &[Gf],
        erasures: &[usize],
    ) -> Result<Decoded, RsError> {
        self.check_word(received, self.n)?;
        self.check_erasures(erasures)?;
        let mut filled = received.to_vec();
        for &l in erasures {
            filled[l] = Gf::ZERO;
        }
        let s = self.syndromes(&filled);
        if s.is_zero() {
            return Ok(self.finish_from(received, filled));
        }
        let kes = self.errata_kes(&s, erasures);
        let Some(degree) = poly::degree(&kes.lambda) else {
            return Ok(Decoded::Failed(DecodeFailure::DegenerateLocator));
        };
        // 2·(errors) + erasures <= 2t with errors = degree - erasures.
        let limit = self.t + erasures.len() / 2;
        if 2 * degree > 2 * self.t + erasures.len() {
            return Ok(Decoded::Failed(DecodeFailure::TooManyErrata {
                degree,
                limit,
            }));
        }
        let chien = self.chien_search(&kes.lambda);
        if chien.roots.len() != degree {
            return Ok(Decoded::Failed(DecodeFailure::RootCountMismatch {
                roots: chien.roots.len(),
                degree,
            }));
        }
        let errata = match self.magnitudes_forney(&kes.lambda, &s, &chien.roots) {
            Ok(e) => e,
            Err(e) => return Ok(Decoded::Failed(e)),
        };
        match self.finish(&filled, &errata) {
            Decoded::Corrected(c) => Ok(self.finish_from(received, c.codeword)),
            failed => Ok(failed),
        }
    }

    fn finish_from(&self, received: &[Gf], codeword: Vec<Gf>) -> Decoded {
        let corrections = received
            .iter()
            .zip(&codeword)
            .filter(|(a, b)| a != b)
            .count();
        Decoded::Corrected(Correction {
            codeword,
            corrections,
        })
    }

    pub(crate) fn check_erasures(&self, erasures: &[usize]) -> Result<(), RsError> {
        if erasures.len() > 2 * self.t {
            return Err(RsError::TooManyErasures {
                got: erasures.len(),
                max: 2 * self.t,
            });
        }
        let mut seen = BTreeSet::new();
        for &l in erasures {
            if l >= self.n {
                return Err(RsError::ErasureOutOfRange(l));
            }
            if !seen.insert(l) {
                return Err(RsError::DuplicateErasure(l));
            }
        }
        Ok(())
    }
}
