//! First-order Reed-Muller RM(1,7) = [128, 8, 64], repeated `m` times.
//!
//! Bit convention: symbol `u` is split into a sign bit `u >> 7` and a 7-bit
//! index `w = u & 0x7F`; codeword bit j is `sign ^ parity(w & j)`. The FHT
//! entry at index w then carries the correlation with that codeword, with a
//! positive peak for sign = 1 since received ones map to +1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RM_N: usize = 128;
pub const RM_K: usize = 8;
const RM_STAGES: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RmError {
    #[error("multiplicity {0} outside 1..=15")]
    BadMultiplicity(usize),
    #[error("expected {expected} bits, got {got}")]
    WrongLength { expected: usize, got: usize },
}

/// RM(1,7) with `multiplicity` copies of every codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RmCode {
    multiplicity: usize,
}

/// Component-wise sum of the ±1-mapped copies, each entry in [-m, m].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoftVector(pub [i32; RM_N]);

/// One RM decoding result: hard decision plus reliability information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoftSymbol {
    pub best: u8,
    /// |peak| of the transform, the symbol reliability.
    pub max1: u32,
    /// Symbol of the second-largest magnitude entry.
    pub second: u8,
    pub max2: u32,
}

impl RmCode {
    pub fn new(multiplicity: usize) -> Result<Self, RmError> {
        if multiplicity == 0 || multiplicity > 15 {
            return Err(RmError::BadMultiplicity(multiplicity));
        }
        Ok(RmCode { multiplicity })
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    /// Bits per encoded symbol, 128·m.
    pub fn block_len(&self) -> usize {
        RM_N * self.multiplicity
    }

    /// Largest possible |FHT| value, 128·m.
    pub fn max_reliability(&self) -> u32 {
        (RM_N * self.multiplicity) as u32
    }

    /// Encodes one symbol as 128·m bits (values 0/1).
    pub fn encode(&self, symbol: u8) -> Vec<u8> {
        let mut out = vec![0u8; self.block_len()];
        self.encode_into(symbol, &mut out);
        out
    }

    pub fn encode_into(&self, symbol: u8, out: &mut [u8]) {
        debug_assert_eq!(out.len(), self.block_len());
        for (j, bit) in out.iter_mut().enumerate() {
            *bit = codeword_bit(symbol, j % RM_N);
        }
    }

    pub fn aggregate(&self, bits: &[u8]) -> Result<SoftVector, RmError> {
        if bits.len() != self.block_len() {
            return Err(RmError::WrongLength {
                expected: self.block_len(),
                got: bits.len(),
            });
        }
        let mut v = [0i32; RM_N];
        for copy in bits.chunks_exact(RM_N) {
            for (acc, &b) in v.iter_mut().zip(copy) {
                *acc += if b != 0 { 1 } else { -1 };
            }
        }
        Ok(SoftVector(v))
    }

    pub fn decode(&self, bits: &[u8]) -> Result<SoftSymbol, RmError> {
        let v = self.aggregate(bits)?;
        Ok(pick_peaks(&fht(&v)))
    }
}

/// Bit j of the RM(1,7) codeword for `symbol`.
#[inline]
pub fn codeword_bit(symbol: u8, j: usize) -> u8 {
    let sign = symbol >> 7;
    let index = (symbol & 0x7F) as usize;
    sign ^ ((index & j).count_ones() & 1) as u8
}

/// Walsh-Hadamard transform: out[w] = Σ_j v[j]·(-1)^{popcount(w & j)}.
pub fn fht(v: &SoftVector) -> [i32; RM_N] {
    let mut a = v.0;
    for stage in 0..RM_STAGES {
        let half = 1 << stage;
        for block in (0..RM_N).step_by(2 * half) {
            for j in block..block + half {
                let (x, y) = (a[j], a[j + half]);
                a[j] = x + y;
                a[j + half] = x - y;
            }
        }
    }
    a
}

fn symbol_for(index: usize, value: i32) -> u8 {
    ((value > 0) as u8) << 7 | index as u8
}

/// Largest and second-largest magnitudes; ties go to the lower index.
fn pick_peaks(spectrum: &[i32; RM_N]) -> SoftSymbol {
    let (mut i1, mut m1) = (0usize, spectrum[0].unsigned_abs());
    let (mut i2, mut m2) = (usize::MAX, 0u32);
    for (i, &x) in spectrum.iter().enumerate().skip(1) {
        let mag = x.unsigned_abs();
        if mag > m1 {
            (i2, m2) = (i1, m1);
            (i1, m1) = (i, mag);
        } else if i2 == usize::MAX || mag > m2 {
            (i2, m2) = (i, mag);
        }
    }
    SoftSymbol {
        best: symbol_for(i1, spectrum[i1]),
        max1: m1,
        second: symbol_for(i2, spectrum[i2]),
        max2: m2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rm3() -> RmCode {
        RmCode::new(3).unwrap()
    }

    /// Correlation of `v` with the ±1 image of every one of the 256 codewords.
    fn naive_best(v: &SoftVector) -> (u8, i64) {
        let mut best = (0u8, i64::MIN);
        for u in 0..=255u8 {
            let corr: i64 = (0..RM_N)
                .map(|j| {
                    let s = if codeword_bit(u, j) == 1 { 1 } else { -1 };
                    (v.0[j] * s) as i64
                })
                .sum();
            if corr > best.1 {
                best = (u, corr);
            }
        }
        best
    }

    #[test]
    fn zero_symbol_encodes_to_zeros() {
        assert_eq!(rm3().encode(0), vec![0u8; 384]);
    }

    #[test]
    fn weight_spectrum() {
        for u in 0..=255u8 {
            let w: usize = RmCode::new(1)
                .unwrap()
                .encode(u)
                .iter()
                .map(|&b| b as usize)
                .sum();
            assert!(w == 0 || w == 64 || w == 128, "weight {w} for {u}");
        }
    }

    #[test]
    fn aggregate_examples() {
        let rm = rm3();
        assert_eq!(rm.aggregate(&vec![0u8; 384]).unwrap().0, [-3; 128]);
        assert_eq!(rm.aggregate(&vec![1u8; 384]).unwrap().0, [3; 128]);
        let mut bits = vec![0u8; 384];
        bits[5] = 1;
        bits[128 + 5] = 1;
        bits[7] = 1;
        let v = rm.aggregate(&bits).unwrap();
        assert_eq!(v.0[5], 1);
        assert_eq!(v.0[7], -1);
        assert!(matches!(
            rm.aggregate(&bits[1..]),
            Err(RmError::WrongLength { .. })
        ));
    }

    #[test]
    fn noiseless_round_trip_all_symbols() {
        for m in [1usize, 3, 5] {
            let rm = RmCode::new(m).unwrap();
            for u in 0..=255u8 {
                let s = rm.decode(&rm.encode(u)).unwrap();
                assert_eq!(s.best, u);
                assert_eq!(s.max1, 128 * m as u32);
                assert_eq!(s.max2, 0);
                assert_ne!(s.second, s.best);
            }
        }
    }

    #[test]
    fn fht_single_peak() {
        let rm = rm3();
        for u in [0u8, 1, 0x80, 0xC3, 0xFF] {
            let spec = fht(&rm.aggregate(&rm.encode(u)).unwrap());
            let nonzero: Vec<_> = spec.iter().enumerate().filter(|(_, &x)| x != 0).collect();
            assert_eq!(nonzero.len(), 1);
            assert_eq!(nonzero[0].0, (u & 0x7F) as usize);
            assert_eq!(nonzero[0].1.abs(), 384);
        }
    }

    #[test]
    fn single_flip_lowers_peak_by_two() {
        let rm = rm3();
        let mut bits = rm.encode(0x5B);
        bits[200] ^= 1;
        let s = rm.decode(&bits).unwrap();
        assert_eq!(s.best, 0x5B);
        assert_eq!(s.max1, 382);
        assert!(s.max1 < 384);
    }

    #[test]
    fn parseval_and_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let mut a = [0i32; RM_N];
            let mut b = [0i32; RM_N];
            for j in 0..RM_N {
                a[j] = rng.gen_range(-5..=5);
                b[j] = rng.gen_range(-5..=5);
            }
            let fa = fht(&SoftVector(a));
            let fb = fht(&SoftVector(b));
            let sum: [i32; RM_N] = std::array::from_fn(|j| a[j] + b[j]);
            let fs = fht(&SoftVector(sum));
            for j in 0..RM_N {
                assert_eq!(fs[j], fa[j] + fb[j]);
            }
            let e_in: i64 = a.iter().map(|&x| (x * x) as i64).sum();
            let e_out: i64 = fa.iter().map(|&x| (x as i64) * (x as i64)).sum();
            assert_eq!(e_out, 128 * e_in);
        }
    }

    #[test]
    fn decode_is_maximum_correlation() {
        let rm = rm3();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..2000 {
            let u: u8 = rng.gen();
            let mut bits = rm.encode(u);
            for b in bits.iter_mut() {
                if rng.gen_bool(0.3) {
                    *b ^= 1;
                }
            }
            let v = rm.aggregate(&bits).unwrap();
            let s = rm.decode(&bits).unwrap();
            let (_, corr) = naive_best(&v);
            assert_eq!(s.max1 as i64, corr);
            assert!(s.max1 >= s.max2);
            assert_ne!(s.best, s.second);
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let mut spec = [0i32; RM_N];
        spec[9] = -40;
        spec[4] = 40;
        spec[100] = 40;
        let s = pick_peaks(&spec);
        assert_eq!(s.best, 0x80 | 4);
        assert_eq!(s.second, 9);
        assert_eq!((s.max1, s.max2), (40, 40));
    }

    #[test]
    fn bad_multiplicity() {
        assert!(RmCode::new(0).is_err());
        assert!(RmCode::new(16).is_err());
    }
}
