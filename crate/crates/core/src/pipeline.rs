//! Concatenated RM(128,8) ⊗ RS(n_rs,k_rs) data path: encode, corrupt,
//! RM-decode every segment into soft symbols and run one of the RS decoders.
//!
//! Only the payload bits (the lowest m·128·n_rs bits of the ambient vector)
//! are simulated. RS position 0 occupies the lowest bits.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Bernoulli, Distribution};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::ambient_length;
use crate::gf::Gf;
use crate::gmd::{self, GmdError, ReliabilityOrder, SoftOutcome, UpdateVariant};
use crate::rm::{RmCode, RmError, SoftSymbol, RM_N};
use crate::rs::{Decoded, RsCode, RsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Rs(#[from] RsError),
    #[error(transparent)]
    Rm(#[from] RmError),
    #[error(transparent)]
    Gmd(#[from] GmdError),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid decoder {0:?}")]
    InvalidDecoder(String),
    #[error("payload has {got} bits, expected {expected}")]
    PayloadLength { expected: usize, got: usize },
}

/// Code parameters of one concatenated scheme.
#[derive(Debug, Clone)]
pub struct HqcPreset {
    pub name: String,
    /// Claimed security level in bits, `None` for custom parameters.
    pub security: Option<u32>,
    pub rm: RmCode,
    pub rs: RsCode,
    /// Ambient length: the least prime above the payload length for which 2
    /// is a primitive root.
    pub n: u64,
}

impl HqcPreset {
    pub const NAMES: [&'static str; 4] = ["hqc-128", "hqc-192", "hqc-256", "gmd-128"];

    pub fn named(name: &str) -> Result<Self, PipelineError> {
        let (security, n_rs, k_rs, m) = match name {
            "hqc-128" => (128, 46, 16, 3),
            "hqc-192" => (192, 56, 24, 5),
            "hqc-256" => (256, 90, 32, 5),
            "gmd-128" => (128, 36, 16, 3),
            _ => return Err(PipelineError::UnknownPreset(name.to_string())),
        };
        let mut p = Self::custom(n_rs, k_rs, m)?;
        p.name = name.to_string();
        p.security = Some(security);
        Ok(p)
    }

    pub fn custom(n_rs: usize, k_rs: usize, multiplicity: usize) -> Result<Self, PipelineError> {
        let rm = RmCode::new(multiplicity)?;
        let rs = RsCode::gf256(n_rs, k_rs)?;
        let payload = (multiplicity * RM_N * n_rs) as u64;
        Ok(HqcPreset {
            name: "custom".to_string(),
            security: None,
            rm,
            rs,
            n: ambient_length(payload),
        })
    }

    /// m·128·n_rs.
    pub fn payload_len(&self) -> usize {
        self.rm.block_len() * self.rs.n()
    }
}

/// Bit-flip model applied to the payload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Channel {
    /// Every bit flips independently with probability p.
    Bernoulli(f64),
    /// Exactly w distinct bits flip, chosen uniformly.
    FixedWeight(usize),
}

impl Channel {
    /// The sweep parameter: p or w.
    pub fn param(&self) -> f64 {
        match *self {
            Channel::Bernoulli(p) => p,
            Channel::FixedWeight(w) => w as f64,
        }
    }

    pub fn validate(&self, payload_len: usize) -> Result<(), PipelineError> {
        match *self {
            Channel::Bernoulli(p) if !(0.0..=1.0).contains(&p) => Err(
                PipelineError::InvalidChannel(format!("p = {p} outside [0, 1]")),
            ),
            Channel::FixedWeight(w) if w > payload_len => Err(PipelineError::InvalidChannel(
                format!("weight {w} exceeds payload length {payload_len}"),
            )),
            _ => Ok(()),
        }
    }

    /// Flips bits of `bits` in place.
    pub fn corrupt<R: Rng + ?Sized>(&self, bits: &mut [u8], rng: &mut R) {
        match *self {
            Channel::Bernoulli(p) => flip_bernoulli(bits, p, rng),
            Channel::FixedWeight(w) => {
                for j in sample(rng, bits.len(), w) {
                    bits[j] ^= 1;
                }
            }
        }
    }
}

/// Above this flip rate a draw per bit is cheaper than a logarithm per flip.
const DENSE_FLIP_RATE: f64 = 0.05;

/// Bernoulli flips: one draw per bit for dense noise, otherwise jumps over
/// geometrically distributed gaps.
fn flip_bernoulli<R: Rng + ?Sized>(bits: &mut [u8], p: f64, rng: &mut R) {
    if p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        bits.iter_mut().for_each(|b| *b ^= 1);
        return;
    }
    if p > DENSE_FLIP_RATE {
        let coin = Bernoulli::new(p).expect("p lies in (0, 1)");
        for b in bits.iter_mut() {
            *b ^= coin.sample(rng) as u8;
        }
        return;
    }
    let ln_keep = (-p).ln_1p();
    let mut pos = 0usize;
    while pos < bits.len() {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let gap = (u.ln() / ln_keep).floor();
        if gap >= (bits.len() - pos) as f64 {
            break;
        }
        pos += gap as usize;
        bits[pos] ^= 1;
        pos += 1;
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Bernoulli(p) => write!(f, "bernoulli:{p}"),
            Channel::FixedWeight(w) => write!(f, "fixed:{w}"),
        }
    }
}

impl FromStr for Channel {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PipelineError::InvalidChannel(s.to_string());
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "bernoulli" => {
                let p: f64 = value.parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad());
                }
                Ok(Channel::Bernoulli(p))
            }
            "fixed" => Ok(Channel::FixedWeight(value.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

impl From<Channel> for String {
    fn from(c: Channel) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Channel {
    type Error = PipelineError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// A channel plus the seed that makes its output reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub channel: Channel,
    pub seed: u64,
}

pub fn apply_channel(payload: &[u8], model: &ChannelModel) -> Result<Vec<u8>, PipelineError> {
    model.channel.validate(payload.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut out = payload.to_vec();
    model.channel.corrupt(&mut out, &mut rng);
    Ok(out)
}

/// RS decoder applied after the RM stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DecoderKind {
    Hard,
    ErasureOnly,
    Chase(u8),
    Gmd(UpdateVariant),
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecoderKind::Hard => f.write_str("hard"),
            DecoderKind::ErasureOnly => f.write_str("erasure"),
            DecoderKind::Chase(eta) => write!(f, "chase:{eta}"),
            DecoderKind::Gmd(UpdateVariant::Literal) => f.write_str("gmd"),
            DecoderKind::Gmd(UpdateVariant::Scaled) => f.write_str("gmd-scaled"),
        }
    }
}

impl FromStr for DecoderKind {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PipelineError::InvalidDecoder(s.to_string());
        Ok(match s {
            "hard" => DecoderKind::Hard,
            "erasure" | "erasure-only" => DecoderKind::ErasureOnly,
            "gmd" => DecoderKind::Gmd(UpdateVariant::Literal),
            "gmd-scaled" => DecoderKind::Gmd(UpdateVariant::Scaled),
            _ => {
                let eta = s.strip_prefix("chase:").ok_or_else(bad)?;
                let eta: u8 = eta.parse().map_err(|_| bad())?;
                if eta as usize > gmd::MAX_CHASE_DEPTH {
                    return Err(bad());
                }
                DecoderKind::Chase(eta)
            }
        })
    }
}

impl From<DecoderKind> for String {
    fn from(d: DecoderKind) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for DecoderKind {
    type Error = PipelineError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeStatus {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub status: DecodeStatus,
    pub decoder: DecoderKind,
    pub codeword: Option<Vec<Gf>>,
    pub message: Option<Vec<Gf>>,
    /// GMD trial or Chase pattern that produced the codeword.
    pub trial_used: Option<usize>,
    /// Hard decoding attempts spent.
    pub attempts: usize,
}

impl DecodeResult {
    pub fn is_success(&self) -> bool {
        self.status == DecodeStatus::Success
    }
}

/// Bits → RM encode of every RS symbol of the RS codeword of `message`.
pub fn concat_encode(message: &[Gf], preset: &HqcPreset) -> Result<Vec<u8>, PipelineError> {
    let codeword = preset.rs.encode(message)?;
    let block = preset.rm.block_len();
    let mut payload = vec![0u8; preset.payload_len()];
    for (symbol, chunk) in codeword.iter().zip(payload.chunks_exact_mut(block)) {
        preset.rm.encode_into(symbol.0 as u8, chunk);
    }
    Ok(payload)
}

/// RM-decodes every segment of the payload.
pub fn rm_stage(payload: &[u8], preset: &HqcPreset) -> Result<Vec<SoftSymbol>, PipelineError> {
    if payload.len() != preset.payload_len() {
        return Err(PipelineError::PayloadLength {
            expected: preset.payload_len(),
            got: payload.len(),
        });
    }
    payload
        .chunks_exact(preset.rm.block_len())
        .map(|seg| preset.rm.decode(seg).map_err(PipelineError::from))
        .collect()
}

pub fn concat_decode(
    payload: &[u8],
    preset: &HqcPreset,
    decoder: DecoderKind,
) -> Result<DecodeResult, PipelineError> {
    let soft = rm_stage(payload, preset)?;
    decode_soft(&soft, &preset.rs, decoder)
}

/// Runs one RS decoder on RM soft output.
pub fn decode_soft(
    soft: &[SoftSymbol],
    rs: &RsCode,
    decoder: DecoderKind,
) -> Result<DecodeResult, PipelineError> {
    let received: Vec<Gf> = soft.iter().map(|s| Gf(s.best as u16)).collect();
    let order = || {
        let reliab: Vec<u32> = soft.iter().map(|s| s.max1).collect();
        ReliabilityOrder::from_reliabilities(&reliab)
    };
    let outcome = match decoder {
        DecoderKind::Hard => match rs.decode_hard(&received)? {
            Decoded::Corrected(c) => SoftOutcome {
                correction: Some(c),
                selected: Some(0),
                attempts: 1,
            },
            Decoded::Failed(_) => SoftOutcome {
                correction: None,
                selected: None,
                attempts: 1,
            },
        },
        DecoderKind::ErasureOnly => gmd::erasure_only_decode(rs, &received, &order())?,
        DecoderKind::Chase(eta) => gmd::chase_decode(rs, soft, eta as usize)?,
        DecoderKind::Gmd(variant) => gmd::gmd_decode(rs, &received, &order(), variant)?,
    };
    let codeword = outcome.correction.map(|c| c.codeword);
    Ok(DecodeResult {
        status: if codeword.is_some() {
            DecodeStatus::Success
        } else {
            DecodeStatus::Failure
        },
        decoder,
        message: codeword.as_ref().map(|c| rs.message_of(c).to_vec()),
        codeword,
        trial_used: outcome.selected,
        attempts: outcome.attempts,
    })
}

/// Uniformly random message of k_rs symbols.
pub fn random_message<R: Rng + ?Sized>(preset: &HqcPreset, rng: &mut R) -> Vec<Gf> {
    (0..preset.rs.k())
        .map(|_| Gf(rng.gen::<u8>() as u16))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gmd128() -> HqcPreset {
        HqcPreset::named("gmd-128").unwrap()
    }

    const ALL: [DecoderKind; 5] = [
        DecoderKind::Hard,
        DecoderKind::ErasureOnly,
        DecoderKind::Chase(3),
        DecoderKind::Gmd(UpdateVariant::Literal),
        DecoderKind::Gmd(UpdateVariant::Scaled),
    ];

    #[test]
    fn preset_table() {
        let expect = [
            ("hqc-128", 46, 16, 3, 17669u64, 17664usize),
            ("hqc-192", 56, 24, 5, 35851, 35840),
            ("hqc-256", 90, 32, 5, 57637, 57600),
            ("gmd-128", 36, 16, 3, 13829, 13824),
        ];
        for (name, n_rs, k_rs, m, n, payload) in expect {
            let p = HqcPreset::named(name).unwrap();
            assert_eq!((p.rs.n(), p.rs.k(), p.rm.multiplicity()), (n_rs, k_rs, m));
            assert_eq!(p.n, n);
            assert_eq!(p.payload_len(), payload);
        }
        assert_eq!(HqcPreset::custom(40, 16, 3).unwrap().n, 15373);
        assert!(matches!(
            HqcPreset::named("hqc-64"),
            Err(PipelineError::UnknownPreset(_))
        ));
    }

    #[test]
    fn zero_message_zero_payload() {
        let p = gmd128();
        let payload = concat_encode(&[Gf::ZERO; 16], &p).unwrap();
        assert_eq!(payload.len(), 13824);
        assert!(payload.iter().all(|&b| b == 0));
        assert!(concat_encode(&[Gf::ZERO; 15], &p).is_err());
    }

    #[test]
    fn noiseless_round_trip_every_preset_and_decoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for name in HqcPreset::NAMES {
            let p = HqcPreset::named(name).unwrap();
            let msg = random_message(&p, &mut rng);
            let payload = concat_encode(&msg, &p).unwrap();
            for d in ALL {
                let res = concat_decode(&payload, &p, d).unwrap();
                assert!(res.is_success(), "{name} {d}");
                assert_eq!(res.message.as_deref(), Some(&msg[..]));
            }
        }
    }

    #[test]
    fn segment_layout_is_position_major() {
        // Marker: codeword symbol l is RM-encoded in bits [l·384, (l+1)·384).
        let p = gmd128();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let msg = random_message(&p, &mut rng);
        let cw = p.rs.encode(&msg).unwrap();
        let payload = concat_encode(&msg, &p).unwrap();
        for (l, seg) in payload.chunks_exact(384).enumerate() {
            assert_eq!(seg, &p.rm.encode(cw[l].0 as u8)[..]);
        }
        let soft = rm_stage(&payload, &p).unwrap();
        let back: Vec<Gf> = soft.iter().map(|s| Gf(s.best as u16)).collect();
        assert_eq!(back, cw);
        // Destroying exactly one segment moves exactly that RS position.
        for l in [0usize, 17, 35] {
            let mut bad = payload.clone();
            let seg = &mut bad[l * 384..(l + 1) * 384];
            seg.copy_from_slice(&p.rm.encode(cw[l].0 as u8 ^ 0x5A));
            let soft = rm_stage(&bad, &p).unwrap();
            for (j, s) in soft.iter().enumerate() {
                assert_eq!(s.best as u16 == cw[j].0, j != l);
            }
        }
    }

    #[test]
    fn channel_determinism_and_weight() {
        let payload = vec![0u8; 13824];
        for w in [0usize, 1, 100, 13824] {
            let model = ChannelModel {
                channel: Channel::FixedWeight(w),
                seed: 9,
            };
            let out = apply_channel(&payload, &model).unwrap();
            assert_eq!(out.iter().filter(|&&b| b == 1).count(), w);
            assert_eq!(out, apply_channel(&payload, &model).unwrap());
        }
        let id = ChannelModel {
            channel: Channel::Bernoulli(0.0),
            seed: 1,
        };
        assert_eq!(apply_channel(&payload, &id).unwrap(), payload);
        let all = ChannelModel {
            channel: Channel::Bernoulli(1.0),
            seed: 1,
        };
        assert!(apply_channel(&payload, &all)
            .unwrap()
            .iter()
            .all(|&b| b == 1));
        let bad = ChannelModel {
            channel: Channel::FixedWeight(13825),
            seed: 1,
        };
        assert!(apply_channel(&payload, &bad).is_err());
    }

    #[test]
    fn bernoulli_flip_rate() {
        let payload = vec![0u8; 100_000];
        for p in [0.001, 0.05, 0.3, 0.9] {
            let model = ChannelModel {
                channel: Channel::Bernoulli(p),
                seed: 77,
            };
            let flips = apply_channel(&payload, &model)
                .unwrap()
                .iter()
                .filter(|&&b| b == 1)
                .count() as f64;
            let mean = p * 1e5;
            let sd = (1e5 * p * (1.0 - p)).sqrt();
            assert!((flips - mean).abs() < 5.0 * sd, "p = {p}: {flips}");
        }
    }

    #[test]
    fn parse_round_trips() {
        for s in ["bernoulli:0.25", "fixed:120"] {
            assert_eq!(s.parse::<Channel>().unwrap().to_string(), s);
        }
        for s in ["hard", "erasure", "chase:3", "gmd", "gmd-scaled"] {
            assert_eq!(s.parse::<DecoderKind>().unwrap().to_string(), s);
        }
        assert!("bernoulli:1.5".parse::<Channel>().is_err());
        assert!("gauss:1".parse::<Channel>().is_err());
        assert!("chase:9".parse::<DecoderKind>().is_err());
        assert!("soft".parse::<DecoderKind>().is_err());
        assert_eq!(String::from(Channel::Bernoulli(0.5)), "bernoulli:0.5");
    }

    #[test]
    fn gmd_beats_hard_on_low_reliability_symbol_errors() {
        // In t + 1 RS blocks, flip ⌈m/2⌉ = 2 of the 3 copies at selected
        // aggregated positions so the symbol decodes wrong with low
        // reliability; hard decoding sees t + 1 errors.
        let p = gmd128();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let msg = random_message(&p, &mut rng);
        let cw = p.rs.encode(&msg).unwrap();
        let mut payload = concat_encode(&msg, &p).unwrap();
        let positions = sample(&mut rng, 36, 11).into_vec();
        for &l in &positions {
            // Push the block past a neighbouring codeword (distance 64 per
            // copy): 2 of 3 copies flipped on 49 of the 64 differing bits.
            let target = p.rm.encode(cw[l].0 as u8 ^ 0x01);
            let own = p.rm.encode(cw[l].0 as u8);
            let diff: Vec<usize> = (0..128).filter(|&j| target[j] != own[j]).take(49).collect();
            for copy in 0..2 {
                for &j in &diff {
                    payload[l * 384 + copy * 128 + j] ^= 1;
                }
            }
        }
        let soft = rm_stage(&payload, &p).unwrap();
        for &l in &positions {
            assert_ne!(soft[l].best as u16, cw[l].0);
            assert!(soft[l].max1 < 384);
        }
        let hard = concat_decode(&payload, &p, DecoderKind::Hard).unwrap();
        assert_ne!(hard.message.as_deref(), Some(&msg[..]));
        let gmd = concat_decode(&payload, &p, DecoderKind::Gmd(UpdateVariant::Literal)).unwrap();
        assert_eq!(gmd.message.as_deref(), Some(&msg[..]));
    }

    #[test]
    fn corruption_within_t_blocks_decodes_hard() {
        let p = gmd128();
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for _ in 0..50 {
            let msg = random_message(&p, &mut rng);
            let mut payload = concat_encode(&msg, &p).unwrap();
            let count = rng.gen_range(0..=10);
            for l in sample(&mut rng, 36, count) {
                for b in &mut payload[l * 384..(l + 1) * 384] {
                    *b = rng.gen_range(0..2);
                }
            }
            let res = concat_decode(&payload, &p, DecoderKind::Hard).unwrap();
            assert_eq!(res.message.as_deref(), Some(&msg[..]));
        }
    }

    #[test]
    fn wrong_payload_length() {
        let p = gmd128();
        assert!(matches!(
            concat_decode(&[0u8; 100], &p, DecoderKind::Hard),
            Err(PipelineError::PayloadLength { .. })
        ));
    }
}
