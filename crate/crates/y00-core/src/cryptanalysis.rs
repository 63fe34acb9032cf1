//! Reduction of the attacked protocol to a classical cipher, and brute-force
//! key recovery over the shift-register key space.
//!
//! Once Eve's record satisfies `l = r ⊕ k̃`, XORing her readout against the
//! public ciphertext cancels the expanded key: `c ⊕ l = p ⊕ k̃`, a stream
//! cipher keyed by the short secret that seeds the base generator. Everything
//! here works on that derived stream (or its block-cipher analogue) and
//! searches the key space exhaustively, scoring candidate plaintexts by
//! language statistics or a crib.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::keystream::KeystreamSpec;
use crate::wheel::WheelConfig;

/// Minimum derived-stream length accepted by the brute force; shorter windows
/// cannot separate keys by language statistics.
pub const MIN_SCORING_WINDOW_BITS: usize = 128;

/// Widest register the exhaustive search will take on.
pub const MAX_BRUTE_FORCE_KEY_BITS: u32 = 24;

/// Candidate-plaintext scores above this are treated as genuine language hits
/// in reports; random byte soup scores far below it.
pub const ENGLISH_DETECTION_THRESHOLD: f64 = 0.5;

/// A 256-byte English sample used by the demonstration experiments.
pub const SAMPLE_ENGLISH: &[u8; 256] =
    b"The lighthouse keeper climbed the spiral stairs each evening to trim the \
      lamp and polish the great lens. Ships far out on the dark water counted \
      on that steady beam to find the harbour mouth, and in forty years of storms \
      he had never once let it fall dark.";

// ---------------------------------------------------------------------------
// Bit-stream plumbing
// ---------------------------------------------------------------------------

/// Unpack bytes into bits, MSB first within each byte.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect()
}

/// Pack bits (MSB first) into bytes, discarding any ragged tail.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks_exact(8)
        .map(|chunk| chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect()
}

fn xor_streams(a: &[u8], b: &[u8]) -> Result<Vec<u8>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
}

/// One-time-pad encryption `c_i = p_i ⊕ r_i` on bit streams.
pub fn otp_encrypt(plaintext: &[u8], running_key: &[u8]) -> Result<Vec<u8>> {
    xor_streams(plaintext, running_key)
}

/// Eve's reduction `c_i ⊕ l_i = p_i ⊕ k̃_i`: XOR of the public ciphertext
/// against her readout stream.
pub fn derive_stream(ciphertext: &[u8], eavesdropped: &[u8]) -> Result<Vec<u8>> {
    xor_streams(ciphertext, eavesdropped)
}

/// Pack a bit stream into `n`-bit blocks, MSB first.
pub fn concat_blocks(bits: &[u8], n: usize) -> Result<Vec<u32>> {
    if n == 0 || n > 32 {
        return Err(Error::Domain(format!("block size {n} out of range [1, 32]")));
    }
    if bits.len() % n != 0 {
        return Err(Error::Domain(format!("stream length {} is not a multiple of N = {n}", bits.len())));
    }
    Ok(bits
        .chunks_exact(n)
        .map(|chunk| chunk.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b)))
        .collect())
}

/// Inverse of [`concat_blocks`].
pub fn split_blocks(blocks: &[u32], n: usize) -> Result<Vec<u8>> {
    if n == 0 || n > 32 {
        return Err(Error::Domain(format!("block size {n} out of range [1, 32]")));
    }
    Ok(blocks
        .iter()
        .flat_map(|&block| (0..n).rev().map(move |i| ((block >> i) & 1) as u8))
        .collect())
}

// ---------------------------------------------------------------------------
// Toy block cipher
// ---------------------------------------------------------------------------

/// Block width of the toy cipher, in bits.
pub const FEISTEL_BLOCK_BITS: usize = 16;

/// Default round count.
pub const FEISTEL_ROUNDS: u32 = 4;

/// PRESENT nibble S-box, applied to both nibbles of the round-function input.
const SBOX: [u8; 16] = [0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2];

#[inline]
fn round_fn(x: u8, round_key: u8) -> u8 {
    let x = x ^ round_key;
    let substituted = (SBOX[(x >> 4) as usize] << 4) | SBOX[(x & 0xF) as usize];
    substituted.rotate_left(3)
}

#[inline]
fn round_key(key: u16, round: u32) -> u8 {
    (key.rotate_left(4 * round) & 0xFF) as u8
}

/// Balanced Feistel encryption of one 16-bit block under a 16-bit running key.
pub fn block_encrypt(plaintext: u16, key: u16, rounds: u32) -> u16 {
    let (mut l, mut r) = ((plaintext >> 8) as u8, (plaintext & 0xFF) as u8);
    for t in 0..rounds {
        let next_r = l ^ round_fn(r, round_key(key, t));
        l = r;
        r = next_r;
    }
    (u16::from(l) << 8) | u16::from(r)
}

/// Inverse of [`block_encrypt`] under the same key and round count.
pub fn block_decrypt(ciphertext: u16, key: u16, rounds: u32) -> u16 {
    let (mut l, mut r) = ((ciphertext >> 8) as u8, (ciphertext & 0xFF) as u8);
    for t in (0..rounds).rev() {
        let next_l = r ^ round_fn(l, round_key(key, t));
        r = l;
        l = next_l;
    }
    (u16::from(l) << 8) | u16::from(r)
}

// ---------------------------------------------------------------------------
// Plaintext scoring
// ---------------------------------------------------------------------------

/// Relative letter frequencies of English text (a..z), normalized to 1.
const ENGLISH_FREQ: [f64; 26] = [
    0.08167, 0.01492, 0.02782, 0.04253, 0.12702, 0.02228, 0.02015, 0.06094, 0.06966, 0.00153, 0.00772,
    0.04025, 0.02406, 0.06749, 0.07507, 0.01929, 0.00095, 0.05987, 0.06327, 0.09056, 0.02758, 0.00978,
    0.02360, 0.00150, 0.01974, 0.00074,
];

/// Chi-square penalty assigned when a candidate contains no letters at all.
const NO_LETTER_PENALTY: f64 = 30.0;

/// Plausibility score for a candidate plaintext: printable-byte fraction
/// minus the chi-square distance of its letter frequencies from English.
/// Higher is more plausible; genuine English lands near 1, random bytes far
/// below 0. Order-free: any permutation of the bytes scores identically.
pub fn plaintext_score(bytes: &[u8]) -> f64 {
    if bytes.is_empty() {
        return f64::NEG_INFINITY;
    }
    let mut printable = 0usize;
    let mut letter_counts = [0usize; 26];
    let mut letters = 0usize;
    for &b in bytes {
        if (0x20..=0x7E).contains(&b) || b == b'\t' || b == b'\n' || b == b'\r' {
            printable += 1;
        }
        let lower = b.to_ascii_lowercase();
        if lower.is_ascii_lowercase() {
            letter_counts[(lower - b'a') as usize] += 1;
            letters += 1;
        }
    }
    let printable_fraction = printable as f64 / bytes.len() as f64;
    let chi_square = if letters == 0 {
        NO_LETTER_PENALTY
    } else {
        letter_counts
            .iter()
            .zip(ENGLISH_FREQ.iter())
            .map(|(&count, &expected)| {
                let observed = count as f64 / letters as f64;
                (observed - expected) * (observed - expected) / expected
            })
            .sum()
    };
    printable_fraction - chi_square
}

/// How candidate plaintexts are ranked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scorer {
    /// Language statistics via [`plaintext_score`].
    English,
    /// Fraction of bytes matching a known plaintext fragment (anchored at
    /// offset 0). Useful in block mode where a few blocks carry too little
    /// frequency signal.
    Crib { known: Vec<u8> },
}

impl Scorer {
    pub fn score(&self, bytes: &[u8]) -> f64 {
        match self {
            Scorer::English => plaintext_score(bytes),
            Scorer::Crib { known } => {
                let overlap = known.len().min(bytes.len());
                if overlap == 0 {
                    return f64::NEG_INFINITY;
                }
                let matching = known[..overlap]
                    .iter()
                    .zip(&bytes[..overlap])
                    .filter(|(a, b)| a == b)
                    .count();
                matching as f64 / overlap as f64
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Brute force
// ---------------------------------------------------------------------------

/// Cipher mode of a demonstration scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CipherMode {
    OneTimePad,
    Block,
}

/// Message-side configuration for an end-to-end run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CipherScenario {
    pub mode: CipherMode,
    pub plaintext: Vec<u8>,
    pub block_size_bits: usize,
    pub cipher_rounds: u32,
}

impl CipherScenario {
    pub fn one_time_pad(plaintext: Vec<u8>) -> Result<Self> {
        let scenario = CipherScenario {
            mode: CipherMode::OneTimePad,
            plaintext,
            block_size_bits: FEISTEL_BLOCK_BITS,
            cipher_rounds: FEISTEL_ROUNDS,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn block(plaintext: Vec<u8>) -> Result<Self> {
        let scenario = CipherScenario {
            mode: CipherMode::Block,
            plaintext,
            block_size_bits: FEISTEL_BLOCK_BITS,
            cipher_rounds: FEISTEL_ROUNDS,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.plaintext.is_empty() {
            return Err(Error::Config("plaintext must be nonempty".into()));
        }
        if self.mode == CipherMode::Block {
            if self.block_size_bits != FEISTEL_BLOCK_BITS {
                return Err(Error::Config(format!(
                    "the block cipher supports N = {FEISTEL_BLOCK_BITS} only, got {}",
                    self.block_size_bits
                )));
            }
            if self.cipher_rounds == 0 {
                return Err(Error::Config("cipher_rounds must be >= 1".into()));
            }
            if (self.plaintext.len() * 8) % self.block_size_bits != 0 {
                return Err(Error::Config(format!(
                    "plaintext length {} bits is not a multiple of N = {}",
                    self.plaintext.len() * 8,
                    self.block_size_bits
                )));
            }
        }
        Ok(())
    }

    /// Number of expanded key bits the scenario consumes.
    pub fn n_symbols(&self) -> usize {
        self.plaintext.len() * 8
    }
}

/// One scored key candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedKey {
    pub key: u64,
    pub score: f64,
}

/// Outcome of an exhaustive key search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub recovered_key: u64,
    pub score: f64,
    /// Score gap to the runner-up; 0 means the top rank was a tie broken
    /// toward the numerically smaller key.
    pub margin: f64,
    pub keys_tried: u64,
    pub elapsed_ms: u128,
    pub top10: Vec<RankedKey>,
}

/// Keystream-bit oracle for the brute-force inner loops: a flat
/// `(k_true, k_eve)` lookup table up to M = 4096 (the table is M² bytes),
/// direct computation beyond that.
enum Predictor<'a> {
    Table { table: Vec<u8>, m: usize },
    Direct(&'a WheelConfig),
}

impl<'a> Predictor<'a> {
    fn build(wheel: &'a WheelConfig) -> Result<Self> {
        let m = wheel.m() as usize;
        if m > 4096 {
            return Ok(Predictor::Direct(wheel));
        }
        let mut table = vec![0u8; m * m];
        for k_true in 0..m {
            for k_eve in 0..m {
                table[k_true * m + k_eve] = wheel.predict_keystream_bit(k_true as u32, k_eve as u32)?;
            }
        }
        Ok(Predictor::Table { table, m })
    }

    /// Both indices must already be validated against M.
    #[inline]
    fn get(&self, k_true: u32, k_eve: u32) -> u8 {
        match self {
            Predictor::Table { table, m } => table[k_true as usize * m + k_eve as usize],
            Predictor::Direct(wheel) => wheel
                .predict_keystream_bit(k_true, k_eve)
                .expect("indices validated by caller"),
        }
    }
}

fn check_eve_bases(eve_bases: &[u32], wheel: &WheelConfig) -> Result<()> {
    if let Some(&bad) = eve_bases.iter().find(|&&k| k >= wheel.m()) {
        return Err(Error::Domain(format!("recorded base {bad} out of range [0, {})", wheel.m())));
    }
    Ok(())
}

fn keyspace(spec: &KeystreamSpec) -> Result<std::ops::RangeInclusive<u64>> {
    if spec.key_width > MAX_BRUTE_FORCE_KEY_BITS {
        return Err(Error::Config(format!(
            "brute force is capped at {MAX_BRUTE_FORCE_KEY_BITS}-bit keys, got {}",
            spec.key_width
        )));
    }
    Ok(1..=((1u64 << spec.key_width) - 1))
}

fn rank_candidates(mut scored: Vec<RankedKey>, keys_tried: u64, started: Instant) -> RecoveryResult {
    scored.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap().then(a.key.cmp(&b.key)));
    let best = scored[0];
    let margin = if scored.len() > 1 { best.score - scored[1].score } else { f64::INFINITY };
    RecoveryResult {
        recovered_key: best.key,
        score: best.score,
        margin,
        keys_tried,
        elapsed_ms: started.elapsed().as_millis(),
        top10: scored.into_iter().take(10).collect(),
    }
}

/// Exhaustive key search over the derived stream `p ⊕ k̃`.
///
/// For every candidate key the base stream is regenerated, the keystream bits
/// `k̃_i = predict(k_i, k_eve_i)` are XORed away, and the resulting candidate
/// plaintext is scored. Deterministic: ties rank the smaller key first.
pub fn brute_force_otp(
    derived: &[u8],
    eve_bases: &[u32],
    spec: &KeystreamSpec,
    scorer: &Scorer,
    wheel: &WheelConfig,
) -> Result<RecoveryResult> {
    if derived.len() != eve_bases.len() {
        return Err(Error::LengthMismatch { left: derived.len(), right: eve_bases.len() });
    }
    if derived.len() < MIN_SCORING_WINDOW_BITS {
        return Err(Error::Domain(format!(
            "derived stream of {} bits is below the scoring window of {MIN_SCORING_WINDOW_BITS}",
            derived.len()
        )));
    }
    spec.validate()?;
    if spec.num_bases() != wheel.m() {
        return Err(Error::Config("keystream and wheel disagree on M".into()));
    }
    check_eve_bases(eve_bases, wheel)?;
    let started = Instant::now();
    let predictor = Predictor::build(wheel)?;
    let keys = keyspace(spec)?;
    let keys_tried = *keys.end() - *keys.start() + 1;
    let scored: Vec<RankedKey> = keys
        .into_par_iter()
        .map(|key| {
            let mut generator = spec.instantiate_with_key(key).expect("key in range is valid");
            let mut candidate = vec![0u8; derived.len()];
            for (i, slot) in candidate.iter_mut().enumerate() {
                let k = generator.next_base(spec.bits_per_symbol);
                *slot = derived[i] ^ predictor.get(k, eve_bases[i]);
            }
            RankedKey { key, score: scorer.score(&bits_to_bytes(&candidate)) }
        })
        .collect();
    Ok(rank_candidates(scored, keys_tried, started))
}

/// Exhaustive key search against the block-cipher relation
/// `P_J = D_{L_J ⊕ K̃_J}(C_J)`.
pub fn block_attack(
    c_blocks: &[u32],
    l_blocks: &[u32],
    eve_bases: &[u32],
    spec: &KeystreamSpec,
    scorer: &Scorer,
    wheel: &WheelConfig,
    rounds: u32,
) -> Result<RecoveryResult> {
    if c_blocks.len() != l_blocks.len() {
        return Err(Error::LengthMismatch { left: c_blocks.len(), right: l_blocks.len() });
    }
    if c_blocks.is_empty() {
        return Err(Error::Domain("no ciphertext blocks".into()));
    }
    if eve_bases.len() != c_blocks.len() * FEISTEL_BLOCK_BITS {
        return Err(Error::LengthMismatch {
            left: eve_bases.len(),
            right: c_blocks.len() * FEISTEL_BLOCK_BITS,
        });
    }
    spec.validate()?;
    if spec.num_bases() != wheel.m() {
        return Err(Error::Config("keystream and wheel disagree on M".into()));
    }
    check_eve_bases(eve_bases, wheel)?;
    let started = Instant::now();
    let predictor = Predictor::build(wheel)?;
    let keys = keyspace(spec)?;
    let keys_tried = *keys.end() - *keys.start() + 1;
    let scored: Vec<RankedKey> = keys
        .into_par_iter()
        .map(|key| {
            let mut generator = spec.instantiate_with_key(key).expect("key in range is valid");
            let mut plaintext = Vec::with_capacity(c_blocks.len() * 2);
            for (block_index, (&c, &l)) in c_blocks.iter().zip(l_blocks).enumerate() {
                let mut ktilde_block = 0u32;
                for bit in 0..FEISTEL_BLOCK_BITS {
                    let k = generator.next_base(spec.bits_per_symbol);
                    let k_eve = eve_bases[block_index * FEISTEL_BLOCK_BITS + bit];
                    ktilde_block = (ktilde_block << 1) | u32::from(predictor.get(k, k_eve));
                }
                let running_key = (l ^ ktilde_block) as u16;
                let p = block_decrypt(c as u16, running_key, rounds);
                plaintext.push((p >> 8) as u8);
                plaintext.push((p & 0xFF) as u8);
            }
            RankedKey { key, score: scorer.score(&plaintext) }
        })
        .collect();
    Ok(rank_candidates(scored, keys_tried, started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn xor_examples() {
        let p = [1, 0, 1, 1];
        let r = [0, 1, 1, 0];
        assert_eq!(otp_encrypt(&p, &r).unwrap(), vec![1, 1, 0, 1]);
        let zeros = [0u8; 4];
        assert_eq!(otp_encrypt(&zeros, &r).unwrap(), r.to_vec());
        let c = otp_encrypt(&p, &r).unwrap();
        assert_eq!(otp_encrypt(&c, &r).unwrap(), p.to_vec());
        assert_eq!(derive_stream(&c, &c).unwrap(), zeros.to_vec());
        assert!(otp_encrypt(&p, &r[..3]).is_err());
    }

    proptest! {
        #[test]
        fn derived_stream_identity(p in proptest::collection::vec(0u8..2, 1..256),
                                   r in proptest::collection::vec(0u8..2, 1..256),
                                   kt in proptest::collection::vec(0u8..2, 1..256)) {
            let n = p.len().min(r.len()).min(kt.len());
            let (p, r, kt) = (&p[..n], &r[..n], &kt[..n]);
            // c ⊕ (r ⊕ k̃) = p ⊕ k̃, identically.
            let c = otp_encrypt(p, r).unwrap();
            let l = xor_streams(r, kt).unwrap();
            let derived = derive_stream(&c, &l).unwrap();
            prop_assert_eq!(derived, xor_streams(p, kt).unwrap());
        }

        #[test]
        fn block_packing_roundtrips(bits in proptest::collection::vec(0u8..2, 0..512), n in 1usize..=32) {
            let truncated = &bits[..bits.len() - bits.len() % n];
            let blocks = concat_blocks(truncated, n).unwrap();
            prop_assert_eq!(split_blocks(&blocks, n).unwrap(), truncated.to_vec());
        }
    }

    #[test]
    fn concat_blocks_examples() {
        assert_eq!(concat_blocks(&[1, 0, 1, 1], 4).unwrap(), vec![0xB]);
        let bits = [1u8, 0, 0, 1, 1];
        assert_eq!(concat_blocks(&bits, 1).unwrap(), vec![1, 0, 0, 1, 1]);
        assert!(concat_blocks(&bits, 4).is_err());
    }

    #[test]
    fn feistel_frozen_vectors() {
        // Independent straight-line traces of the four rounds.
        assert_eq!(block_encrypt(0x0000, 0x0000, FEISTEL_ROUNDS), 0x6600);
        assert_eq!(block_encrypt(0x6A5C, 0xACE1, FEISTEL_ROUNDS), 0x1E1B);
        assert_eq!(block_encrypt(0xFFFF, 0x1234, FEISTEL_ROUNDS), 0x9FFA);
    }

    #[test]
    fn feistel_roundtrips() {
        let mut state = 0x12345678u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as u16
        };
        for _ in 0..10_000 {
            let p = next();
            let k = next();
            assert_eq!(block_decrypt(block_encrypt(p, k, FEISTEL_ROUNDS), k, FEISTEL_ROUNDS), p);
        }
    }

    #[test]
    fn feistel_is_a_permutation() {
        let key = 0xACE1;
        let mut seen = vec![false; 1 << 16];
        for p in 0..=u16::MAX {
            let c = block_encrypt(p, key, FEISTEL_ROUNDS) as usize;
            assert!(!seen[c], "collision at plaintext {p:#06x}");
            seen[c] = true;
        }
    }

    #[test]
    fn english_scores_above_random_bytes() {
        let mut state = 0xDEADBEEFu64;
        let english_score = plaintext_score(SAMPLE_ENGLISH);
        for _ in 0..100 {
            let random: Vec<u8> = (0..256)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (state >> 33) as u8
                })
                .collect();
            assert!(english_score > plaintext_score(&random));
        }
        assert!(english_score > plaintext_score(&[0u8; 256]));
        assert!(english_score > ENGLISH_DETECTION_THRESHOLD);
    }

    #[test]
    fn score_ignores_concatenation_order() {
        let (a, b) = SAMPLE_ENGLISH.split_at(128);
        let ab: Vec<u8> = a.iter().chain(b).copied().collect();
        let ba: Vec<u8> = b.iter().chain(a).copied().collect();
        assert_eq!(plaintext_score(&ab), plaintext_score(&ba));
    }

    #[test]
    fn crib_scorer_counts_matching_prefix() {
        let scorer = Scorer::Crib { known: b"attack at dawn".to_vec() };
        assert_eq!(scorer.score(b"attack at dawn"), 1.0);
        assert_eq!(scorer.score(b"attack at dusk"), 11.0 / 14.0);
    }

    #[test]
    fn scenario_validation() {
        assert!(CipherScenario::one_time_pad(vec![]).is_err());
        assert!(CipherScenario::block(vec![1]).is_err());
        assert!(CipherScenario::block(vec![1, 2]).is_ok());
        let mut s = CipherScenario::block(vec![1, 2]).unwrap();
        s.block_size_bits = 8;
        assert!(s.validate().is_err());
    }
}
