//! Synchronized pseudo-random base streams from the pre-shared secret key.
//!
//! The generator family is a configurable-tap Fibonacci linear feedback shift
//! register: small enough that exhausting its seed space is a desk-scale
//! exercise, which is exactly what the cryptanalysis side needs to
//! demonstrate. The trait keeps the generator pluggable should a stronger
//! family ever be wanted.
//!
//! Stream convention: each step emits the register's least significant bit,
//! then shifts right and inserts the feedback parity at the top. Tap position
//! `t` (1-based, `t = width` is the oldest bit) reads register bit
//! `width - t`. A base symbol consumes `bits_per_symbol` consecutive output
//! bits, packed most-significant-first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of the keystream generator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Fibonacci linear feedback shift register.
    Lfsr,
}

/// Secret key plus generator definition; `M = 2^bits_per_symbol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeystreamSpec {
    pub secret_key: u64,
    pub key_width: u32,
    pub generator: GeneratorKind,
    pub taps: Vec<u32>,
    pub bits_per_symbol: u32,
}

impl KeystreamSpec {
    pub fn new(secret_key: u64, key_width: u32, taps: Vec<u32>, bits_per_symbol: u32) -> Result<Self> {
        let spec = KeystreamSpec {
            secret_key,
            key_width,
            generator: GeneratorKind::Lfsr,
            taps,
            bits_per_symbol,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 16-bit register with maximal-length taps {16, 14, 13, 11}.
    pub fn lfsr16(secret_key: u64, bits_per_symbol: u32) -> Result<Self> {
        Self::new(secret_key, 16, vec![16, 14, 13, 11], bits_per_symbol)
    }

    /// Published maximal-length tap sets for a few register widths.
    pub fn default_taps(width: u32) -> Option<Vec<u32>> {
        match width {
            8 => Some(vec![8, 6, 5, 4]),
            12 => Some(vec![12, 11, 10, 4]),
            16 => Some(vec![16, 14, 13, 11]),
            20 => Some(vec![20, 17]),
            24 => Some(vec![24, 23, 22, 17]),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(8..=64).contains(&self.key_width) {
            return Err(Error::Config(format!("key width must be in [8, 64], got {}", self.key_width)));
        }
        if self.secret_key == 0 {
            return Err(Error::Config("shift-register key must be nonzero".into()));
        }
        if self.key_width < 64 && self.secret_key >> self.key_width != 0 {
            return Err(Error::Config(format!(
                "key 0x{:X} does not fit in {} bits",
                self.secret_key, self.key_width
            )));
        }
        if self.taps.is_empty() || self.taps.iter().any(|&t| t == 0 || t > self.key_width) {
            return Err(Error::Config(format!(
                "taps must be nonempty positions in [1, {}], got {:?}",
                self.key_width, self.taps
            )));
        }
        if !(2..=20).contains(&self.bits_per_symbol) {
            return Err(Error::Config(format!(
                "bits_per_symbol must be in [2, 20], got {}",
                self.bits_per_symbol
            )));
        }
        Ok(())
    }

    /// Number of bases on the matching wheel, `M = 2^bits_per_symbol`.
    pub fn num_bases(&self) -> u32 {
        1 << self.bits_per_symbol
    }

    /// Instantiate the generator run-state seeded with the secret key.
    pub fn instantiate(&self) -> Result<Lfsr> {
        self.validate()?;
        Lfsr::new(self.secret_key, self.key_width, &self.taps)
    }

    /// Same generator, different starting register: the brute-force search
    /// re-seeds one spec across the whole key space.
    pub fn instantiate_with_key(&self, candidate_key: u64) -> Result<Lfsr> {
        Lfsr::new(candidate_key, self.key_width, &self.taps)
    }
}

/// Fibonacci LFSR run-state.
#[derive(Debug, Clone)]
pub struct Lfsr {
    state: u64,
    width: u32,
    tap_mask: u64,
}

impl Lfsr {
    pub fn new(seed: u64, width: u32, taps: &[u32]) -> Result<Self> {
        if seed == 0 {
            return Err(Error::Config("all-zero register state".into()));
        }
        if !(1..=64).contains(&width) || (width < 64 && seed >> width != 0) {
            return Err(Error::Config(format!("seed 0x{seed:X} does not fit register width {width}")));
        }
        let mut tap_mask = 0u64;
        for &t in taps {
            if t == 0 || t > width {
                return Err(Error::Config(format!("tap {t} out of range [1, {width}]")));
            }
            tap_mask |= 1 << (width - t);
        }
        if tap_mask == 0 {
            return Err(Error::Config("empty tap set".into()));
        }
        Ok(Lfsr { state: seed, width, tap_mask })
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    /// Advance one step; returns the output bit (the LSB shifted out).
    #[inline]
    pub fn step(&mut self) -> u8 {
        let out = (self.state & 1) as u8;
        let feedback = ((self.state & self.tap_mask).count_ones() & 1) as u64;
        self.state = (self.state >> 1) | (feedback << (self.width - 1));
        out
    }

    /// Next base symbol: `bits` consecutive output bits, MSB first.
    #[inline]
    pub fn next_base(&mut self, bits: u32) -> u32 {
        let mut v = 0u32;
        for _ in 0..bits {
            v = (v << 1) | u32::from(self.step());
        }
        v
    }
}
