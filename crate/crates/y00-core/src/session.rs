//! One protocol session: synchronized base streams, physical-random data
//! bits, modulation, the optional eavesdropper in the channel, and Bob's
//! demodulation, captured as a per-symbol transcript.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::eve::EveRecord;
use crate::keystream::KeystreamSpec;
use crate::optics::{discriminate_in_base, Qumode};
use crate::rng::{substream, DOMAIN_BOB, DOMAIN_EVE, DOMAIN_PHRNG};
use crate::wheel::WheelConfig;

/// Full configuration of a session run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub wheel: WheelConfig,
    pub keystream: KeystreamSpec,
    pub n_symbols: usize,
    /// Multiplier on the quantum fluctuation at every measurement; 0 is the
    /// deterministic override, 1 the physical value.
    pub noise_scale: f64,
    /// Excess channel noise folded into Bob's measurement, in units of the
    /// quantum fluctuation; 0 matches the noise-free-channel assumption.
    pub channel_noise_scale: f64,
    /// Seed for all simulated randomness (physical bits and measurement noise).
    pub master_seed: u64,
}

impl SessionConfig {
    pub fn new(wheel: WheelConfig, keystream: KeystreamSpec, n_symbols: usize, master_seed: u64) -> Result<Self> {
        let cfg = SessionConfig {
            wheel,
            keystream,
            n_symbols,
            noise_scale: 1.0,
            channel_noise_scale: 0.0,
            master_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_symbols == 0 {
            return Err(Error::Config("n_symbols must be >= 1".into()));
        }
        self.keystream.validate()?;
        if self.keystream.num_bases() != self.wheel.m() {
            return Err(Error::Config(format!(
                "keystream extracts {} bases per symbol but the wheel has M = {}",
                self.keystream.num_bases(),
                self.wheel.m()
            )));
        }
        if !self.noise_scale.is_finite() || self.noise_scale < 0.0 {
            return Err(Error::Config(format!("noise_scale must be finite and >= 0, got {}", self.noise_scale)));
        }
        if !self.channel_noise_scale.is_finite() || self.channel_noise_scale < 0.0 {
            return Err(Error::Config(format!(
                "channel_noise_scale must be finite and >= 0, got {}",
                self.channel_noise_scale
            )));
        }
        Ok(())
    }

    /// Effective noise multiplier at Bob: quantum and channel excess noise
    /// add in quadrature on the Stokes plane.
    pub fn bob_noise_scale(&self) -> f64 {
        (self.noise_scale * self.noise_scale + self.channel_noise_scale * self.channel_noise_scale).sqrt()
    }
}

/// Ground truth and observations for one transmitted symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolRecord {
    pub i: u64,
    pub k: u32,
    pub r: u8,
    pub j_sent: u32,
    pub bob_bit: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eve: Option<EveRecord>,
}

/// In-channel attack hook: may substitute the qumode Bob receives and attach
/// an attack record to the transcript.
pub trait InterceptHook: Sync {
    fn intercept(&self, q: &Qumode, rng: &mut ChaCha8Rng) -> Result<(EveRecord, Qumode)>;
}

/// One fair bit from the simulated physical randomness.
pub fn phrng_bit<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    (rng.next_u32() & 1) as u8
}

/// Alice's modulation: the qumode carrying bit `r` in base `k`.
pub fn alice_modulate(k: u32, r: u8, wheel: WheelConfig) -> Result<Qumode> {
    Qumode::new(wheel.state_index(k, r)?, wheel)
}

/// Bob's demodulation: binary discrimination in base `k`, then the bit of the
/// winning state.
pub fn bob_demodulate<R: Rng + ?Sized>(q: &Qumode, k: u32, rng: &mut R, noise_scale: f64) -> Result<u8> {
    let winner = discriminate_in_base(q, k, rng, noise_scale)?;
    q.wheel().bit_of_state(winner)
}

/// Run a session and return the complete transcript in symbol order.
///
/// Symbols are processed in parallel; determinism is guaranteed by the
/// per-symbol randomness substreams, so the transcript is a pure function of
/// the configuration (and the hook's parameters).
pub fn run_session(cfg: &SessionConfig, eve: Option<&dyn InterceptHook>) -> Result<Vec<SymbolRecord>> {
    cfg.validate()?;
    let mut generator = cfg.keystream.instantiate()?;
    let bases: Vec<u32> = (0..cfg.n_symbols)
        .map(|_| generator.next_base(cfg.keystream.bits_per_symbol))
        .collect();

    let wheel = cfg.wheel;
    let bob_scale = cfg.bob_noise_scale();
    bases
        .into_par_iter()
        .enumerate()
        .map(|(i, k)| {
            let idx = i as u64;
            let mut phrng = substream(cfg.master_seed, DOMAIN_PHRNG, idx);
            let r = phrng_bit(&mut phrng);
            let sent = alice_modulate(k, r, wheel)?;
            let (eve_record, arriving) = match eve {
                Some(hook) => {
                    let mut eve_rng = substream(cfg.master_seed, DOMAIN_EVE, idx);
                    let (record, resent) = hook.intercept(&sent, &mut eve_rng)?;
                    (Some(record), resent)
                }
                None => (None, sent),
            };
            let mut bob_rng = substream(cfg.master_seed, DOMAIN_BOB, idx);
            let bob_bit = bob_demodulate(&arriving, k, &mut bob_rng, bob_scale)?;
            Ok(SymbolRecord {
                i: idx,
                k,
                r,
                j_sent: sent.state_index(),
                bob_bit,
                eve: eve_record,
            })
        })
        .collect()
}

/// Number of symbols where Bob's decoded bit differs from Alice's data bit.
pub fn bob_error_count(transcript: &[SymbolRecord]) -> usize {
    transcript.iter().filter(|s| s.bob_bit != s.r).count()
}

/// Serialize a transcript as JSON Lines.
pub fn write_transcript<W: Write>(mut out: W, transcript: &[SymbolRecord]) -> Result<()> {
    for record in transcript {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a JSON Lines transcript produced by [`write_transcript`].
pub fn read_transcript<R: BufRead>(input: R) -> Result<Vec<SymbolRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
