//! End-to-end experiment drivers shared by the CLI and the acceptance suite.
//!
//! Each driver is a pure function of its configuration (all randomness flows
//! from the master seed), so re-running an experiment reproduces its outputs
//! byte for byte.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::cryptanalysis::{
    bits_to_bytes, block_attack, block_decrypt, block_encrypt, brute_force_otp, bytes_to_bits,
    concat_blocks, derive_stream, otp_encrypt, split_blocks, CipherMode, CipherScenario,
    RecoveryResult, Scorer, FEISTEL_BLOCK_BITS,
};
use crate::error::{Error, Result};
use crate::eve::{detection_stats, verify_keystream_relation, DetectionStats, EveAttacker, RelationReport};
use crate::session::{run_session, SessionConfig, SymbolRecord};
use crate::wheel::WheelConfig;

/// Mean photon number below which the cut base is no longer orthogonal to
/// the sent state and the eavesdropping channel turns stochastic: `1 + 1/√2`.
pub fn microscopic_threshold_alpha_sq() -> f64 {
    1.0 + FRAC_1_SQRT_2
}

/// Honest and attacked transcripts over identical symbol streams.
///
/// Both runs share the master seed, so Alice's bases and data bits are
/// identical, as are the noise draws on every leg both runs have in common;
/// any difference in Bob's errors is attributable to Eve alone.
pub fn run_paired_sessions(cfg: &SessionConfig) -> Result<(Vec<SymbolRecord>, Vec<SymbolRecord>)> {
    let honest = run_session(cfg, None)?;
    let attacked = run_session(cfg, Some(&EveAttacker::new(cfg.noise_scale)))?;
    Ok((honest, attacked))
}

/// Summary of a paired honest/attacked run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub n: usize,
    pub relation: RelationReport,
    pub detection: DetectionStats,
}

/// Run the attack experiment: paired sessions, the keystream relation check,
/// and Bob-side detection statistics.
pub fn run_attack_experiment(cfg: &SessionConfig) -> Result<(AttackReport, Vec<SymbolRecord>)> {
    let (honest, attacked) = run_paired_sessions(cfg)?;
    let relation = verify_keystream_relation(&attacked, &cfg.wheel)?;
    let detection = detection_stats(&attacked, &honest)?;
    Ok((AttackReport { n: attacked.len(), relation, detection }, attacked))
}

/// One row of the amplitude sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha_sq: f64,
    pub repetition: u32,
    /// Marks the `1 + 1/√2` orthogonality threshold row.
    pub is_threshold: bool,
    pub relation_error: f64,
    pub bob_ber_honest: f64,
    pub bob_ber_attacked: f64,
}

/// Default sweep grid: three points per decade over `[0.1, 1000]` plus the
/// microscopic threshold marker.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=12).map(|i| 10f64.powf(i as f64 / 3.0 - 1.0)).collect();
    grid.push(microscopic_threshold_alpha_sq());
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

/// Sweep the mean photon number with everything else fixed.
pub fn run_alpha_sweep(base: &SessionConfig, grid: &[f64], repetitions: u32) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid must be nonempty".into()));
    }
    if repetitions == 0 {
        return Err(Error::Config("repetitions must be >= 1".into()));
    }
    let threshold = microscopic_threshold_alpha_sq();
    let mut points = Vec::with_capacity(grid.len() * repetitions as usize);
    for &alpha_sq in grid {
        for rep in 0..repetitions {
            let mut cfg = base.clone();
            cfg.wheel = WheelConfig::with_mean_photons(base.wheel.m(), alpha_sq)?;
            cfg.master_seed = base.master_seed.wrapping_add(u64::from(rep));
            let (report, _) = run_attack_experiment(&cfg)?;
            points.push(SweepPoint {
                alpha_sq,
                repetition: rep,
                is_threshold: (alpha_sq - threshold).abs() < 1e-9,
                relation_error: report.relation.error_rate,
                bob_ber_honest: report.detection.bob_errors_without_eve as f64 / report.n as f64,
                bob_ber_attacked: report.detection.bob_errors_with_eve as f64 / report.n as f64,
            });
        }
    }
    Ok(points)
}

/// Everything the key-recovery experiment produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRecoveryOutcome {
    pub mode: CipherMode,
    pub planted_key: u64,
    pub recovered: RecoveryResult,
    pub recovered_matches_planted: bool,
    /// Plaintext reconstructed under the recovered key.
    pub recovered_plaintext: Vec<u8>,
    pub relation: RelationReport,
}

/// Full pipeline: session under attack, message encryption on the open
/// channel, Eve's reduction, and exhaustive key search.
///
/// `scramble_eve_bases` corrupts Eve's recorded base choices before the
/// search, a negative control that must destroy the recovery.
pub fn run_key_recovery(
    cfg: &SessionConfig,
    scenario: &CipherScenario,
    scorer: &Scorer,
    scramble_eve_bases: bool,
) -> Result<KeyRecoveryOutcome> {
    scenario.validate()?;
    let mut cfg = cfg.clone();
    cfg.n_symbols = scenario.n_symbols();
    let attacked = run_session(&cfg, Some(&EveAttacker::new(cfg.noise_scale)))?;
    let relation = verify_keystream_relation(&attacked, &cfg.wheel)?;

    let r_bits: Vec<u8> = attacked.iter().map(|s| s.r).collect();
    let l_bits: Vec<u8> = attacked.iter().map(|s| s.eve.as_ref().unwrap().l).collect();
    let mut eve_bases: Vec<u32> = attacked.iter().map(|s| s.eve.as_ref().unwrap().k_eve).collect();
    if scramble_eve_bases {
        // Deterministic corruption: rotate the record out of alignment and
        // perturb each base.
        let m = cfg.wheel.m();
        eve_bases.rotate_left(7);
        for (i, base) in eve_bases.iter_mut().enumerate() {
            *base = (*base + 2 * (i as u32 % 3) + 2) % m;
        }
    }

    let p_bits = bytes_to_bits(&scenario.plaintext);
    match scenario.mode {
        CipherMode::OneTimePad => {
            let c_bits = otp_encrypt(&p_bits, &r_bits)?;
            let derived = derive_stream(&c_bits, &l_bits)?;
            let recovered = brute_force_otp(&derived, &eve_bases, &cfg.keystream, scorer, &cfg.wheel)?;
            // Reconstruct the plaintext implied by the winning key.
            let plaintext_bits = {
                let mut generator = cfg.keystream.instantiate_with_key(recovered.recovered_key)?;
                let table_bit = |k: u32, ke: u32| cfg.wheel.predict_keystream_bit(k, ke);
                derived
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| {
                        let k = generator.next_base(cfg.keystream.bits_per_symbol);
                        Ok(d ^ table_bit(k, eve_bases[i])?)
                    })
                    .collect::<Result<Vec<u8>>>()?
            };
            Ok(KeyRecoveryOutcome {
                mode: scenario.mode,
                planted_key: cfg.keystream.secret_key,
                recovered_matches_planted: recovered.recovered_key == cfg.keystream.secret_key,
                recovered_plaintext: bits_to_bytes(&plaintext_bits),
                recovered,
                relation,
            })
        }
        CipherMode::Block => {
            let n = scenario.block_size_bits;
            let r_blocks = concat_blocks(&r_bits, n)?;
            let l_blocks = concat_blocks(&l_bits, n)?;
            let p_blocks = concat_blocks(&p_bits, n)?;
            let c_blocks: Vec<u32> = p_blocks
                .iter()
                .zip(&r_blocks)
                .map(|(&p, &r)| u32::from(block_encrypt(p as u16, r as u16, scenario.cipher_rounds)))
                .collect();
            let recovered = block_attack(
                &c_blocks,
                &l_blocks,
                &eve_bases,
                &cfg.keystream,
                scorer,
                &cfg.wheel,
                scenario.cipher_rounds,
            )?;
            // Decrypt under the winning key.
            let plaintext_blocks: Vec<u32> = {
                let mut generator = cfg.keystream.instantiate_with_key(recovered.recovered_key)?;
                c_blocks
                    .iter()
                    .zip(&l_blocks)
                    .enumerate()
                    .map(|(block_index, (&c, &l))| {
                        let mut ktilde = 0u32;
                        for bit in 0..n {
                            let k = generator.next_base(cfg.keystream.bits_per_symbol);
                            let ke = eve_bases[block_index * FEISTEL_BLOCK_BITS + bit];
                            ktilde = (ktilde << 1) | u32::from(cfg.wheel.predict_keystream_bit(k, ke)?);
                        }
                        Ok(u32::from(block_decrypt(c as u16, (l ^ ktilde) as u16, scenario.cipher_rounds)))
                    })
                    .collect::<Result<Vec<u32>>>()?
            };
            Ok(KeyRecoveryOutcome {
                mode: scenario.mode,
                planted_key: cfg.keystream.secret_key,
                recovered_matches_planted: recovered.recovered_key == cfg.keystream.secret_key,
                recovered_plaintext: bits_to_bytes(&split_blocks(&plaintext_blocks, n)?),
                recovered,
                relation,
            })
        }
    }
}
