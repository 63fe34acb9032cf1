//! The intercept-resend eavesdropper.
//!
//! Eve measures the flying qumode's Poincaré angle, snaps it to the nearest
//! wheel state, moves to the closest C₊ base, reads a bit there by binary
//! discrimination, and forwards a freshly prepared copy of whichever state
//! she decided on. Her readout `l` then differs from the data bit `r` by a
//! bit `k̃` that is a deterministic function of the true and selected bases,
//! which is what turns the whole record into a classical stream cipher.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::optics::{discriminate_in_base, measure_angle, Qumode};
use crate::session::{InterceptHook, SymbolRecord};
use crate::wheel::{BaseClass, WheelConfig};

/// Eve's per-symbol record: raw angle, selected base, read bit, resent state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveRecord {
    pub theta_meas: f64,
    pub k_eve: u32,
    pub l: u8,
    pub j_resent: u32,
}

/// What Eve forwards to Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResendPolicy {
    /// The exact wheel state her discrimination decided on (default).
    DecidedState,
    /// The wheel state nearest her raw measured angle, ignoring the
    /// discrimination outcome. With this policy `j_resent` may fall outside
    /// the selected base.
    MeasuredAngle,
}

/// Intercept-resend attacker configuration.
#[derive(Debug, Clone, Copy)]
pub struct EveAttacker {
    pub noise_scale: f64,
    pub resend: ResendPolicy,
}

impl EveAttacker {
    pub fn new(noise_scale: f64) -> Self {
        EveAttacker { noise_scale, resend: ResendPolicy::DecidedState }
    }
}

impl InterceptHook for EveAttacker {
    fn intercept(&self, q: &Qumode, rng: &mut ChaCha8Rng) -> Result<(EveRecord, Qumode)> {
        eve_intercept(q, rng, self.noise_scale, self.resend)
    }
}

/// Nearest wheel state to a measured angle: `round(θ·M/π) mod 2M`.
pub fn estimate_state(theta_meas: f64, m: u32) -> Result<u32> {
    if !theta_meas.is_finite() {
        return Err(Error::Domain(format!("measured angle must be finite, got {theta_meas}")));
    }
    let folded = theta_meas.rem_euclid(2.0 * PI);
    let steps = (folded * f64::from(m) / PI).round() as i64;
    Ok((steps.rem_euclid(2 * i64::from(m))) as u32)
}

/// Closest C₊ base to the estimated state's base (ties toward the lower
/// neighbour). Because classes alternate around the ring, the result is
/// always within base distance 1.
pub fn select_cplus_base(estimate: u32, wheel: &WheelConfig) -> Result<u32> {
    let b = wheel.base_of_state(estimate)?;
    if wheel.classify_global(b)? == BaseClass::CPlus {
        return Ok(b);
    }
    let m = wheel.m();
    let lower = (b + m - 1) % m;
    debug_assert_eq!(wheel.classify_global(lower)?, BaseClass::CPlus);
    Ok(lower)
}

/// One full intercept: measure, select a C₊ base, read a bit, resend.
pub fn eve_intercept(
    q: &Qumode,
    rng: &mut ChaCha8Rng,
    noise_scale: f64,
    resend: ResendPolicy,
) -> Result<(EveRecord, Qumode)> {
    let wheel = q.wheel();
    let theta_meas = measure_angle(q, rng, noise_scale)?;
    let estimate = estimate_state(theta_meas, wheel.m())?;
    let k_eve = select_cplus_base(estimate, &wheel)?;
    let winner = discriminate_in_base(q, k_eve, rng, noise_scale)?;
    let l = wheel.bit_of_state(winner)?;
    let j_resent = match resend {
        ResendPolicy::DecidedState => winner,
        ResendPolicy::MeasuredAngle => estimate,
    };
    let record = EveRecord { theta_meas, k_eve, l, j_resent };
    Ok((record, Qumode::new(j_resent, wheel)?))
}

/// Accounting of how often `l = r ⊕ k̃` fails on a transcript, with the
/// mismatches split by cause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub n: usize,
    pub mismatches: usize,
    pub error_rate: f64,
    /// Mismatches where the sent state lay within π/8 of Eve's decision
    /// boundary, i.e. her selected base was nearly orthogonal to the true
    /// one (the ill-defined cut region made operational).
    pub near_cut_mismatches: usize,
    /// Remaining mismatches: plain Gaussian measurement tails.
    pub tail_mismatches: usize,
    /// Symbols where the one-argument base-parity shortcut for k̃ disagrees
    /// with the exact nearest-state prediction (the seam correction).
    pub parity_shortcut_disagreements: usize,
}

/// Check the keystream relation `l = r ⊕ k̃` over an attacked transcript.
pub fn verify_keystream_relation(transcript: &[SymbolRecord], wheel: &WheelConfig) -> Result<RelationReport> {
    if transcript.is_empty() {
        return Err(Error::Domain("empty transcript".into()));
    }
    let mut report = RelationReport {
        n: transcript.len(),
        mismatches: 0,
        error_rate: 0.0,
        near_cut_mismatches: 0,
        tail_mismatches: 0,
        parity_shortcut_disagreements: 0,
    };
    for symbol in transcript {
        let eve = symbol
            .eve
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("symbol {} carries no attack record", symbol.i)))?;
        let predicted = wheel.predict_keystream_bit(symbol.k, eve.k_eve)?;
        let parity = ((symbol.k ^ eve.k_eve) & 1) as u8;
        if parity != predicted {
            report.parity_shortcut_disagreements += 1;
        }
        if eve.l != symbol.r ^ predicted {
            report.mismatches += 1;
            // Angle between the sent state and Eve's base axis, folded to
            // [0, π]; her decision boundary sits at π/2.
            let theta_sent = PI * f64::from(symbol.j_sent) / f64::from(wheel.m());
            let theta_axis = PI * f64::from(eve.k_eve) / f64::from(wheel.m());
            let mut gap = (theta_sent - theta_axis).rem_euclid(2.0 * PI);
            if gap > PI {
                gap = 2.0 * PI - gap;
            }
            if (gap - PI / 2.0).abs() < PI / 8.0 {
                report.near_cut_mismatches += 1;
            } else {
                report.tail_mismatches += 1;
            }
        }
    }
    report.error_rate = report.mismatches as f64 / report.n as f64;
    Ok(report)
}

/// Bob-side error comparison between an attacked and an honest run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    pub n: usize,
    pub bob_errors_with_eve: usize,
    pub bob_errors_without_eve: usize,
    /// Two-proportion z statistic for the error rates (0 when both are 0).
    pub z_statistic: f64,
}

/// Compare Bob's error counts with and without the attack; the two
/// transcripts must come from equal-length runs at identical parameters.
pub fn detection_stats(with_eve: &[SymbolRecord], without_eve: &[SymbolRecord]) -> Result<DetectionStats> {
    if with_eve.len() != without_eve.len() {
        return Err(Error::LengthMismatch { left: with_eve.len(), right: without_eve.len() });
    }
    if with_eve.is_empty() {
        return Err(Error::Domain("empty transcript".into()));
    }
    let n = with_eve.len();
    let e1 = crate::session::bob_error_count(with_eve);
    let e2 = crate::session::bob_error_count(without_eve);
    let pooled = (e1 + e2) as f64 / (2 * n) as f64;
    let z = if pooled == 0.0 || pooled == 1.0 {
        0.0
    } else {
        let p1 = e1 as f64 / n as f64;
        let p2 = e2 as f64 / n as f64;
        (p1 - p2) / (pooled * (1.0 - pooled) * 2.0 / n as f64).sqrt()
    };
    Ok(DetectionStats { n, bob_errors_with_eve: e1, bob_errors_without_eve: e2, z_statistic: z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keystream::KeystreamSpec;
    use crate::rng::{substream, DOMAIN_EVE};
    use crate::session::{run_session, SessionConfig};

    fn wheel(m: u32, alpha_sq: f64) -> WheelConfig {
        WheelConfig::with_mean_photons(m, alpha_sq).unwrap()
    }

    fn config(m: u32, alpha_sq: f64, n: usize, seed: u64) -> SessionConfig {
        let bits = (m as f64).log2() as u32;
        SessionConfig::new(wheel(m, alpha_sq), KeystreamSpec::lfsr16(0xACE1, bits).unwrap(), n, seed).unwrap()
    }

    #[test]
    fn estimate_state_examples() {
        assert_eq!(estimate_state(0.0, 16).unwrap(), 0);
        assert_eq!(estimate_state(PI / 2.0 + 0.01, 16).unwrap(), 8);
        assert_eq!(estimate_state(2.0 * PI - PI / 32.0 - 1e-6, 16).unwrap(), 31);
        assert!(estimate_state(f64::NAN, 16).is_err());
    }

    #[test]
    fn estimate_state_is_nearest_by_brute_force() {
        let m = 16u32;
        let mut rng = substream(21, DOMAIN_EVE, 0);
        use rand::Rng;
        for _ in 0..2_000 {
            let theta: f64 = rng.random_range(0.0..2.0 * PI);
            let got = estimate_state(theta, m).unwrap();
            // Brute force over all 2M states with circular distance.
            let best = (0..2 * m)
                .min_by(|&a, &b| {
                    let da = angular_gap(theta, PI * a as f64 / m as f64);
                    let db = angular_gap(theta, PI * b as f64 / m as f64);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            let d_got = angular_gap(theta, PI * got as f64 / m as f64);
            let d_best = angular_gap(theta, PI * best as f64 / m as f64);
            assert!((d_got - d_best).abs() < 1e-9, "theta={theta}: {got} vs {best}");
        }
    }

    fn angular_gap(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    }

    #[test]
    fn select_cplus_examples() {
        let w = wheel(16, 400.0);
        assert_eq!(select_cplus_base(6, &w).unwrap(), 6);
        assert_eq!(select_cplus_base(22, &w).unwrap(), 6);
        assert_eq!(select_cplus_base(7, &w).unwrap(), 6);
        assert_eq!(select_cplus_base(15, &w).unwrap(), 14);
    }

    #[test]
    fn select_cplus_is_always_cplus_within_distance_one() {
        for m in (4..=64).step_by(2) {
            let w = wheel(m, 400.0);
            for estimate in 0..2 * m {
                let k = select_cplus_base(estimate, &w).unwrap();
                assert_eq!(w.classify_global(k).unwrap(), BaseClass::CPlus);
                let b = w.base_of_state(estimate).unwrap();
                let d = {
                    let d = (k + m - b) % m;
                    d.min(m - d)
                };
                assert!(d <= 1, "M={m} estimate={estimate}");
            }
        }
    }

    #[test]
    fn intercept_noiseless_traces() {
        let w = wheel(16, 400.0);
        let mut rng = substream(22, DOMAIN_EVE, 0);

        let q0 = Qumode::new(0, w).unwrap();
        let (rec, resent) = eve_intercept(&q0, &mut rng, 0.0, ResendPolicy::DecidedState).unwrap();
        assert_eq!(rec.k_eve, 0);
        assert_eq!(rec.l, 0);
        assert_eq!(resent.state_index(), 0);

        // Sent state: bit 0 in base 5 (state 21). Eve lands on base 4 and
        // reads the bit of state 20: l = 1 = 0 ⊕ predict(5, 4).
        let q = Qumode::new(w.state_index(5, 0).unwrap(), w).unwrap();
        let (rec, resent) = eve_intercept(&q, &mut rng, 0.0, ResendPolicy::DecidedState).unwrap();
        assert_eq!(rec.k_eve, 4);
        assert_eq!(rec.l, 1);
        assert_eq!(rec.l, w.predict_keystream_bit(5, 4).unwrap());
        assert_eq!(resent.state_index(), 20);
        assert_eq!(rec.j_resent, 20);
    }

    #[test]
    fn eve_records_satisfy_their_invariants() {
        let cfg = config(1024, 400.0, 20_000, 23);
        let transcript = run_session(&cfg, Some(&EveAttacker::new(cfg.noise_scale))).unwrap();
        for s in &transcript {
            let eve = s.eve.as_ref().unwrap();
            assert_eq!(cfg.wheel.classify_global(eve.k_eve).unwrap(), BaseClass::CPlus);
            assert!(eve.j_resent == eve.k_eve || eve.j_resent == eve.k_eve + cfg.wheel.m());
            assert_eq!(cfg.wheel.bit_of_state(eve.j_resent).unwrap(), eve.l);
            assert!((0.0..2.0 * PI).contains(&eve.theta_meas));
        }
    }

    #[test]
    fn base_selection_stays_near_the_estimate() {
        // k_eve within one base of the estimate; the estimate itself within
        // ceil(5·N_σ) states of the truth except with frequency < 1e-4.
        let cfg = config(1024, 400.0, 100_000, 24);
        let transcript = run_session(&cfg, Some(&EveAttacker::new(cfg.noise_scale))).unwrap();
        let n_sigma = crate::optics::n_sigma(1024, 20.0).unwrap();
        let window = (5.0 * n_sigma).ceil() as u32;
        let mut far = 0usize;
        for s in &transcript {
            let eve = s.eve.as_ref().unwrap();
            let estimate = estimate_state(eve.theta_meas, 1024).unwrap();
            let b = cfg.wheel.base_of_state(estimate).unwrap();
            let base_dist = {
                let d = (eve.k_eve + 1024 - b) % 1024;
                d.min(1024 - d)
            };
            assert!(base_dist <= 1);
            let state_dist = {
                let d = (estimate + 2048 - s.j_sent) % 2048;
                d.min(2048 - d)
            };
            if state_dist > window {
                far += 1;
            }
        }
        assert!((far as f64) < 1e-4 * transcript.len() as f64, "far estimates: {far}");
    }

    #[test]
    fn relation_holds_at_mesoscopic_amplitude() {
        let cfg = config(1024, 400.0, 100_000, 25);
        let transcript = run_session(&cfg, Some(&EveAttacker::new(cfg.noise_scale))).unwrap();
        let report = verify_keystream_relation(&transcript, &cfg.wheel).unwrap();
        assert!(report.error_rate < 1e-3, "error rate {}", report.error_rate);
    }

    #[test]
    fn relation_is_exact_with_noiseless_override() {
        let mut cfg = config(1024, 400.0, 10_000, 26);
        cfg.noise_scale = 0.0;
        let transcript = run_session(&cfg, Some(&EveAttacker::new(0.0))).unwrap();
        let report = verify_keystream_relation(&transcript, &cfg.wheel).unwrap();
        assert_eq!(report.mismatches, 0);
    }

    #[test]
    fn relation_degrades_in_the_microscopic_regime() {
        let cfg = config(1024, 0.5, 100_000, 27);
        let transcript = run_session(&cfg, Some(&EveAttacker::new(cfg.noise_scale))).unwrap();
        let report = verify_keystream_relation(&transcript, &cfg.wheel).unwrap();
        assert!(report.error_rate > 0.05, "error rate {}", report.error_rate);
        assert_eq!(report.mismatches, report.near_cut_mismatches + report.tail_mismatches);
    }

    #[test]
    fn verify_keystream_relation_rejects_bad_transcripts() {
        let cfg = config(16, 400.0, 10, 28);
        assert!(verify_keystream_relation(&[], &cfg.wheel).is_err());
        let honest = run_session(&cfg, None).unwrap();
        assert!(verify_keystream_relation(&honest, &cfg.wheel).is_err());
    }

    #[test]
    fn attack_is_undetectable_at_mesoscopic_amplitude() {
        let cfg = config(1024, 400.0, 100_000, 29);
        let honest = run_session(&cfg, None).unwrap();
        let attacked = run_session(&cfg, Some(&EveAttacker::new(cfg.noise_scale))).unwrap();
        let stats = detection_stats(&attacked, &honest).unwrap();
        assert_eq!(stats.bob_errors_with_eve, 0);
        assert_eq!(stats.bob_errors_without_eve, 0);
        assert_eq!(stats.z_statistic, 0.0);
    }

    #[test]
    fn attack_damages_microscopic_transmissions() {
        let cfg = config(1024, 1.0, 100_000, 30);
        let honest = run_session(&cfg, None).unwrap();
        let attacked = run_session(&cfg, Some(&EveAttacker::new(cfg.noise_scale))).unwrap();
        let stats = detection_stats(&attacked, &honest).unwrap();
        assert!(
            stats.bob_errors_with_eve > stats.bob_errors_without_eve,
            "{} vs {}",
            stats.bob_errors_with_eve,
            stats.bob_errors_without_eve
        );
        assert!(stats.z_statistic > 3.0);
    }

    #[test]
    fn detection_stats_rejects_mismatched_lengths() {
        let cfg = config(16, 400.0, 10, 31);
        let a = run_session(&cfg, None).unwrap();
        assert!(detection_stats(&a[..5], &a).is_err());
    }

    #[test]
    fn measured_angle_resend_policy_forwards_the_estimate() {
        let w = wheel(16, 400.0);
        let mut rng = substream(32, DOMAIN_EVE, 0);
        let q = Qumode::new(w.state_index(5, 0).unwrap(), w).unwrap();
        let (rec, resent) = eve_intercept(&q, &mut rng, 0.0, ResendPolicy::MeasuredAngle).unwrap();
        assert_eq!(rec.j_resent, 21);
        assert_eq!(resent.state_index(), 21);
    }
}
