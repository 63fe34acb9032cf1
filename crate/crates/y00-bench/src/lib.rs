//! Shared fixtures for the benchmark suite.

use y00_core::keystream::KeystreamSpec;
use y00_core::session::SessionConfig;
use y00_core::wheel::WheelConfig;

/// Desk-scale mesoscopic configuration: M = 1024, |α|² = 400, 16-bit key.
pub fn mesoscopic_session(n_symbols: usize, seed: u64) -> SessionConfig {
    SessionConfig::new(
        WheelConfig::with_mean_photons(1024, 400.0).expect("valid wheel"),
        KeystreamSpec::lfsr16(0xACE1, 10).expect("valid keystream"),
        n_symbols,
        seed,
    )
    .expect("valid session")
}
