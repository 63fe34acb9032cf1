//! Simulation and cryptanalysis of the Y-00 coherent-state key-expansion
//! protocol.
//!
//! The crate models the 2M-state ciphering wheel and its mesoscopic
//! coherent states ([`wheel`], [`optics`]), runs full protocol sessions with
//! synchronized shift-register base streams ([`keystream`], [`session`]),
//! mounts the intercept-resend eavesdropper whose record obeys
//! `l = r ⊕ k̃` ([`eve`]), and reduces the attacked system to a classical
//! stream or block cipher that falls to exhaustive key search
//! ([`cryptanalysis`]). [`experiments`] packages the end-to-end runs used by
//! the CLI and the acceptance suite.
//!
//! All randomness is drawn from seeded per-symbol substreams, so every
//! experiment is reproducible bit for bit.

pub mod cryptanalysis;
pub mod error;
pub mod eve;
pub mod experiments;
pub mod keystream;
pub mod optics;
pub mod rng;
pub mod session;
pub mod wheel;

pub use cryptanalysis::{CipherMode, CipherScenario, RecoveryResult, Scorer};
pub use error::{Error, Result};
pub use eve::{DetectionStats, EveAttacker, EveRecord, RelationReport, ResendPolicy};
pub use experiments::{AttackReport, KeyRecoveryOutcome, SweepPoint};
pub use keystream::{GeneratorKind, KeystreamSpec, Lfsr};
pub use optics::{Qumode, StokesPoint};
pub use session::{SessionConfig, SymbolRecord};
pub use wheel::{BaseClass, WheelConfig};
