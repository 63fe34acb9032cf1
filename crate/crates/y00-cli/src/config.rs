//! Flag parsing, config-file merging, and parameter resolution.
//!
//! Every flag can also be given in a TOML config file (`--config path`);
//! explicit flags win over file values, which win over the built-in
//! desk-scale defaults (M = 1024, |α|² = 400, n = 10⁵, 16-bit key 0xACE1).

use clap::Args;
use serde::Deserialize;
use std::path::PathBuf;

use y00_core::cryptanalysis::CipherMode;
use y00_core::keystream::KeystreamSpec;
use y00_core::session::SessionConfig;
use y00_core::wheel::WheelConfig;

use crate::CliError;

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Number of bases M (a power of two, >= 4)
    #[arg(long = "M")]
    pub m: Option<u32>,

    /// Mean photon number |α|² of every state
    #[arg(long)]
    pub alpha2: Option<f64>,

    /// Number of symbols to run
    #[arg(long)]
    pub n: Option<usize>,

    /// Master seed for all simulated randomness
    #[arg(long)]
    pub seed: Option<u64>,

    /// Secret key K_s, hex (0xACE1) or decimal
    #[arg(long)]
    pub key: Option<String>,

    /// Shift-register width in bits (8, 12, 16, 20 or 24)
    #[arg(long)]
    pub key_width: Option<u32>,

    /// Worker threads for sessions and brute force (0 = all cores)
    #[arg(long)]
    pub workers: Option<usize>,

    /// Turn every measurement deterministic (noise scale 0)
    #[arg(long)]
    pub noiseless: bool,

    /// Excess channel noise, in units of the quantum fluctuation
    #[arg(long)]
    pub channel_noise: Option<f64>,

    /// Output file path
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// TOML config file supplying defaults for any flag
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Comma-separated |α|² grid (default: 3 points/decade over [0.1, 1000]
    /// plus the 1 + 1/√2 threshold marker)
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,

    /// Independent repetitions per grid point
    #[arg(long)]
    pub repetitions: Option<u32>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Cipher mode on the open channel: otp | block
    #[arg(long)]
    pub mode: Option<String>,

    /// Plaintext file (default: a built-in 256-byte English sample;
    /// block mode uses its first 128 bytes = 64 blocks)
    #[arg(long)]
    pub plaintext: Option<PathBuf>,

    /// Score candidates against this known plaintext prefix instead of
    /// language statistics
    #[arg(long)]
    pub crib: Option<String>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Config-file mirror of the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub m: Option<u32>,
    pub alpha2: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub key: Option<String>,
    pub key_width: Option<u32>,
    pub workers: Option<usize>,
    pub noiseless: Option<bool>,
    pub channel_noise: Option<f64>,
    pub out: Option<PathBuf>,
    pub mode: Option<String>,
    pub grid: Option<Vec<f64>>,
    pub repetitions: Option<u32>,
    pub plaintext: Option<PathBuf>,
    pub crib: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Fully resolved common parameters.
#[derive(Debug, Clone)]
pub struct Params {
    pub m: u32,
    pub alpha2: f64,
    pub n: usize,
    pub seed: u64,
    pub key: u64,
    pub key_width: u32,
    pub workers: usize,
    pub noiseless: bool,
    pub channel_noise: f64,
    pub out: Option<PathBuf>,
}

pub fn parse_key(text: &str) -> Result<u64, CliError> {
    let trimmed = text.trim();
    let parsed = if let Some(hex) = trimmed.strip_prefix("0x").or_else(|| trimmed.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        trimmed.parse()
    };
    parsed.map_err(|_| CliError::Usage(format!("cannot parse key {trimmed:?} (use hex 0xACE1 or decimal)")))
}

/// Merge flags over file values over defaults.
pub fn resolve(common: &CommonArgs) -> Result<(Params, FileConfig), CliError> {
    let file = FileConfig::load(common.config.as_ref())?;
    let key_text = common.key.clone().or_else(|| file.key.clone());
    let key = match key_text {
        Some(text) => parse_key(&text)?,
        None => 0xACE1,
    };
    let params = Params {
        m: common.m.or(file.m).unwrap_or(1024),
        alpha2: common.alpha2.or(file.alpha2).unwrap_or(400.0),
        n: common.n.or(file.n).unwrap_or(100_000),
        seed: common.seed.or(file.seed).unwrap_or(1),
        key,
        key_width: common.key_width.or(file.key_width).unwrap_or(16),
        workers: common.workers.or(file.workers).unwrap_or(0),
        noiseless: common.noiseless || file.noiseless.unwrap_or(false),
        channel_noise: common.channel_noise.or(file.channel_noise).unwrap_or(0.0),
        out: common.out.clone().or_else(|| file.out.clone()),
    };
    Ok((params, file))
}

impl Params {
    /// Bits per symbol implied by M; errors unless M is a power of two >= 4.
    pub fn bits_per_symbol(&self) -> Result<u32, CliError> {
        if self.m < 4 || !self.m.is_power_of_two() {
            return Err(CliError::Usage(format!("M must be a power of two >= 4, got {}", self.m)));
        }
        Ok(self.m.trailing_zeros())
    }

    pub fn keystream_spec(&self) -> Result<KeystreamSpec, CliError> {
        let taps = KeystreamSpec::default_taps(self.key_width).ok_or_else(|| {
            CliError::Usage(format!(
                "no default taps for a {}-bit register (supported: 8, 12, 16, 20, 24)",
                self.key_width
            ))
        })?;
        Ok(KeystreamSpec::new(self.key, self.key_width, taps, self.bits_per_symbol()?)?)
    }

    pub fn wheel(&self) -> Result<WheelConfig, CliError> {
        Ok(WheelConfig::with_mean_photons(self.m, self.alpha2)?)
    }

    pub fn session_config(&self, n_symbols: usize) -> Result<SessionConfig, CliError> {
        let mut cfg = SessionConfig::new(self.wheel()?, self.keystream_spec()?, n_symbols, self.seed)?;
        cfg.noise_scale = if self.noiseless { 0.0 } else { 1.0 };
        cfg.channel_noise_scale = self.channel_noise;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_mode(text: Option<&str>) -> Result<CipherMode, CliError> {
    match text.unwrap_or("otp") {
        "otp" | "one_time_pad" => Ok(CipherMode::OneTimePad),
        "block" => Ok(CipherMode::Block),
        other => Err(CliError::Usage(format!("unknown mode {other:?} (expected otp or block)"))),
    }
}
