//! Coherent-state optics on the Poincaré equator.
//!
//! A qumode is one of the 2M two-mode coherent polarization states at angle
//! `θ_j = π·j/M`. Its classical signature is a point on the Poincaré equator
//! at radius `|α|²/2` with isotropic Gaussian fluctuation of standard
//! deviation `|α|/2` on both Stokes coordinates. That noisy-point picture is
//! the entire measurement model of this crate: it is deliberately minimal and
//! is the single place a finer receiver model (e.g. full heterodyne) would be
//! swapped in.
//!
//! Exact quantum overlaps between states are available in closed form; note
//! that the polarization encoding is 4π-periodic in θ, so states adjacent on
//! the wheel across θ = 0 (for example `j = 0` and `j = 2M-1`) are *nearly
//! orthogonal* as quantum states even though their Poincaré points touch.
//! The measurement model sees only Poincaré points, which wrap smoothly.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::wheel::WheelConfig;

/// One of the 2M coherent polarization states, identified by its wheel index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qumode {
    state_index: u32,
    wheel: WheelConfig,
}

/// A point in the (S_z, S_x) plane of the Poincaré sphere, photon-number scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesPoint {
    pub s_z: f64,
    pub s_x: f64,
}

impl Qumode {
    pub fn new(state_index: u32, wheel: WheelConfig) -> Result<Self> {
        if state_index >= wheel.num_states() {
            return Err(Error::Domain(format!(
                "state index {state_index} out of range [0, {})",
                wheel.num_states()
            )));
        }
        Ok(Qumode { state_index, wheel })
    }

    pub fn state_index(&self) -> u32 {
        self.state_index
    }

    pub fn wheel(&self) -> WheelConfig {
        self.wheel
    }

    pub fn amplitude(&self) -> f64 {
        self.wheel.amplitude()
    }

    /// Equator angle `θ_j = π·j/M` of this state, in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        qumode_angle(self.state_index, self.wheel.m()).expect("index validated at construction")
    }

    /// Noise-free Poincaré point `(|α|²/2)·(cos θ, sin θ)`.
    pub fn stokes_point(&self) -> StokesPoint {
        let radius = self.wheel.mean_photons() / 2.0;
        let theta = self.angle();
        StokesPoint { s_z: radius * theta.cos(), s_x: radius * theta.sin() }
    }
}

/// Equator angle of wheel state `j`: `π·j/M`.
pub fn qumode_angle(j: u32, m: u32) -> Result<f64> {
    if j >= 2 * m {
        return Err(Error::Domain(format!("state index {j} out of range [0, {})", 2 * m)));
    }
    Ok(PI * f64::from(j) / f64::from(m))
}

/// Standard deviation `|α|/2` of the isotropic Stokes fluctuation.
pub fn fluctuation_sigma(amplitude: f64) -> Result<f64> {
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::Domain(format!("amplitude must be finite and >= 0, got {amplitude}")));
    }
    Ok(amplitude / 2.0)
}

/// Number of neighbouring states inside one fluctuation width: `M/(π|α|)`.
pub fn n_sigma(m: u32, amplitude: f64) -> Result<f64> {
    if !amplitude.is_finite() || amplitude <= 0.0 {
        return Err(Error::Domain(format!("amplitude must be finite and > 0, got {amplitude}")));
    }
    Ok(f64::from(m) / (PI * amplitude))
}

/// Squared overlap `|⟨Ψ(θ_{j1})|Ψ(θ_{j2})⟩|²` of two wheel states.
///
/// Closed form `exp(−2|α|²(1 − cos((θ₁−θ₂)/2)))`; the half-angle comes from
/// the polarization mode amplitudes `α·cos(θ/2)`, `α·sin(θ/2)`. Specializes
/// to `exp(−2|α|²(1 + sin(πΔk/2M)))` for the wrong-base state `M+j1+Δk` and
/// to `exp(−(2−√2)|α|²)` for the cut base.
pub fn overlap(j1: u32, j2: u32, m: u32, amplitude: f64) -> Result<f64> {
    Ok(log_overlap(j1, j2, m, amplitude)?.exp())
}

/// Natural log of [`overlap`]; usable where the overlap itself underflows.
pub fn log_overlap(j1: u32, j2: u32, m: u32, amplitude: f64) -> Result<f64> {
    let theta1 = qumode_angle(j1, m)?;
    let theta2 = qumode_angle(j2, m)?;
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::Domain(format!("amplitude must be finite and >= 0, got {amplitude}")));
    }
    let alpha_sq = amplitude * amplitude;
    Ok(-2.0 * alpha_sq * (1.0 - ((theta1 - theta2) / 2.0).cos()))
}

/// One noisy Stokes sample: the noise-free point plus independent Gaussian
/// deviates of std `noise_scale · |α|/2` on each axis.
pub(crate) fn sample_stokes<R: Rng + ?Sized>(q: &Qumode, rng: &mut R, noise_scale: f64) -> StokesPoint {
    let mean = q.stokes_point();
    if noise_scale == 0.0 {
        return mean;
    }
    let sigma = noise_scale * q.amplitude() / 2.0;
    let ez: f64 = StandardNormal.sample(rng);
    let ex: f64 = StandardNormal.sample(rng);
    StokesPoint { s_z: mean.s_z + sigma * ez, s_x: mean.s_x + sigma * ex }
}

/// Polar angle of a noisy Stokes sample of `q`, folded into `[0, 2π)`.
///
/// `noise_scale = 0` is the deterministic override and returns the state
/// angle exactly. A vacuum-amplitude qumode has no angle (the Poincaré point
/// and its fluctuation both collapse to the origin) and is a domain error.
pub fn measure_angle<R: Rng + ?Sized>(q: &Qumode, rng: &mut R, noise_scale: f64) -> Result<f64> {
    if !noise_scale.is_finite() || noise_scale < 0.0 {
        return Err(Error::Domain(format!("noise_scale must be finite and >= 0, got {noise_scale}")));
    }
    if q.amplitude() == 0.0 {
        return Err(Error::Domain("angle of a vacuum-amplitude qumode is undefined".into()));
    }
    if noise_scale == 0.0 {
        return Ok(q.angle());
    }
    let s = sample_stokes(q, rng, noise_scale);
    let mut theta = s.s_x.atan2(s.s_z);
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    if theta >= 2.0 * PI {
        theta = 0.0;
    }
    Ok(theta)
}

/// Binary discrimination of `q` between the two base-`k` states.
///
/// Samples one noisy Stokes point and projects it onto the base axis
/// `(cos θ_k, sin θ_k)`: positive sign decides state `k`, negative decides
/// `k+M`, ties toward `k`.
pub fn discriminate_in_base<R: Rng + ?Sized>(
    q: &Qumode,
    k: u32,
    rng: &mut R,
    noise_scale: f64,
) -> Result<u32> {
    let m = q.wheel().m();
    if k >= m {
        return Err(Error::Domain(format!("base index {k} out of range [0, {m})")));
    }
    if !noise_scale.is_finite() || noise_scale < 0.0 {
        return Err(Error::Domain(format!("noise_scale must be finite and >= 0, got {noise_scale}")));
    }
    let s = sample_stokes(q, rng, noise_scale);
    let axis = qumode_angle(k, m)?;
    let projection = s.s_z * axis.cos() + s.s_x * axis.sin();
    if projection >= 0.0 {
        Ok(k)
    } else {
        Ok(k + m)
    }
}
