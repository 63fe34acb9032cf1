//! The 2M-state ciphering wheel.
//!
//! The wheel places 2M states on a circle at angles `π·j/M` and groups them
//! into M antipodal bases `{k, k+M}`. Each base encodes one bit; the
//! assignment rule `j = k + M·(r ⊕ (k mod 2))` gives neighbouring states
//! opposite bits everywhere except at exactly two seam pairs, which is the
//! concrete trace of the Möbius topology of the base ring. Everything here is
//! integer arithmetic on state indices; real angles appear only at the
//! measurement boundary in [`crate::optics`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Protocol geometry: number of bases `M` (even, ≥ 4) and the common field
/// amplitude `|α|` of every state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WheelConfig {
    m: u32,
    amplitude: f64,
}

/// Two-way classification of bases by bit-assignment type. `CPlus` bases
/// assign bits the same way as base 0; `CMinus` bases assign them the
/// opposite way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseClass {
    CPlus,
    CMinus,
}

impl BaseClass {
    /// Mono-bit image of the class: 0 for `CPlus`, 1 for `CMinus`.
    pub fn keystream_bit(self) -> u8 {
        match self {
            BaseClass::CPlus => 0,
            BaseClass::CMinus => 1,
        }
    }
}

impl WheelConfig {
    /// Build a wheel with `m` bases and field amplitude `|α|`.
    ///
    /// Odd `m` changes the seam structure and is rejected here rather than
    /// silently supported; `m < 4` leaves no room for a cut base.
    pub fn new(m: u32, amplitude: f64) -> Result<Self> {
        if m < 4 || m % 2 != 0 {
            return Err(Error::Config(format!("M must be even and >= 4, got {m}")));
        }
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::Config(format!("amplitude must be finite and >= 0, got {amplitude}")));
        }
        Ok(WheelConfig { m, amplitude })
    }

    /// Convenience constructor from the mean photon number `|α|²`.
    pub fn with_mean_photons(m: u32, alpha_sq: f64) -> Result<Self> {
        if !alpha_sq.is_finite() || alpha_sq < 0.0 {
            return Err(Error::Config(format!("|α|² must be finite and >= 0, got {alpha_sq}")));
        }
        Self::new(m, alpha_sq.sqrt())
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field amplitude `|α|`.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Mean photon number `|α|²`.
    pub fn mean_photons(&self) -> f64 {
        self.amplitude * self.amplitude
    }

    /// Total number of wheel states, `2M`.
    pub fn num_states(&self) -> u32 {
        2 * self.m
    }

    fn check_state(&self, j: u32) -> Result<()> {
        if j >= self.num_states() {
            return Err(Error::Domain(format!("state index {j} out of range [0, {})", self.num_states())));
        }
        Ok(())
    }

    fn check_base(&self, k: u32) -> Result<()> {
        if k >= self.m {
            return Err(Error::Domain(format!("base index {k} out of range [0, {})", self.m)));
        }
        Ok(())
    }

    fn check_bit(r: u8) -> Result<()> {
        if r > 1 {
            return Err(Error::Domain(format!("bit value {r} is not 0 or 1")));
        }
        Ok(())
    }

    /// State index carrying bit `r` in base `k`: `j = k + M·(r ⊕ (k mod 2))`.
    pub fn state_index(&self, k: u32, r: u8) -> Result<u32> {
        self.check_base(k)?;
        Self::check_bit(r)?;
        Ok(k + self.m * u32::from(r ^ (k & 1) as u8))
    }

    /// Bit assigned to state `j`; inverse of [`Self::state_index`] in the bit
    /// coordinate.
    pub fn bit_of_state(&self, j: u32) -> Result<u8> {
        self.check_state(j)?;
        if j < self.m {
            Ok((j & 1) as u8)
        } else {
            Ok(1 ^ ((j - self.m) & 1) as u8)
        }
    }

    /// Base containing state `j`, i.e. `j mod M`.
    pub fn base_of_state(&self, j: u32) -> Result<u32> {
        self.check_state(j)?;
        Ok(j % self.m)
    }

    /// All adjacent state pairs `(j, j+1 mod 2M)` carrying equal bits.
    ///
    /// Under the wheel rule with even `M` this is exactly
    /// `[(M-1, M), (2M-1, 0)]`; the scan is exhaustive rather than hard-coded
    /// so the seam count is observable for any configuration.
    pub fn seam_pairs(&self) -> Vec<(u32, u32)> {
        let n = self.num_states();
        (0..n)
            .filter_map(|j| {
                let next = (j + 1) % n;
                let a = self.bit_of_state(j).expect("in range");
                let b = self.bit_of_state(next).expect("in range");
                (a == b).then_some((j, next))
            })
            .collect()
    }

    /// Global classification of base `k` by bit-assignment type.
    pub fn classify_global(&self, k: u32) -> Result<BaseClass> {
        self.check_base(k)?;
        // Base k assigns bit (k mod 2) to its lower state; base 0 assigns 0.
        if self.bit_of_state(k)? == self.bit_of_state(0)? {
            Ok(BaseClass::CPlus)
        } else {
            Ok(BaseClass::CMinus)
        }
    }

    /// The base most distant from anchor `k`: `(k + M/2) mod M`.
    pub fn cut_base(&self, k: u32) -> Result<u32> {
        self.check_base(k)?;
        Ok((k + self.m / 2) % self.m)
    }

    /// Local classification of base `b` relative to `anchor`.
    ///
    /// The class alternates with each unit step away from the anchor along the
    /// shorter arc that does not cross the cut base, starting from
    /// `classify_global(anchor)`. Requests for the cut base itself are an
    /// error: the neighbourhood of the cut is ill-defined, which is harmless
    /// for the attack because states there are nearly orthogonal to the
    /// anchor-base states.
    pub fn classify_local(&self, b: u32, anchor: u32) -> Result<BaseClass> {
        self.check_base(b)?;
        self.check_base(anchor)?;
        let cut = self.cut_base(anchor)?;
        if b == cut {
            return Err(Error::IllDefinedCut { base: b, anchor });
        }
        let d_plus = (b + self.m - anchor) % self.m;
        let d_minus = (anchor + self.m - b) % self.m;
        let steps = d_plus.min(d_minus);
        let start = self.classify_global(anchor)?;
        if steps % 2 == 0 {
            Ok(start)
        } else {
            Ok(match start {
                BaseClass::CPlus => BaseClass::CMinus,
                BaseClass::CMinus => BaseClass::CPlus,
            })
        }
    }

    /// The deterministic bit by which a base-`k_eve` readout differs from the
    /// data bit when the sender used base `k_true`.
    ///
    /// Operationally: take the reference state `j₀ = state_index(k_true, 0)`,
    /// find the base-`k_eve` state nearest to it in angle (shorter arc, ties
    /// toward `k_eve`), and return that state's bit. Near a seam this differs
    /// from the naive base-parity shortcut by one flip, which is why the
    /// two-argument form is used everywhere a keystream bit is predicted.
    pub fn predict_keystream_bit(&self, k_true: u32, k_eve: u32) -> Result<u8> {
        self.check_base(k_true)?;
        self.check_base(k_eve)?;
        let j0 = self.state_index(k_true, 0)?;
        let winner = self.nearest_state_in_base(j0, k_eve);
        self.bit_of_state(winner)
    }

    /// Of the two base-`k` states, the one nearer in angle to state `j`
    /// (shorter arc; ties toward `k`).
    pub(crate) fn nearest_state_in_base(&self, j: u32, k: u32) -> u32 {
        let n = self.num_states();
        let ring_dist = |a: u32, b: u32| {
            let d = (a + n - b) % n;
            d.min(n - d)
        };
        let d_lo = ring_dist(j, k);
        let d_hi = ring_dist(j, k + self.m);
        if d_lo <= d_hi {
            k
        } else {
            k + self.m
        }
    }
}
