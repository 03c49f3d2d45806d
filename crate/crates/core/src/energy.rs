//! First-order radio energy model and battery accounting.

use thiserror::Error;

/// Radio constants in SI units (joules, meters, seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    /// Electronics energy per bit (J/bit), paid by both transmitter and receiver.
    pub e_elec: f64,
    /// Free-space amplifier coefficient (J/bit/m²).
    pub eps_fs: f64,
    /// Multipath amplifier coefficient (J/bit/m⁴).
    pub eps_amp: f64,
    /// Radio bit rate (bits/s).
    pub bandwidth: f64,
}

impl RadioParams {
    /// Builds radio parameters from the customary datasheet units:
    /// nJ/bit, pJ/bit/m² and pJ/bit/m⁴.
    pub fn from_datasheet_units(
        e_elec_nj: f64,
        eps_fs_pj: f64,
        eps_amp_pj: f64,
        bandwidth: f64,
    ) -> Self {
        Self {
            e_elec: e_elec_nj * 1e-9,
            eps_fs: eps_fs_pj * 1e-12,
            eps_amp: eps_amp_pj * 1e-12,
            bandwidth,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.e_elec, self.eps_fs, self.eps_amp, self.bandwidth]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }
}

impl Default for RadioParams {
    fn default() -> Self {
        Self::from_datasheet_units(50.0, 10.0, 0.0013, 250_000.0)
    }
}

/// Distance at which the free-space and multipath amplifier terms coincide.
pub fn crossover_distance(radio: &RadioParams) -> f64 {
    (radio.eps_fs / radio.eps_amp).sqrt()
}

/// Energy to transmit `bits` over `distance` meters.
///
/// Distances at or beyond the crossover use the d⁴ multipath term. Both
/// branches agree at the crossover, so the choice there does not matter.
pub fn tx_energy(bits: u32, distance: f64, radio: &RadioParams) -> f64 {
    let k = f64::from(bits);
    let d2 = distance * distance;
    let amp = if distance < crossover_distance(radio) {
        radio.eps_fs * d2
    } else {
        radio.eps_amp * d2 * d2
    };
    k * radio.e_elec + k * amp
}

/// Energy to receive `bits`.
pub fn rx_energy(bits: u32, radio: &RadioParams) -> f64 {
    f64::from(bits) * radio.e_elec
}

/// Raised when a debit exceeds the remaining charge. The battery has been
/// drained to zero; `drained` is what it actually gave up.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("battery exhausted after draining {drained} J")]
pub struct Dead {
    pub drained: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Battery {
    initial: f64,
    residual: f64,
}

impl Battery {
    pub fn new(initial: f64) -> Self {
        Self {
            initial,
            residual: initial,
        }
    }

    /// A battery that never runs out. Used for the sink.
    pub fn unlimited() -> Self {
        Self::new(f64::INFINITY)
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn consumed(&self) -> f64 {
        if self.initial.is_infinite() {
            0.0
        } else {
            self.initial - self.residual
        }
    }

    pub fn is_depleted(&self) -> bool {
        self.residual <= 0.0
    }

    /// Withdraws `amount` joules. On failure the residual is clamped to zero.
    pub fn debit(&mut self, amount: f64) -> Result<(), Dead> {
        debug_assert!(amount >= 0.0);
        if self.residual.is_infinite() {
            return Ok(());
        }
        if amount > self.residual {
            let drained = self.residual;
            self.residual = 0.0;
            return Err(Dead { drained });
        }
        self.residual -= amount;
        Ok(())
    }
}
