use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Result, TwinError};

/// Bridge measurements of the four clutches: (L_s in henry, Q, R_c in ohm).
pub const COIL_MEASUREMENTS: [(f64, f64, f64); 4] = [
    (147.522e-6, 3.511, 2.91),
    (146.728e-6, 3.536, 2.87),
    (146.663e-6, 3.592, 2.88),
    (148.769e-6, 3.470, 2.92),
];

/// Coil electrical parameters of one clutch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoilElectrical {
    pub r_coil: f64,
    pub l_series: f64,
    pub q_factor: f64,
    pub f_meas: f64,
    pub n_coils: u32,
}

impl Default for CoilElectrical {
    /// Averages of the four measured clutches.
    fn default() -> Self {
        Self {
            r_coil: 2.90,
            l_series: 147.42e-6,
            q_factor: 3.53,
            f_meas: 100e3,
            n_coils: 3,
        }
    }
}

impl CoilElectrical {
    pub fn new(r_coil: f64, l_series: f64, q_factor: f64, f_meas: f64, n_coils: u32) -> Result<Self> {
        let e = Self {
            r_coil,
            l_series,
            q_factor,
            f_meas,
            n_coils,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("r_coil", self.r_coil)?;
        check_positive("l_series", self.l_series)?;
        // Q may be +inf for an ideal coil.
        if !(self.q_factor > 0.0) {
            return Err(TwinError::invalid("q_factor", "must be positive"));
        }
        check_positive("f_meas", self.f_meas)?;
        if self.n_coils == 0 {
            return Err(TwinError::invalid("n_coils", "at least one coil required"));
        }
        Ok(())
    }

    /// L/R time constant in seconds.
    pub fn time_constant(&self) -> f64 {
        self.l_series / self.r_coil
    }

    /// Largest step accepted by [`Self::coil_current_step`].
    pub fn max_step(&self) -> f64 {
        self.time_constant() / 2.0
    }

    /// Advances the coil current by `dt` under a constant applied voltage,
    /// using the exact solution of `L di/dt = v - i R`.
    pub fn coil_current_step(&self, i: f64, v_applied: f64, dt: f64) -> Result<f64> {
        if !(dt > 0.0) || dt > self.max_step() {
            return Err(TwinError::OutOfRange {
                quantity: "coil timestep",
                value: dt,
                min: 0.0,
                max: self.max_step(),
            });
        }
        let i_ss = v_applied / self.r_coil;
        let decay = (-dt / self.time_constant()).exp();
        Ok(i_ss + (i - i_ss) * decay)
    }

    /// Series loss resistance implied by the bridge Q: `2 pi f L / Q`.
    pub fn ac_effective_resistance(&self) -> f64 {
        2.0 * PI * self.f_meas * self.l_series / self.q_factor
    }
}
