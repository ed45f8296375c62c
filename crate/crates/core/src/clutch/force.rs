use serde::Serialize;

use crate::error::{check_positive, check_range, Result, TwinError};

/// Printed characterization polynomial, ascending powers of volts.
pub const DEFAULT_COEFFS: [f64; 6] = [8.336, 35.412, 375.650, -253.826, 59.948, -4.588];

/// Upper end of the characterized voltage range.
pub const DEFAULT_V_MAX: f64 = 3.0;

const NONNEG_SAMPLES: usize = 3000;

/// Peak holding force as a degree-5 polynomial in supply voltage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceVoltageModel {
    coeffs: [f64; 6],
    v_max: f64,
}

impl Default for ForceVoltageModel {
    fn default() -> Self {
        Self {
            coeffs: DEFAULT_COEFFS,
            v_max: DEFAULT_V_MAX,
        }
    }
}

impl ForceVoltageModel {
    /// Builds a model, rejecting any polynomial that goes negative on
    /// `[0, v_max]` (checked on a 3000-interval grid).
    pub fn new(coeffs: [f64; 6], v_max: f64) -> Result<Self> {
        check_positive("v_max", v_max)?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(TwinError::invalid("coefficients", "must be finite"));
        }
        let model = Self { coeffs, v_max };
        for k in 0..=NONNEG_SAMPLES {
            let v = v_max * k as f64 / NONNEG_SAMPLES as f64;
            let f = model.horner(v);
            if f < 0.0 {
                return Err(TwinError::invalid(
                    "force model",
                    format!("negative force {f} N at {v} V"),
                ));
            }
        }
        Ok(model)
    }

    pub fn coeffs(&self) -> &[f64; 6] {
        &self.coeffs
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Peak holding force in newtons at supply voltage `v`.
    ///
    /// Voltages outside `[0, v_max]` are an error, never clamped.
    pub fn peak_holding_force(&self, v: f64) -> Result<f64> {
        check_range("voltage", v, 0.0, self.v_max)?;
        Ok(self.horner(v))
    }

    fn horner(&self, v: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * v + c)
    }
}
