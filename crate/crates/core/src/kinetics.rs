//! Static force transmission through one finger linkage and the whole-hand
//! support force.
//!
//! The geometry is a single frozen configuration (the hand posture while
//! lifting). Only the angle differences `theta8 - theta7` and
//! `theta9 - theta10` enter the transmission, so those are stored directly.

use serde::{Deserialize, Serialize};

use crate::clutch::ForceVoltageModel;
use crate::error::{check_range, Result, TwinError};

const SINGULAR_EPS: f64 = 1e-9;

/// Linkage angles in degrees and lever lengths in millimeters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkageGeometry {
    pub theta1: f64,
    pub theta3: f64,
    pub theta5: f64,
    pub theta7: f64,
    pub theta10: f64,
    /// theta8 - theta7
    pub d87: f64,
    /// theta9 - theta10
    pub d9_10: f64,
    pub alpha: f64,
    pub beta: f64,
    pub l13: f64,
    pub l14: f64,
    pub n_fingers: u32,
}

impl Default for LinkageGeometry {
    /// Posture measured during the grip endurance test, four fingers.
    fn default() -> Self {
        Self {
            theta1: 34.0,
            theta3: 0.0,
            theta5: 34.0,
            theta7: 25.2,
            theta10: 6.9,
            d87: 50.0,
            d9_10: 43.1,
            alpha: 49.4,
            beta: 110.7,
            l13: 35.0,
            l14: 30.0,
            n_fingers: 4,
        }
    }
}

fn sin_d(deg: f64) -> f64 {
    deg.to_radians().sin()
}

fn cos_d(deg: f64) -> f64 {
    deg.to_radians().cos()
}

fn nonsingular(factor: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() || value.abs() < SINGULAR_EPS {
        return Err(TwinError::Singular { factor });
    }
    Ok(value)
}

impl LinkageGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.l13 > 0.0) || !(self.l14 > 0.0) {
            return Err(TwinError::invalid("lever length", "l13 and l14 must be positive"));
        }
        if self.n_fingers == 0 {
            return Err(TwinError::invalid("n_fingers", "at least one finger required"));
        }
        nonsingular("sin(theta1)", sin_d(self.theta1))?;
        nonsingular("cos(theta5)", cos_d(self.theta5))?;
        nonsingular("sin(theta8 - theta7)", sin_d(self.d87))?;
        nonsingular("sin(theta9 - theta10)", sin_d(self.d9_10))?;
        nonsingular("sin(alpha)", sin_d(self.alpha))?;
        Ok(())
    }

    /// Transmission factor between the fingertip load and the force in the
    /// lever member driving the V-connector.
    pub fn transmission_xi(&self) -> Result<f64> {
        let den = nonsingular("sin(theta1)", sin_d(self.theta1))?
            * nonsingular("cos(theta5)", cos_d(self.theta5))?
            * nonsingular("sin(theta8 - theta7)", sin_d(self.d87))?
            * nonsingular("sin(theta9 - theta10)", sin_d(self.d9_10))?;
        let num = cos_d(self.theta3) * cos_d(self.theta7) * cos_d(self.theta10);
        Ok(num / den)
    }

    /// Clutch force per newton of fingertip load.
    fn load_to_clutch_gain(&self) -> Result<f64> {
        let xi = self.transmission_xi()?;
        let sin_beta = nonsingular("sin(beta)", sin_d(self.beta))?;
        Ok(sin_d(self.alpha) * self.l13 / (sin_beta * self.l14) * xi)
    }

    /// Fingertip load per newton of clutch force.
    pub fn clutch_to_load_gain(&self) -> Result<f64> {
        nonsingular("sin(alpha)", sin_d(self.alpha))?;
        nonsingular("cos(theta3)", cos_d(self.theta3))?;
        nonsingular("cos(theta7)", cos_d(self.theta7))?;
        nonsingular("cos(theta10)", cos_d(self.theta10))?;
        nonsingular("sin(beta)", sin_d(self.beta))?;
        let xi = self.transmission_xi()?;
        Ok(sin_d(self.beta) * self.l14 / (sin_d(self.alpha) * self.l13) / xi)
    }

    pub fn fingertip_to_clutch(&self, f_load: f64) -> Result<f64> {
        check_range("fingertip load", f_load, 0.0, f64::MAX)?;
        Ok(self.load_to_clutch_gain()? * f_load)
    }

    pub fn clutch_to_fingertip(&self, f_mrc: f64) -> Result<f64> {
        check_range("clutch force", f_mrc, 0.0, f64::MAX)?;
        Ok(self.clutch_to_load_gain()? * f_mrc)
    }

    pub fn member_forces(&self, f_load: f64) -> Result<MemberForces> {
        check_range("fingertip load", f_load, 0.0, f64::MAX)?;
        let sin1 = nonsingular("sin(theta1)", sin_d(self.theta1))?;
        let cos5 = nonsingular("cos(theta5)", cos_d(self.theta5))?;
        let t3 = f_load / sin1;
        let t4 = t3 * cos_d(self.theta1);
        let t5 = f_load * cos_d(self.theta3) / (sin1 * cos5);
        let t1 = t5 * sin_d(self.theta5) + t3 * sin_d(self.theta3);
        Ok(MemberForces {
            t1,
            t3,
            t4,
            t5,
            f_load,
            f_mrc: self.fingertip_to_clutch(f_load)?,
            xi: self.transmission_xi()?,
        })
    }

    /// Whole-hand support force at supply voltage `v`: every finger's clutch
    /// at its peak holding force, mapped back to the fingertips.
    pub fn support_force(&self, v: f64, model: &ForceVoltageModel) -> Result<f64> {
        let f_peak = model.peak_holding_force(v)?;
        Ok(self.n_fingers as f64 * self.clutch_to_fingertip(f_peak)?)
    }
}

/// Axial member forces of one finger linkage for a given fingertip load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemberForces {
    pub t1: f64,
    pub t3: f64,
    pub t4: f64,
    pub t5: f64,
    pub f_load: f64,
    pub f_mrc: f64,
    pub xi: f64,
}

/// Support-force polynomial as printed alongside the composed model.
pub const PRINTED_SUPPORT_COEFFS: [f64; 6] = [9.503, 40.370, 424.821, -289.362, 68.341, -5.197];

/// Rounded fingertip/clutch coefficient quoted with the printed polynomial.
pub const PRINTED_TRANSMISSION: f64 = 0.285;

pub fn printed_support_force(v: f64) -> f64 {
    PRINTED_SUPPORT_COEFFS.iter().rev().fold(0.0, |acc, &c| acc * v + c)
}

/// One row of the printed-vs-composed support polynomial comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientAudit {
    pub power: usize,
    pub printed: f64,
    pub composed: f64,
    pub rel_deviation: f64,
    pub within_tolerance: bool,
}

/// Compares each printed support coefficient with
/// `n_fingers * gain * c_k` of the force model.
pub fn audit_printed_support(
    geom: &LinkageGeometry,
    model: &ForceVoltageModel,
    rel_tol: f64,
) -> Result<Vec<CoefficientAudit>> {
    let scale = geom.n_fingers as f64 * geom.clutch_to_load_gain()?;
    Ok(model
        .coeffs()
        .iter()
        .zip(PRINTED_SUPPORT_COEFFS)
        .enumerate()
        .map(|(power, (&c, printed))| {
            let composed = scale * c;
            let rel_deviation = ((printed - composed) / composed).abs();
            CoefficientAudit {
                power,
                printed,
                composed,
                rel_deviation,
                within_tolerance: rel_deviation <= rel_tol,
            }
        })
        .collect())
}
