//! Soft-switching supply voltage used when the clutches engage or release.
//!
//! The transition is a decaying cosine around the target level:
//!
//! ```text
//! V_s(t) = V_target + D * exp(-m t / tau) * sin(2 pi m t / tau + pi/2)
//! ```
//!
//! with `D = V_target - V_current` in [`SwitchingMode::AsPrinted`] and
//! `D = V_current - V_target` in [`SwitchingMode::BoundaryConsistent`]. Only
//! the latter starts at `V_current`; the former jumps to
//! `2 V_target - V_current` at `t = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_range, Result, TwinError};

pub const DEFAULT_TAU: f64 = 0.050;
pub const DEFAULT_PERIODS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchingMode {
    AsPrinted,
    #[default]
    BoundaryConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchingProfile {
    pub v_current: f64,
    pub v_target: f64,
    pub tau: f64,
    pub m: u32,
    pub mode: SwitchingMode,
}

impl SwitchingProfile {
    /// `v_target` must lie in `[0, v_max]`. `v_current` may be any
    /// instantaneous level of an interrupted transition, which can overshoot
    /// the target band; it is limited to `[-v_max, 2 v_max]`.
    pub fn new(
        v_current: f64,
        v_target: f64,
        tau: f64,
        m: u32,
        mode: SwitchingMode,
        v_max: f64,
    ) -> Result<Self> {
        check_positive("tau", tau)?;
        if m == 0 {
            return Err(TwinError::invalid("m", "at least one period required"));
        }
        check_range("target voltage", v_target, 0.0, v_max)?;
        check_range("starting voltage", v_current, -v_max, 2.0 * v_max)?;
        Ok(Self {
            v_current,
            v_target,
            tau,
            m,
            mode,
        })
    }

    /// Supply voltage at time `t` into the transition, `0 <= t <= tau`.
    pub fn switching_voltage(&self, t: f64) -> Result<f64> {
        check_range("time", t, 0.0, self.tau)?;
        Ok(self.eval(t))
    }

    /// Voltage at any `t >= 0`: the transition up to `tau`, then the target.
    pub fn voltage_or_hold(&self, t: f64) -> f64 {
        if t >= self.tau {
            self.v_target
        } else {
            self.eval(t.max(0.0))
        }
    }

    fn difference(&self) -> f64 {
        match self.mode {
            SwitchingMode::AsPrinted => self.v_target - self.v_current,
            SwitchingMode::BoundaryConsistent => self.v_current - self.v_target,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        // vt + (vc - vt) need not round back to vc
        if t == 0.0 && self.mode == SwitchingMode::BoundaryConsistent {
            return self.v_current;
        }
        let phase = self.m as f64 * t / self.tau;
        let envelope = (-phase).exp();
        self.v_target + self.difference() * envelope * (2.0 * PI * phase + PI / 2.0).sin()
    }

    /// Samples `[0, tau]` every `dt`, always including both endpoints.
    pub fn sample_profile(&self, dt: f64) -> Result<Vec<(f64, f64)>> {
        if !(dt > 0.0) || dt > self.tau {
            return Err(TwinError::OutOfRange {
                quantity: "sample interval",
                value: dt,
                min: 0.0,
                max: self.tau,
            });
        }
        let intervals = (self.tau / dt - 1e-9).ceil().max(1.0) as usize;
        Ok((0..=intervals)
            .map(|k| {
                let t = if k == intervals { self.tau } else { k as f64 * dt };
                (t, self.eval(t))
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn profile(vc: f64, vt: f64, mode: SwitchingMode) -> SwitchingProfile {
        SwitchingProfile::new(vc, vt, DEFAULT_TAU, DEFAULT_PERIODS, mode, 3.0).unwrap()
    }

    #[test]
    fn boundary_consistent_starts_at_current() {
        let p = profile(0.7, 2.0, SwitchingMode::BoundaryConsistent);
        assert_eq!(p.switching_voltage(0.0).unwrap(), 0.7);
    }

    #[test]
    fn as_printed_jumps_past_target() {
        let p = profile(0.0, 2.0, SwitchingMode::AsPrinted);
        assert_eq!(p.switching_voltage(0.0).unwrap(), 4.0);
    }

    #[test]
    fn end_residual() {
        let p = profile(0.0, 2.0, SwitchingMode::BoundaryConsistent);
        let v = p.switching_voltage(p.tau).unwrap();
        let expected = 2.0 - 2.0 * (-3.0f64).exp();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 1.9004).abs() < 1e-4);
    }

    #[test]
    fn time_domain() {
        let p = profile(0.0, 2.0, SwitchingMode::BoundaryConsistent);
        assert!(p.switching_voltage(-1e-6).is_err());
        assert!(p.switching_voltage(p.tau * 1.001).is_err());
        assert_eq!(p.voltage_or_hold(1.0), 2.0);
    }

    #[test]
    fn construction_limits() {
        assert!(SwitchingProfile::new(0.0, 3.5, 0.05, 3, SwitchingMode::default(), 3.0).is_err());
        assert!(SwitchingProfile::new(0.0, 2.0, 0.0, 3, SwitchingMode::default(), 3.0).is_err());
        assert!(SwitchingProfile::new(0.0, 2.0, 0.05, 0, SwitchingMode::default(), 3.0).is_err());
        // interrupted transitions may start outside [0, v_max]
        assert!(SwitchingProfile::new(-1.2, 0.0, 0.05, 3, SwitchingMode::default(), 3.0).is_ok());
    }

    #[test]
    fn sampling_endpoints() {
        let p = profile(0.0, 2.0, SwitchingMode::BoundaryConsistent);
        let s = p.sample_profile(p.tau).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].0, 0.0);
        assert_eq!(s[1].0, p.tau);
        assert!(p.sample_profile(0.0).is_err());
        assert!(p.sample_profile(-1.0).is_err());
        // non-dividing step still ends exactly at tau
        let s = p.sample_profile(0.003).unwrap();
        assert_eq!(s.last().unwrap().0, p.tau);
        for &(t, v) in &s {
            assert_eq!(v, p.switching_voltage(t).unwrap());
        }
    }

    #[test]
    fn crosses_target_twice_per_period() {
        let p = profile(0.0, 2.0, SwitchingMode::BoundaryConsistent);
        let s = p.sample_profile(p.tau / 1000.0).unwrap();
        let crossings = s
            .windows(2)
            .filter(|w| (w[0].1 - 2.0).signum() != (w[1].1 - 2.0).signum())
            .count();
        assert_eq!(crossings, 2 * p.m as usize);
        let max_dev = s.iter().map(|x| (x.1 - 2.0).abs()).fold(0.0, f64::max);
        assert!(max_dev <= 2.0);
    }

    proptest! {
        #[test]
        fn envelope_bound(
            vc in 0.0f64..3.0, vt in 0.0f64..3.0, tau in 1e-3f64..1.0,
            m in 1u32..8, frac in 0.0f64..=1.0, printed in any::<bool>()
        ) {
            let mode = if printed { SwitchingMode::AsPrinted } else { SwitchingMode::BoundaryConsistent };
            let p = SwitchingProfile::new(vc, vt, tau, m, mode, 3.0).unwrap();
            let t = frac * tau;
            let v = p.switching_voltage(t).unwrap();
            let bound = (vt - vc).abs() * (-(m as f64) * t / tau).exp();
            prop_assert!((v - vt).abs() <= bound + 1e-12);
        }

        #[test]
        fn swapping_levels_reflects_about_mean(
            a in 0.0f64..3.0, b in 0.0f64..3.0, m in 1u32..6, printed in any::<bool>()
        ) {
            let mode = if printed { SwitchingMode::AsPrinted } else { SwitchingMode::BoundaryConsistent };
            let fwd = SwitchingProfile::new(a, b, 0.05, m, mode, 3.0).unwrap();
            let rev = SwitchingProfile::new(b, a, 0.05, m, mode, 3.0).unwrap();
            let sf = fwd.sample_profile(0.0005).unwrap();
            let sr = rev.sample_profile(0.0005).unwrap();
            for (x, y) in sf.iter().zip(&sr) {
                prop_assert!((x.1 + y.1 - (a + b)).abs() < 1e-12);
            }
        }
    }
}
