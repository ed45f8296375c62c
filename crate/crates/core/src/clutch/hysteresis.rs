//! Rate-independent Dahl model of the clutch force-displacement loop.
//!
//! Along a monotone travel segment of sign `s` the Dahl law
//! `dF/dx = sigma (1 - s F / F_peak)` has the closed form
//! `F = s F_peak + (F0 - s F_peak) exp(-sigma |dx| / F_peak)`, which is what
//! [`hysteresis_step`] applies. The force therefore never crosses
//! `+-F_peak(v)`.

use serde::Serialize;

use super::ClutchConfig;
use crate::error::{check_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HysteresisState {
    pub force: f64,
    pub sigma: f64,
    pub displacement: f64,
}

impl HysteresisState {
    pub fn new(sigma: f64) -> Result<Self> {
        check_positive("sigma", sigma)?;
        Ok(Self {
            force: 0.0,
            sigma,
            displacement: 0.0,
        })
    }

    pub fn from_config(config: &ClutchConfig) -> Self {
        Self {
            force: 0.0,
            sigma: config.sigma_default,
            displacement: 0.0,
        }
    }
}

/// Moves the shaft by `dx` at supply voltage `v` and returns the new state
/// together with the transmitted force.
///
/// If `v` dropped since the last step, a force above the new capacity slips
/// down to `+-F_peak(v)` before the travel is applied.
pub fn hysteresis_step(
    state: HysteresisState,
    dx: f64,
    v: f64,
    config: &ClutchConfig,
) -> Result<(HysteresisState, f64)> {
    let f_peak = config.peak_holding_force(v)?;
    let mut force = state.force.clamp(-f_peak, f_peak);
    if dx != 0.0 {
        let s = dx.signum();
        let target = s * f_peak;
        force = target + (force - target) * (-state.sigma * dx.abs() / f_peak).exp();
    }
    let next = HysteresisState {
        force,
        sigma: state.sigma,
        displacement: state.displacement + dx,
    };
    Ok((next, force))
}

/// Summary of one steady cycle of a triangular displacement sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopMetrics {
    pub max_force: f64,
    pub min_force: f64,
    /// Closed-path integral of F dx, in joules.
    pub area: f64,
}

impl LoopMetrics {
    pub fn height(&self) -> f64 {
        self.max_force - self.min_force
    }
}

/// Drives a triangular sweep between `-amplitude` and `+amplitude` at
/// constant speed and reports the last of `cycles` loops. Returns the force
/// trace of that last loop as `(x, F)` pairs.
pub fn cyclic_loop(
    config: &ClutchConfig,
    v: f64,
    amplitude: f64,
    speed: f64,
    dt: f64,
    cycles: usize,
) -> Result<(LoopMetrics, Vec<(f64, f64)>)> {
    check_positive("amplitude", amplitude)?;
    check_positive("speed", speed)?;
    check_positive("dt", dt)?;
    let dx = speed * dt;
    let leg_steps = (2.0 * amplitude / dx).round().max(1.0) as usize;
    let dx = 2.0 * amplitude / leg_steps as f64;

    let mut state = HysteresisState::from_config(config);
    // first ramp from 0 to +amplitude
    for _ in 0..leg_steps / 2 {
        state = hysteresis_step(state, dx, v, config)?.0;
    }
    let mut trace = Vec::new();
    for cycle in 0..cycles.max(1) {
        let last = cycle + 1 == cycles.max(1);
        if last {
            trace.push((state.displacement, state.force));
        }
        for dir in [-1.0, 1.0] {
            for _ in 0..leg_steps {
                state = hysteresis_step(state, dir * dx, v, config)?.0;
                if last {
                    trace.push((state.displacement, state.force));
                }
            }
        }
    }
    let max_force = trace.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min_force = trace.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let area = trace
        .windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum::<f64>();
    Ok((
        LoopMetrics {
            max_force,
            min_force,
            area,
        },
        trace,
    ))
}
