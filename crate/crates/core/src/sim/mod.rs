//! Fixed-step scenario engine.
//!
//! Each step synthesizes the two pressure-sensor voltages, runs the latch at
//! the control rate, shapes the supply through switching profiles, advances
//! the coil current, and resolves the load path. The clutch is semi-active:
//! it transmits `min(capacity, demand)` and never pushes.

mod scenario;

pub use scenario::{IntentEvent, ScenarioConfig, ScenarioFile, ScenarioKind, ScheduledEvent, GRAVITY};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::clutch::ClutchConfig;
use crate::control::{pwm_duty, Command, Controller, Mode, SensorSample, Thresholds};
use crate::emg::Envelope;
use crate::error::{Result, TwinError};
use crate::kinetics::LinkageGeometry;

/// Whole-system draw quoted for four clutches plus electronics, in watts.
pub const SYSTEM_POWER_W: f64 = 5.68;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimRecord {
    pub t: f64,
    pub s1: f64,
    pub s2: f64,
    pub mode: Mode,
    pub command: Command,
    pub v_cmd: f64,
    pub duty: f64,
    pub i_coil: f64,
    pub f_clutch: f64,
    pub f_support: f64,
    pub f_required: f64,
    pub f_muscle_residual: f64,
    /// Electrical power of one clutch.
    pub p_clutch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub dt: f64,
    pub records: Vec<SimRecord>,
    /// Steps where the coil-equivalent voltage exceeded the force model's
    /// range and the holding force was taken at its upper end.
    pub saturated_steps: usize,
}

impl SimLog {
    /// Mean of `f` over records with `t0 <= t < t1`.
    pub fn mean_over(&self, t0: f64, t1: f64, f: impl Fn(&SimRecord) -> f64) -> Option<f64> {
        let vals: Vec<f64> = self.records.iter().filter(|r| r.t >= t0 && r.t < t1).map(f).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    /// First time at or after `t0` where `f` reaches `level`.
    pub fn first_reaching(&self, t0: f64, level: f64, f: impl Fn(&SimRecord) -> f64) -> Option<f64> {
        self.records.iter().find(|r| r.t >= t0 && f(r) >= level).map(|r| r.t)
    }

    /// Residual muscle force as an EMG amplitude envelope, one knot every
    /// `spacing` seconds, scaled by `gain` millivolts per newton.
    pub fn residual_envelope(&self, gain: f64, spacing: f64) -> Result<Envelope> {
        if !(gain >= 0.0) || !(spacing > 0.0) {
            return Err(TwinError::invalid("envelope export", "gain >= 0 and spacing > 0 required"));
        }
        let every = ((spacing / self.dt).round() as usize).max(1);
        let knots = self
            .records
            .iter()
            .step_by(every)
            .map(|r| (r.t, gain * r.f_muscle_residual))
            .collect();
        Envelope::new(knots)
    }

    pub fn duration(&self) -> f64 {
        self.records.last().map(|r| r.t).unwrap_or(0.0)
    }
}

/// Overhead attributed to electronics so that `n_clutches` clutches at
/// `v_on` plus overhead add up to [`SYSTEM_POWER_W`].
pub fn electronics_overhead(clutch: &ClutchConfig, v_on: f64, n_clutches: u32) -> Result<f64> {
    Ok(SYSTEM_POWER_W - n_clutches as f64 * clutch.power_consumption(v_on)?)
}

pub fn run_scenario(
    scenario: &ScenarioConfig,
    clutch: &ClutchConfig,
    geom: &LinkageGeometry,
    thr: &Thresholds,
) -> Result<SimLog> {
    scenario.validate()?;
    geom.validate()?;
    clutch.electrical.validate()?;
    let model = &clutch.force_model;
    let mut controller = Controller::new(
        *thr,
        scenario.v_on,
        scenario.tau,
        scenario.m,
        scenario.switching_mode,
        model.clone(),
    )?;
    let noise = Normal::new(0.0, scenario.sensor_noise_std)
        .map_err(|e| TwinError::invalid("sensor_noise_std", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    let n_fingers = geom.n_fingers as f64;
    let dt = scenario.dt;
    let control_every = scenario.control_every();
    let substeps = (dt / clutch.electrical.max_step()).ceil() as usize;
    let h = dt / substeps as f64;

    let mut records = Vec::with_capacity(scenario.n_steps());
    let mut i_coil = 0.0;
    let mut saturated_steps = 0;

    for k in 0..scenario.n_steps() {
        let t = (k as f64 * dt).min(scenario.duration);
        let step = |e: TwinError| e.at_step(k);

        let clean = scenario.synth_sensors(t);
        let (s1, s2) = if scenario.sensor_noise_std > 0.0 {
            (
                (clean.s1 + noise.sample(&mut rng)).clamp(0.0, scenario.v_ref),
                (clean.s2 + noise.sample(&mut rng)).clamp(0.0, scenario.v_ref),
            )
        } else {
            (clean.s1, clean.s2)
        };
        let sample = SensorSample::new(t, s1, s2, scenario.v_ref).map_err(step)?;

        let command = if k % control_every == 0 {
            controller.update(&sample).map_err(step)?
        } else {
            Command::NoChange
        };
        let v_cmd = if scenario.assisted {
            controller.supply.voltage(t)
        } else {
            0.0
        };
        controller.supply.settle(t);

        // Reverse polarity comes from the H-bridge direction; duty is the
        // magnitude.
        let duty = pwm_duty(v_cmd.abs(), scenario.v_supply).map_err(step)?;
        for _ in 0..substeps {
            i_coil = clutch.electrical.coil_current_step(i_coil, v_cmd, h).map_err(step)?;
        }

        let f_required = scenario.required_support(t).map_err(step)?;
        let f_clutch = if scenario.assisted {
            let v_coil = (i_coil * clutch.electrical.r_coil).abs();
            let v_eff = if v_coil > model.v_max() {
                saturated_steps += 1;
                model.v_max()
            } else {
                v_coil
            };
            let capacity = model.peak_holding_force(v_eff).map_err(step)?;
            let demand = geom.fingertip_to_clutch(f_required / n_fingers).map_err(step)?;
            capacity.min(demand)
        } else {
            0.0
        };
        let f_support = n_fingers * geom.clutch_to_fingertip(f_clutch).map_err(step)?;
        let f_muscle_residual = (f_required - f_support).max(0.0);
        let p_clutch = v_cmd * v_cmd / clutch.r_power;

        records.push(SimRecord {
            t,
            s1,
            s2,
            mode: controller.state.mode,
            command,
            v_cmd,
            duty,
            i_coil,
            f_clutch,
            f_support,
            f_required,
            f_muscle_residual,
            p_clutch,
        });
    }
    Ok(SimLog {
        dt,
        records,
        saturated_steps,
    })
}

/// Runs independent scenarios on separate threads; results keep input order.
pub fn run_batch(
    scenarios: &[ScenarioConfig],
    clutch: &ClutchConfig,
    geom: &LinkageGeometry,
    thr: &Thresholds,
) -> Vec<Result<SimLog>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || run_scenario(s, clutch, geom, thr)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    })
}
