//! Scenario definitions: held-object load model and scripted sensor signals.

use serde::{Deserialize, Serialize};

use crate::control::{SensorSample, DEFAULT_V_ON, DEFAULT_V_REF, DEFAULT_V_SUPPLY};
use crate::error::{check_range, Result, TwinError};
use crate::waveform::{SwitchingMode, DEFAULT_PERIODS, DEFAULT_TAU};

pub const GRAVITY: f64 = 9.81;

/// Sensor levels (dorsum, pad) in volts.
const REST: (f64, f64) = (0.2, 0.2);
const GRIP: (f64, f64) = (0.2, 2.5);
const RELEASE: (f64, f64) = (2.5, 0.3);
const SENSOR_RAMP: f64 = 0.1;

/// Fractions of one lift repetition spent raising and lowering the load.
const LIFT_RISE: f64 = 0.2;
const LIFT_FALL: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    StaticGrip,
    Carry,
    Lift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentEvent {
    GripIntent,
    ReleaseIntent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduledEvent {
    pub t: f64,
    pub event: IntentEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Object mass in kilograms.
    pub mass: f64,
    pub duration: f64,
    pub events: Vec<ScheduledEvent>,
    /// Lift repetitions per held interval.
    pub reps: u32,
    pub dt: f64,
    pub assisted: bool,
    /// Fraction of the object's weight carried by the hand while lifting.
    pub lift_share: f64,
    pub v_on: f64,
    pub tau: f64,
    pub m: u32,
    pub switching_mode: SwitchingMode,
    pub control_rate_hz: f64,
    pub sensor_noise_std: f64,
    pub v_ref: f64,
    pub v_supply: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Default experiment for each kind: grip 0.5 s in, release 0.5 s
    /// before the end.
    pub fn preset(kind: ScenarioKind) -> Self {
        let (mass, hold, reps) = match kind {
            ScenarioKind::StaticGrip => (17.5, 60.0, 1),
            ScenarioKind::Carry => (9.0, 30.0, 1),
            ScenarioKind::Lift => (20.0, 40.0, 8),
        };
        let duration = hold + 1.0;
        Self {
            kind,
            mass,
            duration,
            events: vec![
                ScheduledEvent {
                    t: 0.5,
                    event: IntentEvent::GripIntent,
                },
                ScheduledEvent {
                    t: 0.5 + hold,
                    event: IntentEvent::ReleaseIntent,
                },
            ],
            reps,
            dt: 1e-3,
            assisted: true,
            lift_share: 0.5,
            v_on: DEFAULT_V_ON,
            tau: DEFAULT_TAU,
            m: DEFAULT_PERIODS,
            switching_mode: SwitchingMode::BoundaryConsistent,
            control_rate_hz: 100.0,
            sensor_noise_std: 0.05,
            v_ref: DEFAULT_V_REF,
            v_supply: DEFAULT_V_SUPPLY,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || self.dt > 1e-3 {
            return Err(TwinError::OutOfRange {
                quantity: "dt",
                value: self.dt,
                min: 0.0,
                max: 1e-3,
            });
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(TwinError::invalid("duration", "must be positive"));
        }
        if !(self.mass >= 0.0) || !self.mass.is_finite() {
            return Err(TwinError::invalid("mass", "must be non-negative"));
        }
        for e in &self.events {
            check_range("event time", e.t, 0.0, self.duration)?;
        }
        if self.events.windows(2).any(|w| w[1].t < w[0].t) {
            return Err(TwinError::invalid("events", "must be time-ordered"));
        }
        if self.kind == ScenarioKind::Lift && self.reps == 0 {
            return Err(TwinError::invalid("reps", "lift needs at least one repetition"));
        }
        check_range("lift_share", self.lift_share, 0.0, 1.0)?;
        if !(self.control_rate_hz > 0.0) || self.control_rate_hz * self.dt > 1.0 {
            return Err(TwinError::invalid("control_rate_hz", "control period must be at least one step"));
        }
        if !(self.sensor_noise_std >= 0.0) {
            return Err(TwinError::invalid("sensor_noise_std", "must be non-negative"));
        }
        if !(self.v_ref > 0.0) || !(self.v_supply > 0.0) {
            return Err(TwinError::invalid("rails", "v_ref and v_supply must be positive"));
        }
        Ok(())
    }

    /// Steps between control-loop samples.
    pub fn control_every(&self) -> usize {
        ((1.0 / (self.control_rate_hz * self.dt)).round() as usize).max(1)
    }

    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize + 1
    }

    /// Held intervals `[grip, release)`; an unmatched grip holds to the end.
    pub fn held_intervals(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut open = None;
        for e in &self.events {
            match (e.event, open) {
                (IntentEvent::GripIntent, None) => open = Some(e.t),
                (IntentEvent::ReleaseIntent, Some(t0)) => {
                    out.push((t0, e.t));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(t0) = open {
            out.push((t0, self.duration));
        }
        out
    }

    /// Load the hand must support at time `t`, in newtons.
    pub fn required_support(&self, t: f64) -> Result<f64> {
        check_range("time", t, 0.0, self.duration)?;
        let Some((t0, t1)) = self.held_intervals().into_iter().find(|&(a, b)| t >= a && t < b) else {
            return Ok(0.0);
        };
        let weight = self.mass * GRAVITY;
        Ok(match self.kind {
            ScenarioKind::StaticGrip | ScenarioKind::Carry => weight,
            ScenarioKind::Lift => {
                let cycle = (t1 - t0) / self.reps as f64;
                let u = ((t - t0) / cycle).fract();
                weight * self.lift_share * lift_shape(u)
            }
        })
    }

    /// Noise-free sensor voltages at time `t`.
    pub fn synth_sensors(&self, t: f64) -> SensorSample {
        let mut from = REST;
        let mut to = REST;
        let mut start = f64::NEG_INFINITY;
        for e in self.events.iter().take_while(|e| e.t <= t) {
            from = ramp(from, to, start, e.t);
            to = match e.event {
                IntentEvent::GripIntent => GRIP,
                IntentEvent::ReleaseIntent => RELEASE,
            };
            start = e.t;
        }
        let (s1, s2) = ramp(from, to, start, t);
        SensorSample { s1, s2, t }
    }
}

fn ramp(from: (f64, f64), to: (f64, f64), start: f64, t: f64) -> (f64, f64) {
    let u = ((t - start) / SENSOR_RAMP).clamp(0.0, 1.0);
    (from.0 + (to.0 - from.0) * u, from.1 + (to.1 - from.1) * u)
}

/// Trapezoidal load profile over one repetition, `u` in `[0, 1)`.
fn lift_shape(u: f64) -> f64 {
    if u < LIFT_RISE {
        u / LIFT_RISE
    } else if u <= 1.0 - LIFT_FALL {
        1.0
    } else {
        (1.0 - u) / LIFT_FALL
    }
}

/// Scenario file layout: `kind` is required, everything else falls back to
/// that kind's preset.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub kind: ScenarioKind,
    pub mass: Option<f64>,
    pub duration: Option<f64>,
    pub events: Option<Vec<ScheduledEvent>>,
    pub reps: Option<u32>,
    pub dt: Option<f64>,
    pub assisted: Option<bool>,
    pub lift_share: Option<f64>,
    pub v_on: Option<f64>,
    pub tau: Option<f64>,
    pub m: Option<u32>,
    pub switching_mode: Option<SwitchingMode>,
    pub control_rate_hz: Option<f64>,
    pub sensor_noise_std: Option<f64>,
    pub v_ref: Option<f64>,
    pub v_supply: Option<f64>,
    pub seed: Option<u64>,
}

impl ScenarioFile {
    pub fn into_config(self) -> Result<ScenarioConfig> {
        let p = ScenarioConfig::preset(self.kind);
        let cfg = ScenarioConfig {
            kind: self.kind,
            mass: self.mass.unwrap_or(p.mass),
            duration: self.duration.unwrap_or(p.duration),
            events: self.events.unwrap_or(p.events),
            reps: self.reps.unwrap_or(p.reps),
            dt: self.dt.unwrap_or(p.dt),
            assisted: self.assisted.unwrap_or(p.assisted),
            lift_share: self.lift_share.unwrap_or(p.lift_share),
            v_on: self.v_on.unwrap_or(p.v_on),
            tau: self.tau.unwrap_or(p.tau),
            m: self.m.unwrap_or(p.m),
            switching_mode: self.switching_mode.unwrap_or(p.switching_mode),
            control_rate_hz: self.control_rate_hz.unwrap_or(p.control_rate_hz),
            sensor_noise_std: self.sensor_noise_std.unwrap_or(p.sensor_noise_std),
            v_ref: self.v_ref.unwrap_or(p.v_ref),
            v_supply: self.v_supply.unwrap_or(p.v_supply),
            seed: self.seed.unwrap_or(p.seed),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| TwinError::Parse {
            line: e.line(),
            reason: e.to_string(),
        })?;
        file.into_config()
    }
}
