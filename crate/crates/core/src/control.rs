//! Grip-intent latch of the control board and the PWM duty abstraction.
//!
//! Sensor 1 sits on the finger dorsum, sensor 2 on the finger pad. A grip is
//! recognized when sensor 2 exceeds the upper threshold while sensor 1 stays
//! below the lower one; a release is the mirrored condition. The latch only
//! changes mode after the triggering condition has held for `debounce_n`
//! consecutive samples, and holds its mode in every other case.

use serde::{Deserialize, Serialize};

use crate::clutch::ForceVoltageModel;
use crate::error::{check_positive, check_range, Result, TwinError};
use crate::waveform::{SwitchingMode, SwitchingProfile};

/// Sampling-circuit rail.
pub const DEFAULT_V_REF: f64 = 3.3;
/// H-bridge supply.
pub const DEFAULT_V_SUPPLY: f64 = 5.0;
/// Recommended engaged clutch voltage.
pub const DEFAULT_V_ON: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorSample {
    pub s1: f64,
    pub s2: f64,
    pub t: f64,
}

impl SensorSample {
    pub fn new(t: f64, s1: f64, s2: f64, v_ref: f64) -> Result<Self> {
        check_range("sensor 1 voltage", s1, 0.0, v_ref)?;
        check_range("sensor 2 voltage", s2, 0.0, v_ref)?;
        if !t.is_finite() {
            return Err(TwinError::invalid("timestamp", "must be finite"));
        }
        Ok(Self { s1, s2, t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub th1: f64,
    pub th2: f64,
    pub debounce_n: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            th1: 1.0,
            th2: 2.0,
            debounce_n: 3,
        }
    }
}

impl Thresholds {
    pub fn new(th1: f64, th2: f64, debounce_n: u32) -> Result<Self> {
        let t = Self { th1, th2, debounce_n };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.th1 && self.th1 < self.th2) {
            return Err(TwinError::invalid(
                "thresholds",
                format!("need 0 < th1 < th2, got th1={} th2={}", self.th1, self.th2),
            ));
        }
        if self.debounce_n == 0 {
            return Err(TwinError::invalid("debounce_n", "must be at least 1"));
        }
        Ok(())
    }

    fn grip(&self, s: &SensorSample) -> bool {
        s.s2 > self.th2 && s.s1 < self.th1
    }

    fn release(&self, s: &SensorSample) -> bool {
        s.s2 < self.th1 && s.s1 > self.th2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Off,
    Engaged,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Off => "off",
            Mode::Engaged => "engaged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    NoChange,
    Engage,
    Disengage,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::NoChange => "none",
            Command::Engage => "engage",
            Command::Disengage => "disengage",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlState {
    pub mode: Mode,
    /// Consecutive samples for which the opposite-mode condition has held.
    pub pending: u32,
    pub v_command: f64,
    v_on: f64,
}

impl ControlState {
    pub fn new(v_on: f64) -> Self {
        Self {
            mode: Mode::Off,
            pending: 0,
            v_command: 0.0,
            v_on,
        }
    }

    pub fn v_on(&self) -> f64 {
        self.v_on
    }
}

/// One sample of the latch: pure state transition.
pub fn control_step(state: ControlState, sample: &SensorSample, thr: &Thresholds) -> (ControlState, Command) {
    let triggered = match state.mode {
        Mode::Off => thr.grip(sample),
        Mode::Engaged => thr.release(sample),
    };
    if !triggered {
        return (ControlState { pending: 0, ..state }, Command::NoChange);
    }
    let pending = state.pending + 1;
    if pending < thr.debounce_n {
        return (ControlState { pending, ..state }, Command::NoChange);
    }
    match state.mode {
        Mode::Off => (
            ControlState {
                mode: Mode::Engaged,
                pending: 0,
                v_command: state.v_on,
                ..state
            },
            Command::Engage,
        ),
        Mode::Engaged => (
            ControlState {
                mode: Mode::Off,
                pending: 0,
                v_command: 0.0,
                ..state
            },
            Command::Disengage,
        ),
    }
}

/// Transition profile for a latch command, starting from the instantaneous
/// supply voltage `v_now`.
pub fn command_to_profile(
    command: Command,
    v_now: f64,
    v_on: f64,
    tau: f64,
    m: u32,
    mode: SwitchingMode,
    model: &ForceVoltageModel,
) -> Result<Option<SwitchingProfile>> {
    check_range("engaged voltage", v_on, 0.0, model.v_max())?;
    let target = match command {
        Command::NoChange => return Ok(None),
        Command::Engage => v_on,
        Command::Disengage => 0.0,
    };
    SwitchingProfile::new(v_now, target, tau, m, mode, model.v_max()).map(Some)
}

/// Average-value PWM: fraction of each period the bridge conducts.
pub fn pwm_duty(v_cmd: f64, v_supply: f64) -> Result<f64> {
    check_positive("supply voltage", v_supply)?;
    if v_cmd > v_supply {
        return Err(TwinError::invalid(
            "commanded voltage",
            format!("{v_cmd} V is unreachable from a {v_supply} V supply"),
        ));
    }
    check_range("commanded voltage", v_cmd, 0.0, v_supply)?;
    Ok(v_cmd / v_supply)
}

/// Supply voltage assembled from successive switching profiles.
///
/// A new profile always starts from the voltage the previous one had reached,
/// so handoffs are continuous. Once a profile runs past `tau` the output
/// snaps to its target.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplyTrajectory {
    level: f64,
    active: Option<(SwitchingProfile, f64)>,
}

impl SupplyTrajectory {
    pub fn new(level: f64) -> Self {
        Self { level, active: None }
    }

    pub fn voltage(&self, t: f64) -> f64 {
        match &self.active {
            Some((p, start)) => p.voltage_or_hold(t - start),
            None => self.level,
        }
    }

    pub fn start(&mut self, profile: SwitchingProfile, t: f64) {
        self.level = profile.v_target;
        self.active = Some((profile, t));
    }

    /// Drops a finished profile; call once per step after sampling.
    pub fn settle(&mut self, t: f64) {
        if let Some((p, start)) = &self.active {
            if t - start >= p.tau {
                self.active = None;
            }
        }
    }

    pub fn in_transition(&self) -> bool {
        self.active.is_some()
    }
}

/// Latch plus supply shaping, as run by the board firmware loop.
#[derive(Debug, Clone)]
pub struct Controller {
    pub state: ControlState,
    pub thresholds: Thresholds,
    pub supply: SupplyTrajectory,
    pub tau: f64,
    pub m: u32,
    pub mode: SwitchingMode,
    model: ForceVoltageModel,
}

impl Controller {
    pub fn new(
        thresholds: Thresholds,
        v_on: f64,
        tau: f64,
        m: u32,
        mode: SwitchingMode,
        model: ForceVoltageModel,
    ) -> Result<Self> {
        thresholds.validate()?;
        check_range("engaged voltage", v_on, 0.0, model.v_max())?;
        check_positive("tau", tau)?;
        Ok(Self {
            state: ControlState::new(v_on),
            thresholds,
            supply: SupplyTrajectory::new(0.0),
            tau,
            m,
            mode,
            model,
        })
    }

    /// Feeds one sensor sample; returns the command it produced.
    pub fn update(&mut self, sample: &SensorSample) -> Result<Command> {
        let (next, command) = control_step(self.state, sample, &self.thresholds);
        self.state = next;
        let v_now = self.supply.voltage(sample.t);
        if let Some(p) = command_to_profile(
            command,
            v_now,
            self.state.v_on(),
            self.tau,
            self.m,
            self.mode,
            &self.model,
        )? {
            self.supply.start(p, sample.t);
        }
        Ok(command)
    }
}
