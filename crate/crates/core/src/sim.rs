//! Fixed-timestep co-simulation loop wiring the controller to the plant.
//!
//! Per tick: apply due scenario events, assemble the raw input frame from
//! the operator switch levels plus the plant sensor outputs of the previous
//! tick (one tick of sensor latency, which also breaks the algebraic loop
//! between controller and plant), debounce, step the controller, step the
//! plant, record a sample. Runs are strictly sequential and byte-for-byte
//! deterministic.

use crate::controller::{
    ControllerConfig, ControllerOutputs, ControllerState, ElbowCmd, ElbowState, GripCmd, GripState,
    SwitchFrame,
};
use crate::error::Error;
use crate::plant::{adc_encode, PlantParams, PlantState};
use crate::scenario::{EventKind, Scenario, SwitchId};

/// Tick length used when neither the scenario nor the config sets one (s).
pub const DEFAULT_DT: f64 = 1e-3;

/// Plant parameters plus controller tunables: everything a run needs
/// besides the scenario itself.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimConfig {
    pub plant: PlantParams,
    pub controller: ControllerConfig,
    /// Tick length to use when the scenario does not set one.
    pub dt_override: Option<f64>,
}

/// Every key accepted by [`SimConfig::apply_override`], and therefore by
/// `param` scenario lines and config files.
pub const OVERRIDE_KEYS: &[&str] = &[
    "worm_ratio",
    "worm_efficiency",
    "forearm_gravity_torque",
    "payload_mass",
    "payload_lever",
    "theta_min",
    "theta_max",
    "theta_up_limit",
    "theta_down_limit",
    "aperture_max",
    "drive_radius",
    "object_size",
    "object_stiffness",
    "adc_fullscale_current",
    "adc_bits",
    "comparator_threshold",
    "comparator_hysteresis",
    "elbow_motor.no_load_speed",
    "elbow_motor.stall_torque",
    "elbow_motor.torque_per_ampere",
    "grip_motor.no_load_speed",
    "grip_motor.stall_torque",
    "grip_motor.torque_per_ampere",
    "n_debounce",
    "t_open_max",
    "dt",
];

impl SimConfig {
    /// Sets one named parameter. Unknown keys and out-of-domain values are
    /// rejected; relational invariants are checked later by `validate`.
    pub fn apply_override(&mut self, key: &str, value: f64) -> Result<(), Error> {
        let invalid = |reason: &str| {
            Err(Error::InvalidValue {
                key: key.to_string(),
                reason: reason.to_string(),
            })
        };
        if !value.is_finite() {
            return invalid("value must be finite");
        }
        let as_u32 = |what: &mut u32| -> Result<(), Error> {
            if value.fract() != 0.0 || value < 1.0 || value > f64::from(u32::MAX) {
                return Err(Error::InvalidValue {
                    key: key.to_string(),
                    reason: "must be a positive integer".to_string(),
                });
            }
            *what = value as u32;
            Ok(())
        };
        let p = &mut self.plant;
        match key {
            "worm_ratio" => p.worm_ratio = value,
            "worm_efficiency" => p.worm_efficiency = value,
            "forearm_gravity_torque" => p.forearm_gravity_torque = value,
            "payload_mass" => p.payload_mass = value,
            "payload_lever" => p.payload_lever = value,
            "theta_min" => p.theta_min = value,
            "theta_max" => p.theta_max = value,
            "theta_up_limit" => p.theta_up_limit = value,
            "theta_down_limit" => p.theta_down_limit = value,
            "aperture_max" => p.aperture_max = value,
            "drive_radius" => p.drive_radius = value,
            "object_size" => p.object_size = Some(value),
            "object_stiffness" => p.object_stiffness = value,
            "adc_fullscale_current" => p.adc_fullscale_current = value,
            "adc_bits" => return as_u32(&mut p.adc_bits),
            "comparator_threshold" => p.comparator_threshold = value,
            "comparator_hysteresis" => p.comparator_hysteresis = value,
            "elbow_motor.no_load_speed" => p.elbow_motor.no_load_speed = value,
            "elbow_motor.stall_torque" => p.elbow_motor.stall_torque = value,
            "elbow_motor.torque_per_ampere" => p.elbow_motor.torque_per_ampere = value,
            "grip_motor.no_load_speed" => p.grip_motor.no_load_speed = value,
            "grip_motor.stall_torque" => p.grip_motor.stall_torque = value,
            "grip_motor.torque_per_ampere" => p.grip_motor.torque_per_ampere = value,
            "n_debounce" => return as_u32(&mut self.controller.n_debounce),
            "t_open_max" => return as_u32(&mut self.controller.t_open_max),
            "dt" => {
                if value <= 0.0 {
                    return invalid("dt must be positive");
                }
                self.dt_override = Some(value);
            }
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}

/// Everything recorded about one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    /// Tick start time (s).
    pub time: f64,
    /// Inputs as sampled, before debouncing.
    pub raw: SwitchFrame,
    /// Inputs after debouncing.
    pub stable: SwitchFrame,
    pub elbow_state: ElbowState,
    pub grip_state: GripState,
    pub elbow_cmd: ElbowCmd,
    pub grip_cmd: GripCmd,
    pub theta: f64,
    pub omega: f64,
    pub aperture: f64,
    pub grip_current: f64,
    pub adc_code: u32,
    pub comparator: bool,
}

/// A complete simulation record.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Tick length the run used (s).
    pub dt: f64,
    /// Every `stride`-th tick was recorded.
    pub stride: u64,
    pub samples: Vec<TraceSample>,
}

#[derive(Debug, Clone, Copy, Default)]
struct OperatorSwitches {
    elbow_up: bool,
    elbow_down: bool,
    grip: bool,
}

impl OperatorSwitches {
    fn set(&mut self, id: SwitchId, level: bool) {
        match id {
            SwitchId::ElbowUp => self.elbow_up = level,
            SwitchId::ElbowDown => self.elbow_down = level,
            SwitchId::Grip => self.grip = level,
        }
    }
}

/// Runs a scenario to completion, recording every tick.
pub fn run_simulation(scenario: &Scenario, config: &SimConfig) -> Result<Trace, Error> {
    run_simulation_strided(scenario, config, 1)
}

/// Runs a scenario recording every `stride`-th tick (for long runs).
pub fn run_simulation_strided(
    scenario: &Scenario,
    config: &SimConfig,
    stride: u64,
) -> Result<Trace, Error> {
    if stride == 0 {
        return Err(Error::InvalidParams("stride must be >= 1".into()));
    }
    let mut cfg = config.clone();
    for p in &scenario.params {
        cfg.apply_override(&p.key, p.value)?;
    }
    let dt = scenario.dt.or(cfg.dt_override).unwrap_or(DEFAULT_DT);
    if !crate::error::finite_pos(dt) {
        return Err(Error::InvalidTimestep(dt));
    }
    if !crate::error::finite_pos(scenario.duration) {
        return Err(Error::InvalidParams("duration must be positive".into()));
    }
    cfg.plant.validate()?;
    cfg.controller.validate()?;

    let mut plant = PlantState::initial(&cfg.plant);
    let mut controller = ControllerState::new(cfg.controller);
    let mut operator = OperatorSwitches::default();
    // sensor levels the controller sees at tick t come from tick t-1;
    // before the first tick they reflect the initial plant state
    let mut sensors = plant.sensors(&cfg.plant);

    let mut samples = Vec::new();
    let mut next_event = 0;
    let mut tick: u64 = 0;
    loop {
        let time = tick as f64 * dt;
        if time >= scenario.duration {
            break;
        }
        while next_event < scenario.events.len() && scenario.events[next_event].time <= time {
            match scenario.events[next_event].kind {
                EventKind::Press(sw) => operator.set(sw, true),
                EventKind::Release(sw) => operator.set(sw, false),
                EventKind::SetPayload(kg) => cfg.plant.payload_mass = kg,
                EventKind::PlaceObject { size, stiffness } => {
                    cfg.plant.object_size = Some(size);
                    cfg.plant.object_stiffness = stiffness;
                }
            }
            next_event += 1;
        }
        let raw = SwitchFrame {
            elbow_up_cmd: operator.elbow_up,
            elbow_down_cmd: operator.elbow_down,
            grip_cmd: operator.grip,
            elbow_max_up_limit: sensors.elbow_max_up_limit,
            elbow_max_down_limit: sensors.elbow_max_down_limit,
            overcurrent_comparator: sensors.overcurrent_comparator,
        };
        let stable = controller.debounce(raw);
        let outputs: ControllerOutputs = controller.step(stable);
        sensors = plant.step(&cfg.plant, outputs, dt)?;
        if tick.is_multiple_of(stride) {
            samples.push(TraceSample {
                time,
                raw,
                stable,
                elbow_state: controller.elbow,
                grip_state: controller.grip,
                elbow_cmd: outputs.elbow,
                grip_cmd: outputs.grip,
                theta: plant.theta,
                omega: plant.omega,
                aperture: plant.aperture,
                grip_current: plant.grip_current,
                adc_code: adc_encode(plant.grip_current, &cfg.plant),
                comparator: plant.comparator_latched,
            });
        }
        tick += 1;
    }
    Ok(Trace {
        dt,
        stride,
        samples,
    })
}
