//! Discrete-time electromechanical plant: a gravity-loaded elbow joint
//! behind a non-backdrivable worm stage, a lead-driven gripper with elastic
//! object contact, ADC quantization and a latching overcurrent comparator.
//!
//! The mechanics are quasi-static: each tick the motors settle instantly to
//! the speed where their torque-speed line balances the load, so position
//! integrates at that speed and nothing carries inertia between ticks. The
//! worm stages cannot be driven backward from the output side: with a motor
//! off, its joint holds position exactly, against any load.

use crate::controller::{ControllerOutputs, ElbowCmd, GripCmd};
use crate::error::Error;
use crate::motor::{elbow_80838_5, fit_motor, gripper_1271, MotorParams};

/// Standard gravity (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Physical and electrical parameters of the plant.
///
/// `payload_mass` and the object fields are live: scenario events may change
/// them mid-run.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantParams {
    pub elbow_motor: MotorParams,
    pub grip_motor: MotorParams,
    /// Reduction of the external worm stage between elbow motor and joint.
    pub worm_ratio: f64,
    /// Torque transmission efficiency of the worm stage, 0–1.
    pub worm_efficiency: f64,
    /// Gravity torque of the bare forearm at horizontal (N·m).
    pub forearm_gravity_torque: f64,
    /// Carried payload (kg).
    pub payload_mass: f64,
    /// Lever arm of the payload about the elbow (m).
    pub payload_lever: f64,
    /// Elbow hard stops (rad); 0 = forearm horizontal.
    pub theta_min: f64,
    pub theta_max: f64,
    /// Travel-limit switch trip angles (rad), inside the hard stops.
    pub theta_up_limit: f64,
    pub theta_down_limit: f64,
    /// Fully-open jaw aperture (m).
    pub aperture_max: f64,
    /// Aperture change per radian of grip output shaft (m/rad).
    pub drive_radius: f64,
    /// Size of a grasped object (m), if one is present.
    pub object_size: Option<f64>,
    /// Contact stiffness (N/m), shared by the object and the aperture end-stops.
    pub object_stiffness: f64,
    /// ADC full-scale current (A).
    pub adc_fullscale_current: f64,
    /// ADC resolution (bits).
    pub adc_bits: u32,
    /// Comparator trip level (A).
    pub comparator_threshold: f64,
    /// Release level as a fraction below trip (0.1 = release at 90 % of trip).
    pub comparator_hysteresis: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            elbow_motor: fit_motor(&elbow_80838_5()).expect("built-in spec is valid"),
            grip_motor: fit_motor(&gripper_1271()).expect("built-in spec is valid"),
            worm_ratio: 100.0,
            worm_efficiency: 0.5,
            forearm_gravity_torque: 0.5886, // 0.4 kg forearm at 0.15 m
            payload_mass: 0.0,
            payload_lever: 0.30,
            theta_min: -0.52,
            theta_max: 2.09,
            theta_up_limit: 2.00,
            theta_down_limit: -0.50,
            aperture_max: 0.10,
            drive_radius: 0.01,
            object_size: None,
            object_stiffness: 2000.0,
            adc_fullscale_current: 0.5,
            adc_bits: 8,
            comparator_threshold: 0.085, // gripper rated current
            comparator_hysteresis: 0.10,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), Error> {
        use crate::error::{finite_nonneg, finite_pos};
        let err = |m: &str| Err(Error::InvalidParams(m.to_string()));
        for (name, motor) in [
            ("elbow_motor", &self.elbow_motor),
            ("grip_motor", &self.grip_motor),
        ] {
            if !(finite_pos(motor.no_load_speed)
                && finite_pos(motor.stall_torque)
                && finite_pos(motor.torque_per_ampere))
            {
                return Err(Error::InvalidParams(format!(
                    "{name} fields must all be > 0"
                )));
            }
        }
        if !finite_pos(self.worm_ratio) {
            return err("worm_ratio must be > 0");
        }
        if !(self.worm_efficiency > 0.0 && self.worm_efficiency <= 1.0) {
            return err("worm_efficiency must be in (0, 1]");
        }
        if !finite_nonneg(self.forearm_gravity_torque) {
            return err("forearm_gravity_torque must be >= 0");
        }
        if !finite_nonneg(self.payload_mass) {
            return err("payload_mass must be >= 0");
        }
        if !finite_nonneg(self.payload_lever) {
            return err("payload_lever must be >= 0");
        }
        if !(self.theta_min < self.theta_down_limit
            && self.theta_down_limit < self.theta_up_limit
            && self.theta_up_limit < self.theta_max
            && self.theta_min.is_finite()
            && self.theta_max.is_finite())
        {
            return err("need finite theta_min < theta_down_limit < theta_up_limit < theta_max");
        }
        if !finite_pos(self.aperture_max) {
            return err("aperture_max must be > 0");
        }
        if !finite_pos(self.drive_radius) {
            return err("drive_radius must be > 0");
        }
        if let Some(size) = self.object_size {
            if !finite_pos(size) {
                return err("object_size must be > 0 when present");
            }
        }
        if !finite_pos(self.object_stiffness) {
            return err("object_stiffness must be > 0");
        }
        if !finite_pos(self.adc_fullscale_current) {
            return err("adc_fullscale_current must be > 0");
        }
        if !(self.adc_bits >= 1 && self.adc_bits <= 16) {
            return err("adc_bits must be in 1..=16");
        }
        if !(self.comparator_threshold > 0.0
            && self.comparator_threshold <= self.adc_fullscale_current)
        {
            return err("comparator_threshold must be in (0, adc_fullscale_current]");
        }
        if !(self.comparator_hysteresis >= 0.0 && self.comparator_hysteresis < 1.0) {
            return err("comparator_hysteresis must be in [0, 1)");
        }
        Ok(())
    }
}

/// Gravity load torque about the elbow (N·m). Positive opposes upward
/// motion for theta in (-pi/2, pi/2).
pub fn gravity_torque(params: &PlantParams, theta: f64) -> f64 {
    (params.forearm_gravity_torque + params.payload_mass * GRAVITY * params.payload_lever)
        * theta.cos()
}

/// Quantizes a current reading to an ADC code in `0..2^bits`.
pub fn adc_encode(current: f64, params: &PlantParams) -> u32 {
    let full = ((1u32 << params.adc_bits) - 1) as f64;
    (current / params.adc_fullscale_current * full)
        .round()
        .clamp(0.0, full) as u32
}

/// Latching threshold detector over ADC codes. Trips at the threshold code,
/// releases only at or below the hysteresis band's lower edge, and holds
/// its previous value in between.
pub fn comparator_step(latched: bool, code: u32, params: &PlantParams) -> bool {
    let trip = adc_encode(params.comparator_threshold, params);
    let release = adc_encode(
        params.comparator_threshold * (1.0 - params.comparator_hysteresis),
        params,
    );
    if code >= trip {
        true
    } else if code <= release {
        false
    } else {
        latched
    }
}

/// Sensor levels the plant feeds back to the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlantSensors {
    pub elbow_max_up_limit: bool,
    pub elbow_max_down_limit: bool,
    pub overcurrent_comparator: bool,
}

/// Physical state of the plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    /// Elbow angle (rad), 0 = forearm horizontal.
    pub theta: f64,
    /// Elbow angular velocity achieved this tick (rad/s).
    pub omega: f64,
    /// Jaw aperture (m), always within [0, aperture_max].
    pub aperture: f64,
    pub grip_current: f64,
    pub elbow_current: f64,
    pub comparator_latched: bool,
    /// Grip shaft coordinate in aperture units. Runs past the stops while an
    /// end-stop spring is wound; `aperture` is its clamped projection.
    shaft: f64,
}

impl PlantState {
    /// Power-on state: forearm horizontal, hand fully open, everything quiet.
    pub fn initial(params: &PlantParams) -> Self {
        Self {
            theta: 0.0,
            omega: 0.0,
            aperture: params.aperture_max,
            grip_current: 0.0,
            elbow_current: 0.0,
            comparator_latched: false,
            shaft: params.aperture_max,
        }
    }

    /// Sensor levels derived from the current state.
    pub fn sensors(&self, params: &PlantParams) -> PlantSensors {
        PlantSensors {
            elbow_max_up_limit: self.theta >= params.theta_up_limit,
            elbow_max_down_limit: self.theta <= params.theta_down_limit,
            overcurrent_comparator: self.comparator_latched,
        }
    }

    /// Net contact force on the jaw, positive pushing it open: the object
    /// spring plus whichever end-stop spring is wound.
    fn grip_contact_force(&self, params: &PlantParams) -> f64 {
        let mut force = 0.0;
        if let Some(size) = params.object_size {
            if self.aperture < size {
                force += params.object_stiffness * (size - self.aperture);
            }
        }
        if self.shaft < 0.0 {
            force += params.object_stiffness * -self.shaft;
        }
        if self.shaft > params.aperture_max {
            force -= params.object_stiffness * (self.shaft - params.aperture_max);
        }
        force
    }

    /// Advances the plant one tick under the given motor commands.
    pub fn step(
        &mut self,
        params: &PlantParams,
        commands: ControllerOutputs,
        dt: f64,
    ) -> Result<PlantSensors, Error> {
        if !crate::error::finite_pos(dt) {
            return Err(Error::InvalidTimestep(dt));
        }

        match commands.elbow {
            ElbowCmd::Off => {
                // worm stage holds against any load
                self.omega = 0.0;
                self.elbow_current = 0.0;
            }
            cmd @ (ElbowCmd::Up | ElbowCmd::Down) => {
                let up = cmd == ElbowCmd::Up;
                let gravity = gravity_torque(params, self.theta);
                // gravity assisting the motion never speeds it up: the worm
                // drive governs, so the opposing load floors at zero
                let opposing = if up {
                    gravity.max(0.0)
                } else {
                    (-gravity).max(0.0)
                };
                let motor_load = opposing / (params.worm_ratio * params.worm_efficiency);
                let joint_speed =
                    params.elbow_motor.steady_state_speed(motor_load) / params.worm_ratio;
                let signed = if up { joint_speed } else { -joint_speed };
                let next = (self.theta + signed * dt).clamp(params.theta_min, params.theta_max);
                self.omega = (next - self.theta) / dt;
                self.theta = next;
                self.elbow_current = params.elbow_motor.current_draw(motor_load, true);
            }
        }

        match commands.grip {
            GripCmd::Off => {
                // worm stage holds aperture and any wound end-stop spring
                self.grip_current = 0.0;
            }
            cmd @ (GripCmd::Close | GripCmd::Open) => {
                let closing = cmd == GripCmd::Close;
                let force = self.grip_contact_force(params);
                let opposing = if closing {
                    force.max(0.0)
                } else {
                    (-force).max(0.0)
                };
                let shaft_speed = params
                    .grip_motor
                    .steady_state_speed(opposing * params.drive_radius);
                let travel = params.drive_radius * shaft_speed * dt;
                self.shaft += if closing { -travel } else { travel };
                self.aperture = self.shaft.clamp(0.0, params.aperture_max);
                // current reflects the torque now held against the contact
                let held = self.grip_contact_force(params);
                let held = if closing {
                    held.max(0.0)
                } else {
                    (-held).max(0.0)
                };
                self.grip_current = params
                    .grip_motor
                    .current_draw(held * params.drive_radius, true);
            }
        }

        let code = adc_encode(self.grip_current, params);
        self.comparator_latched = comparator_step(self.comparator_latched, code, params);
        Ok(self.sensors(params))
    }
}
