//! Quasi-static DC gearmotor model fitted from datasheet anchor points.
//!
//! A permanent-magnet DC gearmotor at fixed supply voltage has an affine
//! torque-speed line: speed falls linearly from the no-load point to stall.
//! The two catalogue anchors (no-load speed and the rated speed/torque pair)
//! determine the line; the rated current fixes the torque constant, with
//! no-load current taken as zero. The model is quasi-static: each query
//! returns the settled operating point for the given load, with no rotor
//! inertia or electrical transient.

use std::f64::consts::PI;

use crate::error::Error;

/// Converts a shaft speed in rpm to rad/s.
pub fn rpm_to_rad_s(rpm: f64) -> f64 {
    rpm * PI / 30.0
}

/// Converts a shaft speed in rad/s to rpm.
pub fn rad_s_to_rpm(rad_s: f64) -> f64 {
    rad_s * 30.0 / PI
}

/// Catalogue ratings of a DC gearmotor as printed on its datasheet.
///
/// Speeds and torques are gearbox output-shaft values; `gear_ratio` is
/// carried as metadata only and is never re-applied by the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorSpec {
    /// Nominal supply voltage (V).
    pub nominal_voltage: f64,
    /// No-load output speed (rpm).
    pub no_load_speed_rpm: f64,
    /// Rated output speed (rpm). May be zero when the rated point is stall.
    pub rated_speed_rpm: f64,
    /// Rated output torque (N·m).
    pub rated_torque: f64,
    /// Current drawn at the rated point (A).
    pub rated_current: f64,
    /// Gearbox reduction, output turns per motor turn denominator (e.g. 10 for 10:1).
    pub gear_ratio: f64,
    /// Unit mass (kg).
    pub mass: f64,
}

impl MotorSpec {
    pub fn validate(&self) -> Result<(), Error> {
        use crate::error::{finite_nonneg, finite_pos};
        let err = |m: &str| Err(Error::InvalidMotorSpec(m.to_string()));
        if !finite_pos(self.nominal_voltage) {
            return err("nominal_voltage must be > 0");
        }
        if !finite_pos(self.no_load_speed_rpm) {
            return err("no_load_speed_rpm must be > 0");
        }
        if !finite_nonneg(self.rated_speed_rpm) {
            return err("rated_speed_rpm must be >= 0");
        }
        if self.rated_speed_rpm >= self.no_load_speed_rpm {
            return err(
                "rated_speed_rpm must be below no_load_speed_rpm (degenerate torque-speed line)",
            );
        }
        if !finite_pos(self.rated_torque) {
            return err("rated_torque must be > 0");
        }
        if !finite_pos(self.rated_current) {
            return err("rated_current must be > 0");
        }
        if !finite_pos(self.gear_ratio) {
            return err("gear_ratio must be > 0");
        }
        if !finite_pos(self.mass) {
            return err("mass must be > 0");
        }
        Ok(())
    }
}

/// The 1271-series gripper gearmotor (12 V, 10:1).
pub fn gripper_1271() -> MotorSpec {
    MotorSpec {
        nominal_voltage: 12.0,
        no_load_speed_rpm: 215.0,
        rated_speed_rpm: 120.0,
        rated_torque: 0.2,
        rated_current: 0.085,
        gear_ratio: 10.0,
        mass: 0.055,
    }
}

/// The 80838.5 elbow gearmotor (24 V, 13:2). The catalogue lists the rated
/// torque as 1.1 N·cm; it is carried here verbatim as 0.011 N·m.
pub fn elbow_80838_5() -> MotorSpec {
    MotorSpec {
        nominal_voltage: 24.0,
        no_load_speed_rpm: 135.0,
        rated_speed_rpm: 80.0,
        rated_torque: 0.011,
        rated_current: 0.115,
        gear_ratio: 6.5,
        mass: 0.145,
    }
}

/// Looks up a built-in spec by its catalogue name.
pub fn builtin_spec(name: &str) -> Option<MotorSpec> {
    match name {
        "gripper-1271" => Some(gripper_1271()),
        "elbow-80838.5" => Some(elbow_80838_5()),
        _ => None,
    }
}

/// Fitted affine torque-speed / torque-current model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorParams {
    /// No-load output speed (rad/s).
    pub no_load_speed: f64,
    /// Extrapolated stall torque (N·m).
    pub stall_torque: f64,
    /// Torque constant (N·m/A); current = delivered torque / this.
    pub torque_per_ampere: f64,
}

impl MotorParams {
    /// Settled output speed (rad/s) under the given opposing torque (N·m).
    ///
    /// Clamped at zero: loads at or above stall leave the shaft stopped.
    pub fn steady_state_speed(&self, load_torque: f64) -> f64 {
        let load = load_torque.max(0.0);
        (self.no_load_speed * (1.0 - load / self.stall_torque)).max(0.0)
    }

    /// Current drawn (A) while delivering against the given load.
    ///
    /// Undriven motors draw nothing; driven current tracks delivered torque
    /// and caps at the stall current.
    pub fn current_draw(&self, load_torque: f64, driven: bool) -> f64 {
        if !driven {
            return 0.0;
        }
        load_torque.max(0.0).min(self.stall_torque) / self.torque_per_ampere
    }

    /// Stall current (A): the cap reached when the shaft is stopped.
    pub fn stall_current(&self) -> f64 {
        self.stall_torque / self.torque_per_ampere
    }
}

/// Fits the affine model through the spec's two anchor points.
///
/// The torque-speed line passes through (no-load speed, 0) and
/// (rated speed, rated torque); stall torque is its zero-speed intercept.
/// The torque constant comes from the rated point alone, no-load current
/// being taken as zero.
pub fn fit_motor(spec: &MotorSpec) -> Result<MotorParams, Error> {
    spec.validate()?;
    let stall_torque = spec.rated_torque / (1.0 - spec.rated_speed_rpm / spec.no_load_speed_rpm);
    Ok(MotorParams {
        no_load_speed: rpm_to_rad_s(spec.no_load_speed_rpm),
        stall_torque,
        torque_per_ampere: spec.rated_torque / spec.rated_current,
    })
}
