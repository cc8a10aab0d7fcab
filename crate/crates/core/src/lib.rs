//! Deterministic co-simulation of a switch-controlled transhumeral
//! prosthesis: a portable controller core (debounce, jerk trigger, elbow
//! and grip state machines, h-bridge pin mapping) driving a simulated
//! electromechanical plant (datasheet-fitted DC gearmotors, gravity-loaded
//! elbow behind a non-backdrivable worm stage, elastic gripper contact,
//! ADC and overcurrent comparator), exercised through scripted scenarios
//! with assertions and CSV traces.
//!
//! ```text
//!               raw frame          stable            commands
//!  operator ──► [debounce] ──► [controller FSMs] ──► [h-bridge pins]
//!  switches          ▲                                    │
//!                    │ limit switches + comparator        ▼
//!                    └──────────── [plant] ◄── motor drive
//!                        (one tick of sensor latency)
//! ```

pub mod controller;
pub mod error;
pub mod fuzz;
pub mod motor;
pub mod plant;
pub mod scenario;
pub mod sim;

pub use controller::{
    map_outputs_to_pins, ControllerConfig, ControllerOutputs, ControllerState, ElbowCmd,
    ElbowState, GripCmd, GripState, PinLevels, SwitchFrame,
};
pub use error::Error;
pub use fuzz::{run_fuzz, FuzzReport, Xorshift64Star};
pub use motor::{builtin_spec, fit_motor, MotorParams, MotorSpec};
pub use plant::{adc_encode, comparator_step, gravity_torque, PlantParams, PlantState};
pub use scenario::{
    evaluate_assertions, parse_scenario, render_scenario, serialize_trace, AssertionReport,
    ParseError, Scenario,
};
pub use sim::{run_simulation, run_simulation_strided, SimConfig, Trace, TraceSample};
