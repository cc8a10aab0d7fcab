//! Seeded random-input fuzzing of the controller + plant pair.
//!
//! Each tick draws one raw six-bit input frame from a fixed xorshift64*
//! generator, pushes it through debounce, controller and plant, and checks
//! the safety invariants. The generator is pinned so verdicts reproduce
//! across runs, platforms and reimplementations:
//!
//! ```text
//! x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27;
//! output = x * 0x2545F4914F6CDD1D  (mod 2^64)
//! ```
//!
//! The low six bits of each output form the frame. A zero seed is replaced
//! by the constant 0x9E3779B97F4A7C15 (xorshift state must be nonzero).

use crate::controller::{map_outputs_to_pins, ControllerState, ElbowCmd, SwitchFrame};
use crate::error::Error;
use crate::plant::PlantState;
use crate::sim::{SimConfig, DEFAULT_DT};

/// xorshift64* pseudo-random generator.
#[derive(Debug, Clone)]
pub struct Xorshift64Star {
    state: u64,
}

impl Xorshift64Star {
    pub const ZERO_SEED_SUBSTITUTE: u64 = 0x9E37_79B9_7F4A_7C15;

    pub fn new(seed: u64) -> Self {
        Self {
            state: if seed == 0 {
                Self::ZERO_SEED_SUBSTITUTE
            } else {
                seed
            },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }
}

/// First safety violation found, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzViolation {
    pub tick: u64,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzReport {
    /// Ticks executed (stops at the first violation).
    pub ticks_run: u64,
    pub violation: Option<FuzzViolation>,
}

impl FuzzReport {
    pub fn pass(&self) -> bool {
        self.violation.is_none()
    }
}

/// Drives the controller + plant with `ticks` pseudo-random raw frames and
/// checks, every tick, that:
///
/// - the elbow h-bridge pins are never (1,1);
/// - an asserted stable travel limit vetoes the matching elbow command;
/// - theta and aperture stay within their hard bounds;
/// - motor currents stay non-negative and finite.
pub fn run_fuzz(config: &SimConfig, ticks: u64, seed: u64) -> Result<FuzzReport, Error> {
    config.plant.validate()?;
    config.controller.validate()?;
    let dt = config.dt_override.unwrap_or(DEFAULT_DT);
    if !crate::error::finite_pos(dt) {
        return Err(Error::InvalidTimestep(dt));
    }

    let mut rng = Xorshift64Star::new(seed);
    let mut controller = ControllerState::new(config.controller);
    let mut plant = PlantState::initial(&config.plant);
    let p = &config.plant;

    for tick in 0..ticks {
        let raw = SwitchFrame::from_bits((rng.next_u64() & 0x3F) as u8);
        let stable = controller.debounce(raw);
        let out = controller.step(stable);
        let pins = map_outputs_to_pins(out);

        let fail = |description: String| {
            Ok(FuzzReport {
                ticks_run: tick + 1,
                violation: Some(FuzzViolation { tick, description }),
            })
        };
        if pins.elbow_pin_a && pins.elbow_pin_b {
            return fail("elbow h-bridge pins driven (1,1)".into());
        }
        if stable.elbow_max_up_limit && out.elbow == ElbowCmd::Up {
            return fail("elbow commanded UP with max-up limit held".into());
        }
        if stable.elbow_max_down_limit && out.elbow == ElbowCmd::Down {
            return fail("elbow commanded DOWN with max-down limit held".into());
        }

        plant.step(p, out, dt)?;
        if !(plant.theta >= p.theta_min && plant.theta <= p.theta_max) {
            return fail(format!("theta {} outside hard stops", plant.theta));
        }
        if !(plant.aperture >= 0.0 && plant.aperture <= p.aperture_max) {
            return fail(format!("aperture {} outside [0, max]", plant.aperture));
        }
        if !(plant.grip_current >= 0.0 && plant.grip_current.is_finite())
            || !(plant.elbow_current >= 0.0 && plant.elbow_current.is_finite())
        {
            return fail("motor current negative or non-finite".into());
        }
    }
    Ok(FuzzReport {
        ticks_run: ticks,
        violation: None,
    })
}
