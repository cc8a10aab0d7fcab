//! Tick-driven controller: input debouncing, jerk (press-edge) detection,
//! the elbow and grip state machines, and the pin-level output mapping.
//!
//! The elbow machine is level-driven with travel-limit override; the grip
//! machine is an edge-driven toggle closed by the overcurrent comparator:
//!
//! ```text
//!             trigger                 trigger
//!   OPEN ────────────────► CLOSING ◄──────────── OPENING
//!    ▲                        │  ▲               │  ▲
//!    │   comparator / timer   │  │    trigger    │  │
//!    └────────────────────────┼──┘◄──────────────┘  │ trigger
//!                  comparator ▼                     │
//!                          HOLDING ─────────────────┘
//! ```
//!
//! When a trigger edge and a comparator trip land on the same tick, the
//! trigger rule runs first and the comparator rule is then applied to the
//! resulting state. The core performs no allocation or I/O per tick, so a
//! single instance ports directly to firmware; independent instances are
//! freely re-entrant.

/// Default debounce window (ticks).
pub const DEFAULT_N_DEBOUNCE: u32 = 5;
/// Default grip-opening timeout (ticks); 3 s at the default 1 ms tick.
pub const DEFAULT_T_OPEN_MAX: u32 = 3000;

/// The six logical inputs of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SwitchFrame {
    pub elbow_up_cmd: bool,
    pub elbow_down_cmd: bool,
    pub grip_cmd: bool,
    pub elbow_max_up_limit: bool,
    pub elbow_max_down_limit: bool,
    pub overcurrent_comparator: bool,
}

impl SwitchFrame {
    pub const INPUT_COUNT: usize = 6;

    /// Unpacks the low six bits, in field declaration order (bit 0 = elbow up).
    pub fn from_bits(bits: u8) -> Self {
        Self {
            elbow_up_cmd: bits & 0x01 != 0,
            elbow_down_cmd: bits & 0x02 != 0,
            grip_cmd: bits & 0x04 != 0,
            elbow_max_up_limit: bits & 0x08 != 0,
            elbow_max_down_limit: bits & 0x10 != 0,
            overcurrent_comparator: bits & 0x20 != 0,
        }
    }

    pub fn to_bits(self) -> u8 {
        (self.elbow_up_cmd as u8)
            | (self.elbow_down_cmd as u8) << 1
            | (self.grip_cmd as u8) << 2
            | (self.elbow_max_up_limit as u8) << 3
            | (self.elbow_max_down_limit as u8) << 4
            | (self.overcurrent_comparator as u8) << 5
    }
}

/// One debounce channel: last stable level plus the run length of raw
/// samples disagreeing with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Channel {
    stable: bool,
    run: u32,
}

/// Six-channel debouncer. A stable level flips only after `n_debounce`
/// consecutive raw samples at the opposite level; anything shorter holds
/// the previous stable value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Debouncer {
    n_debounce: u32,
    channels: [Channel; SwitchFrame::INPUT_COUNT],
}

impl Debouncer {
    /// Stable levels seed all-false.
    pub fn new(n_debounce: u32) -> Self {
        Self {
            n_debounce: n_debounce.max(1),
            channels: [Channel {
                stable: false,
                run: 0,
            }; SwitchFrame::INPUT_COUNT],
        }
    }

    pub fn step(&mut self, raw: SwitchFrame) -> SwitchFrame {
        let bits = raw.to_bits();
        for (i, ch) in self.channels.iter_mut().enumerate() {
            let level = bits & (1 << i) != 0;
            if level == ch.stable {
                ch.run = 0;
            } else {
                ch.run += 1;
                if ch.run >= self.n_debounce {
                    ch.stable = level;
                    ch.run = 0;
                }
            }
        }
        self.stable()
    }

    pub fn stable(&self) -> SwitchFrame {
        let mut bits = 0u8;
        for (i, ch) in self.channels.iter().enumerate() {
            bits |= (ch.stable as u8) << i;
        }
        SwitchFrame::from_bits(bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ElbowState {
    #[default]
    Idle,
    MovingUp,
    MovingDown,
}

impl ElbowState {
    pub fn token(self) -> &'static str {
        match self {
            ElbowState::Idle => "IDLE",
            ElbowState::MovingUp => "MOVING_UP",
            ElbowState::MovingDown => "MOVING_DOWN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GripState {
    #[default]
    Open,
    Closing,
    Holding,
    Opening,
}

impl GripState {
    pub fn token(self) -> &'static str {
        match self {
            GripState::Open => "OPEN",
            GripState::Closing => "CLOSING",
            GripState::Holding => "HOLDING",
            GripState::Opening => "OPENING",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElbowCmd {
    #[default]
    Off,
    Up,
    Down,
}

impl ElbowCmd {
    pub fn token(self) -> &'static str {
        match self {
            ElbowCmd::Off => "OFF",
            ElbowCmd::Up => "UP",
            ElbowCmd::Down => "DOWN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GripCmd {
    #[default]
    Off,
    Close,
    Open,
}

impl GripCmd {
    pub fn token(self) -> &'static str {
        match self {
            GripCmd::Off => "OFF",
            GripCmd::Close => "CLOSE",
            GripCmd::Open => "OPEN",
        }
    }
}

/// Semantic motor commands for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ControllerOutputs {
    pub elbow: ElbowCmd,
    pub grip: GripCmd,
}

/// Physical drive-pin levels behind the semantic commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PinLevels {
    pub elbow_pin_a: bool,
    pub elbow_pin_b: bool,
    pub grip_drive_pin: bool,
    pub grip_dir_flag: bool,
}

/// Maps semantic commands to h-bridge pin levels.
///
/// The elbow pair (1,1) is a shoot-through condition and is unrepresentable
/// here by construction: each command picks at most one high side.
pub fn map_outputs_to_pins(out: ControllerOutputs) -> PinLevels {
    let (a, b) = match out.elbow {
        ElbowCmd::Off => (false, false),
        ElbowCmd::Up => (true, false),
        ElbowCmd::Down => (false, true),
    };
    let (drive, dir) = match out.grip {
        GripCmd::Off => (false, false),
        GripCmd::Close => (true, false),
        GripCmd::Open => (true, true),
    };
    PinLevels {
        elbow_pin_a: a,
        elbow_pin_b: b,
        grip_drive_pin: drive,
        grip_dir_flag: dir,
    }
}

/// Controller tunables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControllerConfig {
    /// Consecutive identical samples required before a stable level changes.
    pub n_debounce: u32,
    /// Ticks the grip may spend opening before giving up (end-stop fallback).
    pub t_open_max: u32,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            n_debounce: DEFAULT_N_DEBOUNCE,
            t_open_max: DEFAULT_T_OPEN_MAX,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), crate::error::Error> {
        if self.n_debounce < 1 {
            return Err(crate::error::Error::InvalidParams(
                "n_debounce must be >= 1".into(),
            ));
        }
        if self.t_open_max < 1 {
            return Err(crate::error::Error::InvalidParams(
                "t_open_max must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Full controller memory: both state machines, the opening timer, the
/// debouncer bank and the grip edge detector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerState {
    pub elbow: ElbowState,
    pub grip: GripState,
    /// Ticks remaining in OPENING; zero in every other state.
    pub opening_timer: u32,
    pub debouncer: Debouncer,
    /// Previous debounced grip-command level, for rising-edge detection.
    pub grip_edge_memory: bool,
    t_open_max: u32,
}

impl ControllerState {
    /// Power-on state: elbow idle, grip fully open, debouncers seeded all-false.
    pub fn new(config: ControllerConfig) -> Self {
        Self {
            elbow: ElbowState::Idle,
            grip: GripState::Open,
            opening_timer: 0,
            debouncer: Debouncer::new(config.n_debounce),
            grip_edge_memory: false,
            t_open_max: config.t_open_max,
        }
    }

    /// Conditions one raw sample into stable levels.
    pub fn debounce(&mut self, raw: SwitchFrame) -> SwitchFrame {
        self.debouncer.step(raw)
    }

    /// Rising-edge detector over the debounced grip command (the "jerk").
    pub fn grip_trigger(&mut self, stable_grip_cmd: bool) -> bool {
        let triggered = stable_grip_cmd && !self.grip_edge_memory;
        self.grip_edge_memory = stable_grip_cmd;
        triggered
    }

    /// Advances both state machines one tick from a debounced frame.
    ///
    /// Total over all inputs: every frame maps to a safe output. The elbow
    /// is level-driven, with the relevant travel limit overriding its
    /// command; conflicting up+down stops the joint. The grip toggles on
    /// trigger edges, then the comparator/timer rule runs on the resulting
    /// state (same-tick ordering: trigger first).
    pub fn step(&mut self, stable: SwitchFrame) -> ControllerOutputs {
        self.elbow = if stable.elbow_up_cmd && !stable.elbow_down_cmd && !stable.elbow_max_up_limit
        {
            ElbowState::MovingUp
        } else if stable.elbow_down_cmd && !stable.elbow_up_cmd && !stable.elbow_max_down_limit {
            ElbowState::MovingDown
        } else {
            ElbowState::Idle
        };

        if self.grip_trigger(stable.grip_cmd) {
            self.grip = match self.grip {
                GripState::Open => GripState::Closing,
                GripState::Closing | GripState::Holding => {
                    self.opening_timer = self.t_open_max;
                    GripState::Opening
                }
                GripState::Opening => GripState::Closing,
            };
            if self.grip != GripState::Opening {
                self.opening_timer = 0;
            }
        }
        match self.grip {
            GripState::Closing if stable.overcurrent_comparator => {
                self.grip = GripState::Holding;
            }
            GripState::Opening => {
                if stable.overcurrent_comparator || self.opening_timer == 0 {
                    self.grip = GripState::Open;
                    self.opening_timer = 0;
                } else {
                    self.opening_timer -= 1;
                }
            }
            _ => {}
        }

        ControllerOutputs {
            elbow: match self.elbow {
                ElbowState::Idle => ElbowCmd::Off,
                ElbowState::MovingUp => ElbowCmd::Up,
                ElbowState::MovingDown => ElbowCmd::Down,
            },
            grip: match self.grip {
                GripState::Closing => GripCmd::Close,
                GripState::Opening => GripCmd::Open,
                GripState::Open | GripState::Holding => GripCmd::Off,
            },
        }
    }
}
