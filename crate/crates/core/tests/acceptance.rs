//! Acceptance suite. One test per criterion; each prints a PASS line with
//! the measured values (visible with `--nocapture`). Expected values are
//! checked against independent oracles coded in this file from the raw
//! datasheet numbers, not against the library's own arithmetic.

use std::f64::consts::PI;
use std::time::Instant;

use limbsim_core::controller::{
    map_outputs_to_pins, ControllerConfig, ControllerState, ElbowCmd, ElbowState, GripState,
    SwitchFrame,
};
use limbsim_core::fuzz::run_fuzz;
use limbsim_core::motor::{elbow_80838_5, fit_motor, gripper_1271, rad_s_to_rpm, rpm_to_rad_s};
use limbsim_core::scenario::{parse_scenario, render_scenario, serialize_trace};
use limbsim_core::sim::{run_simulation, SimConfig, Trace};

// ---------------------------------------------------------------------------
// pinned tolerances
// ---------------------------------------------------------------------------

/// Relative tolerance for the datasheet anchor round-trip.
const ANCHOR_REL_TOL: f64 = 1e-9;
/// Absolute tolerance on the published stall figures.
const STALL_ABS_TOL: f64 = 1e-4;
/// Allowed distance between simulated and closed-form trip aperture: one
/// tick of jaw travel at the gripper's no-load speed (the per-tick maximum).
const TRIP_APERTURE_TOL: f64 = 0.01 * (215.0 * PI / 30.0) * 1e-3;
/// Allowed trip-time disagreement with the independent per-tick oracle.
const TRIP_TIME_TOL_TICKS: u64 = 1;
/// Maximum comparator-trip shift when halving dt (one coarse tick).
const DT_REFINEMENT_TOL: f64 = 1e-3 + 1e-12;

// ---------------------------------------------------------------------------
// independent oracles (datasheet numbers written out, no library calls)
// ---------------------------------------------------------------------------

/// Solves the affine line through (no-load rpm, 0) and (rated rpm, rated
/// torque) for its zero-speed intercept.
fn two_point_stall(no_load_rpm: f64, rated_rpm: f64, rated_torque: f64) -> f64 {
    let slope = rated_torque / (rated_rpm - no_load_rpm);
    -slope * no_load_rpm
}

/// Per-tick re-simulation of the grip-trip scenario: press GRIP at t=0,
/// object of 0.05 m / 2000 N/m present, default gripper and ADC settings.
/// Returns (tick of first comparator trip, aperture at that tick).
fn grip_trip_oracle(dt: f64, n_debounce: u64) -> (u64, f64) {
    let no_load = 215.0 * PI / 30.0; // rad/s
    let stall = 0.2 * 215.0 / 95.0; // N·m through the two anchor points
    let torque_per_ampere = 0.2 / 0.085;
    let radius = 0.01;
    let stiffness = 2000.0;
    let size = 0.05;
    let encode = |amps: f64| (amps / 0.5 * 255.0).round().clamp(0.0, 255.0) as u32;
    let trip_code = encode(0.085);

    let mut aperture = 0.10_f64;
    let mut tick = 0u64;
    loop {
        // the debounced press lands after n_debounce consecutive samples,
        // so the motor first moves on tick n_debounce - 1 (0-based)
        if tick + 1 >= n_debounce {
            let force = if aperture < size {
                stiffness * (size - aperture)
            } else {
                0.0
            };
            let speed = (no_load * (1.0 - force * radius / stall)).max(0.0);
            aperture -= radius * speed * dt;
            let held = if aperture < size {
                stiffness * (size - aperture)
            } else {
                0.0
            };
            let current = (held * radius).min(stall) / torque_per_ampere;
            if encode(current) >= trip_code {
                return (tick, aperture);
            }
        }
        tick += 1;
        assert!(tick < 10_000_000, "oracle never tripped");
    }
}

fn rel_err(measured: f64, expected: f64) -> f64 {
    ((measured - expected) / expected).abs()
}

fn grip_trip_scenario_text() -> &'static str {
    "dt 0.001\nduration 1\nparam object_size 0.05\nat 0 press GRIP\nat 0.05 release GRIP\n"
}

fn first_comparator_trip(trace: &Trace) -> (u64, f64, f64) {
    let idx = trace
        .samples
        .iter()
        .position(|s| s.comparator)
        .expect("comparator never tripped");
    let s = &trace.samples[idx];
    (idx as u64, s.time, s.aperture)
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_datasheet_anchor_reproduction() {
    let started = Instant::now();
    for (name, spec, no_load_rpm) in [
        ("gripper-1271", gripper_1271(), 215.0),
        ("elbow-80838.5", elbow_80838_5(), 135.0),
    ] {
        let params = fit_motor(&spec).unwrap();
        // no-load speed preserved exactly
        assert_eq!(params.no_load_speed, rpm_to_rad_s(no_load_rpm), "{name}");
        assert_eq!(rad_s_to_rpm(params.no_load_speed), no_load_rpm, "{name}");
        // both rated anchors reproduced to 1e-9 relative
        let speed = params.steady_state_speed(spec.rated_torque);
        let speed_err = rel_err(speed, rpm_to_rad_s(spec.rated_speed_rpm));
        assert!(
            speed_err < ANCHOR_REL_TOL,
            "{name}: speed residual {speed_err:e}"
        );
        let current = params.current_draw(spec.rated_torque, true);
        let current_err = rel_err(current, spec.rated_current);
        assert!(
            current_err < ANCHOR_REL_TOL,
            "{name}: current residual {current_err:e}"
        );
        println!(
            "ACCEPTANCE C1 {name}: no-load {} rpm exact, speed residual {speed_err:.2e}, current residual {current_err:.2e}",
            no_load_rpm
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("ACCEPTANCE C1 PASS: anchors reproduced in {elapsed:?}");
}

#[test]
fn criterion_2_stall_values_match_two_point_oracle() {
    let gripper = fit_motor(&gripper_1271()).unwrap();
    let oracle = two_point_stall(215.0, 120.0, 0.2);
    assert!((gripper.stall_torque - 0.45263).abs() <= STALL_ABS_TOL);
    assert!(rel_err(gripper.stall_torque, oracle) < 1e-12);
    let gripper_stall_current = gripper.stall_current();
    assert!((gripper_stall_current - 0.19237).abs() <= STALL_ABS_TOL);

    let elbow = fit_motor(&elbow_80838_5()).unwrap();
    // exact: the same arithmetic as 0.011 * 135 / 55
    assert_eq!(elbow.stall_torque, 0.011 / (1.0 - 80.0 / 135.0));
    assert!((elbow.stall_torque - 0.027).abs() < 1e-15);
    assert!(rel_err(elbow.stall_torque, two_point_stall(135.0, 80.0, 0.011)) < 1e-12);
    let elbow_stall_current = elbow.stall_current();
    assert!((elbow_stall_current - 0.28227).abs() <= STALL_ABS_TOL);

    println!(
        "ACCEPTANCE C2 PASS: gripper stall {:.6} N·m / {:.6} A, elbow stall {:.6} N·m / {:.6} A",
        gripper.stall_torque, gripper_stall_current, elbow.stall_torque, elbow_stall_current
    );
}

#[test]
fn criterion_3_grip_trip_matches_closed_form_and_oracle() {
    let scenario = parse_scenario(grip_trip_scenario_text()).unwrap();
    let trace = run_simulation(&scenario, &SimConfig::default()).unwrap();
    let (trip_tick, trip_time, trip_aperture) = first_comparator_trip(&trace);

    // closed form: trip force = threshold * k_t / r = 20 N, compression
    // F/k = 0.01 m, so the jaw meets the 0.05 m object at aperture 0.04 m
    let closed_form = 0.04;
    let aperture_err = (trip_aperture - closed_form).abs();
    assert!(
        aperture_err <= TRIP_APERTURE_TOL,
        "aperture {trip_aperture} vs closed form {closed_form}: err {aperture_err:e} > {TRIP_APERTURE_TOL:e}"
    );

    let (oracle_tick, oracle_aperture) = grip_trip_oracle(1e-3, 5);
    assert!(
        trip_tick.abs_diff(oracle_tick) <= TRIP_TIME_TOL_TICKS,
        "trip tick {trip_tick} vs oracle {oracle_tick}"
    );
    assert!((trip_aperture - oracle_aperture).abs() <= TRIP_APERTURE_TOL);

    println!(
        "ACCEPTANCE C3 PASS: trip at t={trip_time} s (oracle tick {oracle_tick}), aperture {trip_aperture:.6} vs closed form {closed_form} (err {aperture_err:.2e} <= {TRIP_APERTURE_TOL:.2e})"
    );
}

#[test]
fn criterion_4_safety_fuzz_100k_frames() {
    let started = Instant::now();
    let report = run_fuzz(&SimConfig::default(), 100_000, 42).unwrap();
    let elapsed = started.elapsed();
    assert!(report.pass(), "violation: {:?}", report.violation);
    assert_eq!(report.ticks_run, 100_000);
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE C4 PASS: 100000 random frames (seed 42), zero pin/limit/bound violations in {elapsed:?}"
    );
}

#[test]
fn criterion_5_worm_hold_and_byte_stable_trace() {
    let text = "dt 0.001\nduration 10\nparam payload_mass 5\n";
    let scenario = parse_scenario(text).unwrap();
    let first = run_simulation(&scenario, &SimConfig::default()).unwrap();
    assert_eq!(first.samples.len(), 10_000);
    let theta0 = first.samples[0].theta.to_bits();
    for s in &first.samples {
        assert_eq!(s.theta.to_bits(), theta0, "theta drifted at t={}", s.time);
    }
    let second = run_simulation(&scenario, &SimConfig::default()).unwrap();
    let (a, b) = (serialize_trace(&first), serialize_trace(&second));
    assert_eq!(a, b, "two runs serialized differently");
    println!(
        "ACCEPTANCE C5 PASS: theta bit-identical over 10 s under 5 kg, trace byte-stable ({} bytes)",
        a.len()
    );
}

/// Exhaustive small-model state key.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct Key {
    elbow: ElbowState,
    grip: GripState,
    edge_memory: bool,
    opening_timer: u32,
}

fn key_of(c: &ControllerState) -> Key {
    Key {
        elbow: c.elbow,
        grip: c.grip,
        edge_memory: c.grip_edge_memory,
        opening_timer: c.opening_timer,
    }
}

fn controller_from(key: Key, config: ControllerConfig) -> ControllerState {
    let mut c = ControllerState::new(config);
    c.elbow = key.elbow;
    c.grip = key.grip;
    c.grip_edge_memory = key.edge_memory;
    c.opening_timer = key.opening_timer;
    c
}

/// Independent grip-FSM oracle used for the toggle/edge-count replay.
fn oracle_grip_step(
    state: GripState,
    timer: &mut u32,
    trigger: bool,
    comparator: bool,
    t_open_max: u32,
) -> GripState {
    let mut g = state;
    if trigger {
        g = match g {
            GripState::Open | GripState::Opening => GripState::Closing,
            GripState::Closing | GripState::Holding => {
                *timer = t_open_max;
                GripState::Opening
            }
        };
        if g != GripState::Opening {
            *timer = 0;
        }
    }
    match g {
        GripState::Closing if comparator => g = GripState::Holding,
        GripState::Opening => {
            if comparator || *timer == 0 {
                g = GripState::Open;
                *timer = 0;
            } else {
                *timer -= 1;
            }
        }
        _ => {}
    }
    g
}

#[test]
fn criterion_6_fsm_reachability_and_edge_count() {
    use std::collections::{HashSet, VecDeque};

    // exhaustive enumeration over all 64 stable frames from every reachable
    // controller configuration, with a small opening timer
    let config = ControllerConfig {
        n_debounce: 1,
        t_open_max: 3,
    };
    let mut seen: HashSet<Key> = HashSet::new();
    let mut queue = VecDeque::new();
    let start = key_of(&ControllerState::new(config));
    seen.insert(start);
    queue.push_back(start);
    let mut transitions = 0u64;
    let mut holding_entries = 0u64;
    while let Some(key) = queue.pop_front() {
        for bits in 0..64u8 {
            let frame = SwitchFrame::from_bits(bits);
            let mut c = controller_from(key, config);
            let out = c.step(frame);
            transitions += 1;

            let pins = map_outputs_to_pins(out);
            assert!(!(pins.elbow_pin_a && pins.elbow_pin_b));
            assert!(!(frame.elbow_max_up_limit && out.elbow == ElbowCmd::Up));
            assert!(!(frame.elbow_max_down_limit && out.elbow == ElbowCmd::Down));

            if c.grip == GripState::Holding && key.grip != GripState::Holding {
                holding_entries += 1;
                let trigger = frame.grip_cmd && !key.edge_memory;
                assert!(
                    frame.overcurrent_comparator,
                    "HOLDING entered without comparator from {key:?} frame {bits:06b}"
                );
                assert!(
                    key.grip == GripState::Closing
                        || (trigger && matches!(key.grip, GripState::Open | GripState::Opening)),
                    "HOLDING entered outside the CLOSING rule from {key:?} frame {bits:06b}"
                );
            }

            let next = key_of(&c);
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }

    // toggle/edge-count property over 1000 random edge sequences
    let mut lcg: u64 = 0x1234_5678_9abc_def0;
    let mut rand = move || {
        lcg = lcg
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        lcg >> 33
    };
    let mut total_edges = 0u64;
    let mut total_toggles = 0u64;
    let mut total_absorbed = 0u64;
    for _ in 0..1000 {
        let mut c = ControllerState::new(config);
        let mut oracle_state = GripState::Open;
        let mut oracle_timer = 0u32;
        let mut level = false;
        for _ in 0..64 {
            let r = rand();
            if r & 1 == 1 {
                level = !level; // flip the grip switch level
            }
            let comparator = r & 0b110 == 0b110; // 25 % comparator ticks
            let frame = SwitchFrame {
                grip_cmd: level,
                overcurrent_comparator: comparator,
                ..SwitchFrame::default()
            };
            let edge = level && !c.grip_edge_memory;
            let before = c.grip;
            c.step(frame);
            // replay against the independent oracle
            oracle_state = oracle_grip_step(oracle_state, &mut oracle_timer, edge, comparator, 3);
            assert_eq!(c.grip, oracle_state, "oracle diverged");
            if edge {
                total_edges += 1;
                assert_ne!(
                    c.grip, before,
                    "a debounced edge left the grip FSM unchanged"
                );
                // pure-trigger destination, before any comparator action
                let toggled_to = match before {
                    GripState::Open | GripState::Opening => GripState::Closing,
                    GripState::Closing | GripState::Holding => GripState::Opening,
                };
                if c.grip == toggled_to {
                    total_toggles += 1;
                } else {
                    total_absorbed += 1; // comparator acted on the same tick
                }
            }
        }
    }
    assert_eq!(total_edges, total_toggles + total_absorbed);
    assert!(total_edges > 1000, "sequences produced too few edges");

    println!(
        "ACCEPTANCE C6 PASS: {} reachable states, {transitions} transitions enumerated, {holding_entries} HOLDING entries all comparator-gated; {total_edges} edges = {total_toggles} toggles + {total_absorbed} comparator-absorbed",
        seen.len()
    );
}

#[test]
fn criterion_7_parser_totality_corpus() {
    let malformed: &[&str] = &[
        "dt",
        "dt zero",
        "dt -0.001",
        "dt 0",
        "dt inf",
        "dt nan",
        "duration",
        "duration abc",
        "duration -5",
        "duration 0",
        "param",
        "param worm_ratio",
        "param worm_ratio fast",
        "param warp_factor 9",
        "param worm_ratio 1 2",
        "at",
        "at x press GRIP",
        "at -1 press GRIP",
        "at 0.1",
        "at 0.1 yank GRIP",
        "at 0.1 press",
        "at 0.1 press WRIST",
        "at 0.1 press grip",
        "at 0.1 press GRIP extra",
        "at 0.1 release",
        "at 0.1 release THUMB",
        "at 0.1 set-payload",
        "at 0.1 set-payload heavy",
        "at 0.1 set-payload -2",
        "at 0.1 place-object",
        "at 0.1 place-object 0.05",
        "at 0.1 place-object -0.05 2000",
        "at 0.1 place-object 0.05 -2000",
        "at 0.1 place-object 0.05 soft",
        "at 9 press GRIP",
        "expect",
        "expect when theta 0 1",
        "expect -0.5 theta 0 1",
        "expect 0.1",
        "expect 0.1 altitude 0 1",
        "expect 0.1 theta",
        "expect 0.1 theta 0",
        "expect 0.1 theta 1 0",
        "expect 0.1 theta low high",
        "expect 0.1 theta = OPEN",
        "expect 0.1 grip_state 0 1",
        "expect 0.1 grip_state =",
        "expect 0.1 grip_state = AJAR",
        "expect 0.1 elbow_state = HOLDING",
        "expect 0.1 grip_state = OPEN trailing",
        "expect 9 theta 0 1",
        "press GRIP",
        "expect 0.1 comparator = TRUE",
        "at 0.1 set-payload 1 2",
        "at 0,1 press GRIP",
        "dt 0.001 0.002",
    ];
    assert!(malformed.len() >= 50);

    // one script: every malformed line, then a valid duration so that
    // past-duration checks can fire for the time-based lines
    let mut script = malformed.join("\n");
    script.push_str("\nduration 1\n");
    let errors = parse_scenario(&script).unwrap_err();
    for (idx, line) in malformed.iter().enumerate() {
        let line_no = (idx + 1) as u32;
        assert!(
            errors.iter().any(|e| e.line == line_no),
            "no diagnostic for line {line_no}: `{line}`"
        );
    }
    for e in &errors {
        assert!(e.line >= 1 && e.line <= malformed.len() as u32 + 1);
        assert!(e.column >= 1);
    }

    // each malformed line also diagnoses cleanly on its own
    for line in malformed {
        let text = format!("{line}\nduration 1\n");
        match parse_scenario(&text) {
            Err(errs) => assert!(errs.iter().all(|e| e.line >= 1)),
            Ok(_) => panic!("`{line}` parsed without error"),
        }
    }

    // valid scenarios round-trip through render + reparse
    let valid = "dt 0.001\nduration 2\nparam payload_mass 1.5\nparam object_size 0.05\nat 0 press ELBOW_UP\nat 0.25 place-object 0.05 2000\nat 0.5 set-payload 2\nat 1 release ELBOW_UP\nat 1 press GRIP\nexpect 1.5 theta 0 1\nexpect 1.5 grip_state = CLOSING\nexpect 1.9 comparator 0 1\n";
    let s1 = parse_scenario(valid).unwrap();
    let s2 = parse_scenario(&render_scenario(&s1)).unwrap();
    assert_eq!(s1.dt, s2.dt);
    assert_eq!(s1.duration, s2.duration);
    assert_eq!(s1.params.len(), s2.params.len());
    assert_eq!(s1.events.len(), s2.events.len());
    for (a, b) in s1.events.iter().zip(&s2.events) {
        assert_eq!((a.time, a.kind), (b.time, b.kind));
    }
    for (a, b) in s1.assertions.iter().zip(&s2.assertions) {
        assert_eq!((a.time, a.field, &a.check), (b.time, b.field, &b.check));
    }

    println!(
        "ACCEPTANCE C7 PASS: {} malformed lines -> {} positioned diagnostics, no crash; valid scenario round-trips",
        malformed.len(),
        errors.len()
    );
}

#[test]
fn criterion_8_dt_refinement_shifts_trip_by_at_most_one_coarse_tick() {
    let coarse_scenario = parse_scenario(grip_trip_scenario_text()).unwrap();
    let coarse = run_simulation(&coarse_scenario, &SimConfig::default()).unwrap();
    let fine_text = grip_trip_scenario_text().replace("dt 0.001", "dt 0.0005");
    let fine_scenario = parse_scenario(&fine_text).unwrap();
    let fine = run_simulation(&fine_scenario, &SimConfig::default()).unwrap();

    let (_, t_coarse, _) = first_comparator_trip(&coarse);
    let (_, t_fine, _) = first_comparator_trip(&fine);
    let shift = (t_coarse - t_fine).abs();
    assert!(
        shift <= DT_REFINEMENT_TOL,
        "trip shifted by {shift} s (coarse {t_coarse}, fine {t_fine})"
    );
    println!(
        "ACCEPTANCE C8 PASS: trip at {t_coarse} s (dt 1 ms) vs {t_fine} s (dt 0.5 ms), shift {:.1e} s <= 1 ms",
        shift
    );
}
