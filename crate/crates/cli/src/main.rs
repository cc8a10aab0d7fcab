//! `limbsim` — scenario runner, motor fitting and safety fuzzing for the
//! switch-controlled prosthesis co-simulation.
//!
//! Exit codes: 0 success / all checks passed, 1 assertion or safety
//! violation, 2 usage, parse or config error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use limbsim_core::fuzz::run_fuzz;
use limbsim_core::motor::{builtin_spec, fit_motor, rad_s_to_rpm, rpm_to_rad_s, MotorSpec};
use limbsim_core::scenario::{evaluate_assertions, parse_scenario, serialize_trace, Scenario};
use limbsim_core::sim::{run_simulation, SimConfig};

#[derive(Parser)]
#[command(
    name = "limbsim",
    version,
    about = "Switch-controlled prosthesis co-simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario, optionally write the trace CSV, evaluate assertions.
    Run {
        /// Scenario script file.
        #[arg(long)]
        scenario: PathBuf,
        /// key=value config file overriding plant/controller parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the trace CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a scenario and report assertions without writing a trace.
    Check {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit the gearmotor model for a built-in or file-based spec and print
    /// the anchor-point round-trip residuals.
    FitMotor {
        /// `gripper-1271`, `elbow-80838.5`, or a motor spec file path.
        #[arg(long)]
        spec: String,
    },
    /// Drive the controller + plant with seeded pseudo-random input frames
    /// and check the safety invariants every tick.
    Fuzz {
        #[arg(long, default_value_t = 100_000)]
        ticks: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 {
                EXIT_OK
            } else {
                EXIT_USAGE
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::Run {
            scenario,
            config,
            out,
        } => cmd_run(&scenario, config.as_deref(), out.as_deref()),
        Command::Check { scenario, config } => cmd_run(&scenario, config.as_deref(), None),
        Command::FitMotor { spec } => cmd_fit_motor(&spec),
        Command::Fuzz {
            ticks,
            seed,
            config,
        } => cmd_fuzz(ticks, seed, config.as_deref()),
    };
    ExitCode::from(code)
}

fn read_file(path: &Path, what: &str) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {what} `{}`: {e}", path.display());
        EXIT_USAGE
    })
}

fn load_config(path: Option<&Path>) -> Result<SimConfig, u8> {
    let text = match path {
        Some(p) => Some(read_file(p, "config file")?),
        None => None,
    };
    config::load_sim_config(text.as_deref()).map_err(|errors| {
        for e in errors {
            eprintln!("config error: {e}");
        }
        EXIT_USAGE
    })
}

fn load_scenario(path: &Path) -> Result<Scenario, u8> {
    let text = read_file(path, "scenario file")?;
    parse_scenario(&text).map_err(|errors| {
        for e in &errors {
            eprintln!("{}: {e}", path.display());
        }
        eprintln!("{} scenario error(s)", errors.len());
        EXIT_USAGE
    })
}

fn cmd_run(scenario_path: &Path, config_path: Option<&Path>, out: Option<&Path>) -> u8 {
    let sim_config = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let scenario = match load_scenario(scenario_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let trace = match run_simulation(&scenario, &sim_config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(out) = out {
        if let Err(e) = fs::write(out, serialize_trace(&trace)) {
            eprintln!("error: cannot write trace `{}`: {e}", out.display());
            return EXIT_USAGE;
        }
        println!(
            "trace: {} samples -> {}",
            trace.samples.len(),
            out.display()
        );
    }
    let report = evaluate_assertions(&trace, &scenario);
    let mut failed = 0usize;
    for r in &report.results {
        if r.pass {
            println!(
                "line {:>3}: PASS  {}  observed {}",
                r.line, r.expected, r.observed
            );
        } else {
            failed += 1;
            println!(
                "line {:>3}: FAIL  {}  observed {}",
                r.line, r.expected, r.observed
            );
        }
    }
    println!(
        "assertions: {} passed, {} failed",
        report.results.len() - failed,
        failed
    );
    if report.pass() {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn load_spec(name: &str) -> Result<MotorSpec, u8> {
    if let Some(spec) = builtin_spec(name) {
        return Ok(spec);
    }
    let path = Path::new(name);
    if !path.exists() {
        eprintln!(
            "error: `{name}` is not a built-in spec (gripper-1271, elbow-80838.5) or a readable file"
        );
        return Err(EXIT_USAGE);
    }
    let text = read_file(path, "motor spec file")?;
    config::load_motor_spec(&text).map_err(|errors| {
        for e in errors {
            eprintln!("motor spec error: {e}");
        }
        EXIT_USAGE
    })
}

fn cmd_fit_motor(name: &str) -> u8 {
    let spec = match load_spec(name) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let params = match fit_motor(&spec) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    println!("spec: {name}");
    println!("  nominal voltage    {} V", spec.nominal_voltage);
    println!("  no-load speed      {} rpm", spec.no_load_speed_rpm);
    println!(
        "  rated point        {} rpm @ {} N·m, {} A",
        spec.rated_speed_rpm, spec.rated_torque, spec.rated_current
    );
    println!(
        "  gear ratio         {}:1, mass {} kg",
        spec.gear_ratio, spec.mass
    );
    println!("fitted params:");
    println!(
        "  no_load_speed      {:.6} rad/s ({:.3} rpm)",
        params.no_load_speed,
        rad_s_to_rpm(params.no_load_speed)
    );
    println!("  stall_torque       {:.6} N·m", params.stall_torque);
    println!("  torque_per_ampere  {:.6} N·m/A", params.torque_per_ampere);
    println!("  stall_current      {:.6} A", params.stall_current());
    let rated_speed = rpm_to_rad_s(spec.rated_speed_rpm);
    let speed_residual = if rated_speed > 0.0 {
        ((params.steady_state_speed(spec.rated_torque) - rated_speed) / rated_speed).abs()
    } else {
        params.steady_state_speed(spec.rated_torque).abs()
    };
    let current_residual = ((params.current_draw(spec.rated_torque, true) - spec.rated_current)
        / spec.rated_current)
        .abs();
    println!("anchor round-trip residuals (relative):");
    println!("  speed at rated torque    {speed_residual:.3e}");
    println!("  current at rated torque  {current_residual:.3e}");
    EXIT_OK
}

fn cmd_fuzz(ticks: u64, seed: u64, config_path: Option<&Path>) -> u8 {
    let sim_config = match load_config(config_path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let report = match run_fuzz(&sim_config, ticks, seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match report.violation {
        None => {
            println!("fuzz: {ticks} ticks, seed {seed}: all safety invariants held");
            EXIT_OK
        }
        Some(v) => {
            println!("fuzz: VIOLATION at tick {}: {}", v.tick, v.description);
            EXIT_FAIL
        }
    }
}
