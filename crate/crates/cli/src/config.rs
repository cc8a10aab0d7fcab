//! Plain `key=value` config files: plant parameters, controller tunables
//! and custom motor specs. `#` starts a comment; blank lines are ignored.

use limbsim_core::motor::MotorSpec;
use limbsim_core::sim::SimConfig;

/// Parses a config file body into (key, value) pairs, reporting every
/// malformed line with its 1-based line number.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, f64)>, Vec<String>> {
    let mut pairs = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            errors.push(format!(
                "line {line_no}: expected `key = value`, got `{body}`"
            ));
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            errors.push(format!("line {line_no}: empty key"));
            continue;
        }
        match value.parse::<f64>() {
            Ok(v) if v.is_finite() => pairs.push((key.to_string(), v)),
            _ => errors.push(format!("line {line_no}: malformed number `{value}`")),
        }
    }
    if errors.is_empty() {
        Ok(pairs)
    } else {
        Err(errors)
    }
}

/// Builds a simulation config from defaults plus an optional config file.
pub fn load_sim_config(config_text: Option<&str>) -> Result<SimConfig, Vec<String>> {
    let mut config = SimConfig::default();
    if let Some(text) = config_text {
        let pairs = parse_key_values(text)?;
        let mut errors = Vec::new();
        for (key, value) in pairs {
            if let Err(e) = config.apply_override(&key, value) {
                errors.push(e.to_string());
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
    }
    Ok(config)
}

const MOTOR_SPEC_KEYS: &[&str] = &[
    "nominal_voltage",
    "no_load_speed_rpm",
    "rated_speed_rpm",
    "rated_torque",
    "rated_current",
    "gear_ratio",
    "mass",
];

/// Loads a custom motor spec from a config-format file. All seven rating
/// keys are required.
pub fn load_motor_spec(text: &str) -> Result<MotorSpec, Vec<String>> {
    let pairs = parse_key_values(text)?;
    let mut errors = Vec::new();
    let mut get = |name: &str| -> f64 {
        let mut found = None;
        for (key, value) in &pairs {
            if key == name {
                found = Some(*value);
            }
        }
        found.unwrap_or_else(|| {
            errors.push(format!("missing required key `{name}`"));
            f64::NAN
        })
    };
    let spec = MotorSpec {
        nominal_voltage: get("nominal_voltage"),
        no_load_speed_rpm: get("no_load_speed_rpm"),
        rated_speed_rpm: get("rated_speed_rpm"),
        rated_torque: get("rated_torque"),
        rated_current: get("rated_current"),
        gear_ratio: get("gear_ratio"),
        mass: get("mass"),
    };
    for (key, _) in &pairs {
        if !MOTOR_SPEC_KEYS.contains(&key.as_str()) {
            errors.push(format!("unknown motor spec key `{key}`"));
        }
    }
    if errors.is_empty() {
        Ok(spec)
    } else {
        Err(errors)
    }
}
