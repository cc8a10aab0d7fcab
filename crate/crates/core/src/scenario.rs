//! Scenario script parsing, assertion evaluation and trace serialization.
//!
//! Scripts are line-oriented plain text; `#` starts a comment:
//!
//! ```text
//! dt <seconds>
//! duration <seconds>
//! param <name> <value>
//! at <t> press <ELBOW_UP|ELBOW_DOWN|GRIP>
//! at <t> release <ELBOW_UP|ELBOW_DOWN|GRIP>
//! at <t> set-payload <kg>
//! at <t> place-object <size_m> <stiffness_N_per_m>
//! expect <t> <field> <min> <max>
//! expect <t> <field> = <TOKEN>
//! ```
//!
//! Assertable fields: `theta`, `omega`, `aperture`, `grip_current`,
//! `adc_code`, `comparator` (numeric ranges) and `elbow_state`,
//! `grip_state` (`=` token form). Parsing is total: any input yields either
//! a scenario or a list of positioned diagnostics, never a crash.

use std::fmt;

use crate::sim::{Trace, TraceSample, OVERRIDE_KEYS};

/// One of the three operator switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchId {
    ElbowUp,
    ElbowDown,
    Grip,
}

impl SwitchId {
    pub fn token(self) -> &'static str {
        match self {
            SwitchId::ElbowUp => "ELBOW_UP",
            SwitchId::ElbowDown => "ELBOW_DOWN",
            SwitchId::Grip => "GRIP",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "ELBOW_UP" => Some(SwitchId::ElbowUp),
            "ELBOW_DOWN" => Some(SwitchId::ElbowDown),
            "GRIP" => Some(SwitchId::Grip),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Press(SwitchId),
    Release(SwitchId),
    SetPayload(f64),
    PlaceObject { size: f64, stiffness: f64 },
}

/// A timed stimulus. Events apply at the first tick with `t >= time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub line: u32,
}

/// Trace fields addressable from `expect` lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Theta,
    Omega,
    Aperture,
    GripCurrent,
    AdcCode,
    ElbowState,
    GripState,
    Comparator,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Theta => "theta",
            Field::Omega => "omega",
            Field::Aperture => "aperture",
            Field::GripCurrent => "grip_current",
            Field::AdcCode => "adc_code",
            Field::ElbowState => "elbow_state",
            Field::GripState => "grip_state",
            Field::Comparator => "comparator",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "theta" => Field::Theta,
            "omega" => Field::Omega,
            "aperture" => Field::Aperture,
            "grip_current" => Field::GripCurrent,
            "adc_code" => Field::AdcCode,
            "elbow_state" => Field::ElbowState,
            "grip_state" => Field::GripState,
            "comparator" => Field::Comparator,
            _ => return None,
        })
    }

    fn is_state(self) -> bool {
        matches!(self, Field::ElbowState | Field::GripState)
    }

    fn valid_tokens(self) -> &'static [&'static str] {
        match self {
            Field::ElbowState => &["IDLE", "MOVING_UP", "MOVING_DOWN"],
            Field::GripState => &["OPEN", "CLOSING", "HOLDING", "OPENING"],
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AssertionCheck {
    /// Inclusive numeric range.
    Range { min: f64, max: f64 },
    /// State token equality.
    Token(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub time: f64,
    pub field: Field,
    pub check: AssertionCheck,
    pub line: u32,
}

/// A parameter override applied before the run starts.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamOverride {
    pub key: String,
    pub value: f64,
    pub line: u32,
}

/// A parsed scenario: timing, overrides, stimuli and assertions, with
/// events and assertions sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Tick length if the script set one.
    pub dt: Option<f64>,
    /// Total simulated time (s).
    pub duration: f64,
    pub params: Vec<ParamOverride>,
    pub events: Vec<Event>,
    pub assertions: Vec<Assertion>,
}

/// A positioned parse diagnostic; line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, col {}: {}",
            self.line, self.column, self.message
        )
    }
}

/// Tokens of one line with their 1-based start columns.
struct Cursor<'a> {
    line: u32,
    tokens: Vec<(u32, &'a str)>,
    next: usize,
    end_column: u32,
}

impl<'a> Cursor<'a> {
    fn new(line: u32, text: &'a str) -> Self {
        let body = match text.find('#') {
            Some(i) => &text[..i],
            None => text,
        };
        let mut tokens = Vec::new();
        let mut col = 0u32;
        let mut start = None;
        for (i, ch) in body.char_indices() {
            col += 1;
            if ch.is_whitespace() {
                if let Some((s, c)) = start.take() {
                    tokens.push((c, &body[s..i]));
                }
            } else if start.is_none() {
                start = Some((i, col));
            }
        }
        if let Some((s, c)) = start {
            tokens.push((c, &body[s..]));
        }
        Self {
            line,
            tokens,
            next: 0,
            end_column: col + 1,
        }
    }

    fn err(&self, column: u32, message: String) -> ParseError {
        ParseError {
            line: self.line,
            column,
            message,
        }
    }

    fn take(&mut self, what: &str) -> Result<(u32, &'a str), ParseError> {
        match self.tokens.get(self.next) {
            Some(&(col, tok)) => {
                self.next += 1;
                Ok((col, tok))
            }
            None => Err(self.err(self.end_column, format!("missing {what}"))),
        }
    }

    fn take_number(&mut self, what: &str) -> Result<(u32, f64), ParseError> {
        let (col, tok) = self.take(what)?;
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((col, v)),
            _ => Err(self.err(col, format!("malformed number `{tok}` for {what}"))),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.tokens.get(self.next) {
            Some(&(col, tok)) => Err(self.err(col, format!("unexpected token `{tok}`"))),
            None => Ok(()),
        }
    }
}

/// Parses a scenario script, returning either the scenario or every
/// diagnosable error (the parse does not stop at the first problem).
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<ParseError>> {
    let mut errors = Vec::new();
    let mut dt: Option<f64> = None;
    let mut duration: Option<f64> = None;
    let mut params = Vec::new();
    // (item, column of its time token) for the post-pass range check
    let mut events: Vec<(Event, u32)> = Vec::new();
    let mut assertions: Vec<(Assertion, u32)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = (idx + 1) as u32;
        let mut cur = Cursor::new(line_no, raw_line);
        if cur.tokens.is_empty() {
            continue;
        }
        let result = parse_line(
            &mut cur,
            &mut dt,
            &mut duration,
            &mut params,
            &mut events,
            &mut assertions,
        );
        if let Err(e) = result {
            errors.push(e);
        }
    }

    let duration = match duration {
        Some(d) => d,
        None => {
            errors.push(ParseError {
                line: 1,
                column: 1,
                message: "missing required `duration` directive".into(),
            });
            0.0
        }
    };
    if duration > 0.0 {
        for (ev, col) in &events {
            if ev.time > duration {
                errors.push(ParseError {
                    line: ev.line,
                    column: *col,
                    message: format!("event time {} is past the duration {duration}", ev.time),
                });
            }
        }
        for (a, col) in &assertions {
            if a.time > duration {
                errors.push(ParseError {
                    line: a.line,
                    column: *col,
                    message: format!("assertion time {} is past the duration {duration}", a.time),
                });
            }
        }
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| (e.line, e.column));
        return Err(errors);
    }

    let mut events: Vec<Event> = events.into_iter().map(|(e, _)| e).collect();
    let mut assertions: Vec<Assertion> = assertions.into_iter().map(|(a, _)| a).collect();
    // stable by-time order keeps same-time items in file order
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    assertions.sort_by(|a, b| a.time.total_cmp(&b.time));

    Ok(Scenario {
        dt,
        duration,
        params,
        events,
        assertions,
    })
}

fn parse_line(
    cur: &mut Cursor,
    dt: &mut Option<f64>,
    duration: &mut Option<f64>,
    params: &mut Vec<ParamOverride>,
    events: &mut Vec<(Event, u32)>,
    assertions: &mut Vec<(Assertion, u32)>,
) -> Result<(), ParseError> {
    let (kw_col, keyword) = cur.take("directive")?;
    match keyword {
        "dt" => {
            let (col, v) = cur.take_number("dt value")?;
            if v <= 0.0 {
                return Err(cur.err(col, format!("dt must be positive, got {v}")));
            }
            *dt = Some(v);
        }
        "duration" => {
            let (col, v) = cur.take_number("duration value")?;
            if v <= 0.0 {
                return Err(cur.err(col, format!("duration must be positive, got {v}")));
            }
            *duration = Some(v);
        }
        "param" => {
            let (name_col, name) = cur.take("parameter name")?;
            if !OVERRIDE_KEYS.contains(&name) {
                return Err(cur.err(name_col, format!("unknown parameter `{name}`")));
            }
            let (_, value) = cur.take_number("parameter value")?;
            params.push(ParamOverride {
                key: name.to_string(),
                value,
                line: cur.line,
            });
        }
        "at" => {
            let (time_col, time) = cur.take_number("event time")?;
            if time < 0.0 {
                return Err(cur.err(time_col, format!("event time must be >= 0, got {time}")));
            }
            let (action_col, action) = cur.take("event action")?;
            let kind = match action {
                "press" | "release" => {
                    let (sw_col, sw) = cur.take("switch name")?;
                    let id = SwitchId::parse(sw)
                        .ok_or_else(|| cur.err(sw_col, format!("unknown switch `{sw}`")))?;
                    if action == "press" {
                        EventKind::Press(id)
                    } else {
                        EventKind::Release(id)
                    }
                }
                "set-payload" => {
                    let (col, kg) = cur.take_number("payload mass")?;
                    if kg < 0.0 {
                        return Err(cur.err(col, format!("payload mass must be >= 0, got {kg}")));
                    }
                    EventKind::SetPayload(kg)
                }
                "place-object" => {
                    let (col, size) = cur.take_number("object size")?;
                    if size <= 0.0 {
                        return Err(cur.err(col, format!("object size must be > 0, got {size}")));
                    }
                    let (col, stiffness) = cur.take_number("object stiffness")?;
                    if stiffness <= 0.0 {
                        return Err(cur.err(
                            col,
                            format!("object stiffness must be > 0, got {stiffness}"),
                        ));
                    }
                    EventKind::PlaceObject { size, stiffness }
                }
                other => return Err(cur.err(action_col, format!("unknown event action `{other}`"))),
            };
            events.push((
                Event {
                    time,
                    kind,
                    line: cur.line,
                },
                time_col,
            ));
        }
        "expect" => {
            let (time_col, time) = cur.take_number("assertion time")?;
            if time < 0.0 {
                return Err(cur.err(time_col, format!("assertion time must be >= 0, got {time}")));
            }
            let (field_col, field_name) = cur.take("field name")?;
            let field = Field::parse(field_name)
                .ok_or_else(|| cur.err(field_col, format!("unknown field `{field_name}`")))?;
            let (arg_col, arg) = cur.take("range bound or `=`")?;
            let check = if arg == "=" {
                let (tok_col, token) = cur.take("state token")?;
                if !field.is_state() {
                    return Err(cur.err(
                        field_col,
                        format!("field `{field_name}` takes a numeric range, not a token"),
                    ));
                }
                if !field.valid_tokens().contains(&token) {
                    return Err(cur.err(tok_col, format!("unknown `{field_name}` token `{token}`")));
                }
                AssertionCheck::Token(token.to_string())
            } else {
                if field.is_state() {
                    return Err(cur.err(
                        field_col,
                        format!("field `{field_name}` takes `= TOKEN`, not a numeric range"),
                    ));
                }
                let min = arg
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        cur.err(
                            arg_col,
                            format!("malformed number `{arg}` for range minimum"),
                        )
                    })?;
                let (max_col, max) = cur.take_number("range maximum")?;
                if max < min {
                    return Err(cur.err(max_col, format!("empty range: {max} < {min}")));
                }
                AssertionCheck::Range { min, max }
            };
            assertions.push((
                Assertion {
                    time,
                    field,
                    check,
                    line: cur.line,
                },
                time_col,
            ));
        }
        other => {
            return Err(cur.err(kw_col, format!("unknown directive `{other}`")));
        }
    }
    cur.finish()
}

/// Renders a scenario back to script text. `parse_scenario` of the output
/// reproduces the same scenario up to line numbers.
pub fn render_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    if let Some(dt) = s.dt {
        out.push_str(&format!("dt {dt}\n"));
    }
    out.push_str(&format!("duration {}\n", s.duration));
    for p in &s.params {
        out.push_str(&format!("param {} {}\n", p.key, p.value));
    }
    for ev in &s.events {
        match ev.kind {
            EventKind::Press(sw) => out.push_str(&format!("at {} press {}\n", ev.time, sw.token())),
            EventKind::Release(sw) => {
                out.push_str(&format!("at {} release {}\n", ev.time, sw.token()))
            }
            EventKind::SetPayload(kg) => {
                out.push_str(&format!("at {} set-payload {kg}\n", ev.time))
            }
            EventKind::PlaceObject { size, stiffness } => {
                out.push_str(&format!("at {} place-object {size} {stiffness}\n", ev.time))
            }
        }
    }
    for a in &s.assertions {
        match &a.check {
            AssertionCheck::Range { min, max } => out.push_str(&format!(
                "expect {} {} {min} {max}\n",
                a.time,
                a.field.name()
            )),
            AssertionCheck::Token(tok) => {
                out.push_str(&format!("expect {} {} = {tok}\n", a.time, a.field.name()))
            }
        }
    }
    out
}

/// Outcome of one assertion against a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AssertionResult {
    pub line: u32,
    pub pass: bool,
    /// What the trace held at the sampled time, rendered for humans.
    pub observed: String,
    /// What the assertion wanted, rendered for humans.
    pub expected: String,
}

/// All assertion outcomes for one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssertionReport {
    pub results: Vec<AssertionResult>,
}

impl AssertionReport {
    /// True iff every assertion passed.
    pub fn pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }
}

fn numeric_value(sample: &TraceSample, field: Field) -> f64 {
    match field {
        Field::Theta => sample.theta,
        Field::Omega => sample.omega,
        Field::Aperture => sample.aperture,
        Field::GripCurrent => sample.grip_current,
        Field::AdcCode => f64::from(sample.adc_code),
        Field::Comparator => u8::from(sample.comparator).into(),
        Field::ElbowState | Field::GripState => unreachable!("state fields are token-checked"),
    }
}

fn token_value(sample: &TraceSample, field: Field) -> &'static str {
    match field {
        Field::ElbowState => sample.elbow_state.token(),
        Field::GripState => sample.grip_state.token(),
        _ => unreachable!("numeric fields are range-checked"),
    }
}

/// Evaluates every assertion against the first sample at or after its time.
/// An assertion past the end of the trace fails with "no sample".
pub fn evaluate_assertions(trace: &Trace, scenario: &Scenario) -> AssertionReport {
    let mut results = Vec::with_capacity(scenario.assertions.len());
    for a in &scenario.assertions {
        let idx = trace.samples.partition_point(|s| s.time < a.time);
        let expected = match &a.check {
            AssertionCheck::Range { min, max } => {
                format!("{} in [{min}, {max}] at t={}", a.field.name(), a.time)
            }
            AssertionCheck::Token(tok) => format!("{} = {tok} at t={}", a.field.name(), a.time),
        };
        let result = match trace.samples.get(idx) {
            None => AssertionResult {
                line: a.line,
                pass: false,
                observed: "no sample".into(),
                expected,
            },
            Some(sample) => match &a.check {
                AssertionCheck::Range { min, max } => {
                    let v = numeric_value(sample, a.field);
                    AssertionResult {
                        line: a.line,
                        pass: *min <= v && v <= *max,
                        observed: format!("{v:.6}"),
                        expected,
                    }
                }
                AssertionCheck::Token(tok) => {
                    let v = token_value(sample, a.field);
                    AssertionResult {
                        line: a.line,
                        pass: v == tok,
                        observed: v.to_string(),
                        expected,
                    }
                }
            },
        };
        results.push(result);
    }
    AssertionReport { results }
}

/// CSV header, matching the field order of [`TraceSample`].
pub const TRACE_HEADER: &str = "time,raw_elbow_up,raw_elbow_down,raw_grip,raw_max_up,raw_max_down,raw_comparator,stable_elbow_up,stable_elbow_down,stable_grip,stable_max_up,stable_max_down,stable_comparator,elbow_state,grip_state,elbow_cmd,grip_cmd,theta,omega,aperture,grip_current,adc_code,comparator";

fn push_f64(out: &mut String, v: f64) {
    if v == 0.0 {
        out.push_str("0.000000"); // normalizes -0.0
    } else {
        out.push_str(&format!("{v:.6}"));
    }
}

fn push_bool(out: &mut String, v: bool) {
    out.push(if v { '1' } else { '0' });
}

/// Serializes a trace as CSV: floats fixed to 6 decimals, booleans as 0/1,
/// enums as uppercase tokens, lines ending in a single line feed. The
/// rendering is bit-stable and golden-file tested.
pub fn serialize_trace(trace: &Trace) -> String {
    let mut out = String::with_capacity(128 + trace.samples.len() * 96);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in &trace.samples {
        push_f64(&mut out, s.time);
        for frame in [s.raw, s.stable] {
            for bit in [
                frame.elbow_up_cmd,
                frame.elbow_down_cmd,
                frame.grip_cmd,
                frame.elbow_max_up_limit,
                frame.elbow_max_down_limit,
                frame.overcurrent_comparator,
            ] {
                out.push(',');
                push_bool(&mut out, bit);
            }
        }
        out.push(',');
        out.push_str(s.elbow_state.token());
        out.push(',');
        out.push_str(s.grip_state.token());
        out.push(',');
        out.push_str(s.elbow_cmd.token());
        out.push(',');
        out.push_str(s.grip_cmd.token());
        for v in [s.theta, s.omega, s.aperture, s.grip_current] {
            out.push(',');
            push_f64(&mut out, v);
        }
        out.push_str(&format!(",{}", s.adc_code));
        out.push(',');
        push_bool(&mut out, s.comparator);
        out.push('\n');
    }
    out
}
