// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: JSON file plus flag overrides, checked field by field
//! against a per-scenario schema and resolved with every default filled in.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Lz,
    Transport,
    Jc,
    Metric,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Lz => "lz",
            Scenario::Transport => "transport",
            Scenario::Jc => "jc",
            Scenario::Metric => "metric",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "lz" => Some(Scenario::Lz),
            "transport" => Some(Scenario::Transport),
            "jc" => Some(Scenario::Jc),
            "metric" => Some(Scenario::Metric),
            _ => None,
        }
    }

    pub fn schema(self) -> &'static [FieldSpec] {
        match self {
            Scenario::Lz => LZ,
            Scenario::Transport => TRANSPORT,
            Scenario::Jc => JC,
            Scenario::Metric => METRIC,
        }
    }
}

/// Which artifact kinds to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emit {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// One swept parameter: `name=min:max:count:linear|log`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl SweepSpec {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let (name, range) = text
            .split_once('=')
            .ok_or_else(|| format!("expected name=min:max:count:linear|log, got {text:?}"))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 4 {
            return Err(format!("expected min:max:count:linear|log after '=', got {range:?}"));
        }
        let num = |s: &str, what: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("{what} {s:?} is not a number"))
        };
        let min = num(parts[0], "min")?;
        let max = num(parts[1], "max")?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("count {:?} is not a non-negative integer", parts[2]))?;
        let spacing = match parts[3].trim() {
            "linear" => Spacing::Linear,
            "log" => Spacing::Log,
            other => return Err(format!("spacing must be linear or log, got {other:?}")),
        };
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(format!("need finite min <= max, got {min} and {max}"));
        }
        if count == 0 || (count == 1 && min != max) {
            return Err("count must be at least 2, or 1 with min == max".into());
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err("log spacing needs min > 0".into());
        }
        Ok(Self {
            parameter: name.trim().to_string(),
            min,
            max,
            count,
            spacing,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let w = k as f64 / last;
                match self.spacing {
                    Spacing::Linear if k + 1 == self.count => self.max,
                    Spacing::Linear => self.min + w * (self.max - self.min),
                    Spacing::Log if k + 1 == self.count => self.max,
                    Spacing::Log => self.min * (self.max / self.min).powf(w),
                }
            })
            .collect()
    }
}

/// Fully resolved run configuration, as embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Scenario parameter block with every default filled in.
    pub params: Map<String, Value>,
    pub output: String,
    pub emit: Emit,
    pub sweep: Option<String>,
}

impl RunConfig {
    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        self.sweep
            .as_deref()
            .map(|s| SweepSpec::parse(s).expect("validated sweep spec"))
    }

    pub fn num(&self, key: &str) -> f64 {
        self.params[key].as_f64().expect("validated number")
    }

    pub fn opt_num(&self, key: &str) -> Option<f64> {
        self.params[key].as_f64()
    }

    pub fn count(&self, key: &str) -> usize {
        self.params[key].as_u64().expect("validated count") as usize
    }

    pub fn text(&self, key: &str) -> &str {
        self.params[key].as_str().expect("validated choice")
    }

    /// Copy with one numeric parameter replaced (a sweep point).
    pub fn with_param(&self, key: &str, value: f64) -> Self {
        let mut out = self.clone();
        out.params.insert(key.to_string(), number(value));
        out
    }
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

// ---------------------------------------------------------------------------
// Schema

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Positive,
    /// Positive or null.
    OptionalPositive,
    Real,
    /// Strictly inside `(lo, hi)`.
    Open(f64, f64),
    /// Strictly inside `(lo, hi)`, or null.
    OptionalOpen(f64, f64),
    /// Integer at least this large.
    Count(u64),
    Choice(&'static [&'static str]),
}

impl Kind {
    fn is_float(self) -> bool {
        !matches!(self, Kind::Count(_) | Kind::Choice(_))
    }

    /// `None` when `v` is acceptable, else the complaint.
    fn check(self, v: &Value) -> Option<String> {
        let need_number = |v: &Value| v.as_f64().filter(|x| x.is_finite());
        match self {
            Kind::Positive => match need_number(v) {
                Some(x) if x > 0.0 => None,
                Some(x) => Some(format!("must be > 0, got {x}")),
                None => Some(format!("expected a number, got {v}")),
            },
            Kind::OptionalPositive if v.is_null() => None,
            Kind::OptionalPositive => Kind::Positive.check(v).map(|m| format!("{m} (or null)")),
            Kind::Real => need_number(v).is_none().then(|| format!("expected a number, got {v}")),
            Kind::Open(lo, hi) => match need_number(v) {
                Some(x) if x > lo && x < hi => None,
                Some(x) => Some(format!("must lie strictly between {lo} and {hi}, got {x}")),
                None => Some(format!("expected a number, got {v}")),
            },
            Kind::OptionalOpen(_, _) if v.is_null() => None,
            Kind::OptionalOpen(lo, hi) => Kind::Open(lo, hi).check(v).map(|m| format!("{m} (or null)")),
            Kind::Count(min) => match v.as_u64() {
                Some(n) if n >= min => None,
                Some(n) => Some(format!("must be at least {min}, got {n}")),
                None => Some(format!("expected a non-negative integer, got {v}")),
            },
            Kind::Choice(options) => match v.as_str() {
                Some(s) if options.contains(&s) => None,
                _ => Some(format!("must be one of {}, got {v}", options.join(", "))),
            },
        }
    }
}

/// One key of a scenario block. `default` is JSON text; `None` means required.
#[derive(Debug, Clone, Copy)]
pub struct FieldSpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn field(name: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> FieldSpec {
    FieldSpec {
        name,
        kind,
        default,
        help,
    }
}

const POLAR: Kind = Kind::Open(0.0, PI);

static LZ: &[FieldSpec] = &[
    field("v", Kind::Positive, None, "transverse coupling"),
    field("c", Kind::Real, None, "nonlinearity"),
    field("chi0", POLAR, None, "initial polar angle"),
    field(
        "chitau",
        Kind::OptionalOpen(0.0, PI),
        Some("null"),
        "target polar angle; integration stops on arrival",
    ),
    field("phi0", Kind::Real, Some("0"), "initial azimuth"),
    field(
        "protocol",
        Kind::Choice(&["optimal", "constant", "ramp"]),
        Some("\"optimal\""),
        "bias schedule",
    ),
    field("gamma", Kind::Real, Some("0"), "constant bias, or ramp start"),
    field("slope", Kind::Real, Some("0"), "ramp slope"),
    field("tmax", Kind::Positive, Some("10"), "integration horizon"),
    field("dt", Kind::Positive, Some("0.001"), "sampling step"),
];

static TRANSPORT: &[FieldSpec] = &[
    field(
        "mode",
        Kind::Choice(&["simulate", "given_k2"]),
        Some("\"simulate\""),
        "measured speeds or a given <K^2> grid",
    ),
    field("mass", Kind::Positive, Some("1"), "atom mass"),
    field("wavelength", Kind::Positive, Some("1"), "lattice wavelength"),
    field("U0", Kind::Positive, Some("2000"), "lattice depth"),
    field("d", Kind::Positive, Some("10"), "transport distance"),
    field("n_grid", Kind::Count(16), Some("4096"), "grid points"),
    field(
        "padding",
        Kind::Positive,
        Some("16"),
        "extra wavelengths of grid beyond d",
    ),
    field(
        "dt_factor",
        Kind::Positive,
        Some("0.001"),
        "time step in units of the trap period",
    ),
    field(
        "duration",
        Kind::OptionalPositive,
        Some("null"),
        "schedule duration; null scales the conveyor bound",
    ),
    field(
        "duration_factor",
        Kind::Positive,
        Some("4"),
        "duration in units of the conveyor bound",
    ),
    field(
        "snapshot_every",
        Kind::Count(1),
        Some("10"),
        "steps between recorded observables",
    ),
    field(
        "delta_x",
        Kind::OptionalPositive,
        Some("null"),
        "given-<K^2> mode: width; null uses the harmonic ground state",
    ),
    field(
        "k2_min",
        Kind::Positive,
        Some("100"),
        "given-<K^2> mode: smallest <K^2>",
    ),
    field(
        "k2_max",
        Kind::Positive,
        Some("1000000"),
        "given-<K^2> mode: largest <K^2>",
    ),
    field(
        "k2_count",
        Kind::Count(1),
        Some("21"),
        "given-<K^2> mode: log-spaced grid size",
    ),
];

static JC: &[FieldSpec] = &[
    field("gamma0", Kind::Positive, None, "coupling strength"),
    field("lambda0", Kind::Positive, None, "reservoir spectral width"),
    field(
        "omega0",
        Kind::Real,
        Some("0"),
        "atomic frequency (spectral density only)",
    ),
    field(
        "tmax",
        Kind::OptionalPositive,
        Some("null"),
        "horizon; null uses 5/gamma0, cut at the strong-coupling domain end",
    ),
    field("samples", Kind::Count(2), Some("2001"), "trajectory samples"),
    field(
        "coordinate",
        Kind::Choice(&["rho11", "z"]),
        Some("\"rho11\""),
        "chart for the trajectory bound",
    ),
];

static METRIC: &[FieldSpec] = &[
    field(
        "chart",
        Kind::Choice(&["bloch", "rho11", "bloch_z"]),
        Some("\"bloch\""),
        "parameter chart",
    ),
    field("chi", POLAR, Some("1.5707963267948966"), "bloch chart: polar angle"),
    field("phi", Kind::Real, Some("0"), "bloch chart: azimuth"),
    field(
        "rho11",
        Kind::Open(0.0, 1.0),
        Some("0.5"),
        "rho11 chart: excited population",
    ),
    field("z", Kind::Open(-1.0, 1.0), Some("0"), "bloch_z chart: inversion"),
];

// ---------------------------------------------------------------------------
// Resolution

/// A problem with the configuration, located in the file or on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: String,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.location, self.field, self.message)
    }
}

/// A config file's path and contents.
#[derive(Debug, Clone)]
pub struct Source {
    pub path: String,
    pub text: String,
}

/// Everything that feeds a [`RunConfig`]: an optional file, the subcommand's
/// scenario and the flags given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Input {
    pub file: Option<Source>,
    pub scenario: Option<Scenario>,
    /// `(key, value, flag)` for every parameter flag given.
    pub params: Vec<(&'static str, Value, String)>,
    pub output: Option<String>,
    pub sweep: Option<String>,
    pub no_csv: bool,
    pub no_json: bool,
    pub no_svg: bool,
    pub require_sweep: bool,
}

const DEFAULT_OUTPUT: &str = "qsl-out";

#[derive(Default)]
struct Diags(Vec<Diagnostic>);

impl Diags {
    fn add(&mut self, location: String, field: &str, message: String) {
        self.0.push(Diagnostic {
            location,
            field: field.to_string(),
            message,
        });
    }

    fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

struct Locator<'a> {
    file: Option<&'a Source>,
}

impl Locator<'_> {
    /// `path:line` of the first occurrence of `"key"`, or the bare path.
    fn key(&self, key: &str) -> String {
        match self.file {
            None => "config".into(),
            Some(src) => {
                let needle = format!("\"{key}\"");
                match src.text.lines().position(|l| l.contains(&needle)) {
                    Some(k) => format!("{}:{}", src.path, k + 1),
                    None => src.path.clone(),
                }
            }
        }
    }
}

/// Diagnostics for `input`; empty exactly when [`resolve`] succeeds.
pub fn validate(input: &Input) -> Vec<Diagnostic> {
    resolve(input).err().unwrap_or_default()
}

/// Merges file and flags, checks every field and fills in defaults.
pub fn resolve(input: &Input) -> std::result::Result<RunConfig, Vec<Diagnostic>> {
    let loc = Locator {
        file: input.file.as_ref(),
    };
    let mut diags = Diags::default();

    let mut root = Map::new();
    if let Some(src) = &input.file {
        match serde_json::from_str::<Value>(&src.text) {
            Err(e) => {
                diags.add(
                    format!("{}:{}:{}", src.path, e.line(), e.column()),
                    "(file)",
                    format!("invalid JSON: {e}"),
                );
                return Err(diags.0);
            }
            Ok(Value::Object(mut m)) => {
                // a report.json carries its resolved config under "config"
                if !m.contains_key("scenario") {
                    if let Some(Value::Object(inner)) = m.remove("config") {
                        m = inner;
                    }
                }
                root = m;
            }
            Ok(_) => {
                diags.add(src.path.clone(), "(file)", "top level must be a JSON object".into());
                return Err(diags.0);
            }
        }
    }
    for key in root.keys() {
        if !["scenario", "params", "output", "emit", "sweep"].contains(&key.as_str()) {
            diags.add(
                loc.key(key),
                key,
                "unknown key; expected scenario, params, output, emit or sweep".into(),
            );
        }
    }

    let file_scenario = match root.get("scenario") {
        None => None,
        Some(v) => match v.as_str().and_then(Scenario::parse) {
            Some(s) => Some(s),
            None => {
                diags.add(
                    loc.key("scenario"),
                    "scenario",
                    format!("must be one of lz, transport, jc, metric, got {v}"),
                );
                return Err(diags.0);
            }
        },
    };
    let scenario = match (input.scenario, file_scenario) {
        (Some(a), Some(b)) if a != b => {
            diags.add(
                loc.key("scenario"),
                "scenario",
                format!("config file declares {} but the subcommand is {}", b.name(), a.name()),
            );
            return Err(diags.0);
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => {
            diags.add(
                "config".into(),
                "scenario",
                "missing; name one of lz, transport, jc, metric".into(),
            );
            return Err(diags.0);
        }
    };
    let schema = scenario.schema();

    // parameter block: file values, then flags on top
    let mut params = match root.get("params") {
        None => Map::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(other) => {
            diags.add(loc.key("params"), "params", format!("must be an object, got {other}"));
            Map::new()
        }
    };
    let mut flag_of = std::collections::BTreeMap::new();
    for (key, value, flag) in &input.params {
        params.insert((*key).to_string(), value.clone());
        flag_of.insert(*key, flag.clone());
    }
    let where_is = |key: &str| flag_of.get(key).cloned().unwrap_or_else(|| loc.key(key));
    for key in params.keys() {
        if !schema.iter().any(|f| f.name == key) {
            let known: Vec<&str> = schema.iter().map(|f| f.name).collect();
            diags.add(
                where_is(key),
                &format!("params.{key}"),
                format!(
                    "unknown {} parameter; expected one of {}",
                    scenario.name(),
                    known.join(", ")
                ),
            );
        }
    }
    let mut resolved = Map::new();
    for f in schema {
        match (params.get(f.name), f.default) {
            (Some(v), _) => {
                if let Some(msg) = f.kind.check(v) {
                    diags.add(where_is(f.name), &format!("params.{}", f.name), msg);
                }
                resolved.insert(f.name.into(), v.clone());
            }
            (None, Some(text)) => {
                resolved.insert(
                    f.name.into(),
                    serde_json::from_str(text).expect("schema default is JSON"),
                );
            }
            (None, None) => diags.add(
                loc.key("params"),
                &format!("params.{}", f.name),
                format!("missing required {} parameter ({})", scenario.name(), f.help),
            ),
        }
    }

    let output = match (&input.output, root.get("output")) {
        (Some(o), _) => o.clone(),
        (None, None) => DEFAULT_OUTPUT.into(),
        (None, Some(Value::String(s))) if !s.is_empty() => s.clone(),
        (None, Some(other)) => {
            diags.add(
                loc.key("output"),
                "output",
                format!("must be a non-empty path string, got {other}"),
            );
            DEFAULT_OUTPUT.into()
        }
    };

    let mut emit = Emit::default();
    match root.get("emit") {
        None => {}
        Some(Value::Object(m)) => {
            for (k, v) in m {
                let slot = match k.as_str() {
                    "csv" => &mut emit.csv,
                    "json" => &mut emit.json,
                    "svg" => &mut emit.svg,
                    _ => {
                        diags.add(
                            loc.key(k),
                            &format!("emit.{k}"),
                            "unknown key; expected csv, json or svg".into(),
                        );
                        continue;
                    }
                };
                match v.as_bool() {
                    Some(b) => *slot = b,
                    None => diags.add(
                        loc.key(k),
                        &format!("emit.{k}"),
                        format!("expected true or false, got {v}"),
                    ),
                }
            }
        }
        Some(other) => diags.add(loc.key("emit"), "emit", format!("must be an object, got {other}")),
    }
    emit.csv &= !input.no_csv;
    emit.json &= !input.no_json;
    emit.svg &= !input.no_svg;

    let (sweep, sweep_at) = match (&input.sweep, root.get("sweep")) {
        (Some(s), _) => (Some(s.clone()), "--sweep".to_string()),
        (None, None | Some(Value::Null)) => (None, String::new()),
        (None, Some(Value::String(s))) => (Some(s.clone()), loc.key("sweep")),
        (None, Some(other)) => {
            diags.add(
                loc.key("sweep"),
                "sweep",
                format!("must be a string name=min:max:count:linear|log, got {other}"),
            );
            (None, String::new())
        }
    };
    if let Some(text) = &sweep {
        match SweepSpec::parse(text) {
            Err(msg) => diags.add(sweep_at.clone(), "sweep", msg),
            Ok(spec) => match schema.iter().find(|f| f.name == spec.parameter) {
                None => diags.add(
                    sweep_at.clone(),
                    "sweep",
                    format!(
                        "parameter {:?} does not exist in the {} block",
                        spec.parameter,
                        scenario.name()
                    ),
                ),
                Some(f) if !f.kind.is_float() => diags.add(
                    sweep_at.clone(),
                    "sweep",
                    format!("parameter {:?} is not a real-valued field", spec.parameter),
                ),
                Some(f) => {
                    for end in [spec.min, spec.max] {
                        if let Some(msg) = f.kind.check(&number(end)) {
                            diags.add(sweep_at.clone(), "sweep", format!("range end for {}: {msg}", f.name));
                        }
                    }
                }
            },
        }
    } else if input.require_sweep {
        diags.add(
            "config".into(),
            "sweep",
            "the sweep subcommand needs a sweep spec".into(),
        );
    }

    if diags.is_empty() {
        cross_checks(scenario, &resolved, &where_is, &mut diags);
    }
    if diags.is_empty() {
        Ok(RunConfig {
            scenario,
            params: resolved,
            output,
            emit,
            sweep,
        })
    } else {
        Err(diags.0)
    }
}

/// Constraints spanning several fields.
fn cross_checks(scenario: Scenario, p: &Map<String, Value>, where_is: &dyn Fn(&str) -> String, diags: &mut Diags) {
    let num = |k: &str| p[k].as_f64();
    match scenario {
        Scenario::Lz => {
            if p["protocol"] == "optimal" {
                match num("chitau") {
                    None => diags.add(
                        where_is("chitau"),
                        "params.chitau",
                        "the optimal protocol needs a target chitau".into(),
                    ),
                    Some(t) if Some(t) == num("chi0") => {
                        diags.add(where_is("chitau"), "params.chitau", "must differ from chi0".into())
                    }
                    _ => {}
                }
            }
            if num("dt") > num("tmax") {
                diags.add(where_is("dt"), "params.dt", "must not exceed tmax".into());
            }
        }
        Scenario::Transport => {
            if num("k2_min") > num("k2_max") {
                diags.add(where_is("k2_min"), "params.k2_min", "must not exceed k2_max".into());
            }
        }
        Scenario::Jc | Scenario::Metric => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> Input {
        Input {
            file: Some(Source {
                path: "run.json".into(),
                text: text.into(),
            }),
            ..Input::default()
        }
    }

    #[test]
    fn missing_required_field_names_it() {
        let d = validate(&file(
            r#"{"scenario": "lz", "params": {"c": 0.5, "chi0": 0.7, "chitau": 2.0}}"#,
        ));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "params.v");
    }

    #[test]
    fn negative_depth_is_a_range_error() {
        let d = validate(&file(
            "{\n  \"scenario\": \"transport\",\n  \"params\": {\n    \"U0\": -3\n  }\n}",
        ));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "params.U0");
        assert_eq!(d[0].location, "run.json:4");
        assert!(d[0].message.contains("> 0"));
    }

    #[test]
    fn valid_config_has_no_diagnostics() {
        let d = validate(&file(r#"{"scenario": "jc", "params": {"gamma0": 0.01, "lambda0": 1}}"#));
        assert!(d.is_empty(), "{d:?}");
    }

    #[test]
    fn flags_override_file_values() {
        let mut input = file(r#"{"scenario": "jc", "params": {"gamma0": 0.01, "lambda0": 1}}"#);
        input.params.push(("gamma0", number(5.0), "--gamma0".into()));
        let cfg = resolve(&input).unwrap();
        assert_eq!(cfg.num("gamma0"), 5.0);
        assert_eq!(cfg.num("lambda0"), 1.0);
    }

    #[test]
    fn flag_errors_point_at_the_flag() {
        let input = Input {
            scenario: Some(Scenario::Jc),
            params: vec![
                ("gamma0", number(-1.0), "--gamma0".into()),
                ("lambda0", number(1.0), "--lambda0".into()),
            ],
            ..Input::default()
        };
        let d = validate(&input);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].location, "--gamma0");
    }

    #[test]
    fn sweep_parameter_must_exist() {
        let mut input = file(r#"{"scenario": "transport"}"#);
        input.sweep = Some("distance=1:2:3:linear".into());
        let d = validate(&input);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("does not exist"));
    }

    #[test]
    fn scenario_mismatch_is_reported() {
        let mut input = file(r#"{"scenario": "jc", "params": {"gamma0": 1, "lambda0": 1}}"#);
        input.scenario = Some(Scenario::Lz);
        assert_eq!(validate(&input)[0].field, "scenario");
    }

    #[test]
    fn json_syntax_errors_carry_line_and_column() {
        let d = validate(&file("{\n  \"scenario\": \"jc\",\n  oops\n}"));
        assert!(d[0].location.starts_with("run.json:3:"), "{}", d[0].location);
    }

    #[test]
    fn sweep_values_hit_both_ends() {
        let lin = SweepSpec::parse("d=5:30:6:linear").unwrap().values();
        assert_eq!(lin, vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        let log = SweepSpec::parse("gamma0=0.01:100:5:log").unwrap().values();
        assert_eq!(log.len(), 5);
        assert_eq!(log[0], 0.01);
        assert_eq!(log[4], 100.0);
        assert!((log[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_sweep_specs_are_rejected() {
        for s in [
            "d",
            "d=1:2:3",
            "d=2:1:3:linear",
            "d=0:1:3:log",
            "d=1:2:0:linear",
            "d=1:2:3:cubic",
        ] {
            assert!(SweepSpec::parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn report_wrapper_is_unwrapped() {
        let cfg = resolve(&file(r#"{"scenario": "jc", "params": {"gamma0": 0.5, "lambda0": 1}}"#)).unwrap();
        let report = serde_json::json!({ "config": cfg, "results": {} });
        let again = resolve(&file(&report.to_string())).unwrap();
        assert_eq!(again, cfg);
    }
}
