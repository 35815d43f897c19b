//! Scenario files.
//!
//! A scenario is a TOML document. Every section is optional except
//! `[initial]`; missing keys take the documented defaults. Parsing walks the
//! whole document and reports every problem it finds, each tagged with the
//! dotted path of the offending field.

use std::fmt;
use std::path::{Path, PathBuf};

use peakflow::diagnostics::{ProbeSpec, SnapshotPlan};
use peakflow::integrator::{IntegratorConfig, IntegratorMode};
use peakflow::profile::{InitialData, Tabulated};
use peakflow::state::{Family, GridSpec, ModelParams};
use peakflow::studies::{Case, Rung};
use serde::Serialize;
use toml::{Table, Value};

pub const DEFAULT_HALF_WIDTH: f64 = 40.0;
pub const DEFAULT_NODES: usize = 8192;
pub const DEFAULT_CADENCE: f64 = 0.1;
pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

/// All problems found in one scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl ConfigError {
    pub fn single(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { issues: vec![ConfigIssue { path: path.into(), reason: reason.into() }] }
    }

    pub fn mentions(&self, path: &str) -> bool {
        self.issues.iter().any(|i| i.path == path)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.issues.len();
        writeln!(f, "{n} configuration error{}:", if n == 1 { "" } else { "s" })?;
        for issue in &self.issues {
            writeln!(f, "  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// A parameter varied by `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParameter {
    #[serde(rename = "initial.c")]
    PeakonSpeed,
    #[serde(rename = "initial.amplitude")]
    Amplitude,
    #[serde(rename = "initial.width")]
    Width,
    #[serde(rename = "model.kappa")]
    Kappa,
    #[serde(rename = "grid.N")]
    Nodes,
    #[serde(rename = "integrator.dt")]
    Dt,
}

impl SweepParameter {
    pub const ALL: [(&'static str, SweepParameter); 6] = [
        ("initial.c", SweepParameter::PeakonSpeed),
        ("initial.amplitude", SweepParameter::Amplitude),
        ("initial.width", SweepParameter::Width),
        ("model.kappa", SweepParameter::Kappa),
        ("grid.N", SweepParameter::Nodes),
        ("integrator.dt", SweepParameter::Dt),
    ];

    pub fn key(self) -> &'static str {
        Self::ALL.iter().find(|(_, p)| *p == self).map(|(k, _)| *k).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Where the initial data came from, as echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialSource {
    Zero,
    Peakon { c: f64 },
    Gaussian { amplitude: f64, width: f64 },
    Breaking { amplitude: f64 },
    Custom { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub source: InitialSource,
    #[serde(skip)]
    pub initial: InitialData,
    pub params: ModelParams,
    pub grid: GridSpec,
    pub integrator: IntegratorConfig,
    pub plan: SnapshotPlan,
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
    pub ladder: Vec<Rung>,
    pub delta: f64,
    pub sweep: Option<Sweep>,
}

impl Scenario {
    pub fn case(&self) -> Case {
        Case { initial: self.initial.clone(), params: self.params, grid: self.grid, integrator: self.integrator, plan: self.plan.clone() }
    }

    /// Copy with one sweep parameter replaced.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Result<Scenario, ConfigError> {
        let mut s = self.clone();
        let bad = |path: &str, why: &str| Err(ConfigError::single(path, why));
        match (parameter, &mut s.initial) {
            (SweepParameter::PeakonSpeed, InitialData::Peakon { c }) => *c = value,
            (SweepParameter::Amplitude, InitialData::Gaussian { amplitude, .. })
            | (SweepParameter::Amplitude, InitialData::Breaking { amplitude }) => *amplitude = value,
            (SweepParameter::Width, InitialData::Gaussian { width, .. }) if value > 0.0 => *width = value,
            (SweepParameter::Width, InitialData::Gaussian { .. }) => return bad("sweep.values", "widths must be positive"),
            (SweepParameter::Kappa, _) if s.params.family == Family::CamassaHolm => {
                s.params = ModelParams { kappa: value, coeff_a: 2.0 * value, ..s.params };
            }
            (SweepParameter::Nodes, _) => {
                if value.fract() != 0.0 || value < 4.0 {
                    return bad("sweep.values", "node counts must be integers >= 4");
                }
                s.grid.nodes = value as usize;
            }
            (SweepParameter::Dt, _) => {
                s.integrator.dt = value;
                if let Err(e) = s.integrator.validate() {
                    return bad("sweep.values", &e.to_string());
                }
            }
            (p, _) => return bad("sweep.parameter", &format!("{} does not apply to this initial data", p.key())),
        }
        s.source = source_of(&s.initial, &s.source);
        Ok(s)
    }
}

fn source_of(data: &InitialData, previous: &InitialSource) -> InitialSource {
    match data {
        InitialData::Zero => InitialSource::Zero,
        InitialData::Peakon { c } => InitialSource::Peakon { c: *c },
        InitialData::Gaussian { amplitude, width } => InitialSource::Gaussian { amplitude: *amplitude, width: *width },
        InitialData::Breaking { amplitude } => InitialSource::Breaking { amplitude: *amplitude },
        InitialData::Custom(_) => previous.clone(),
    }
}

/// Walks a TOML tree, accumulating issues instead of stopping at the first.
struct Reader {
    issues: Vec<ConfigIssue>,
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "a string",
        Value::Integer(_) => "an integer",
        Value::Float(_) => "a float",
        Value::Boolean(_) => "a boolean",
        Value::Datetime(_) => "a datetime",
        Value::Array(_) => "an array",
        Value::Table(_) => "a table",
    }
}

fn nearest<'a>(key: &str, allowed: &[&'a str]) -> Option<&'a str> {
    allowed
        .iter()
        .map(|k| (strsim::jaro_winkler(&key.to_lowercase(), &k.to_lowercase()), *k))
        .filter(|(score, _)| *score >= 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k)
}

impl Reader {
    fn issue(&mut self, path: impl Into<String>, reason: impl Into<String>) {
        self.issues.push(ConfigIssue { path: path.into(), reason: reason.into() });
    }

    fn check_keys(&mut self, table: &Table, prefix: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let hint = match nearest(key, allowed) {
                    Some(k) => format!("unknown key; did you mean `{}`?", join(prefix, k)),
                    None => format!("unknown key; valid keys are {}", allowed.join(", ")),
                };
                self.issue(join(prefix, key), hint);
            }
        }
    }

    fn section<'a>(&mut self, root: &'a Table, key: &str) -> Option<&'a Table> {
        match root.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(other) => {
                self.issue(key, format!("expected a table, found {}", type_name(other)));
                None
            }
        }
    }

    fn float(&mut self, table: &Table, prefix: &str, key: &str) -> Option<f64> {
        match table.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.issue(join(prefix, key), format!("expected a number, found {}", type_name(other)));
                None
            }
        }
    }

    fn integer(&mut self, table: &Table, prefix: &str, key: &str) -> Option<i64> {
        match table.get(key)? {
            Value::Integer(i) => Some(*i),
            other => {
                self.issue(join(prefix, key), format!("expected an integer, found {}", type_name(other)));
                None
            }
        }
    }

    fn string<'a>(&mut self, table: &'a Table, prefix: &str, key: &str) -> Option<&'a str> {
        match table.get(key)? {
            Value::String(s) => Some(s),
            other => {
                self.issue(join(prefix, key), format!("expected a string, found {}", type_name(other)));
                None
            }
        }
    }

    fn positive(&mut self, table: &Table, prefix: &str, key: &str, default: f64) -> f64 {
        match self.float(table, prefix, key) {
            Some(v) if v > 0.0 && v.is_finite() => v,
            Some(v) => {
                self.issue(join(prefix, key), format!("must be positive and finite, got {v}"));
                default
            }
            None => default,
        }
    }

    fn require_float(&mut self, table: &Table, prefix: &str, key: &str) -> f64 {
        match self.float(table, prefix, key) {
            Some(v) if v.is_finite() => v,
            Some(v) => {
                self.issue(join(prefix, key), format!("must be finite, got {v}"));
                0.0
            }
            None => {
                if !table.contains_key(key) {
                    self.issue(join(prefix, key), "missing required key");
                }
                0.0
            }
        }
    }

    fn pair(&mut self, v: &Value, path: &str) -> Option<(f64, f64)> {
        let arr = match v {
            Value::Array(a) if a.len() == 2 => a,
            other => {
                self.issue(path, format!("expected a two-element array, found {}", type_name(other)));
                return None;
            }
        };
        let num = |v: &Value| match v {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        };
        match (num(&arr[0]), num(&arr[1])) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => {
                self.issue(path, "expected two numbers");
                None
            }
        }
    }
}

const ROOT_KEYS: &[&str] =
    &["name", "initial", "model", "grid", "integrator", "diagnostics", "output", "convergence", "dependence", "sweep"];

/// Parses a scenario. Relative custom data paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<Scenario, ConfigError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        let reason = e.message().to_string();
        let at = match e.span() {
            Some(span) => format!("line {}", text[..span.start.min(text.len())].lines().count().max(1)),
            None => "document".to_string(),
        };
        ConfigError::single(at, reason)
    })?;
    let mut r = Reader { issues: Vec::new() };
    r.check_keys(&root, "", ROOT_KEYS);

    let name = r.string(&root, "", "name").unwrap_or("scenario").to_string();
    if name.is_empty() || name.contains(['/', '\\']) {
        r.issue("name", "must be non-empty and contain no path separators");
    }

    let (initial, source) = parse_initial(&mut r, &root, base_dir);
    let params = parse_model(&mut r, &root);
    let grid = parse_grid(&mut r, &root);
    let integrator = parse_integrator(&mut r, &root);
    let (plan, output_dir) = parse_plan(&mut r, &root, &initial);
    let ladder = parse_ladder(&mut r, &root, &integrator);

    let mut delta = DEFAULT_DELTA;
    if let Some(t) = r.section(&root, "dependence") {
        r.check_keys(t, "dependence", &["delta"]);
        if let Some(d) = r.float(t, "dependence", "delta") {
            if d.is_finite() {
                delta = d;
            } else {
                r.issue("dependence.delta", "must be finite");
            }
        }
    }
    let sweep = parse_sweep(&mut r, &root);

    if !r.issues.is_empty() {
        return Err(ConfigError { issues: r.issues });
    }
    let scenario = Scenario {
        name,
        source,
        initial: initial.expect("initial data parsed without issues"),
        params,
        grid,
        integrator,
        plan,
        output_dir,
        ladder,
        delta,
        sweep,
    };
    if let Some(sw) = &scenario.sweep {
        for &v in &sw.values {
            scenario.with_parameter(sw.parameter, v)?;
        }
    }
    Ok(scenario)
}

fn parse_initial(r: &mut Reader, root: &Table, base_dir: &Path) -> (Option<InitialData>, InitialSource) {
    let fallback = (None, InitialSource::Zero);
    let Some(t) = r.section(root, "initial") else {
        if !root.contains_key("initial") {
            r.issue("initial", "missing required section");
        }
        return fallback;
    };
    let Some(kind) = r.string(t, "initial", "kind") else {
        if !t.contains_key("kind") {
            r.issue("initial.kind", "missing required key");
        }
        return fallback;
    };
    match kind {
        "zero" => {
            r.check_keys(t, "initial", &["kind"]);
            (Some(InitialData::Zero), InitialSource::Zero)
        }
        "peakon" => {
            r.check_keys(t, "initial", &["kind", "c"]);
            let c = r.require_float(t, "initial", "c");
            (Some(InitialData::Peakon { c }), InitialSource::Peakon { c })
        }
        "gaussian" => {
            r.check_keys(t, "initial", &["kind", "amplitude", "width"]);
            let amplitude = r.require_float(t, "initial", "amplitude");
            let width = r.positive(t, "initial", "width", 1.0);
            (Some(InitialData::Gaussian { amplitude, width }), InitialSource::Gaussian { amplitude, width })
        }
        "breaking" => {
            r.check_keys(t, "initial", &["kind", "amplitude"]);
            let amplitude = r.require_float(t, "initial", "amplitude");
            (Some(InitialData::Breaking { amplitude }), InitialSource::Breaking { amplitude })
        }
        "custom" => {
            r.check_keys(t, "initial", &["kind", "path"]);
            let Some(path) = r.string(t, "initial", "path") else {
                if !t.contains_key("path") {
                    r.issue("initial.path", "missing required key");
                }
                return fallback;
            };
            let source = InitialSource::Custom { path: PathBuf::from(path) };
            match load_custom(&base_dir.join(path)) {
                Ok(tab) => (Some(InitialData::Custom(tab)), source),
                Err(reason) => {
                    r.issue("initial.path", reason);
                    fallback
                }
            }
        }
        other => {
            let kinds = ["zero", "peakon", "gaussian", "breaking", "custom"];
            let hint = nearest(other, &kinds).map(|k| format!("; did you mean `{k}`?")).unwrap_or_default();
            r.issue("initial.kind", format!("unknown kind `{other}`, expected one of {}{hint}", kinds.join(", ")));
            fallback
        }
    }
}

/// Reads `x, u[, u']` rows. A header row is skipped when its first cell is not a number.
pub fn load_custom(path: &Path) -> Result<Tabulated, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let (mut xs, mut us, mut dus) = (Vec::new(), Vec::new(), Vec::new());
    let mut width = None;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("{}: {e}", path.display()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(row as u64 + 1);
        if row == 0 && record.get(0).is_some_and(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        if !(record.len() == 2 || record.len() == 3) {
            return Err(format!("{} line {line}: expected 2 or 3 columns (x, u, u'), found {}", path.display(), record.len()));
        }
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(format!("{} line {line}: column count changed", path.display()));
        }
        let mut vals = Vec::with_capacity(3);
        for cell in record.iter() {
            vals.push(cell.parse::<f64>().map_err(|_| format!("{} line {line}: `{cell}` is not a number", path.display()))?);
        }
        xs.push(vals[0]);
        us.push(vals[1]);
        if let Some(d) = vals.get(2) {
            dus.push(*d);
        }
    }
    let dus = if width == Some(3) { Some(dus) } else { None };
    Tabulated::new(xs, us, dus).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_model(r: &mut Reader, root: &Table) -> ModelParams {
    let Some(t) = r.section(root, "model") else {
        return ModelParams::camassa_holm(0.0);
    };
    r.check_keys(t, "model", &["family", "kappa", "coeff_a", "coeff_b", "coeff_c"]);
    let family = match r.string(t, "model", "family") {
        None | Some("CH") => Family::CamassaHolm,
        Some("DP") => Family::DegasperisProcesi,
        Some(other) => {
            r.issue("model.family", format!("expected `CH` or `DP`, found `{other}`"));
            Family::CamassaHolm
        }
    };
    let kappa = r.float(t, "model", "kappa").unwrap_or(0.0);
    if !kappa.is_finite() {
        r.issue("model.kappa", "must be finite");
    }
    let base = ModelParams::for_family(family, kappa);
    let mut coeff = |key: &str, default: f64| match r.float(t, "model", key) {
        Some(v) if v.is_finite() => v,
        Some(_) => {
            r.issue(join("model", key), "must be finite");
            default
        }
        None => default,
    };
    let (a, b, c) = (coeff("coeff_a", base.coeff_a), coeff("coeff_b", base.coeff_b), coeff("coeff_c", base.coeff_c));
    base.with_coefficients(a, b, c)
}

fn parse_grid(r: &mut Reader, root: &Table) -> GridSpec {
    let default = GridSpec { half_width: DEFAULT_HALF_WIDTH, nodes: DEFAULT_NODES };
    let Some(t) = r.section(root, "grid") else {
        return default;
    };
    r.check_keys(t, "grid", &["L", "N"]);
    let half_width = r.positive(t, "grid", "L", DEFAULT_HALF_WIDTH);
    let nodes = match r.integer(t, "grid", "N") {
        Some(n) if n >= 4 => n as usize,
        Some(n) => {
            r.issue("grid.N", format!("must be at least 4, got {n}"));
            DEFAULT_NODES
        }
        None => DEFAULT_NODES,
    };
    GridSpec { half_width, nodes }
}

fn parse_integrator(r: &mut Reader, root: &Table) -> IntegratorConfig {
    let mut cfg = IntegratorConfig::default();
    let Some(t) = r.section(root, "integrator") else {
        return cfg;
    };
    let p = "integrator";
    r.check_keys(t, p, &["mode", "dt", "horizon", "picard_sweeps", "breakdown_rho", "max_slope_guard"]);
    match r.string(t, p, "mode") {
        None | Some("rk4") => {}
        Some("picard") => cfg.mode = IntegratorMode::Picard,
        Some(other) => r.issue("integrator.mode", format!("expected `rk4` or `picard`, found `{other}`")),
    }
    if let Some(dt) = r.float(t, p, "dt") {
        if dt != 0.0 && dt.is_finite() {
            cfg.dt = dt;
        } else {
            r.issue("integrator.dt", format!("must be finite and nonzero, got {dt}"));
        }
    }
    cfg.horizon = r.positive(t, p, "horizon", cfg.horizon);
    if cfg.dt.abs() > cfg.horizon {
        r.issue("integrator.dt", format!("|dt| = {} exceeds the horizon {}", cfg.dt.abs(), cfg.horizon));
    }
    match r.integer(t, p, "picard_sweeps") {
        Some(n) if n >= 1 => cfg.picard_sweeps = n as usize,
        Some(n) => r.issue("integrator.picard_sweeps", format!("must be at least 1, got {n}")),
        None => {}
    }
    if let Some(rho) = r.float(t, p, "breakdown_rho") {
        if rho > 0.0 && rho < 1.0 {
            cfg.breakdown_rho = rho;
        } else {
            r.issue("integrator.breakdown_rho", format!("must lie in (0, 1), got {rho}"));
        }
    }
    cfg.max_slope_guard = r.positive(t, p, "max_slope_guard", cfg.max_slope_guard);
    cfg
}

fn parse_plan(r: &mut Reader, root: &Table, initial: &Option<InitialData>) -> (SnapshotPlan, Option<PathBuf>) {
    let mut plan = SnapshotPlan { cadence: Some(DEFAULT_CADENCE), ..Default::default() };
    if let Some(InitialData::Peakon { c }) = initial {
        plan.peakon_speed = Some(*c);
    }
    let mut output_dir = None;
    if let Some(t) = r.section(root, "output") {
        r.check_keys(t, "output", &["dir", "cadence"]);
        output_dir = r.string(t, "output", "dir").map(PathBuf::from);
        if t.contains_key("cadence") {
            plan.cadence = Some(r.positive(t, "output", "cadence", DEFAULT_CADENCE));
        }
    }
    let Some(t) = r.section(root, "diagnostics") else {
        return (plan, output_dir);
    };
    let p = "diagnostics";
    r.check_keys(t, p, &["decay", "peakon_error", "probes"]);
    match t.get("peakon_error") {
        None => {}
        Some(Value::Boolean(false)) => plan.peakon_speed = None,
        Some(Value::Boolean(true)) if plan.peakon_speed.is_none() => {
            r.issue("diagnostics.peakon_error", "needs peakon initial data");
        }
        Some(Value::Boolean(true)) => {}
        Some(other) => r.issue("diagnostics.peakon_error", format!("expected a boolean, found {}", type_name(other))),
    }
    match t.get("decay") {
        None => {}
        Some(Value::Array(items)) => {
            for (k, item) in items.iter().enumerate() {
                let path = format!("diagnostics.decay[{k}]");
                if let Some((theta, m)) = r.pair(item, &path) {
                    if !(theta > 0.0 && theta < 1.0) {
                        r.issue(&path, format!("theta must lie in (0, 1), got {theta}"));
                    } else if !(m >= 1.0 && m.fract() == 0.0 && m <= u32::MAX as f64) {
                        r.issue(&path, format!("m must be a positive integer, got {m}"));
                    } else {
                        plan.decay.push((theta, m as u32));
                    }
                }
            }
        }
        Some(other) => r.issue("diagnostics.decay", format!("expected an array of [theta, m] pairs, found {}", type_name(other))),
    }
    match t.get("probes") {
        None => {}
        Some(Value::Array(items)) => {
            for (k, item) in items.iter().enumerate() {
                let path = format!("diagnostics.probes[{k}]");
                let Value::Table(pt) = item else {
                    r.issue(&path, format!("expected a table, found {}", type_name(item)));
                    continue;
                };
                r.check_keys(pt, &path, &["id", "start", "end", "order"]);
                let id = r.string(pt, &path, "id").map(str::to_string).unwrap_or_else(|| format!("probe{k}"));
                let start = r.require_float(pt, &path, "start");
                let end = r.require_float(pt, &path, "end");
                if !(end > start) {
                    r.issue(join(&path, "end"), format!("must exceed start ({start}), got {end}"));
                }
                let order = match r.integer(pt, &path, "order") {
                    None => 2,
                    Some(o @ (2 | 3)) => o as u8,
                    Some(o) => {
                        r.issue(join(&path, "order"), format!("must be 2 or 3, got {o}"));
                        2
                    }
                };
                if plan.probes.iter().any(|p: &ProbeSpec| p.id == id) {
                    r.issue(join(&path, "id"), format!("duplicate probe id `{id}`"));
                }
                plan.probes.push(ProbeSpec { id, start, end, order });
            }
        }
        Some(other) => r.issue("diagnostics.probes", format!("expected an array of tables, found {}", type_name(other))),
    }
    (plan, output_dir)
}

fn parse_ladder(r: &mut Reader, root: &Table, integrator: &IntegratorConfig) -> Vec<Rung> {
    let Some(t) = r.section(root, "convergence") else {
        return Vec::new();
    };
    r.check_keys(t, "convergence", &["ladder"]);
    let mut ladder = Vec::new();
    match t.get("ladder") {
        None => r.issue("convergence.ladder", "missing required key"),
        Some(Value::Array(items)) => {
            for (k, item) in items.iter().enumerate() {
                let path = format!("convergence.ladder[{k}]");
                if let Some((n, dt)) = r.pair(item, &path) {
                    if !(n >= 4.0 && n.fract() == 0.0) {
                        r.issue(&path, format!("N must be an integer >= 4, got {n}"));
                    } else if !(dt != 0.0 && dt.is_finite() && dt.abs() <= integrator.horizon) {
                        r.issue(&path, format!("dt must be nonzero and at most the horizon, got {dt}"));
                    } else {
                        ladder.push(Rung { nodes: n as usize, dt });
                    }
                }
            }
            let sorted = ladder.windows(2).all(|p| p[1].nodes >= p[0].nodes && p[1].dt.abs() <= p[0].dt.abs() && p[1] != p[0]);
            if !sorted {
                r.issue("convergence.ladder", "rungs must be sorted from coarse to fine");
            }
        }
        Some(other) => r.issue("convergence.ladder", format!("expected an array of [N, dt] pairs, found {}", type_name(other))),
    }
    ladder
}

fn parse_sweep(r: &mut Reader, root: &Table) -> Option<Sweep> {
    let t = r.section(root, "sweep")?;
    r.check_keys(t, "sweep", &["parameter", "values"]);
    let keys: Vec<&str> = SweepParameter::ALL.iter().map(|(k, _)| *k).collect();
    let parameter = match r.string(t, "sweep", "parameter") {
        Some(name) => match SweepParameter::ALL.iter().find(|(k, _)| *k == name) {
            Some((_, p)) => Some(*p),
            None => {
                let hint = nearest(name, &keys).map(|k| format!("; did you mean `{k}`?")).unwrap_or_default();
                r.issue("sweep.parameter", format!("cannot sweep `{name}`{hint}"));
                None
            }
        },
        None => {
            if !t.contains_key("parameter") {
                r.issue("sweep.parameter", "missing required key");
            }
            None
        }
    };
    let mut values = Vec::new();
    match t.get("values") {
        Some(Value::Array(items)) if !items.is_empty() => {
            for (k, item) in items.iter().enumerate() {
                match item {
                    Value::Float(f) if f.is_finite() => values.push(*f),
                    Value::Integer(i) => values.push(*i as f64),
                    other => r.issue(format!("sweep.values[{k}]"), format!("expected a finite number, found {}", type_name(other))),
                }
            }
        }
        Some(Value::Array(_)) => r.issue("sweep.values", "must not be empty"),
        Some(other) => r.issue("sweep.values", format!("expected an array, found {}", type_name(other))),
        None => r.issue("sweep.values", "missing required key"),
    }
    Some(Sweep { parameter: parameter?, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scenario, ConfigError> {
        parse_config(text, Path::new("."))
    }

    #[test]
    fn minimal_peakon_gets_defaults() {
        let s = parse("[initial]\nkind = \"peakon\"\nc = 1.0\n").unwrap();
        assert_eq!(s.grid, GridSpec { half_width: 40.0, nodes: 8192 });
        assert_eq!(s.integrator, IntegratorConfig::default());
        assert_eq!(s.integrator.mode, IntegratorMode::Rk4);
        assert_eq!(s.integrator.dt, 1e-3);
        assert_eq!(s.params, ModelParams::camassa_holm(0.0));
        assert_eq!(s.plan.peakon_speed, Some(1.0));
        assert_eq!(s.plan.cadence, Some(0.1));
        assert_eq!(s.name, "scenario");
    }

    #[test]
    fn zero_nodes_names_the_field() {
        let err = parse("[initial]\nkind = \"zero\"\n[grid]\nN = 0\n").unwrap_err();
        assert!(err.mentions("grid.N"), "{err}");
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let err = parse("[initial]\nkind = \"zero\"\n[integrator]\nhorizn = 2.0\n").unwrap_err();
        assert!(err.mentions("integrator.horizn"));
        assert!(err.to_string().contains("did you mean `integrator.horizon`"), "{err}");
        let err = parse("[initial]\nkind = \"zero\"\n[grd]\nN = 64\n").unwrap_err();
        assert!(err.to_string().contains("did you mean `grid`"), "{err}");
    }

    #[test]
    fn all_errors_are_reported() {
        let text = r#"
            [initial]
            kind = "gaussian"
            amplitude = "big"
            [grid]
            L = -1
            N = 2
            [integrator]
            dt = 0
            breakdown_rho = 2.0
        "#;
        let err = parse(text).unwrap_err();
        for path in ["initial.amplitude", "grid.L", "grid.N", "integrator.dt", "integrator.breakdown_rho"] {
            assert!(err.mentions(path), "missing {path} in {err}");
        }
    }

    #[test]
    fn missing_initial_section() {
        assert!(parse("name = \"x\"\n").unwrap_err().mentions("initial"));
        assert!(parse("[initial]\nkind = \"pekon\"\n").unwrap_err().to_string().contains("did you mean `peakon`"));
    }

    #[test]
    fn toml_syntax_error_names_a_line() {
        let err = parse("[initial]\nkind = \"zero\"\n[grid\n").unwrap_err();
        assert!(err.issues[0].path.starts_with("line 3"), "{err}");
    }

    #[test]
    fn full_document() {
        let text = r#"
            name = "dp-run"
            [initial]
            kind = "peakon"
            c = 0.5
            [model]
            family = "DP"
            [grid]
            L = 20
            N = 1024
            [integrator]
            mode = "picard"
            dt = 2e-3
            horizon = 0.5
            picard_sweeps = 3
            [diagnostics]
            decay = [[0.9, 50], [0.5, 10]]
            peakon_error = false
            probes = [{ id = "tail", start = 2.0, end = 6.0 }]
            [output]
            cadence = 0.05
            dir = "out"
            [convergence]
            ladder = [[256, 4e-3], [512, 2e-3]]
            [dependence]
            delta = 0.02
            [sweep]
            parameter = "initial.c"
            values = [0.5, 1, 1.5]
        "#;
        let s = parse(text).unwrap();
        assert_eq!(s.params, ModelParams::degasperis_procesi());
        assert_eq!(s.integrator.mode, IntegratorMode::Picard);
        assert_eq!(s.integrator.picard_sweeps, 3);
        assert_eq!(s.plan.decay, vec![(0.9, 50), (0.5, 10)]);
        assert_eq!(s.plan.peakon_speed, None);
        assert_eq!(s.plan.probes[0].order, 2);
        assert_eq!(s.ladder.len(), 2);
        assert_eq!(s.delta, 0.02);
        assert_eq!(s.sweep.as_ref().unwrap().values, vec![0.5, 1.0, 1.5]);
        assert_eq!(s.output_dir, Some(PathBuf::from("out")));
        let swept = s.with_parameter(SweepParameter::PeakonSpeed, 1.5).unwrap();
        assert_eq!(swept.initial, InitialData::Peakon { c: 1.5 });
    }

    #[test]
    fn bad_ladder_and_probe() {
        let text = r#"
            [initial]
            kind = "zero"
            [diagnostics]
            probes = [{ id = "p", start = 3.0, end = 1.0, order = 4 }]
            [convergence]
            ladder = [[512, 1e-3], [256, 1e-3]]
        "#;
        let err = parse(text).unwrap_err();
        assert!(err.mentions("diagnostics.probes[0].end"));
        assert!(err.mentions("diagnostics.probes[0].order"));
        assert!(err.mentions("convergence.ladder"));
    }

    #[test]
    fn sweep_parameter_must_fit_the_data() {
        let text = "[initial]\nkind = \"gaussian\"\namplitude = 1\n[sweep]\nparameter = \"initial.c\"\nvalues = [1]\n";
        assert!(parse(text).unwrap_err().mentions("sweep.parameter"));
    }
}
