//! Run configuration: a single TOML file plus `--set key=value` overrides.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use diffusivity_core::{
    ClampPolicy, FunctionSpec, Method, ProblemSpec, Relaxation, SolverOptions, SourceSpec, TimeGrid,
};
use toml::de::{DeTable, DeValue};
use toml::{Spanned, Table, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    /// 1-based line in the config file; `None` for overrides and missing keys.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{} (line {line}): {}", self.key, self.message),
            None if self.key.is_empty() => write!(f, "{}", self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    /// Measured flux as a `t,g` table, resolved against the config directory.
    pub g_csv: Option<PathBuf>,
    /// Uniform noise amplitude added to synthesized flux.
    pub noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IoConfig {
    pub out: PathBuf,
    pub x_points: usize,
    /// Requested snapshot times; each maps to the nearest grid node.
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub check: bool,
    pub x_count: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub scenario: Option<Scenario>,
    pub grid: TimeGrid,
    pub solver: SolverOptions,
    pub data: DataConfig,
    pub io: IoConfig,
    pub oracle: OracleConfig,
    pub t_min: f64,
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("", &["problem", "grid", "solver", "data", "io", "oracle", "closedform"]),
    ("problem", &["u1", "u2", "h", "f", "a_true", "a_floor", "scenario"]),
    ("problem.f", &["terms"]),
    ("grid", &["t_max", "n"]),
    (
        "solver",
        &[
            "modes",
            "tol",
            "max_iter",
            "method",
            "inversion_tol",
            "clamp_policy",
            "relaxation",
            "smoothing_window",
            "saturate",
        ],
    ),
    ("data", &["g_csv", "noise", "seed"]),
    ("io", &["out", "x_points", "snapshots"]),
    ("oracle", &["check", "x_count", "tolerance"]),
    ("closedform", &["t_min"]),
];

const FUNCTION_KEYS: &[&str] = &["kind", "params"];
const TERM_KEYS: &[&str] = &["space", "time"];

/// Maps dotted key paths to line numbers in the original source.
struct Locator {
    lines: Vec<(String, usize)>,
    overridden: BTreeSet<String>,
}

impl Locator {
    fn new(source: &str) -> Self {
        let mut lines = Vec::new();
        if let Ok(table) = DeTable::parse(source) {
            let line_of = |offset: usize| source[..offset.min(source.len())].matches('\n').count() + 1;
            collect_lines(table.get_ref(), "", &line_of, &mut lines);
        }
        Self {
            lines,
            overridden: BTreeSet::new(),
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        if self
            .overridden
            .iter()
            .any(|o| key == o || key.starts_with(&format!("{o}.")))
        {
            return None;
        }
        let mut probe = key;
        loop {
            if let Some((_, line)) = self.lines.iter().find(|(k, _)| k == probe) {
                return Some(*line);
            }
            probe = &probe[..probe.rfind(['.', '['])?];
        }
    }
}

fn collect_lines(table: &DeTable<'_>, prefix: &str, line_of: &dyn Fn(usize) -> usize, out: &mut Vec<(String, usize)>) {
    for (key, value) in table.iter() {
        let path = join(prefix, key.get_ref());
        out.push((path.clone(), line_of(key.span().start)));
        collect_value(value, &path, line_of, out);
    }
}

fn collect_value(
    value: &Spanned<DeValue<'_>>,
    path: &str,
    line_of: &dyn Fn(usize) -> usize,
    out: &mut Vec<(String, usize)>,
) {
    match value.get_ref() {
        DeValue::Table(t) => collect_lines(t, path, line_of, out),
        DeValue::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                let p = format!("{path}[{i}]");
                out.push((p.clone(), line_of(item.span().start)));
                collect_value(item, &p, line_of, out);
            }
        }
        _ => {}
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Reads `path`, applies `overrides` (`key=value`) and validates the result.
pub fn parse_config(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let source = std::fs::read_to_string(path).map_err(|e| ConfigError {
        key: String::new(),
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&source, overrides, base)
}

/// Parses config text; relative paths inside it resolve against `base`.
pub fn parse_config_str(source: &str, overrides: &[String], base: &Path) -> Result<RunConfig, ConfigError> {
    let mut root: Table = toml::from_str(source).map_err(|e| {
        let line = e
            .span()
            .map(|s| source[..s.start.min(source.len())].matches('\n').count() + 1);
        ConfigError {
            key: String::new(),
            line,
            message: format!("malformed TOML: {}", e.message()),
        }
    })?;
    let mut locator = Locator::new(source);
    for entry in overrides {
        let key = apply_override(&mut root, entry)?;
        locator.overridden.insert(key);
    }
    Reader {
        root: &root,
        locator: &locator,
        base,
    }
    .run_config()
}

fn apply_override(root: &mut Table, entry: &str) -> Result<String, ConfigError> {
    let (key, raw) = entry.split_once('=').ok_or_else(|| ConfigError {
        key: entry.to_string(),
        line: None,
        message: "override must have the form key=value".into(),
    })?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(ConfigError {
            key: key.to_string(),
            line: None,
            message: "empty segment in override key".into(),
        });
    }
    let mut table = root;
    for seg in &segments[..segments.len() - 1] {
        let slot = table
            .entry(seg.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        table = slot.as_table_mut().ok_or_else(|| ConfigError {
            key: key.to_string(),
            line: None,
            message: format!("`{seg}` is not a table"),
        })?;
    }
    table.insert(segments[segments.len() - 1].to_string(), value);
    Ok(key.to_string())
}

struct Reader<'a> {
    root: &'a Table,
    locator: &'a Locator,
    base: &'a Path,
}

impl Reader<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            key: key.to_string(),
            line: self.locator.line(key),
            message: message.into(),
        }
    }

    fn get(&self, key: &str) -> Option<&Value> {
        let mut segments = key.split('.');
        let mut value = self.root.get(segments.next()?)?;
        for seg in segments {
            value = value.as_table()?.get(seg)?;
        }
        Some(value)
    }

    fn check_keys(&self, table: &Table, prefix: &str, allowed: &[&str]) -> Result<(), ConfigError> {
        match table.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(self.err(
                &join(prefix, k),
                format!("unknown key (expected one of {})", allowed.join(", ")),
            )),
            None => Ok(()),
        }
    }

    fn check_schema(&self) -> Result<(), ConfigError> {
        for (section, keys) in SCHEMA {
            let table = if section.is_empty() {
                Some(self.root)
            } else {
                match self.get(section) {
                    Some(Value::Table(t)) => Some(t),
                    Some(_) => return Err(self.err(section, "expected a table")),
                    None => None,
                }
            };
            if let Some(t) = table {
                self.check_keys(t, section, keys)?;
            }
        }
        Ok(())
    }

    fn number(&self, key: &str, value: &Value) -> Result<f64, ConfigError> {
        match value {
            Value::Float(v) => Ok(*v),
            Value::Integer(v) => Ok(*v as f64),
            other => Err(self.err(key, format!("expected a number, got {}", other.type_str()))),
        }
    }

    fn float(&self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        match (self.get(key), default) {
            (Some(v), _) => self.number(key, v),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.err(key, "missing required key")),
        }
    }

    fn positive(&self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        let v = self.float(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(key, format!("{key} must be > 0")))
        }
    }

    fn integer(&self, key: &str, default: Option<u64>) -> Result<u64, ConfigError> {
        match (self.get(key), default) {
            (Some(Value::Integer(v)), _) if *v >= 0 => Ok(*v as u64),
            (Some(Value::Integer(_)), _) => Err(self.err(key, format!("{key} must be >= 0"))),
            (Some(other), _) => Err(self.err(key, format!("expected an integer, got {}", other.type_str()))),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.err(key, "missing required key")),
        }
    }

    fn count(&self, key: &str, default: Option<u64>, min: u64) -> Result<usize, ConfigError> {
        let v = self.integer(key, default)?;
        if v < min {
            return Err(self.err(key, format!("{key} must be >= {min}")));
        }
        usize::try_from(v).map_err(|_| self.err(key, "value too large"))
    }

    fn string(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.get(key) {
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(self.err(key, format!("expected a string, got {}", other.type_str()))),
            None => Ok(None),
        }
    }

    fn boolean(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            Some(Value::Boolean(b)) => Ok(*b),
            Some(other) => Err(self.err(key, format!("expected a boolean, got {}", other.type_str()))),
            None => Ok(default),
        }
    }

    /// `{ kind, params }`, or a bare number for a constant.
    fn function_value(&self, key: &str, value: &Value) -> Result<FunctionSpec, ConfigError> {
        let table = match value {
            Value::Float(_) | Value::Integer(_) => return Ok(FunctionSpec::constant(self.number(key, value)?)),
            Value::Table(t) => t,
            other => {
                return Err(self.err(
                    key,
                    format!(
                        "expected a {{ kind, params }} table or a number, got {}",
                        other.type_str()
                    ),
                ))
            }
        };
        self.check_keys(table, key, FUNCTION_KEYS)?;
        let kind_key = format!("{key}.kind");
        let kind = match table.get("kind") {
            Some(Value::String(s)) => s.as_str(),
            Some(_) => return Err(self.err(&kind_key, "expected a string")),
            None => return Err(self.err(&kind_key, "missing required key")),
        };
        let params_key = format!("{key}.params");
        let params = match table.get("params") {
            None => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, v)| self.number(&format!("{params_key}[{i}]"), v))
                .collect::<Result<_, _>>()?,
            Some(other) => return Err(self.err(&params_key, format!("expected an array, got {}", other.type_str()))),
        };
        FunctionSpec::from_params(kind, &params).map_err(|e| {
            let target = if FunctionSpec::KINDS.contains(&kind) {
                params_key
            } else {
                kind_key
            };
            self.err(&target, e.to_string())
        })
    }

    fn function(&self, key: &str) -> Result<Option<FunctionSpec>, ConfigError> {
        self.get(key).map(|v| self.function_value(key, v)).transpose()
    }

    fn source(&self) -> Result<SourceSpec, ConfigError> {
        let terms = match self.get("problem.f.terms") {
            None => return Ok(SourceSpec::zero()),
            Some(Value::Array(items)) => items,
            Some(other) => {
                return Err(self.err(
                    "problem.f.terms",
                    format!("expected an array of tables, got {}", other.type_str()),
                ))
            }
        };
        let mut source = SourceSpec::zero();
        for (i, term) in terms.iter().enumerate() {
            let key = format!("problem.f.terms[{i}]");
            let table = term.as_table().ok_or_else(|| self.err(&key, "expected a table"))?;
            self.check_keys(table, &key, TERM_KEYS)?;
            let part = |name: &str| -> Result<FunctionSpec, ConfigError> {
                let k = format!("{key}.{name}");
                let v = table.get(name).ok_or_else(|| self.err(&k, "missing required key"))?;
                self.function_value(&k, v)
            };
            source = source.with_term(part("space")?, part("time")?);
        }
        Ok(source)
    }

    fn solver(&self) -> Result<SolverOptions, ConfigError> {
        let defaults = SolverOptions::default();
        let method = match self.string("solver.method")? {
            None => defaults.method,
            Some("picard-global") => Method::PicardGlobal,
            Some("volterra-marching") => Method::VolterraMarching,
            Some(other) => {
                return Err(self.err(
                    "solver.method",
                    format!("unknown method `{other}` (expected picard-global or volterra-marching)"),
                ))
            }
        };
        let clamp_policy = match self.string("solver.clamp_policy")? {
            None => defaults.clamp_policy,
            Some("clamp-to-zero") => ClampPolicy::ClampToZero,
            Some("monotone-projection") => ClampPolicy::MonotoneProjection,
            Some(other) => {
                return Err(self.err(
                    "solver.clamp_policy",
                    format!("unknown clamp policy `{other}` (expected clamp-to-zero or monotone-projection)"),
                ))
            }
        };
        let relaxation = match self.get("solver.relaxation") {
            None => defaults.relaxation,
            Some(Value::String(s)) if s == "none" => Relaxation::None,
            Some(Value::String(s)) if s == "diagonal" => Relaxation::Diagonal,
            Some(v @ (Value::Float(_) | Value::Integer(_))) => {
                let w = self.number("solver.relaxation", v)?;
                if !(w > 0.0 && w <= 1.0) {
                    return Err(self.err("solver.relaxation", "solver.relaxation must lie in (0, 1]"));
                }
                Relaxation::Fixed(w)
            }
            Some(_) => {
                return Err(self.err(
                    "solver.relaxation",
                    "expected \"none\", \"diagonal\" or a weight in (0, 1]",
                ))
            }
        };
        let smoothing_window = match self.get("solver.smoothing_window") {
            None => None,
            Some(_) => Some(self.count("solver.smoothing_window", None, 1)?),
        };
        let opts = SolverOptions {
            modes: self.count("solver.modes", Some(defaults.modes as u64), 1)?,
            tol: self.positive("solver.tol", Some(defaults.tol))?,
            max_iter: self.count("solver.max_iter", Some(defaults.max_iter as u64), 1)?,
            method,
            inversion_tol: self.positive("solver.inversion_tol", Some(defaults.inversion_tol))?,
            clamp_policy,
            relaxation,
            smoothing_window,
            saturate: self.boolean("solver.saturate", defaults.saturate)?,
        };
        opts.validate().map_err(|e| self.err("solver", e.to_string()))?;
        Ok(opts)
    }

    fn run_config(&self) -> Result<RunConfig, ConfigError> {
        self.check_schema()?;

        let grid = TimeGrid::new(self.positive("grid.t_max", None)?, self.count("grid.n", None, 2)?)
            .map_err(|e| self.err("grid", e.to_string()))?;

        let zero = || Some(FunctionSpec::zero());
        let problem = ProblemSpec::new(
            self.function("problem.u1")?.or_else(zero).unwrap(),
            self.function("problem.u2")?.or_else(zero).unwrap(),
            self.function("problem.h")?
                .ok_or_else(|| self.err("problem.h", "missing required key"))?,
            self.source()?,
            self.function("problem.a_true")?,
            self.positive("problem.a_floor", Some(1e-6))?,
        )
        .map_err(|e| self.err("problem", e.to_string()))?;

        let scenario = match self.string("problem.scenario")? {
            None => None,
            Some("closed_form") => Some(Scenario::ClosedForm),
            Some(other) => {
                return Err(self.err(
                    "problem.scenario",
                    format!("unknown scenario `{other}` (expected closed_form)"),
                ))
            }
        };

        let noise = self.float("data.noise", Some(0.0))?;
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(self.err("data.noise", "data.noise must be >= 0"));
        }
        let data = DataConfig {
            g_csv: self.string("data.g_csv")?.map(|p| self.base.join(p)),
            noise,
            seed: self.integer("data.seed", Some(0))?,
        };

        let snapshots = match self.get("io.snapshots") {
            None => vec![grid.t_max()],
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let key = format!("io.snapshots[{i}]");
                    let t = self.number(&key, v)?;
                    if (0.0..=grid.t_max()).contains(&t) {
                        Ok(t)
                    } else {
                        Err(self.err(&key, format!("snapshot time {t} outside [0, {}]", grid.t_max())))
                    }
                })
                .collect::<Result<_, _>>()?,
            Some(other) => return Err(self.err("io.snapshots", format!("expected an array, got {}", other.type_str()))),
        };
        let io = IoConfig {
            out: self
                .string("io.out")?
                .map_or_else(|| PathBuf::from("out"), PathBuf::from),
            x_points: self.count("io.x_points", Some(101), 2)?,
            snapshots,
        };

        let oracle = OracleConfig {
            check: self.boolean("oracle.check", false)?,
            x_count: self.count("oracle.x_count", Some(200), 3)?,
            tolerance: self.positive("oracle.tolerance", Some(2e-3))?,
        };

        let t_min = self.positive("closedform.t_min", Some(0.01))?;

        Ok(RunConfig {
            problem,
            scenario,
            grid,
            solver: self.solver()?,
            data,
            io,
            oracle,
            t_min,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[problem]
h = { kind = "sine_series", params = [1.0, 1] }
a_true = { kind = "constant", params = [1.0] }

[grid]
t_max = 1.0
n = 200

[solver]
modes = 8
"#;

    fn parse(src: &str, overrides: &[&str]) -> Result<RunConfig, ConfigError> {
        let owned: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        parse_config_str(src, &owned, Path::new("."))
    }

    #[test]
    fn minimal_forward_config() {
        let cfg = parse(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.grid.steps(), 200);
        assert_eq!(cfg.solver.modes, 8);
        assert_eq!(cfg.problem.a_true, Some(FunctionSpec::constant(1.0)));
        assert!(cfg.problem.f.terms.is_empty());
        assert_eq!(cfg.io.snapshots, vec![1.0]);
    }

    #[test]
    fn negative_tolerance_rejected() {
        let src = MINIMAL.replace("modes = 8", "modes = 8\ntol = -1");
        let err = parse(&src, &[]).unwrap_err();
        assert_eq!(err.key, "solver.tol");
        assert_eq!(err.message, "solver.tol must be > 0");
        assert_eq!(err.line, Some(12));
    }

    #[test]
    fn unknown_kind_names_key() {
        let src = MINIMAL.replace("\"constant\"", "\"wavelet\"");
        let err = parse(&src, &[]).unwrap_err();
        assert_eq!(err.key, "problem.a_true.kind");
        assert_eq!(err.line, Some(4));
        assert!(err.message.contains("wavelet"));
    }

    #[test]
    fn overrides_replace_values() {
        let cfg = parse(
            MINIMAL,
            &["solver.tol=1e-10", "solver.method=volterra-marching", "grid.n=50"],
        )
        .unwrap();
        assert_eq!(cfg.solver.tol, 1e-10);
        assert_eq!(cfg.solver.method, Method::VolterraMarching);
        assert_eq!(cfg.grid.steps(), 50);
        let err = parse(MINIMAL, &["solver.tol=-2"]).unwrap_err();
        assert_eq!(err.line, None);
        assert!(err.to_string().starts_with("solver.tol: "));
    }

    #[test]
    fn unknown_and_missing_keys() {
        let err = parse(&MINIMAL.replace("modes = 8", "mode = 8"), &[]).unwrap_err();
        assert_eq!(err.key, "solver.mode");
        let err = parse(&MINIMAL.replace("n = 200", ""), &[]).unwrap_err();
        assert_eq!(err.key, "grid.n");
        assert_eq!(err.message, "missing required key");
    }

    #[test]
    fn source_terms_and_relaxation() {
        let src = format!(
            "{MINIMAL}relaxation = 0.5\n\n[[problem.f.terms]]\nspace = {{ kind = \"sine_series\", params = [1.0, 1] }}\ntime = {{ kind = \"exponential\", params = [1.0] }}\n"
        );
        let cfg = parse(&src, &[]).unwrap();
        assert_eq!(cfg.problem.f.terms.len(), 1);
        assert_eq!(cfg.solver.relaxation, Relaxation::Fixed(0.5));
        let bad = src.replace("time = ", "tme = ");
        assert_eq!(parse(&bad, &[]).unwrap_err().key, "problem.f.terms[0].tme");
    }

    #[test]
    fn corner_mismatch_is_a_config_error() {
        let src = MINIMAL.replace("[grid]", "u1 = 1.0\n\n[grid]");
        let err = parse(&src, &[]).unwrap_err();
        assert_eq!(err.key, "problem");
    }

    #[test]
    fn malformed_toml_reports_line() {
        let err = parse("[grid]\nt_max = = 1\n", &[]).unwrap_err();
        assert_eq!(err.line, Some(2));
    }
}
