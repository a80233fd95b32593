//! Run configuration: a flat `section.key = value` text format.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use qtomo_core::{CMatrix, RMatrix};

use crate::functions::FnSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse { line: usize, message: String },
    Validation { field: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Parse { line, message } => write!(f, "line {line}: {message}"),
            Self::Validation { field, message } => write!(f, "{field}: {message}"),
        }
    }
}

/// Every problem found in one config text.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    Oscillator {
        mass: f64,
        hbar: f64,
        omega: FnSpec,
        force: FnSpec,
    },
    ChargedParticle {
        mass: f64,
        hbar: f64,
        field: FnSpec,
    },
    Custom {
        hbar: f64,
        b_pp: RMatrix,
        b_px: RMatrix,
        b_xx: RMatrix,
        c_p: Vec<FnSpec>,
        c_x: Vec<FnSpec>,
    },
}

impl SystemSpec {
    pub fn n_modes(&self) -> usize {
        match self {
            Self::Custom { b_pp, .. } => b_pp.nrows(),
            _ => 1,
        }
    }

    pub fn hbar(&self) -> f64 {
        match self {
            Self::Oscillator { hbar, .. } | Self::ChargedParticle { hbar, .. } | Self::Custom { hbar, .. } => *hbar,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LadderSpec {
    /// The system's own frame (spectral for custom systems when available).
    Model,
    Spectral,
    Decoupled,
    Explicit {
        a_p: CMatrix,
        a_x: CMatrix,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskSpec {
    Verify {
        times: Vec<f64>,
    },
    Propagate {
        times: Vec<f64>,
    },
    Tomogram {
        times: Vec<f64>,
        alpha: Vec<Complex64>,
    },
    FockTomogram {
        times: Vec<f64>,
        fock: Vec<usize>,
    },
    SumRule {
        theta: Vec<f64>,
        n: usize,
        max_m: usize,
    },
    Transitions {
        t1: f64,
        t2: f64,
        n_max: usize,
        m_max: usize,
    },
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Verify { .. } => "verify",
            Self::Propagate { .. } => "propagate",
            Self::Tomogram { .. } => "tomogram",
            Self::FockTomogram { .. } => "fock-tomogram",
            Self::SumRule { .. } => "sumrule",
            Self::Transitions { .. } => "transitions",
        }
    }
}

/// `(μ, ν)` with one entry per mode in each.
pub type FramePair = (Vec<f64>, Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub x_count: usize,
    pub frames: Vec<FramePair>,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.x_count == 1 {
            return vec![self.x_min];
        }
        let h = (self.x_max - self.x_min) / (self.x_count - 1) as f64;
        (0..self.x_count).map(|k| self.x_min + h * k as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub dt: f64,
    pub tol: f64,
    pub residual_ceiling: f64,
    pub max_order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Absent only for `sumrule`, which needs no Hamiltonian.
    pub system: Option<SystemSpec>,
    pub ladder: LadderSpec,
    pub task: TaskSpec,
    pub grid: GridSpec,
    pub numerics: Numerics,
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn n_modes(&self) -> usize {
        self.system.as_ref().map_or(1, SystemSpec::n_modes)
    }
}

const KEYS: &[&str] = &[
    "system.kind",
    "system.mass",
    "system.hbar",
    "system.omega",
    "system.force",
    "system.field",
    "system.b_pp",
    "system.b_px",
    "system.b_xx",
    "system.c_p",
    "system.c_x",
    "ladder.kind",
    "ladder.ap",
    "ladder.ax",
    "task.kind",
    "task.times",
    "task.alpha",
    "task.fock",
    "task.theta",
    "task.n",
    "task.max_m",
    "task.t1",
    "task.t2",
    "task.n_max",
    "task.m_max",
    "grid.x_min",
    "grid.x_max",
    "grid.x_count",
    "grid.frames",
    "numerics.dt",
    "numerics.tol",
    "numerics.residual_ceiling",
    "numerics.max_order",
    "output.path",
    "output.format",
];

/// Parse a complex literal such as `0.5`, `-2i`, `1e-3-0.7i`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    let finite = |c: Complex64| (c.re.is_finite() && c.im.is_finite()).then_some(c);
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().and_then(|re| finite(Complex64::new(re, 0.0)));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().ok()?,
    };
    finite(Complex64::new(re, im))
}

pub fn format_complex(c: Complex64) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{sign}{:?}i", c.re, c.im.abs())
}

fn parse_rows<T>(s: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<Vec<T>>, String> {
    let rows: Vec<Vec<T>> = s
        .split(';')
        .map(|row| {
            row.split_whitespace()
                .map(|v| item(v).ok_or_else(|| format!("`{v}` is not a valid entry")))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(format!(
            "expected a square matrix, got {n} rows of lengths {:?}",
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        ));
    }
    Ok(rows)
}

pub fn parse_rmatrix(s: &str) -> Result<RMatrix, String> {
    let rows = parse_rows(s, |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))?;
    let n = rows.len();
    Ok(RMatrix::from_row_iterator(n, n, rows.into_iter().flatten()))
}

pub fn parse_cmatrix(s: &str) -> Result<CMatrix, String> {
    let rows = parse_rows(s, parse_complex)?;
    let n = rows.len();
    Ok(CMatrix::from_row_iterator(n, n, rows.into_iter().flatten()))
}

fn format_matrix<T: Copy>(m: &nalgebra::DMatrix<T>, f: impl Fn(T) -> String) -> String {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| f(m[(i, j)])).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("; ")
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, String> {
    s.split_whitespace()
        .map(|v| item(v).ok_or_else(|| format!("`{v}` is not a valid entry")))
        .collect()
}

fn finite_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_frames(s: &str) -> Result<Vec<FramePair>, String> {
    s.split(';')
        .map(|part| {
            let inner = part
                .trim()
                .strip_prefix('(')
                .and_then(|p| p.strip_suffix(')'))
                .ok_or_else(|| format!("frame `{}` must look like (mu, nu)", part.trim()))?;
            let (mu, nu) = inner
                .split_once(',')
                .ok_or_else(|| format!("frame `({inner})` needs a comma"))?;
            Ok((parse_list(mu, finite_f64)?, parse_list(nu, finite_f64)?))
        })
        .collect()
}

fn format_list<T>(v: &[T], f: impl Fn(&T) -> String) -> String {
    v.iter().map(f).collect::<Vec<_>>().join(" ")
}

struct Reader<'a> {
    entries: BTreeMap<String, (String, usize)>,
    used: Vec<String>,
    errors: Vec<ConfigError>,
    base: &'a Path,
}

impl Reader<'_> {
    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.used.push(key.to_string());
        self.entries.get(key).cloned()
    }

    fn parse_err(&mut self, line: usize, key: &str, message: String) {
        self.errors.push(ConfigError::Parse {
            line,
            message: format!("{key}: {message}"),
        });
    }

    fn invalid(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(ConfigError::Validation {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn get<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        let (v, line) = self.raw(key)?;
        match parse(&v) {
            Ok(x) => Some(x),
            Err(m) => {
                self.parse_err(line, key, m);
                None
            }
        }
    }

    fn required<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        if !self.entries.contains_key(key) {
            self.used.push(key.to_string());
            self.invalid(key, "is required");
            return None;
        }
        self.get(key, parse)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        self.get(key, |s| {
            finite_f64(s).ok_or_else(|| format!("`{s}` is not a finite number"))
        })
        .unwrap_or(default)
    }

    fn usize_or(&mut self, key: &str, default: usize) -> usize {
        self.get(key, |s| {
            s.parse::<usize>()
                .map_err(|_| format!("`{s}` is not a non-negative integer"))
        })
        .unwrap_or(default)
    }

    fn positive(&mut self, key: &str, default: f64) -> f64 {
        let v = self.f64_or(key, default);
        if !(v > 0.0) {
            self.invalid(key, format!("must be positive, got {v}"));
        }
        v
    }

    fn function(&mut self, key: &str, default: Option<FnSpec>) -> Option<FnSpec> {
        let base = self.base.to_path_buf();
        let parsed = if default.is_some() {
            self.get(key, |s| FnSpec::parse(s, &base))
        } else {
            self.required(key, |s| FnSpec::parse(s, &base))
        };
        parsed.or(default)
    }

    fn times(&mut self) -> Vec<f64> {
        let t = self
            .get("task.times", |s| parse_list(s, finite_f64))
            .unwrap_or_else(|| vec![0.0]);
        if t.is_empty() {
            self.invalid("task.times", "needs at least one time");
        }
        if t.iter().any(|v| *v < 0.0) || t.windows(2).any(|w| w[1] < w[0]) {
            self.invalid("task.times", "times must be non-negative and ascending");
        }
        t
    }
}

/// Parse and validate a config; `table:` paths resolve against the working directory.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_in(text, Path::new("."))
}

/// Parse and validate a config whose `table:` paths resolve against `base`.
pub fn parse_config_in(text: &str, base: &Path) -> Result<RunConfig, ConfigErrors> {
    let mut r = Reader {
        entries: BTreeMap::new(),
        used: vec![],
        errors: vec![],
        base,
    };
    for (k, line) in text.lines().enumerate() {
        let no = k + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            r.errors.push(ConfigError::Parse {
                line: no,
                message: format!("expected `section.key = value`, got `{content}`"),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            r.errors.push(ConfigError::Parse {
                line: no,
                message: format!("unknown key `{key}`"),
            });
        } else if let Some((_, first)) = r.entries.get(key) {
            r.errors.push(ConfigError::Parse {
                line: no,
                message: format!("duplicate key `{key}` (first set on line {first})"),
            });
        } else if value.is_empty() {
            r.errors.push(ConfigError::Parse {
                line: no,
                message: format!("`{key}` has an empty value"),
            });
        } else {
            r.entries.insert(key.to_string(), (value.to_string(), no));
        }
    }

    let task_kind = r.required("task.kind", |s| Ok(s.to_string()));
    let system = read_system(&mut r, task_kind.as_deref() == Some("sumrule"));
    let n = system.as_ref().map_or(1, SystemSpec::n_modes);
    let ladder = read_ladder(&mut r, system.as_ref());
    let task = task_kind.and_then(|k| read_task(&mut r, &k, n));

    let grid = GridSpec {
        x_min: r.f64_or("grid.x_min", -4.0),
        x_max: r.f64_or("grid.x_max", 4.0),
        x_count: r.usize_or("grid.x_count", 81),
        frames: r
            .get("grid.frames", parse_frames)
            .unwrap_or_else(|| vec![(vec![1.0; n], vec![0.0; n])]),
    };
    if grid.x_count == 0 {
        r.invalid("grid.x_count", "must be at least 1");
    }
    if grid.x_count > 1 && !(grid.x_min < grid.x_max) {
        r.invalid("grid.x_min", "must be below grid.x_max");
    }
    for (k, (mu, nu)) in grid.frames.iter().enumerate() {
        if mu.len() != n || nu.len() != n {
            r.invalid(
                "grid.frames",
                format!("frame {} needs {n} mu and {n} nu entries", k + 1),
            );
        } else if mu.iter().zip(nu).any(|(a, b)| *a == 0.0 && *b == 0.0) {
            r.invalid(
                "grid.frames",
                format!("frame {} has (mu, nu) = (0, 0) for some mode", k + 1),
            );
        }
    }

    let numerics = Numerics {
        dt: r.positive("numerics.dt", 1e-3),
        tol: r.positive("numerics.tol", 1e-8),
        residual_ceiling: r.positive("numerics.residual_ceiling", 1e-6),
        max_order: r.usize_or("numerics.max_order", 32),
    };
    if numerics.max_order > 32 {
        r.invalid("numerics.max_order", "must not exceed 32");
    }
    if let Some(TaskSpec::FockTomogram { fock, .. }) = &task {
        if fock.iter().sum::<usize>() > numerics.max_order {
            r.invalid(
                "task.fock",
                format!("total order exceeds numerics.max_order = {}", numerics.max_order),
            );
        }
    }
    if let Some(TaskSpec::Transitions { n_max, m_max, .. }) = &task {
        if n_max + m_max > 200 {
            r.invalid("task.m_max", "n_max + m_max must not exceed 200");
        }
    }

    let output = OutputSpec {
        path: r.get("output.path", |s| Ok(s.to_string())),
        format: r
            .get("output.format", |s| {
                Format::parse(s).ok_or_else(|| format!("unknown format `{s}`"))
            })
            .unwrap_or(Format::Csv),
    };

    let unused: Vec<(String, usize)> = r
        .entries
        .iter()
        .filter(|(k, _)| !r.used.contains(k))
        .map(|(k, (_, line))| (k.clone(), *line))
        .collect();
    for (key, _) in unused {
        r.invalid(&key, "is not used by this system, ladder or task");
    }

    if !r.errors.is_empty() {
        let mut errors = r.errors;
        errors.sort_by_key(|e| match e {
            ConfigError::Parse { line, .. } => (0, *line),
            ConfigError::Validation { .. } => (1, 0),
        });
        return Err(ConfigErrors(errors));
    }
    Ok(RunConfig {
        system,
        ladder,
        task: task.expect("task errors are reported"),
        grid,
        numerics,
        output,
    })
}

fn read_system(r: &mut Reader, optional: bool) -> Option<SystemSpec> {
    let kind = if optional {
        r.get("system.kind", |s| Ok(s.to_string()))
    } else {
        r.required("system.kind", |s| Ok(s.to_string()))
    }?;
    match kind.as_str() {
        "oscillator" => {
            let mass = r.positive("system.mass", 1.0);
            let hbar = r.positive("system.hbar", 1.0);
            let omega = r.function("system.omega", None);
            let force = r.function("system.force", Some(FnSpec::Const(0.0)));
            if let Some(w) = &omega {
                if !(w.eval(0.0) > 0.0) {
                    r.invalid("system.omega", "omega(0) must be positive");
                }
            }
            Some(SystemSpec::Oscillator {
                mass,
                hbar,
                omega: omega?,
                force: force?,
            })
        }
        "charged_particle" => {
            let mass = r.positive("system.mass", 1.0);
            let hbar = r.positive("system.hbar", 1.0);
            let field = r.function("system.field", Some(FnSpec::Const(0.0)));
            Some(SystemSpec::ChargedParticle {
                mass,
                hbar,
                field: field?,
            })
        }
        "custom" => {
            let hbar = r.positive("system.hbar", 1.0);
            let b_pp = r.required("system.b_pp", parse_rmatrix)?;
            let n = b_pp.nrows();
            let b_px = r
                .get("system.b_px", parse_rmatrix)
                .unwrap_or_else(|| RMatrix::zeros(n, n));
            let b_xx = r.required("system.b_xx", parse_rmatrix)?;
            let base = r.base.to_path_buf();
            let fns = |s: &str| -> Result<Vec<FnSpec>, String> {
                s.split_whitespace().map(|v| FnSpec::parse(v, &base)).collect()
            };
            let zero = vec![FnSpec::Const(0.0); n];
            let c_p = r.get("system.c_p", fns).unwrap_or_else(|| zero.clone());
            let c_x = r.get("system.c_x", fns).unwrap_or(zero);
            for (key, m) in [("system.b_px", &b_px), ("system.b_xx", &b_xx)] {
                if m.nrows() != n {
                    r.invalid(key, format!("must be {n}x{n} like system.b_pp"));
                }
            }
            for (key, m) in [("system.b_pp", &b_pp), ("system.b_xx", &b_xx)] {
                if m.nrows() == n && (m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
                    r.invalid(key, "must be symmetric");
                }
            }
            for (key, v) in [("system.c_p", &c_p), ("system.c_x", &c_x)] {
                if v.len() != n {
                    r.invalid(key, format!("needs {n} entries"));
                }
            }
            if n == 0 || n > 3 {
                r.invalid("system.b_pp", "between 1 and 3 modes are supported");
            }
            Some(SystemSpec::Custom {
                hbar,
                b_pp,
                b_px,
                b_xx,
                c_p,
                c_x,
            })
        }
        other => {
            r.invalid("system.kind", format!("unknown system `{other}`"));
            None
        }
    }
}

fn read_ladder(r: &mut Reader, system: Option<&SystemSpec>) -> LadderSpec {
    let kind = r
        .get("ladder.kind", |s| Ok(s.to_string()))
        .unwrap_or_else(|| "model".into());
    match kind.as_str() {
        "model" => LadderSpec::Model,
        "spectral" => LadderSpec::Spectral,
        "decoupled" => LadderSpec::Decoupled,
        "explicit" => {
            let a_p = r.required("ladder.ap", parse_cmatrix);
            let a_x = r.required("ladder.ax", parse_cmatrix);
            let n = system.map_or(1, SystemSpec::n_modes);
            for (key, m) in [("ladder.ap", &a_p), ("ladder.ax", &a_x)] {
                if let Some(m) = m {
                    if m.nrows() != n {
                        r.invalid(key, format!("must be {n}x{n}"));
                    }
                }
            }
            match (a_p, a_x) {
                (Some(a_p), Some(a_x)) => LadderSpec::Explicit { a_p, a_x },
                _ => LadderSpec::Model,
            }
        }
        other => {
            r.invalid("ladder.kind", format!("unknown ladder `{other}`"));
            LadderSpec::Model
        }
    }
}

fn read_task(r: &mut Reader, kind: &str, n: usize) -> Option<TaskSpec> {
    let indices = |s: &str| parse_list(s, |v| v.parse::<usize>().ok());
    Some(match kind {
        "verify" => TaskSpec::Verify { times: r.times() },
        "propagate" => TaskSpec::Propagate { times: r.times() },
        "tomogram" => {
            let times = r.times();
            let alpha = r
                .get("task.alpha", |s| parse_list(s, parse_complex))
                .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); n]);
            if alpha.len() != n {
                r.invalid("task.alpha", format!("needs {n} entries"));
            }
            TaskSpec::Tomogram { times, alpha }
        }
        "fock-tomogram" => {
            let times = r.times();
            let fock = r.required("task.fock", indices)?;
            if fock.len() != n {
                r.invalid("task.fock", format!("needs {n} entries"));
            }
            TaskSpec::FockTomogram { times, fock }
        }
        "sumrule" => {
            let theta = r.required("task.theta", |s| parse_list(s, finite_f64))?;
            if theta.is_empty() {
                r.invalid("task.theta", "needs at least one value");
            }
            let n = r.usize_or("task.n", 0);
            let max_m = r.usize_or("task.max_m", 60);
            if n + max_m > 200 {
                r.invalid("task.max_m", "n + max_m must not exceed 200");
            }
            TaskSpec::SumRule { theta, n, max_m }
        }
        "transitions" => {
            let t1 = r.f64_or("task.t1", 0.0);
            let t2 = r.required("task.t2", |s| {
                finite_f64(s).ok_or_else(|| format!("`{s}` is not a finite number"))
            })?;
            if t1 < 0.0 || t2 < 0.0 {
                r.invalid("task.t1", "times must be non-negative");
            }
            TaskSpec::Transitions {
                t1,
                t2,
                n_max: r.usize_or("task.n_max", 0),
                m_max: r.usize_or("task.m_max", 30),
            }
        }
        other => {
            r.invalid("task.kind", format!("unknown task `{other}`"));
            return None;
        }
    })
}

/// Canonical text of a config; `parse_config(&serialize(c)) == c`.
pub fn serialize(c: &RunConfig) -> String {
    let mut out: Vec<(String, String)> = vec![];
    let mut put = |k: &str, v: String| out.push((k.to_string(), v));
    let num = |v: f64| format!("{v:?}");
    if let Some(sys) = &c.system {
        match sys {
            SystemSpec::Oscillator {
                mass,
                hbar,
                omega,
                force,
            } => {
                put("system.kind", "oscillator".into());
                put("system.mass", num(*mass));
                put("system.hbar", num(*hbar));
                put("system.omega", omega.to_string());
                put("system.force", force.to_string());
            }
            SystemSpec::ChargedParticle { mass, hbar, field } => {
                put("system.kind", "charged_particle".into());
                put("system.mass", num(*mass));
                put("system.hbar", num(*hbar));
                put("system.field", field.to_string());
            }
            SystemSpec::Custom {
                hbar,
                b_pp,
                b_px,
                b_xx,
                c_p,
                c_x,
            } => {
                put("system.kind", "custom".into());
                put("system.hbar", num(*hbar));
                put("system.b_pp", format_matrix(b_pp, num));
                put("system.b_px", format_matrix(b_px, num));
                put("system.b_xx", format_matrix(b_xx, num));
                put("system.c_p", format_list(c_p, |f| f.to_string()));
                put("system.c_x", format_list(c_x, |f| f.to_string()));
            }
        }
    }
    match &c.ladder {
        LadderSpec::Model => put("ladder.kind", "model".into()),
        LadderSpec::Spectral => put("ladder.kind", "spectral".into()),
        LadderSpec::Decoupled => put("ladder.kind", "decoupled".into()),
        LadderSpec::Explicit { a_p, a_x } => {
            put("ladder.kind", "explicit".into());
            put("ladder.ap", format_matrix(a_p, format_complex));
            put("ladder.ax", format_matrix(a_x, format_complex));
        }
    }
    put("task.kind", c.task.name().into());
    let times = |t: &[f64]| format_list(t, |v| num(*v));
    match &c.task {
        TaskSpec::Verify { times: t } | TaskSpec::Propagate { times: t } => put("task.times", times(t)),
        TaskSpec::Tomogram { times: t, alpha } => {
            put("task.times", times(t));
            put("task.alpha", format_list(alpha, |a| format_complex(*a)));
        }
        TaskSpec::FockTomogram { times: t, fock } => {
            put("task.times", times(t));
            put("task.fock", format_list(fock, |v| v.to_string()));
        }
        TaskSpec::SumRule { theta, n, max_m } => {
            put("task.theta", times(theta));
            put("task.n", n.to_string());
            put("task.max_m", max_m.to_string());
        }
        TaskSpec::Transitions { t1, t2, n_max, m_max } => {
            put("task.t1", num(*t1));
            put("task.t2", num(*t2));
            put("task.n_max", n_max.to_string());
            put("task.m_max", m_max.to_string());
        }
    }
    put("grid.x_min", num(c.grid.x_min));
    put("grid.x_max", num(c.grid.x_max));
    put("grid.x_count", c.grid.x_count.to_string());
    let frames: Vec<String> = c
        .grid
        .frames
        .iter()
        .map(|(mu, nu)| format!("({}, {})", times(mu), times(nu)))
        .collect();
    put("grid.frames", frames.join("; "));
    put("numerics.dt", num(c.numerics.dt));
    put("numerics.tol", num(c.numerics.tol));
    put("numerics.residual_ceiling", num(c.numerics.residual_ceiling));
    put("numerics.max_order", c.numerics.max_order.to_string());
    if let Some(p) = &c.output.path {
        put("output.path", p.clone());
    }
    put("output.format", c.output.format.name().into());
    out.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let cases = [
            ("0.5", Complex64::new(0.5, 0.0)),
            ("-2i", Complex64::new(0.0, -2.0)),
            ("i", Complex64::new(0.0, 1.0)),
            ("-i", Complex64::new(0.0, -1.0)),
            ("1e-3-0.7i", Complex64::new(1e-3, -0.7)),
            ("-1.5e+2+2E-1i", Complex64::new(-150.0, 0.2)),
            ("0.0+0.6180339887498949i", Complex64::new(0.0, 0.6180339887498949)),
        ];
        for (s, c) in cases {
            assert_eq!(parse_complex(s), Some(c), "{s}");
            assert_eq!(parse_complex(&format_complex(c)), Some(c));
        }
        for s in ["", "1+", "abc", "1+2j", "nan", "inf+1i"] {
            assert_eq!(parse_complex(s), None, "{s}");
        }
    }

    #[test]
    fn matrices() {
        let m = parse_rmatrix("1 0.1; 0.1 2").unwrap();
        assert_eq!(m[(1, 1)], 2.0);
        assert!(parse_rmatrix("1 2; 3").is_err());
        let c = parse_cmatrix("0.5i 0; 0 1-i").unwrap();
        assert_eq!(c[(1, 1)], Complex64::new(1.0, -1.0));
    }

    #[test]
    fn frames() {
        let f = parse_frames("(1,0); (0.5 1, 0 -1)").unwrap();
        assert_eq!(f, vec![(vec![1.0], vec![0.0]), (vec![0.5, 1.0], vec![0.0, -1.0])]);
        assert!(parse_frames("1,0").is_err());
    }
}
