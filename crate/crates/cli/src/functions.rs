//! Scalar coefficient functions written as tagged strings.

use std::fmt;
use std::path::Path;

use qtomo_core::{scalar_fn, ScalarFn};

#[derive(Debug, Clone, PartialEq)]
pub enum FnSpec {
    /// `const:v`
    Const(f64),
    /// `poly:c0,c1,…` = `c0 + c1 t + …`
    Poly(Vec<f64>),
    /// `sin:offset,amp,freq` = `offset + amp sin(freq t)`
    Sin { offset: f64, amp: f64, freq: f64 },
    /// `cos:offset,amp,freq`
    Cos { offset: f64, amp: f64, freq: f64 },
    /// `step:before,after,at`
    Step { before: f64, after: f64, at: f64 },
    /// `table:path`, two columns `t, value`, linear interpolation, held constant outside.
    Table { path: String, points: Vec<(f64, f64)> },
}

fn numbers(body: &str, want: Option<usize>, tag: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = body
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{s}` is not a number in `{tag}:`"))
        })
        .collect::<Result<_, _>>()?;
    if let Some(n) = want {
        if v.len() != n {
            return Err(format!("`{tag}:` takes {n} numbers, got {}", v.len()));
        }
    }
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(format!("non-finite coefficient {bad} in `{tag}:`"));
    }
    Ok(v)
}

/// Parse a two-column table; `#` starts a comment, separators are commas or whitespace.
pub fn parse_table(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut pts = vec![];
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 2 {
            return Err(format!("table line {}: expected 2 columns, got {}", k + 1, cols.len()));
        }
        let parse = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        match (parse(cols[0]), parse(cols[1])) {
            (Some(t), Some(v)) => pts.push((t, v)),
            // a header row is allowed before any data
            _ if pts.is_empty() && k == 0 => continue,
            _ => return Err(format!("table line {}: not a pair of finite numbers", k + 1)),
        }
    }
    if pts.is_empty() {
        return Err("table has no rows".into());
    }
    if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err("table times must be strictly increasing".into());
    }
    Ok(pts)
}

impl FnSpec {
    /// Parse a tagged spec; `table:` paths are resolved against `base`.
    pub fn parse(s: &str, base: &Path) -> Result<Self, String> {
        let s = s.trim();
        let (tag, body) = s
            .split_once(':')
            .ok_or_else(|| format!("`{s}` lacks a `tag:` prefix"))?;
        let body = body.trim();
        Ok(match tag.trim() {
            "const" => Self::Const(numbers(body, Some(1), "const")?[0]),
            "poly" => Self::Poly(numbers(body, None, "poly")?),
            "sin" | "cos" => {
                let v = numbers(body, Some(3), tag)?;
                let (offset, amp, freq) = (v[0], v[1], v[2]);
                if tag == "sin" {
                    Self::Sin { offset, amp, freq }
                } else {
                    Self::Cos { offset, amp, freq }
                }
            }
            "step" => {
                let v = numbers(body, Some(3), "step")?;
                Self::Step {
                    before: v[0],
                    after: v[1],
                    at: v[2],
                }
            }
            "table" => {
                if body.is_empty() {
                    return Err("`table:` needs a path".into());
                }
                let full = base.join(body);
                let text =
                    std::fs::read_to_string(&full).map_err(|e| format!("cannot read {}: {e}", full.display()))?;
                Self::Table {
                    path: body.to_string(),
                    points: parse_table(&text)?,
                }
            }
            other => return Err(format!("unknown function tag `{other}`")),
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Const(v) => *v,
            Self::Poly(c) => c.iter().rev().fold(0.0, |acc, v| acc * t + v),
            Self::Sin { offset, amp, freq } => offset + amp * (freq * t).sin(),
            Self::Cos { offset, amp, freq } => offset + amp * (freq * t).cos(),
            Self::Step { before, after, at } => {
                if t < *at {
                    *before
                } else {
                    *after
                }
            }
            Self::Table { points, .. } => interpolate(points, t),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Self::Const(v) => Some(*v),
            Self::Poly(c) if c.iter().skip(1).all(|v| *v == 0.0) => Some(c.first().copied().unwrap_or(0.0)),
            _ => None,
        }
    }

    pub fn to_fn(&self) -> ScalarFn {
        let me = self.clone();
        scalar_fn(move |t| me.eval(t))
    }
}

fn interpolate(points: &[(f64, f64)], t: f64) -> f64 {
    let k = points.partition_point(|p| p.0 <= t);
    if k == 0 {
        return points[0].1;
    }
    if k == points.len() {
        return points[k - 1].1;
    }
    let ((t0, v0), (t1, v1)) = (points[k - 1], points[k]);
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

impl fmt::Display for FnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(v) => write!(f, "const:{v:?}"),
            Self::Poly(c) => write!(f, "poly:{}", join(c)),
            Self::Sin { offset, amp, freq } => write!(f, "sin:{}", join(&[*offset, *amp, *freq])),
            Self::Cos { offset, amp, freq } => write!(f, "cos:{}", join(&[*offset, *amp, *freq])),
            Self::Step { before, after, at } => write!(f, "step:{}", join(&[*before, *after, *at])),
            Self::Table { path, .. } => write!(f, "table:{path}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_step() {
        let p = FnSpec::parse("poly:1, 0.1, 2", Path::new(".")).unwrap();
        assert_eq!(p.eval(2.0), 1.0 + 0.2 + 8.0);
        let s = FnSpec::parse("step:1,1.2,0.5", Path::new(".")).unwrap();
        assert_eq!((s.eval(0.49), s.eval(0.5)), (1.0, 1.2));
    }

    #[test]
    fn table_reproduces_nodes() {
        let pts = parse_table("t,omega\n0,1\n1,2\n# note\n3,0\n").unwrap();
        let f = FnSpec::Table {
            path: "x".into(),
            points: pts.clone(),
        };
        for (t, v) in pts {
            assert_eq!(f.eval(t), v);
        }
        assert_eq!(f.eval(0.5), 1.5);
        assert_eq!(f.eval(2.0), 1.0);
        assert_eq!((f.eval(-1.0), f.eval(9.0)), (1.0, 0.0));
    }

    #[test]
    fn bad_specs() {
        for s in ["1.0", "const:", "const:1,2", "sin:1,2", "wave:1", "poly:1,nan"] {
            assert!(FnSpec::parse(s, Path::new(".")).is_err(), "{s}");
        }
        assert!(parse_table("0,1\n0,2\n").is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in [
            "const:0.1",
            "poly:1.0,0.1",
            "sin:1.0,0.1,1.0",
            "cos:0.0,-2.5,3.0",
            "step:1.0,1.2,0.5",
        ] {
            let f = FnSpec::parse(s, Path::new(".")).unwrap();
            assert_eq!(FnSpec::parse(&f.to_string(), Path::new(".")).unwrap(), f);
        }
    }
}
