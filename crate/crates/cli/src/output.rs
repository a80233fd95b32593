//! Tabular results written as CSV or JSON.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::Format;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Ordered `key, value` pairs.
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: vec![],
            metadata: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn first_non_finite(&self) -> Option<(usize, &str)> {
        self.rows.iter().enumerate().find_map(|(i, r)| {
            r.iter()
                .position(|v| !v.is_finite())
                .map(|k| (i, self.columns[k].as_str()))
        })
    }

    /// `# key: value` lines, then a header and `{:.16e}` values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            for (i, line) in v.lines().enumerate() {
                if i == 0 {
                    let _ = writeln!(out, "# {k}: {line}");
                } else {
                    let _ = writeln!(out, "#   {line}");
                }
            }
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            metadata: serde_json::Map<String, serde_json::Value>,
            columns: &'a [String],
            rows: &'a [Vec<f64>],
        }
        let metadata = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let mut s = serde_json::to_string_pretty(&Doc {
            metadata,
            columns: &self.columns,
            rows: &self.rows,
        })
        .expect("finite table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new(vec!["a".into(), "b".into()]);
        t.meta("task", "verify");
        t.meta("config", "x = 1\ny = 2");
        t.push(vec![1.0, -0.5]);
        assert_eq!(
            t.to_csv(),
            "# task: verify\n# config: x = 1\n#   y = 2\na,b\n1.0000000000000000e0,-5.0000000000000000e-1\n"
        );
        let json: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(json["rows"][0][1], -0.5);
        assert_eq!(json["metadata"]["task"], "verify");
    }
}
