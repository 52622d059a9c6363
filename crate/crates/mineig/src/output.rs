//! Deterministic CSV and JSON emission.
//!
//! CSV: header row, comma separator, `\n` line endings, reals in
//! `{:.16e}` (17 significant digits, exact round trip). JSON: UTF-8,
//! keys sorted, two-space indentation, trailing newline.

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.to_string())
    }
}

/// Formats a real with 17 significant digits; non-finite values as
/// `nan`, `inf`, `-inf`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Csv {
    pub fn new(header: &[&'static str]) -> Self {
        Csv {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &[&'static str] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Panics if the row width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Real(v) => fmt_real(*v),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Wall-clock per phase; recorded only when timing is enabled so that
/// default output stays byte-identical across reruns.
#[derive(Debug)]
pub struct Phases {
    enabled: bool,
    done: Vec<(String, Option<f64>)>,
    current: Option<(String, Instant)>,
}

impl Phases {
    pub fn new(enabled: bool) -> Self {
        Phases {
            enabled,
            done: Vec::new(),
            current: None,
        }
    }

    pub fn start(&mut self, name: &str) {
        self.stop();
        self.current = Some((name.to_string(), Instant::now()));
    }

    pub fn stop(&mut self) {
        if let Some((name, t)) = self.current.take() {
            let secs = self.enabled.then(|| t.elapsed().as_secs_f64());
            self.done.push((name, secs));
        }
    }

    pub fn to_json(&mut self) -> Value {
        self.stop();
        let mut m = Map::new();
        for (name, secs) in &self.done {
            m.insert(name.clone(), secs.map(Value::from).unwrap_or(Value::Null));
        }
        Value::Object(m)
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub results: Map<String, Value>,
    pub invariants: BTreeMap<String, bool>,
    pub phases: Value,
    pub status: String,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.invariants.values().all(|v| *v)
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::from(self.command.clone()));
        m.insert(
            "config".into(),
            Value::Object(
                self.config
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::from(v.clone())))
                    .collect(),
            ),
        );
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("results".into(), Value::Object(self.results.clone()));
        m.insert(
            "invariants".into(),
            Value::Object(
                self.invariants
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::from(*v)))
                    .collect(),
            ),
        );
        m.insert("all_invariants_pass".into(), Value::from(self.all_pass()));
        m.insert("phases".into(), self.phases.clone());
        m.insert("status".into(), Value::from(self.status.clone()));
        m.insert("tool".into(), Value::from(env!("CARGO_PKG_NAME")));
        m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        Value::Object(m)
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// A real as JSON; non-finite values become `null`.
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::Null
    }
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| real(*x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17, "{s}");
        }
        assert_eq!(fmt_real(f64::NAN), "nan");
        assert_eq!(fmt_real(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["index", "value", "tag"]);
        c.push(vec![0usize.into(), 1.5.into(), "a".into()]);
        assert_eq!(c.render(), "index,value,tag\n0,1.5000000000000000e0,a\n");
    }

    #[test]
    fn json_keys_sorted_and_timings_null() {
        let mut p = Phases::new(false);
        p.start("b");
        p.start("a");
        let s = Summary {
            command: "x".into(),
            config: BTreeMap::new(),
            seed: 3,
            results: Map::new(),
            invariants: BTreeMap::new(),
            phases: p.to_json(),
            status: "ok".into(),
        };
        let text = s.render();
        let keys: Vec<usize> = [
            "all_invariants_pass",
            "command",
            "config",
            "invariants",
            "phases",
            "results",
        ]
        .iter()
        .map(|k| text.find(&format!("\"{k}\"")).unwrap())
        .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("\"a\": null"));
        assert!(text.ends_with("}\n"));
    }
}
