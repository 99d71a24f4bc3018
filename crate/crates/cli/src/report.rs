//! Run reports and trace files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{Format, Mode, ScenarioConfig};
use crate::error::CliError;

/// A residual with the tolerance it was judged against.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub mode: Mode,
    pub config: ScenarioConfig,
    /// PRNG identifier when the instance was generated.
    pub algorithm: Option<&'static str>,
    pub quantities: Map<String, Value>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    /// Relative to the output directory.
    pub traces: Vec<PathBuf>,
    pub passed: bool,
}

impl Report {
    pub fn new(config: &ScenarioConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            mode: config.mode(),
            config: config.clone(),
            algorithm: None,
            quantities: Map::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
            traces: Vec::new(),
            passed: true,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.quantities.insert(key.into(), v);
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.pass;
        self.checks.push(c);
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        write_file(path, &text)
    }
}

pub fn complex(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn complex_vec(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().copied().map(complex).collect()
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub t: f64,
    pub amplitudes: Vec<Complex64>,
    pub q_norm: f64,
    pub distance: Option<f64>,
    pub expectation: Option<Complex64>,
}

/// Sampled trajectory; the column order is fixed:
/// `t, re_1, im_1, …, re_n, im_n, q_norm, distance, expectation_re, expectation_im`.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

#[derive(Serialize)]
struct JsonTrace {
    columns: Vec<String>,
    t: Vec<f64>,
    amplitudes: Vec<Vec<[f64; 2]>>,
    q_norm: Vec<f64>,
    distance: Vec<Option<f64>>,
    expectation: Vec<Option<[f64; 2]>>,
}

impl Trace {
    fn dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.amplitudes.len())
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["t".to_string()];
        for i in 1..=self.dim() {
            cols.push(format!("re_{i}"));
            cols.push(format!("im_{i}"));
        }
        cols.extend(["q_norm", "distance", "expectation_re", "expectation_im"].map(String::from));
        cols
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns().join(",");
        out.push('\n');
        let num = |x: f64| format!("{x:e}");
        for r in &self.rows {
            let mut line = num(r.t);
            for z in &r.amplitudes {
                let _ = write!(line, ",{},{}", num(z.re), num(z.im));
            }
            let _ = write!(line, ",{}", num(r.q_norm));
            let _ = write!(line, ",{}", r.distance.map(num).unwrap_or_default());
            match r.expectation {
                Some(z) => {
                    let _ = write!(line, ",{},{}", num(z.re), num(z.im));
                }
                None => line.push_str(",,"),
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = JsonTrace {
            columns: self.columns(),
            t: self.rows.iter().map(|r| r.t).collect(),
            amplitudes: self.rows.iter().map(|r| complex_vec(&r.amplitudes)).collect(),
            q_norm: self.rows.iter().map(|r| r.q_norm).collect(),
            distance: self.rows.iter().map(|r| r.distance).collect(),
            expectation: self.rows.iter().map(|r| r.expectation.map(complex)).collect(),
        };
        let mut text = serde_json::to_string(&doc).expect("trace serializes");
        text.push('\n');
        text
    }

    /// Writes `<dir>/<stem>.csv` or `<dir>/<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<PathBuf, CliError> {
        let (ext, text) = match format {
            Format::Csv => ("csv", self.to_csv()),
            Format::Json => ("json", self.to_json()),
        };
        let path = dir.join(format!("{stem}.{ext}"));
        write_file(&path, &text)?;
        Ok(path)
    }
}
