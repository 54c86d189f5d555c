//! Task reports: a deterministic JSON record plus CSV side files.
//!
//! Report JSON is emitted by hand so that key order follows insertion
//! order and every float carries 17 significant digits — two runs of the
//! same config produce byte-identical `report.json`. Wall time, which is
//! not deterministic, goes to a separate `report.timing.json`.
//!
//! Matrix CSV files start with a line holding the three values
//! `rows,cols,complex` (the last one 0 or 1), then one entry per line in
//! row-major order: `re` for real files, `re,im` for complex ones.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use spectriples_core::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarValue {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub rule: String,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ReportRecord {
    pub task: String,
    pub config_echo: String,
    pub input_hash: String,
    pub seed: u64,
    pub scalars: Vec<(String, ScalarValue)>,
    pub tolerances: Vec<(String, f64)>,
    pub verdicts: Vec<Verdict>,
    pub matrices: Vec<(String, String)>,
    pub wall_ms: f64,
}

impl ReportRecord {
    pub fn new(task: &str, config_echo: String, seed: u64) -> ReportRecord {
        let input_hash = sha256_hex(config_echo.as_bytes());
        ReportRecord {
            task: task.to_string(),
            config_echo,
            input_hash,
            seed,
            scalars: Vec::new(),
            tolerances: Vec::new(),
            verdicts: Vec::new(),
            matrices: Vec::new(),
            wall_ms: 0.0,
        }
    }

    pub fn scalar(&mut self, name: &str, value: ScalarValue) {
        if let ScalarValue::Float(v) = value {
            assert!(v.is_finite(), "non-finite scalar `{name}` in report");
        }
        self.scalars.push((name.to_string(), value));
    }

    pub fn float(&mut self, name: &str, value: f64) {
        self.scalar(name, ScalarValue::Float(value));
    }

    pub fn int(&mut self, name: &str, value: i64) {
        self.scalar(name, ScalarValue::Int(value));
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.push((name.to_string(), value));
    }

    pub fn verdict(&mut self, rule: &str, pass: bool) {
        self.verdicts.push(Verdict {
            rule: rule.to_string(),
            pass,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// The deterministic report body (no wall time).
    pub fn to_json(&self) -> String {
        let mut j = JsonObject::new();
        j.string("task", &self.task);
        j.string("input_hash", &self.input_hash);
        j.raw("seed", &self.seed.to_string());
        let mut scalars = JsonObject::new();
        for (name, value) in &self.scalars {
            match value {
                ScalarValue::Int(v) => scalars.raw(name, &v.to_string()),
                ScalarValue::Float(v) => scalars.raw(name, &json_float(*v)),
                ScalarValue::Bool(v) => scalars.raw(name, if *v { "true" } else { "false" }),
                ScalarValue::Text(v) => scalars.string(name, v),
            }
        }
        j.object("scalars", scalars);
        let mut tols = JsonObject::new();
        for (name, value) in &self.tolerances {
            tols.raw(name, &json_float(*value));
        }
        j.object("tolerances", tols);
        let mut verdicts = JsonObject::new();
        for v in &self.verdicts {
            verdicts.string(&v.rule, if v.pass { "pass" } else { "fail" });
        }
        j.object("verdicts", verdicts);
        let mut matrices = JsonObject::new();
        for (name, file) in &self.matrices {
            matrices.string(name, file);
        }
        j.object("matrices", matrices);
        j.string("config", &self.config_echo);
        j.finish()
    }

    /// Writes `report.json` and `report.timing.json` under `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json())?;
        let mut timing = JsonObject::new();
        timing.raw("wall_ms", &json_float(self.wall_ms));
        std::fs::write(dir.join("report.timing.json"), timing.finish())?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

/// 17 significant digits; `1.0000000000000000e0` style exponents are valid
/// JSON numbers and round-trip exactly.
pub fn json_float(v: f64) -> String {
    assert!(v.is_finite(), "non-finite float in report JSON");
    format!("{v:.16e}")
}

struct JsonObject {
    body: String,
    first: bool,
}

impl JsonObject {
    fn new() -> JsonObject {
        JsonObject {
            body: String::from("{"),
            first: true,
        }
    }

    fn key(&mut self, key: &str) {
        if !self.first {
            self.body.push(',');
        }
        self.first = false;
        self.body.push('\n');
        self.body.push_str("  ");
        self.body.push_str(&json_string(key));
        self.body.push_str(": ");
    }

    fn raw(&mut self, key: &str, value: &str) {
        self.key(key);
        self.body.push_str(value);
    }

    fn string(&mut self, key: &str, value: &str) {
        self.key(key);
        self.body.push_str(&json_string(value));
    }

    fn object(&mut self, key: &str, inner: JsonObject) {
        let inner = inner.finish();
        self.key(key);
        self.body.push_str(&inner.replace('\n', "\n  "));
    }

    fn finish(mut self) -> String {
        if !self.first {
            self.body.push('\n');
        }
        self.body.push('}');
        self.body
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                write!(out, "\\u{:04x}", c as u32).unwrap();
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn write_matrix_csv(path: &Path, m: &CMatrix) -> std::io::Result<()> {
    let complex = m.iter().any(|z| z.im != 0.0);
    let mut out = String::new();
    writeln!(out, "{},{},{}", m.nrows(), m.ncols(), complex as u8).unwrap();
    for z in m.iter() {
        if complex {
            writeln!(out, "{},{}", json_float(z.re), json_float(z.im)).unwrap();
        } else {
            writeln!(out, "{}", json_float(z.re)).unwrap();
        }
    }
    std::fs::write(path, out)
}

pub fn write_real_rows_csv(path: &Path, rows: &[Vec<f64>], cols: usize) -> std::io::Result<()> {
    let mut out = String::new();
    writeln!(out, "{},{},0", rows.len(), cols).unwrap();
    for row in rows {
        assert_eq!(row.len(), cols);
        for v in row {
            writeln!(out, "{}", json_float(*v)).unwrap();
        }
    }
    std::fs::write(path, out)
}

#[derive(Debug)]
pub enum CsvError {
    Io(std::io::Error),
    Malformed(String),
}

impl std::fmt::Display for CsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CsvError::Io(e) => write!(f, "{e}"),
            CsvError::Malformed(m) => write!(f, "malformed matrix file: {m}"),
        }
    }
}

impl std::error::Error for CsvError {}

pub fn read_matrix_csv(path: &Path) -> Result<CMatrix, CsvError> {
    let text = std::fs::read_to_string(path).map_err(CsvError::Io)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CsvError::Malformed("empty file".into()))?;
    let parts: Vec<&str> = header.split(',').map(str::trim).collect();
    let [rows, cols, complex] = parts.as_slice() else {
        return Err(CsvError::Malformed(format!(
            "header `{header}` is not `rows,cols,complex`"
        )));
    };
    let rows: usize = rows
        .parse()
        .map_err(|_| CsvError::Malformed(format!("bad row count `{rows}`")))?;
    let cols: usize = cols
        .parse()
        .map_err(|_| CsvError::Malformed(format!("bad column count `{cols}`")))?;
    let complex = match *complex {
        "0" => false,
        "1" => true,
        other => {
            return Err(CsvError::Malformed(format!(
                "complex flag must be 0 or 1, got `{other}`"
            )))
        }
    };
    let mut entries = Vec::with_capacity(rows * cols);
    for line in lines {
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let entry = match (complex, parts.as_slice()) {
            (false, [re]) => Complex64::from(
                re.parse::<f64>()
                    .map_err(|_| CsvError::Malformed(format!("bad entry `{re}`")))?,
            ),
            (true, [re, im]) => Complex64::new(
                re.parse::<f64>()
                    .map_err(|_| CsvError::Malformed(format!("bad entry `{re}`")))?,
                im.parse::<f64>()
                    .map_err(|_| CsvError::Malformed(format!("bad entry `{im}`")))?,
            ),
            _ => {
                return Err(CsvError::Malformed(format!(
                    "line `{line}` does not match the header's complex flag"
                )))
            }
        };
        entries.push(entry);
    }
    if entries.len() != rows * cols {
        return Err(CsvError::Malformed(format!(
            "expected {} entries, found {}",
            rows * cols,
            entries.len()
        )));
    }
    CMatrix::from_shape_vec((rows, cols), entries)
        .map_err(|e| CsvError::Malformed(e.to_string()))
}
