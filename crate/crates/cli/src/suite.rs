//! Suite execution: a manifest of config files run as one batch.
//!
//! The manifest lists config paths (relative to the manifest's directory),
//! one per line, `#` comments and blank lines skipped. Every config is
//! parsed and validated before anything runs, so a typo in the last file
//! aborts the batch up front with the file named. Tasks then run in
//! parallel on a dedicated thread pool, each writing to its own
//! `NN_stem/` directory under the suite output root — no two tasks share
//! a writer. The aggregate report and `summary.csv` land in the root.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{load_config, ConfigError, ExperimentConfig};
use crate::report::{sha256_hex, ReportRecord, ScalarValue};
use crate::tasks::{run_task, TaskError};

pub const WORKERS_ENV: &str = "SPECTRIPLES_WORKERS";

#[derive(Debug)]
pub enum TaskOutcome {
    Completed(ReportRecord),
    Errored(String),
}

impl TaskOutcome {
    pub fn passed(&self) -> bool {
        match self {
            TaskOutcome::Completed(r) => r.all_passed(),
            TaskOutcome::Errored(_) => false,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            TaskOutcome::Completed(r) if r.all_passed() => "pass",
            TaskOutcome::Completed(_) => "fail",
            TaskOutcome::Errored(_) => "error",
        }
    }
}

#[derive(Debug)]
pub struct SuiteOutcome {
    pub record: ReportRecord,
    /// One `(directory stem, outcome)` pair per manifest entry, in
    /// manifest order.
    pub statuses: Vec<(String, TaskOutcome)>,
    pub all_passed: bool,
}

/// Resolves the worker count: explicit argument, then the
/// `SPECTRIPLES_WORKERS` environment variable, then the rayon default.
pub fn resolve_workers(explicit: Option<usize>) -> Result<usize, ConfigError> {
    if let Some(n) = explicit {
        return Ok(n);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(text) => text.trim().parse().map_err(|_| ConfigError::InvalidValue {
            key: WORKERS_ENV.into(),
            reason: format!("`{text}` is not a worker count"),
        }),
        Err(_) => Ok(0),
    }
}

fn dir_stem(index: usize, path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "config".into());
    format!("{index:02}_{stem}")
}

pub fn run_suite(
    manifest_path: &Path,
    out_root: &Path,
    workers: Option<usize>,
) -> Result<SuiteOutcome, TaskError> {
    let manifest_text = std::fs::read_to_string(manifest_path).map_err(|e| {
        ConfigError::InvalidConfig(format!("cannot read {}: {e}", manifest_path.display()))
    })?;
    let manifest_dir = manifest_path.parent().unwrap_or(Path::new("."));

    let entries: Vec<PathBuf> = manifest_text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| manifest_dir.join(l))
        .collect();
    if entries.is_empty() {
        return Err(ConfigError::InvalidConfig(format!(
            "manifest {} lists no configs",
            manifest_path.display()
        ))
        .into());
    }

    let mut configs: Vec<(String, ExperimentConfig)> = Vec::with_capacity(entries.len());
    for (i, path) in entries.iter().enumerate() {
        let cfg = load_config(path).map_err(|e| {
            ConfigError::InvalidConfig(format!("{}: {e}", path.display()))
        })?;
        if cfg.task.name.is_none() {
            return Err(ConfigError::InvalidConfig(format!(
                "{}: missing key `name` in [task]",
                path.display()
            ))
            .into());
        }
        configs.push((dir_stem(i, path), cfg));
    }

    let workers = resolve_workers(workers)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ConfigError::InvalidConfig(format!("thread pool: {e}")))?;

    std::fs::create_dir_all(out_root)?;
    let outcomes: Vec<TaskOutcome> = pool.install(|| {
        configs
            .par_iter()
            .map(|(stem, cfg)| match run_task(cfg, &out_root.join(stem)) {
                Ok(record) => TaskOutcome::Completed(record),
                Err(e) => TaskOutcome::Errored(e.to_string()),
            })
            .collect()
    });

    let statuses: Vec<(String, TaskOutcome)> = configs
        .iter()
        .map(|(stem, _)| stem.clone())
        .zip(outcomes)
        .collect();
    let all_passed = statuses.iter().all(|(_, o)| o.passed());

    let mut record = ReportRecord::new("suite", manifest_text.clone(), 0);
    record.input_hash = sha256_hex(manifest_text.as_bytes());
    record.int("configs", statuses.len() as i64);
    record.int(
        "passed",
        statuses.iter().filter(|(_, o)| o.passed()).count() as i64,
    );
    record.int(
        "failed",
        statuses
            .iter()
            .filter(|(_, o)| matches!(o, TaskOutcome::Completed(r) if !r.all_passed()))
            .count() as i64,
    );
    record.int(
        "errors",
        statuses
            .iter()
            .filter(|(_, o)| matches!(o, TaskOutcome::Errored(_)))
            .count() as i64,
    );
    for (stem, outcome) in &statuses {
        record.verdict(stem, outcome.passed());
    }
    record.write(out_root)?;
    std::fs::write(out_root.join("summary.csv"), summary_csv(&statuses))?;

    Ok(SuiteOutcome {
        record,
        statuses,
        all_passed,
    })
}

fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn summary_csv(statuses: &[(String, TaskOutcome)]) -> String {
    let mut out = String::from("config,task,name,value\n");
    for (stem, outcome) in statuses {
        let task = match outcome {
            TaskOutcome::Completed(r) => r.task.as_str(),
            TaskOutcome::Errored(_) => "",
        };
        let mut row = |name: &str, value: &str| {
            writeln!(
                out,
                "{},{},{},{}",
                csv_field(stem),
                csv_field(task),
                csv_field(name),
                csv_field(value)
            )
            .unwrap();
        };
        row("status", outcome.status());
        match outcome {
            TaskOutcome::Completed(r) => {
                for (name, value) in &r.scalars {
                    let text = match value {
                        ScalarValue::Int(v) => v.to_string(),
                        ScalarValue::Float(v) => crate::report::json_float(*v),
                        ScalarValue::Bool(v) => v.to_string(),
                        ScalarValue::Text(v) => v.clone(),
                    };
                    row(name, &text);
                }
                for v in &r.verdicts {
                    row(
                        &format!("verdict:{}", v.rule),
                        if v.pass { "pass" } else { "fail" },
                    );
                }
            }
            TaskOutcome::Errored(message) => row("error", message),
        }
    }
    out
}
