//! Task execution: each task turns a parsed config into a [`ReportRecord`]
//! plus CSV side files in its output directory.
//!
//! Every verdict in a report is tied to a named rule, and every tolerance a
//! verdict consults is listed in the report alongside it. Randomness (the
//! probe functions of `green-check`) comes from a counter-based generator
//! seeded from the config, and the seed is part of the record, so reports
//! are reproducible byte for byte.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use spectriples_core::numerics::{adjoint, hermitian_eigen, hermitian_part, relative_asymmetry};
use spectriples_core::{
    calderon, count_negative_formula, dirichlet_realization, find_gaps, fit_decay_exponent,
    gap_count_formula, green_residual, left_edge_buffer, predicted_schatten_exponent,
    realization_with_k, resolvent_difference_values, schatten_verdict, spectrum, weyl_function,
    BoundaryError, CVector, CountingError, KSpec, ModelProblem, NumericsError, ProblemError,
    SchattenError, TestFunction,
};

use crate::config::{ConfigError, ExperimentConfig, TaskName};
use crate::report::{write_matrix_csv, write_real_rows_csv, ReportRecord, ScalarValue};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error(transparent)]
    Schatten(#[from] SchattenError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

/// Runs the task named in `cfg` and writes `report.json`,
/// `report.timing.json` and any matrix CSVs under `out_dir` (created if
/// absent).
pub fn run_task(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ReportRecord, TaskError> {
    let name = cfg
        .task
        .name
        .ok_or_else(|| ConfigError::MissingKey("name".into()))?;
    let start = Instant::now();
    std::fs::create_dir_all(out_dir)?;
    let echo = crate::config::serialize(cfg);
    let mut record = ReportRecord::new(name.as_str(), echo, cfg.task.seed);
    let problem = cfg.problem.build()?;
    match name {
        TaskName::GreenCheck => green_check_task(cfg, &problem, &mut record)?,
        TaskName::Calderon => calderon_task(cfg, &problem, &mut record, out_dir)?,
        TaskName::Weyl => weyl_task(cfg, &problem, &mut record, out_dir)?,
        TaskName::Count => count_task(cfg, &problem, &mut record)?,
        TaskName::Gaps => gaps_task(cfg, &problem, &mut record, out_dir)?,
        TaskName::GapCount => gap_count_task(cfg, &problem, &mut record)?,
        TaskName::Schatten => schatten_task(cfg, &problem, &mut record, out_dir)?,
    }
    record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    record.write(out_dir)?;
    Ok(record)
}

fn require_k(cfg: &ExperimentConfig) -> Result<KSpec, TaskError> {
    cfg.k
        .to_kspec(cfg.base_dir.as_ref())?
        .ok_or_else(|| ConfigError::MissingKey("type".into()).into())
}

fn require_z(cfg: &ExperimentConfig) -> Result<&[Complex64], TaskError> {
    if cfg.task.z.is_empty() {
        return Err(ConfigError::MissingKey("z".into()).into());
    }
    Ok(&cfg.task.z)
}

fn require_window(cfg: &ExperimentConfig) -> Result<(f64, f64), TaskError> {
    cfg.task
        .window
        .ok_or_else(|| ConfigError::MissingKey("window_a".into()).into())
}

/// A probe supported on a strict interior window: a high-order polynomial
/// bump times a quadratic modulation, sampled on the unknown nodes of one
/// mode block. Zero at every node outside the window, so boundary and
/// truncation traces vanish exactly.
fn probe_function(
    p: &ModelProblem,
    mode_index: usize,
    window: (f64, f64),
    modulation: (f64, f64),
) -> TestFunction {
    let (a, b) = window;
    let center = 0.5 * (a + b);
    let extent = p.grid.spacing * p.grid.cells as f64;
    let vals: Vec<Complex64> = (0..p.unknowns())
        .map(|i| {
            let x = p.grid.node(i);
            if x <= a || x >= b {
                return Complex64::ZERO;
            }
            let t = (x - a) * (b - x) / ((b - a) * (b - a) / 4.0).powi(2);
            let bump = (t * t).powi(2);
            let s = (x - center) / extent;
            Complex64::from(bump * (1.0 + modulation.0 * s + modulation.1 * s * s))
        })
        .collect();
    TestFunction {
        mode_index,
        values: CVector::from(vals),
    }
}

fn random_window(rng: &mut ChaCha8Rng, p: &ModelProblem) -> (f64, f64) {
    let extent = p.grid.spacing * p.grid.cells as f64;
    let center = p.grid.start + extent * rng.random_range(0.3..0.7);
    let half_width = extent * rng.random_range(0.05..0.2);
    (center - half_width, center + half_width)
}

fn green_check_task(
    cfg: &ExperimentConfig,
    p: &ModelProblem,
    record: &mut ReportRecord,
) -> Result<(), TaskError> {
    let probes = cfg.task.probes.unwrap_or(8);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.task.seed);
    let mut max_rel = 0.0f64;
    for _ in 0..probes {
        let mode = rng.random_range(0..p.modes.len());
        let u = probe_function(
            p,
            mode,
            random_window(&mut rng, p),
            (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        );
        let v = probe_function(
            p,
            mode,
            random_window(&mut rng, p),
            (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        );
        let r = green_residual(p, &u, &v)?;
        max_rel = max_rel.max(r.relative());
    }
    record.int("probes", probes as i64);
    record.float("max_relative_residual", max_rel);
    record.tolerance("residual", cfg.tolerances.residual);
    record.verdict(
        "green-identity-compact-support",
        max_rel <= cfg.tolerances.residual,
    );
    Ok(())
}

fn calderon_task(
    cfg: &ExperimentConfig,
    p: &ModelProblem,
    record: &mut ReportRecord,
    out_dir: &Path,
) -> Result<(), TaskError> {
    let zs = require_z(cfg)?;
    record.tolerance("hermiticity", cfg.tolerances.hermiticity);
    for (i, z) in zs.iter().enumerate() {
        let op = calderon(p, *z)?;
        let m = op.to_matrix();
        let file = format!("calderon_z{i}.csv");
        write_matrix_csv(&out_dir.join(&file), &m)?;
        record.matrices.push((format!("calderon_z{i}"), file));
        let asymmetry = relative_asymmetry(&m);
        record.float(&format!("asymmetry_z{i}"), asymmetry);
        if z.im == 0.0 {
            record.verdict(
                &format!("calderon-hermitian-z{i}"),
                asymmetry <= cfg.tolerances.hermiticity,
            );
            let (eigs, _) = hermitian_eigen(&hermitian_part(&m))?;
            let lambda_max = *eigs.last().expect("boundary space is nonempty");
            record.float(&format!("lambda_max_z{i}"), lambda_max);
            if *z == Complex64::ZERO {
                record.verdict(&format!("calderon-negative-definite-z{i}"), lambda_max < 0.0);
            }
        }
    }
    Ok(())
}

fn weyl_task(
    cfg: &ExperimentConfig,
    p: &ModelProblem,
    record: &mut ReportRecord,
    out_dir: &Path,
) -> Result<(), TaskError> {
    let zs = require_z(cfg)?;
    for (i, z) in zs.iter().enumerate() {
        let m = weyl_function(p, *z)?.to_matrix();
        let file = format!("weyl_z{i}.csv");
        write_matrix_csv(&out_dir.join(&file), &m)?;
        record.matrices.push((format!("weyl_z{i}"), file));
        if *z == Complex64::ZERO {
            let norm = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
            record.float(&format!("norm_z{i}"), norm);
            record.verdict(&format!("weyl-vanishes-z{i}"), norm == 0.0);
        } else if z.im > 0.0 {
            let im_part = (&m - &adjoint(&m)) * Complex64::new(0.0, -0.5);
            let (eigs, _) = hermitian_eigen(&im_part)?;
            let min = *eigs.first().expect("boundary space is nonempty");
            record.float(&format!("herglotz_min_z{i}"), min);
            record.verdict(&format!("weyl-herglotz-z{i}"), min > 0.0);
        }
    }
    Ok(())
}

fn record_count_report(record: &mut ReportRecord, r: &spectriples_core::CountReport) {
    record.int("formula_count", r.formula_count as i64);
    record.int("direct_count", r.direct_count as i64);
    record.scalar("agree", ScalarValue::Bool(r.agree));
    record.scalar("ambiguous", ScalarValue::Bool(r.ambiguous));
    record.scalar("context", ScalarValue::Text(r.context.clone()));
}

fn count_task(
    cfg: &ExperimentConfig,
    p: &ModelProblem,
    record: &mut ReportRecord,
) -> Result<(), TaskError> {
    let k = require_k(cfg)?;
    let r = count_negative_formula(p, &k)?;
    record_count_report(record, &r);
    record.verdict("count-agreement", r.agree);
    Ok(())
}

fn gaps_task(
    cfg: &ExperimentConfig,
    p: &ModelProblem,
    record: &mut ReportRecord,
    out_dir: &Path,
) -> Result<(), TaskError> {
    let window = require_window(cfg)?;
    let min_width = cfg.task.min_width.unwrap_or(0.0);
    let (realization, source) = match cfg.k.to_kspec(cfg.base_dir.as_ref())? {
        None => (dirichlet_realization(p)?, "dirichlet"),
        Some(k) => (realization_with_k(p, &k)?, "robin"),
    };
    let sp = spectrum(&realization, Some(window))?;
    let gaps = find_gaps(&sp, window, min_width, source)?;
    let rows: Vec<Vec<f64>> = gaps.iter().map(|g| vec![g.alpha, g.beta]).collect();
    write_real_rows_csv(&out_dir.join("gaps.csv"), &rows, 2)?;
    record.matrices.push(("gaps".into(), "gaps.csv".into()));
    record.int("gap_count", gaps.len() as i64);
    record.scalar("source", ScalarValue::Text(source.into()));
    Ok(())
}

fn gap_count_task(
    cfg: &ExperimentConfig,
    p: &ModelProblem,
    record: &mut ReportRecord,
) -> Result<(), TaskError> {
    let window = require_window(cfg)?;
    let epsilon = cfg
        .task
        .epsilon
        .ok_or_else(|| ConfigError::MissingKey("epsilon".into()))?;
    let k = require_k(cfg)?;
    let min_width = cfg.task.min_width.unwrap_or(0.0);
    let index = cfg.task.gap_index.unwrap_or(0);

    let dirichlet = dirichlet_realization(p)?;
    let sp = spectrum(&dirichlet, Some(window))?;
    let gaps = find_gaps(&sp, window, min_width, "dirichlet")?;
    let Some(gap) = gaps.get(index) else {
        return Err(ConfigError::InvalidValue {
            key: "gap_index".into(),
            reason: format!("only {} gaps found in the window", gaps.len()),
        }
        .into());
    };
    record.float("alpha", gap.alpha);
    record.float("beta", gap.beta);

    let r = gap_count_formula(p, &k, gap, epsilon)?;
    record_count_report(record, &r);
    record.verdict("gap-count-agreement", r.agree);

    let width = gap.beta - gap.alpha;
    let steps = 25usize;
    let ratio = (0.45f64 / 1e-4).powf(1.0 / (steps - 1) as f64);
    let grid: Vec<f64> = (0..steps)
        .map(|i| width * 1e-4 * ratio.powi(i as i32))
        .collect();
    let buffer = left_edge_buffer(p, &k, gap, &grid)?;
    record.float("left_edge_buffer", buffer);
    record.verdict("left-edge-clear", buffer > 0.0);
    Ok(())
}

fn schatten_task(
    cfg: &ExperimentConfig,
    p: &ModelProblem,
    record: &mut ReportRecord,
    out_dir: &Path,
) -> Result<(), TaskError> {
    let k = require_k(cfg)?;
    let z = require_z(cfg)?[0];
    let ell = cfg.task.power.unwrap_or(1);
    let class = cfg
        .task
        .class
        .map(|c| c.to_class())
        .unwrap_or(spectriples_core::SchattenClass::Elliptic);

    let svs = resolvent_difference_values(p, &k, z, ell)?;
    let rows: Vec<Vec<f64>> = svs.values.iter().map(|v| vec![*v]).collect();
    write_real_rows_csv(&out_dir.join("singular_values.csv"), &rows, 1)?;
    record
        .matrices
        .push(("singular_values".into(), "singular_values.csv".into()));

    let predicted = predicted_schatten_exponent(p.ambient_dim, p.half_order, ell, class)?;
    let tail_fraction = cfg.task.tail_fraction.unwrap_or(1.0);
    let drop_head = cfg.task.drop_head.unwrap_or(svs.values.len() / 10);
    let fit = fit_decay_exponent(&svs, tail_fraction, drop_head, predicted)?;

    record.int("power", ell as i64);
    record.int("boundary_values", svs.values.len() as i64);
    record.float("fitted_exponent", fit.fitted_exponent);
    record.float("r_squared", fit.r_squared);
    record.float("predicted_p", fit.predicted_p);
    record.float("predicted_exponent", fit.predicted_exponent);
    record.int("window_start", fit.window.0 as i64);
    record.int("window_end", fit.window.1 as i64);

    record.tolerance("margin", cfg.tolerances.margin);
    record.verdict("schatten-decay", schatten_verdict(&fit, cfg.tolerances.margin));

    let leader = svs.values[0];
    let last_retained = svs.values[fit.window.1 - 1];
    let tail_ratio = if leader > 0.0 { last_retained / leader } else { 0.0 };
    record.float("retained_tail_ratio", tail_ratio);
    record.tolerance("compact_ratio", 1e-3);
    record.verdict(
        "schatten-compact",
        fit.fitted_exponent > 0.0 && tail_ratio < 1e-3,
    );
    Ok(())
}
