//! Sectioned key=value experiment configs.
//!
//! A config is plain text with sections `[problem]`, `[k]`, `[task]`,
//! `[tolerances]`, `[output]`, one `key = value` pair per line, `#` comments.
//! Complex values are written `re,im` (a bare `re` means imaginary part
//! zero); lists of complex pairs are separated by `;`, lists of reals by
//! `,`. Unknown keys are rejected rather than ignored, so typos surface at
//! parse time. `serialize` emits a canonical form — fixed section and key
//! order, defaults made explicit — that parses back to an equal config and
//! is the text the report hash is taken over.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

use spectriples_core::problems::DENSE_DIM_CAP;
use spectriples_core::{
    build_annulus_m1, build_ball_exterior_m1, build_halfline_m1, build_interval_m1,
    build_interval_m2, KSpec, ModelProblem, Potential, ProblemError, ProblemKind,
    SchattenClass,
};

use crate::report::read_matrix_csv;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Constant { value: f64 },
    Mathieu { amplitude: f64, shift: f64 },
    Well { base: f64, depth: f64, width: f64 },
}

impl PotentialSpec {
    pub fn to_potential(&self) -> Potential {
        match *self {
            PotentialSpec::Constant { value } => Potential::Constant(value),
            PotentialSpec::Mathieu { amplitude, shift } => {
                Potential::Mathieu { amplitude, shift }
            }
            PotentialSpec::Well { base, depth, width } => {
                Potential::Well { base, depth, width }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub length: Option<f64>,
    pub truncation: Option<f64>,
    pub r_inner: Option<f64>,
    pub r_outer: Option<f64>,
    pub cells: usize,
    pub k_max: Option<usize>,
    pub l_max: Option<usize>,
    pub potential: PotentialSpec,
}

impl ProblemSpec {
    pub fn build(&self) -> Result<ModelProblem, ProblemError> {
        let q = self.potential.to_potential();
        match self.kind {
            ProblemKind::IntervalM1 => {
                build_interval_m1(self.length.unwrap(), self.cells, q)
            }
            ProblemKind::IntervalM2 => {
                build_interval_m2(self.length.unwrap(), self.cells, q)
            }
            ProblemKind::HalflineM1 => {
                build_halfline_m1(self.truncation.unwrap(), self.cells, q)
            }
            ProblemKind::AnnulusM1 => build_annulus_m1(
                self.r_inner.unwrap(),
                self.r_outer.unwrap(),
                self.cells,
                self.k_max.unwrap(),
                q,
            ),
            ProblemKind::BallExteriorM1 => build_ball_exterior_m1(
                self.truncation.unwrap(),
                self.cells,
                self.l_max.unwrap(),
                q,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KConfig {
    None,
    Scalar(Complex64),
    SqrtModes { scale: f64 },
    ModeValues(Vec<Complex64>),
    Angular(Vec<f64>),
    DenseFile(String),
}

impl KConfig {
    /// The coupling this config describes, loading a dense matrix file
    /// relative to `base_dir`. `None` means the Dirichlet side — tasks that
    /// need a coupling report the missing `type` key.
    pub fn to_kspec(&self, base_dir: Option<&PathBuf>) -> Result<Option<KSpec>, ConfigError> {
        Ok(Some(match self {
            KConfig::None => return Ok(None),
            KConfig::Scalar(s) => KSpec::Scalar(*s),
            KConfig::SqrtModes { scale } => KSpec::SqrtModes { scale: *scale },
            KConfig::ModeValues(v) => KSpec::ModeValues(v.clone()),
            KConfig::Angular(c) => KSpec::Angular { cosine: c.clone() },
            KConfig::DenseFile(rel) => {
                let path = match base_dir {
                    Some(d) => d.join(rel),
                    None => PathBuf::from(rel),
                };
                let m = read_matrix_csv(&path)
                    .map_err(|e| invalid("file", format!("{}: {e}", path.display())))?;
                KSpec::Dense(m)
            }
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskName {
    GreenCheck,
    Calderon,
    Weyl,
    Count,
    Gaps,
    GapCount,
    Schatten,
}

impl TaskName {
    pub const ALL: [TaskName; 7] = [
        TaskName::GreenCheck,
        TaskName::Calderon,
        TaskName::Weyl,
        TaskName::Count,
        TaskName::Gaps,
        TaskName::GapCount,
        TaskName::Schatten,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskName::GreenCheck => "green-check",
            TaskName::Calderon => "calderon",
            TaskName::Weyl => "weyl",
            TaskName::Count => "count",
            TaskName::Gaps => "gaps",
            TaskName::GapCount => "gap-count",
            TaskName::Schatten => "schatten",
        }
    }

    fn parse(s: &str) -> Option<TaskName> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl std::fmt::Display for TaskName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassSpec {
    General,
    DirichletBounded,
    Elliptic,
}

impl ClassSpec {
    pub fn to_class(self) -> SchattenClass {
        match self {
            ClassSpec::General => SchattenClass::General,
            ClassSpec::DirichletBounded => SchattenClass::DirichletBounded,
            ClassSpec::Elliptic => SchattenClass::Elliptic,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            ClassSpec::General => "general",
            ClassSpec::DirichletBounded => "dirichlet_bounded",
            ClassSpec::Elliptic => "elliptic",
        }
    }
}

pub const DEFAULT_SEED: u64 = 20260822;

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub name: Option<TaskName>,
    pub z: Vec<Complex64>,
    pub power: Option<u32>,
    pub class: Option<ClassSpec>,
    pub tail_fraction: Option<f64>,
    pub drop_head: Option<usize>,
    pub window: Option<(f64, f64)>,
    pub min_width: Option<f64>,
    pub gap_index: Option<usize>,
    pub epsilon: Option<f64>,
    pub probes: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub residual: f64,
    pub margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-8,
            residual: 1e-12,
            margin: spectriples_core::DEFAULT_VERDICT_MARGIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub k: KConfig,
    pub task: TaskSpec,
    pub tolerances: Tolerances,
    pub output_dir: Option<String>,
    /// Directory the config was loaded from; resolves relative file
    /// references. Not part of the textual format.
    pub base_dir: Option<PathBuf>,
}

struct Section {
    entries: BTreeMap<String, String>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| invalid(key, format!("cannot parse `{v}`"))),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ConfigError> {
        self.take_parsed(key)?
            .ok_or_else(|| ConfigError::MissingKey(key.into()))
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some(key) = self.entries.into_keys().next() {
            return Err(ConfigError::UnknownKey(key));
        }
        Ok(())
    }
}

fn parse_complex(key: &str, text: &str) -> Result<Complex64, ConfigError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let err = || invalid(key, format!("expected `re` or `re,im`, got `{text}`"));
    match parts.as_slice() {
        [re] => Ok(Complex64::from(re.parse::<f64>().map_err(|_| err())?)),
        [re, im] => Ok(Complex64::new(
            re.parse::<f64>().map_err(|_| err())?,
            im.parse::<f64>().map_err(|_| err())?,
        )),
        _ => Err(err()),
    }
}

fn parse_complex_list(key: &str, text: &str) -> Result<Vec<Complex64>, ConfigError> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_complex(key, s))
        .collect()
}

fn parse_real_list(key: &str, text: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| invalid(key, format!("`{s}` is not a number")))
        })
        .collect()
}

const SECTION_NAMES: [&str; 5] = ["problem", "k", "task", "tolerances", "output"];

/// Parses and validates a config document. Defaults are filled in; the
/// problem section is checked against its kind (each geometry key must be
/// present exactly when the kind uses it).
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut sections: BTreeMap<String, Section> = SECTION_NAMES
        .iter()
        .map(|n| {
            (
                n.to_string(),
                Section {
                    entries: BTreeMap::new(),
                },
            )
        })
        .collect();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !sections.contains_key(name) {
                return Err(ConfigError::UnknownKey(name.to_string()));
            }
            current = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::InvalidConfig(format!(
                "line {}: `{line}` is neither `[section]` nor `key = value`",
                lineno + 1
            )));
        };
        let Some(section) = &current else {
            return Err(ConfigError::InvalidConfig(format!(
                "line {}: key before any [section]",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let entries = &mut sections.get_mut(section).unwrap().entries;
        if entries.insert(key.clone(), value).is_some() {
            return Err(invalid(&key, "given more than once"));
        }
    }

    let problem = parse_problem(sections.remove("problem").unwrap())?;
    let k = parse_k(sections.remove("k").unwrap())?;
    let task = parse_task(sections.remove("task").unwrap())?;
    let tolerances = parse_tolerances(sections.remove("tolerances").unwrap())?;
    let output_dir = parse_output(sections.remove("output").unwrap())?;

    Ok(ExperimentConfig {
        problem,
        k,
        task,
        tolerances,
        output_dir,
        base_dir: None,
    })
}

fn parse_problem(mut s: Section) -> Result<ProblemSpec, ConfigError> {
    let kind_text: String = s.require("kind")?;
    let kind = match kind_text.as_str() {
        "interval_m1" => ProblemKind::IntervalM1,
        "halfline_m1" => ProblemKind::HalflineM1,
        "interval_m2" => ProblemKind::IntervalM2,
        "annulus_m1" => ProblemKind::AnnulusM1,
        "ball_exterior_m1" => ProblemKind::BallExteriorM1,
        other => return Err(invalid("kind", format!("unknown problem kind `{other}`"))),
    };
    let cells: usize = s.require("cells")?;
    let length: Option<f64> = s.take_parsed("length")?;
    let truncation: Option<f64> = s.take_parsed("truncation")?;
    let r_inner: Option<f64> = s.take_parsed("r_inner")?;
    let r_outer: Option<f64> = s.take_parsed("r_outer")?;
    let k_max: Option<usize> = s.take_parsed("k_max")?;
    let l_max: Option<usize> = s.take_parsed("l_max")?;

    let potential = match s.take("potential").as_deref().unwrap_or("constant") {
        "constant" => PotentialSpec::Constant {
            value: s.take_parsed("q_value")?.unwrap_or(1.0),
        },
        "mathieu" => PotentialSpec::Mathieu {
            amplitude: s.require("amplitude")?,
            shift: s.require("shift")?,
        },
        "well" => PotentialSpec::Well {
            base: s.require("base")?,
            depth: s.require("depth")?,
            width: s.require("width")?,
        },
        other => {
            return Err(invalid(
                "potential",
                format!("unknown preset `{other}` (constant, mathieu, well)"),
            ))
        }
    };
    s.finish()?;

    let requirements: [(&str, bool, bool); 6] = [
        (
            "length",
            length.is_some(),
            matches!(kind, ProblemKind::IntervalM1 | ProblemKind::IntervalM2),
        ),
        (
            "truncation",
            truncation.is_some(),
            matches!(kind, ProblemKind::HalflineM1 | ProblemKind::BallExteriorM1),
        ),
        ("r_inner", r_inner.is_some(), kind == ProblemKind::AnnulusM1),
        ("r_outer", r_outer.is_some(), kind == ProblemKind::AnnulusM1),
        ("k_max", k_max.is_some(), kind == ProblemKind::AnnulusM1),
        ("l_max", l_max.is_some(), kind == ProblemKind::BallExteriorM1),
    ];
    for (key, present, wanted) in requirements {
        if wanted && !present {
            return Err(ConfigError::MissingKey(key.into()));
        }
        if present && !wanted {
            return Err(invalid(key, format!("does not apply to kind {kind}")));
        }
    }

    Ok(ProblemSpec {
        kind,
        length,
        truncation,
        r_inner,
        r_outer,
        cells,
        k_max,
        l_max,
        potential,
    })
}

fn parse_k(mut s: Section) -> Result<KConfig, ConfigError> {
    let k = match s.take("type").as_deref().unwrap_or("none") {
        "none" => KConfig::None,
        "scalar" => {
            let re = s
                .take("re")
                .ok_or_else(|| ConfigError::MissingKey("re".into()))?;
            let re: f64 = re.parse().map_err(|_| invalid("re", "not a number"))?;
            let im: f64 = s.take_parsed("im")?.unwrap_or(0.0);
            KConfig::Scalar(Complex64::new(re, im))
        }
        "sqrt_modes" => KConfig::SqrtModes {
            scale: s.require("scale")?,
        },
        "mode_values" => {
            let text = s
                .take("values")
                .ok_or_else(|| ConfigError::MissingKey("values".into()))?;
            KConfig::ModeValues(parse_complex_list("values", &text)?)
        }
        "angular" => {
            let text = s
                .take("cosine")
                .ok_or_else(|| ConfigError::MissingKey("cosine".into()))?;
            KConfig::Angular(parse_real_list("cosine", &text)?)
        }
        "dense" => KConfig::DenseFile(
            s.take("file")
                .ok_or_else(|| ConfigError::MissingKey("file".into()))?,
        ),
        other => {
            return Err(invalid(
                "type",
                format!(
                    "unknown coupling type `{other}` (none, scalar, sqrt_modes, \
                     mode_values, angular, dense)"
                ),
            ))
        }
    };
    match s.finish() {
        Ok(()) => Ok(k),
        Err(ConfigError::UnknownKey(key))
            if ["re", "im", "scale", "values", "cosine", "file"].contains(&key.as_str()) =>
        {
            Err(invalid(&key, "does not apply to this coupling type"))
        }
        Err(e) => Err(e),
    }
}

fn parse_task(mut s: Section) -> Result<TaskSpec, ConfigError> {
    let name = match s.take("name") {
        None => None,
        Some(text) => Some(
            TaskName::parse(&text)
                .ok_or_else(|| invalid("name", format!("unknown task `{text}`")))?,
        ),
    };
    let z = match s.take("z") {
        None => Vec::new(),
        Some(text) => parse_complex_list("z", &text)?,
    };
    let class = match s.take("class") {
        None => None,
        Some(text) => Some(match text.as_str() {
            "general" => ClassSpec::General,
            "dirichlet_bounded" => ClassSpec::DirichletBounded,
            "elliptic" => ClassSpec::Elliptic,
            other => {
                return Err(invalid(
                    "class",
                    format!("unknown class `{other}` (general, dirichlet_bounded, elliptic)"),
                ))
            }
        }),
    };
    let window_a: Option<f64> = s.take_parsed("window_a")?;
    let window_b: Option<f64> = s.take_parsed("window_b")?;
    let window = match (window_a, window_b) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        (Some(_), None) => return Err(ConfigError::MissingKey("window_b".into())),
        (None, Some(_)) => return Err(ConfigError::MissingKey("window_a".into())),
    };
    let spec = TaskSpec {
        name,
        z,
        power: s.take_parsed("power")?,
        class,
        tail_fraction: s.take_parsed("tail_fraction")?,
        drop_head: s.take_parsed("drop_head")?,
        window,
        min_width: s.take_parsed("min_width")?,
        gap_index: s.take_parsed("gap_index")?,
        epsilon: s.take_parsed("epsilon")?,
        probes: s.take_parsed("probes")?,
        seed: s.take_parsed("seed")?.unwrap_or(DEFAULT_SEED),
    };
    s.finish()?;
    Ok(spec)
}

fn parse_tolerances(mut s: Section) -> Result<Tolerances, ConfigError> {
    let d = Tolerances::default();
    let t = Tolerances {
        hermiticity: s.take_parsed("hermiticity")?.unwrap_or(d.hermiticity),
        residual: s.take_parsed("residual")?.unwrap_or(d.residual),
        margin: s.take_parsed("margin")?.unwrap_or(d.margin),
    };
    for (key, v) in [
        ("hermiticity", t.hermiticity),
        ("residual", t.residual),
        ("margin", t.margin),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(key, "tolerance must be a finite nonnegative number"));
        }
    }
    s.finish()?;
    Ok(t)
}

fn parse_output(mut s: Section) -> Result<Option<String>, ConfigError> {
    let dir = s.take("dir");
    s.finish()?;
    Ok(dir)
}

fn push_f64(out: &mut String, key: &str, v: f64) {
    out.push_str(&format!("{key} = {v:?}\n"));
}

fn fmt_complex(z: Complex64) -> String {
    format!("{:?},{:?}", z.re, z.im)
}

/// Canonical text form: fixed section and key order, defaults written out.
/// `parse_config(serialize(cfg))` equals `cfg` (with `base_dir` cleared).
pub fn serialize(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    out.push_str("[problem]\n");
    out.push_str(&format!("kind = {}\n", cfg.problem.kind));
    out.push_str(&format!("cells = {}\n", cfg.problem.cells));
    if let Some(v) = cfg.problem.length {
        push_f64(&mut out, "length", v);
    }
    if let Some(v) = cfg.problem.truncation {
        push_f64(&mut out, "truncation", v);
    }
    if let Some(v) = cfg.problem.r_inner {
        push_f64(&mut out, "r_inner", v);
    }
    if let Some(v) = cfg.problem.r_outer {
        push_f64(&mut out, "r_outer", v);
    }
    if let Some(v) = cfg.problem.k_max {
        out.push_str(&format!("k_max = {v}\n"));
    }
    if let Some(v) = cfg.problem.l_max {
        out.push_str(&format!("l_max = {v}\n"));
    }
    match &cfg.problem.potential {
        PotentialSpec::Constant { value } => {
            out.push_str("potential = constant\n");
            push_f64(&mut out, "q_value", *value);
        }
        PotentialSpec::Mathieu { amplitude, shift } => {
            out.push_str("potential = mathieu\n");
            push_f64(&mut out, "amplitude", *amplitude);
            push_f64(&mut out, "shift", *shift);
        }
        PotentialSpec::Well { base, depth, width } => {
            out.push_str("potential = well\n");
            push_f64(&mut out, "base", *base);
            push_f64(&mut out, "depth", *depth);
            push_f64(&mut out, "width", *width);
        }
    }

    match &cfg.k {
        KConfig::None => {}
        KConfig::Scalar(v) => {
            out.push_str("\n[k]\ntype = scalar\n");
            push_f64(&mut out, "re", v.re);
            push_f64(&mut out, "im", v.im);
        }
        KConfig::SqrtModes { scale } => {
            out.push_str("\n[k]\ntype = sqrt_modes\n");
            push_f64(&mut out, "scale", *scale);
        }
        KConfig::ModeValues(v) => {
            let vals: Vec<String> = v.iter().map(|z| fmt_complex(*z)).collect();
            out.push_str("\n[k]\ntype = mode_values\n");
            out.push_str(&format!("values = {}\n", vals.join("; ")));
        }
        KConfig::Angular(c) => {
            let vals: Vec<String> = c.iter().map(|x| format!("{x:?}")).collect();
            out.push_str("\n[k]\ntype = angular\n");
            out.push_str(&format!("cosine = {}\n", vals.join(", ")));
        }
        KConfig::DenseFile(f) => {
            out.push_str("\n[k]\ntype = dense\n");
            out.push_str(&format!("file = {f}\n"));
        }
    }

    out.push_str("\n[task]\n");
    if let Some(name) = cfg.task.name {
        out.push_str(&format!("name = {name}\n"));
    }
    if !cfg.task.z.is_empty() {
        let zs: Vec<String> = cfg.task.z.iter().map(|z| fmt_complex(*z)).collect();
        out.push_str(&format!("z = {}\n", zs.join("; ")));
    }
    if let Some(v) = cfg.task.power {
        out.push_str(&format!("power = {v}\n"));
    }
    if let Some(c) = cfg.task.class {
        out.push_str(&format!("class = {}\n", c.as_str()));
    }
    if let Some(v) = cfg.task.tail_fraction {
        push_f64(&mut out, "tail_fraction", v);
    }
    if let Some(v) = cfg.task.drop_head {
        out.push_str(&format!("drop_head = {v}\n"));
    }
    if let Some((a, b)) = cfg.task.window {
        push_f64(&mut out, "window_a", a);
        push_f64(&mut out, "window_b", b);
    }
    if let Some(v) = cfg.task.min_width {
        push_f64(&mut out, "min_width", v);
    }
    if let Some(v) = cfg.task.gap_index {
        out.push_str(&format!("gap_index = {v}\n"));
    }
    if let Some(v) = cfg.task.epsilon {
        push_f64(&mut out, "epsilon", v);
    }
    if let Some(v) = cfg.task.probes {
        out.push_str(&format!("probes = {v}\n"));
    }
    out.push_str(&format!("seed = {}\n", cfg.task.seed));

    out.push_str("\n[tolerances]\n");
    push_f64(&mut out, "hermiticity", cfg.tolerances.hermiticity);
    push_f64(&mut out, "residual", cfg.tolerances.residual);
    push_f64(&mut out, "margin", cfg.tolerances.margin);

    if let Some(dir) = &cfg.output_dir {
        out.push_str("\n[output]\n");
        out.push_str(&format!("dir = {dir}\n"));
    }
    out
}

/// Reads and parses a config file, remembering its directory for relative
/// file references.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigError::InvalidConfig(format!("cannot read {}: {e}", path.display()))
    })?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(PathBuf::from);
    if let KConfig::DenseFile(_) = &cfg.k {
        let spec = cfg.k.to_kspec(cfg.base_dir.as_ref())?;
        if let Some(KSpec::Dense(m)) = spec {
            if m.nrows() > DENSE_DIM_CAP {
                return Err(invalid("file", "dense coupling exceeds the dimension cap"));
            }
        }
    }
    Ok(cfg)
}
