//! Discretized model problems with boundary trace maps.
//!
//! Five families are provided: second-order operators on an interval, a
//! truncated half-line, an annulus (by angular Fourier mode), and the
//! exterior of the unit ball (by spherical-harmonic degree), plus a
//! fourth-order operator on an interval. Each problem carries the grid, the
//! sampled potential, the radial metric, and the mode decomposition needed
//! to assemble interior operators and the boundary maps B (traces) and C
//! (conormal traces, oriented along the interior normal).

mod assemble;
mod kspec;
mod potential;
mod realize;
mod spectrum;

pub use kspec::KSpec;
pub use potential::Potential;
pub use realize::{
    dirichlet_realization, realization_with_k, BoundaryCondition, Realization,
    RealizationMatrix, TriBlock, DENSE_DIM_CAP,
};
pub use spectrum::{spectrum, SpectralPoint, SpectrumList};

pub(crate) use assemble::SymPenta;

use crate::numerics::NumericsError;
use thiserror::Error;

/// Errors from problem construction and realization assembly.
#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// The five supported problem families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    IntervalM1,
    HalflineM1,
    IntervalM2,
    AnnulusM1,
    BallExteriorM1,
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProblemKind::IntervalM1 => "interval_m1",
            ProblemKind::HalflineM1 => "halfline_m1",
            ProblemKind::IntervalM2 => "interval_m2",
            ProblemKind::AnnulusM1 => "annulus_m1",
            ProblemKind::BallExteriorM1 => "ball_exterior_m1",
        };
        f.write_str(s)
    }
}

/// Uniform radial/one-dimensional grid: nodes `start + i*spacing` for
/// `i = 0..=cells`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub cells: usize,
    pub spacing: f64,
    pub start: f64,
}

impl Grid {
    pub fn node(&self, i: usize) -> f64 {
        self.start + self.spacing * i as f64
    }

    pub fn end(&self) -> f64 {
        self.node(self.cells)
    }
}

/// Label of one angular mode block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeLabel {
    /// One-dimensional problems: a single block.
    Single,
    /// Circle Fourier mode `exp(i k theta)`.
    Fourier(i64),
    /// Spherical-harmonic degree; the block repeats with multiplicity 2l+1.
    SphericalDegree(u32),
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeLabel::Single => f.write_str("1d"),
            ModeLabel::Fourier(k) => write!(f, "k={k}"),
            ModeLabel::SphericalDegree(l) => write!(f, "l={l}"),
        }
    }
}

/// One mode block and how many identical copies of it the full operator
/// contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub label: ModeLabel,
    pub multiplicity: usize,
}

/// Basis label for one boundary-space coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryBasisLabel {
    /// Endpoint 0 (left) or 1 (right) of an interval, trace order 0..m.
    EndpointTrace { endpoint: usize, order: usize },
    /// Fourier mode on the inner circle.
    Fourier(i64),
    /// Spherical-harmonic degree on the unit sphere.
    SphericalDegree(u32),
}

impl std::fmt::Display for BoundaryBasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryBasisLabel::EndpointTrace { endpoint, order } => {
                write!(f, "endpoint={endpoint},order={order}")
            }
            BoundaryBasisLabel::Fourier(k) => write!(f, "k={k}"),
            BoundaryBasisLabel::SphericalDegree(l) => write!(f, "l={l}"),
        }
    }
}

/// A discretized model problem.
///
/// The interior operator acts block-diagonally over `modes`; all blocks share
/// the radial grid, the sampled potential, and the metric weight (1 in one
/// dimension, r on the annulus, r^2 outside the ball). When the right/outer
/// endpoint is a truncation it carries a pinned homogeneous Dirichlet
/// condition and is not part of the boundary space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelProblem {
    pub kind: ProblemKind,
    /// Ambient spatial dimension n.
    pub ambient_dim: usize,
    /// Half the operator order (1 for second order, 2 for fourth order).
    pub half_order: usize,
    pub grid: Grid,
    pub potential: Potential,
    pub modes: Vec<Mode>,
    /// Potential samples at all nodes 0..=cells.
    q: Vec<f64>,
    /// Metric weight at nodes.
    metric: Vec<f64>,
    /// Metric weight at cell midpoints.
    metric_half: Vec<f64>,
    truncated_right: bool,
}

impl ModelProblem {
    /// Number of grid nodes, including any pinned truncation node.
    pub fn nodes(&self) -> usize {
        self.grid.cells + 1
    }

    /// Number of interior unknowns per mode block (truncation nodes are
    /// eliminated, boundary nodes are kept).
    pub fn unknowns(&self) -> usize {
        if self.truncated_right {
            self.grid.cells
        } else {
            self.grid.cells + 1
        }
    }

    /// Whether the right/outer endpoint is a computational truncation.
    pub fn truncated(&self) -> bool {
        self.truncated_right
    }

    pub fn q_samples(&self) -> &[f64] {
        &self.q
    }

    pub(crate) fn metric(&self) -> &[f64] {
        &self.metric
    }

    pub(crate) fn metric_half(&self) -> &[f64] {
        &self.metric_half
    }

    /// Boundary-space dimension in the block basis (one coordinate per mode
    /// block and trace component; spherical multiplicities not expanded).
    pub fn boundary_dim(&self) -> usize {
        match self.kind {
            ProblemKind::IntervalM1 => 2,
            ProblemKind::IntervalM2 => 4,
            ProblemKind::HalflineM1 => 1,
            ProblemKind::AnnulusM1 | ProblemKind::BallExteriorM1 => self.modes.len(),
        }
    }

    /// Boundary-space dimension with spherical multiplicities expanded.
    pub fn boundary_dim_expanded(&self) -> usize {
        match self.kind {
            ProblemKind::BallExteriorM1 => self.modes.iter().map(|m| m.multiplicity).sum(),
            _ => self.boundary_dim(),
        }
    }

    /// Surface weight of the boundary inner product: the metric at the
    /// boundary node. Green identities and Robin coupling terms carry it.
    pub fn boundary_weight(&self) -> f64 {
        self.metric[0]
    }

    pub fn boundary_labels(&self) -> Vec<BoundaryBasisLabel> {
        match self.kind {
            ProblemKind::IntervalM1 => vec![
                BoundaryBasisLabel::EndpointTrace { endpoint: 0, order: 0 },
                BoundaryBasisLabel::EndpointTrace { endpoint: 1, order: 0 },
            ],
            ProblemKind::IntervalM2 => vec![
                BoundaryBasisLabel::EndpointTrace { endpoint: 0, order: 0 },
                BoundaryBasisLabel::EndpointTrace { endpoint: 1, order: 0 },
                BoundaryBasisLabel::EndpointTrace { endpoint: 0, order: 1 },
                BoundaryBasisLabel::EndpointTrace { endpoint: 1, order: 1 },
            ],
            ProblemKind::HalflineM1 => vec![BoundaryBasisLabel::EndpointTrace {
                endpoint: 0,
                order: 0,
            }],
            ProblemKind::AnnulusM1 => self
                .modes
                .iter()
                .map(|m| match m.label {
                    ModeLabel::Fourier(k) => BoundaryBasisLabel::Fourier(k),
                    _ => unreachable!("annulus modes are Fourier modes"),
                })
                .collect(),
            ProblemKind::BallExteriorM1 => self
                .modes
                .iter()
                .map(|m| match m.label {
                    ModeLabel::SphericalDegree(l) => BoundaryBasisLabel::SphericalDegree(l),
                    _ => unreachable!("ball modes are spherical degrees"),
                })
                .collect(),
        }
    }

    /// q plus the angular term of the given mode, at every node.
    pub(crate) fn effective_potential(&self, mode_idx: usize) -> Vec<f64> {
        let mode = self.modes[mode_idx];
        let coeff = match mode.label {
            ModeLabel::Single => 0.0,
            ModeLabel::Fourier(k) => (k * k) as f64,
            ModeLabel::SphericalDegree(l) => (l as f64) * (l as f64 + 1.0),
        };
        (0..self.nodes())
            .map(|i| {
                let r = self.grid.node(i);
                self.q[i] + if coeff == 0.0 { 0.0 } else { coeff / (r * r) }
            })
            .collect()
    }
}

fn check_positive(name: &str, value: f64) -> Result<(), ProblemError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(ProblemError::InvalidConfig(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

fn check_min_cells(cells: usize, min: usize) -> Result<(), ProblemError> {
    if cells < min {
        return Err(ProblemError::InvalidConfig(format!(
            "grid needs at least {min} cells, got {cells}"
        )));
    }
    Ok(())
}

fn check_q_lower_bound(q: &[f64], context: &str) -> Result<(), ProblemError> {
    let min = q.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(ProblemError::InvalidConfig(format!(
            "{context} requires a strictly positive potential for the truncation \
             error to decay; sampled minimum is {min}"
        )));
    }
    Ok(())
}

/// Second-order operator -u'' + q u on [0, length] with both endpoints in
/// the boundary space. Traces are u at each endpoint; conormal traces are
/// the interior-normal derivative (u'(0) and -u'(length)).
pub fn build_interval_m1(
    length: f64,
    cells: usize,
    q: Potential,
) -> Result<ModelProblem, ProblemError> {
    check_positive("length", length)?;
    check_min_cells(cells, 16)?;
    let grid = Grid {
        cells,
        spacing: length / cells as f64,
        start: 0.0,
    };
    let samples = q.sample_on(&grid)?;
    Ok(ModelProblem {
        kind: ProblemKind::IntervalM1,
        ambient_dim: 1,
        half_order: 1,
        metric: vec![1.0; cells + 1],
        metric_half: vec![1.0; cells],
        grid,
        potential: q,
        modes: vec![Mode {
            label: ModeLabel::Single,
            multiplicity: 1,
        }],
        q: samples,
        truncated_right: false,
    })
}

/// Second-order operator -u'' + q u on the half-line, truncated at
/// `truncation` with a pinned Dirichlet condition there. Only x = 0 belongs
/// to the boundary space. Requires q > 0 so the truncation error decays like
/// exp(-2 sqrt(min q) * truncation).
pub fn build_halfline_m1(
    truncation: f64,
    cells: usize,
    q: Potential,
) -> Result<ModelProblem, ProblemError> {
    check_positive("truncation", truncation)?;
    check_min_cells(cells, 16)?;
    let grid = Grid {
        cells,
        spacing: truncation / cells as f64,
        start: 0.0,
    };
    let samples = q.sample_on(&grid)?;
    check_q_lower_bound(&samples, "the truncated half-line")?;
    Ok(ModelProblem {
        kind: ProblemKind::HalflineM1,
        ambient_dim: 1,
        half_order: 1,
        metric: vec![1.0; cells + 1],
        metric_half: vec![1.0; cells],
        grid,
        potential: q,
        modes: vec![Mode {
            label: ModeLabel::Single,
            multiplicity: 1,
        }],
        q: samples,
        truncated_right: true,
    })
}

/// Fourth-order operator u'''' + q u on [0, length]. Traces are (u, u') per
/// endpoint with the derivative oriented along the interior normal; conormal
/// traces have orders 3 and 2.
pub fn build_interval_m2(
    length: f64,
    cells: usize,
    q: Potential,
) -> Result<ModelProblem, ProblemError> {
    check_positive("length", length)?;
    check_min_cells(cells, 32)?;
    let grid = Grid {
        cells,
        spacing: length / cells as f64,
        start: 0.0,
    };
    let samples = q.sample_on(&grid)?;
    Ok(ModelProblem {
        kind: ProblemKind::IntervalM2,
        ambient_dim: 1,
        half_order: 2,
        metric: vec![1.0; cells + 1],
        metric_half: vec![1.0; cells],
        grid,
        potential: q,
        modes: vec![Mode {
            label: ModeLabel::Single,
            multiplicity: 1,
        }],
        q: samples,
        truncated_right: false,
    })
}

/// Laplacian plus potential on the annulus r_inner < r < r_outer, decomposed
/// over Fourier modes k = -k_max ..= k_max. The boundary space is the inner
/// circle; the outer circle carries a pinned Dirichlet condition standing in
/// for the rest of the domain.
pub fn build_annulus_m1(
    r_inner: f64,
    r_outer: f64,
    cells: usize,
    k_max: usize,
    q: Potential,
) -> Result<ModelProblem, ProblemError> {
    check_positive("r_inner", r_inner)?;
    if !(r_outer.is_finite() && r_outer > r_inner) {
        return Err(ProblemError::InvalidConfig(format!(
            "r_outer must exceed r_inner, got {r_inner} and {r_outer}"
        )));
    }
    if k_max < 8 {
        return Err(ProblemError::InvalidConfig(format!(
            "k_max must be at least 8 to resolve the boundary space, got {k_max}"
        )));
    }
    check_min_cells(cells, 16)?;
    let grid = Grid {
        cells,
        spacing: (r_outer - r_inner) / cells as f64,
        start: r_inner,
    };
    let samples = q.sample_on(&grid)?;
    let metric: Vec<f64> = (0..=cells).map(|i| grid.node(i)).collect();
    let metric_half: Vec<f64> = (0..cells)
        .map(|i| grid.start + grid.spacing * (i as f64 + 0.5))
        .collect();
    let modes: Vec<Mode> = (-(k_max as i64)..=k_max as i64)
        .map(|k| Mode {
            label: ModeLabel::Fourier(k),
            multiplicity: 1,
        })
        .collect();
    Ok(ModelProblem {
        kind: ProblemKind::AnnulusM1,
        ambient_dim: 2,
        half_order: 1,
        grid,
        potential: q,
        modes,
        q: samples,
        metric,
        metric_half,
        truncated_right: true,
    })
}

/// Laplacian plus potential outside the unit ball, decomposed over
/// spherical-harmonic degrees 0 ..= l_max (each with multiplicity 2l+1),
/// truncated at radius `truncation` with a pinned Dirichlet condition.
/// Requires q > 0. The boundary space is the unit sphere; the interior
/// normal points outward, in the +r direction.
pub fn build_ball_exterior_m1(
    truncation: f64,
    cells: usize,
    l_max: usize,
    q: Potential,
) -> Result<ModelProblem, ProblemError> {
    if !(truncation.is_finite() && truncation > 1.0) {
        return Err(ProblemError::InvalidConfig(format!(
            "truncation radius must exceed the unit sphere, got {truncation}"
        )));
    }
    check_min_cells(cells, 16)?;
    let grid = Grid {
        cells,
        spacing: (truncation - 1.0) / cells as f64,
        start: 1.0,
    };
    let samples = q.sample_on(&grid)?;
    check_q_lower_bound(&samples, "the truncated exterior problem")?;
    let metric: Vec<f64> = (0..=cells).map(|i| grid.node(i).powi(2)).collect();
    let metric_half: Vec<f64> = (0..cells)
        .map(|i| (grid.start + grid.spacing * (i as f64 + 0.5)).powi(2))
        .collect();
    let modes: Vec<Mode> = (0..=l_max)
        .map(|l| Mode {
            label: ModeLabel::SphericalDegree(l as u32),
            multiplicity: 2 * l + 1,
        })
        .collect();
    Ok(ModelProblem {
        kind: ProblemKind::BallExteriorM1,
        ambient_dim: 3,
        half_order: 1,
        grid,
        potential: q,
        modes,
        q: samples,
        metric,
        metric_half,
        truncated_right: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_validation_rejects_bad_configs() {
        assert!(matches!(
            build_interval_m1(0.0, 100, Potential::Constant(1.0)),
            Err(ProblemError::InvalidConfig(_))
        ));
        assert!(matches!(
            build_interval_m1(1.0, 8, Potential::Constant(1.0)),
            Err(ProblemError::InvalidConfig(_))
        ));
        assert!(matches!(
            build_halfline_m1(10.0, 100, Potential::Constant(-1.0)),
            Err(ProblemError::InvalidConfig(_))
        ));
        assert!(matches!(
            build_annulus_m1(1.0, 2.0, 100, 4, Potential::Constant(1.0)),
            Err(ProblemError::InvalidConfig(_))
        ));
        assert!(matches!(
            build_annulus_m1(2.0, 1.0, 100, 8, Potential::Constant(1.0)),
            Err(ProblemError::InvalidConfig(_))
        ));
        assert!(matches!(
            build_ball_exterior_m1(0.5, 100, 4, Potential::Constant(1.0)),
            Err(ProblemError::InvalidConfig(_))
        ));
        assert!(matches!(
            build_interval_m1(1.0, 100, Potential::Samples(vec![1.0; 50])),
            Err(ProblemError::InvalidConfig(_))
        ));
    }

    #[test]
    fn mode_layout_matches_kind() {
        let p = build_annulus_m1(1.0, 2.0, 64, 8, Potential::Constant(1.0)).unwrap();
        assert_eq!(p.modes.len(), 17);
        assert_eq!(p.modes[0].label, ModeLabel::Fourier(-8));
        assert_eq!(p.modes[16].label, ModeLabel::Fourier(8));
        assert_eq!(p.boundary_dim(), 17);
        assert_eq!(p.boundary_dim_expanded(), 17);
        assert_eq!(p.unknowns(), 64);
        assert!((p.boundary_weight() - 1.0).abs() < 1e-15);

        let b = build_ball_exterior_m1(20.0, 64, 3, Potential::Constant(1.0)).unwrap();
        assert_eq!(b.modes.len(), 4);
        assert_eq!(b.modes[3].multiplicity, 7);
        assert_eq!(b.boundary_dim_expanded(), 16);
        assert!((b.boundary_weight() - 1.0).abs() < 1e-15);

        let i2 = build_interval_m2(1.0, 64, Potential::Constant(0.0)).unwrap();
        assert_eq!(i2.boundary_dim(), 4);
        assert_eq!(i2.unknowns(), 65);
    }

    #[test]
    fn well_and_mathieu_sampling() {
        let p = build_interval_m1(
            4.0,
            16,
            Potential::Well {
                base: 2.0,
                depth: 1.5,
                width: 1.0,
            },
        )
        .unwrap();
        assert_eq!(p.q_samples()[0], 0.5);
        assert_eq!(p.q_samples()[3], 0.5);
        assert_eq!(p.q_samples()[4], 2.0);
        assert_eq!(p.q_samples()[16], 2.0);

        let m = build_halfline_m1(
            std::f64::consts::PI,
            16,
            Potential::Mathieu {
                amplitude: 2.0,
                shift: 3.0,
            },
        )
        .unwrap();
        assert!((m.q_samples()[0] - 5.0).abs() < 1e-12);
        assert!((m.q_samples()[16] - 5.0).abs() < 1e-9);
    }
}
