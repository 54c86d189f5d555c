//! Numerical laboratory for boundary-value realizations of second- and
//! fourth-order one-dimensional and radially reduced elliptic operators:
//! Dirichlet-to-Neumann (Calderon) operators, regularized boundary trace maps,
//! Weyl functions, eigenvalue-counting index formulas, and singular-value decay
//! of resolvent differences.

pub mod boundary;
pub mod counting;
pub mod numerics;
pub mod problems;
pub mod schatten;

pub use boundary::{
    calderon, green_residual, pz_solve, smoothing_operator, t_operator, weyl_function,
    BoundaryData, BoundaryError, BoundaryOperator, DiscreteSolution, GreenResidual,
    SmoothingSide, TestFunction, PIVOT_RATIO_LIMIT,
};
pub use counting::{
    count_direct, count_negative_formula, count_negative_formula_with, find_gaps,
    gap_count_formula, gap_count_formula_with, left_edge_buffer, sector_check, CountReport,
    CountingError, RootConvention, SpectralGap,
};
pub use numerics::{CMatrix, CVector, Inertia, NumericsError};
pub use problems::{
    build_annulus_m1, build_ball_exterior_m1, build_halfline_m1, build_interval_m1,
    build_interval_m2, dirichlet_realization, realization_with_k, spectrum,
    BoundaryBasisLabel, BoundaryCondition, Grid, KSpec, Mode, ModeLabel, ModelProblem,
    Potential, ProblemError, ProblemKind, Realization, RealizationMatrix, SpectralPoint,
    SpectrumList, TriBlock,
};
pub use schatten::{
    fit_decay_exponent, predicted_schatten_exponent, resolvent_difference_values,
    resolvent_power_difference, schatten_verdict, DecayFit, ModeDecay, SchattenClass,
    SchattenError, SchattenExponent, SingularValueList, DEFAULT_VERDICT_MARGIN,
};
