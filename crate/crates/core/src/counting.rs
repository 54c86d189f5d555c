//! Eigenvalue counting through the boundary space: the negative-count and
//! gap-count index formulas, their dense spectral oracles, gap detection,
//! left-edge buffers, and the sectoriality check for non-Hermitian couplings.
//!
//! Every formula-side count is paired with a direct count on the same
//! discretization inside one [`CountReport`], so agreement is an integer
//! equality, not a tolerance comparison.

use num_complex::Complex64;
use thiserror::Error;

use crate::boundary::{calderon, t_operator, BoundaryData, BoundaryError};
use crate::numerics::{
    fractional_power, hermitian_eigen, hermitian_part, identity, inertia, CMatrix,
    NumericsError, ZERO_THRESHOLD_REL,
};
use crate::problems::{
    dirichlet_realization, realization_with_k, spectrum, KSpec, ModelProblem, ProblemError,
    Realization, RealizationMatrix, SpectrumList,
};

#[derive(Debug, Error)]
pub enum CountingError {
    #[error("Lambda(0) is not negative definite; the index formula hypotheses fail")]
    CalderonNotNegative,
    #[error("the coupling K is not Hermitian; counting applies to self-adjoint realizations")]
    NotHermitianK,
    #[error("the realization is not Hermitian; direct eigenvalue counts need a real spectrum")]
    NotHermitian,
    #[error("an eigenvalue of the pinned-trace realization lies in [{alpha}, {beta}]; not a gap")]
    NotAGap { alpha: f64, beta: f64 },
    #[error("epsilon = {epsilon} does not fit in a gap of width {width}")]
    EpsilonTooLarge { epsilon: f64, width: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Resolution of the inverse-square-root branch in the gap formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootConvention {
    /// Sandwich with R = (-Lambda(0))^{-1/2}: boundary matrix
    /// I + R (K - T(x)) R. Validated against the direct count.
    #[default]
    NegatedDefinite,
    /// Literal principal branch of Lambda(0)^{-1/2}, which flips the sign of
    /// the K block: I - R (K + T(x)) R. Kept for experimentation; agrees with
    /// the default only at K = 0.
    PrincipalBranch,
}

/// An open interval free of eigenvalues of the realization named by `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGap {
    pub alpha: f64,
    pub beta: f64,
    pub source: String,
}

/// A formula count and its direct oracle count over the same interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CountReport {
    pub formula_count: usize,
    pub direct_count: usize,
    pub agree: bool,
    pub ambiguous: bool,
    pub context: String,
}

const GAP_EDGE_GUARD_REL: f64 = 1e-9;

impl CountReport {
    fn new(formula: usize, direct: usize, ambiguous: bool, context: String) -> Self {
        CountReport {
            formula_count: formula,
            direct_count: direct,
            agree: formula == direct,
            ambiguous,
            context,
        }
    }
}

/// Maximal open eigenvalue-free intervals inside `window`, between
/// consecutive spectrum points, wider than `min_width`, ascending.
pub fn find_gaps(
    s: &SpectrumList,
    window: (f64, f64),
    min_width: f64,
    source: &str,
) -> Result<Vec<SpectralGap>, CountingError> {
    if !s.hermitian {
        return Err(CountingError::NotHermitian);
    }
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(CountingError::InvalidConfig(format!(
            "window ({lo}, {hi}) is empty"
        )));
    }
    let vals = s.real_values_expanded();
    let mut gaps = Vec::new();
    for pair in vals.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a >= lo && b <= hi && b - a > min_width && b - a > 0.0 {
            gaps.push(SpectralGap {
                alpha: a,
                beta: b,
                source: source.to_string(),
            });
        }
    }
    Ok(gaps)
}

/// Number of eigenvalues of a Hermitian realization in the open interval
/// `(a, b)`, counting multiplicity. Infinite endpoints are allowed.
pub fn count_direct(r: &Realization, interval: (f64, f64)) -> Result<usize, CountingError> {
    let (a, b) = interval;
    if !(a < b) {
        return Ok(0);
    }
    match &r.matrix {
        RealizationMatrix::ModeTridiag(blocks) => Ok(blocks
            .iter()
            .map(|blk| {
                let below = |x: f64| {
                    if x == f64::INFINITY {
                        blk.tri.dim()
                    } else if x == f64::NEG_INFINITY {
                        0
                    } else {
                        blk.tri.count_below(x)
                    }
                };
                blk.multiplicity * below(b).saturating_sub(below(a))
            })
            .sum()),
        RealizationMatrix::DenseHermitian(m) => {
            let (vals, _) = hermitian_eigen(m)?;
            Ok(vals.iter().filter(|v| **v > a && **v < b).count())
        }
        RealizationMatrix::DenseGeneral(_) => Err(CountingError::NotHermitian),
    }
}

/// Negative spectrum of the boundary matrix I + R (K + shift) R together with
/// the threshold-ambiguity flag.
fn boundary_matrix_inertia(
    p: &ModelProblem,
    k: &KSpec,
    t_shift: Option<&CMatrix>,
    convention: RootConvention,
) -> Result<(usize, bool), CountingError> {
    let l0 = calderon(p, Complex64::ZERO)?;
    if let (BoundaryData::Diagonal(lvals), Some(kvals)) = (&l0.data, k.mode_values(p)) {
        if lvals.iter().any(|v| v.re >= 0.0) {
            return Err(CountingError::CalderonNotNegative);
        }
        match t_shift {
            None => return Ok(scalar_inertia(p, lvals, &kvals, None, convention)),
            Some(t) => {
                let off_mass: f64 = t
                    .indexed_iter()
                    .filter(|((i, j), _)| i != j)
                    .map(|(_, v)| v.norm())
                    .sum();
                if off_mass == 0.0 {
                    let diag_t: Vec<Complex64> =
                        (0..lvals.len()).map(|i| t[[i, i]]).collect();
                    return Ok(scalar_inertia(
                        p,
                        lvals,
                        &kvals,
                        Some(&diag_t),
                        convention,
                    ));
                }
            }
        }
    }

    let lmat = hermitian_part(&l0.to_matrix());
    let (lvals, _) = hermitian_eigen(&lmat)?;
    if lvals.last().is_none_or(|top| *top >= 0.0) {
        return Err(CountingError::CalderonNotNegative);
    }
    let r = fractional_power(&lmat.mapv(|v| -v), -0.5)?;
    let kmat = k.boundary_matrix(p)?;
    let inner = match (convention, t_shift) {
        (RootConvention::NegatedDefinite, Some(t)) => &kmat - t,
        (RootConvention::NegatedDefinite, None) => kmat,
        (RootConvention::PrincipalBranch, Some(t)) => (&kmat + t).mapv(|v| -v),
        (RootConvention::PrincipalBranch, None) => kmat.mapv(|v| -v),
    };
    let b = identity(lmat.nrows()) + r.dot(&hermitian_part(&inner)).dot(&r);
    let b = hermitian_part(&b);
    // the identity block fixes the natural scale; without the floor a
    // near-cancelling boundary matrix would set its own (tiny) threshold
    let frob = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let thr = ZERO_THRESHOLD_REL * frob.max(1.0);
    let report = inertia(&b, Some(thr))?;
    Ok((report.n_minus, report.ambiguous || report.n_zero > 0))
}

fn scalar_inertia(
    p: &ModelProblem,
    lvals: &[Complex64],
    kvals: &[Complex64],
    tvals: Option<&[Complex64]>,
    convention: RootConvention,
) -> (usize, bool) {
    let mut gs = Vec::with_capacity(lvals.len());
    for i in 0..lvals.len() {
        let lam = lvals[i].re;
        let t = tvals.map_or(0.0, |t| t[i].re);
        let g = match convention {
            RootConvention::NegatedDefinite => 1.0 + (kvals[i].re - t) / (-lam),
            RootConvention::PrincipalBranch => 1.0 - (kvals[i].re + t) / (-lam),
        };
        gs.push(g);
    }
    let scale = gs.iter().fold(1.0f64, |m, g| m.max(g.abs()));
    let thr = ZERO_THRESHOLD_REL * scale;
    let mut minus = 0usize;
    let mut ambiguous = false;
    for (i, g) in gs.iter().enumerate() {
        let mult = p.modes[i].multiplicity;
        if *g < -thr {
            minus += mult;
        }
        if g.abs() <= thr * 10.0 {
            ambiguous = true;
        }
    }
    (minus, ambiguous)
}

fn check_negative_calderon(p: &ModelProblem) -> Result<(), CountingError> {
    let l0 = calderon(p, Complex64::ZERO)?;
    let ok = match &l0.data {
        BoundaryData::Diagonal(v) => v
            .iter()
            .all(|x| x.re < 0.0 && x.im.abs() <= 1e-8 * x.norm()),
        BoundaryData::Dense(m) => {
            let (vals, _) = hermitian_eigen(&hermitian_part(m))?;
            vals.last().is_some_and(|top| *top < 0.0)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(CountingError::CalderonNotNegative)
    }
}

/// Count of negative eigenvalues of the K-coupled realization by the boundary
/// index formula, paired with the direct count over (-inf, 0).
pub fn count_negative_formula(
    p: &ModelProblem,
    k: &KSpec,
) -> Result<CountReport, CountingError> {
    count_negative_formula_with(p, k, RootConvention::default())
}

pub fn count_negative_formula_with(
    p: &ModelProblem,
    k: &KSpec,
    convention: RootConvention,
) -> Result<CountReport, CountingError> {
    if !k.is_hermitian(p)? {
        return Err(CountingError::NotHermitianK);
    }
    check_negative_calderon(p)?;
    let (formula, ambiguous) = boundary_matrix_inertia(p, k, None, convention)?;
    let r = realization_with_k(p, k)?;
    let direct = count_direct(&r, (f64::NEG_INFINITY, 0.0))?;
    Ok(CountReport::new(
        formula,
        direct,
        ambiguous,
        format!("{} with {k:?}, interval (-inf, 0)", p.kind),
    ))
}

fn validate_gap(
    p: &ModelProblem,
    g: &SpectralGap,
    epsilon: f64,
) -> Result<(), CountingError> {
    if !(g.alpha < g.beta) {
        return Err(CountingError::InvalidConfig(format!(
            "gap ({}, {}) is empty",
            g.alpha, g.beta
        )));
    }
    let width = g.beta - g.alpha;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(CountingError::InvalidConfig(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if epsilon >= width {
        return Err(CountingError::EpsilonTooLarge { epsilon, width });
    }
    let dir = dirichlet_realization(p)?;
    // gap endpoints reported by find_gaps are themselves spectrum points,
    // located only to bisection accuracy; the interior scan starts a
    // relative hair inside so those definitional hits don't count
    let guard = GAP_EDGE_GUARD_REL * (1.0 + g.alpha.abs().max(g.beta.abs()));
    let hits = count_direct(&dir, (g.alpha + guard, g.beta - guard))?;
    if hits > 0 {
        return Err(CountingError::NotAGap {
            alpha: g.alpha,
            beta: g.beta,
        });
    }
    Ok(())
}

/// Count of eigenvalues of the K-coupled realization in (alpha, beta - eps)
/// as a difference of boundary-matrix inertias at the two trimmed endpoints,
/// paired with the direct count.
pub fn gap_count_formula(
    p: &ModelProblem,
    k: &KSpec,
    g: &SpectralGap,
    epsilon: f64,
) -> Result<CountReport, CountingError> {
    gap_count_formula_with(p, k, g, epsilon, RootConvention::default())
}

pub fn gap_count_formula_with(
    p: &ModelProblem,
    k: &KSpec,
    g: &SpectralGap,
    epsilon: f64,
    convention: RootConvention,
) -> Result<CountReport, CountingError> {
    if !k.is_hermitian(p)? {
        return Err(CountingError::NotHermitianK);
    }
    validate_gap(p, g, epsilon)?;
    check_negative_calderon(p)?;
    let x_lo = g.alpha + epsilon;
    let x_hi = g.beta - epsilon;
    let t_lo = hermitian_part(&t_operator(p, Complex64::from(x_lo))?.to_matrix());
    let t_hi = hermitian_part(&t_operator(p, Complex64::from(x_hi))?.to_matrix());
    let (n_lo, amb_lo) = boundary_matrix_inertia(p, k, Some(&t_lo), convention)?;
    let (n_hi, amb_hi) = boundary_matrix_inertia(p, k, Some(&t_hi), convention)?;
    let formula = n_hi.saturating_sub(n_lo);
    let r = realization_with_k(p, k)?;
    let direct = count_direct(&r, (g.alpha, x_hi))?;
    Ok(CountReport::new(
        formula,
        direct,
        amb_lo || amb_hi,
        format!(
            "{} with {k:?}, gap ({}, {}), epsilon {epsilon}",
            p.kind, g.alpha, g.beta
        ),
    ))
}

/// Largest value in `eps_grid` such that the K-coupled realization has no
/// eigenvalue in (alpha, alpha + eps); 0.0 when even the smallest grid value
/// captures one.
pub fn left_edge_buffer(
    p: &ModelProblem,
    k: &KSpec,
    g: &SpectralGap,
    eps_grid: &[f64],
) -> Result<f64, CountingError> {
    if eps_grid.is_empty() {
        return Err(CountingError::InvalidConfig(
            "the epsilon scan grid is empty".into(),
        ));
    }
    let width = g.beta - g.alpha;
    let mut grid: Vec<f64> = eps_grid
        .iter()
        .copied()
        .filter(|e| *e > 0.0 && *e < width)
        .collect();
    if grid.is_empty() {
        return Err(CountingError::InvalidConfig(format!(
            "no grid value lies in (0, {width})"
        )));
    }
    grid.sort_by(f64::total_cmp);
    validate_gap(p, g, grid[0])?;
    let r = realization_with_k(p, k)?;
    let mut best = 0.0f64;
    for eps in grid {
        if count_direct(&r, (g.alpha, g.alpha + eps))? == 0 {
            best = eps;
        }
    }
    Ok(best)
}

/// True iff every eigenvalue of the realization lies in the closed sector
/// with the given vertex and semi-angle, up to the angular slack. The
/// argument of a nonnegative real (including the vertex itself) is 0.
pub fn sector_check(
    r: &Realization,
    vertex: Complex64,
    semi_angle: f64,
    slack: f64,
) -> Result<bool, CountingError> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&semi_angle) {
        return Err(CountingError::InvalidConfig(format!(
            "semi-angle must lie in [0, pi/2), got {semi_angle}"
        )));
    }
    let s = spectrum(r, None)?;
    for point in &s.points {
        let w = point.value - vertex;
        let angle = if w.norm() == 0.0 { 0.0 } else { w.arg() };
        if angle.abs() > semi_angle + slack {
            return Ok(false);
        }
    }
    Ok(true)
}
