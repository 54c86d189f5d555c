//! Singular-value decay of resolvent-power differences between realizations.
//!
//! The difference (A_K - z)^{-l} - (A_D - z)^{-l} against the Dirichlet
//! realization is a boundary-smoothing operator: its range is spanned by the
//! columns the resolvent attaches to the eliminated boundary slots. Two
//! routes exploit or check this. The factored route builds that column space
//! explicitly per mode block and reads the singular values off a small
//! projected matrix, which is exact for mode-diagonal couplings and cheap
//! enough to scale in the mode cutoff. The dense route assembles the full
//! difference matrix and takes its SVD; it is independent of the range
//! argument and serves as the cross-check and as the only route for the
//! fourth-order interval, whose Dirichlet space is a constrained subspace
//! rather than a slice.
//!
//! Decay is measured against the boundary dimension: the radial grid is held
//! fixed, the retained singular values are the per-mode leaders expanded by
//! spherical multiplicity, and the fitted log-log slope is compared with the
//! predicted Schatten exponent, pass meaning the observed decay is no slower
//! than predicted minus an absolute margin.

use num_complex::Complex64;
use thiserror::Error;

use crate::boundary::PIVOT_RATIO_LIMIT;
use crate::numerics::{
    adjoint, hermitian_eigen, identity, singular_values, BandMatrix, BandedLu, CMatrix,
    CVector, NumericsError, SymTridiag,
};
use crate::problems::{
    dirichlet_realization, realization_with_k, BoundaryCondition, KSpec, ModeLabel,
    ModelProblem, ProblemError, ProblemKind, Realization, RealizationMatrix,
    DENSE_DIM_CAP,
};

/// Absolute margin subtracted from the predicted decay exponent in
/// [`schatten_verdict`] when callers have no reason to override it. Log-log
/// fits at desk-scale mode cutoffs carry visible curvature, and the
/// membership claims bound decay from below only.
pub const DEFAULT_VERDICT_MARGIN: f64 = 0.15;

/// Singular values below this fraction of the leader are treated as
/// discretization floor and excluded from fits.
pub const SV_RELATIVE_FLOOR: f64 = 1e-12;

/// Minimum number of points a decay fit needs after windowing.
pub const FIT_MIN_POINTS: usize = 10;

/// Errors from difference assembly and decay measurement.
#[derive(Debug, Error)]
pub enum SchattenError {
    #[error(
        "energy {z} sits on (or too close to) the spectrum of a realization \
         (singularity ratio {pivot_ratio:.2e}); move z off the real axis or \
         away from the eigenvalues"
    )]
    SpectrumHit { z: Complex64, pivot_ratio: f64 },
    #[error(
        "decay window keeps {available} singular values, fewer than the \
         {FIT_MIN_POINTS} a slope needs; raise the mode cutoff or widen the \
         window"
    )]
    InsufficientTail { available: usize },
    #[error("invalid combination: {0}")]
    InvalidCombination(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Operator class selecting which predicted exponent applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchattenClass {
    /// Closed, possibly unbounded couplings.
    General,
    /// Couplings bounded relative to the Dirichlet system; first power only.
    DirichletBounded,
    /// Elliptic (regular) realizations.
    Elliptic,
}

/// A Schatten index p stored as a reduced fraction, so predictions stay
/// exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchattenExponent {
    pub num: u32,
    pub den: u32,
}

impl SchattenExponent {
    fn reduced(num: u32, den: u32) -> Self {
        let g = gcd(num, den);
        SchattenExponent {
            num: num / g,
            den: den / g,
        }
    }

    /// p as a float.
    pub fn value(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    /// The decay exponent 1/p: membership in S_p means s_j = O(j^{-1/p}).
    pub fn decay_exponent(self) -> f64 {
        f64::from(self.den) / f64::from(self.num)
    }
}

impl std::fmt::Display for SchattenExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// The singular values one mode block contributes: its top values (one per
/// boundary slot of the block), descending, and how many identical copies of
/// the block the full operator holds.
#[derive(Debug, Clone)]
pub struct ModeDecay {
    pub label: ModeLabel,
    pub multiplicity: usize,
    pub values: Vec<f64>,
}

/// Multiplicity-expanded, descending singular values of one resolvent-power
/// difference, with the per-mode bookkeeping they came from.
#[derive(Debug, Clone)]
pub struct SingularValueList {
    /// Expanded values, descending; length equals the expanded boundary
    /// dimension when produced by [`resolvent_difference_values`].
    pub values: Vec<f64>,
    pub modes: Vec<ModeDecay>,
    pub z: Complex64,
    pub power: u32,
    pub pair: String,
}

impl SingularValueList {
    /// Assembles the expanded list from per-mode contributions, validating
    /// that each block's values are finite, nonnegative and descending.
    pub fn from_modes(
        modes: Vec<ModeDecay>,
        z: Complex64,
        power: u32,
        pair: String,
    ) -> Result<Self, SchattenError> {
        let mut values = Vec::new();
        for m in &modes {
            if m.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(SchattenError::InvalidCombination(format!(
                    "mode {} carries a negative or non-finite singular value",
                    m.label
                )));
            }
            if m.values.windows(2).any(|w| w[1] > w[0]) {
                return Err(SchattenError::InvalidCombination(format!(
                    "mode {} values are not descending",
                    m.label
                )));
            }
            for _ in 0..m.multiplicity {
                values.extend_from_slice(&m.values);
            }
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("values checked finite"));
        Ok(SingularValueList {
            values,
            modes,
            z,
            power,
            pair,
        })
    }

    /// A list for synthetic decay data, one pseudo-mode per value.
    pub fn synthetic(values: Vec<f64>) -> Result<Self, SchattenError> {
        let modes = values
            .iter()
            .map(|&v| ModeDecay {
                label: ModeLabel::Single,
                multiplicity: 1,
                values: vec![v],
            })
            .collect();
        Self::from_modes(modes, Complex64::ZERO, 1, "synthetic".into())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One value per mode block — the block leader — descending. Collapsing
    /// spherical multiplicities this way steepens the fitted decay by a
    /// factor of the boundary dimension's growth rate.
    pub fn collapsed(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .modes
            .iter()
            .map(|m| m.values.first().copied().unwrap_or(0.0))
            .collect();
        v.sort_by(|a, b| b.partial_cmp(a).expect("values checked finite"));
        v
    }
}

/// Least-squares decay measurement against a predicted exponent.
#[derive(Debug, Clone)]
pub struct DecayFit {
    /// Slope of -log s_j against log j over the window.
    pub fitted_exponent: f64,
    pub r_squared: f64,
    /// First and last 1-based indices used, inclusive.
    pub window: (usize, usize),
    /// Predicted Schatten index p.
    pub predicted_p: f64,
    /// Predicted decay exponent 1/p.
    pub predicted_exponent: f64,
}

/// The predicted Schatten index p for the resolvent-power difference of a
/// problem in ambient dimension `n` with operator order `2m` and power `l`.
pub fn predicted_schatten_exponent(
    n: usize,
    m: usize,
    ell: u32,
    class: SchattenClass,
) -> Result<SchattenExponent, SchattenError> {
    if n == 0 || m == 0 {
        return Err(SchattenError::InvalidCombination(
            "ambient dimension and half-order must be positive".into(),
        ));
    }
    if n == 1 {
        return Err(SchattenError::InvalidCombination(
            "a zero-dimensional boundary (n = 1) has finite-rank differences; \
             no decay exponent is predicted"
                .into(),
        ));
    }
    check_power(ell)?;
    let n = n as u32;
    let m = m as u32;
    let p = match class {
        SchattenClass::General => SchattenExponent::reduced(2 * (n - 1), 4 * m * ell - 1),
        SchattenClass::DirichletBounded => {
            if ell != 1 {
                return Err(SchattenError::InvalidCombination(
                    "the Dirichlet-bounded class predicts the first power only".into(),
                ));
            }
            SchattenExponent::reduced(n - 1, 2 * m)
        }
        SchattenClass::Elliptic => SchattenExponent::reduced(n - 1, 2 * m * ell),
    };
    Ok(p)
}

fn check_power(ell: u32) -> Result<(), SchattenError> {
    if ell == 0 {
        return Err(SchattenError::InvalidCombination(
            "resolvent power must be at least one".into(),
        ));
    }
    if ell > 3 {
        return Err(SchattenError::InvalidCombination(format!(
            "resolvent powers above three are out of scope, got {ell}"
        )));
    }
    Ok(())
}

/// Least-squares slope of -log s_j against log j.
///
/// The window drops the first `drop_head` indices, keeps the last
/// `tail_fraction` of the list, and discards values below
/// [`SV_RELATIVE_FLOOR`] times the leader. At least [`FIT_MIN_POINTS`] values
/// must survive. The prediction is recorded in the fit so a verdict can be
/// taken later without re-deriving it.
pub fn fit_decay_exponent(
    list: &SingularValueList,
    tail_fraction: f64,
    drop_head: usize,
    predicted: SchattenExponent,
) -> Result<DecayFit, SchattenError> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(SchattenError::InvalidCombination(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let leader = list.values.first().copied().unwrap_or(0.0);
    if leader <= 0.0 {
        return Err(SchattenError::InsufficientTail { available: 0 });
    }
    let floor = SV_RELATIVE_FLOOR * leader;
    let total = list
        .values
        .iter()
        .take_while(|&&v| v >= floor)
        .count();
    let tail_len = ((tail_fraction * total as f64).ceil() as usize).min(total);
    let start = drop_head.max(total - tail_len);
    let count = total.saturating_sub(start);
    if count < FIT_MIN_POINTS {
        return Err(SchattenError::InsufficientTail { available: count });
    }

    let xs: Vec<f64> = (start + 1..=total).map(|j| (j as f64).ln()).collect();
    let ys: Vec<f64> = list.values[start..total].iter().map(|&s| -s.ln()).collect();
    let n = count as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
        syy += (y - y_mean) * (y - y_mean);
    }
    let slope = sxy / sxx;
    // syy below the rounding floor of the mean subtraction means the data is
    // constant to machine precision: the flat fit explains everything.
    let y_scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    let y_floor = n * 64.0 * (f64::EPSILON * y_scale).powi(2);
    let r_squared = if syy <= y_floor {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(DecayFit {
        fitted_exponent: slope,
        r_squared,
        window: (start + 1, total),
        predicted_p: predicted.value(),
        predicted_exponent: predicted.decay_exponent(),
    })
}

/// Pass iff the observed decay is no more than `margin` slower than
/// predicted. The margin is absolute in the exponent.
pub fn schatten_verdict(fit: &DecayFit, margin: f64) -> bool {
    fit.fitted_exponent >= fit.predicted_exponent - margin
}

fn shifted_band(t: &SymTridiag, z: Complex64) -> BandMatrix {
    let n = t.dim();
    let mut band = BandMatrix::new(n, 1, 1);
    for i in 0..n {
        band.set(i, i, Complex64::from(t.diag[i]) - z);
        if i + 1 < n {
            band.set(i, i + 1, Complex64::from(t.off[i]));
            band.set(i + 1, i, Complex64::from(t.off[i]));
        }
    }
    band
}

fn factor(t: &SymTridiag, z: Complex64) -> Result<BandedLu, SchattenError> {
    let lu = shifted_band(t, z).lu();
    let pivot_ratio = lu.pivot_ratio();
    if !pivot_ratio.is_finite() || pivot_ratio > PIVOT_RATIO_LIMIT {
        return Err(SchattenError::SpectrumHit { z, pivot_ratio });
    }
    Ok(lu)
}

/// Boundary slots eliminated by the Dirichlet realization of a second-order
/// block: (count at the front, count at the back).
fn elimination_offsets(p: &ModelProblem) -> (usize, usize) {
    if p.truncated() {
        (1, 0)
    } else {
        (1, 1)
    }
}

fn l2_norm(v: &CVector) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn inner(u: &CVector, v: &CVector) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Modified Gram-Schmidt with a reorthogonalization pass; columns that
/// collapse below 1e-13 of their original norm are dropped as dependent.
fn orthonormalize(cols: Vec<CVector>) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::with_capacity(cols.len());
    for mut v in cols {
        let original = l2_norm(&v);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for u in &basis {
                let c = inner(u, &v);
                v = &v - &(u * c);
            }
        }
        let norm = l2_norm(&v);
        if norm <= 1e-13 * original {
            continue;
        }
        basis.push(v / Complex64::from(norm));
    }
    basis
}

/// Singular values of R1(z)^l - E R2(z)^l E^T for one symmetric tridiagonal
/// block pair, where E is the isometric zero-padding of the Dirichlet slice.
///
/// The range of the difference lies exactly in the span of the columns
/// R1^{i+1} e_j over boundary slots j and 0 <= i < l, because the Dirichlet
/// block is the principal submatrix of the coupled block away from those
/// slots. Orthonormalizing that span to Q reduces the SVD to the small
/// matrix Q* D, whose rows come from l adjoint solves at the conjugate
/// energy on each side.
fn block_singular_values(
    t1: &SymTridiag,
    t2: &SymTridiag,
    z: Complex64,
    ell: u32,
    front: usize,
    back: usize,
) -> Result<Vec<f64>, SchattenError> {
    let n1 = t1.dim();
    let n2 = t2.dim();
    debug_assert_eq!(n2 + front + back, n1);
    let lu1 = factor(t1, z)?;
    let lu2 = factor(t2, z)?;
    let (lu1c, lu2c) = if z.im == 0.0 {
        (None, None)
    } else {
        (Some(factor(t1, z.conj())?), Some(factor(t2, z.conj())?))
    };
    let solve1c = |v: &CVector| -> Result<CVector, NumericsError> {
        lu1c.as_ref().unwrap_or(&lu1).solve(v)
    };
    let solve2c = |v: &CVector| -> Result<CVector, NumericsError> {
        lu2c.as_ref().unwrap_or(&lu2).solve(v)
    };

    let mut slots = vec![0];
    if back > 0 {
        slots.push(n1 - 1);
    }
    let mut cols = Vec::with_capacity(slots.len() * ell as usize);
    for &slot in &slots {
        let mut v = CVector::zeros(n1);
        v[slot] = Complex64::ONE;
        for _ in 0..ell {
            v = lu1.solve(&v)?;
            cols.push(v.clone());
        }
    }
    let basis = orthonormalize(cols);
    if basis.is_empty() {
        return Ok(Vec::new());
    }

    let mut m = CMatrix::zeros((basis.len(), n1));
    for (a, q) in basis.iter().enumerate() {
        let mut w1 = q.clone();
        for _ in 0..ell {
            w1 = solve1c(&w1)?;
        }
        let mut w2 = CVector::zeros(n2);
        for i in 0..n2 {
            w2[i] = q[i + front];
        }
        for _ in 0..ell {
            w2 = solve2c(&w2)?;
        }
        for i in 0..n1 {
            let d = if i >= front && i < front + n2 {
                w1[i] - w2[i - front]
            } else {
                w1[i]
            };
            m[[a, i]] = d.conj();
        }
    }
    Ok(singular_values(&m)?)
}

/// Per-mode singular values of (A_K - z)^{-l} - (A_D - z)^{-l} against the
/// Dirichlet realization, by the factored route.
///
/// Requires a coupling that keeps the tridiagonal block storage (real,
/// mode-diagonal). Each block contributes its top values — one per boundary
/// slot — so the expanded list length equals the expanded boundary dimension
/// and the fit index runs over the boundary space.
pub fn resolvent_difference_values(
    p: &ModelProblem,
    k: &KSpec,
    z: Complex64,
    ell: u32,
) -> Result<SingularValueList, SchattenError> {
    check_power(ell)?;
    let robin = realization_with_k(p, k)?;
    let dir = dirichlet_realization(p)?;
    let (RealizationMatrix::ModeTridiag(rb), RealizationMatrix::ModeTridiag(db)) =
        (&robin.matrix, &dir.matrix)
    else {
        return Err(SchattenError::InvalidCombination(
            "the factored route needs a real mode-diagonal coupling on a \
             second-order kind; use resolvent_power_difference for dense \
             realizations"
                .into(),
        ));
    };
    let (front, back) = elimination_offsets(p);
    let per_block = front + back;
    let mut modes = Vec::with_capacity(rb.len());
    for (b1, b2) in rb.iter().zip(db.iter()) {
        let svs = block_singular_values(&b1.tri, &b2.tri, z, ell, front, back)?;
        let mut values: Vec<f64> = svs.into_iter().take(per_block).collect();
        values.resize(per_block, 0.0);
        modes.push(ModeDecay {
            label: b1.label,
            multiplicity: b1.multiplicity,
            values,
        });
    }
    let list = SingularValueList::from_modes(
        modes,
        z,
        ell,
        format!("robin-vs-dirichlet {}", p.kind),
    )?;
    debug_assert_eq!(list.len(), p.boundary_dim_expanded());
    Ok(list)
}

fn dense_cap(total: usize) -> Result<(), SchattenError> {
    if total > DENSE_DIM_CAP {
        return Err(SchattenError::InvalidCombination(format!(
            "dense difference of dimension {total} exceeds the desk-scale cap \
             {DENSE_DIM_CAP}; use the factored route at this size"
        )));
    }
    Ok(())
}

fn tridiag_resolvent_power(
    t: &SymTridiag,
    z: Complex64,
    ell: u32,
) -> Result<CMatrix, SchattenError> {
    let lu = factor(t, z)?;
    let mut r = lu.solve_matrix(&identity(t.dim()))?;
    for _ in 1..ell {
        r = lu.solve_matrix(&r)?;
    }
    Ok(r)
}

fn hermitian_resolvent_power(
    m: &CMatrix,
    z: Complex64,
    ell: u32,
) -> Result<CMatrix, SchattenError> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let mut min_dist = f64::INFINITY;
    let mut max_dist = 0.0f64;
    let mut nearest = 0.0f64;
    for &v in &vals {
        let d = (Complex64::from(v) - z).norm();
        if d < min_dist {
            min_dist = d;
            nearest = v;
        }
        max_dist = max_dist.max(d);
    }
    // Two ways z can sit on the spectrum for practical purposes: close to
    // the nearest eigenvalue on that eigenvalue's own scale, or inside the
    // rounding resolution of the eigensolve, which is set by the full
    // spectral spread. The spread alone is not used as the indicator — it
    // would flag every stiff fourth-order grid no matter where z sits.
    let scale = nearest.abs().max(z.norm()).max(1.0);
    let resolution = 64.0 * f64::EPSILON * max_dist;
    let pivot_ratio = if min_dist == 0.0 {
        f64::INFINITY
    } else {
        (scale / min_dist).max(resolution / min_dist * PIVOT_RATIO_LIMIT)
    };
    if !pivot_ratio.is_finite() || pivot_ratio > PIVOT_RATIO_LIMIT {
        return Err(SchattenError::SpectrumHit { z, pivot_ratio });
    }
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let f = (Complex64::from(v) - z).powi(-(ell as i32));
        scaled.column_mut(j).mapv_inplace(|c| c * f);
    }
    Ok(scaled.dot(&adjoint(&vecs)))
}

/// Subtracts `small`, zero-padded with the given offsets, from `big` in
/// place.
fn subtract_embedded(big: &mut CMatrix, small: &CMatrix, front: usize) {
    let n = small.nrows();
    for i in 0..n {
        for j in 0..n {
            big[[i + front, j + front]] -= small[[i, j]];
        }
    }
}

/// Isometry from the clamped fourth-order space into the full one, in the
/// weight-symmetrized coordinates both realizations are stored in: the
/// constraint extension scaled by the square roots of the two quadrature
/// weights.
fn m2_embedding(p: &ModelProblem) -> CMatrix {
    let n = p.grid.cells;
    let free = p.clamped_free_dim();
    let w = p.trapezoid_weights();
    let mut j = CMatrix::zeros((n + 1, free));
    let mut basis = vec![0.0; free];
    for a in 0..free {
        basis[a] = 1.0;
        let full = p.clamped_extend_f64(&basis);
        basis[a] = 0.0;
        let v_a: f64 = full
            .iter()
            .zip(&w)
            .map(|(x, wi)| x * x * wi)
            .sum();
        let scale = v_a.sqrt();
        for (i, &x) in full.iter().enumerate() {
            if x != 0.0 {
                j[[i, a]] = Complex64::from(x * w[i].sqrt() / scale);
            }
        }
    }
    j
}

/// The dense matrix of (r1 - z)^{-l} - (r2 - z)^{-l} in the symmetrized
/// (mass-weighted) coordinates.
///
/// Both realizations must discretize the same problem. When one side is the
/// Dirichlet realization its resolvent is extended by the isometric
/// embedding of the clamped space before subtracting. Mode-diagonal pairs
/// come out block-diagonal, one diagonal block per mode in the problem's
/// mode order; repeated copies of a degenerate spherical block are not
/// materialized. Non-Hermitian realizations are refused — nothing here
/// depends on them and the eigencalculus route would not apply.
pub fn resolvent_power_difference(
    r1: &Realization,
    r2: &Realization,
    z: Complex64,
    ell: u32,
) -> Result<CMatrix, SchattenError> {
    check_power(ell)?;
    if r1.problem != r2.problem {
        return Err(SchattenError::InvalidCombination(
            "the realizations discretize different problems; differences are \
             only defined on a shared grid"
                .into(),
        ));
    }
    let p = &r1.problem;
    match (&r1.matrix, &r2.matrix) {
        (RealizationMatrix::ModeTridiag(b1), RealizationMatrix::ModeTridiag(b2)) => {
            if b1.len() != b2.len()
                || b1
                    .iter()
                    .zip(b2.iter())
                    .any(|(x, y)| x.label != y.label || x.multiplicity != y.multiplicity)
            {
                return Err(SchattenError::InvalidCombination(
                    "mode decompositions of the two realizations disagree".into(),
                ));
            }
            let dims: Vec<usize> = b1
                .iter()
                .zip(b2.iter())
                .map(|(x, y)| x.tri.dim().max(y.tri.dim()))
                .collect();
            let total: usize = dims.iter().sum();
            dense_cap(total)?;
            let (front, back) = elimination_offsets(p);
            let mut out = CMatrix::zeros((total, total));
            let mut offset = 0;
            for ((x, y), dim) in b1.iter().zip(b2.iter()).zip(&dims) {
                let n1 = x.tri.dim();
                let n2 = y.tri.dim();
                let block = if n1 == n2 {
                    tridiag_resolvent_power(&x.tri, z, ell)?
                        - tridiag_resolvent_power(&y.tri, z, ell)?
                } else {
                    let (big_tri, small_tri, sign) = if n1 > n2 {
                        (&x.tri, &y.tri, 1.0)
                    } else {
                        (&y.tri, &x.tri, -1.0)
                    };
                    if small_tri.dim() + front + back != big_tri.dim() {
                        return Err(SchattenError::InvalidCombination(
                            "block dimensions do not differ by the boundary \
                             elimination pattern of this kind"
                                .into(),
                        ));
                    }
                    let mut big = tridiag_resolvent_power(big_tri, z, ell)?;
                    let small = tridiag_resolvent_power(small_tri, z, ell)?;
                    subtract_embedded(&mut big, &small, front);
                    big * Complex64::from(sign)
                };
                for i in 0..*dim {
                    for jj in 0..*dim {
                        out[[offset + i, offset + jj]] = block[[i, jj]];
                    }
                }
                offset += dim;
            }
            Ok(out)
        }
        (RealizationMatrix::DenseHermitian(m1), RealizationMatrix::DenseHermitian(m2)) => {
            let n1 = m1.nrows();
            let n2 = m2.nrows();
            dense_cap(n1.max(n2))?;
            if n1 == n2 {
                return Ok(hermitian_resolvent_power(m1, z, ell)?
                    - hermitian_resolvent_power(m2, z, ell)?);
            }
            if p.kind != ProblemKind::IntervalM2 {
                return Err(SchattenError::InvalidCombination(
                    "dense realizations of unequal dimension only arise for \
                     the fourth-order interval"
                        .into(),
                ));
            }
            let (big, small, small_cond, sign) = if n1 > n2 {
                (m1, m2, &r2.condition, 1.0)
            } else {
                (m2, m1, &r1.condition, -1.0)
            };
            if !matches!(small_cond, BoundaryCondition::Dirichlet) {
                return Err(SchattenError::InvalidCombination(
                    "the smaller realization is not the Dirichlet one; no \
                     embedding of its domain is defined"
                        .into(),
                ));
            }
            let emb = m2_embedding(p);
            let pb = hermitian_resolvent_power(big, z, ell)?;
            let ps = hermitian_resolvent_power(small, z, ell)?;
            let lifted = emb.dot(&ps).dot(&adjoint(&emb));
            Ok((pb - lifted) * Complex64::from(sign))
        }
        (RealizationMatrix::DenseGeneral(_), _) | (_, RealizationMatrix::DenseGeneral(_)) => {
            Err(SchattenError::InvalidCombination(
                "non-Hermitian realizations are outside the decay harness".into(),
            ))
        }
        _ => Err(SchattenError::InvalidCombination(
            "the realizations use different storage forms; rebuild them with \
             matching couplings"
                .into(),
        )),
    }
}
