//! Boundary-space operators: Dirichlet-to-conormal (Calderon) maps, the
//! tangential smoothing powers that regularize them, Weyl functions, and the
//! Green-identity residual that certifies the trace pairing.
//!
//! For second-order kinds the Calderon entries come from one-sided conormal
//! stencils applied to the discrete z-harmonic extension. The fourth-order
//! interval instead evaluates the quadratic form on lifted traces: that route
//! is symmetric in exact arithmetic for every z, which the one-sided stencils
//! are not, and it block-diagonalizes against the clamped subspace so the
//! counting identities downstream hold without a symmetrization fudge.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{BandMatrix, BandedLu, CMatrix, CVector, NumericsError};
use crate::problems::{
    BoundaryBasisLabel, ModeLabel, ModelProblem, ProblemError, ProblemKind, SymPenta,
};

/// Pivot-spread ceiling above which a shifted solve is treated as sitting on
/// an eigenvalue of the pinned-trace (Dirichlet) operator.
pub const PIVOT_RATIO_LIMIT: f64 = 1e12;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error(
        "z = {z} is numerically an eigenvalue of the pinned-trace realization \
         (pivot spread {pivot_ratio:.2e}); shift the potential to move the spectrum"
    )]
    DirichletEigenvalueHit { z: Complex64, pivot_ratio: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Discrete z-harmonic extension, one vector of interior unknowns per mode
/// block (a single block for the interval kinds).
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub blocks: Vec<CVector>,
}

/// Storage of an operator on the boundary space.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    /// Diagonal in the mode (or endpoint-trace) basis.
    Diagonal(Vec<Complex64>),
    Dense(CMatrix),
}

/// An operator on the boundary space, with the basis labels it is written in.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOperator {
    pub data: BoundaryData,
    pub labels: Vec<BoundaryBasisLabel>,
}

impl BoundaryOperator {
    pub fn dim(&self) -> usize {
        match &self.data {
            BoundaryData::Diagonal(v) => v.len(),
            BoundaryData::Dense(m) => m.nrows(),
        }
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        match &self.data {
            BoundaryData::Diagonal(v) => {
                if a == b {
                    v[a]
                } else {
                    Complex64::ZERO
                }
            }
            BoundaryData::Dense(m) => m[[a, b]],
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        match &self.data {
            BoundaryData::Diagonal(v) => {
                let mut m = CMatrix::zeros((v.len(), v.len()));
                for (i, x) in v.iter().enumerate() {
                    m[[i, i]] = *x;
                }
                m
            }
            BoundaryData::Dense(m) => m.clone(),
        }
    }

    pub fn diagonal(&self) -> Option<&[Complex64]> {
        match &self.data {
            BoundaryData::Diagonal(v) => Some(v),
            BoundaryData::Dense(_) => None,
        }
    }
}

/// Which trace-order block a smoothing power acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingSide {
    /// The Dirichlet-trace side (order-0 traces).
    Trace,
    /// The conormal side (order 2m-1 traces).
    Conormal,
}

fn lu_checked(band: BandMatrix, z: Complex64) -> Result<BandedLu, BoundaryError> {
    let lu = band.lu();
    let pivot_ratio = lu.pivot_ratio();
    if !pivot_ratio.is_finite() || pivot_ratio > PIVOT_RATIO_LIMIT {
        return Err(BoundaryError::DirichletEigenvalueHit { z, pivot_ratio });
    }
    Ok(lu)
}

fn apply_row(row: &[(usize, f64)], u: &[Complex64]) -> Complex64 {
    row.iter().map(|&(i, w)| u[i] * w).sum()
}

/// Solve (A - z) u = 0 with prescribed traces B u = phi, one entry of `phi`
/// per boundary basis vector (per mode for the circle and sphere kinds).
pub fn pz_solve(
    p: &ModelProblem,
    z: Complex64,
    phi: &CVector,
) -> Result<DiscreteSolution, BoundaryError> {
    let d = p.boundary_dim();
    if phi.len() != d {
        return Err(ProblemError::DimensionMismatch(format!(
            "trace data has {} entries, boundary space has dimension {d}",
            phi.len()
        ))
        .into());
    }
    let mut blocks = Vec::new();
    match p.kind {
        ProblemKind::HalflineM1 | ProblemKind::AnnulusM1 | ProblemKind::BallExteriorM1 => {
            for idx in 0..p.modes.len() {
                let lu = lu_checked(p.pz_band_m1(idx, z), z)?;
                let mut rhs = vec![Complex64::ZERO; p.unknowns()];
                rhs[0] = phi[idx];
                lu.solve_in_place(&mut rhs)?;
                blocks.push(CVector::from(rhs));
            }
        }
        ProblemKind::IntervalM1 => {
            let dim = p.unknowns();
            let lu = lu_checked(p.pz_band_m1(0, z), z)?;
            let mut rhs = vec![Complex64::ZERO; dim];
            rhs[0] = phi[0];
            rhs[dim - 1] = phi[1];
            lu.solve_in_place(&mut rhs)?;
            blocks.push(CVector::from(rhs));
        }
        ProblemKind::IntervalM2 => {
            let dim = p.unknowns();
            let lu = lu_checked(p.pz_band_m2(z), z)?;
            let mut rhs = vec![Complex64::ZERO; dim];
            rhs[0] = phi[0];
            rhs[1] = phi[2];
            rhs[dim - 2] = phi[3];
            rhs[dim - 1] = phi[1];
            lu.solve_in_place(&mut rhs)?;
            blocks.push(CVector::from(rhs));
        }
    }
    Ok(DiscreteSolution { blocks })
}

/// The Calderon (Dirichlet-to-conormal) operator: column j carries the
/// conormal traces of the z-harmonic extension of the j-th trace basis
/// vector.
pub fn calderon(p: &ModelProblem, z: Complex64) -> Result<BoundaryOperator, BoundaryError> {
    let labels = p.boundary_labels();
    let data = match p.kind {
        ProblemKind::HalflineM1 | ProblemKind::AnnulusM1 | ProblemKind::BallExteriorM1 => {
            let c_row = &p.trace_c_rows()[0];
            let mut vals = Vec::with_capacity(p.modes.len());
            for idx in 0..p.modes.len() {
                let lu = lu_checked(p.pz_band_m1(idx, z), z)?;
                let mut rhs = vec![Complex64::ZERO; p.unknowns()];
                rhs[0] = Complex64::ONE;
                lu.solve_in_place(&mut rhs)?;
                vals.push(apply_row(c_row, &rhs));
            }
            BoundaryData::Diagonal(vals)
        }
        ProblemKind::IntervalM1 => {
            let c_rows = p.trace_c_rows();
            let dim = p.unknowns();
            let lu = lu_checked(p.pz_band_m1(0, z), z)?;
            let mut m = CMatrix::zeros((2, 2));
            for b in 0..2 {
                let mut rhs = vec![Complex64::ZERO; dim];
                rhs[if b == 0 { 0 } else { dim - 1 }] = Complex64::ONE;
                lu.solve_in_place(&mut rhs)?;
                for (a, row) in c_rows.iter().enumerate() {
                    m[[a, b]] = apply_row(row, &rhs);
                }
            }
            BoundaryData::Dense(m)
        }
        ProblemKind::IntervalM2 => BoundaryData::Dense(calderon_m2(p, z)?),
    };
    Ok(BoundaryOperator { data, labels })
}

fn apply_shifted_penta(
    s: &SymPenta,
    w: &[f64],
    z: Complex64,
    u: &[Complex64],
) -> Vec<Complex64> {
    let mut y = s.mat_vec(u);
    for (i, yi) in y.iter_mut().enumerate() {
        *yi -= z * w[i] * u[i];
    }
    y
}

fn bilinear(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Form-evaluated Calderon matrix of the fourth-order interval:
/// Lambda_ab = -l_a^T (S - zW) u_b where u_b is the trace lift l_b corrected
/// inside the clamped subspace. The bilinear pairing with the symmetric
/// pentadiagonal form makes the matrix exactly symmetric for every z.
fn calderon_m2(p: &ModelProblem, z: Complex64) -> Result<CMatrix, BoundaryError> {
    let (s_free, w_free) = p.clamped_penta();
    let lu = lu_checked(s_free.to_band(z, &w_free), z)?;
    let (s0, w) = p.form_m2();
    let nodes = p.nodes();
    let lifts = p.trace_lifts();
    let mut extensions: Vec<Vec<Complex64>> = Vec::with_capacity(lifts.len());
    for lift in &lifts {
        let mut l_full = vec![Complex64::ZERO; nodes];
        for &(i, v) in lift {
            l_full[i] = Complex64::from(v);
        }
        let y = apply_shifted_penta(&s0, &w, z, &l_full);
        let mut rhs: Vec<Complex64> = p.clamped_restrict(&y).iter().map(|v| -v).collect();
        lu.solve_in_place(&mut rhs)?;
        let corr = p.clamped_extend(&rhs);
        let u: Vec<Complex64> = l_full.iter().zip(&corr).map(|(a, b)| a + b).collect();
        extensions.push(u);
    }
    let d = lifts.len();
    let mut m = CMatrix::zeros((d, d));
    for b in 0..d {
        let y = apply_shifted_penta(&s0, &w, z, &extensions[b]);
        for a in 0..=b {
            let v = -bilinear(&extensions[a], &y);
            m[[a, b]] = v;
            m[[b, a]] = v;
        }
    }
    Ok(m)
}

/// Diagonal smoothing power of the shifted tangential Laplacian. On point
/// boundaries the tangential Laplacian of the single basis function is 0, so
/// the shifted power is the identity; on the circle and sphere the trace-side
/// exponent is m_j/2 + 1/4 and the conormal-side exponent m - mu_j/2 - 1/4,
/// which for the second-order kinds both come to 1/4.
pub fn smoothing_operator(p: &ModelProblem, side: SmoothingSide) -> BoundaryOperator {
    let labels = p.boundary_labels();
    let vals: Vec<Complex64> = match p.kind {
        ProblemKind::IntervalM1 | ProblemKind::HalflineM1 | ProblemKind::IntervalM2 => {
            vec![Complex64::ONE; p.boundary_dim()]
        }
        ProblemKind::AnnulusM1 | ProblemKind::BallExteriorM1 => {
            let exponent = match side {
                SmoothingSide::Trace => 0.0 / 2.0 + 0.25,
                SmoothingSide::Conormal => 1.0 - 1.0 / 2.0 - 0.25,
            };
            p.modes
                .iter()
                .map(|mode| {
                    let ev = match mode.label {
                        ModeLabel::Fourier(k) => (k * k) as f64 + 1.0,
                        ModeLabel::SphericalDegree(l) => (l * (l + 1)) as f64 + 1.0,
                        ModeLabel::Single => 1.0,
                    };
                    Complex64::from(ev.powf(exponent))
                })
                .collect()
        }
    };
    BoundaryOperator {
        data: BoundaryData::Diagonal(vals),
        labels,
    }
}

fn subtract(a: BoundaryOperator, b: &BoundaryOperator) -> BoundaryOperator {
    let data = match (a.data, &b.data) {
        (BoundaryData::Diagonal(x), BoundaryData::Diagonal(y)) => {
            BoundaryData::Diagonal(x.iter().zip(y).map(|(p, q)| p - q).collect())
        }
        (BoundaryData::Dense(x), BoundaryData::Dense(y)) => BoundaryData::Dense(&x - y),
        _ => unreachable!("calderon storage is determined by the problem kind"),
    };
    BoundaryOperator {
        data,
        labels: a.labels,
    }
}

/// T(z) = Lambda(z) - Lambda(0). Exactly zero at z = 0.
pub fn t_operator(p: &ModelProblem, z: Complex64) -> Result<BoundaryOperator, BoundaryError> {
    let lz = calderon(p, z)?;
    let l0 = calderon(p, Complex64::ZERO)?;
    Ok(subtract(lz, &l0))
}

/// Regularized Weyl function M(z) = S_mu (Lambda(z) - Lambda(0)) S_m with the
/// diagonal smoothing powers of [`smoothing_operator`]. Exactly zero at z = 0.
pub fn weyl_function(
    p: &ModelProblem,
    z: Complex64,
) -> Result<BoundaryOperator, BoundaryError> {
    let t = t_operator(p, z)?;
    let s_m = smoothing_operator(p, SmoothingSide::Trace);
    let s_mu = smoothing_operator(p, SmoothingSide::Conormal);
    let (Some(dm), Some(dmu)) = (s_m.diagonal(), s_mu.diagonal()) else {
        unreachable!("smoothing powers are diagonal by construction");
    };
    let data = match t.data {
        BoundaryData::Diagonal(v) => BoundaryData::Diagonal(
            v.iter()
                .enumerate()
                .map(|(i, x)| dmu[i] * x * dm[i])
                .collect(),
        ),
        BoundaryData::Dense(mut m) => {
            for a in 0..m.nrows() {
                for b in 0..m.ncols() {
                    m[[a, b]] = dmu[a] * m[[a, b]] * dm[b];
                }
            }
            BoundaryData::Dense(m)
        }
    };
    Ok(BoundaryOperator {
        data,
        labels: t.labels,
    })
}

/// A discrete test function: values on the unknowns of one mode block.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub mode_index: usize,
    pub values: CVector,
}

/// Defect of the regularized trace pairing against the interior operator:
/// |(A u, v) - (u, A v) - [(G1 u, G0 v) - (G0 u, G1 v)]|, with the scale
/// ||u|| ||v|| ||A|| it should be compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenResidual {
    pub absolute: f64,
    pub scale: f64,
}

impl GreenResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.absolute / self.scale
        } else {
            self.absolute
        }
    }
}

fn weighted_inner(w: &[f64], x: &CVector, y: &CVector) -> Complex64 {
    let mut sum = Complex64::ZERO;
    let mut comp = Complex64::ZERO;
    for i in 0..w.len() {
        let term = x[i] * y[i].conj() * w[i] - comp;
        let next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    sum
}

fn boundary_vectors(
    p: &ModelProblem,
    tf: &TestFunction,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let d = p.boundary_dim();
    let b_rows = p.trace_b_rows();
    let c_rows = p.trace_c_rows();
    let u: Vec<Complex64> = tf.values.iter().copied().collect();
    match p.kind {
        ProblemKind::IntervalM1 | ProblemKind::IntervalM2 => {
            let b = b_rows.iter().map(|r| apply_row(r, &u)).collect();
            let c = c_rows.iter().map(|r| apply_row(r, &u)).collect();
            (b, c)
        }
        ProblemKind::HalflineM1 | ProblemKind::AnnulusM1 | ProblemKind::BallExteriorM1 => {
            let mut b = vec![Complex64::ZERO; d];
            let mut c = vec![Complex64::ZERO; d];
            b[tf.mode_index] = apply_row(&b_rows[0], &u);
            c[tf.mode_index] = apply_row(&c_rows[0], &u);
            (b, c)
        }
    }
}

/// Residual of the Green identity for the regularized trace maps
/// G0 = S_m B and G1 = S_mu (C - Lambda(0) B). Test functions on different
/// mode blocks are orthogonal in the angular variable, so the identity holds
/// with both sides zero and the residual is reported as 0.
pub fn green_residual(
    p: &ModelProblem,
    u: &TestFunction,
    v: &TestFunction,
) -> Result<GreenResidual, BoundaryError> {
    let dim = p.unknowns();
    for tf in [u, v] {
        if tf.mode_index >= p.modes.len() {
            return Err(ProblemError::DimensionMismatch(format!(
                "mode index {} outside the {} mode blocks",
                tf.mode_index,
                p.modes.len()
            ))
            .into());
        }
        if tf.values.len() != dim {
            return Err(ProblemError::DimensionMismatch(format!(
                "test function has {} values, the mode block has {dim} unknowns",
                tf.values.len()
            ))
            .into());
        }
    }
    let h = p.grid.spacing;
    let w_all = p.trapezoid_weights();
    let w = &w_all[..dim];
    let qmax = |idx: usize| {
        p.effective_potential(idx)
            .iter()
            .fold(0.0f64, |m, q| m.max(q.abs()))
    };
    let a_norm = match p.half_order {
        1 => 4.0 / (h * h) + qmax(u.mode_index).max(qmax(v.mode_index)),
        _ => 16.0 / h.powi(4) + qmax(0),
    };
    let norm_u = weighted_inner(w, &u.values, &u.values).re.sqrt();
    let norm_v = weighted_inner(w, &v.values, &v.values).re.sqrt();
    let scale = norm_u * norm_v * a_norm;

    if u.mode_index != v.mode_index && p.half_order == 1 && p.modes.len() > 1 {
        return Ok(GreenResidual {
            absolute: 0.0,
            scale,
        });
    }

    let au = p.apply_a_max(u.mode_index, &u.values);
    let av = p.apply_a_max(v.mode_index, &v.values);
    let lhs = weighted_inner(w, &au, &v.values) - weighted_inner(w, &u.values, &av);

    let l0 = calderon(p, Complex64::ZERO)?.to_matrix();
    let (bu, cu) = boundary_vectors(p, u);
    let (bv, cv) = boundary_vectors(p, v);
    let d = p.boundary_dim();
    let x_of = |b: &[Complex64], c: &[Complex64]| -> Vec<Complex64> {
        (0..d)
            .map(|a| c[a] - (0..d).map(|j| l0[[a, j]] * b[j]).sum::<Complex64>())
            .collect()
    };
    let xu = x_of(&bu, &cu);
    let xv = x_of(&bv, &cv);
    let sm = smoothing_operator(p, SmoothingSide::Trace);
    let smu = smoothing_operator(p, SmoothingSide::Conormal);
    let (Some(dm), Some(dmu)) = (sm.diagonal(), smu.diagonal()) else {
        unreachable!("smoothing powers are diagonal by construction");
    };
    let g0u: Vec<Complex64> = (0..d).map(|a| dm[a] * bu[a]).collect();
    let g0v: Vec<Complex64> = (0..d).map(|a| dm[a] * bv[a]).collect();
    let g1u: Vec<Complex64> = (0..d).map(|a| dmu[a] * xu[a]).collect();
    let g1v: Vec<Complex64> = (0..d).map(|a| dmu[a] * xv[a]).collect();
    let pair = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
        x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
    };
    let bdry = (pair(&g1u, &g0v) - pair(&g0u, &g1v)) * p.boundary_weight();

    Ok(GreenResidual {
        absolute: (lhs - bdry).norm(),
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{
        build_annulus_m1, build_ball_exterior_m1, build_interval_m1, build_interval_m2,
        dirichlet_realization, spectrum, Potential,
    };

    #[test]
    fn smoothing_matches_mode_eigenvalues() {
        let p = build_annulus_m1(1.0, 2.0, 32, 8, Potential::Constant(1.0)).unwrap();
        let s = smoothing_operator(&p, SmoothingSide::Trace);
        let vals = s.diagonal().unwrap();
        let at = |k: i64| {
            let idx = p
                .modes
                .iter()
                .position(|m| m.label == ModeLabel::Fourier(k))
                .unwrap();
            vals[idx].re
        };
        assert!((at(0) - 1.0).abs() < 1e-15);
        assert!((at(2) - 5.0f64.powf(0.25)).abs() < 1e-15);
        let s_mu = smoothing_operator(&p, SmoothingSide::Conormal);
        assert_eq!(s_mu.diagonal().unwrap(), vals);

        let ball = build_ball_exterior_m1(3.0, 32, 3, Potential::Constant(1.0)).unwrap();
        let sb = smoothing_operator(&ball, SmoothingSide::Trace);
        assert!((sb.diagonal().unwrap()[2].re - 7.0f64.powf(0.25)).abs() < 1e-15);

        let iv = build_interval_m1(1.0, 32, Potential::Constant(1.0)).unwrap();
        let si = smoothing_operator(&iv, SmoothingSide::Conormal);
        assert!(si.diagonal().unwrap().iter().all(|v| *v == Complex64::ONE));
    }

    #[test]
    fn pz_solutions_carry_their_traces() {
        let p = build_interval_m2(1.0, 64, Potential::Constant(1.0)).unwrap();
        let phi = CVector::from(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-2.0, 0.5),
            Complex64::new(3.0, 0.0),
            Complex64::new(0.5, -1.0),
        ]);
        let sol = pz_solve(&p, Complex64::new(0.3, 0.0), &phi).unwrap();
        let u: Vec<Complex64> = sol.blocks[0].iter().copied().collect();
        for (a, row) in p.trace_b_rows().iter().enumerate() {
            let got = apply_row(row, &u);
            assert!(
                (got - phi[a]).norm() < 1e-9,
                "trace {a}: {got} vs {}",
                phi[a]
            );
        }
    }

    #[test]
    fn calderon_refuses_interior_eigenvalues() {
        let p = build_interval_m1(1.0, 64, Potential::Constant(1.0)).unwrap();
        let r = dirichlet_realization(&p).unwrap();
        let s = spectrum(&r, Some((9.0, 13.0))).unwrap();
        let lam = s.real_values_expanded()[0];
        match calderon(&p, Complex64::from(lam)) {
            Err(BoundaryError::DirichletEigenvalueHit { pivot_ratio, .. }) => {
                assert!(pivot_ratio > PIVOT_RATIO_LIMIT);
            }
            other => panic!("expected an eigenvalue hit, got {other:?}"),
        }
    }

    #[test]
    fn m2_calderon_agrees_with_conormal_stencils() {
        // The form route and the one-sided-stencil route are independent
        // discretizations of the same operator; their distance must shrink
        // under refinement.
        let z = Complex64::new(-0.7, 0.0);
        let diff_at = |cells: usize| -> f64 {
            let p = build_interval_m2(1.0, cells, Potential::Constant(1.0)).unwrap();
            let form = calderon(&p, z).unwrap().to_matrix();
            let c_rows = p.trace_c_rows();
            let mut stencil = CMatrix::zeros((4, 4));
            for b in 0..4 {
                let mut phi = CVector::zeros(4);
                phi[b] = Complex64::ONE;
                let sol = pz_solve(&p, z, &phi).unwrap();
                let u: Vec<Complex64> = sol.blocks[0].iter().copied().collect();
                for (a, row) in c_rows.iter().enumerate() {
                    stencil[[a, b]] = apply_row(row, &u);
                }
            }
            let num = (&form - &stencil)
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>()
                .sqrt();
            let den = form.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            num / den
        };
        let coarse = diff_at(200);
        let fine = diff_at(800);
        assert!(fine < 8e-3, "routes disagree at the fine grid: {fine}");
        assert!(
            fine * 3.0 < coarse,
            "no refinement gain: {coarse} -> {fine}"
        );
    }

    #[test]
    fn m2_calderon_is_exactly_symmetric_at_complex_energies() {
        let p = build_interval_m2(1.0, 96, Potential::Constant(2.0)).unwrap();
        let m = calderon(&p, Complex64::new(0.4, 1.3)).unwrap().to_matrix();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(m[[a, b]], m[[b, a]]);
            }
        }
    }
}
