//! Self-adjoint and sectorial realizations of the model problems.
//!
//! The Dirichlet realization eliminates the boundary unknowns; a coupling
//! realization keeps them and adds the boundary quadratic form (K Bu, Bv),
//! which reproduces ghost-node elimination of the condition Cu = K Bu for
//! second-order kinds. All matrices are symmetrized against the quadrature
//! weights, so their standard eigenvalues are the generalized eigenvalues of
//! the assembled forms.

use num_complex::Complex64;

use super::{KSpec, Mode, ModeLabel, ModelProblem, ProblemError, ProblemKind};
use crate::numerics::{CMatrix, SymTridiag};

/// Dense realizations above this dimension are refused; the tridiagonal
/// path has no cap.
pub const DENSE_DIM_CAP: usize = 4096;

/// Boundary condition selecting a realization.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet,
    /// Cu = K Bu.
    Robin(KSpec),
}

/// One real symmetric tridiagonal mode block of a realization.
#[derive(Debug, Clone)]
pub struct TriBlock {
    pub label: ModeLabel,
    pub multiplicity: usize,
    pub tri: SymTridiag,
}

/// Realization matrix in one of three storage forms.
#[derive(Debug, Clone)]
pub enum RealizationMatrix {
    /// Block-diagonal over modes, each block real symmetric tridiagonal.
    ModeTridiag(Vec<TriBlock>),
    DenseHermitian(CMatrix),
    DenseGeneral(CMatrix),
}

impl RealizationMatrix {
    /// Total dimension with spherical multiplicities expanded.
    pub fn expanded_dim(&self) -> usize {
        match self {
            RealizationMatrix::ModeTridiag(blocks) => blocks
                .iter()
                .map(|b| b.tri.dim() * b.multiplicity)
                .sum(),
            RealizationMatrix::DenseHermitian(m) | RealizationMatrix::DenseGeneral(m) => {
                m.nrows()
            }
        }
    }

    pub fn is_hermitian(&self) -> bool {
        !matches!(self, RealizationMatrix::DenseGeneral(_))
    }
}

/// A realization: matrix, the condition that produced it, and the problem
/// it discretizes.
#[derive(Debug, Clone)]
pub struct Realization {
    pub matrix: RealizationMatrix,
    pub condition: BoundaryCondition,
    pub problem: ModelProblem,
}

fn symmetrized_tridiag(s_diag: &[f64], s_off: &[f64], w: &[f64]) -> SymTridiag {
    let dim = s_diag.len();
    let diag: Vec<f64> = (0..dim).map(|i| s_diag[i] / w[i]).collect();
    let off: Vec<f64> = (0..dim - 1)
        .map(|i| s_off[i] / (w[i] * w[i + 1]).sqrt())
        .collect();
    SymTridiag::new(diag, off)
}

fn check_dense_cap(dim: usize) -> Result<(), ProblemError> {
    if dim > DENSE_DIM_CAP {
        return Err(ProblemError::InvalidConfig(format!(
            "dense realization of dimension {dim} exceeds the desk-scale cap \
             {DENSE_DIM_CAP}; reduce the grid or mode count"
        )));
    }
    Ok(())
}

/// The Dirichlet realization: all traces zero.
pub fn dirichlet_realization(p: &ModelProblem) -> Result<Realization, ProblemError> {
    let matrix = if p.half_order == 1 {
        let dim = p.unknowns();
        let lo = 1usize;
        let hi = if p.truncated() { dim } else { dim - 1 };
        let mut blocks = Vec::with_capacity(p.modes.len());
        for (idx, mode) in p.modes.iter().enumerate() {
            let f = p.form_m1(idx);
            let tri = symmetrized_tridiag(
                &f.s_diag[lo..hi],
                &f.s_off[lo..hi - 1],
                &f.weights[lo..hi],
            );
            blocks.push(TriBlock {
                label: mode.label,
                multiplicity: mode.multiplicity,
                tri,
            });
        }
        RealizationMatrix::ModeTridiag(blocks)
    } else {
        let (s, w) = p.clamped_penta();
        let dim = s.dim();
        check_dense_cap(dim)?;
        let mut m = CMatrix::zeros((dim, dim));
        for i in 0..dim {
            for j in i..dim.min(i + 3) {
                let v = s.get(i, j) / (w[i] * w[j]).sqrt();
                m[[i, j]] = Complex64::from(v);
                m[[j, i]] = Complex64::from(v);
            }
        }
        RealizationMatrix::DenseHermitian(m)
    };
    Ok(Realization {
        matrix,
        condition: BoundaryCondition::Dirichlet,
        problem: p.clone(),
    })
}

/// The realization with boundary condition Cu = K Bu.
///
/// Mode-diagonal real couplings keep the tridiagonal block structure;
/// complex or mode-coupling data falls back to dense storage (capped at
/// [`DENSE_DIM_CAP`]). K = 0 gives the realization with all conormal traces
/// zero.
pub fn realization_with_k(
    p: &ModelProblem,
    k: &KSpec,
) -> Result<Realization, ProblemError> {
    k.validate_for(p)?;
    let matrix = match p.kind {
        ProblemKind::IntervalM2 => m2_with_k(p, k)?,
        ProblemKind::AnnulusM1 | ProblemKind::BallExteriorM1 => {
            match k.mode_values(p) {
                Some(vals) if vals.iter().all(|v| v.im == 0.0) => {
                    mode_tridiag_with_sigma(p, &vals)
                }
                Some(vals) => {
                    if p.kind == ProblemKind::BallExteriorM1 {
                        return Err(ProblemError::InvalidConfig(
                            "complex mode multipliers on the sphere would need \
                             multiplicity-expanded dense storage; not supported"
                                .into(),
                        ));
                    }
                    block_dense_with_values(p, &vals, k)?
                }
                None => coupled_dense(p, k)?,
            }
        }
        ProblemKind::IntervalM1 | ProblemKind::HalflineM1 => {
            let km = k.boundary_matrix(p)?;
            let d = p.boundary_dim();
            let diag_real = (0..d).all(|a| {
                (0..d).all(|b| {
                    if a == b {
                        km[[a, b]].im == 0.0
                    } else {
                        km[[a, b]].norm() == 0.0
                    }
                })
            });
            if diag_real {
                let f = p.form_m1(0);
                let mut s_diag = f.s_diag.clone();
                s_diag[0] += km[[0, 0]].re;
                if p.kind == ProblemKind::IntervalM1 {
                    let last = s_diag.len() - 1;
                    s_diag[last] += km[[1, 1]].re;
                }
                RealizationMatrix::ModeTridiag(vec![TriBlock {
                    label: ModeLabel::Single,
                    multiplicity: 1,
                    tri: symmetrized_tridiag(&s_diag, &f.s_off, &f.weights),
                }])
            } else {
                one_d_dense_with_k(p, &km, k)?
            }
        }
    };
    Ok(Realization {
        matrix,
        condition: BoundaryCondition::Robin(k.clone()),
        problem: p.clone(),
    })
}

fn mode_tridiag_with_sigma(p: &ModelProblem, vals: &[Complex64]) -> RealizationMatrix {
    let bw = p.boundary_weight();
    let blocks: Vec<TriBlock> = p
        .modes
        .iter()
        .enumerate()
        .map(|(idx, mode): (usize, &Mode)| {
            let f = p.form_m1(idx);
            let mut s_diag = f.s_diag.clone();
            s_diag[0] += bw * vals[idx].re;
            TriBlock {
                label: mode.label,
                multiplicity: mode.multiplicity,
                tri: symmetrized_tridiag(&s_diag, &f.s_off, &f.weights),
            }
        })
        .collect();
    RealizationMatrix::ModeTridiag(blocks)
}

fn block_dense_with_values(
    p: &ModelProblem,
    vals: &[Complex64],
    k: &KSpec,
) -> Result<RealizationMatrix, ProblemError> {
    let nb = p.modes.len();
    let nr = p.unknowns();
    let dim = nb * nr;
    check_dense_cap(dim)?;
    let bw = p.boundary_weight();
    let mut m = CMatrix::zeros((dim, dim));
    for (idx, _) in p.modes.iter().enumerate() {
        let f = p.form_m1(idx);
        let off = idx * nr;
        fill_symmetrized_tridiag_block(&mut m, off, &f.s_diag, &f.s_off, &f.weights);
        let w0 = f.weights[0];
        m[[off, off]] += vals[idx] * (bw / w0);
    }
    Ok(classify_dense(m, k.is_hermitian(p)?))
}

fn coupled_dense(p: &ModelProblem, k: &KSpec) -> Result<RealizationMatrix, ProblemError> {
    let km = k.boundary_matrix(p)?;
    let nb = p.modes.len();
    let nr = p.unknowns();
    let dim = nb * nr;
    check_dense_cap(dim)?;
    let bw = p.boundary_weight();
    let mut m = CMatrix::zeros((dim, dim));
    let mut w0 = 0.0;
    for (idx, _) in p.modes.iter().enumerate() {
        let f = p.form_m1(idx);
        w0 = f.weights[0];
        fill_symmetrized_tridiag_block(&mut m, idx * nr, &f.s_diag, &f.s_off, &f.weights);
    }
    for a in 0..nb {
        for b in 0..nb {
            let v = km[[a, b]];
            if v.norm() != 0.0 {
                m[[a * nr, b * nr]] += v * (bw / w0);
            }
        }
    }
    Ok(classify_dense(m, k.is_hermitian(p)?))
}

fn one_d_dense_with_k(
    p: &ModelProblem,
    km: &CMatrix,
    k: &KSpec,
) -> Result<RealizationMatrix, ProblemError> {
    let f = p.form_m1(0);
    let dim = f.s_diag.len();
    check_dense_cap(dim)?;
    let mut m = CMatrix::zeros((dim, dim));
    fill_symmetrized_tridiag_block(&mut m, 0, &f.s_diag, &f.s_off, &f.weights);
    let positions: Vec<usize> = if p.kind == ProblemKind::IntervalM1 {
        vec![0, dim - 1]
    } else {
        vec![0]
    };
    for (a, &ia) in positions.iter().enumerate() {
        for (b, &ib) in positions.iter().enumerate() {
            let v = km[[a, b]];
            if v.norm() != 0.0 {
                m[[ia, ib]] += v / (f.weights[ia] * f.weights[ib]).sqrt();
            }
        }
    }
    Ok(classify_dense(m, k.is_hermitian(p)?))
}

fn m2_with_k(p: &ModelProblem, k: &KSpec) -> Result<RealizationMatrix, ProblemError> {
    let km = k.boundary_matrix(p)?;
    let (s0, w) = p.form_m2();
    let dim = s0.dim();
    check_dense_cap(dim)?;
    let b_rows = p.trace_b_rows();
    let mut m = CMatrix::zeros((dim, dim));
    for i in 0..dim {
        for j in i..dim.min(i + 3) {
            let v = s0.get(i, j);
            m[[i, j]] = Complex64::from(v);
            m[[j, i]] = Complex64::from(v);
        }
    }
    for a in 0..4 {
        for b in 0..4 {
            let kv = km[[a, b]];
            if kv.norm() == 0.0 {
                continue;
            }
            for &(i, bi) in &b_rows[a] {
                for &(j, bj) in &b_rows[b] {
                    m[[i, j]] += kv * (bi * bj);
                }
            }
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            m[[i, j]] /= Complex64::from((w[i] * w[j]).sqrt());
        }
    }
    Ok(classify_dense(m, k.is_hermitian(p)?))
}

fn fill_symmetrized_tridiag_block(
    m: &mut CMatrix,
    off: usize,
    s_diag: &[f64],
    s_off: &[f64],
    w: &[f64],
) {
    let dim = s_diag.len();
    for i in 0..dim {
        m[[off + i, off + i]] = Complex64::from(s_diag[i] / w[i]);
        if i + 1 < dim {
            let v = Complex64::from(s_off[i] / (w[i] * w[i + 1]).sqrt());
            m[[off + i, off + i + 1]] = v;
            m[[off + i + 1, off + i]] = v;
        }
    }
}

fn classify_dense(m: CMatrix, hermitian: bool) -> RealizationMatrix {
    if hermitian {
        RealizationMatrix::DenseHermitian(m)
    } else {
        RealizationMatrix::DenseGeneral(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{
        build_halfline_m1, build_interval_m1, build_interval_m2, Potential,
    };
    use num_complex::Complex64;

    #[test]
    fn robin_row_equals_ghost_node_elimination() {
        // Eliminating the ghost node of the central stencil under
        // u'(0) = sigma u(0) gives the weighted boundary row
        // 1/h + sigma + h q_0 / 2 over the weight h/2; the assembled form
        // must agree exactly.
        let sigma = -1.3;
        let q0 = 2.1;
        let p = build_halfline_m1(20.0, 200, Potential::Constant(q0)).unwrap();
        let r = realization_with_k(&p, &KSpec::Scalar(Complex64::from(sigma))).unwrap();
        let RealizationMatrix::ModeTridiag(blocks) = &r.matrix else {
            panic!("expected tridiagonal block");
        };
        let h = p.grid.spacing;
        let expect = (1.0 / h + sigma + 0.5 * h * q0) / (0.5 * h);
        assert!(
            (blocks[0].tri.diag[0] - expect).abs() < 1e-9 * expect.abs(),
            "boundary row {} vs ghost elimination {expect}",
            blocks[0].tri.diag[0]
        );
    }

    #[test]
    fn zero_coupling_matches_between_scalar_and_dense() {
        let p = build_interval_m1(1.0, 64, Potential::Constant(1.0)).unwrap();
        let r1 = realization_with_k(&p, &KSpec::Scalar(Complex64::ZERO)).unwrap();
        let km = KSpec::Dense(CMatrix::zeros((2, 2)));
        let r2 = realization_with_k(&p, &km).unwrap();
        let (RealizationMatrix::ModeTridiag(b1), RealizationMatrix::ModeTridiag(b2)) =
            (&r1.matrix, &r2.matrix)
        else {
            panic!("expected tridiagonal storage for diagonal real coupling");
        };
        for (x, y) in b1[0].tri.diag.iter().zip(&b2[0].tri.diag) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn clamped_beam_fundamental_eigenvalue() {
        // Lowest eigenvalue of u'''' on [0,1] with clamped ends is
        // kappa^4 where kappa solves cos(kappa) cosh(kappa) = 1.
        let p = build_interval_m2(1.0, 4000, Potential::Constant(0.0)).unwrap();
        let (s, w) = p.clamped_penta();
        let zero_w = vec![0.0; s.dim()];
        let lu = s.to_band(Complex64::ZERO, &zero_w).lu();
        let dim = s.dim();
        let mut v: Vec<Complex64> = (0..dim)
            .map(|i| Complex64::from(1.0 + (i as f64 / dim as f64)))
            .collect();
        let mut rayleigh = 0.0;
        for _ in 0..40 {
            let mut rhs: Vec<Complex64> =
                v.iter().zip(&w).map(|(x, wi)| x * *wi).collect();
            lu.solve_in_place(&mut rhs).unwrap();
            let norm: f64 = rhs
                .iter()
                .zip(&w)
                .map(|(x, wi)| x.norm_sqr() * wi)
                .sum::<f64>()
                .sqrt();
            for x in rhs.iter_mut() {
                *x /= norm;
            }
            v = rhs;
            let sv = s.mat_vec(&v);
            let num: f64 = v.iter().zip(&sv).map(|(a, b)| (a.conj() * b).re).sum();
            let den: f64 = v.iter().zip(&w).map(|(a, wi)| a.norm_sqr() * wi).sum();
            rayleigh = num / den;
        }
        let kappa: f64 = 4.730040744862704;
        let exact = kappa.powi(4);
        assert!(
            (rayleigh - exact).abs() < 5e-3 * exact,
            "clamped fundamental {rayleigh} vs {exact}"
        );
    }
}
