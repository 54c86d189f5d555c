//! Eigenvalue extraction from realizations.
//!
//! Tridiagonal mode blocks go through Sturm bisection, which scales to the
//! finest grids used here; dense Hermitian matrices use a full symmetric
//! eigensolve; general dense matrices fall back to the unsymmetric solver
//! and report complex eigenvalues.

use num_complex::Complex64;

use super::{ModeLabel, ProblemError, Realization, RealizationMatrix};
use crate::numerics::{general_eigenvalues, hermitian_eigen};

/// One eigenvalue with its multiplicity and the mode block it came from.
/// Dense realizations mix modes, so their points carry [`ModeLabel::Single`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    pub value: Complex64,
    pub multiplicity: usize,
    pub label: ModeLabel,
}

/// Eigenvalues of a realization, ascending by real part, with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumList {
    pub points: Vec<SpectralPoint>,
    /// Whether the realization was Hermitian (all values then real).
    pub hermitian: bool,
    /// The window that was requested, if any.
    pub window: Option<(f64, f64)>,
}

impl SpectrumList {
    /// Number of eigenvalues counted with multiplicity.
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Real eigenvalues repeated by multiplicity, ascending. Panics on a
    /// non-Hermitian spectrum; callers branch on `hermitian` first.
    pub fn real_values_expanded(&self) -> Vec<f64> {
        assert!(
            self.hermitian,
            "real_values_expanded needs a Hermitian spectrum"
        );
        let mut out = Vec::with_capacity(self.total_multiplicity());
        for p in &self.points {
            for _ in 0..p.multiplicity {
                out.push(p.value.re);
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Bisection tolerance for eigenvalues bracketed in [a, b]: proportional to
/// the bracket width, floored near the rounding limit of the endpoints. A
/// window query therefore resolves far below the discretization error even
/// when the full spectral span of the block is ~1/h^2.
fn block_tol(a: f64, b: f64) -> f64 {
    (b - a).abs() * 1e-12 + a.abs().max(b.abs()) * 4.0 * f64::EPSILON + 1e-14
}

/// Eigenvalues of a realization, optionally restricted to a window on the
/// real axis (applied to real parts in the non-Hermitian case). Ascending by
/// real part, ties by imaginary part.
pub fn spectrum(
    r: &Realization,
    window: Option<(f64, f64)>,
) -> Result<SpectrumList, ProblemError> {
    let mut points: Vec<SpectralPoint> = Vec::new();
    let hermitian = r.matrix.is_hermitian();
    match &r.matrix {
        RealizationMatrix::ModeTridiag(blocks) => {
            for b in blocks {
                let vals = match window {
                    Some((a, bnd)) => b.tri.eigenvalues_in(a, bnd, block_tol(a, bnd)),
                    None => {
                        let (lo, hi) = b.tri.bounds();
                        b.tri.all_eigenvalues(block_tol(lo, hi))
                    }
                };
                points.extend(vals.into_iter().map(|v| SpectralPoint {
                    value: Complex64::from(v),
                    multiplicity: b.multiplicity,
                    label: b.label,
                }));
            }
        }
        RealizationMatrix::DenseHermitian(m) => {
            let (vals, _) = hermitian_eigen(m).map_err(ProblemError::from)?;
            points.extend(
                vals.into_iter()
                    .filter(|v| window.is_none_or(|(a, b)| *v >= a && *v < b))
                    .map(|v| SpectralPoint {
                        value: Complex64::from(v),
                        multiplicity: 1,
                        label: ModeLabel::Single,
                    }),
            );
        }
        RealizationMatrix::DenseGeneral(m) => {
            let vals = general_eigenvalues(m).map_err(ProblemError::from)?;
            points.extend(
                vals.into_iter()
                    .filter(|v| window.is_none_or(|(a, b)| v.re >= a && v.re < b))
                    .map(|v| SpectralPoint {
                        value: v,
                        multiplicity: 1,
                        label: ModeLabel::Single,
                    }),
            );
        }
    }
    points.sort_by(|x, y| {
        x.value
            .re
            .total_cmp(&y.value.re)
            .then(x.value.im.total_cmp(&y.value.im))
    });
    Ok(SpectrumList {
        points,
        hermitian,
        window,
    })
}
