//! Dense matrix operations backed by LAPACK: Hermitian and general
//! eigendecompositions, SVD, linear solves with a condition guard, spectral
//! fractional powers, and eigenvalue sign counts (inertia) with an independent
//! tridiagonalization cross-check.

use ndarray::Array2;
use ndarray_linalg::{Eig, Eigh, Solve, SVD, UPLO};
use num_complex::Complex64;
use thiserror::Error;

use super::tridiag::hermitian_tridiagonalize;
use super::{CMatrix, CVector};

/// Relative asymmetry above which a matrix is rejected as non-Hermitian.
pub const TAU_HERMITIAN: f64 = 1e-10;

/// Default inertia zero band, relative to the spectral norm of the matrix.
pub const ZERO_THRESHOLD_REL: f64 = 1e-8;

/// Condition-number cap for linear solves; beyond it the system is reported
/// as numerically singular.
pub(crate) const CONDITION_LIMIT: f64 = 1.0 / (100.0 * f64::EPSILON);

/// Largest dimension at which `inertia` runs the independent
/// Householder-tridiagonalization cross-check.
const INERTIA_CROSSCHECK_MAX_DIM: usize = 400;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix is not Hermitian: relative asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },
    #[error(
        "matrix is not positive definite: min eigenvalue {min_eigenvalue:.6e} is at or below threshold {threshold:.3e}"
    )]
    NotPositiveDefinite { min_eigenvalue: f64, threshold: f64 },
    #[error("linear system is numerically singular: estimated condition {condition:.3e} exceeds {limit:.3e}")]
    SingularSystem { condition: f64, limit: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("LAPACK backend failure: {0}")]
    Backend(String),
}

/// Signs of the spectrum of a Hermitian matrix relative to a zero band.
#[derive(Debug, Clone, PartialEq)]
pub struct Inertia {
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
    pub zero_threshold: f64,
    /// Raised when some eigenvalue lies within a factor of ten of the zero
    /// threshold, or when the independent cross-check disagrees. Integer
    /// consumers should perturb their parameters and recount instead of
    /// trusting a borderline sign.
    pub ambiguous: bool,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.n_minus + self.n_zero + self.n_plus
    }
}

/// Conjugate transpose.
pub fn adjoint(m: &CMatrix) -> CMatrix {
    let mut out = m.t().to_owned();
    out.mapv_inplace(|c| c.conj());
    out
}

/// Hermitian part (M + M*)/2.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    let half = Complex64::new(0.5, 0.0);
    (m + &adjoint(m)).mapv(|c| c * half)
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius-norm asymmetry of a square matrix relative to its own size;
/// zero matrices report zero asymmetry.
pub fn relative_asymmetry(m: &CMatrix) -> f64 {
    let scale = frobenius(m);
    if scale == 0.0 {
        return 0.0;
    }
    frobenius(&(m - &adjoint(m))) / scale
}

fn ensure_square(m: &CMatrix) -> Result<usize, NumericsError> {
    let (r, c) = m.dim();
    if r != c {
        return Err(NumericsError::DimensionMismatch(format!(
            "expected a square matrix, got {r}x{c}"
        )));
    }
    Ok(r)
}

fn ensure_finite(m: &CMatrix) -> Result<(), NumericsError> {
    if m.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(NumericsError::NonFinite)
    }
}

fn check_hermitian(m: &CMatrix) -> Result<(), NumericsError> {
    let asymmetry = relative_asymmetry(m);
    if asymmetry > TAU_HERMITIAN {
        return Err(NumericsError::NotHermitian {
            asymmetry,
            tolerance: TAU_HERMITIAN,
        });
    }
    Ok(())
}

/// Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian
/// matrix. The input is checked for asymmetry, then symmetrized before the
/// decomposition so that roundoff-level asymmetry cannot leak into the result.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix), NumericsError> {
    ensure_square(m)?;
    ensure_finite(m)?;
    check_hermitian(m)?;
    let sym = hermitian_part(m);
    let (vals, vecs) = sym
        .eigh(UPLO::Lower)
        .map_err(|e| NumericsError::Backend(e.to_string()))?;
    Ok((vals.to_vec(), vecs))
}

/// Eigenvalues of a general (possibly non-Hermitian) matrix, sorted by real
/// part, then imaginary part.
pub fn general_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>, NumericsError> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let (vals, _) = m
        .eig()
        .map_err(|e| NumericsError::Backend(e.to_string()))?;
    let mut out: Vec<Complex64> = vals.to_vec();
    out.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(out)
}

/// M^s for Hermitian positive definite M, via spectral calculus
/// V diag(lambda_i^s) V*.
pub fn fractional_power(m: &CMatrix, s: f64) -> Result<CMatrix, NumericsError> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let threshold = ZERO_THRESHOLD_REL * scale;
    let min_eigenvalue = vals.first().copied().unwrap_or(0.0);
    if min_eigenvalue <= threshold {
        return Err(NumericsError::NotPositiveDefinite {
            min_eigenvalue,
            threshold,
        });
    }
    Ok(rebuild_from_spectrum(&vals, &vecs, |x| x.powf(s)))
}

/// V f(diag) V* for a Hermitian eigendecomposition.
fn rebuild_from_spectrum(vals: &[f64], vecs: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let fv = Complex64::new(f(v), 0.0);
        scaled.column_mut(j).mapv_inplace(|c| c * fv);
    }
    let vh = adjoint(vecs);
    let mut out: CMatrix = scaled.dot(&vh);
    // the result of an even symmetric expression should be exactly Hermitian
    out = hermitian_part(&out);
    let _ = n;
    out
}

/// Count eigenvalue signs of a Hermitian matrix against a zero band.
/// `zero_threshold` defaults to `ZERO_THRESHOLD_REL` times the spectral norm.
pub fn inertia(m: &CMatrix, zero_threshold: Option<f64>) -> Result<Inertia, NumericsError> {
    let (vals, _) = hermitian_eigen(m)?;
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let threshold = zero_threshold.unwrap_or(ZERO_THRESHOLD_REL * scale);
    let mut n_minus = 0;
    let mut n_zero = 0;
    let mut n_plus = 0;
    let mut ambiguous = false;
    for &v in &vals {
        if v < -threshold {
            n_minus += 1;
        } else if v > threshold {
            n_plus += 1;
        } else {
            n_zero += 1;
        }
        if threshold > 0.0 && v.abs() >= threshold / 10.0 && v.abs() <= threshold * 10.0 {
            ambiguous = true;
        }
    }
    if vals.len() <= INERTIA_CROSSCHECK_MAX_DIM && !ambiguous {
        // independent route: Householder reduction to real symmetric
        // tridiagonal form, then a Sturm-sequence sign count
        let tri = hermitian_tridiagonalize(&hermitian_part(m));
        let chk_minus = tri.count_below(-threshold);
        if chk_minus != n_minus {
            ambiguous = true;
        }
    }
    Ok(Inertia {
        n_minus,
        n_zero,
        n_plus,
        zero_threshold: threshold,
        ambiguous,
    })
}

/// `inertia` with the default spectral-norm-relative zero band.
pub fn inertia_with_default_threshold(m: &CMatrix) -> Result<Inertia, NumericsError> {
    inertia(m, None)
}

/// Singular values of a (possibly rectangular) matrix, descending.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>, NumericsError> {
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let (_, s, _) = m
        .svd(false, false)
        .map_err(|e| NumericsError::Backend(e.to_string()))?;
    Ok(s.to_vec())
}

/// Solve M x = rhs for square M, rejecting systems whose estimated condition
/// number exceeds `1 / (100 eps)`.
pub fn solve_linear(m: &CMatrix, rhs: &CVector) -> Result<CVector, NumericsError> {
    let n = ensure_square(m)?;
    ensure_finite(m)?;
    if rhs.len() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "matrix is {n}x{n} but right-hand side has length {}",
            rhs.len()
        )));
    }
    let s = singular_values(m)?;
    let s_max = s.first().copied().unwrap_or(0.0);
    let s_min = s.last().copied().unwrap_or(0.0);
    let condition = if s_min == 0.0 {
        f64::INFINITY
    } else {
        s_max / s_min
    };
    if condition > CONDITION_LIMIT {
        return Err(NumericsError::SingularSystem {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    m.solve(rhs)
        .map_err(|e| NumericsError::Backend(e.to_string()))
}

/// Identity matrix helper.
pub fn identity(n: usize) -> CMatrix {
    Array2::eye(n)
}
