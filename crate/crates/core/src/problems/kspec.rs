//! Boundary coupling parameters K for conditions of the form Cu = K Bu.

use ndarray::Array2;
use num_complex::Complex64;

use super::{ModelProblem, ModeLabel, ProblemError, ProblemKind};
use crate::numerics::{relative_asymmetry, CMatrix, TAU_HERMITIAN};

/// Boundary coupling operator on the block boundary basis.
#[derive(Debug, Clone, PartialEq)]
pub enum KSpec {
    /// sigma times the identity on the boundary space.
    Scalar(Complex64),
    /// Mode multiplier sigma_k = scale * sqrt(|k|) (Fourier) or
    /// scale * sqrt(l) (spherical degree). Mode kinds only.
    SqrtModes { scale: f64 },
    /// Explicit multiplier per mode block, aligned with the problem's mode
    /// list. Mode kinds only.
    ModeValues(Vec<Complex64>),
    /// Multiplication by the angle-dependent coefficient
    /// sigma(theta) = cosine[0] + sum_j cosine[j] cos(j theta) on the inner
    /// circle, expressed as a Toeplitz matrix in the Fourier basis. Annulus
    /// only.
    Angular { cosine: Vec<f64> },
    /// Explicit matrix on the block boundary basis (endpoint traces for
    /// interval kinds, Fourier modes for the annulus).
    Dense(CMatrix),
}

impl KSpec {
    /// Validates shape compatibility with the problem's boundary space.
    pub fn validate_for(&self, p: &ModelProblem) -> Result<(), ProblemError> {
        let mode_kind = matches!(
            p.kind,
            ProblemKind::AnnulusM1 | ProblemKind::BallExteriorM1
        );
        match self {
            KSpec::Scalar(s) => {
                if !s.re.is_finite() || !s.im.is_finite() {
                    return Err(ProblemError::InvalidConfig(
                        "scalar coupling must be finite".into(),
                    ));
                }
                Ok(())
            }
            KSpec::SqrtModes { scale } => {
                if !scale.is_finite() {
                    return Err(ProblemError::InvalidConfig(
                        "mode multiplier scale must be finite".into(),
                    ));
                }
                if !mode_kind {
                    return Err(ProblemError::DimensionMismatch(
                        "sqrt-mode multipliers need a mode-decomposed boundary".into(),
                    ));
                }
                Ok(())
            }
            KSpec::ModeValues(v) => {
                if !mode_kind {
                    return Err(ProblemError::DimensionMismatch(
                        "mode multipliers need a mode-decomposed boundary".into(),
                    ));
                }
                if v.len() != p.modes.len() {
                    return Err(ProblemError::DimensionMismatch(format!(
                        "{} mode values for {} mode blocks",
                        v.len(),
                        p.modes.len()
                    )));
                }
                Ok(())
            }
            KSpec::Angular { cosine } => {
                if p.kind != ProblemKind::AnnulusM1 {
                    return Err(ProblemError::DimensionMismatch(
                        "angular coupling is defined on the inner circle of the annulus"
                            .into(),
                    ));
                }
                if cosine.is_empty() {
                    return Err(ProblemError::InvalidConfig(
                        "angular coupling needs at least the constant coefficient".into(),
                    ));
                }
                Ok(())
            }
            KSpec::Dense(m) => {
                if p.kind == ProblemKind::BallExteriorM1 {
                    return Err(ProblemError::DimensionMismatch(
                        "dense coupling would break the degree decomposition of the \
                         sphere; use mode multipliers"
                            .into(),
                    ));
                }
                let d = p.boundary_dim();
                if m.nrows() != d || m.ncols() != d {
                    return Err(ProblemError::DimensionMismatch(format!(
                        "coupling matrix is {}x{}, boundary space has dimension {d}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Per-mode multiplier values when the coupling is diagonal in the mode
    /// basis of this problem; `None` when it genuinely couples modes or the
    /// problem has endpoint traces rather than mode blocks.
    pub fn mode_values(&self, p: &ModelProblem) -> Option<Vec<Complex64>> {
        let mode_kind = matches!(
            p.kind,
            ProblemKind::AnnulusM1 | ProblemKind::BallExteriorM1
        );
        if !mode_kind {
            return None;
        }
        match self {
            KSpec::Scalar(s) => Some(vec![*s; p.modes.len()]),
            KSpec::SqrtModes { scale } => Some(
                p.modes
                    .iter()
                    .map(|m| {
                        let v = match m.label {
                            ModeLabel::Fourier(k) => (k.unsigned_abs() as f64).sqrt(),
                            ModeLabel::SphericalDegree(l) => (l as f64).sqrt(),
                            ModeLabel::Single => 0.0,
                        };
                        Complex64::from(scale * v)
                    })
                    .collect(),
            ),
            KSpec::ModeValues(v) => Some(v.clone()),
            KSpec::Angular { cosine } => {
                if cosine.len() == 1 {
                    Some(vec![Complex64::from(cosine[0]); p.modes.len()])
                } else {
                    None
                }
            }
            KSpec::Dense(m) => {
                let diag_only = m
                    .indexed_iter()
                    .all(|((i, j), v)| i == j || v.norm() == 0.0);
                if diag_only {
                    Some((0..m.nrows()).map(|i| m[[i, i]]).collect())
                } else {
                    None
                }
            }
        }
    }

    /// The coupling as a dense matrix on the block boundary basis.
    pub fn boundary_matrix(&self, p: &ModelProblem) -> Result<CMatrix, ProblemError> {
        self.validate_for(p)?;
        let d = p.boundary_dim();
        let m = match self {
            KSpec::Scalar(s) => CMatrix::eye(d) * *s,
            KSpec::SqrtModes { .. } | KSpec::ModeValues(_) => {
                let vals = self
                    .mode_values(p)
                    .expect("validated mode-kind coupling has mode values");
                Array2::from_diag(&ndarray::Array1::from(vals))
            }
            KSpec::Angular { cosine } => {
                let mut m = CMatrix::zeros((d, d));
                for i in 0..d {
                    for j in 0..d {
                        let sep = i.abs_diff(j);
                        let v = if sep == 0 {
                            cosine[0]
                        } else if sep < cosine.len() {
                            0.5 * cosine[sep]
                        } else {
                            0.0
                        };
                        m[[i, j]] = Complex64::from(v);
                    }
                }
                m
            }
            KSpec::Dense(m) => m.clone(),
        };
        Ok(m)
    }

    /// Whether the coupling is Hermitian on the boundary space.
    pub fn is_hermitian(&self, p: &ModelProblem) -> Result<bool, ProblemError> {
        match self {
            KSpec::Scalar(s) => Ok(s.im == 0.0),
            KSpec::SqrtModes { .. } => Ok(true),
            KSpec::ModeValues(v) => Ok(v.iter().all(|s| s.im == 0.0)),
            KSpec::Angular { .. } => Ok(true),
            KSpec::Dense(_) => {
                let m = self.boundary_matrix(p)?;
                Ok(relative_asymmetry(&m) <= TAU_HERMITIAN)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{build_annulus_m1, build_interval_m1, Potential};

    #[test]
    fn angular_coupling_is_a_hermitian_toeplitz_matrix() {
        let p = build_annulus_m1(1.0, 2.0, 32, 8, Potential::Constant(1.0)).unwrap();
        let k = KSpec::Angular {
            cosine: vec![-2.0, 1.0],
        };
        let m = k.boundary_matrix(&p).unwrap();
        assert_eq!(m.nrows(), 17);
        assert!((m[[0, 0]].re + 2.0).abs() < 1e-15);
        assert!((m[[0, 1]].re - 0.5).abs() < 1e-15);
        assert!((m[[1, 0]].re - 0.5).abs() < 1e-15);
        assert_eq!(m[[0, 2]].norm(), 0.0);
        assert!(relative_asymmetry(&m) < 1e-15);
        assert!(k.is_hermitian(&p).unwrap());
    }

    #[test]
    fn shape_validation_matches_boundary_spaces() {
        let p = build_interval_m1(1.0, 32, Potential::Constant(1.0)).unwrap();
        assert!(KSpec::SqrtModes { scale: 1.0 }.validate_for(&p).is_err());
        assert!(KSpec::Dense(CMatrix::zeros((3, 3))).validate_for(&p).is_err());
        assert!(KSpec::Dense(CMatrix::zeros((2, 2))).validate_for(&p).is_ok());
        let a = build_annulus_m1(1.0, 2.0, 32, 8, Potential::Constant(1.0)).unwrap();
        assert!(KSpec::ModeValues(vec![Complex64::ONE; 5])
            .validate_for(&a)
            .is_err());
        assert!(KSpec::ModeValues(vec![Complex64::ONE; 17])
            .validate_for(&a)
            .is_ok());
    }
}
