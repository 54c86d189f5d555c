//! Linear-algebra substrate: dense Hermitian and general eigendecompositions,
//! singular values, fractional powers and inertia of Hermitian matrices, plus
//! the structured factorizations (symmetric tridiagonal Sturm counts, banded
//! LU) that keep the discretized problems fast at large node counts.

mod banded;
mod dense;
mod fornberg;
mod tridiag;

pub use banded::{BandMatrix, BandedLu};
pub use dense::{
    adjoint, fractional_power, general_eigenvalues, hermitian_eigen, hermitian_part, inertia,
    inertia_with_default_threshold, relative_asymmetry, singular_values, solve_linear, Inertia,
    NumericsError, TAU_HERMITIAN, ZERO_THRESHOLD_REL,
};
pub use dense::identity;
pub use fornberg::{fd_weights, fd_weights_single};
pub use tridiag::{hermitian_tridiagonalize, SymTridiag};

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Dense complex matrix carrier used across all modules.
pub type CMatrix = Array2<Complex64>;
/// Dense complex vector carrier.
pub type CVector = Array1<Complex64>;
