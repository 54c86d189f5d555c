//! Real symmetric tridiagonal matrices: Sturm-sequence eigenvalue counting,
//! bisection extraction of eigenvalues in a window, and Householder reduction
//! of a dense Hermitian matrix to this form. Counting through the Sturm
//! sequence costs O(n) per query, which is what makes spectral counting on
//! fine grids cheap.

use num_complex::Complex64;

use super::CMatrix;

/// Symmetric tridiagonal matrix: `diag` holds the n diagonal entries, `off`
/// the n-1 off-diagonal entries.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(
            off.len() + 1,
            diag.len(),
            "off-diagonal length must be one less than diagonal length"
        );
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`, via the guarded LDL^T Sturm
    /// recurrence.
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.dim();
        if n == 0 {
            return 0;
        }
        // pivot floor keeps the recurrence finite when a pivot lands on zero
        let scale = self
            .diag
            .iter()
            .chain(self.off.iter())
            .fold(1.0f64, |a, v| a.max(v.abs()));
        let pivmin = f64::MIN_POSITIVE.max(scale * f64::EPSILON * f64::EPSILON);
        let mut count = 0usize;
        let mut d = self.diag[0] - x;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..n {
            d = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Number of eigenvalues in the half-open interval [a, b).
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        if b <= a {
            return 0;
        }
        self.count_below(b) - self.count_below(a)
    }

    /// Gershgorin bounds enclosing the whole spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        if n == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    /// All eigenvalues in [a, b), each located by bisection to absolute
    /// accuracy `tol`, ascending.
    pub fn eigenvalues_in(&self, a: f64, b: f64, tol: f64) -> Vec<f64> {
        if b <= a {
            return Vec::new();
        }
        let k_lo = self.count_below(a);
        let k_hi = self.count_below(b);
        (k_lo..k_hi).map(|k| self.bisect_kth(k, a, b, tol)).collect()
    }

    /// All eigenvalues, ascending.
    pub fn all_eigenvalues(&self, tol: f64) -> Vec<f64> {
        let (lo, hi) = self.bounds();
        let pad = (hi - lo).abs() * 1e-12 + tol;
        self.eigenvalues_in(lo - pad, hi + pad, tol)
    }

    /// Smallest eigenvalue.
    pub fn smallest_eigenvalue(&self, tol: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let pad = (hi - lo).abs() * 1e-12 + tol;
        self.bisect_kth(0, lo - pad, hi + pad, tol)
    }

    /// k-th eigenvalue (0-based, ascending) within the bracket [lo, hi],
    /// assuming count_below(lo) <= k < count_below(hi).
    fn bisect_kth(&self, k: usize, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        debug_assert!(self.count_below(lo) <= k && k < self.count_below(hi));
        while hi - lo > tol.max((hi.abs().max(lo.abs())) * 4.0 * f64::EPSILON) {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Reduce a Hermitian matrix to real symmetric tridiagonal form by Householder
/// reflections; eigenvalues are preserved. The complex phases of the
/// off-diagonal entries are absorbed into the (discarded) unitary factor, so
/// only their moduli appear in the result.
pub fn hermitian_tridiagonalize(m: &CMatrix) -> SymTridiag {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "tridiagonalization needs a square matrix");
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        // Householder vector v sending column k below the diagonal to alpha e1
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[[i, k]]).collect();
        let xnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm2 = v.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // trailing-block transform A22 <- H A22 H as the rank-two update
        // A22 - v w* - w v*, with p = beta A22 v and w = p - (beta/2)(v* p) v
        let rows = n - (k + 1);
        let mut p = vec![Complex64::new(0.0, 0.0); rows];
        for i in 0..rows {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, vj) in v.iter().enumerate() {
                s += a[[k + 1 + i, k + 1 + j]] * vj;
            }
            p[i] = s * beta;
        }
        let mut vp = Complex64::new(0.0, 0.0);
        for (j, vj) in v.iter().enumerate() {
            vp += vj.conj() * p[j];
        }
        let kappa = vp * (beta * 0.5);
        let w: Vec<Complex64> = (0..rows).map(|j| p[j] - kappa * v[j]).collect();
        for i in 0..rows {
            for j in 0..rows {
                let delta = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[[k + 1 + i, k + 1 + j]] -= delta;
            }
        }
        // column/row k collapse to the single reflected entry
        a[[k + 1, k]] = alpha;
        a[[k, k + 1]] = alpha.conj();
        for i in k + 2..n {
            a[[i, k]] = Complex64::new(0.0, 0.0);
            a[[k, i]] = Complex64::new(0.0, 0.0);
        }
    }
    let diag = (0..n).map(|i| a[[i, i]].re).collect();
    let off = (0..n.saturating_sub(1))
        .map(|i| a[[i + 1, i]].norm())
        .collect();
    SymTridiag::new(diag, off)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use num_complex::Complex64;

    #[test]
    fn counts_on_known_matrix() {
        // diag(1, 2, 5) as a tridiagonal with zero off-diagonals
        let t = SymTridiag::new(vec![1.0, 2.0, 5.0], vec![0.0, 0.0]);
        assert_eq!(t.count_below(0.0), 0);
        assert_eq!(t.count_below(1.5), 1);
        assert_eq!(t.count_below(10.0), 3);
        assert_eq!(t.count_in(1.5, 5.5), 2);
    }

    #[test]
    fn free_laplacian_eigenvalues() {
        // second-difference matrix on n nodes has eigenvalues
        // 4 sin^2(k pi / (2(n+1)))
        let n = 40;
        let t = SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]);
        let vals = t.all_eigenvalues(1e-12);
        assert_eq!(vals.len(), n);
        for (k, &v) in vals.iter().enumerate() {
            let exact =
                4.0 * ((k as f64 + 1.0) * std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin().powi(2);
            assert_abs_diff_eq!(v, exact, epsilon = 1e-10);
        }
    }

    #[test]
    fn window_extraction() {
        let n = 25;
        let t = SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]);
        let all = t.all_eigenvalues(1e-12);
        let inside: Vec<f64> = all.iter().copied().filter(|&v| (0.5..2.5).contains(&v)).collect();
        let got = t.eigenvalues_in(0.5, 2.5, 1e-12);
        assert_eq!(got.len(), inside.len());
        for (a, b) in got.iter().zip(inside.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn tridiagonalization_preserves_counts() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let m = array![
            [c(2.0, 0.0), c(0.5, 0.3), c(-0.2, 0.1), c(0.0, 0.4)],
            [c(0.5, -0.3), c(-1.0, 0.0), c(0.7, 0.0), c(0.1, -0.2)],
            [c(-0.2, -0.1), c(0.7, 0.0), c(0.5, 0.0), c(0.3, 0.3)],
            [c(0.0, -0.4), c(0.1, 0.2), c(0.3, -0.3), c(-2.0, 0.0)]
        ];
        let t = hermitian_tridiagonalize(&m);
        let (vals, _) = crate::numerics::hermitian_eigen(&m).unwrap();
        for x in [-3.0, -1.5, -0.5, 0.0, 0.4, 1.0, 3.0] {
            let direct = vals.iter().filter(|&&v| v < x).count();
            assert_eq!(t.count_below(x), direct, "count below {x}");
        }
    }
}
