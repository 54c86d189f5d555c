//! Complex banded matrices with an in-place LU factorization (partial
//! pivoting). Band storage keeps the shifted solves on fine grids at O(n)
//! memory and O(n * bandwidth^2) time, and the factorization exposes its
//! pivot-modulus spread so callers can detect that a shift landed on (or
//! numerically indistinguishable from) an eigenvalue.

use num_complex::Complex64;

use super::{CMatrix, CVector, NumericsError};

/// Banded complex matrix with `kl` sub-diagonals and `ku` super-diagonals.
///
/// Storage follows the usual band layout with room for pivoting fill-in:
/// entry (i, j) lives in band row `kl + ku + i - j`, so the factorization can
/// widen the upper bandwidth to `kl + ku` without reallocating.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// (2*kl + ku + 1) x n, row-major by band row.
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n > 0, "band matrix must have positive dimension");
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            data: vec![Complex64::new(0.0, 0.0); ldab * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        let band_row = self.kl + self.ku + i - j;
        band_row * self.n + j
    }

    /// True when (i, j) lies inside the stored band (including fill-in rows).
    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        let (i, j) = (i as isize, j as isize);
        let d = i - j;
        d <= self.kl as isize && -d <= (self.kl + self.ku) as isize
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(
            i < self.n && j < self.n,
            "band index ({i}, {j}) out of range for dimension {}",
            self.n
        );
        assert!(
            (j as isize - i as isize) <= self.ku as isize && (i as isize - j as isize) <= self.kl as isize,
            "entry ({i}, {j}) lies outside the declared band (kl={}, ku={})",
            self.kl,
            self.ku
        );
        let at = self.idx(i, j);
        self.data[at] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    /// Dense copy, mainly for tests and small cross-checks.
    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros((self.n, self.n));
        for i in 0..self.n {
            let j_lo = i.saturating_sub(self.kl);
            let j_hi = (i + self.ku).min(self.n - 1);
            for j in j_lo..=j_hi {
                m[[i, j]] = self.data[self.idx(i, j)];
            }
        }
        m
    }

    /// LU factorization with partial pivoting, consuming the matrix.
    pub fn lu(mut self) -> BandedLu {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let uw = kl + ku; // upper bandwidth of U after pivoting
        let mut ipiv = vec![0usize; n];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for j in 0..n {
            // pivot: largest modulus in column j among the kl rows below the
            // diagonal (all other rows are already eliminated)
            let i_hi = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.data[self.idx(j, j)].norm();
            for i in j + 1..=i_hi {
                let v = self.data[self.idx(i, j)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            ipiv[j] = p;
            min_pivot = min_pivot.min(best);
            max_pivot = max_pivot.max(best);
            if p != j {
                let c_hi = (j + uw).min(n - 1);
                for c in j..=c_hi {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let piv = self.data[self.idx(j, j)];
            if piv.norm() == 0.0 {
                // leave the zero pivot in place; solve() reports singularity
                continue;
            }
            let c_hi = (j + uw).min(n - 1);
            for i in j + 1..=i_hi {
                let at_ij = self.idx(i, j);
                let m = self.data[at_ij] / piv;
                self.data[at_ij] = m;
                for c in j + 1..=c_hi {
                    let u = self.data[self.idx(j, c)];
                    if u.norm_sqr() != 0.0 {
                        let at = self.idx(i, c);
                        self.data[at] -= m * u;
                    }
                }
            }
        }
        BandedLu {
            mat: self,
            ipiv,
            min_pivot,
            max_pivot,
        }
    }
}

/// Factored form of a [`BandMatrix`]: P A = L U with unit-lower-triangular L
/// (multipliers stored in the sub-diagonal band) and U of bandwidth kl + ku.
#[derive(Debug, Clone)]
pub struct BandedLu {
    mat: BandMatrix,
    ipiv: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl BandedLu {
    pub fn dim(&self) -> usize {
        self.mat.n
    }

    /// Spread max|u_jj| / min|u_jj| of the pivot moduli. A huge ratio means
    /// the matrix was numerically singular — for shifted operators, that the
    /// shift sits essentially on an eigenvalue of the discretized operator.
    pub fn pivot_ratio(&self) -> f64 {
        if self.min_pivot == 0.0 {
            f64::INFINITY
        } else {
            self.max_pivot / self.min_pivot
        }
    }

    /// Solve A x = b in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) -> Result<(), NumericsError> {
        let n = self.mat.n;
        if b.len() != n {
            return Err(NumericsError::DimensionMismatch(format!(
                "rhs length {} does not match matrix dimension {n}",
                b.len()
            )));
        }
        if self.min_pivot == 0.0 {
            return Err(NumericsError::SingularSystem {
                condition: f64::INFINITY,
                limit: super::dense::CONDITION_LIMIT,
            });
        }
        let kl = self.mat.kl;
        let uw = self.mat.kl + self.mat.ku;
        // y = L^{-1} P b
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj.norm_sqr() == 0.0 {
                continue;
            }
            let i_hi = (j + kl).min(n - 1);
            for i in j + 1..=i_hi {
                b[i] -= self.mat.data[self.mat.idx(i, j)] * bj;
            }
        }
        // x = U^{-1} y
        for j in (0..n).rev() {
            let x = b[j] / self.mat.data[self.mat.idx(j, j)];
            b[j] = x;
            if x.norm_sqr() == 0.0 {
                continue;
            }
            let i_lo = j.saturating_sub(uw);
            for i in i_lo..j {
                b[i] -= self.mat.data[self.mat.idx(i, j)] * x;
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &CVector) -> Result<CVector, NumericsError> {
        let mut x: Vec<Complex64> = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(CVector::from_vec(x))
    }

    /// Solve A X = B column by column.
    pub fn solve_matrix(&self, b: &CMatrix) -> Result<CMatrix, NumericsError> {
        let n = self.mat.n;
        if b.nrows() != n {
            return Err(NumericsError::DimensionMismatch(format!(
                "rhs has {} rows, matrix dimension is {n}",
                b.nrows()
            )));
        }
        let mut out = CMatrix::zeros((n, b.ncols()));
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..b.ncols() {
            for i in 0..n {
                col[i] = b[[i, c]];
            }
            self.solve_in_place(&mut col)?;
            for i in 0..n {
                out[[i, c]] = col[i];
            }
        }
        Ok(out)
    }
}
