//! Stencil and form-matrix assembly shared by realizations and boundary maps.
//!
//! Second-order kinds use a conservative three-point flux stencil with the
//! metric sampled at cell midpoints; the associated quadratic form is the
//! weighted tridiagonal matrix returned by [`ModelProblem::form_m1`]. The
//! fourth-order interval uses the square of the interior second-difference
//! map plus the potential, a pentadiagonal form. One-sided trace stencils
//! come from the Fornberg weight generator so every derivative order stays
//! second-order accurate.

use num_complex::Complex64;

use super::{ModelProblem, ProblemKind};
use crate::numerics::{fd_weights_single, BandMatrix, CVector};

/// Sparse functional on grid unknowns: (node, coefficient) pairs.
pub(crate) type SparseRow = Vec<(usize, f64)>;

/// Symmetric tridiagonal quadratic form of one second-order mode block,
/// together with the quadrature weights that define the inner product.
pub(crate) struct FormM1 {
    pub s_diag: Vec<f64>,
    pub s_off: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Symmetric pentadiagonal matrix stored by diagonals.
#[derive(Debug, Clone)]
pub(crate) struct SymPenta {
    pub d0: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl SymPenta {
    pub fn zeros(dim: usize) -> Self {
        SymPenta {
            d0: vec![0.0; dim],
            d1: vec![0.0; dim.saturating_sub(1)],
            d2: vec![0.0; dim.saturating_sub(2)],
        }
    }

    pub fn dim(&self) -> usize {
        self.d0.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.d0[lo],
            1 => self.d1[lo],
            2 => self.d2[lo],
            _ => 0.0,
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.d0[lo] += v,
            1 => self.d1[lo] += v,
            2 => self.d2[lo] += v,
            _ => panic!("entry ({i},{j}) outside pentadiagonal band"),
        }
    }

    pub fn mat_vec_f64(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.d0[i] * x[i];
            if i >= 1 {
                acc += self.d1[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.d1[i] * x[i + 1];
            }
            if i >= 2 {
                acc += self.d2[i - 2] * x[i - 2];
            }
            if i + 2 < n {
                acc += self.d2[i] * x[i + 2];
            }
            y[i] = acc;
        }
        y
    }

    pub fn mat_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let mut y = vec![Complex64::ZERO; n];
        for i in 0..n {
            let mut acc = x[i] * self.d0[i];
            if i >= 1 {
                acc += x[i - 1] * self.d1[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.d1[i];
            }
            if i >= 2 {
                acc += x[i - 2] * self.d2[i - 2];
            }
            if i + 2 < n {
                acc += x[i + 2] * self.d2[i];
            }
            y[i] = acc;
        }
        y
    }

    /// Banded storage of `self - shift * diag(weights)`.
    pub fn to_band(&self, shift: Complex64, weights: &[f64]) -> BandMatrix {
        let n = self.dim();
        let mut band = BandMatrix::new(n, 2, 2);
        for i in 0..n {
            band.set(i, i, Complex64::from(self.d0[i]) - shift * weights[i]);
            if i + 1 < n {
                band.set(i, i + 1, Complex64::from(self.d1[i]));
                band.set(i + 1, i, Complex64::from(self.d1[i]));
            }
            if i + 2 < n {
                band.set(i, i + 2, Complex64::from(self.d2[i]));
                band.set(i + 2, i, Complex64::from(self.d2[i]));
            }
        }
        band
    }
}

impl ModelProblem {
    /// Trapezoid quadrature weights over all nodes, carrying the metric.
    pub(crate) fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.nodes();
        let h = self.grid.spacing;
        let metric = self.metric();
        (0..n)
            .map(|i| {
                let edge = i == 0 || i == n - 1;
                h * metric[i] * if edge { 0.5 } else { 1.0 }
            })
            .collect()
    }

    /// Quadratic form of one second-order mode block on the interior
    /// unknowns, with natural (no-flux) behaviour at boundary nodes and the
    /// truncation node eliminated.
    pub(crate) fn form_m1(&self, mode_idx: usize) -> FormM1 {
        assert_eq!(self.half_order, 1, "form_m1 is for second-order kinds");
        let dim = self.unknowns();
        let h = self.grid.spacing;
        let mh = self.metric_half();
        let qt = self.effective_potential(mode_idx);
        let w_full = self.trapezoid_weights();

        let mut s_diag = vec![0.0; dim];
        let mut s_off = vec![0.0; dim - 1];
        for cell in 0..self.grid.cells {
            let k = mh[cell] / h;
            if cell < dim {
                s_diag[cell] += k;
            }
            if cell + 1 < dim {
                s_diag[cell + 1] += k;
                s_off[cell] -= k;
            }
        }
        let mut weights = vec![0.0; dim];
        for i in 0..dim {
            weights[i] = w_full[i];
            s_diag[i] += w_full[i] * qt[i];
        }
        FormM1 {
            s_diag,
            s_off,
            weights,
        }
    }

    /// Metric log-derivative at the boundary node, used by one-sided
    /// expansions of the divergence-form operator.
    fn metric_log_derivative_at_start(&self) -> f64 {
        match self.kind {
            ProblemKind::AnnulusM1 => 1.0 / self.grid.start,
            ProblemKind::BallExteriorM1 => 2.0 / self.grid.start,
            _ => 0.0,
        }
    }

    /// Boundary trace rows (operator B), ordered to match
    /// [`ModelProblem::boundary_labels`]. For mode kinds the single row
    /// applies to each mode block.
    pub(crate) fn trace_b_rows(&self) -> Vec<SparseRow> {
        let n = self.grid.cells;
        match self.kind {
            ProblemKind::IntervalM1 => vec![vec![(0, 1.0)], vec![(n, 1.0)]],
            ProblemKind::HalflineM1
            | ProblemKind::AnnulusM1
            | ProblemKind::BallExteriorM1 => vec![vec![(0, 1.0)]],
            ProblemKind::IntervalM2 => {
                let left_d1 = self.one_sided_row(0, 3, 1, false);
                let right_d1 = self.one_sided_row(n, 3, 1, true);
                vec![
                    vec![(0, 1.0)],
                    vec![(n, 1.0)],
                    left_d1,
                    negate(right_d1),
                ]
            }
        }
    }

    /// Conormal trace rows (operator C), oriented along the interior normal
    /// and ordered so entry j pairs with trace row j in the Green identity.
    pub(crate) fn trace_c_rows(&self) -> Vec<SparseRow> {
        let n = self.grid.cells;
        match self.kind {
            ProblemKind::IntervalM1 => {
                let left = self.one_sided_row(0, 3, 1, false);
                let right = self.one_sided_row(n, 3, 1, true);
                vec![left, negate(right)]
            }
            ProblemKind::HalflineM1 => vec![self.one_sided_row(0, 4, 1, false)],
            ProblemKind::AnnulusM1 | ProblemKind::BallExteriorM1 => {
                vec![self.one_sided_row(0, 3, 1, false)]
            }
            ProblemKind::IntervalM2 => {
                let left_d3 = self.one_sided_row(0, 5, 3, false);
                let right_d3 = self.one_sided_row(n, 5, 3, true);
                let left_d2 = self.one_sided_row(0, 4, 2, false);
                let right_d2 = self.one_sided_row(n, 4, 2, true);
                vec![negate(left_d3), right_d3, left_d2, right_d2]
            }
        }
    }

    /// One-sided finite-difference row for the given derivative order,
    /// anchored at the left boundary node (or mirrored to the right end).
    fn one_sided_row(
        &self,
        at: usize,
        points: usize,
        order: usize,
        from_right: bool,
    ) -> SparseRow {
        let nodes: Vec<usize> = if from_right {
            (0..points).map(|j| at + j + 1 - points).collect()
        } else {
            (0..points).map(|j| at + j).collect()
        };
        let xs: Vec<f64> = nodes.iter().map(|&i| self.grid.node(i)).collect();
        let w = fd_weights_single(self.grid.node(at), &xs, order);
        nodes.into_iter().zip(w).collect()
    }

    /// Banded collocation system for (A - z)u = 0 with pinned boundary rows
    /// carrying the trace data, for one second-order mode block. Row 0 is
    /// the trace row u_0 = phi; interior rows are the weighted stencil; for
    /// the interval the last row is the right-endpoint trace.
    pub(crate) fn pz_band_m1(&self, mode_idx: usize, z: Complex64) -> BandMatrix {
        assert_eq!(self.half_order, 1);
        let dim = self.unknowns();
        let form = self.form_m1(mode_idx);
        let mut band = BandMatrix::new(dim, 1, 1);
        band.set(0, 0, Complex64::ONE);
        let interior_end = if self.truncated() { dim } else { dim - 1 };
        for i in 1..interior_end {
            band.set(i, i - 1, Complex64::from(form.s_off[i - 1]));
            band.set(
                i,
                i,
                Complex64::from(form.s_diag[i]) - z * form.weights[i],
            );
            if i + 1 < dim {
                band.set(i, i + 1, Complex64::from(form.s_off[i]));
            }
        }
        if !self.truncated() {
            band.set(dim - 1, dim - 1, Complex64::ONE);
        }
        band
    }

    /// Apply the interior (maximal) operator of one mode block to a vector
    /// on the unknowns: the conservative stencil inside, one-sided
    /// expansions of the divergence form at boundary nodes, and the pinned
    /// truncation value treated as zero.
    pub(crate) fn apply_a_max(&self, mode_idx: usize, u: &CVector) -> CVector {
        let dim = self.unknowns();
        assert_eq!(u.len(), dim);
        if self.half_order == 2 {
            return self.apply_a_max_m2(u);
        }
        let h = self.grid.spacing;
        let h2 = h * h;
        let metric = self.metric();
        let mh = self.metric_half();
        let qt = self.effective_potential(mode_idx);
        let mut out = CVector::zeros(dim);

        let boundary_rows: Vec<usize> = if self.truncated() {
            vec![0]
        } else {
            vec![0, dim - 1]
        };
        for &row in &boundary_rows {
            let d2 = self.one_sided_row(if row == 0 { 0 } else { self.grid.cells }, 4, 2, row != 0);
            let d1 = self.one_sided_row(if row == 0 { 0 } else { self.grid.cells }, 3, 1, row != 0);
            let g = if row == 0 {
                self.metric_log_derivative_at_start()
            } else {
                0.0
            };
            let mut acc = Complex64::ZERO;
            for &(j, w) in &d2 {
                acc -= u[j] * w;
            }
            for &(j, w) in &d1 {
                acc -= u[j] * (g * w);
            }
            out[row] = acc + u[row] * qt[row];
        }
        for i in 1..dim {
            if !self.truncated() && i == dim - 1 {
                break;
            }
            let u_prev = u[i - 1];
            let u_next = if i + 1 < dim { u[i + 1] } else { Complex64::ZERO };
            let flux = (u[i] - u_next) * mh[i] + (u[i] - u_prev) * mh[i - 1];
            out[i] = flux / (h2 * metric[i]) + u[i] * qt[i];
        }
        out
    }

    fn apply_a_max_m2(&self, u: &CVector) -> CVector {
        let n = self.grid.cells;
        let dim = n + 1;
        let q = self.q_samples();
        let mut out = CVector::zeros(dim);
        for row in [0usize, 1] {
            let nodes: Vec<usize> = (0..7).collect();
            let xs: Vec<f64> = nodes.iter().map(|&i| self.grid.node(i)).collect();
            let w = fd_weights_single(self.grid.node(row), &xs, 4);
            let mut acc = Complex64::ZERO;
            for (j, wj) in nodes.iter().zip(w) {
                acc += u[*j] * wj;
            }
            out[row] = acc + u[row] * q[row];
        }
        for row in [n - 1, n] {
            let nodes: Vec<usize> = (n - 6..=n).collect();
            let xs: Vec<f64> = nodes.iter().map(|&i| self.grid.node(i)).collect();
            let w = fd_weights_single(self.grid.node(row), &xs, 4);
            let mut acc = Complex64::ZERO;
            for (j, wj) in nodes.iter().zip(w) {
                acc += u[*j] * wj;
            }
            out[row] = acc + u[row] * q[row];
        }
        let h4 = self.grid.spacing.powi(4);
        for i in 2..=n - 2 {
            let acc = u[i - 2] - u[i - 1] * 4.0 + u[i] * 6.0 - u[i + 1] * 4.0 + u[i + 2];
            out[i] = acc / h4 + u[i] * q[i];
        }
        out
    }

    /// Pentadiagonal quadratic form of the fourth-order interval (squared
    /// interior second difference plus weighted potential) and its
    /// quadrature weights.
    pub(crate) fn form_m2(&self) -> (SymPenta, Vec<f64>) {
        assert_eq!(self.kind, ProblemKind::IntervalM2);
        let n = self.grid.cells;
        let h = self.grid.spacing;
        let w = self.trapezoid_weights();
        let q = self.q_samples();
        let mut s = SymPenta::zeros(n + 1);
        let scale = h / (h * h * h * h);
        let stencil = [1.0, -2.0, 1.0];
        for j in 1..n {
            // `add` stores (i, j) and (j, i) in the same symmetric slot, so
            // only the upper wedge of the outer product is accumulated.
            for a in 0..3 {
                for b in a..3 {
                    s.add(j - 1 + a, j - 1 + b, scale * stencil[a] * stencil[b]);
                }
            }
        }
        for i in 0..=n {
            s.add(i, i, w[i] * q[i]);
        }
        (s, w)
    }

    /// Constrained subspace of the fourth-order problem with all traces
    /// zero: nodes 0 and N vanish and the one-sided first-derivative rows
    /// force u_2 = 4 u_1 and u_{N-2} = 4 u_{N-1}. Free coordinates are
    /// (u_1, u_3, u_4, ..., u_{N-3}, u_{N-1}).
    pub(crate) fn clamped_free_dim(&self) -> usize {
        self.grid.cells - 3
    }

    pub(crate) fn clamped_extend(&self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.cells;
        assert_eq!(c.len(), n - 3);
        let mut u = vec![Complex64::ZERO; n + 1];
        u[1] = c[0];
        u[2] = c[0] * 4.0;
        for (idx, &v) in c.iter().enumerate().take(n - 4).skip(1) {
            u[idx + 2] = v;
        }
        u[n - 1] = c[n - 4];
        u[n - 2] = c[n - 4] * 4.0;
        u
    }

    pub(crate) fn clamped_restrict(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.cells;
        assert_eq!(u.len(), n + 1);
        let mut c = vec![Complex64::ZERO; n - 3];
        c[0] = u[1] + u[2] * 4.0;
        for idx in 1..n - 4 {
            c[idx] = u[idx + 2];
        }
        c[n - 4] = u[n - 1] + u[n - 2] * 4.0;
        c
    }

    pub(crate) fn clamped_extend_f64(&self, c: &[f64]) -> Vec<f64> {
        let n = self.grid.cells;
        assert_eq!(c.len(), n - 3);
        let mut u = vec![0.0; n + 1];
        u[1] = c[0];
        u[2] = 4.0 * c[0];
        for (idx, &v) in c.iter().enumerate().take(n - 4).skip(1) {
            u[idx + 2] = v;
        }
        u[n - 1] = c[n - 4];
        u[n - 2] = 4.0 * c[n - 4];
        u
    }

    pub(crate) fn clamped_restrict_f64(&self, u: &[f64]) -> Vec<f64> {
        let n = self.grid.cells;
        assert_eq!(u.len(), n + 1);
        let mut c = vec![0.0; n - 3];
        c[0] = u[1] + 4.0 * u[2];
        for idx in 1..n - 4 {
            c[idx] = u[idx + 2];
        }
        c[n - 4] = u[n - 1] + 4.0 * u[n - 2];
        c
    }

    /// The clamped form matrix in free coordinates (still pentadiagonal
    /// because the eliminated nodes sit next to the endpoints) together with
    /// its diagonal quadrature weights.
    pub(crate) fn clamped_penta(&self) -> (SymPenta, Vec<f64>) {
        let (s0, _) = self.form_m2();
        let n = self.grid.cells;
        let free = n - 3;
        let mut s = SymPenta::zeros(free);
        for a in 0..free {
            let mut basis = vec![0.0; free];
            basis[a] = 1.0;
            let full = self.clamped_extend_f64(&basis);
            let col = self.clamped_restrict_f64(&s0.mat_vec_f64(&full));
            for (b, &v) in col.iter().enumerate().skip(a) {
                if b - a > 2 {
                    assert!(
                        v.abs() < 1e-9 * (1.0 + s0.d0[2].abs()),
                        "clamped form left the pentadiagonal band at ({a},{b})"
                    );
                    continue;
                }
                if v != 0.0 {
                    s.add(a, b, v);
                }
            }
        }
        let wq = self.trapezoid_weights();
        let mut w_free = vec![0.0; free];
        w_free[0] = wq[1] + 16.0 * wq[2];
        for idx in 1..free - 1 {
            w_free[idx] = wq[idx + 2];
        }
        w_free[free - 1] = wq[n - 1] + 16.0 * wq[n - 2];
        (s, w_free)
    }

    /// Sparse lifts of the four boundary-trace basis vectors: l_a has
    /// B l_a = e_a and support within two cells of an endpoint.
    pub(crate) fn trace_lifts(&self) -> Vec<SparseRow> {
        assert_eq!(self.kind, ProblemKind::IntervalM2);
        let n = self.grid.cells;
        let h = self.grid.spacing;
        vec![
            vec![(0, 1.0), (1, 0.75)],
            vec![(n, 1.0), (n - 1, 0.75)],
            vec![(1, 0.5 * h)],
            vec![(n - 1, 0.5 * h)],
        ]
    }

    /// Banded collocation system for the fourth-order interval: trace rows
    /// at the edges, interior stencil rows elsewhere, bandwidth two.
    pub(crate) fn pz_band_m2(&self, z: Complex64) -> BandMatrix {
        assert_eq!(self.kind, ProblemKind::IntervalM2);
        let n = self.grid.cells;
        let (s0, w) = self.form_m2();
        let b_rows = self.trace_b_rows();
        let mut band = BandMatrix::new(n + 1, 2, 2);
        for &(j, v) in &b_rows[0] {
            band.set(0, j, Complex64::from(v));
        }
        for &(j, v) in &b_rows[2] {
            band.set(1, j, Complex64::from(v));
        }
        for i in 2..=n - 2 {
            for j in i - 2..=i + 2 {
                let mut v = Complex64::from(s0.get(i, j));
                if i == j {
                    v -= z * w[i];
                }
                band.set(i, j, v);
            }
        }
        for &(j, v) in &b_rows[3] {
            band.set(n - 1, j, Complex64::from(v));
        }
        for &(j, v) in &b_rows[1] {
            band.set(n, j, Complex64::from(v));
        }
        band
    }
}

fn negate(row: SparseRow) -> SparseRow {
    row.into_iter().map(|(i, v)| (i, -v)).collect()
}

#[cfg(test)]
mod tests {
    use crate::problems::{build_interval_m1, build_interval_m2, Potential};
    use num_complex::Complex64;

    #[test]
    fn interval_trace_rows_match_classical_stencils() {
        let p = build_interval_m1(1.0, 100, Potential::Constant(0.0)).unwrap();
        let h = p.grid.spacing;
        let c = p.trace_c_rows();
        let left: Vec<f64> = c[0].iter().map(|&(_, v)| v * 2.0 * h).collect();
        assert!((left[0] + 3.0).abs() < 1e-10);
        assert!((left[1] - 4.0).abs() < 1e-10);
        assert!((left[2] + 1.0).abs() < 1e-10);
        // mirrored and negated for the interior normal at the right end,
        // nodes ascending: -u'(L) = (-u_{N-2} + 4 u_{N-1} - 3 u_N) / 2h
        let right: Vec<f64> = c[1].iter().map(|&(_, v)| v * 2.0 * h).collect();
        assert!((right[0] + 1.0).abs() < 1e-10);
        assert!((right[1] - 4.0).abs() < 1e-10);
        assert!((right[2] + 3.0).abs() < 1e-10);
    }

    #[test]
    fn form_m1_boundary_entry_matches_ghost_elimination() {
        // Ghost-node elimination of the Robin condition gives the weighted
        // row 1/h + sigma + h q_0 / 2; the form matrix must reproduce the
        // sigma-free part exactly.
        let q0 = 1.7;
        let p = build_interval_m1(1.0, 64, Potential::Constant(q0)).unwrap();
        let f = p.form_m1(0);
        let h = p.grid.spacing;
        assert!((f.s_diag[0] - (1.0 / h + 0.5 * h * q0)).abs() < 1e-12);
        assert!((f.s_off[0] + 1.0 / h).abs() < 1e-12);
        assert!((f.weights[0] - 0.5 * h).abs() < 1e-15);
    }

    #[test]
    fn clamped_basis_annihilates_all_traces() {
        let p = build_interval_m2(1.0, 40, Potential::Constant(0.0)).unwrap();
        let free = p.clamped_free_dim();
        let b_rows = p.trace_b_rows();
        for a in [0usize, 1, free / 2, free - 1] {
            let mut c = vec![Complex64::ZERO; free];
            c[a] = Complex64::ONE;
            let u = p.clamped_extend(&c);
            for row in &b_rows {
                let mut acc = Complex64::ZERO;
                for &(j, w) in row {
                    acc += u[j] * w;
                }
                assert!(acc.norm() < 1e-12, "trace row not annihilated");
            }
        }
    }

    #[test]
    fn trace_lifts_hit_unit_traces() {
        let p = build_interval_m2(1.0, 40, Potential::Constant(0.0)).unwrap();
        let b_rows = p.trace_b_rows();
        let lifts = p.trace_lifts();
        for (a, lift) in lifts.iter().enumerate() {
            for (b, row) in b_rows.iter().enumerate() {
                let mut acc = 0.0;
                for &(j, w) in row {
                    if let Some(&(_, lv)) = lift.iter().find(|&&(i, _)| i == j) {
                        acc += w * lv;
                    }
                }
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (acc - expect).abs() < 1e-10,
                    "lift {a} against trace {b}: got {acc}"
                );
            }
        }
    }

    #[test]
    fn m2_interior_form_row_is_the_five_point_stencil() {
        let p = build_interval_m2(1.0, 32, Potential::Constant(0.0)).unwrap();
        let (s0, _) = p.form_m2();
        let h = p.grid.spacing;
        let scale = h / h.powi(4);
        let mid = 16;
        assert!((s0.get(mid, mid) - 6.0 * scale).abs() < 1e-6);
        assert!((s0.get(mid, mid + 1) + 4.0 * scale).abs() < 1e-6);
        assert!((s0.get(mid, mid + 2) - scale).abs() < 1e-6);
    }
}
