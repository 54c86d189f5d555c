//! Finite-difference weights on arbitrary node sets (Fornberg's recurrence).
//! Used to build the one-sided boundary stencils: trace derivatives of first
//! through third order and the one-sided interior rows next to an endpoint.

use ndarray::Array2;

/// Weights for approximating derivatives of order 0..=m at the point `z` from
/// samples on the nodes `x`. Row `k` of the result holds the weights of the
/// k-th derivative: f^(k)(z) ~ sum_j w[k, j] f(x[j]).
///
/// The approximation is exact on polynomials of degree < x.len(), so n nodes
/// give order n - k accuracy for the k-th derivative on smooth functions.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Array2<f64> {
    let n = x.len();
    assert!(
        n > m,
        "need at least m + 1 = {} nodes for derivative order {m}, got {n}",
        m + 1
    );
    let mut c = Array2::<f64>::zeros((m + 1, n));
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[[0, 0]] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[[k, i]] = c1 * (k as f64 * c[[k - 1, i - 1]] - c5 * c[[k, i - 1]]) / c2;
                }
                c[[0, i]] = -c1 * c5 * c[[0, i - 1]] / c2;
            }
            for k in (1..=mn).rev() {
                c[[k, j]] = (c4 * c[[k, j]] - k as f64 * c[[k - 1, j]]) / c3;
            }
            c[[0, j]] = c4 * c[[0, j]] / c3;
        }
        c1 = c2;
    }
    c
}

/// Convenience: weights for the single derivative order `m` at `z`.
pub fn fd_weights_single(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let all = fd_weights(z, x, m);
    all.row(m).to_vec()
}
