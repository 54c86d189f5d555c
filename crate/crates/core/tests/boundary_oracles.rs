//! Calderon operators, Weyl functions, and the Green-identity residual
//! checked against closed-form solutions of the constant-coefficient model
//! problems.

use num_complex::Complex64;
use spectriples_core::numerics::{adjoint, hermitian_eigen, relative_asymmetry};
use spectriples_core::problems::{
    build_annulus_m1, build_ball_exterior_m1, build_halfline_m1, build_interval_m1,
    build_interval_m2, ModeLabel, ModelProblem, Potential,
};
use spectriples_core::{
    calderon, green_residual, t_operator, weyl_function, CVector, TestFunction,
};

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn fourier_entry(p: &ModelProblem, vals: &[Complex64], k: i64) -> Complex64 {
    let idx = p
        .modes
        .iter()
        .position(|m| m.label == ModeLabel::Fourier(k))
        .unwrap();
    vals[idx]
}

#[test]
fn halfline_calderon_matches_the_square_root_law() {
    let p = build_halfline_m1(40.0, 4000, Potential::Constant(1.0)).unwrap();
    let at = |x: f64| {
        calderon(&p, Complex64::from(x)).unwrap().diagonal().unwrap()[0]
    };
    for (x, want) in [(0.0, -1.0), (-3.0, -2.0)] {
        let got = at(x);
        assert!(
            (got - want).norm() < 1e-4,
            "Lambda({x}) = {got}, want {want}"
        );
    }
    let xs = [-4.0, -2.0, -1.0, -0.5];
    let mut prev = f64::NEG_INFINITY;
    for x in xs {
        let got = at(x);
        let want = -(1.0 - x).sqrt();
        assert!(
            (got - want).norm() < 1e-4,
            "Lambda({x}) = {got}, want {want}"
        );
        assert!(got.re > prev, "Lambda must increase along the real axis");
        prev = got.re;
    }
}

#[test]
fn interval_calderon_matches_hyperbolic_closed_forms() {
    let p = build_interval_m1(1.0, 2000, Potential::Constant(1.0)).unwrap();
    let m = calderon(&p, Complex64::ZERO).unwrap().to_matrix();
    let coth1 = 1.0 / 1.0f64.tanh();
    let csch1 = 1.0 / 1.0f64.sinh();
    let want = [[-coth1, csch1], [csch1, -coth1]];
    for a in 0..2 {
        for b in 0..2 {
            assert!(
                (m[[a, b]] - want[a][b]).norm() < 1e-4,
                "entry ({a},{b}) = {},  want {}",
                m[[a, b]],
                want[a][b]
            );
        }
    }
}

#[test]
fn interval_calderon_converges_at_second_order() {
    let coth1 = 1.0 / 1.0f64.tanh();
    let csch1 = 1.0 / 1.0f64.sinh();
    let want = [[-coth1, csch1], [csch1, -coth1]];
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for cells in [250usize, 500, 1000, 2000] {
        let p = build_interval_m1(1.0, cells, Potential::Constant(1.0)).unwrap();
        let m = calderon(&p, Complex64::ZERO).unwrap().to_matrix();
        let mut err = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                err = err.max((m[[a, b]] - want[a][b]).norm());
            }
        }
        hs.push((1.0 / cells as f64).ln());
        errs.push(err.ln());
    }
    let slope = least_squares_slope(&hs, &errs);
    assert!(
        (slope - 2.0).abs() < 0.2,
        "convergence order {slope}, want 2.0 +- 0.2"
    );
}

#[test]
fn annulus_calderon_matches_power_solutions() {
    let p = build_annulus_m1(1.0, 2.0, 2000, 8, Potential::Constant(0.0)).unwrap();
    let vals = calderon(&p, Complex64::ZERO).unwrap().to_matrix();
    let diag: Vec<Complex64> = (0..p.modes.len()).map(|i| vals[[i, i]]).collect();
    let want = [
        (0i64, -1.0 / 2.0f64.ln()),
        (1, -5.0 / 3.0),
        (2, -34.0 / 15.0),
    ];
    for (k, w) in want {
        let got = fourier_entry(&p, &diag, k);
        assert!((got - w).norm() < 1e-4, "mode {k}: {got}, want {w}");
    }
}

#[test]
fn ball_calderon_degree_zero_matches_exponential_solution() {
    let p = build_ball_exterior_m1(20.0, 2000, 2, Potential::Constant(1.0)).unwrap();
    let vals = calderon(&p, Complex64::ZERO).unwrap();
    let got = vals.diagonal().unwrap()[0];
    assert!((got - (-2.0)).norm() < 1e-3, "degree 0: {got}, want -2");
}

#[test]
fn calderon_zero_is_negative_definite_for_positive_potentials() {
    let q = Potential::Constant(1.0);
    let problems = [
        build_interval_m1(1.0, 400, q.clone()).unwrap(),
        build_halfline_m1(40.0, 800, q.clone()).unwrap(),
        build_annulus_m1(1.0, 2.0, 300, 12, q.clone()).unwrap(),
        build_ball_exterior_m1(15.0, 400, 4, q.clone()).unwrap(),
        build_interval_m2(1.0, 300, q).unwrap(),
    ];
    for p in &problems {
        let m = calderon(p, Complex64::ZERO).unwrap().to_matrix();
        assert!(
            relative_asymmetry(&m) <= 1e-8,
            "{}: Lambda(0) is not Hermitian",
            p.kind
        );
        let (evals, _) = hermitian_eigen(&m).unwrap();
        let top = evals.last().copied().unwrap();
        assert!(top < 0.0, "{}: max eigenvalue {top} not negative", p.kind);
    }
}

#[test]
fn calderon_respects_conjugate_symmetry() {
    let z = Complex64::new(0.3, 1.7);
    let problems = [
        build_interval_m1(1.0, 300, Potential::Constant(1.0)).unwrap(),
        build_annulus_m1(1.0, 2.0, 200, 10, Potential::Constant(1.0)).unwrap(),
        build_interval_m2(1.0, 200, Potential::Constant(1.0)).unwrap(),
    ];
    for p in &problems {
        let mz = calderon(p, z).unwrap().to_matrix();
        let mzbar = calderon(p, z.conj()).unwrap().to_matrix();
        let diff = &mzbar - &adjoint(&mz);
        let num: f64 = diff.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = mz.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(num <= 1e-8 * den, "{}: conjugate symmetry broken", p.kind);
    }
}

#[test]
fn weyl_function_vanishes_exactly_at_zero() {
    let problems = [
        build_interval_m1(1.0, 200, Potential::Constant(1.0)).unwrap(),
        build_interval_m2(1.0, 100, Potential::Constant(1.0)).unwrap(),
        build_annulus_m1(1.0, 2.0, 150, 8, Potential::Constant(1.0)).unwrap(),
    ];
    for p in &problems {
        let m = weyl_function(p, Complex64::ZERO).unwrap().to_matrix();
        assert!(
            m.iter().all(|v| *v == Complex64::ZERO),
            "{}: M(0) has a nonzero entry",
            p.kind
        );
    }
}

#[test]
fn weyl_is_herglotz_in_the_upper_half_plane() {
    let problems = [
        build_interval_m1(1.0, 300, Potential::Constant(1.0)).unwrap(),
        build_halfline_m1(40.0, 800, Potential::Constant(1.0)).unwrap(),
        build_annulus_m1(1.0, 2.0, 300, 12, Potential::Constant(1.0)).unwrap(),
    ];
    for z in [Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0)] {
        for p in &problems {
            let m = weyl_function(p, z).unwrap().to_matrix();
            let d = m.nrows();
            let madj = adjoint(&m);
            let mut im = spectriples_core::CMatrix::zeros((d, d));
            for a in 0..d {
                for b in 0..d {
                    im[[a, b]] = (m[[a, b]] - madj[[a, b]]) / Complex64::new(0.0, 2.0);
                }
            }
            let (evals, _) = hermitian_eigen(&im).unwrap();
            assert!(
                evals[0] > 0.0,
                "{} at z = {z}: Im M has eigenvalue {}",
                p.kind,
                evals[0]
            );
        }
    }
}

#[test]
fn halfline_weyl_matches_closed_form() {
    let p = build_halfline_m1(40.0, 4000, Potential::Constant(1.0)).unwrap();
    let m = weyl_function(&p, Complex64::from(-3.0)).unwrap();
    let got = m.diagonal().unwrap()[0];
    assert!((got - (-1.0)).norm() < 1e-4, "M(-3) = {got}, want -1");
}

#[test]
fn t_operator_entries_decay_like_inverse_mode_number() {
    let p = build_annulus_m1(1.0, 2.0, 2000, 200, Potential::Constant(0.0)).unwrap();
    let t = t_operator(&p, Complex64::from(-1.0)).unwrap();
    let vals = t.diagonal().unwrap();
    let mag = |k: i64| fourier_entry(&p, vals, k).norm();
    let mut lks = Vec::new();
    let mut lts = Vec::new();
    for k in 8..=64i64 {
        lks.push((k as f64).ln());
        lts.push(mag(k).ln());
    }
    let slope = least_squares_slope(&lks, &lts);
    assert!(
        (slope + 1.0).abs() < 0.15,
        "tail decay exponent {slope}, want -1 +- 0.15"
    );
    let ratio = mag(200) / mag(0);
    assert!(
        ratio < 1e-2,
        "entry at the last retained mode has not decayed: ratio {ratio}"
    );
}

fn sample(p: &ModelProblem, mode_index: usize, f: impl Fn(f64) -> f64) -> TestFunction {
    let vals: Vec<Complex64> = (0..p.unknowns())
        .map(|i| Complex64::from(f(p.grid.node(i))))
        .collect();
    TestFunction {
        mode_index,
        values: CVector::from(vals),
    }
}

fn bump(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        if x <= a || x >= b {
            0.0
        } else {
            let t = (x - a) * (b - x) / ((b - a) * (b - a) / 4.0).powi(2);
            (t * t).powi(2)
        }
    }
}

#[test]
fn green_identity_vanishes_on_compactly_supported_functions() {
    let q = Potential::Constant(1.0);
    let cases: Vec<(ModelProblem, usize, f64, f64)> = vec![
        (build_interval_m1(1.0, 200, q.clone()).unwrap(), 0, 0.2, 0.7),
        (build_interval_m2(1.0, 128, q.clone()).unwrap(), 0, 0.2, 0.7),
        (build_halfline_m1(40.0, 400, q.clone()).unwrap(), 0, 8.0, 28.0),
        (
            build_annulus_m1(1.0, 2.0, 200, 8, q.clone()).unwrap(),
            3,
            1.2,
            1.7,
        ),
        (build_ball_exterior_m1(20.0, 300, 2, q).unwrap(), 1, 5.0, 15.0),
    ];
    for (p, mode, a, b) in &cases {
        let u = sample(p, *mode, bump(*a, *b));
        let v = sample(p, *mode, bump(a + 0.1 * (b - a), b + 0.1 * (b - a)));
        let r = green_residual(p, &u, &v).unwrap();
        assert!(
            r.relative() <= 1e-12,
            "{}: relative residual {} on disjoint-from-boundary data",
            p.kind,
            r.relative()
        );
    }
}

#[test]
fn green_identity_is_zero_across_distinct_modes() {
    let p = build_annulus_m1(1.0, 2.0, 150, 8, Potential::Constant(1.0)).unwrap();
    let u = sample(&p, 2, |x| (x - 1.0) * (2.0 - x));
    let v = sample(&p, 5, |x| x.sin());
    let r = green_residual(&p, &u, &v).unwrap();
    assert_eq!(r.absolute, 0.0);
}

#[test]
fn green_identity_converges_for_smooth_functions() {
    let mut hs = Vec::new();
    let mut rs = Vec::new();
    for cells in [100usize, 200, 400, 800] {
        let p = build_interval_m1(1.0, cells, Potential::Constant(1.0)).unwrap();
        let u = sample(&p, 0, |x| (std::f64::consts::PI * x / 2.0).sin());
        let v = sample(&p, 0, |x| (3.0 * x).cos());
        let r = green_residual(&p, &u, &v).unwrap();
        hs.push((1.0 / cells as f64).ln());
        rs.push(r.relative().ln());
    }
    let slope = least_squares_slope(&hs, &rs);
    assert!(slope >= 1.8, "trace-pairing defect decays at order {slope}");
}

#[test]
fn green_identity_converges_for_smooth_functions_fourth_order() {
    let mut hs = Vec::new();
    let mut rs = Vec::new();
    for cells in [64usize, 128, 256, 512] {
        let p = build_interval_m2(1.0, cells, Potential::Constant(1.0)).unwrap();
        let u = sample(&p, 0, |x| (std::f64::consts::PI * x / 2.0).sin());
        let v = sample(&p, 0, |x| (3.0 * x).cos());
        let r = green_residual(&p, &u, &v).unwrap();
        hs.push((1.0 / cells as f64).ln());
        rs.push(r.relative().ln());
    }
    let slope = least_squares_slope(&hs, &rs);
    assert!(slope >= 0.8, "trace-pairing defect decays at order {slope}");
}
