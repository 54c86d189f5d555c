//! Index-formula counts checked against closed-form eigenvalue locations and
//! the direct spectral oracle on the same discretization.

use num_complex::Complex64;
use proptest::prelude::*;
use spectriples_core::problems::{
    build_annulus_m1, build_ball_exterior_m1, build_halfline_m1, build_interval_m1,
    dirichlet_realization, realization_with_k, spectrum, KSpec, Potential,
};
use spectriples_core::{
    count_direct, count_negative_formula, count_negative_formula_with, find_gaps,
    gap_count_formula, left_edge_buffer, RootConvention, SpectralGap,
};

#[test]
fn halfline_negative_counts_match_bound_states() {
    let p = build_halfline_m1(40.0, 2000, Potential::Constant(1.0)).unwrap();
    for (sigma, want) in [(-2.0, 1usize), (-0.5, 0)] {
        let report =
            count_negative_formula(&p, &KSpec::Scalar(Complex64::from(sigma))).unwrap();
        assert!(!report.ambiguous, "{report:?}");
        assert_eq!(report.formula_count, want, "{report:?}");
        assert_eq!(report.direct_count, want, "{report:?}");
        assert!(report.agree);
    }
}

#[test]
fn interval_negative_counts_match_hyperbolic_eigenvalues() {
    let p = build_interval_m1(1.0, 2000, Potential::Constant(1.0)).unwrap();
    for (sigma, want) in [(-1.0, 1usize), (-3.0, 2)] {
        let report =
            count_negative_formula(&p, &KSpec::Scalar(Complex64::from(sigma))).unwrap();
        assert!(!report.ambiguous, "{report:?}");
        assert_eq!(report.formula_count, want, "{report:?}");
        assert!(report.agree, "{report:?}");
    }
}

#[test]
fn ball_negative_count_weights_degree_multiplicities() {
    // Conormal values of the decaying solutions e^{-r}(1/r),
    // e^{-r}(1/r + 1/r^2), e^{-r}(1/r + 3/r^2 + 3/r^3) at q = 1, z = 0 are
    // -2, -5/2, -23/7 for degrees 0, 1, 2. With sigma = -3 the boundary
    // numbers 1 + sigma/(-lambda) are -1/2, -1/5, +2/23, so only degrees 0
    // and 1 contribute: count = 1 + 3 = 4.
    let p = build_ball_exterior_m1(20.0, 1500, 2, Potential::Constant(1.0)).unwrap();
    let report = count_negative_formula(&p, &KSpec::Scalar(Complex64::from(-3.0))).unwrap();
    assert!(!report.ambiguous, "{report:?}");
    assert_eq!(report.formula_count, 4, "{report:?}");
    assert!(report.agree, "{report:?}");
}

#[test]
fn annulus_counts_agree_for_angular_coupling() {
    let p = build_annulus_m1(1.0, 2.0, 60, 8, Potential::Constant(1.0)).unwrap();
    let k = KSpec::Angular {
        cosine: vec![-2.0, -1.5],
    };
    let report = count_negative_formula(&p, &k).unwrap();
    assert!(!report.ambiguous, "{report:?}");
    assert!(report.agree, "{report:?}");
    assert!(report.formula_count > 0, "{report:?}");
}

#[test]
fn principal_branch_is_a_different_experiment() {
    let p = build_halfline_m1(40.0, 1000, Potential::Constant(1.0)).unwrap();
    let k = KSpec::Scalar(Complex64::from(-2.0));
    let default = count_negative_formula(&p, &k).unwrap();
    let principal =
        count_negative_formula_with(&p, &k, RootConvention::PrincipalBranch).unwrap();
    assert!(default.agree);
    assert_eq!(principal.formula_count, 0);
    assert!(!principal.agree);
}

fn mathieu_problem(cells: usize) -> spectriples_core::ModelProblem {
    build_halfline_m1(
        40.0 * std::f64::consts::PI,
        cells,
        Potential::Mathieu {
            amplitude: 2.0,
            shift: 3.0,
        },
    )
    .unwrap()
}

#[test]
fn mathieu_gap_edges_match_characteristic_values() {
    // Band edges of -u'' + (2 cos 2x + 3) u from tabulated Mathieu
    // characteristic values (a_0, b_1, a_1, b_2, a_2) + 3.
    let p = mathieu_problem(4000);
    let dir = dirichlet_realization(&p).unwrap();
    let s = spectrum(&dir, Some((2.0, 8.0))).unwrap();
    let gaps = find_gaps(&s, (2.0, 8.0), 0.3, "mathieu dirichlet").unwrap();
    assert!(gaps.len() >= 2, "found {} gaps", gaps.len());
    let expect = [(2.88975, 4.85911), (6.91702, 7.37130)];
    for (gap, (a, b)) in gaps.iter().zip(expect) {
        assert!(
            (gap.alpha - a).abs() < 0.02 && (gap.beta - b).abs() < 0.02,
            "gap ({}, {}) vs tabulated ({a}, {b})",
            gap.alpha,
            gap.beta
        );
    }
}

#[test]
fn mathieu_gap_count_is_integer_exact() {
    let p = mathieu_problem(4000);
    let dir = dirichlet_realization(&p).unwrap();
    let s = spectrum(&dir, Some((2.0, 6.0))).unwrap();
    let gaps = find_gaps(&s, (2.0, 6.0), 0.3, "mathieu dirichlet").unwrap();
    let gap = &gaps[0];
    let width = gap.beta - gap.alpha;
    for sigma in [-1.0, -0.5] {
        let report = gap_count_formula(
            &p,
            &KSpec::Scalar(Complex64::from(sigma)),
            gap,
            0.02 * width,
        )
        .unwrap();
        assert!(!report.ambiguous, "{report:?}");
        assert!(report.agree, "sigma {sigma}: {report:?}");
    }
    let eps0 = left_edge_buffer(
        &p,
        &KSpec::Scalar(Complex64::from(-1.0)),
        gap,
        &[0.01, 0.02, 0.05, 0.1, 0.2].map(|f: f64| f * width),
    )
    .unwrap();
    assert!(eps0 > 0.0, "no left-edge buffer found");
}

#[test]
fn interval_gap_count_and_buffer_are_consistent() {
    let p = build_interval_m1(1.0, 1000, Potential::Constant(1.0)).unwrap();
    let dir = dirichlet_realization(&p).unwrap();
    let s = spectrum(&dir, Some((5.0, 45.0))).unwrap();
    let gaps = find_gaps(&s, (5.0, 45.0), 5.0, "interval dirichlet").unwrap();
    assert_eq!(gaps.len(), 1);
    let gap = &gaps[0];
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((gap.alpha - (1.0 + pi2)).abs() < 1e-2);
    assert!((gap.beta - (1.0 + 4.0 * pi2)).abs() < 5e-2);

    let k = KSpec::Scalar(Complex64::from(-3.0));
    let rk = realization_with_k(&p, &k).unwrap();
    // pick an epsilon range whose trimmed endpoints no eigenvalue crosses,
    // then the formula must be constant across it
    assert_eq!(
        count_direct(&rk, (gap.beta - 0.8, gap.beta - 0.3)).unwrap(),
        0
    );
    assert_eq!(
        count_direct(&rk, (gap.alpha + 0.3, gap.alpha + 0.8)).unwrap(),
        0
    );
    let mut counts = Vec::new();
    for eps in [0.3, 0.5, 0.8] {
        let report = gap_count_formula(&p, &k, gap, eps).unwrap();
        assert!(report.agree, "eps {eps}: {report:?}");
        assert!(!report.ambiguous);
        counts.push(report.formula_count);
    }
    assert!(counts.windows(2).all(|w| w[0] == w[1]), "{counts:?}");

    let grid = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6];
    let eps0 = left_edge_buffer(&p, &k, gap, &grid).unwrap();
    assert!(eps0 == 0.0 || grid.contains(&eps0));
    if eps0 > 0.0 {
        assert_eq!(count_direct(&rk, (gap.alpha, gap.alpha + eps0)).unwrap(), 0);
    }
    if let Some(next) = grid.iter().find(|e| **e > eps0) {
        assert!(count_direct(&rk, (gap.alpha, gap.alpha + next)).unwrap() > 0);
    }
}

#[test]
fn gap_formula_below_the_spectrum_reproduces_the_negative_count() {
    let p = build_halfline_m1(40.0, 2000, Potential::Constant(1.0)).unwrap();
    let k = KSpec::Scalar(Complex64::from(-2.0));
    let neg = count_negative_formula(&p, &k).unwrap();
    let pseudo = SpectralGap {
        alpha: -10.0,
        beta: 0.5,
        source: "below the dirichlet spectrum".into(),
    };
    let gap = gap_count_formula(&p, &k, &pseudo, 0.05).unwrap();
    assert!(gap.agree, "{gap:?}");
    assert_eq!(gap.formula_count, neg.formula_count);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn negative_count_is_monotone_in_sigma(
        s1 in -5.0f64..2.0,
        s2 in -5.0f64..2.0,
    ) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let p = build_halfline_m1(30.0, 400, Potential::Constant(1.0)).unwrap();
        let a = count_negative_formula(&p, &KSpec::Scalar(Complex64::from(lo))).unwrap();
        let b = count_negative_formula(&p, &KSpec::Scalar(Complex64::from(hi))).unwrap();
        prop_assert!(a.formula_count >= b.formula_count);
        if !a.ambiguous {
            prop_assert!(a.agree, "{a:?}");
        }
        if !b.ambiguous {
            prop_assert!(b.agree, "{b:?}");
        }
    }
}
