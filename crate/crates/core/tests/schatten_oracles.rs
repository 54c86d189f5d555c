//! Resolvent-difference decay checks against independently computed
//! expectations: exact rank collapse for one-dimensional boundaries, route
//! agreement between the factored and dense assemblies, and log-log decay
//! rates at desk scale for the radial families.

use num_complex::Complex64;
use spectriples_core::numerics::{adjoint, singular_values};
use spectriples_core::*;

fn scalar(v: f64) -> KSpec {
    KSpec::Scalar(Complex64::from(v))
}

fn hermitian_k4() -> KSpec {
    let mut k = CMatrix::zeros((4, 4));
    let e = Complex64::new;
    k[[0, 0]] = e(1.0, 0.0);
    k[[1, 1]] = e(-0.5, 0.0);
    k[[2, 2]] = e(0.8, 0.0);
    k[[3, 3]] = e(0.3, 0.0);
    k[[0, 1]] = e(0.3, 0.2);
    k[[1, 0]] = e(0.3, -0.2);
    k[[0, 3]] = e(0.1, 0.0);
    k[[3, 0]] = e(0.1, 0.0);
    k[[1, 2]] = e(0.2, 0.0);
    k[[2, 1]] = e(0.2, 0.0);
    k[[2, 3]] = e(0.0, -0.4);
    k[[3, 2]] = e(0.0, 0.4);
    KSpec::Dense(k)
}

#[test]
fn identical_realizations_give_a_zero_difference() {
    let p = build_annulus_m1(1.0, 2.0, 32, 8, Potential::Constant(1.0)).unwrap();
    let r1 = realization_with_k(&p, &scalar(-1.0)).unwrap();
    let r2 = realization_with_k(&p, &scalar(-1.0)).unwrap();
    let d = resolvent_power_difference(&r1, &r2, Complex64::from(-1.0), 1).unwrap();
    assert!(d.iter().all(|c| c.norm() == 0.0));
}

#[test]
fn second_order_differences_concentrate_on_the_boundary_space() {
    let z = Complex64::from(-1.0);

    let p = build_interval_m1(1.0, 1000, Potential::Constant(1.0)).unwrap();
    let r1 = realization_with_k(&p, &scalar(-1.0)).unwrap();
    let r2 = dirichlet_realization(&p).unwrap();
    let d = resolvent_power_difference(&r1, &r2, z, 1).unwrap();
    let s = singular_values(&d).unwrap();
    assert!(s[1] > 1e-3 * s[0], "two endpoint channels expected");
    assert!(s[2] <= 1e-10 * s[0], "s3/s1 = {:.3e}", s[2] / s[0]);

    let p = build_halfline_m1(40.0, 2000, Potential::Constant(1.0)).unwrap();
    let r1 = realization_with_k(&p, &scalar(-1.0)).unwrap();
    let r2 = dirichlet_realization(&p).unwrap();
    let d = resolvent_power_difference(&r1, &r2, z, 1).unwrap();
    let s = singular_values(&d).unwrap();
    assert!(s[1] <= 1e-10 * s[0], "s2/s1 = {:.3e}", s[1] / s[0]);
}

#[test]
fn clamped_fourth_order_differences_have_rank_four() {
    let p = build_interval_m2(1.0, 512, Potential::Constant(1.0)).unwrap();
    let r1 = realization_with_k(&p, &hermitian_k4()).unwrap();
    let r2 = dirichlet_realization(&p).unwrap();
    let d = resolvent_power_difference(&r1, &r2, Complex64::from(-1.0), 1).unwrap();
    let s = singular_values(&d).unwrap();
    assert!(s[3] > 1e-5 * s[0], "four trace channels expected");
    assert!(s[4] <= 1e-10 * s[0], "s5/s1 = {:.3e}", s[4] / s[0]);
}

#[test]
fn the_factored_route_matches_the_dense_route() {
    let z = Complex64::new(-1.0, 0.5);

    let p = build_annulus_m1(1.0, 2.0, 32, 8, Potential::Constant(1.0)).unwrap();
    let k = scalar(-1.0);
    let list = resolvent_difference_values(&p, &k, z, 1).unwrap();
    let r1 = realization_with_k(&p, &k).unwrap();
    let r2 = dirichlet_realization(&p).unwrap();
    let d = resolvent_power_difference(&r1, &r2, z, 1).unwrap();
    let s = singular_values(&d).unwrap();
    for j in 0..p.boundary_dim() {
        assert!(
            (list.values[j] - s[j]).abs() <= 1e-12 * list.values[0],
            "mode-ranked value {j} disagrees: {} vs {}",
            list.values[j],
            s[j]
        );
    }

    let p = build_ball_exterior_m1(3.0, 32, 3, Potential::Constant(1.0)).unwrap();
    let list = resolvent_difference_values(&p, &k, z, 1).unwrap();
    let leaders = list.collapsed();
    let r1 = realization_with_k(&p, &k).unwrap();
    let r2 = dirichlet_realization(&p).unwrap();
    let d = resolvent_power_difference(&r1, &r2, z, 1).unwrap();
    let s = singular_values(&d).unwrap();
    for j in 0..leaders.len() {
        assert!(
            (leaders[j] - s[j]).abs() <= 1e-12 * leaders[0],
            "block leader {j} disagrees: {} vs {}",
            leaders[j],
            s[j]
        );
    }
}

#[test]
fn conjugate_energies_give_adjoint_differences() {
    let z = Complex64::new(-1.0, 0.5);
    let p = build_annulus_m1(1.0, 2.0, 32, 8, Potential::Constant(1.0)).unwrap();
    let r1 = realization_with_k(&p, &scalar(-1.0)).unwrap();
    let r2 = dirichlet_realization(&p).unwrap();
    let d = resolvent_power_difference(&r1, &r2, z, 1).unwrap();
    let dc = resolvent_power_difference(&r1, &r2, z.conj(), 1).unwrap();
    let adj = adjoint(&d);
    let scale = d.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let dev = dc
        .iter()
        .zip(adj.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    assert!(dev <= 1e-10 * scale, "adjoint deviation {:.3e}", dev / scale);
}

#[test]
fn annulus_couplings_decay_at_the_elliptic_rate() {
    let p = build_annulus_m1(1.0, 2.0, 2000, 128, Potential::Constant(1.0)).unwrap();
    let list = resolvent_difference_values(
        &p,
        &scalar(-1.0),
        Complex64::from(-1.0),
        1,
    )
    .unwrap();
    assert_eq!(list.len(), 257);
    let pred = predicted_schatten_exponent(2, 1, 1, SchattenClass::Elliptic).unwrap();
    assert_eq!(pred.decay_exponent(), 2.0);
    let fit = fit_decay_exponent(&list, 1.0, list.len() / 10, pred).unwrap();
    assert!(
        fit.fitted_exponent >= 1.85,
        "fitted {:.4}",
        fit.fitted_exponent
    );
    assert!(fit.r_squared >= 0.99, "r2 {:.4}", fit.r_squared);
    assert!(schatten_verdict(&fit, DEFAULT_VERDICT_MARGIN));
    let last = *list.values.last().unwrap();
    assert!(fit.fitted_exponent > 0.0 && last < 1e-3 * list.values[0]);
}

#[test]
fn second_powers_steepen_the_decay() {
    let p = build_annulus_m1(1.0, 2.0, 2000, 128, Potential::Constant(1.0)).unwrap();
    let k = scalar(-1.0);
    let z = Complex64::from(-1.0);
    let first = fit_decay_exponent(
        &resolvent_difference_values(&p, &k, z, 1).unwrap(),
        1.0,
        25,
        predicted_schatten_exponent(2, 1, 1, SchattenClass::Elliptic).unwrap(),
    )
    .unwrap();
    let second = fit_decay_exponent(
        &resolvent_difference_values(&p, &k, z, 2).unwrap(),
        1.0,
        25,
        predicted_schatten_exponent(2, 1, 2, SchattenClass::Elliptic).unwrap(),
    )
    .unwrap();
    assert_eq!(second.predicted_exponent, 4.0);
    assert!(
        second.fitted_exponent >= 3.6,
        "fitted {:.4}",
        second.fitted_exponent
    );
    assert!(second.fitted_exponent > first.fitted_exponent + 1.5);
    assert!(schatten_verdict(&second, 0.4));
}

#[test]
fn ball_multiplicities_flatten_the_expanded_decay() {
    let p = build_ball_exterior_m1(41.0, 2000, 64, Potential::Constant(1.0)).unwrap();
    let list = resolvent_difference_values(
        &p,
        &scalar(-1.0),
        Complex64::from(-1.0),
        1,
    )
    .unwrap();
    assert_eq!(list.len(), 65 * 65);
    let pred = predicted_schatten_exponent(3, 1, 1, SchattenClass::Elliptic).unwrap();
    let fit = fit_decay_exponent(&list, 1.0, list.len() / 10, pred).unwrap();
    assert!(
        fit.fitted_exponent >= 0.85,
        "expanded fitted {:.4}",
        fit.fitted_exponent
    );
    assert!(schatten_verdict(&fit, DEFAULT_VERDICT_MARGIN));

    let collapsed = SingularValueList::synthetic(list.collapsed()).unwrap();
    let fit_c = fit_decay_exponent(&collapsed, 1.0, collapsed.len() / 10, pred).unwrap();
    let ratio = fit_c.fitted_exponent / (2.0 * fit.fitted_exponent);
    assert!(
        (ratio - 1.0).abs() <= 0.2,
        "collapse ratio {:.4} (collapsed {:.4}, expanded {:.4})",
        ratio,
        fit_c.fitted_exponent,
        fit.fitted_exponent
    );
}

#[test]
fn sqrt_growth_couplings_meet_the_general_class_bound() {
    let p = build_annulus_m1(1.0, 2.0, 2000, 128, Potential::Constant(1.0)).unwrap();
    let list = resolvent_difference_values(
        &p,
        &KSpec::SqrtModes { scale: -1.0 },
        Complex64::from(-1.0),
        1,
    )
    .unwrap();
    let pred = predicted_schatten_exponent(2, 1, 1, SchattenClass::General).unwrap();
    assert!((pred.decay_exponent() - 1.5).abs() < 1e-15);
    let fit = fit_decay_exponent(&list, 1.0, list.len() / 10, pred).unwrap();
    assert!(
        fit.fitted_exponent >= 1.35,
        "fitted {:.4}",
        fit.fitted_exponent
    );
    assert!(schatten_verdict(&fit, DEFAULT_VERDICT_MARGIN));
}

#[test]
fn energies_on_the_spectrum_are_refused() {
    let p = build_interval_m1(1.0, 32, Potential::Constant(1.0)).unwrap();
    let h = 1.0 / 32.0;
    let lam1 = 1.0 + (4.0 / (h * h)) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    let err = resolvent_difference_values(&p, &scalar(-1.0), Complex64::from(lam1), 1);
    assert!(matches!(err, Err(SchattenError::SpectrumHit { .. })));

    let p = build_interval_m2(1.0, 64, Potential::Constant(1.0)).unwrap();
    let r1 = realization_with_k(&p, &hermitian_k4()).unwrap();
    let r2 = dirichlet_realization(&p).unwrap();
    let z = spectrum(&r1, None).unwrap().points[0].value;
    let err = resolvent_power_difference(&r1, &r2, z, 1);
    assert!(matches!(err, Err(SchattenError::SpectrumHit { .. })));
}

#[test]
fn mismatched_realization_pairs_are_refused() {
    let pa = build_annulus_m1(1.0, 2.0, 32, 8, Potential::Constant(1.0)).unwrap();
    let pb = build_annulus_m1(1.0, 2.0, 32, 9, Potential::Constant(1.0)).unwrap();
    let ra = realization_with_k(&pa, &scalar(-1.0)).unwrap();
    let rb = realization_with_k(&pb, &scalar(-1.0)).unwrap();
    let err = resolvent_power_difference(&ra, &rb, Complex64::from(-1.0), 1);
    assert!(matches!(err, Err(SchattenError::InvalidCombination(_))));

    // angular coupling stores densely; its Dirichlet partner keeps blocks
    let k_ang = KSpec::Angular {
        cosine: vec![1.0, 0.5],
    };
    let rd = realization_with_k(&pa, &k_ang).unwrap();
    let dir = dirichlet_realization(&pa).unwrap();
    let err = resolvent_power_difference(&rd, &dir, Complex64::from(-1.0), 1);
    assert!(matches!(err, Err(SchattenError::InvalidCombination(_))));

    let pm2 = build_interval_m2(1.0, 64, Potential::Constant(1.0)).unwrap();
    let err = resolvent_difference_values(&pm2, &hermitian_k4(), Complex64::from(-1.0), 1);
    assert!(matches!(err, Err(SchattenError::InvalidCombination(_))));

    let err = resolvent_difference_values(&pa, &scalar(-1.0), Complex64::from(-1.0), 0);
    assert!(matches!(err, Err(SchattenError::InvalidCombination(_))));
    let err = resolvent_difference_values(&pa, &scalar(-1.0), Complex64::from(-1.0), 4);
    assert!(matches!(err, Err(SchattenError::InvalidCombination(_))));
}
