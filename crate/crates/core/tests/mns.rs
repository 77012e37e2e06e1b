use num_complex::Complex64;
use proptest::prelude::*;
use sgm_core::dimension::{
    mns_derived_exponent, mns_hardcoded_exponent, MnsQuantityKind, Rational,
};
use sgm_core::mns::{
    analyze3, cfl_number, check_ladder, lq_norm, mns_cancellation, mns_nonlinearity, mns_quantity,
    mns_run, mns_scaling_transform, pressure, serrin_monitor, serrin_p_for, MnsConfig, MnsCylinder,
    MnsInitial, MnsQuantityId, VelocityField3D, BOX_LENGTH, MNS_OVERSAMPLE,
};
use sgm_core::Error;

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn grid_points(m: usize) -> impl Iterator<Item = [f64; 3]> {
    let h = BOX_LENGTH / m as f64;
    (0..m * m * m).map(move |idx| {
        let (ix, iy, iz) = (idx / (m * m), (idx / m) % m, idx % m);
        [ix as f64 * h, iy as f64 * h, iz as f64 * h]
    })
}

fn random_field(n: usize, kmax: usize, energy: f64, seed: u64) -> VelocityField3D {
    MnsInitial::RandomSolenoidal { kmax, energy }
        .build(n, seed)
        .unwrap()
}

#[test]
fn zero_field_stays_zero() {
    let u = VelocityField3D::zeros(16).unwrap();
    for c in mns_nonlinearity(&u, 2.5).unwrap() {
        assert!(c.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }
    let hist = mns_run(&MnsConfig::new(16, 2.0, 0.01, 0.05, MnsInitial::Zero)).unwrap();
    assert_eq!(hist.len(), 6);
    for (u, p) in hist.velocity.iter().zip(&hist.pressure) {
        assert_eq!(u.energy(), 0.0);
        assert_eq!(max_abs(p.coeffs()), 0.0);
    }
    for id in MnsQuantityId::all(3.0) {
        let cyl = MnsCylinder::new([1.0, 2.0, 3.0], 0.05, 0.2);
        assert_eq!(mns_quantity(&hist, &cyl, id, MNS_OVERSAMPLE).unwrap(), 0.0);
    }
}

#[test]
fn nonlinearity_rejects_alpha_at_most_one() {
    let u = VelocityField3D::taylor_green(16, 1.0).unwrap();
    assert!(matches!(mns_nonlinearity(&u, 1.0), Err(Error::Domain(_))));
    assert!(matches!(mns_cancellation(&u, 0.5), Err(Error::Domain(_))));
}

#[test]
fn quadratic_case_matches_advection_kernel() {
    // u . grad u_i from physical velocity and gradient samples on the 3/2 grid
    let n = 16;
    let u = random_field(n, 5, 1.0, 7);
    let m = 3 * n / 2;
    let s = u.samples(m).unwrap();
    let g = u.gradient_samples(m).unwrap();
    let nl = mns_nonlinearity(&u, 2.0).unwrap();
    for i in 0..3 {
        let adv: Vec<f64> = (0..m * m * m)
            .map(|p| (0..3).map(|j| s[j][p] * g[i][j][p]).sum())
            .collect();
        let want = analyze3(&adv, m, n).unwrap();
        assert!(max_diff(&nl[i], &want) <= 1e-10 * max_abs(&want).max(1.0));
    }
}

/// `u . grad u_i^{alpha-1}` of the Taylor-Green field, pointwise from closed forms.
fn taylor_green_oracle(a: f64, alpha: f64, x: [f64; 3]) -> [f64; 3] {
    let (sx, cx) = x[0].sin_cos();
    let (sy, cy) = x[1].sin_cos();
    let (_, cz) = x[2].sin_cos();
    let u = [a * sx * cy * cz, -a * cx * sy * cz, 0.0];
    let sz = x[2].sin();
    let grad = [
        [a * cx * cy * cz, -a * sx * sy * cz, -a * sx * cy * sz],
        [a * sx * sy * cz, -a * cx * cy * cz, a * cx * sy * sz],
        [0.0, 0.0, 0.0],
    ];
    let e = alpha - 1.0;
    let mut out = [0.0; 3];
    for i in 0..3 {
        let dpow = e * u[i].abs().powf(e - 1.0);
        out[i] = (0..3).map(|j| u[j] * grad[i][j]).sum::<f64>() * dpow;
    }
    out
}

#[test]
fn taylor_green_matches_oversampled_oracle() {
    // alpha - 1 odd keeps the power polynomial, so the dealiased product is exact
    let n = 16;
    let m = 8 * n;
    for (alpha, amp) in [(2.0, 1.3), (4.0, 0.8)] {
        let u = VelocityField3D::taylor_green(n, amp).unwrap();
        let nl = mns_nonlinearity(&u, alpha).unwrap();
        let pts: Vec<[f64; 3]> = grid_points(m)
            .map(|x| taylor_green_oracle(amp, alpha, x))
            .collect();
        for i in 0..3 {
            let v: Vec<f64> = pts.iter().map(|p| p[i]).collect();
            let want = analyze3(&v, m, n).unwrap();
            assert!(
                max_diff(&nl[i], &want) <= 1e-8,
                "alpha {alpha} component {i}"
            );
        }
    }
}

#[test]
fn taylor_green_pressure_closed_form() {
    // classical pressure A^2/16 (cos 2x + cos 2y)(cos 2z + 2)
    let (n, a) = (16, 1.7);
    let u = VelocityField3D::taylor_green(n, a).unwrap();
    let p = pressure(&u, 2.0).unwrap();
    assert_eq!(p.mean(), 0.0);
    let m = 2 * n;
    let got = p.samples(m).unwrap();
    for (x, v) in grid_points(m).zip(&got) {
        let want =
            a * a / 16.0 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos()) * ((2.0 * x[2]).cos() + 2.0);
        assert!((v - want).abs() <= 1e-12, "{v} vs {want}");
    }
}

#[test]
fn pressure_is_mean_free() {
    for alpha in [1.5, 2.0, 2.5, 3.2] {
        let u = random_field(16, 4, 2.0, 3);
        assert_eq!(pressure(&u, alpha).unwrap().mean(), 0.0);
    }
}

#[test]
fn cancellation_holds_for_fields() {
    for (alpha, seed) in [(1.5, 1), (2.0, 2), (2.3, 3), (3.0, 4)] {
        let u = random_field(16, 5, 3.0, seed);
        let (value, scale) = mns_cancellation(&u, alpha).unwrap();
        assert!(scale > 0.0);
        assert!(
            value.abs() <= 1e-10 * scale,
            "alpha {alpha}: {value} vs {scale}"
        );
    }
}

fn decaying_run(alpha: f64, dt: f64, t_end: f64) -> sgm_core::mns::MnsHistory {
    let mut cfg = MnsConfig::new(
        16,
        alpha,
        dt,
        t_end,
        MnsInitial::RandomSolenoidal {
            kmax: 3,
            energy: 4.0,
        },
    );
    cfg.seed = 11;
    mns_run(&cfg).unwrap()
}

#[test]
fn run_keeps_constraint_and_cancellation() {
    let hist = decaying_run(2.5, 0.01, 0.2);
    assert_eq!(hist.len(), 21);
    assert!(hist.max_divergence_defect <= 1e-12);
    for (u, p) in hist.velocity.iter().zip(&hist.pressure) {
        assert!(u.divergence_defect() <= 1e-12);
        assert!(u.hermitian_defect() <= 1e-12);
        assert_eq!(p.mean(), 0.0);
        let (value, scale) = mns_cancellation(u, 2.5).unwrap();
        assert!(value.abs() <= 1e-10 * scale);
    }
}

#[test]
fn energy_equality_residual_shrinks_with_dt() {
    let res: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| decaying_run(2.0, dt, 0.4).trace.energy_equality_residual())
        .collect();
    for w in res.windows(2) {
        assert!(w[1] < w[0] / 8.0, "{res:?}");
    }
    assert!(res[2] <= 1e-5, "{res:?}");
}

#[test]
fn energy_decays_without_forcing() {
    let hist = decaying_run(2.3, 0.01, 0.3);
    for w in hist.trace.energy.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn advective_bound_is_enforced() {
    let u = VelocityField3D::taylor_green(16, 10.0).unwrap();
    assert!(cfl_number(&u, 2.0, 0.1).unwrap() > 1.0);
    let cfg = MnsConfig::new(
        16,
        2.0,
        0.1,
        0.5,
        MnsInitial::TaylorGreen { amplitude: 10.0 },
    );
    let err = mns_run(&cfg).unwrap_err();
    assert!(matches!(err.cause, Error::Config(_)));
    assert!(err.partial.is_none());
}

#[test]
fn config_is_validated() {
    let bad = [
        MnsConfig::new(24, 2.0, 0.01, 0.1, MnsInitial::Zero),
        MnsConfig::new(16, 1.0, 0.01, 0.1, MnsInitial::Zero),
        MnsConfig::new(16, 2.0, 0.0, 0.1, MnsInitial::Zero),
        MnsConfig::new(16, 2.0, 0.03, 0.1, MnsInitial::Zero),
    ];
    for cfg in &bad {
        assert!(cfg.validate().is_err());
    }
    let bad_kmax = MnsInitial::RandomSolenoidal {
        kmax: 8,
        energy: 1.0,
    };
    assert!(bad_kmax.build(16, 0).is_err());
}

#[test]
fn ladder_points() {
    assert_eq!(serrin_p_for(6.0, 2.0), Some(4.0));
    // alpha = 2 is the classical line 2/p + 3/q = 1
    for q in [3.5, 4.0, 8.0, 20.0] {
        let p = serrin_p_for(q, 2.0).unwrap();
        assert!((2.0 / p + 3.0 / q - 1.0).abs() < 1e-14);
    }
    assert!(check_ladder(4.0, 6.0, 2.0).is_ok());
    assert!(serrin_p_for(3.0, 2.0).is_none());
    assert!(serrin_p_for(2.0, 1.5).is_some());
    match check_ladder(5.0, 6.0, 2.0) {
        Err(Error::Config(msg)) => assert!(msg.contains("admissible")),
        other => panic!("{other:?}"),
    }
    assert!(matches!(check_ladder(8.0, 3.0, 2.0), Err(Error::Config(_))));
}

#[test]
fn serrin_norm_decreases_on_decaying_run() {
    let hist = decaying_run(2.0, 0.01, 0.3);
    let rep = serrin_monitor(&hist, 4.0, 6.0, 2.0).unwrap();
    assert!(rep.bounded && rep.decreasing);
    assert_eq!(rep.lq_norms.len(), hist.len());
    assert_eq!(rep.running_lp[0], 0.0);
    assert!(rep.running_lp.windows(2).all(|w| w[1] >= w[0]));
    assert!(serrin_monitor(&hist, 5.0, 6.0, 2.0).is_err());
}

#[test]
fn lq_norm_of_taylor_green() {
    // int |u|^2 = 2 A^2 pi^3 for the Taylor-Green field
    let a = 1.5;
    let u = VelocityField3D::taylor_green(16, a).unwrap();
    let l2 = lq_norm(&u, 2.0).unwrap();
    let pi3 = std::f64::consts::PI.powi(3);
    assert!((l2 * l2 - 2.0 * a * a * pi3).abs() < 1e-10);
    assert!((u.energy() - 2.0 * a * a * pi3).abs() < 1e-10);
}

#[test]
fn classical_cubic_exponent() {
    assert_eq!(MnsQuantityId::Ep(3.0).exponent(2.0), 2.0);
    let e = mns_hardcoded_exponent(
        MnsQuantityKind::Ep,
        Rational::from_integer(2),
        Rational::from_integer(3),
    )
    .unwrap();
    assert_eq!(e, Rational::from_integer(2));
    assert_eq!(MnsQuantityId::Gradient.exponent(2.0), 1.0);
    assert_eq!(MnsQuantityId::EStar.exponent(2.0), 1.0);
    assert_eq!(MnsQuantityId::Pressure.exponent(2.0), 2.0);
}

proptest! {
    #[test]
    fn exponents_match_dimension_bookkeeping(num in 11i64..400, p in 1i64..12) {
        let alpha = Rational::new(num, 10);
        prop_assume!(alpha > Rational::from_integer(1));
        let p = Rational::new(p, 2);
        for kind in MnsQuantityKind::ALL {
            prop_assert_eq!(
                mns_derived_exponent(kind, alpha, p).unwrap(),
                mns_hardcoded_exponent(kind, alpha, p).unwrap()
            );
        }
    }
}

#[test]
fn scaling_leaves_quantities_invariant() {
    let alpha = 2.5;
    let hist = decaying_run(alpha, 0.01, 0.2);
    let scaled = mns_scaling_transform(&hist, 2).unwrap();
    assert_eq!(scaled.side(), 32);
    let (x0, t0, r) = ([1.3, 2.9, 4.1], 0.2, 0.4);
    for id in MnsQuantityId::all(3.0) {
        let a = mns_quantity(&hist, &MnsCylinder::new(x0, t0, r), id, MNS_OVERSAMPLE).unwrap();
        let xs = [x0[0] / 2.0, x0[1] / 2.0, x0[2] / 2.0];
        let b = mns_quantity(
            &scaled,
            &MnsCylinder::new(xs, t0 / 4.0, r / 2.0),
            id,
            MNS_OVERSAMPLE,
        )
        .unwrap();
        assert!(a > 0.0);
        assert!((a - b).abs() <= 1e-3 * a, "{id:?}: {a} vs {b}");
    }
    assert!(mns_scaling_transform(&hist, 3).is_err());
}

#[test]
fn cylinder_must_fit_the_run() {
    let hist = decaying_run(2.0, 0.01, 0.1);
    let early = MnsCylinder::new([0.0; 3], 0.05, 0.3);
    assert!(matches!(
        mns_quantity(&hist, &early, MnsQuantityId::Gradient, MNS_OVERSAMPLE),
        Err(Error::Range(_))
    ));
    let wide = MnsCylinder::new([0.0; 3], 0.1, 4.0);
    assert!(mns_quantity(&hist, &wide, MnsQuantityId::EStar, MNS_OVERSAMPLE).is_err());
}
