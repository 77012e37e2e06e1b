use proptest::prelude::*;
use sgm_core::cylinder::{
    cylinder_quantity, scaling_transform, singular_scan, summarize_scan, Criterion, Lattice,
    ParabolicCylinder, Resolution, SampledHistory, ScanConfig, Thresholds, Verdict,
    DEFAULT_OVERSAMPLE,
};
use sgm_core::dimension::{
    derived_exponent, dimension_assignment, hardcoded_exponent, singular_set_exponent, QuantityId,
    QuantityKind, Rational, Symbol,
};
use sgm_core::sgm::{run, ForcingMode, ForcingSpec, InitialSpec, SolverConfig, SpaceTimeHistory};
use sgm_core::{Error, GridSpec1D, SpectralField1D};
use std::f64::consts::PI;

fn frozen(n: usize, f: impl Fn(f64) -> f64, alpha: f64, t_lo: f64, t_hi: f64) -> SpaceTimeHistory {
    let g = GridSpec1D::torus(n).unwrap();
    let v: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
    let field = SpectralField1D::forward(g, &v).unwrap();
    SpaceTimeHistory::frozen(&field, alpha, t_lo, t_hi, 9).unwrap()
}

fn smooth_run(alpha: f64, n: usize) -> SpaceTimeHistory {
    let mut cfg = SolverConfig::new(
        alpha,
        1e-3,
        0.2,
        GridSpec1D::torus(n).unwrap(),
        InitialSpec::RandomPhases {
            kmin: 1,
            kmax: 3,
            h2_norm: 1.0,
            mean: 0.2,
        },
    );
    cfg.seed = 13;
    cfg.snapshot_stride = 4;
    cfg.forcing = ForcingSpec::Modes {
        modes: vec![ForcingMode {
            k: 2,
            amplitude: 0.3,
            phase: 0.4,
            frequency: 1.0,
        }],
        description: String::new(),
    };
    run(&cfg).unwrap()
}

#[test]
fn zero_field_gives_zero_everywhere() {
    let h = frozen(32, |_| 0.0, 2.0, 0.0, 1.0);
    let cyl = ParabolicCylinder::new(1.0, 0.5, 0.6);
    for id in QuantityId::all(2.5) {
        assert_eq!(
            cylinder_quantity(&h, &cyl, id).unwrap(),
            0.0,
            "{}",
            id.label()
        );
    }
}

#[test]
fn constants_are_invisible_to_derivative_and_tilde_quantities() {
    let h = frozen(32, |_| 1.3, 1.8, 0.0, 1.0);
    let cyl = ParabolicCylinder::new(2.0, 0.5, 0.7);
    for id in [
        QuantityId::E,
        QuantityId::EStarTilde,
        QuantityId::DpTilde(2.0),
        QuantityId::EAlpha1,
        QuantityId::Phi,
    ] {
        assert!(
            cylinder_quantity(&h, &cyl, id).unwrap().abs() < 1e-24,
            "{}",
            id.label()
        );
    }
    assert!(cylinder_quantity(&h, &cyl, QuantityId::DInf1).unwrap() > 0.0);
}

#[test]
fn frozen_sine_over_the_full_period_has_closed_forms() {
    // r = pi covers one period and the time window is t0 +- pi^4
    let (r, a) = (PI, PI.powi(4));
    let h = frozen(64, f64::sin, 2.0, -a, a);
    let cyl = ParabolicCylinder::new(0.0, 0.0, r);
    let height = 2.0 * a;
    let cases = [
        (QuantityId::E, height * PI / r),
        (QuantityId::EStar, PI / r),
        (QuantityId::EStarTilde, PI / r),
        (QuantityId::Dp(2.0), height * PI / r.powi(5)),
        (QuantityId::DpTilde(2.0), height * PI / r.powi(5)),
        (QuantityId::EAlpha1, height * (8.0 / 3.0) / r.powi(2)),
        (QuantityId::Phi, (height * (8.0 / 3.0) / r.powi(2)).cbrt()),
        (
            QuantityId::E127_2,
            height * PI.powf(6.0 / 7.0) / r.powf(10.0 / 7.0),
        ),
    ];
    for (id, expect) in cases {
        let got = cylinder_quantity(&h, &cyl, id).unwrap();
        assert!(
            (got - expect).abs() <= 1e-6 * expect,
            "{}: {got} vs {expect}",
            id.label()
        );
    }
    // |sin| has kinks, where the hat interpolant is only second order
    let got = cylinder_quantity(&h, &cyl, QuantityId::DInf1).unwrap();
    assert!((got - 4.0 / r).abs() <= 1e-4 * 4.0 / r);
}

/// Midpoint rule with `k` cells on `[x0 - r, x0 + r]`.
fn dense(k: usize, x0: f64, r: f64, g: impl Fn(f64) -> f64) -> f64 {
    let w = 2.0 * r / k as f64;
    (0..k)
        .map(|i| g(x0 - r + (i as f64 + 0.5) * w))
        .sum::<f64>()
        * w
}

#[test]
fn partial_ball_matches_a_dense_oracle() {
    let profile = |x: f64| (x).sin() + 0.4 * (3.0 * x + 0.2).cos();
    let h = frozen(64, profile, 2.0, 0.0, 2.0);
    let (x0, r) = (1.1, 0.83);
    let cyl = ParabolicCylinder::new(x0, 1.0, r);
    let height = 2.0 * r.powi(4);
    let hyy = |x: f64| -(x).sin() - 3.6 * (3.0 * x + 0.2).cos();
    let hy = |x: f64| (x).cos() - 1.2 * (3.0 * x + 0.2).sin();
    let k = 200_000;
    let cases = [
        (
            QuantityId::E,
            height * dense(k, x0, r, |x| hyy(x).powi(2)) / r,
        ),
        (
            QuantityId::EStar,
            dense(k, x0, r, |x| profile(x).powi(2)) / r,
        ),
        (
            QuantityId::Dp(3.0),
            height * dense(k, x0, r, |x| profile(x).abs().powi(3)) / r.powi(5),
        ),
        (
            QuantityId::EAlpha1,
            height * dense(k, x0, r, |x| hy(x).abs().powi(3)) / r.powi(2),
        ),
        (QuantityId::DInf1, dense(k, x0, r, |x| profile(x).abs()) / r),
    ];
    for (id, expect) in cases {
        let got = cylinder_quantity(&h, &cyl, id).unwrap();
        // hat-interpolant quadrature on the 8x grid is second order in its spacing
        assert!(
            (got - expect).abs() <= 1e-4 * expect,
            "{}: {got} vs {expect}",
            id.label()
        );
    }
}

#[test]
fn quantity_errors() {
    let h = frozen(32, f64::sin, 2.0, 0.0, 1.0);
    let inside = ParabolicCylinder::new(1.0, 0.5, 0.5);
    assert!(matches!(
        cylinder_quantity(&h, &inside, QuantityId::Dp(0.5)),
        Err(Error::Domain(_))
    ));
    let late = ParabolicCylinder::new(1.0, 0.95, 0.5);
    assert!(matches!(
        cylinder_quantity(&h, &late, QuantityId::E),
        Err(Error::Range(_))
    ));
    assert!(cylinder_quantity(&h, &inside.with_radius(0.0), QuantityId::E).is_err());
}

#[test]
fn unit_scaling_is_the_identity() {
    let h = smooth_run(1.8, 32);
    assert_eq!(scaling_transform(&h, 1.0).unwrap(), h);
    assert!(matches!(scaling_transform(&h, 3.0), Err(Error::Config(_))));
    assert!(matches!(scaling_transform(&h, 0.5), Err(Error::Config(_))));
}

fn check_invariance(alpha: f64, lambda: f64) {
    let h = smooth_run(alpha, 32);
    let scaled = scaling_transform(&h, lambda).unwrap();
    let a = SampledHistory::new(&h, DEFAULT_OVERSAMPLE).unwrap();
    let b = SampledHistory::new(&scaled, DEFAULT_OVERSAMPLE).unwrap();
    let l4 = lambda.powi(4);
    for r in [0.55, 0.4] {
        let cyl = ParabolicCylinder::new(1.3, 0.1, r);
        let small = ParabolicCylinder::new(1.3 / lambda, 0.1 / l4, r / lambda);
        for id in QuantityId::all(2.5) {
            let q = a.quantity(&cyl, id).unwrap();
            let ql = b.quantity(&small, id).unwrap();
            assert!(
                (q - ql).abs() / q.max(1e-12) <= 1e-3,
                "{} at r={r}: {q} vs {ql}",
                id.label()
            );
        }
    }
}

#[test]
fn quantities_are_dimensionless_at_the_conserved_kpz_power() {
    check_invariance(2.0, 2.0);
}

#[test]
fn quantities_are_dimensionless_for_other_powers() {
    check_invariance(1.6, 2.0);
    check_invariance(2.2, 4.0);
}

#[test]
fn dimension_table_values() {
    let two = Rational::from_integer(2);
    assert_eq!(
        dimension_assignment(Symbol::H, two).unwrap(),
        Rational::from_integer(0)
    );
    for a in [Rational::new(3, 2), two, Rational::new(11, 5)] {
        assert_eq!(
            dimension_assignment(Symbol::T, a).unwrap(),
            Rational::from_integer(4)
        );
        assert_eq!(
            dimension_assignment(Symbol::X, a).unwrap(),
            Rational::from_integer(1)
        );
        assert_eq!(
            dimension_assignment(Symbol::Dx, a).unwrap(),
            Rational::from_integer(-1)
        );
        assert_eq!(
            dimension_assignment(Symbol::Dt, a).unwrap(),
            Rational::from_integer(-4)
        );
    }
    assert!(dimension_assignment(Symbol::H, Rational::from_integer(1)).is_err());
    let e = derived_exponent(QuantityKind::E, two, two).unwrap();
    assert_eq!(e, Rational::from_integer(1));
    assert_eq!(
        singular_set_exponent(two).unwrap(),
        Rational::from_integer(1)
    );
    assert_eq!(
        singular_set_exponent(Rational::new(5, 3)).unwrap(),
        Rational::from_integer(0)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn derived_exponents_match_the_quantity_list(num in 1001i64..2333, pnum in 2i64..40) {
        let alpha = Rational::new(num, 1000);
        let p = Rational::new(pnum, 4);
        for kind in QuantityKind::ALL {
            prop_assert_eq!(derived_exponent(kind, alpha, p).unwrap(), hardcoded_exponent(kind, alpha, p).unwrap());
        }
    }

    #[test]
    fn smaller_cylinders_see_less(r_big in 0.3f64..1.15, shrink in 0.05f64..0.99, x0 in 0.0f64..6.28) {
        let h = frozen(32, |x| x.sin() + 0.5 * (2.0 * x).cos(), 2.0, 0.0, 4.0);
        let s = SampledHistory::new(&h, DEFAULT_OVERSAMPLE).unwrap();
        let big = ParabolicCylinder::new(x0, 2.0, r_big);
        let small = big.with_radius(r_big * shrink);
        for id in [QuantityId::E, QuantityId::Dp(2.0), QuantityId::EAlpha1, QuantityId::EStar, QuantityId::DInf1] {
            let a = s.raw_quantity(&small, id, Default::default()).unwrap();
            let b = s.raw_quantity(&big, id, Default::default()).unwrap();
            prop_assert!(a <= b, "{}: {} > {}", id.label(), a, b);
        }
    }
}

#[test]
fn zero_field_is_regular_for_every_monitor() {
    let h = frozen(32, |_| 0.0, 2.0, 0.0, 1.0);
    let s = SampledHistory::new(&h, DEFAULT_OVERSAMPLE).unwrap();
    for c in Criterion::ALL {
        for threshold in [1e-12, 1.0] {
            let v = s
                .epsilon_monitor(
                    2.0,
                    0.5,
                    c,
                    &[0.8, 0.6, 0.4],
                    threshold,
                    &Resolution::default(),
                )
                .unwrap();
            assert_eq!(v.verdict, Verdict::RegularIndicated);
        }
    }
}

#[test]
fn monitor_configuration_errors() {
    let h = frozen(32, f64::sin, 2.0, 0.0, 1.0);
    let s = SampledHistory::new(&h, DEFAULT_OVERSAMPLE).unwrap();
    let res = Resolution::default();
    assert!(matches!(
        s.epsilon_monitor(1.0, 0.5, Criterion::Con2, &[], 1.0, &res),
        Err(Error::Config(_))
    ));
    assert!(s
        .epsilon_monitor(1.0, 0.5, Criterion::Con2, &[0.3, 0.5], 1.0, &res)
        .is_err());
    assert!(s
        .epsilon_monitor(1.0, 0.5, Criterion::Con2, &[0.5, 0.3], 0.0, &res)
        .is_err());
}

#[test]
fn unresolvable_radii_leave_the_verdict_undetermined() {
    let h = frozen(32, f64::sin, 2.0, 0.0, 0.01);
    let s = SampledHistory::new(&h, DEFAULT_OVERSAMPLE).unwrap();
    // every window r^4 > 0.005 escapes the short slab
    let v = s
        .epsilon_monitor(
            1.0,
            0.005,
            Criterion::Con2,
            &[0.9, 0.5],
            1e3,
            &Resolution::default(),
        )
        .unwrap();
    assert!(v.values.iter().all(|x| x.is_nan()));
    assert_eq!(v.verdict, Verdict::Undetermined);
}

#[test]
fn subcritical_energy_monitor_passes_trivially() {
    // at alpha = 3/2 the exponent of E is -1, so E(r) = r * int int |h_yy|^2 -> 0
    let h = smooth_run(1.5, 64);
    let s = SampledHistory::new(&h, DEFAULT_OVERSAMPLE).unwrap();
    assert!(QuantityId::E.exponent(1.5) < 0.0);
    let ladder = [0.55, 0.45, 0.3, 0.2];
    let v = s
        .epsilon_monitor(
            2.0,
            0.1,
            Criterion::Con2,
            &ladder,
            1e-2,
            &Resolution::default(),
        )
        .unwrap();
    assert_eq!(v.verdict, Verdict::RegularIndicated);
    assert!(v.resolved.iter().all(|ok| *ok));
    assert!(v.values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn scan_reports_target_dimension() {
    assert_eq!(summarize_scan(vec![], 2.0, 2.0 * PI).target_dimension, 1.0);
    assert!(
        summarize_scan(vec![], 5.0 / 3.0, 2.0 * PI)
            .target_dimension
            .abs()
            < 1e-15
    );
}

#[test]
fn smooth_run_scan_has_no_undetermined_points() {
    let h = smooth_run(2.0, 64);
    let s = SampledHistory::new(&h, DEFAULT_OVERSAMPLE).unwrap();
    let cfg = ScanConfig {
        lattice: Lattice::uniform(2.0 * PI, 6, 0.08, 0.12, 2),
        radii: vec![0.5, 0.35, 0.25],
        criteria: Criterion::ALL.to_vec(),
        thresholds: Thresholds::default(),
        resolution: Resolution::default(),
    };
    let report = singular_scan(&s, &cfg).unwrap();
    assert_eq!(report.points.len(), 12);
    assert_eq!(report.undetermined, 0);
    assert!(report.box_dimension.is_none());
    let mut empty = cfg;
    empty.criteria.clear();
    assert!(singular_scan(&s, &empty).is_err());
}

#[test]
fn campanato_of_constant_is_degenerate() {
    let h = frozen(32, |_| 2.5, 2.0, 0.0, 1.0);
    let s = SampledHistory::new(&h, DEFAULT_OVERSAMPLE).unwrap();
    let fit = s
        .campanato_exponent(1.0, 0.5, 2.0, &[0.6, 0.5, 0.4, 0.3])
        .unwrap();
    assert_eq!(fit.nu_hat, f64::INFINITY);
    assert_eq!(fit.m_hat, 0.0);
}

#[test]
fn campanato_of_linear_profile_has_unit_exponent() {
    // h = y - pi on [0, 2 pi), a sawtooth that is exactly linear near y = pi
    let m = 512;
    let length = 2.0 * PI;
    let times: Vec<f64> = (0..5).map(|i| i as f64 * 0.25).collect();
    let row: Vec<f64> = (0..m).map(|j| j as f64 * length / m as f64 - PI).collect();
    let h = vec![row.clone(); 5];
    let hy = vec![vec![1.0; m]; 5];
    let hyy = vec![vec![0.0; m]; 5];
    let s = SampledHistory::from_samples(length, 2.0, times, h, hy, hyy, None).unwrap();
    for p in [1.0, 2.0, 3.0] {
        let fit = s
            .campanato_exponent(PI, 0.5, p, &[0.8, 0.6, 0.45, 0.3, 0.2])
            .unwrap();
        assert!((fit.nu_hat - 1.0).abs() < 1e-3, "p={p}: {}", fit.nu_hat);
        let m_exact = (1.0 / (p + 1.0)).powf(1.0 / p);
        assert!(
            (fit.m_hat - m_exact).abs() < 1e-2 * m_exact,
            "p={p}: {}",
            fit.m_hat
        );
    }
    assert!(matches!(
        s.campanato_exponent(PI, 0.5, 0.5, &[0.8, 0.6, 0.45, 0.3]),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        s.campanato_exponent(PI, 0.5, 2.0, &[0.8, 0.6, 0.45]),
        Err(Error::Config(_))
    ));
}
