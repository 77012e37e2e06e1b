use sgm_core::sgm::{
    energy_residual, local_energy_residual, run, step, weak_form_residual, ForcingMode,
    ForcingSpec, HistoryOrigin, InitialSpec, Scheme, SolverConfig, SpaceTimeHistory,
};
use sgm_core::testfn::TestFunction;
use sgm_core::{Error, GridSpec1D, SpectralField1D};

fn grid(n: usize) -> GridSpec1D {
    GridSpec1D::torus(n).unwrap()
}

fn random(_n: usize, h2: f64, mean: f64) -> InitialSpec {
    InitialSpec::RandomPhases {
        kmin: 1,
        kmax: 4,
        h2_norm: h2,
        mean,
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn linear_step_is_exact_per_mode() {
    let g = grid(32);
    let mut cfg = SolverConfig::new(2.0, 1e-3, 1e-3, g, random(32, 1.0, 0.0));
    cfg.linear_only = true;
    let h = InitialSpec::RandomPhases {
        kmin: 1,
        kmax: 15,
        h2_norm: 1.0,
        mean: 0.3,
    }
    .build(&g, 3)
    .unwrap();
    let next = step(&h, &cfg, 0.0).unwrap();
    for k in -15i64..=15 {
        let expect = h.coeff(k) * (-(k as f64).powi(4) * cfg.dt).exp();
        let got = next.coeff(k);
        assert!(
            (got - expect).norm() <= 1e-13 * expect.norm().max(1e-300),
            "k = {k}"
        );
    }
}

#[test]
fn exponential_euler_is_also_exact_for_the_linear_part() {
    let g = grid(16);
    let mut cfg = SolverConfig::new(2.0, 1e-2, 0.1, g, InitialSpec::sine(3, 1.0));
    cfg.linear_only = true;
    cfg.scheme = Scheme::ExpEuler;
    let hist = run(&cfg).unwrap();
    let last = hist.snapshots().last().unwrap();
    let expect = (-81.0f64 * 0.1).exp();
    assert!((last.coeff(3).im + 0.5 * expect).abs() < 1e-13 * expect);
}

#[test]
fn mean_is_conserved_without_forcing() {
    let g = grid(64);
    let mut cfg = SolverConfig::new(2.0, 1e-3, 0.2, g, random(64, 2.0, 0.7));
    cfg.seed = 5;
    let hist = run(&cfg).unwrap();
    let m0 = hist.snapshots()[0].mean();
    for s in hist.snapshots() {
        assert!((s.mean() - m0).abs() <= 1e-12 * (1.0 + m0.abs()));
    }
}

#[test]
fn mean_follows_the_zero_mode_of_the_forcing() {
    let g = grid(32);
    let mut cfg = SolverConfig::new(1.8, 1e-3, 0.1, g, random(32, 1.0, 0.0));
    cfg.forcing = ForcingSpec::Modes {
        modes: vec![ForcingMode {
            k: 0,
            amplitude: 2.0,
            phase: 0.0,
            frequency: 0.0,
        }],
        description: "constant".into(),
    };
    let hist = run(&cfg).unwrap();
    for (t, s) in hist.times().iter().zip(hist.snapshots()) {
        assert!((s.mean() - 2.0 * t).abs() < 1e-12);
    }
}

fn final_state(n: usize, dt: f64, t_end: f64) -> Vec<f64> {
    let mut cfg = SolverConfig::new(2.0, dt, t_end, grid(n), random(n, 1.5, 0.0));
    cfg.seed = 21;
    cfg.snapshot_stride = (t_end / dt).round() as usize;
    run(&cfg).unwrap().snapshots().last().unwrap().inverse()
}

#[test]
fn etdrk4_self_converges_at_fourth_order() {
    // stiff order reduction keeps the observed order a little under 4 at
    // coarse steps; it climbs toward 4 as dt shrinks
    let (n, t) = (32, 0.2);
    let a = final_state(n, 2.5e-3, t);
    let b = final_state(n, 1.25e-3, t);
    let c = final_state(n, 6.25e-4, t);
    let (e1, e2) = (max_diff(&a, &b), max_diff(&b, &c));
    let order = (e1 / e2).log2();
    assert!(order > 3.5 && order < 4.5, "{e1:e} {e2:e}");
}

#[test]
fn history_counts_snapshots() {
    let cfg = SolverConfig::new(2.0, 1e-3, 1e-2, grid(16), random(16, 1.0, 0.0));
    let hist = run(&cfg).unwrap();
    assert_eq!(hist.len(), 11);
    assert!((hist.t_last() - 1e-2).abs() < 1e-15);
    let mut strided = cfg.clone();
    strided.snapshot_stride = 5;
    let hist = run(&strided).unwrap();
    assert_eq!(hist.len(), 3);
    assert!(hist.snapshots().iter().all(|s| s.hermitian_defect() == 0.0));
    assert_eq!(hist.origin(), HistoryOrigin::Solver { linear_only: false });
}

#[test]
fn zero_horizon_gives_the_initial_state() {
    let cfg = SolverConfig::new(2.0, 1e-3, 0.0, grid(16), random(16, 1.0, 0.0));
    let hist = run(&cfg).unwrap();
    assert_eq!(hist.len(), 1);
    assert_eq!(energy_residual(&hist, 0.0, 0.0).unwrap(), 0.0);
}

#[test]
fn subcritical_run_stays_bounded() {
    let mut cfg = SolverConfig::new(1.5, 1e-3, 1.0, grid(64), random(64, 5.0, 0.0));
    cfg.seed = 8;
    cfg.snapshot_stride = 100;
    let hist = run(&cfg).unwrap();
    let sup0 = hist.snapshots()[0]
        .inverse()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for s in hist.snapshots() {
        let sup = s.inverse().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(sup.is_finite() && sup <= 10.0 * sup0);
    }
}

#[test]
fn large_data_near_the_critical_power_completes_or_reports_blow_up() {
    let mut cfg = SolverConfig::new(2.3, 1e-4, 0.05, grid(64), random(64, 400.0, 0.0));
    cfg.sup_ceiling = 1e4;
    cfg.snapshot_stride = 50;
    match run(&cfg) {
        Ok(hist) => assert!(hist
            .snapshots()
            .iter()
            .all(|s| s.coeffs().iter().all(|c| c.norm().is_finite()))),
        Err(e) => match e.cause {
            Error::BlowUpSuspected { last_finite_time } => {
                assert!(last_finite_time.is_finite() && last_finite_time < cfg.t_end);
                if let Some(p) = e.partial {
                    assert!(p.t_last() <= last_finite_time + 1e-12);
                }
            }
            other => panic!("unexpected error {other}"),
        },
    }
}

#[test]
fn ceiling_breach_returns_partial_history() {
    let mut cfg = SolverConfig::new(2.0, 1e-3, 0.1, grid(16), InitialSpec::sine(1, 1.0));
    cfg.forcing = ForcingSpec::Modes {
        modes: vec![ForcingMode {
            k: 0,
            amplitude: 100.0,
            phase: 0.0,
            frequency: 0.0,
        }],
        description: "runaway mean".into(),
    };
    cfg.sup_ceiling = 2.0;
    let err = run(&cfg).unwrap_err();
    let Error::BlowUpSuspected { last_finite_time } = err.cause else {
        panic!("expected a blow-up report");
    };
    let partial = err.partial.unwrap();
    assert!((partial.t_last() - last_finite_time).abs() < 1e-12);
    assert!(last_finite_time < 0.02);
}

#[test]
fn linear_energy_balance_is_tight() {
    let g = grid(32);
    let initial = InitialSpec::RandomPhases {
        kmin: 1,
        kmax: 3,
        h2_norm: 3.0,
        mean: 0.2,
    };
    let mut cfg = SolverConfig::new(2.0, 1e-4, 0.05, g, initial);
    cfg.linear_only = true;
    let hist = run(&cfg).unwrap();
    let e0 = hist.snapshots()[0].l2_norm_sq();
    let res = energy_residual(&hist, 0.0, 0.05).unwrap();
    assert!(res.abs() <= 1e-8 * e0, "{res:e}");
    // without the trace the snapshots carry the same information
    let bare = hist.clone().with_trace(None);
    assert!(energy_residual(&bare, 0.0, 0.05).unwrap().abs() <= 1e-8 * e0);
    assert!(matches!(
        energy_residual(&hist, 0.0, 0.2),
        Err(Error::Range(_))
    ));
}

fn nonlinear_energy_defect(dt: f64) -> f64 {
    let mut cfg = SolverConfig::new(2.0, dt, 0.2, grid(64), random(64, 2.0, 0.0));
    cfg.seed = 4;
    cfg.forcing = ForcingSpec::Modes {
        modes: vec![ForcingMode {
            k: 2,
            amplitude: 0.5,
            phase: 0.1,
            frequency: 3.0,
        }],
        description: String::new(),
    };
    let hist = run(&cfg).unwrap();
    energy_residual(&hist, 0.0, 0.2).unwrap().abs()
}

#[test]
fn nonlinear_energy_defect_shrinks_at_high_order() {
    let a = nonlinear_energy_defect(4e-3);
    let b = nonlinear_energy_defect(2e-3);
    assert!(b < a && (a / b).log2() >= 3.0, "{a:e} {b:e}");
}

#[test]
fn energy_is_dissipated_without_forcing() {
    let mut cfg = SolverConfig::new(2.0, 1e-3, 0.3, grid(64), random(64, 4.0, 0.0));
    cfg.seed = 2;
    let hist = run(&cfg).unwrap();
    let tr = hist.trace().unwrap();
    // the nonlinear flux does no work, so the L2 energy can only decrease
    for w in tr.l2_sq.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn zero_test_function_gives_zero_residuals() {
    let cfg = SolverConfig::new(2.0, 1e-3, 1e-2, grid(16), random(16, 1.0, 0.0));
    let hist = run(&cfg).unwrap();
    assert_eq!(
        local_energy_residual(&hist, &TestFunction::Zero, 0.01).unwrap(),
        0.0
    );
    assert_eq!(weak_form_residual(&hist, &TestFunction::Zero).unwrap(), 0.0);
}

#[test]
fn constant_height_satisfies_the_weak_form() {
    let g = grid(32);
    let c = SpectralField1D::from_coeffs(g, {
        let mut v = vec![num_complex::Complex64::new(0.0, 0.0); 32];
        v[0].re = 1.7;
        v
    })
    .unwrap();
    let hist = SpaceTimeHistory::frozen(&c, 2.0, 0.0, 1.0, 41).unwrap();
    let phi = TestFunction::bump(1.0, 0.8, 0.5, 0.4);
    assert!(weak_form_residual(&hist, &phi).unwrap().abs() < 1e-12);
}

fn linear_local_defect(n: usize, dt: f64) -> f64 {
    let mut cfg = SolverConfig::new(2.0, dt, 0.2, grid(n), random(n, 2.0, 0.3));
    cfg.linear_only = true;
    let hist = run(&cfg).unwrap();
    let phi = TestFunction::bump(2.0, 1.2, 0.1, 0.09);
    local_energy_residual(&hist, &phi, 0.2).unwrap().abs()
}

#[test]
fn local_energy_defect_vanishes_under_refinement_for_linear_runs() {
    let a = linear_local_defect(32, 4e-3);
    let b = linear_local_defect(32, 2e-3);
    let c = linear_local_defect(64, 1e-3);
    assert!(b < 0.1 * a && c < 0.1 * b && c < 1e-10, "{a:e} {b:e} {c:e}");
}

fn nonlinear_weak_defect(dt: f64, bump: TestFunction) -> f64 {
    let mut cfg = SolverConfig::new(2.0, dt, 0.2, grid(64), random(64, 2.0, 0.0));
    cfg.seed = 9;
    let hist = run(&cfg).unwrap();
    weak_form_residual(&hist, &bump).unwrap().abs()
}

#[test]
fn weak_form_defect_decays_at_second_order() {
    let phi = TestFunction::bump(3.0, 1.5, 0.1, 0.09);
    let a = nonlinear_weak_defect(4e-3, phi);
    let b = nonlinear_weak_defect(2e-3, phi);
    let c = nonlinear_weak_defect(1e-3, phi);
    assert!(
        (a / b).log2() > 1.7 && (b / c).log2() > 1.7,
        "{a:e} {b:e} {c:e}"
    );
}

#[test]
fn local_residuals_reject_bad_supports() {
    let cfg = SolverConfig::new(2.0, 1e-3, 1e-2, grid(16), random(16, 1.0, 0.0));
    let hist = run(&cfg).unwrap();
    let late = TestFunction::bump(1.0, 0.5, 0.02, 0.01);
    assert!(matches!(
        weak_form_residual(&hist, &late),
        Err(Error::Range(_))
    ));
    let wide = TestFunction::bump(1.0, 4.0, 0.005, 0.004);
    assert!(matches!(
        local_energy_residual(&hist, &wide, 0.01),
        Err(Error::Range(_))
    ));
    let negative = TestFunction::Bump {
        x_center: 1.0,
        x_halfwidth: 0.5,
        t_center: 0.005,
        t_halfwidth: 0.004,
        amplitude: -1.0,
    };
    assert!(matches!(
        local_energy_residual(&hist, &negative, 0.01),
        Err(Error::Domain(_))
    ));
}

#[test]
fn config_validation() {
    let g = grid(16);
    let ok = SolverConfig::new(2.0, 1e-3, 1e-2, g, random(16, 1.0, 0.0));
    assert!(ok.validate().is_ok());
    for alpha in [1.0, 0.5, 7.0 / 3.0, 2.5, f64::NAN] {
        let mut c = ok.clone();
        c.alpha = alpha;
        assert!(
            matches!(c.validate(), Err(Error::Config(_))),
            "alpha {alpha}"
        );
    }
    let mut c = ok.clone();
    c.dt = 0.0;
    assert!(c.validate().is_err());
    let mut c = ok.clone();
    c.t_end = 1.5e-3;
    assert!(c.validate().is_err());
    let mut c = ok.clone();
    c.snapshot_stride = 0;
    assert!(c.validate().is_err());
    let mut c = ok.clone();
    c.initial = InitialSpec::sine(8, 1.0);
    assert!(c.validate().is_err());
    let mut c = ok;
    c.grid.n = 12;
    assert!(c.validate().is_err());
}
