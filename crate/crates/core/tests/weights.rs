use kinreg_core::weights::*;
use proptest::prelude::*;

fn p_at(pt: &PhasePoint, wp: &WeightParams) -> f64 {
    weight_values(pt, wp).p
}

fn shifted(pt: &PhasePoint, dir: Vec3, h: f64) -> PhasePoint {
    PhasePoint::new(pt.v, [pt.eta[0] + h * dir[0], pt.eta[1] + h * dir[1], pt.eta[2] + h * dir[2]], pt.xi)
}

/// Central difference of a scalar weight along η in direction `dir`.
fn d_eta(f: impl Fn(&PhasePoint) -> f64, pt: &PhasePoint, dir: Vec3) -> f64 {
    let h = 1e-5 * (1.0 + pt.eta.iter().map(|x| x.abs()).fold(0.0, f64::max));
    (f(&shifted(pt, dir, h)) - f(&shifted(pt, dir, -h))) / (2.0 * h)
}

#[test]
fn suite_has_no_violations() {
    let mut pts = sample_points(5_000, 100.0, 3);
    pts.extend(special_points(100.0));
    for (gamma, s) in [(0.5, 0.25), (1.0, 0.4)] {
        let base = WeightParams::new(s, gamma, 100.0).unwrap();
        let rep = run_suite(&pts, &base, &[100.0, 1e4], 1e-10).unwrap();
        assert!(rep.violations.is_empty(), "{:?}", rep.violations.first());
        assert!(rep.passed(s));
        assert_eq!(rep.violations_csv().lines().count(), 1);
    }
}

#[test]
fn closed_form_gradients_match_finite_differences() {
    let wp = WeightParams::new(0.3, 0.8, 5.0).unwrap();
    for pt in sample_points(500, 6.0, 11) {
        let g = grad_eta_p(&pt, &wp);
        for (a, dir) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].into_iter().enumerate() {
            let fd = d_eta(|q| p_at(q, &wp), &pt, dir);
            assert!((fd - g[a]).abs() <= 1e-6 * (1.0 + g[a].abs()), "{fd} vs {}", g[a]);
        }
        // {p, v·ξ} and {ω, v·ξ} are η-derivatives along ξ
        let fd_p = d_eta(|q| p_at(q, &wp), &pt, pt.xi);
        let bp = bracket_p_vxi(&pt, &wp);
        assert!((fd_p - bp).abs() <= 1e-6 * (1.0 + bp.abs()));
        let fd_w = d_eta(|q| weight_values(q, &wp).omega, &pt, pt.xi);
        let bw = bracket_omega_vxi(&pt, &wp).value;
        assert!((fd_w - bw).abs() <= 1e-6 * (1.0 + bw.abs()), "{fd_w} vs {bw}");
    }
}

#[test]
fn specials_include_degenerate_frames() {
    let sp = special_points(50.0);
    assert_eq!(sp.len(), 6 * 6 * 6 * 6);
    assert!(sp.iter().any(|p| p.v == [0.0; 3] && p.eta == [0.0; 3] && p.xi == [0.0; 3]));
}

#[test]
fn parameter_domain() {
    assert!(WeightParams::new(0.25, 0.5, 1.0).is_ok());
    assert!(WeightParams::new(0.0, 0.5, 1.0).is_err());
    assert!(WeightParams::new(0.25, 0.5, 1.0).unwrap().with_k(0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inequalities_hold_at_random_points(
        v in prop::array::uniform3(-30.0f64..30.0),
        eta in prop::array::uniform3(-30.0f64..30.0),
        xi in prop::array::uniform3(-30.0f64..30.0),
        s in 0.01f64..0.49,
        gamma in 0.1f64..2.0,
        log_k in 0.0f64..5.0,
    ) {
        let wp = WeightParams::new(s, gamma, 10f64.powf(log_k)).unwrap();
        let pt = PhasePoint::new(v, eta, xi);
        for c in all_checks(&pt, &wp, 1e-10) {
            prop_assert!(c.ok, "{} lhs {} rhs {}", c.id, c.lhs, c.rhs);
        }
    }
}
