use kinreg_core::carleman::*;
use kinreg_core::Error;

fn params() -> CarlemanParams {
    CarlemanParams::new(0.25, 0.5, 1.0).unwrap()
}

fn rotate(x: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    // Rodrigues formula about a unit axis
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let k = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (c, s) = (angle.cos(), angle.sin());
    let kx = [k[1] * x[2] - k[2] * x[1], k[2] * x[0] - k[0] * x[2], k[0] * x[1] - k[1] * x[0]];
    let kd = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
    [0, 1, 2].map(|i| x[i] * c + kx[i] * s + k[i] * kd * (1.0 - c))
}

#[test]
fn vanishes_at_zero_frequency_and_is_even() {
    let p = params();
    assert_eq!(a0_eval([2.0, -1.0, 0.5], [0.0; 3], &p).unwrap(), 0.0);
    let v = [1.0, 0.5, -2.0];
    let eta = [4.0, -3.0, 1.5];
    let a = a0_eval(v, eta, &p).unwrap();
    let b = a0_eval(v, eta.map(|x| -x), &p).unwrap();
    assert!(a > 0.0);
    assert!((a - b).abs() <= 1e-12 * a);
}

#[test]
fn rotation_equivariance() {
    let p = params();
    let v = [1.0, -2.0, 0.5];
    let eta = [3.0, 1.0, -7.0];
    let base = a0_eval(v, eta, &p).unwrap();
    for (axis, angle) in [([0.3, 0.4, 0.9], 0.7), ([1.0, 0.0, 0.0], 2.1), ([-0.2, 1.0, 0.5], 4.0)] {
        let r = a0_eval(rotate(v, axis, angle), rotate(eta, axis, angle), &p).unwrap();
        assert!((r - base).abs() <= 1e-2 * base);
    }
}

#[test]
fn nondecreasing_in_cutoff_radius() {
    let v = [0.0, 1.5, 0.0];
    let eta = [6.0, 0.0, 2.0];
    let vals: Vec<f64> = [0.5, 1.0, 1.5]
        .iter()
        .map(|&delta| a0_eval(v, eta, &CarlemanParams::new(0.25, 0.5, delta).unwrap()).unwrap())
        .collect();
    assert!(vals.windows(2).all(|w| w[1] >= w[0]), "{vals:?}");
}

#[test]
fn quadrature_converges_under_doubling() {
    let p = params();
    for (v, eta) in [([0.0; 3], [0.0, 0.0, 8.0]), ([3.0, 0.0, 0.0], [0.0, 20.0, 0.0]), ([6.0, 0.0, 0.0], [30.0, 5.0, 0.0])] {
        let a = a0_eval(v, eta, &p).unwrap();
        let b = a0_eval(v, eta, &p.refined()).unwrap();
        assert!((a - b).abs() <= 1e-2 * b, "{a} vs {b}");
    }
}

#[test]
fn small_frequency_behaves_quadratically() {
    // 1 − cos(η·h) ≈ (η·h)²/2 for |η|δ ≪ 1
    let p = params();
    let a = a0_eval([0.0; 3], [0.0, 0.0, 1e-2], &p).unwrap();
    let b = a0_eval([0.0; 3], [0.0, 0.0, 2e-2], &p).unwrap();
    assert!((b / a - 4.0).abs() < 1e-3, "{}", b / a);
}

#[test]
fn increments_scale_like_fractional_laplacian() {
    let fit = scaling_exponent([0.0; 3], [0.0, 0.0, 1.0], 8.0, &params()).unwrap();
    assert!((fit - 0.5).abs() <= 0.15 * 0.5, "{fit}");
}

#[test]
fn cutoff_is_smooth_step() {
    assert_eq!(chi_delta(0.5, 1.0), 1.0);
    assert_eq!(chi_delta(3.0, 1.0), 0.0);
    let v: Vec<f64> = (0..=100).map(|i| chi_delta(1.0 + i as f64 / 100.0, 1.0)).collect();
    assert!(v.windows(2).all(|w| w[1] <= w[0]));
    assert!(v[1..100].iter().all(|&x| x > 0.0 && x <= 1.0));
    assert!(v[50] > 0.0 && v[50] < 1.0);
    // flat contact at both ends
    assert!((1.0 - chi_delta(1.01, 1.0)) < 1e-20);
    assert!(chi_delta(1.99, 1.0) < 1e-20);
}

#[test]
fn degenerate_audit_grid_uses_slack_only() {
    let pts: Vec<(Vec3, Vec3)> = [0.0, 1.0, 3.0].iter().map(|&x| ([x, 0.0, 0.0], [0.0; 3])).collect();
    let rep = ellipticity_audit(&pts, &params()).unwrap();
    assert!(rep.finite());
    assert!(rep.rows.iter().all(|r| r.a0 == 0.0));
    assert!(rep.c_slack > 0.0 && rep.c_high == 0.0);
    assert!(ellipticity_audit(&[], &params()).is_err());
}

#[test]
fn audit_grid_shape() {
    let grid = audit_grid();
    assert_eq!(grid.len(), 200);
    let vmax = grid.iter().map(|(v, _)| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).fold(0.0, f64::max);
    let emax = grid.iter().map(|(_, e)| (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt()).fold(0.0, f64::max);
    assert!((vmax - 6.0).abs() < 1e-12 && (emax - 40.0).abs() < 1e-12);
}

#[test]
fn budget_overflow_reports_estimate() {
    let mut p = params();
    p.max_evals = 10_000;
    match a0_eval([1.0, 0.0, 0.0], [0.0, 0.0, 20.0], &p) {
        Err(Error::BudgetExceeded { estimate, error_bound }) => {
            let full = a0_eval([1.0, 0.0, 0.0], [0.0, 0.0, 20.0], &params()).unwrap();
            assert!(estimate > 0.0 && error_bound.is_finite());
            assert!((estimate - full).abs() < 0.1 * full);
        }
        other => panic!("expected a budget error, got {other:?}"),
    }
}

#[test]
fn parameter_validation() {
    assert!(CarlemanParams::new(0.5, 0.5, 1.0).is_err());
    assert!(CarlemanParams::new(0.25, 0.0, 1.0).is_err());
    let mut p = params();
    p.n_r = 3;
    assert!(a0_eval([0.0; 3], [1.0, 0.0, 0.0], &p).is_err());
    let mut q = params();
    q.r_alpha = Some(4.0);
    assert!(a0_eval([0.0; 3], [1.0, 0.0, 0.0], &q).is_err());
}
