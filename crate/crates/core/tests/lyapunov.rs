use kinreg_core::kolmogorov::*;
use kinreg_core::lyapunov::*;
use kinreg_core::spectral::*;
use proptest::prelude::*;

fn trajectory(s: f64, vel: VelocityProfile, n: usize) -> Vec<(f64, SpectralField)> {
    let grid = GridSpec::new(1, 3, 64, 8.0).unwrap();
    let f0 = InitialDatum::new(SpatialProfile::Rough, vel).build(&grid).unwrap();
    let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let traj = solve_trajectory(&f0, &times, KolmogorovParams::new(s).unwrap()).unwrap();
    times.into_iter().zip(traj).collect()
}

#[test]
fn functional_is_nonincreasing_along_solutions() {
    for s in [0.3, 0.7, 1.0] {
        let w = select_constants(s, 1).unwrap();
        let pairs = trajectory(s, VelocityProfile::Hat, 24);
        let rep = decay_audit(&pairs, &w, s).unwrap();
        assert!(rep.monotone() && rep.slopes_bounded(), "s = {s}");
        for (t, f) in &pairs {
            assert!(lower_bound_check(f, *t, &w, s).unwrap());
        }
    }
}

#[test]
fn functional_matches_direct_quadratic_form() {
    // H assembled by hand from the four weighted energies
    let s = 0.6;
    let w = EntropyWeights::new(50.0, 9.0, 2.0, [0.1; 4]).unwrap();
    let (t, f) = trajectory(s, VelocityProfile::Gaussian, 5).swap_remove(3);
    let mass = f.weighted_energy(|_, _| 1.0);
    let gv = f.weighted_energy(|_, e| (1.0 + e[0] * e[0]).powf(s - 1.0) * e[0] * e[0]);
    let gx = f.weighted_energy(|x, _| {
        let x = x[0] as f64;
        (1.0 + x * x).powf(s - 1.0) * x * x
    });
    let cross = f.weighted_energy(|x, e| {
        let x = x[0] as f64;
        ((1.0 + e[0] * e[0]) * (1.0 + x * x)).powf(0.5 * (s - 1.0)) * e[0] * x
    });
    let expect = 50.0 * mass + 9.0 * t * gv + 2.0 * t.powf(1.0 + s) * cross + t.powf(1.0 + 2.0 * s) * gx;
    let got = evaluate(&f, t, &w, s).unwrap();
    assert!((got - expect).abs() <= 1e-12 * expect.abs());
}

#[test]
fn csv_has_fixed_header() {
    let s = 0.5;
    let w = select_constants(s, 1).unwrap();
    let rep = decay_audit(&trajectory(s, VelocityProfile::Gaussian, 4), &w, s).unwrap();
    let csv = rep.to_csv();
    assert!(csv.starts_with("t,H,dH_dt_fd,bound_rhs,monotone_ok\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn constants_for_tiny_orders_overflow_explicitly() {
    assert!(select_constants(0.05, 3).is_ok());
    let err = select_constants(0.01, 1).unwrap_err();
    assert!(err.to_string().contains("not representable"));
}

#[test]
fn audit_rejects_bad_times() {
    let s = 0.5;
    let w = select_constants(s, 1).unwrap();
    let mut pairs = trajectory(s, VelocityProfile::Gaussian, 3);
    pairs.swap(0, 1);
    assert!(decay_audit(&pairs, &w, s).is_err());
}

#[test]
fn uncontrolled_cross_term_is_rejected() {
    let w = EntropyWeights::new(1.0, 1.0, 5.0, [1.0; 4]).unwrap();
    let (t, f) = trajectory(0.5, VelocityProfile::Gaussian, 2).swap_remove(1);
    assert!(lower_bound_check(&f, t, &w, 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn selected_constants_satisfy_every_condition(s in 0.05f64..=1.0, dim in 1usize..=3) {
        let w = select_constants(s, dim).unwrap();
        prop_assert!(w.cross_term_controlled());
        for c in validate_conditions(&w, s, dim) {
            prop_assert!(c.satisfied && c.margin > 0.0, "{} margin {}", c.id, c.margin);
        }
    }

    #[test]
    fn lower_bound_holds_for_admissible_weights(s in 0.1f64..=1.0, t in 0.0f64..=1.0, seed in any::<u64>()) {
        let grid = GridSpec::new(1, 3, 32, 6.0).unwrap();
        let f = random_band_limited(&grid, seed).unwrap();
        let w = select_constants(s, 1).unwrap();
        prop_assert!(lower_bound_check(&f, t, &w, s).unwrap());
    }
}
