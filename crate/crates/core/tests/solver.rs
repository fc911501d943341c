use kinreg_core::kolmogorov::*;
use kinreg_core::spectral::*;
use kinreg_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn params(s: f64) -> KolmogorovParams {
    KolmogorovParams::new(s).unwrap()
}

#[test]
fn semigroup_on_wide_box() {
    // a wide box keeps the fractional kernel tail away from the periodic seam
    let grid = GridSpec::new(1, 3, 512, 32.0).unwrap();
    let f0 = random_band_limited(&grid, 11).unwrap();
    for s in [0.3, 0.5, 1.0] {
        let p = params(s);
        let half = evolve_exact(&f0, 0.25, p).unwrap();
        let composed = evolve_exact(&half, 0.25, p).unwrap();
        let direct = evolve_exact(&f0, 0.5, p).unwrap();
        let err = composed.relative_distance(&direct).unwrap();
        assert!(err <= 1e-10, "s = {s}: {err:e}");
    }
}

#[test]
fn zero_mode_is_pure_damping() {
    let grid = GridSpec::new(1, 2, 64, 8.0).unwrap();
    let f0 = random_band_limited(&grid, 3).unwrap();
    let t = 0.8;
    let f = evolve_exact(&f0, t, params(0.6)).unwrap();
    let k0 = grid.xi_index([0, 0]).unwrap();
    for (j, (a, b)) in f.slice(k0).iter().zip(f0.slice(k0)).enumerate() {
        let e = grid.eta(j)[0];
        let expect = b * (-t * (1.0 + e * e).powf(0.6)).exp();
        assert!((a - expect).norm() <= 1e-14 * (1.0 + b.norm()));
    }
}

#[test]
fn oracle_agrees_with_exact_solution() {
    let grid = GridSpec::new(1, 2, 64, 8.0).unwrap();
    let f0 = random_band_limited(&grid, 5).unwrap();
    let p = params(0.5);
    let exact = evolve_exact(&f0, 0.2, p).unwrap();
    let oracle = evolve_oracle(&f0, 0.2, 1e-3, p).unwrap();
    let err = oracle.relative_distance(&exact).unwrap();
    assert!(err < 1e-7, "{err:e}");
}

#[test]
fn unpadded_oracle_sees_the_periodic_wrap() {
    // without enlarging the box the e^{−|v|} kernel tail wraps around
    let grid = GridSpec::new(1, 2, 64, 8.0).unwrap();
    let f0 = random_band_limited(&grid, 5).unwrap();
    let p = params(0.3);
    let exact = evolve_exact(&f0, 0.2, p).unwrap();
    let plain = evolve_oracle_padded(&f0, 0.2, 1e-3, p, 1).unwrap();
    let padded = evolve_oracle(&f0, 0.2, 1e-3, p).unwrap();
    let e_plain = plain.relative_distance(&exact).unwrap();
    let e_padded = padded.relative_distance(&exact).unwrap();
    assert!(e_padded < 0.1 * e_plain, "{e_padded:e} vs {e_plain:e}");
}

#[test]
fn pde_residual_is_second_order_in_the_time_step() {
    let grid = GridSpec::new(1, 2, 256, 24.0).unwrap();
    let f0 = random_band_limited(&grid, 8).unwrap();
    for s in [0.3, 1.0] {
        let p = params(s);
        let t = 0.4;
        let residual = |h: f64| {
            let plus = evolve_exact(&f0, t + h, p).unwrap();
            let minus = evolve_exact(&f0, t - h, p).unwrap();
            let mid = evolve_exact(&f0, t, p).unwrap();
            let fd = plus.zip_map(&minus, |a, b| (a - b) / (2.0 * h));
            fd.relative_distance(&generator(&mid, p)).unwrap()
        };
        let (r1, r2) = (residual(1e-2), residual(5e-3));
        let order = (r1 / r2).log2();
        assert!(r1 < 1e-3 && order > 1.8, "s = {s}: {r1:e} {r2:e} order {order}");
    }
}

#[test]
fn modes_evolve_independently() {
    let grid = GridSpec::new(2, 2, 16, 4.0).unwrap();
    let full = random_band_limited(&grid, 21).unwrap();
    let k = grid.xi_index([1, -1]).unwrap();
    let mut single = SpectralField::zeros(grid);
    single.slice_mut(k).copy_from_slice(full.slice(k));
    let p = params(0.7);
    let a = evolve_exact(&full, 0.3, p).unwrap();
    let b = evolve_exact(&single, 0.3, p).unwrap();
    assert_eq!(a.slice(k), b.slice(k));
    for idx in (0..grid.n_xi()).filter(|&i| i != k) {
        assert!(b.slice(idx).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }
}

#[test]
fn trajectory_validation_and_identity() {
    let grid = GridSpec::new(1, 2, 32, 6.0).unwrap();
    let f0 = random_band_limited(&grid, 2).unwrap();
    let p = params(0.5);
    assert_eq!(solve_trajectory(&f0, &[0.0], p).unwrap()[0], f0);
    assert!(matches!(solve_trajectory(&f0, &[0.5, 0.25], p), Err(Error::InvalidInput(_))));
    let traj = solve_trajectory(&f0, &[0.1, 0.5], p).unwrap();
    assert_eq!(traj[1], evolve_exact(&f0, 0.5, p).unwrap());
}

#[test]
fn aliasing_limit_is_enforced() {
    let grid = GridSpec::new(1, 8, 16, 2.0).unwrap();
    let f0 = SpectralField::zeros(grid);
    let limit = max_shift(&grid) / 8.0;
    assert!(evolve_exact(&f0, 0.99 * limit, params(0.5)).is_ok());
    assert!(evolve_exact(&f0, 1.01 * limit, params(0.5)).is_err());
    assert!(evolve_exact(&f0, -0.1, params(0.5)).is_err());
}

#[test]
fn oracle_rejects_bad_steps() {
    let grid = GridSpec::new(1, 1, 16, 4.0).unwrap();
    let f0 = random_band_limited(&grid, 1).unwrap();
    assert!(evolve_oracle(&f0, 0.1, 0.0, params(0.5)).is_err());
    assert!(evolve_oracle(&f0, 0.1, 0.2, params(0.5)).is_err());
    assert!(evolve_oracle_padded(&f0, 0.1, 0.01, params(0.5), 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn l2_decays_at_least_exponentially(seed in any::<u64>(), s in 0.05f64..=1.0, t in 0.0f64..1.0) {
        let grid = GridSpec::new(1, 3, 64, 8.0).unwrap();
        let f0 = random_band_limited(&grid, seed).unwrap();
        let f = evolve_exact(&f0, t, params(s)).unwrap();
        prop_assert!(l2_decay_holds(&f0, &f, t, 1e-10));
    }

    #[test]
    fn phase_is_monotone_in_time(s in 0.05f64..=1.0, xi in -5.0f64..5.0, eta in -20.0f64..20.0, t in 0.0f64..1.0) {
        let a = damping_phase(t, [xi, 0.0], [eta, 0.0], s).unwrap();
        let b = damping_phase(t + 0.1, [xi, 0.0], [eta, 0.0], s).unwrap();
        // the integrand ⟨η+σξ⟩^{2s} is at least 1
        prop_assert!(b - a >= 0.1 * (1.0 - 1e-12));
    }
}
