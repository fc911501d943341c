use std::f64::consts::PI;

use kinreg_core::spectral::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_samples(grid: &GridSpec, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

#[test]
fn gaussian_norm_is_quarter_power_of_pi() {
    let grid = GridSpec::new(1, 2, 128, 10.0).unwrap();
    let samples: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let v = grid.v(i % grid.n_eta())[0];
            Complex64::new((-0.5 * v * v).exp(), 0.0)
        })
        .collect();
    let f = to_spectral(&samples, &grid).unwrap();
    // only ξ = 0 is populated and ∫e^{−v²}dv = √π
    assert!((sobolev_norm(&f, 0.0, 0.0) - PI.powf(0.25)).abs() < 1e-12);
    assert!((sobolev_norm(&f, 3.0, 0.0) - PI.powf(0.25)).abs() < 1e-12);
}

#[test]
fn gaussian_transform_matches_closed_form() {
    let grid = GridSpec::new(1, 0, 128, 10.0).unwrap();
    let samples: Vec<Complex64> = (0..grid.n_eta())
        .map(|j| Complex64::new((-0.5 * grid.v(j)[0].powi(2)).exp(), 0.0))
        .collect();
    let f = to_spectral(&samples, &grid).unwrap();
    for j in 0..grid.n_eta() {
        let e = grid.eta(j)[0];
        let exact = (2.0 * PI).sqrt() * (-0.5 * e * e).exp();
        assert!((f.data()[j] - Complex64::new(exact, 0.0)).norm() < 1e-12, "η = {e}");
    }
}

#[test]
fn plane_wave_lands_on_its_mode() {
    let grid = GridSpec::new(2, 3, 16, 4.0).unwrap();
    let n_eta = grid.n_eta();
    let samples: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let x = grid.x(i / n_eta);
            Complex64::from_polar(1.0, 2.0 * x[0] - x[1])
        })
        .collect();
    let f = to_spectral(&samples, &grid).unwrap();
    let k = grid.xi_index([2, -1]).unwrap();
    for idx in 0..grid.n_xi() {
        let energy: f64 = f.slice(idx).iter().map(|z| z.norm_sqr()).sum();
        if idx == k {
            assert!(energy > 1.0);
        } else {
            assert!(energy < 1e-20);
        }
    }
}

#[test]
fn serialization_roundtrip_and_header() {
    let grid = GridSpec::new(2, 2, 8, 3.5).unwrap();
    let f = to_spectral(&random_samples(&grid, 4), &grid).unwrap();
    let bytes = f.to_bytes();
    assert_eq!(&bytes[0..4], b"KREG");
    assert_eq!(bytes.len(), 32 + 16 * grid.len());
    let back = SpectralField::from_bytes(&bytes).unwrap();
    assert_eq!(back, f);
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(SpectralField::from_bytes(&bad).is_err());
    assert!(SpectralField::from_bytes(&bytes[..40]).is_err());
}

#[test]
fn mismatched_sizes_rejected() {
    let grid = GridSpec::new(1, 2, 16, 4.0).unwrap();
    assert!(to_spectral(&[Complex64::new(0.0, 0.0); 3], &grid).is_err());
    assert!(SpectralField::from_data(grid, vec![]).is_err());
}

#[test]
fn isotropic_and_anisotropic_norms_compare() {
    let grid = GridSpec::new(1, 3, 32, 4.0).unwrap();
    let f = to_spectral(&random_samples(&grid, 9), &grid).unwrap();
    // (1+|ξ|²+|η|²) ≤ ⟨ξ⟩²⟨η⟩² ≤ (1+|ξ|²+|η|²)²
    let r = 0.7;
    let iso = isotropic_norm(&f, r);
    assert!(iso <= sobolev_norm(&f, r, r) * (1.0 + 1e-12));
    assert!(sobolev_norm(&f, r, r) <= isotropic_norm(&f, 2.0 * r) * (1.0 + 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_roundtrip(seed in any::<u64>(), d in 1usize..=2, modes in 0usize..4, log_nv in 1u32..5) {
        let grid = GridSpec::new(d, modes, 1 << log_nv, 3.0).unwrap();
        let samples = random_samples(&grid, seed);
        let back = from_spectral(&to_spectral(&samples, &grid).unwrap());
        let err = samples.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn parseval(seed in any::<u64>(), d in 1usize..=2) {
        let grid = GridSpec::new(d, 2, 16, 2.5).unwrap();
        let samples = random_samples(&grid, seed);
        let f = to_spectral(&samples, &grid).unwrap();
        let a = physical_l2(&samples, &grid);
        let b = sobolev_norm(&f, 0.0, 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn multipliers_compose(seed in any::<u64>(), a1 in -1.0f64..1.0, a2 in -1.0f64..1.0, b1 in -1.0f64..1.0, b2 in -1.0f64..1.0) {
        let grid = GridSpec::new(1, 3, 16, 3.0).unwrap();
        let f = to_spectral(&random_samples(&grid, seed), &grid).unwrap();
        let two = apply_multiplier(&apply_multiplier(&f, a1, b1), a2, b2);
        let one = apply_multiplier(&f, a1 + a2, b1 + b2);
        prop_assert!(two.relative_distance(&one).unwrap() < 1e-13);
        // ‖f‖_{α,β} = ‖⟨ξ⟩^α⟨η⟩^β f‖_{0,0}
        let n1 = sobolev_norm(&f, a1, b1);
        let n2 = sobolev_norm(&apply_multiplier(&f, a1, b1), 0.0, 0.0);
        prop_assert!((n1 - n2).abs() <= 1e-13 * n1);
    }
}
