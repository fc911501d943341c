use kinreg_core::quantization::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rustfft::FftPlanner;

fn grid() -> Grid1d {
    Grid1d::new(128, 8.0).unwrap()
}

/// Fourier multiplier η applied column by column through the FFT.
fn derivative_matrix(g: Grid1d) -> DMatrix<Complex64> {
    let n = g.n();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        col[k] = Complex64::new(1.0, 0.0);
        fwd.process(&mut col);
        for (b, z) in col.iter_mut().enumerate() {
            let freq = if b < n / 2 { b as f64 } else { b as f64 - n as f64 };
            *z *= freq * g.deta() / n as f64;
        }
        inv.process(&mut col);
        for j in 0..n {
            m[(j, k)] = col[j];
        }
    }
    m
}

#[test]
fn frequency_symbol_is_spectral_derivative() {
    let g = grid();
    let m = weyl_matrix(&SymbolField::from_fn(g, |_, e| e));
    let oracle = derivative_matrix(g);
    let err = (m - oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(err <= 1e-10, "{err:e}");
}

#[test]
fn weyl_is_hermitian_and_linear() {
    let g = Grid1d::new(64, 8.0).unwrap();
    let a = SymbolField::from_fn(g, |v, e| (v * e).cos() + v * v);
    let b = SymbolField::from_fn(g, |v, e| (-(v * v) - 0.1 * e * e).exp());
    let ma = weyl_matrix(&a);
    let mb = weyl_matrix(&b);
    assert!(hermiticity_defect(&ma) <= 1e-12);
    let combo = SymbolField::from_fn(g, |v, e| 2.0 * ((v * e).cos() + v * v) - 3.0 * (-(v * v) - 0.1 * e * e).exp());
    let lin = ma * Complex64::new(2.0, 0.0) - mb * Complex64::new(3.0, 0.0);
    let err = (weyl_matrix(&combo) - lin).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(err <= 1e-12);
}

#[test]
fn smoothing_reproduces_gaussian_moments() {
    let g = grid();
    let one = gaussian_convolve(&SymbolField::from_fn(g, |_, _| 1.0)).unwrap().samples();
    assert!(one.iter().all(|z| (z.re - 1.0).abs() <= 1e-10 && z.im == 0.0));
    let cosv = gaussian_convolve(&SymbolField::from_fn(g, |v, _| v.cos())).unwrap().samples();
    let quad = gaussian_convolve(&SymbolField::from_fn(g, |v, e| v * v + e * e)).unwrap().samples();
    let n = g.n();
    for i in 0..2 * n {
        for m in 0..n {
            let (v, e) = (g.v_half(i), g.eta(m));
            assert!((cosv[i * n + m].re - (-0.5f64).exp() * v.cos()).abs() <= 1e-8);
            let want = v * v + e * e + 2.0;
            assert!((quad[i * n + m].re - want).abs() <= 1e-10 * want);
        }
    }
}

#[test]
fn smoothing_preserves_the_mean() {
    let g = grid();
    let sym = SymbolField::from_fn(g, |v, e| (-2.0 * v * v).exp() * (2.0 + (2.0 * e).cos()));
    let before: f64 = sym.samples().iter().map(|z| z.re).sum();
    let after: f64 = gaussian_convolve(&sym).unwrap().samples().iter().map(|z| z.re).sum();
    // localized in v and periodic in η, so no mass crosses the box edges
    assert!((before - after).abs() <= 1e-10 * before.abs(), "{before} {after}");
}

#[test]
fn small_grids_are_rejected_with_hint() {
    let g = Grid1d::new(16, 8.0).unwrap();
    let err = gaussian_convolve(&SymbolField::from_fn(g, |_, _| 1.0)).unwrap_err();
    assert!(err.to_string().contains("n ≥"));
    assert!(Grid1d::new(100, 8.0).is_err());
}

#[test]
fn wick_identity_and_oscillator() {
    let g = grid();
    let id = wick_matrix(&SymbolField::from_fn(g, |_, _| 1.0)).unwrap();
    let err = (id - DMatrix::<Complex64>::identity(128, 128)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(err <= 1e-10);
    let ho = wick_matrix(&SymbolField::from_fn(g, |v, e| v * v + e * e)).unwrap();
    assert!(hermiticity_defect(&ho) <= 1e-10);
    assert!(hermitian_eigenvalues(&ho)[0] >= 2.0 - 1e-8);
}

#[test]
fn nonnegative_symbols_give_nonnegative_operators() {
    let g = grid();
    for seed in 0..5 {
        let r = wick_positivity(&random_nonnegative_symbol(g, seed)).unwrap();
        assert!(r.passed(1e-8), "seed {seed}: {r:?}");
    }
}

#[test]
fn transport_bracket_identity() {
    let g = grid();
    for seed in 0..3 {
        let e = wick_transport_bracket_check(&random_bracket_symbol(g, seed), 2.0).unwrap();
        assert!(e <= 1e-6, "seed {seed}: {e:e}");
    }
    // η-independent symbol: both sides vanish
    let flat = SymbolField::from_fn(g, |v, _| (-v * v).exp());
    assert!(wick_transport_bracket_check(&flat, 2.0).unwrap() <= 1e-6);
    // v-independent symbol at ξ = 0
    let vfree = SymbolField::from_fn(g, |_, e| e.cos());
    assert_eq!(wick_transport_bracket_check(&vfree, 0.0).unwrap(), 0.0);
}

#[test]
fn bracket_rejects_unresolved_symbols() {
    let g = grid();
    // frequency 7 in η sits in the top quarter of the resolvable band
    let rough = SymbolField::from_fn(g, |v, e| (-v * v).exp() * (7.0 * e).cos());
    assert!(rough.eta_derivative().is_err());
    assert!(wick_transport_bracket_check(&rough, 1.0).is_err());
}

#[test]
fn csv_rows() {
    let rows = vec![WickRow {
        id: "x".into(),
        n: 8,
        l: 8.0,
        metric: 0.5,
        tolerance: 1.0,
        pass: true,
    }];
    let csv = wick_rows_to_csv(&rows);
    assert!(csv.starts_with(WICK_CSV_HEADER));
    assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn position_only_symbols_are_diagonal(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = Grid1d::new(32, 8.0).unwrap();
        let m = weyl_matrix(&SymbolField::from_fn(g, move |v, _| a * v + b * (v * 0.3).sin()));
        for j in 0..32 {
            for k in 0..32 {
                let v = g.v(j);
                let want = if j == k { a * v + b * (v * 0.3).sin() } else { 0.0 };
                prop_assert!((m[(j, k)] - Complex64::new(want, 0.0)).norm() <= 1e-12);
            }
        }
    }
}

#[test]
fn bracket_check_fails_for_symbols_touching_the_box_edge() {
    // periodic position commutator is a sawtooth at wrapped corners
    let g = Grid1d::new(128, 8.0).unwrap();
    let sym = SymbolField::from_fn(g, |v, e| v.sin() * e.cos());
    let err = wick_transport_bracket_check(&sym, 2.0).unwrap();
    assert!(err > 0.1, "{err}");
    let local = SymbolField::from_fn(g, |v, e| v.sin() * e.cos() * (-v * v / 0.5).exp());
    assert!(wick_transport_bracket_check(&local, 2.0).unwrap() <= 1e-6);
}
