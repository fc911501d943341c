//! Dense 1-D Weyl and Wick quantization on a periodic grid.
//!
//! Grid: v_j = −L + jΔv, Δv = 2L/n; dual lattice η_m = mπ/L, m ∈ [−n/2, n/2).
//! Symbols are sampled on the doubled v-grid (spacing Δv/2), which contains
//! every midpoint (v_j + v_k)/2.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::report::{csv_row, fmt_f64};

/// Half-width of the Gaussian stencil in standard deviations.
const STENCIL_SIGMAS: f64 = 9.0;
/// Smallest half-width accepted for Gaussian smoothing.
pub const MIN_HALF_WIDTH: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1d {
    n: usize,
    l: f64,
}

impl Grid1d {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(invalid(format!("n must be a power of two ≥ 4, got {n}")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(invalid(format!("L must be positive, got {l}")));
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.l
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn deta(&self) -> f64 {
        PI / self.l
    }

    pub fn v(&self, j: usize) -> f64 {
        -self.l + j as f64 * self.dv()
    }

    /// η for centered index m ∈ [0, n) ↦ (m − n/2)π/L.
    pub fn eta(&self, m: usize) -> f64 {
        (m as f64 - (self.n / 2) as f64) * self.deta()
    }

    /// Point i of the doubled grid, i ∈ [0, 2n).
    pub fn v_half(&self, i: usize) -> f64 {
        -self.l + 0.5 * i as f64 * self.dv()
    }
}

pub type Evaluator = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Function(Evaluator),
    Samples(Vec<Complex64>),
}

/// σ(v, η), either as an evaluator or as samples indexed `i·n + m`
/// over doubled-grid point i and η-index m.
#[derive(Clone)]
pub struct SymbolField {
    grid: Grid1d,
    source: Source,
}

impl std::fmt::Debug for SymbolField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.source {
            Source::Function(_) => "function",
            Source::Samples(_) => "samples",
        };
        f.debug_struct("SymbolField").field("grid", &self.grid).field("source", &kind).finish()
    }
}

impl SymbolField {
    pub fn from_fn(grid: Grid1d, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            grid,
            source: Source::Function(Arc::new(f)),
        }
    }

    pub fn from_samples(grid: Grid1d, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != 2 * grid.n * grid.n {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                2 * grid.n * grid.n,
                samples.len()
            )));
        }
        Ok(Self {
            grid,
            source: Source::Samples(samples),
        })
    }

    pub fn grid(&self) -> Grid1d {
        self.grid
    }

    pub fn samples(&self) -> Vec<Complex64> {
        match &self.source {
            Source::Samples(s) => s.clone(),
            Source::Function(f) => {
                let g = self.grid;
                (0..2 * g.n * g.n)
                    .into_par_iter()
                    .map(|idx| Complex64::new(f(g.v_half(idx / g.n), g.eta(idx % g.n)), 0.0))
                    .collect()
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match &self.source {
            Source::Function(f) => {
                let f = Arc::clone(f);
                Self::from_fn(self.grid, move |v, e| c * f(v, e))
            }
            Source::Samples(s) => Self {
                grid: self.grid,
                source: Source::Samples(s.iter().map(|z| z * c).collect()),
            },
        }
    }

    /// Spectral ∂_η along each row; requires the top quarter of the η-spectrum
    /// to be empty.
    pub fn eta_derivative(&self) -> Result<Self> {
        let g = self.grid;
        let n = g.n;
        let mut data = self.samples();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let period = n as f64 * g.deta();
        let scale = 1.0 / n as f64;
        let mut worst = 0.0f64;
        let mut peak = 0.0f64;
        for row in data.chunks_mut(n) {
            fwd.process(row);
            for (b, z) in row.iter_mut().enumerate() {
                let k = if b < n / 2 { b as i64 } else { b as i64 - n as i64 };
                peak = peak.max(z.norm());
                if k.unsigned_abs() as usize >= 3 * n / 8 {
                    worst = worst.max(z.norm());
                }
                let y = 2.0 * PI * k as f64 / period;
                // the Nyquist coefficient has no odd derivative
                *z *= if 2 * k.unsigned_abs() as usize == n {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, y * scale)
                };
            }
            inv.process(row);
        }
        // rows start at η_0 = −nπ/(2L); the shift phase cancels in the derivative
        if worst > 1e-12 * peak.max(f64::MIN_POSITIVE) {
            return Err(invalid(format!(
                "symbol is not band-limited in eta: top-band coefficient {worst:e} vs peak {peak:e}"
            )));
        }
        Self::from_samples(g, data)
    }
}

/// M[j,k] = (1/n)Σ_m e^{i(v_j−v_k)η_m} σ((v_j+v_k)/2, η_m), minimal-image midpoints;
/// at the antipodal offset both midpoints are averaged.
pub fn weyl_matrix(sigma: &SymbolField) -> DMatrix<Complex64> {
    let g = sigma.grid;
    let n = g.n;
    let samples = sigma.samples();
    let inv_n = 1.0 / n as f64;
    let phase: Vec<Complex64> = (0..n)
        .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / n as f64))
        .collect();
    // e^{i(v_j−v_k)η_m} = e^{2πi d (m − n/2)/n}
    let entry = |mid: usize, d: i64| -> Complex64 {
        let row = &samples[mid * n..(mid + 1) * n];
        row.iter()
            .enumerate()
            .map(|(m, &s)| {
                let t = (d * (m as i64 - (n / 2) as i64)).rem_euclid(n as i64) as usize;
                phase[t] * s
            })
            .sum::<Complex64>()
            * inv_n
    };
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            (0..n)
                .map(|k| {
                    let raw = j as i64 - k as i64;
                    let d = (raw + (n / 2) as i64).rem_euclid(n as i64) - (n / 2) as i64;
                    // doubled-grid index of v_k + dΔv/2, wrapped
                    let mid = |dd: i64| (2 * k as i64 + dd).rem_euclid(2 * n as i64) as usize;
                    if d == -((n / 2) as i64) {
                        0.5 * (entry(mid(d), d) + entry(mid(-d), d))
                    } else {
                        entry(mid(d), d)
                    }
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(n, n, |j, k| rows[j][k])
}

fn gaussian_stencil(h: f64) -> Vec<f64> {
    let half = (STENCIL_SIGMAS / h).ceil() as i64;
    (-half..=half)
        .map(|a| {
            let x = a as f64 * h;
            h * (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
        })
        .collect()
}

/// σ ⋆ N with N the unit phase-space Gaussian, by separable trapezoidal
/// convolution; values beyond the grid come from the evaluator.
pub fn gaussian_convolve(sigma: &SymbolField) -> Result<SymbolField> {
    let g = sigma.grid;
    let f = match &sigma.source {
        Source::Function(f) => Arc::clone(f),
        Source::Samples(_) => return Err(invalid("Gaussian smoothing needs a symbol evaluator")),
    };
    let eta_half = 0.5 * g.n as f64 * g.deta();
    if g.l < MIN_HALF_WIDTH || eta_half < MIN_HALF_WIDTH {
        let need_n = (2.0 * MIN_HALF_WIDTH * g.l / PI).ceil().max(4.0) as usize;
        return Err(invalid(format!(
            "grid too small for the Gaussian tail: need L ≥ {MIN_HALF_WIDTH} and n ≥ {}",
            need_n.next_power_of_two()
        )));
    }
    let n = g.n;
    let hv = 0.5 * g.dv();
    let he = g.deta();
    let kv = gaussian_stencil(hv);
    let ke = gaussian_stencil(he);
    let pv = kv.len() / 2;
    let pe = ke.len() / 2;
    let (nv_ext, ne_ext) = (2 * n + 2 * pv, n + 2 * pe);
    let ext: Vec<f64> = (0..nv_ext * ne_ext)
        .into_par_iter()
        .map(|idx| {
            let (i, m) = (idx / ne_ext, idx % ne_ext);
            let v = g.v_half(0) + (i as f64 - pv as f64) * hv;
            let e = g.eta(0) + (m as f64 - pe as f64) * he;
            f(v, e)
        })
        .collect();
    // along η
    let stage: Vec<f64> = (0..nv_ext * n)
        .into_par_iter()
        .map(|idx| {
            let (i, m) = (idx / n, idx % n);
            let row = &ext[i * ne_ext + m..i * ne_ext + m + ke.len()];
            row.iter().zip(ke.iter().rev()).map(|(a, b)| a * b).sum()
        })
        .collect();
    // along v
    let out: Vec<Complex64> = (0..2 * n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, m) = (idx / n, idx % n);
            let acc: f64 = kv.iter().rev().enumerate().map(|(a, w)| w * stage[(i + a) * n + m]).sum();
            Complex64::new(acc, 0.0)
        })
        .collect();
    SymbolField::from_samples(g, out)
}

pub fn wick_matrix(sigma: &SymbolField) -> Result<DMatrix<Complex64>> {
    Ok(weyl_matrix(&gaussian_convolve(sigma)?))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityResult {
    pub min_eig: f64,
    pub norm2: f64,
}

impl PositivityResult {
    pub fn passed(&self, rel_tol: f64) -> bool {
        self.min_eig >= -rel_tol * self.norm2
    }
}

pub fn wick_positivity(sigma: &SymbolField) -> Result<PositivityResult> {
    let m = wick_matrix(sigma)?;
    let ev = hermitian_eigenvalues(&m);
    let norm2 = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(PositivityResult {
        min_eig: ev[0],
        norm2,
    })
}

/// Frobenius relative error between [G, T] and wick(ξ∂_η g), with
/// G = wick(g) and T = diag(i ξ v_j).
pub fn wick_transport_bracket_check(g: &SymbolField, xi: f64) -> Result<f64> {
    let grid = g.grid;
    let smoothed = gaussian_convolve(g)?;
    let gm = weyl_matrix(&smoothed);
    let rhs = weyl_matrix(&smoothed.eta_derivative()?.scaled(xi));
    let n = grid.n;
    let lhs = DMatrix::from_fn(n, n, |j, k| gm[(j, k)] * Complex64::new(0.0, xi * (grid.v(k) - grid.v(j))));
    // both sides vanish for η-independent g; round-off is measured against |ξ|L‖G‖
    let floor = 1e-8 * xi.abs() * grid.l * gm.norm();
    let scale = lhs.norm().max(rhs.norm()).max(floor);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((lhs - rhs).norm() / scale)
}

/// |Σ_k c_k e^{i(a_k v + b_k η)}|² times a v-envelope, with lattice frequencies.
pub fn random_nonnegative_symbol(grid: Grid1d, seed: u64) -> SymbolField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64, f64)> = (0..rng.gen_range(3..=6))
        .map(|_| {
            let a = rng.gen_range(-8i32..=8) as f64 * PI / grid.l / 2.0;
            let b = rng.gen_range(-8i32..=8) as f64 * grid.dv();
            (a, b, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    let width = rng.gen_range(1.0..2.5);
    SymbolField::from_fn(grid, move |v, e| {
        let (mut re, mut im) = (0.0, 0.0);
        for &(a, b, cr, ci) in &terms {
            let (s, c) = (a * v + b * e).sin_cos();
            re += cr * c - ci * s;
            im += cr * s + ci * c;
        }
        (re * re + im * im) * (-0.5 * (v / width).powi(2)).exp()
    })
}

/// v-localized symbol e^{−v²/(2w²)} Σ_k c_k cos(b_k η + φ_k) cos(a_k v).
pub fn random_bracket_symbol(grid: Grid1d, seed: u64) -> SymbolField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.0..2.0),
                rng.gen_range(1i32..=12) as f64 * grid.dv(),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..PI),
            )
        })
        .collect();
    // narrow enough that the smoothed envelope is below 1e-8 at v = ±L for L ≥ 8
    let width = rng.gen_range(0.5..0.8);
    SymbolField::from_fn(grid, move |v, e| {
        let s: f64 = terms.iter().map(|&(a, b, c, ph)| c * (b * e + ph).cos() * (a * v).cos()).sum();
        s * (-0.5 * (v / width).powi(2)).exp()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WickRow {
    pub id: String,
    pub n: usize,
    pub l: f64,
    pub metric: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const WICK_CSV_HEADER: &str = "test_id,n,L,metric,tolerance,pass\n";

pub fn wick_rows_to_csv(rows: &[WickRow]) -> String {
    let mut out = String::from(WICK_CSV_HEADER);
    for r in rows {
        out.push_str(&csv_row(
            [
                r.id.clone(),
                r.n.to_string(),
                fmt_f64(r.l),
                fmt_f64(r.metric),
                fmt_f64(r.tolerance),
                r.pass.to_string(),
            ]
            .into_iter(),
        ));
    }
    out
}
