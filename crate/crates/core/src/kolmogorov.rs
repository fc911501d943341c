//! Exact characteristic solver for ∂_t f + v·∇_x f + (1−Δ_v)^s f = 0 and a
//! Runge–Kutta reference integrator.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::numerics::{adaptive_gauss_legendre, GaussLegendre};
use crate::spectral::{dot2, sobolev_norm, to_spectral, xi_f64, GridSpec, SpectralField, VelocityTransform};

/// Fractional order s ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KolmogorovParams {
    s: f64,
}

impl KolmogorovParams {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(invalid(format!("s must lie in (0, 1], got {s}")));
        }
        Ok(Self { s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

fn phase_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(12))
}

/// Φ(t, ξ, η) = ∫₀^t ⟨η + σξ⟩^{2s} dσ.
pub fn damping_phase(t: f64, xi: [f64; 2], eta: [f64; 2], s: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(phase_unchecked(t, xi, eta, s))
}

fn phase_unchecked(t: f64, xi: [f64; 2], eta: [f64; 2], s: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let weight = |e2: f64| (1.0 + e2).powf(s);
    if xi == [0.0, 0.0] {
        return t * weight(dot2(eta, eta));
    }
    let f = |sig: f64| {
        let a = [eta[0] + sig * xi[0], eta[1] + sig * xi[1]];
        weight(dot2(a, a))
    };
    adaptive_gauss_legendre(f, 0.0, t, 1e-12, phase_rule())
}

/// Largest |tξ_i| for which modulation stays within a quarter of the η-band.
pub fn max_shift(grid: &GridSpec) -> f64 {
    0.25 * 2.0 * grid.eta_max()
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// f̂(t, ξ, η) = f̂₀(ξ, η + tξ) e^{−Φ(t, ξ, η)}, with the η-shift done by
/// modulating the v-samples of each ξ-slice by e^{−itξ·v}.
pub fn evolve_exact(field0: &SpectralField, t: f64, params: KolmogorovParams) -> Result<SpectralField> {
    check_time(t)?;
    let grid = *field0.grid();
    let shift = t * grid.n_x_modes() as f64;
    if shift > max_shift(&grid) {
        return Err(invalid(format!(
            "t·max|ξ| = {shift} exceeds the aliasing limit {}",
            max_shift(&grid)
        )));
    }
    let vt = VelocityTransform::new(&grid);
    let n_eta = grid.n_eta();
    let s = params.s();
    let mut out = field0.clone();
    out.data_mut().par_chunks_mut(n_eta).enumerate().for_each(|(k, row)| {
        let xi = xi_f64(grid.xi(k));
        if t > 0.0 && xi != [0.0, 0.0] {
            let mut g = vt.inverse(row);
            for (j, z) in g.iter_mut().enumerate() {
                *z *= Complex64::from_polar(1.0, -t * dot2(xi, grid.v(j)));
            }
            row.copy_from_slice(&vt.forward(&g));
        }
        for (j, z) in row.iter_mut().enumerate() {
            *z *= (-phase_unchecked(t, xi, grid.eta(j), s)).exp();
        }
    });
    Ok(out)
}

/// Right-hand side ξ·∇_η f̂ − ⟨η⟩^{2s} f̂ on one ξ-slice, with ∇_η taken
/// spectrally (multiplication by −iv in velocity space).
pub fn generator_slice(
    row: &[Complex64],
    xi: [f64; 2],
    grid: &GridSpec,
    vt: &VelocityTransform,
    s: f64,
) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = (0..row.len())
        .map(|j| {
            let e = grid.eta(j);
            -row[j] * (1.0 + dot2(e, e)).powf(s)
        })
        .collect();
    if xi != [0.0, 0.0] {
        let mut g = vt.inverse(row);
        for (j, z) in g.iter_mut().enumerate() {
            *z *= Complex64::new(0.0, -dot2(xi, grid.v(j)));
        }
        for (o, z) in out.iter_mut().zip(vt.forward(&g)) {
            *o += z;
        }
    }
    out
}

/// Generator applied to every slice.
pub fn generator(field: &SpectralField, params: KolmogorovParams) -> SpectralField {
    let grid = *field.grid();
    let vt = VelocityTransform::new(&grid);
    let n_eta = grid.n_eta();
    let mut out = field.clone();
    out.data_mut().par_chunks_mut(n_eta).enumerate().for_each(|(k, row)| {
        let r = generator_slice(row, xi_f64(grid.xi(k)), &grid, &vt, params.s());
        row.copy_from_slice(&r);
    });
    out
}

/// Velocity-box enlargement used by [`evolve_oracle`].
pub const ORACLE_PADDING: usize = 2;

/// Classical RK4 for the Fourier-space equation. Reference use only.
///
/// The slice is integrated on a velocity box enlarged `ORACLE_PADDING` times
/// (zero-padded in v, same Δv) and the result is read back on the original η
/// lattice, so the fractional kernel tail does not wrap around the box.
pub fn evolve_oracle(field0: &SpectralField, t: f64, dt: f64, params: KolmogorovParams) -> Result<SpectralField> {
    evolve_oracle_padded(field0, t, dt, params, ORACLE_PADDING)
}

/// [`evolve_oracle`] with an explicit box enlargement factor (1 = none).
pub fn evolve_oracle_padded(
    field0: &SpectralField,
    t: f64,
    dt: f64,
    params: KolmogorovParams,
    padding: usize,
) -> Result<SpectralField> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(field0.clone());
    }
    if !(dt > 0.0 && dt <= t) {
        return Err(invalid(format!("step must satisfy 0 < dt <= t, got dt={dt}, t={t}")));
    }
    if padding == 0 || !padding.is_power_of_two() {
        return Err(invalid(format!("padding must be a power of two, got {padding}")));
    }
    let grid = *field0.grid();
    let ext = GridSpec::new(grid.d(), grid.n_x_modes(), grid.n_v() * padding, grid.l_v() * padding as f64)?;
    let vt = VelocityTransform::new(&grid);
    let vt_ext = VelocityTransform::new(&ext);
    let n_eta = grid.n_eta();
    let steps = (t / dt).ceil() as usize;
    let h = t / steps as f64;
    let s = params.s();
    let embed = Embedding::new(&grid, padding);
    let mut out = field0.clone();
    let failures: Vec<(usize, f64)> = out
        .data_mut()
        .par_chunks_mut(n_eta)
        .enumerate()
        .filter_map(|(k, row)| {
            let xi = xi_f64(grid.xi(k));
            let rhs = |y: &[Complex64]| generator_slice(y, xi, &ext, &vt_ext, s);
            let mut y = vt_ext.forward(&embed.pad(&vt.inverse(row)));
            let mut prev = norm_sq(&y);
            for n in 0..steps {
                let k1 = rhs(&y);
                let k2 = rhs(&axpy(&y, &k1, 0.5 * h));
                let k3 = rhs(&axpy(&y, &k2, 0.5 * h));
                let k4 = rhs(&axpy(&y, &k3, h));
                for i in 0..y.len() {
                    y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
                }
                let now = norm_sq(&y);
                if !now.is_finite() || now > prev * (1.0 + 1e-9) + 1e-300 {
                    return Some((n, if prev > 0.0 { (now / prev).sqrt() } else { f64::INFINITY }));
                }
                prev = now;
            }
            row.copy_from_slice(&embed.subsample(&y));
            None
        })
        .collect();
    if let Some(&(n, growth)) = failures.first() {
        return Err(Error::Diverged { t: (n + 1) as f64 * h, growth });
    }
    Ok(out)
}

/// Index maps between a velocity grid and its `padding`-times larger box.
struct Embedding {
    d: usize,
    n: usize,
    padding: usize,
}

impl Embedding {
    fn new(grid: &GridSpec, padding: usize) -> Self {
        Self { d: grid.d(), n: grid.n_v(), padding }
    }

    fn ext_n(&self) -> usize {
        self.n * self.padding
    }

    /// Flat index in the large box of base multi-index `idx` shifted by `offset`
    /// and scaled by `stride` per axis.
    fn map(&self, idx: usize, offset: usize, stride: usize) -> usize {
        let mut rest = idx;
        let mut out = 0;
        let mut mult = 1;
        for _ in 0..self.d {
            let c = rest % self.n;
            rest /= self.n;
            out += (c * stride + offset) * mult;
            mult *= self.ext_n();
        }
        out
    }

    fn pad(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.ext_n().pow(self.d as u32)];
        let offset = (self.padding - 1) * self.n / 2;
        for (i, z) in samples.iter().enumerate() {
            out[self.map(i, offset, 1)] = *z;
        }
        out
    }

    /// Large-box spectrum at η = mΔη of the base lattice.
    fn subsample(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        // centered index c ↦ m = c − n/2 ↦ padded centered index p·m + p·n/2
        (0..self.n.pow(self.d as u32))
            .map(|i| spectrum[self.map(i, 0, self.padding)])
            .collect()
    }
}

fn axpy(y: &[Complex64], k: &[Complex64], a: f64) -> Vec<Complex64> {
    y.iter().zip(k).map(|(y, k)| y + k * a).collect()
}

fn norm_sq(y: &[Complex64]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum()
}

/// Fields at ascending times, each evaluated directly from `field0`.
pub fn solve_trajectory(field0: &SpectralField, times: &[f64], params: KolmogorovParams) -> Result<Vec<SpectralField>> {
    if let Some(&t0) = times.first() {
        check_time(t0)?;
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(invalid("times must be ascending"));
    }
    times.iter().map(|&t| evolve_exact(field0, t, params)).collect()
}

/// Velocity profile of an initial datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityProfile {
    /// e^{−|v|²/2}
    Gaussian,
    /// Π max(0, 1 − |v_i|)
    Hat,
    /// Π ½(1 + tanh((1 − |v_i|)/w))
    SmoothedIndicator { width: f64 },
}

impl VelocityProfile {
    pub fn eval(&self, v: [f64; 2], d: usize) -> f64 {
        match *self {
            VelocityProfile::Gaussian => (-0.5 * dot2(v, v)).exp(),
            VelocityProfile::Hat => v.iter().take(d).map(|x| (1.0 - x.abs()).max(0.0)).product(),
            VelocityProfile::SmoothedIndicator { width } => v
                .iter()
                .take(d)
                .map(|x| 0.5 * (1.0 + ((1.0 - x.abs()) / width).tanh()))
                .product(),
        }
    }
}

/// Spatial profile of an initial datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialProfile {
    /// 1 + cos(k·x)
    PlaneWave { k: [i64; 2] },
    /// Σ_ξ ⟨ξ⟩^{−1} e^{iξ·x} over all retained modes (real, rough).
    Rough,
}

/// Product initial datum f₀(x, v) = X(x)·V(v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDatum {
    pub spatial: SpatialProfile,
    pub velocity: VelocityProfile,
}

impl InitialDatum {
    pub fn new(spatial: SpatialProfile, velocity: VelocityProfile) -> Self {
        Self { spatial, velocity }
    }

    pub fn build(&self, grid: &GridSpec) -> Result<SpectralField> {
        let d = grid.d();
        let vel: Vec<f64> = (0..grid.n_eta()).map(|j| self.velocity.eval(grid.v(j), d)).collect();
        let field = match self.spatial {
            SpatialProfile::PlaneWave { k } => {
                let n_eta = grid.n_eta();
                let samples: Vec<Complex64> = (0..grid.len())
                    .map(|i| {
                        let x = grid.x(i / n_eta);
                        let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1];
                        Complex64::new((1.0 + phase.cos()) * vel[i % n_eta], 0.0)
                    })
                    .collect();
                to_spectral(&samples, grid)?
            }
            SpatialProfile::Rough => {
                let vt = VelocityTransform::new(grid);
                let ghat = vt.forward(&vel.iter().map(|&g| Complex64::new(g, 0.0)).collect::<Vec<_>>());
                let mut f = SpectralField::zeros(*grid);
                for k in 0..grid.n_xi() {
                    let xi = xi_f64(grid.xi(k));
                    let a = 1.0 / (1.0 + dot2(xi, xi)).sqrt();
                    for (z, g) in f.slice_mut(k).iter_mut().zip(&ghat) {
                        *z = g * a;
                    }
                }
                f
            }
        };
        Ok(field)
    }
}

/// Smooth, velocity-localized random datum with |ξ| ≤ 2 content.
pub fn random_band_limited(grid: &GridSpec, seed: u64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_eta = grid.n_eta();
    let kmax = grid.n_x_modes().min(2) as i64;
    let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut modes = Vec::new();
    for k0 in -kmax..=kmax {
        for k1 in if grid.d() == 2 { -kmax..=kmax } else { 0..=0 } {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let center = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let width = rng.gen_range(0.7..1.2);
            let tilt = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            modes.push(([k0 as f64, k1 as f64], c, center, width, tilt));
        }
    }
    for (i, z) in samples.iter_mut().enumerate() {
        let x = grid.x(i / n_eta);
        let mut v = grid.v(i % n_eta);
        if grid.d() == 1 {
            v[1] = 0.0;
        }
        for (k, c, center, width, tilt) in &modes {
            let dvec = [v[0] - center[0], if grid.d() == 2 { v[1] - center[1] } else { 0.0 }];
            let env = (-0.5 * dot2(dvec, dvec) / (width * width)).exp() * (1.0 + dot2(*tilt, dvec));
            *z += c * Complex64::from_polar(env, dot2(*k, x));
        }
    }
    to_spectral(&samples, grid)
}

/// L² decay bound ‖f(t)‖ ≤ e^{−t}‖f₀‖ with relative slack.
pub fn l2_decay_holds(field0: &SpectralField, field_t: &SpectralField, t: f64, slack: f64) -> bool {
    let n0 = sobolev_norm(field0, 0.0, 0.0);
    sobolev_norm(field_t, 0.0, 0.0) <= (-t).exp() * n0 * (1.0 + slack) + slack * n0
}

/// The η-band width 2π/Δv, for documentation of aliasing limits.
pub fn eta_band(grid: &GridSpec) -> f64 {
    2.0 * PI / grid.dv()
}
