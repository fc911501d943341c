//! Phase-space grids on T^d × [−L, L)^d, double Fourier transforms,
//! multipliers and Sobolev norms.
//!
//! Conventions: x-samples sit at x_j = 2πj/N with N = 2·n_x_modes + 1 and
//! coefficients c_ξ = N^{-d} Σ f(x_j) e^{−iξ·x_j}. Velocity samples sit at
//! v_j = −L + jΔv and f̂(η_m) = Δv^d Σ g(v_j) e^{−iv_j·η_m} with η_m = mΔη,
//! m ∈ [−n_v/2, n_v/2). Norms use the measure dη/(2π)^d, which makes the
//! (0,0) norm equal the L² norm for dx/(2π)^d ⊗ dv.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::numerics::{bracket_sq, CompensatedSum};

/// Discretization of T^d × R^d and its dual lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    d: usize,
    n_x_modes: usize,
    n_v: usize,
    l_v: f64,
}

impl GridSpec {
    pub fn new(d: usize, n_x_modes: usize, n_v: usize, l_v: f64) -> Result<Self> {
        if !(1..=2).contains(&d) {
            return Err(invalid(format!("dimension must be 1 or 2, got {d}")));
        }
        if n_v < 2 || !n_v.is_power_of_two() {
            return Err(invalid(format!("n_v must be a power of two >= 2, got {n_v}")));
        }
        if !(l_v.is_finite() && l_v > 0.0) {
            return Err(invalid(format!("L_v must be positive and finite, got {l_v}")));
        }
        if n_x_modes > 1 << 16 {
            return Err(invalid("n_x_modes too large"));
        }
        Ok(Self { d, n_x_modes, n_v, l_v })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn n_x_modes(&self) -> usize {
        self.n_x_modes
    }
    pub fn n_v(&self) -> usize {
        self.n_v
    }
    pub fn l_v(&self) -> f64 {
        self.l_v
    }
    pub fn dv(&self) -> f64 {
        2.0 * self.l_v / self.n_v as f64
    }
    pub fn deta(&self) -> f64 {
        PI / self.l_v
    }
    /// Upper end of the η-band, π/Δv.
    pub fn eta_max(&self) -> f64 {
        PI / self.dv()
    }
    /// x-points per axis.
    pub fn n_x_points(&self) -> usize {
        2 * self.n_x_modes + 1
    }
    /// Number of retained ξ modes (= number of x-samples).
    pub fn n_xi(&self) -> usize {
        self.n_x_points().pow(self.d as u32)
    }
    /// Number of η modes (= number of v-samples).
    pub fn n_eta(&self) -> usize {
        self.n_v.pow(self.d as u32)
    }
    pub fn len(&self) -> usize {
        self.n_xi() * self.n_eta()
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Measure weight of one η cell, Δη^d/(2π)^d.
    pub fn eta_cell(&self) -> f64 {
        (self.deta() / (2.0 * PI)).powi(self.d as i32)
    }

    /// ξ vector of a lattice index (unused components are zero).
    pub fn xi(&self, idx: usize) -> [i64; 2] {
        let nx = self.n_x_points();
        let n = self.n_x_modes as i64;
        let mut out = [0; 2];
        let mut rest = idx;
        for a in (0..self.d).rev() {
            out[a] = (rest % nx) as i64 - n;
            rest /= nx;
        }
        out
    }

    /// Lattice index of a ξ vector, if retained.
    pub fn xi_index(&self, xi: [i64; 2]) -> Option<usize> {
        let n = self.n_x_modes as i64;
        let nx = self.n_x_points();
        let mut idx = 0;
        for &k in xi.iter().take(self.d) {
            if k.abs() > n {
                return None;
            }
            idx = idx * nx + (k + n) as usize;
        }
        if self.d == 1 && xi[1] != 0 {
            return None;
        }
        Some(idx)
    }

    /// Integer η indices m (η = mΔη) of a flat η index.
    pub fn eta_m(&self, idx: usize) -> [i64; 2] {
        let half = (self.n_v / 2) as i64;
        let mut out = [0; 2];
        let mut rest = idx;
        for a in (0..self.d).rev() {
            out[a] = (rest % self.n_v) as i64 - half;
            rest /= self.n_v;
        }
        out
    }

    pub fn eta(&self, idx: usize) -> [f64; 2] {
        let m = self.eta_m(idx);
        let h = self.deta();
        [m[0] as f64 * h, m[1] as f64 * h]
    }

    /// Velocity coordinates of a flat v index.
    pub fn v(&self, idx: usize) -> [f64; 2] {
        let mut out = [0.0; 2];
        let mut rest = idx;
        let dv = self.dv();
        for a in (0..self.d).rev() {
            out[a] = -self.l_v + (rest % self.n_v) as f64 * dv;
            rest /= self.n_v;
        }
        out
    }

    /// Spatial coordinates of a flat x index.
    pub fn x(&self, idx: usize) -> [f64; 2] {
        let nx = self.n_x_points();
        let mut out = [0.0; 2];
        let mut rest = idx;
        for a in (0..self.d).rev() {
            out[a] = 2.0 * PI * (rest % nx) as f64 / nx as f64;
            rest /= nx;
        }
        out
    }

    /// Grid with n_v and n_x_modes doubled, L_v kept.
    pub fn refined(&self) -> Self {
        Self {
            n_x_modes: 2 * self.n_x_modes,
            n_v: 2 * self.n_v,
            ..*self
        }
    }
}

#[inline]
pub(crate) fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn xi_f64(xi: [i64; 2]) -> [f64; 2] {
    [xi[0] as f64, xi[1] as f64]
}

/// Apply 1-D FFTs along every listed axis of a row-major tensor.
fn fft_along_axes(buf: &mut [Complex64], shape: &[usize], axes: &[usize], plans: &[Arc<dyn Fft<f64>>]) {
    let mut line = Vec::new();
    for (&axis, plan) in axes.iter().zip(plans) {
        let n = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        line.resize(n, Complex64::new(0.0, 0.0));
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for o in 0..outer {
            for i in 0..stride {
                let base = o * n * stride + i;
                for (k, z) in line.iter_mut().enumerate() {
                    *z = buf[base + k * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (k, z) in line.iter().enumerate() {
                    buf[base + k * stride] = *z;
                }
            }
        }
    }
}

/// Velocity-space transform pair with the continuum normalization.
#[derive(Clone)]
pub struct VelocityTransform {
    d: usize,
    n_v: usize,
    dv: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for VelocityTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VelocityTransform")
            .field("d", &self.d)
            .field("n_v", &self.n_v)
            .finish()
    }
}

impl VelocityTransform {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            d: grid.d,
            n_v: grid.n_v,
            dv: grid.dv(),
            fwd: planner.plan_fft_forward(grid.n_v),
            inv: planner.plan_fft_inverse(grid.n_v),
        }
    }

    fn shape(&self) -> Vec<usize> {
        vec![self.n_v; self.d]
    }

    /// DFT-order position of a centered index, with the (−1)^m phase.
    fn reorder_to_centered(&self, dft: &[Complex64], scale: f64) -> Vec<Complex64> {
        let n = self.n_v;
        let half = n / 2;
        let total = dft.len();
        let mut out = vec![Complex64::new(0.0, 0.0); total];
        for (c_idx, z) in out.iter_mut().enumerate() {
            let mut rest = c_idx;
            let mut d_idx = 0;
            let mut mult = 1;
            let mut parity = 0;
            for _ in 0..self.d {
                let c = rest % n;
                rest /= n;
                let m = c as i64 - half as i64;
                parity += m.rem_euclid(2);
                d_idx += (m.rem_euclid(n as i64) as usize) * mult;
                mult *= n;
            }
            let sign = if parity % 2 == 0 { scale } else { -scale };
            *z = dft[d_idx] * sign;
        }
        out
    }

    fn reorder_to_dft(&self, centered: &[Complex64], scale: f64) -> Vec<Complex64> {
        let n = self.n_v;
        let half = n / 2;
        let mut out = vec![Complex64::new(0.0, 0.0); centered.len()];
        for (c_idx, &z) in centered.iter().enumerate() {
            let mut rest = c_idx;
            let mut d_idx = 0;
            let mut mult = 1;
            let mut parity = 0;
            for _ in 0..self.d {
                let c = rest % n;
                rest /= n;
                let m = c as i64 - half as i64;
                parity += m.rem_euclid(2);
                d_idx += (m.rem_euclid(n as i64) as usize) * mult;
                mult *= n;
            }
            let sign = if parity % 2 == 0 { scale } else { -scale };
            out[d_idx] = z * sign;
        }
        out
    }

    /// v-samples → f̂ on the centered η lattice.
    pub fn forward(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let mut buf = samples.to_vec();
        let axes: Vec<usize> = (0..self.d).collect();
        let plans = vec![self.fwd.clone(); self.d];
        fft_along_axes(&mut buf, &self.shape(), &axes, &plans);
        self.reorder_to_centered(&buf, self.dv.powi(self.d as i32))
    }

    /// f̂ on the centered η lattice → v-samples.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let scale = 1.0 / (self.n_v as f64 * self.dv).powi(self.d as i32);
        let mut buf = self.reorder_to_dft(spectrum, scale);
        let axes: Vec<usize> = (0..self.d).collect();
        let plans = vec![self.inv.clone(); self.d];
        fft_along_axes(&mut buf, &self.shape(), &axes, &plans);
        buf
    }
}

/// f̂(ξ, η) on the truncated lattice; row index ξ, column index η.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_data(grid: GridSpec, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(invalid(format!(
                "data length {} does not match grid size {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, data })
    }

    /// Field with f̂(ξ, η) = `f(ξ, η)`.
    pub fn from_fn<F: Fn([i64; 2], [f64; 2]) -> Complex64>(grid: GridSpec, f: F) -> Self {
        let n_eta = grid.n_eta();
        let data = (0..grid.len())
            .map(|i| f(grid.xi(i / n_eta), grid.eta(i % n_eta)))
            .collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn slice(&self, xi_idx: usize) -> &[Complex64] {
        let n = self.grid.n_eta();
        &self.data[xi_idx * n..(xi_idx + 1) * n]
    }

    pub fn slice_mut(&mut self, xi_idx: usize) -> &mut [Complex64] {
        let n = self.grid.n_eta();
        &mut self.data[xi_idx * n..(xi_idx + 1) * n]
    }

    /// Entrywise multiplication by a real symbol m(ξ, η).
    pub fn map_symbol<F: Fn([i64; 2], [f64; 2]) -> f64 + Sync>(&self, m: F) -> Self {
        let n_eta = self.grid.n_eta();
        let grid = self.grid;
        let mut data = self.data.clone();
        data.par_chunks_mut(n_eta).enumerate().for_each(|(k, row)| {
            let xi = grid.xi(k);
            for (j, z) in row.iter_mut().enumerate() {
                *z *= m(xi, grid.eta(j));
            }
        });
        Self { grid, data }
    }

    /// Weighted sum Σ m(ξ,η)|f̂|² · Δη^d/(2π)^d, slice-wise compensated and
    /// combined in lattice order.
    pub fn weighted_energy<F: Fn([i64; 2], [f64; 2]) -> f64 + Sync>(&self, m: F) -> f64 {
        let n_eta = self.grid.n_eta();
        let grid = self.grid;
        let partial: Vec<f64> = self
            .data
            .par_chunks(n_eta)
            .enumerate()
            .map(|(k, row)| {
                let xi = grid.xi(k);
                row.iter()
                    .enumerate()
                    .map(|(j, z)| m(xi, grid.eta(j)) * z.norm_sqr())
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        partial.into_iter().collect::<CompensatedSum>().value() * grid.eta_cell()
    }

    /// Real part of Σ m(ξ,η) f̂ conj(ĝ) with the norm measure.
    pub fn weighted_inner<F: Fn([i64; 2], [f64; 2]) -> f64 + Sync>(&self, other: &Self, m: F) -> Result<f64> {
        self.check_same_grid(other)?;
        let n_eta = self.grid.n_eta();
        let grid = self.grid;
        let partial: Vec<f64> = self
            .data
            .par_chunks(n_eta)
            .zip(other.data.par_chunks(n_eta))
            .enumerate()
            .map(|(k, (a, b))| {
                let xi = grid.xi(k);
                a.iter()
                    .zip(b)
                    .enumerate()
                    .map(|(j, (x, y))| m(xi, grid.eta(j)) * (x * y.conj()).re)
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect();
        Ok(partial.into_iter().collect::<CompensatedSum>().value() * grid.eta_cell())
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid("fields live on different grids"));
        }
        Ok(())
    }

    /// ‖a − b‖ / ‖b‖ in the (0,0) norm; ‖a − b‖ when b = 0.
    pub fn relative_distance(&self, reference: &Self) -> Result<f64> {
        self.check_same_grid(reference)?;
        let diff = self.zip_map(reference, |a, b| a - b);
        let num = sobolev_norm(&diff, 0.0, 0.0);
        let den = sobolev_norm(reference, 0.0, 0.0);
        Ok(if den > 0.0 { num / den } else { num })
    }

    pub fn zip_map<F: Fn(Complex64, Complex64) -> Complex64>(&self, other: &Self, f: F) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid, data }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// Flat little-endian dump: 32-byte header then (re, im) f64 pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 16 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.grid.d as u32).to_le_bytes());
        out.extend_from_slice(&(self.grid.n_x_modes as u32).to_le_bytes());
        out.extend_from_slice(&(self.grid.n_v as u32).to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        out.extend_from_slice(&self.grid.l_v.to_le_bytes());
        for z in &self.data {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 32 || &bytes[..4] != MAGIC {
            return Err(invalid("missing KREG header"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(invalid(format!("unsupported format version {version}")));
        }
        let l_v = f64::from_le_bytes(bytes[24..32].try_into().expect("8 bytes"));
        let grid = GridSpec::new(u32_at(8) as usize, u32_at(12) as usize, u32_at(16) as usize, l_v)?;
        let body = &bytes[32..];
        if body.len() != 16 * grid.len() {
            return Err(invalid(format!(
                "payload has {} bytes, expected {}",
                body.len(),
                16 * grid.len()
            )));
        }
        let data = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        Ok(Self { grid, data })
    }
}

const MAGIC: &[u8; 4] = b"KREG";
const FORMAT_VERSION: u32 = 1;

/// Physical samples f(x_j, v_k), laid out x-major: index = x_idx·n_eta + v_idx.
pub fn to_spectral(samples: &[Complex64], grid: &GridSpec) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "sample array has {} entries, grid expects {}",
            samples.len(),
            grid.len()
        )));
    }
    let n_eta = grid.n_eta();
    let n_xi = grid.n_xi();
    let nx = grid.n_x_points();
    let mut buf = samples.to_vec();
    // x-transform: treat as tensor [nx; d] × n_eta with x axes leading.
    let mut shape = vec![nx; grid.d];
    shape.push(n_eta);
    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_forward(nx);
    let axes: Vec<usize> = (0..grid.d).collect();
    fft_along_axes(&mut buf, &shape, &axes, &vec![plan; grid.d]);
    let inv_n = 1.0 / n_xi as f64;
    let vt = VelocityTransform::new(grid);
    let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
    data.par_chunks_mut(n_eta).enumerate().for_each(|(k, row)| {
        let src = x_dft_index(grid, grid.xi(k));
        let slice: Vec<Complex64> = buf[src * n_eta..(src + 1) * n_eta].iter().map(|z| z * inv_n).collect();
        row.copy_from_slice(&vt.forward(&slice));
    });
    Ok(SpectralField { grid: *grid, data })
}

/// Inverse of [`to_spectral`].
pub fn from_spectral(field: &SpectralField) -> Vec<Complex64> {
    let grid = field.grid;
    let n_eta = grid.n_eta();
    let nx = grid.n_x_points();
    let vt = VelocityTransform::new(&grid);
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
    let rows: Vec<(usize, Vec<Complex64>)> = (0..grid.n_xi())
        .into_par_iter()
        .map(|k| (x_dft_index(&grid, grid.xi(k)), vt.inverse(field.slice(k))))
        .collect();
    for (dst, row) in rows {
        buf[dst * n_eta..(dst + 1) * n_eta].copy_from_slice(&row);
    }
    let mut shape = vec![nx; grid.d];
    shape.push(n_eta);
    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_inverse(nx);
    let axes: Vec<usize> = (0..grid.d).collect();
    fft_along_axes(&mut buf, &shape, &axes, &vec![plan; grid.d]);
    buf
}

fn x_dft_index(grid: &GridSpec, xi: [i64; 2]) -> usize {
    let nx = grid.n_x_points();
    let mut idx = 0;
    for &k in xi.iter().take(grid.d) {
        idx = idx * nx + k.rem_euclid(nx as i64) as usize;
    }
    idx
}

/// Entrywise multiplication by ⟨ξ⟩^α⟨η⟩^β.
pub fn apply_multiplier(field: &SpectralField, alpha: f64, beta: f64) -> SpectralField {
    field.map_symbol(|xi, eta| {
        let xf = xi_f64(xi);
        let a = if alpha == 0.0 { 1.0 } else { bracket_sq(dot2(xf, xf)).powf(alpha) };
        let b = if beta == 0.0 { 1.0 } else { bracket_sq(dot2(eta, eta)).powf(beta) };
        a * b
    })
}

/// ‖f‖_{α,β}: (Σ_ξ Σ_η ⟨ξ⟩^{2α}⟨η⟩^{2β}|f̂|² Δη^d/(2π)^d)^{1/2}.
pub fn sobolev_norm(field: &SpectralField, alpha: f64, beta: f64) -> f64 {
    field
        .weighted_energy(|xi, eta| {
            let xf = xi_f64(xi);
            (1.0 + dot2(xf, xf)).powf(alpha) * (1.0 + dot2(eta, eta)).powf(beta)
        })
        .sqrt()
}

/// (Σ (1+|ξ|²+|η|²)^r |f̂|² Δη^d/(2π)^d)^{1/2}.
pub fn isotropic_norm(field: &SpectralField, r: f64) -> f64 {
    field
        .weighted_energy(|xi, eta| {
            let xf = xi_f64(xi);
            (1.0 + dot2(xf, xf) + dot2(eta, eta)).powf(r)
        })
        .sqrt()
}

/// L² norm of physical samples for dx/(2π)^d ⊗ dv.
pub fn physical_l2(samples: &[Complex64], grid: &GridSpec) -> f64 {
    let w = grid.dv().powi(grid.d as i32) / grid.n_xi() as f64;
    (samples.iter().map(|z| z.norm_sqr()).collect::<CompensatedSum>().value() * w).sqrt()
}
