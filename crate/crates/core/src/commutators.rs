//! Symbol-level and operator-level checks of the commutator
//! [Λ_v^{s−1}∂_{v_k}, v·∇_x] = Λ_v^{s−1}∂_{x_k} + (1−s)∂_{v_k}Σ_j ∂_{v_j}Λ_v^{s−3}∂_{x_j}
//! and of the vanishing brackets that accompany it.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::numerics::Halton;
use crate::report::{csv_row, fmt_f64};
use crate::spectral::{dot2, sobolev_norm, xi_f64, SpectralField, VelocityTransform};

pub type Vec3 = [f64; 3];

const I: Complex64 = Complex64::new(0.0, 1.0);

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn jb(a: Vec3) -> f64 {
    (1.0 + dot(a, a)).sqrt()
}

/// A phase-space point (v, η, ξ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolPoint {
    pub v: Vec3,
    pub eta: Vec3,
    pub xi: Vec3,
}

/// Symbols of the operators appearing in the commutator identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierSymbol {
    /// ∂_{v_k}: iη_k
    DerivV(usize),
    /// ∂_{x_k}: iξ_k
    DerivX(usize),
    /// v_j∂_{x_j}: iv_jξ_j
    Transport(usize),
    /// Λ_v^α: ⟨η⟩^α
    LambdaV(f64),
    /// Λ_x^α: ⟨ξ⟩^α
    LambdaX(f64),
    /// Λ_v^α∂_{v_k}: ⟨η⟩^α iη_k
    LambdaVDerivV(f64, usize),
    /// Λ_x^α∂_{x_k}: ⟨ξ⟩^α iξ_k
    LambdaXDerivX(f64, usize),
    /// v·∇_x: iv·ξ
    TransportSum,
}

impl MultiplierSymbol {
    pub fn eval(&self, v: Vec3, eta: Vec3, xi: Vec3) -> Complex64 {
        match *self {
            MultiplierSymbol::DerivV(k) => I * eta[k],
            MultiplierSymbol::DerivX(k) => I * xi[k],
            MultiplierSymbol::Transport(j) => I * (v[j] * xi[j]),
            MultiplierSymbol::LambdaV(a) => Complex64::new(jb(eta).powf(a), 0.0),
            MultiplierSymbol::LambdaX(a) => Complex64::new(jb(xi).powf(a), 0.0),
            MultiplierSymbol::LambdaVDerivV(a, k) => I * (jb(eta).powf(a) * eta[k]),
            MultiplierSymbol::LambdaXDerivX(a, k) => I * (jb(xi).powf(a) * xi[k]),
            MultiplierSymbol::TransportSum => I * dot(v, xi),
        }
    }
}

/// Central-difference Poisson bracket {f, g} = ∇_η f·∇_v g − ∇_v f·∇_η g at fixed ξ.
pub fn poisson_bracket_fd<F, G>(f: F, g: G, pt: &SymbolPoint, h: f64) -> Complex64
where
    F: Fn(Vec3, Vec3) -> Complex64,
    G: Fn(Vec3, Vec3) -> Complex64,
{
    let shift = |a: Vec3, l: usize, d: f64| {
        let mut b = a;
        b[l] += d;
        b
    };
    let (v, e) = (pt.v, pt.eta);
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..3 {
        let df_eta = (f(v, shift(e, l, h)) - f(v, shift(e, l, -h))) / (2.0 * h);
        let dg_v = (g(shift(v, l, h), e) - g(shift(v, l, -h), e)) / (2.0 * h);
        let df_v = (f(shift(v, l, h), e) - f(shift(v, l, -h), e)) / (2.0 * h);
        let dg_eta = (g(v, shift(e, l, h)) - g(v, shift(e, l, -h))) / (2.0 * h);
        acc += df_eta * dg_v - df_v * dg_eta;
    }
    acc
}

fn bracket_of(a: MultiplierSymbol, b: MultiplierSymbol, pt: &SymbolPoint, h: f64) -> Complex64 {
    let xi = pt.xi;
    poisson_bracket_fd(|v, e| a.eval(v, e, xi), |v, e| b.eval(v, e, xi), pt, h)
}

/// Σ_j (1/i){⟨η⟩^{s−1}iη_k, iv_jξ_j} by central differences with step h.
pub fn lhs_commutator_symbol(k: usize, pt: &SymbolPoint, s: f64, h: f64) -> Result<Complex64> {
    if !(h > 0.0) {
        return Err(invalid(format!("finite-difference step must be positive, got {h}")));
    }
    if k >= 3 {
        return Err(invalid(format!("axis {k} out of range")));
    }
    let a = MultiplierSymbol::LambdaVDerivV(s - 1.0, k);
    let sum: Complex64 = (0..3).map(|j| bracket_of(a, MultiplierSymbol::Transport(j), pt, h)).sum();
    Ok(sum / I)
}

/// i⟨η⟩^{s−1}ξ_k − i(1−s)η_k⟨η⟩^{s−3}(η·ξ).
pub fn rhs_commutator_symbol(k: usize, pt: &SymbolPoint, s: f64) -> Complex64 {
    let b = jb(pt.eta);
    I * (b.powf(s - 1.0) * pt.xi[k] - (1.0 - s) * pt.eta[k] * b.powf(s - 3.0) * dot(pt.eta, pt.xi))
}

/// iΣ_j ξ_j((s−1)η_jη_k⟨η⟩^{s−3} + ⟨η⟩^{s−1}δ_{kj}), the unsimplified derivative.
pub fn rhs_expanded_form(k: usize, pt: &SymbolPoint, s: f64) -> Complex64 {
    let b = jb(pt.eta);
    let sum: f64 = (0..3)
        .map(|j| {
            let delta = if j == k { 1.0 } else { 0.0 };
            pt.xi[j] * ((s - 1.0) * pt.eta[j] * pt.eta[k] * b.powf(s - 3.0) + b.powf(s - 1.0) * delta)
        })
        .sum();
    I * sum
}

/// Largest |bracket| over the three pairs that must commute:
/// (Λ_v^{s−1}∂_{v_k}, Λ_v^{2s}), (Λ_x^{s−1}∂_{x_k}, Λ_v^{2s}), (Λ_x^{s−1}∂_{x_k}, v·∇_x).
pub fn zero_commutators_check(points: &[SymbolPoint], s: f64, h: f64) -> f64 {
    points
        .par_iter()
        .map(|pt| {
            (0..3)
                .flat_map(|k| {
                    [
                        bracket_of(MultiplierSymbol::LambdaVDerivV(s - 1.0, k), MultiplierSymbol::LambdaV(2.0 * s), pt, h),
                        bracket_of(MultiplierSymbol::LambdaXDerivX(s - 1.0, k), MultiplierSymbol::LambdaV(2.0 * s), pt, h),
                        bracket_of(MultiplierSymbol::LambdaXDerivX(s - 1.0, k), MultiplierSymbol::TransportSum, pt, h),
                    ]
                })
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// Quasi-random points with |v|, |η| ≤ `radius` and integer ξ ∈ {−ξ_max..ξ_max}^dim
/// (unused coordinates zero).
pub fn sample_points(n: usize, dim: usize, radius: f64, xi_max: i64, seed: u64) -> Vec<SymbolPoint> {
    let dim = dim.clamp(1, 3);
    let halton = Halton::new(3 * dim, seed);
    let span = (2 * xi_max + 1) as f64;
    (0..n as u64)
        .map(|i| {
            let u = halton.point(i);
            let mut pt = SymbolPoint {
                v: [0.0; 3],
                eta: [0.0; 3],
                xi: [0.0; 3],
            };
            let scale = radius / (dim as f64).sqrt();
            for a in 0..dim {
                pt.v[a] = scale * (2.0 * u[a] - 1.0);
                pt.eta[a] = scale * (2.0 * u[dim + a] - 1.0);
                pt.xi[a] = ((u[2 * dim + a] * span).floor() as i64 - xi_max) as f64;
            }
            pt
        })
        .collect()
}

/// One row of the symbol comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorRow {
    pub point: SymbolPoint,
    pub k: usize,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_err: f64,
}

/// Compares finite-difference and closed-form symbols on every point and axis.
pub fn commutator_rows(points: &[SymbolPoint], s: f64, h: f64) -> Result<Vec<CommutatorRow>> {
    points
        .par_iter()
        .map(|pt| {
            (0..3)
                .map(|k| {
                    let lhs = lhs_commutator_symbol(k, pt, s, h)?;
                    let rhs = rhs_commutator_symbol(k, pt, s);
                    Ok(CommutatorRow {
                        point: *pt,
                        k,
                        lhs,
                        rhs,
                        abs_err: (lhs - rhs).norm(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

pub fn max_error(rows: &[CommutatorRow]) -> f64 {
    rows.iter().map(|r| r.abs_err).fold(0.0, f64::max)
}

/// Observed order log₂(E(h)/E(h/2)) of the sup error.
pub fn fitted_order(points: &[SymbolPoint], s: f64, h: f64) -> Result<f64> {
    let e1 = max_error(&commutator_rows(points, s, h)?);
    let e2 = max_error(&commutator_rows(points, s, 0.5 * h)?);
    Ok((e1 / e2).log2())
}

pub const CSV_HEADER: &str = "v1,v2,v3,eta1,eta2,eta3,xi1,xi2,xi3,k,lhs_re,lhs_im,rhs_re,rhs_im,abs_err\n";

pub fn rows_to_csv<'a, I: IntoIterator<Item = &'a CommutatorRow>>(rows: I) -> String {
    let mut out = String::from(CSV_HEADER);
    for r in rows {
        let p = &r.point;
        let mut cells: Vec<String> = p.v.iter().chain(&p.eta).chain(&p.xi).map(|&x| fmt_f64(x)).collect();
        cells.push(r.k.to_string());
        cells.extend([r.lhs.re, r.lhs.im, r.rhs.re, r.rhs.im, r.abs_err].map(fmt_f64));
        out.push_str(&csv_row(cells));
    }
    out
}

/// Applies both sides of the commutator identity to a field (v·∇_x realized
/// as multiplication by iv·ξ in velocity space) and returns the relative L² gap.
pub fn operator_spot_check(field: &SpectralField, k: usize, s: f64) -> Result<f64> {
    let grid = *field.grid();
    if k >= grid.d() {
        return Err(invalid(format!("axis {k} out of range for d = {}", grid.d())));
    }
    let vt = VelocityTransform::new(&grid);
    let transport = |f: &SpectralField| -> SpectralField {
        let mut out = f.clone();
        let n = grid.n_eta();
        out.data_mut().par_chunks_mut(n).enumerate().for_each(|(idx, row)| {
            let xi = xi_f64(grid.xi(idx));
            let mut g = vt.inverse(row);
            for (j, z) in g.iter_mut().enumerate() {
                *z *= I * dot2(grid.v(j), xi);
            }
            row.copy_from_slice(&vt.forward(&g));
        });
        out
    };
    let a = |f: &SpectralField| -> SpectralField {
        let mut out = f.clone();
        let n = grid.n_eta();
        out.data_mut().par_chunks_mut(n).for_each(|row| {
            for (j, z) in row.iter_mut().enumerate() {
                let e = grid.eta(j);
                *z *= I * ((1.0 + dot2(e, e)).powf(0.5 * (s - 1.0)) * e[k]);
            }
        });
        out
    };
    let lhs = a(&transport(field)).zip_map(&transport(&a(field)), |x, y| x - y);
    let mut rhs = field.clone();
    let n = grid.n_eta();
    rhs.data_mut().par_chunks_mut(n).enumerate().for_each(|(idx, row)| {
        let xi = xi_f64(grid.xi(idx));
        for (j, z) in row.iter_mut().enumerate() {
            let e = grid.eta(j);
            let b = (1.0 + dot2(e, e)).sqrt();
            let m = I * (b.powf(s - 1.0) * xi[k] - (1.0 - s) * e[k] * b.powf(s - 3.0) * dot2(e, xi));
            *z *= m;
        }
    });
    let diff = lhs.zip_map(&rhs, |x, y| x - y);
    let den = sobolev_norm(&rhs, 0.0, 0.0);
    let num = sobolev_norm(&diff, 0.0, 0.0);
    Ok(if den > 0.0 { num / den } else { num })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        let pt = SymbolPoint {
            v: [1.0, -2.0, 0.5],
            eta: [0.0; 3],
            xi: [2.0, -1.0, 3.0],
        };
        for k in 0..3 {
            let l = lhs_commutator_symbol(k, &pt, 0.4, 1e-4).unwrap();
            assert!((l - I * pt.xi[k]).norm() < 1e-8);
        }
        let pt = SymbolPoint { eta: [3.0, 1.0, -2.0], ..pt };
        for k in 0..3 {
            assert!((rhs_commutator_symbol(k, &pt, 1.0) - I * pt.xi[k]).norm() < 1e-14);
            assert!((lhs_commutator_symbol(k, &pt, 1.0, 1e-4).unwrap() - I * pt.xi[k]).norm() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_step() {
        let pt = SymbolPoint {
            v: [0.0; 3],
            eta: [0.0; 3],
            xi: [0.0; 3],
        };
        assert!(lhs_commutator_symbol(0, &pt, 0.5, 0.0).is_err());
    }
}
