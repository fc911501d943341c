//! The principal symbol
//! ã₀(v,η) = ∫dh |h|^{−3−2s} χ_δ(|h|)(1 − cos η·h) ∫_{h^⊥, |α|≥|h|} μ(α+v)|α+h|^{γ+1+2s} dα
//! with the angular kernel set to 1, evaluated by nested Gauss–Legendre
//! quadrature, and an audit of its two-sided comparison with
//! P̃ = ⟨v⟩^γ(1 + |η|² + |v∧η|²)^s.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::numerics::GaussLegendre;
use crate::report::{csv_row, fmt_f64};

pub type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Gaussian tail margin required beyond |v| for the plane truncation.
pub const PLANE_MARGIN: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanParams {
    pub s: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Gauss–Legendre nodes per radial panel.
    pub n_r: usize,
    /// Base colatitude node count (grows with r|η|); azimuth uses 2·n_sphere.
    pub n_sphere: usize,
    /// Plane nodes per radial panel and half the angular count.
    pub n_alpha: usize,
    /// Plane truncation radius; `None` selects |v| + 6.
    pub r_alpha: Option<f64>,
    /// Upper limit on sphere-integrand evaluations per point.
    pub max_evals: u64,
}

impl CarlemanParams {
    pub fn new(s: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = Self {
            s,
            gamma,
            delta,
            n_r: 8,
            n_sphere: 24,
            n_alpha: 12,
            r_alpha: None,
            max_evals: 50_000_000,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 0.5) {
            return Err(invalid(format!("s must lie in (0, 1/2), got {}", self.s)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(invalid(format!("delta must be positive, got {}", self.delta)));
        }
        if self.n_r < 4 || self.n_sphere < 4 || self.n_alpha < 4 {
            return Err(invalid("quadrature counts must be at least 4"));
        }
        Ok(())
    }

    /// Every node count doubled.
    pub fn refined(&self) -> Self {
        Self {
            n_r: 2 * self.n_r,
            n_sphere: 2 * self.n_sphere,
            n_alpha: 2 * self.n_alpha,
            ..*self
        }
    }

    fn coarsened(&self) -> Self {
        Self {
            n_r: (self.n_r / 2).max(4),
            n_sphere: (self.n_sphere / 2).max(4),
            n_alpha: (self.n_alpha / 2).max(4),
            ..*self
        }
    }

    fn plane_radius(&self, vnorm: f64) -> Result<f64> {
        let r = self.r_alpha.unwrap_or(vnorm + PLANE_MARGIN);
        if r < vnorm + PLANE_MARGIN {
            return Err(invalid(format!(
                "R_alpha = {r} is below |v| + {PLANE_MARGIN} = {}",
                vnorm + PLANE_MARGIN
            )));
        }
        if r <= 2.0 * self.delta {
            return Err(invalid(format!("R_alpha = {r} must exceed 2·delta = {}", 2.0 * self.delta)));
        }
        Ok(r)
    }
}

/// Smooth cutoff: 1 on [0, δ], 0 beyond 2δ, C^∞ and nonincreasing in between.
pub fn chi_delta(r: f64, delta: f64) -> f64 {
    let u = r.abs() / delta;
    if u <= 1.0 {
        return 1.0;
    }
    if u >= 2.0 {
        return 0.0;
    }
    let psi = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = psi(2.0 - u);
    a / (a + psi(u - 1.0))
}

/// Chebyshev interpolant on [lo, hi] in one or two variables.
#[derive(Debug, Clone)]
struct Chebyshev2 {
    n: usize,
    r_lo: f64,
    r_hi: f64,
    rho_hi: f64,
    /// coefficients c[k·n + l] of T_k(r̂)T_l(ρ̂)
    coef: Vec<f64>,
}

fn cheb_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| (PI * (j as f64 + 0.5) / n as f64).cos()).collect()
}

fn to_unit(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (2.0 * x - lo - hi) / (hi - lo)
    } else {
        0.0
    }
}

fn cheb_basis(n: usize, x: f64) -> Vec<f64> {
    let mut t = vec![0.0; n];
    t[0] = 1.0;
    if n > 1 {
        t[1] = x;
    }
    for k in 2..n {
        t[k] = 2.0 * x * t[k - 1] - t[k - 2];
    }
    t
}

fn clenshaw(coef: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coef.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + coef[0]
}

/// Plane integral G(r, ρ) = ∫_{|α|≥r} e^{−|α+ρe₁|²/2}(|α|²+r²)^{κ/2} dα
/// by panel Gauss–Legendre in |α| and Gauss–Legendre in the angle.
struct PlaneRule {
    kappa: f64,
    radius: f64,
    radial: GaussLegendre,
    angular: Vec<(f64, f64)>,
}

impl PlaneRule {
    fn new(kappa: f64, radius: f64, n_alpha: usize) -> Self {
        let ang = GaussLegendre::new(2 * n_alpha);
        let angular = ang.mapped(0.0, PI).map(|(th, w)| (th.cos(), 2.0 * w)).collect();
        Self {
            kappa,
            radius,
            radial: GaussLegendre::new(n_alpha),
            angular,
        }
    }

    fn eval(&self, r: f64, rho: f64) -> f64 {
        if r >= self.radius {
            return 0.0;
        }
        let panels = ((self.radius - r) / 2.0).ceil().max(1.0) as usize;
        let h = (self.radius - r) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = r + p as f64 * h;
            for (a, w) in self.radial.mapped(lo, lo + h) {
                let radial = a * (a * a + r * r).powf(0.5 * self.kappa);
                let base = -0.5 * (a - rho) * (a - rho);
                let ang: f64 = if rho == 0.0 {
                    2.0 * PI
                } else {
                    self.angular
                        .iter()
                        .map(|&(c, wt)| wt * (base - a * rho * (1.0 + c)).exp())
                        .sum::<f64>()
                        / base.exp().max(f64::MIN_POSITIVE)
                };
                total += w * radial * ang * base.exp();
            }
        }
        total
    }
}

impl Chebyshev2 {
    fn build(plane: &PlaneRule, n: usize, r_hi: f64, rho_hi: f64) -> Self {
        let x = cheb_nodes(n);
        let r_at = |xi: f64| 0.5 * r_hi * (xi + 1.0);
        let rho_at = |xi: f64| 0.5 * rho_hi * (xi + 1.0);
        let rho_n = if rho_hi > 0.0 { n } else { 1 };
        let vals: Vec<f64> = (0..n * rho_n)
            .into_par_iter()
            .map(|idx| plane.eval(r_at(x[idx / rho_n]), if rho_n == 1 { 0.0 } else { rho_at(x[idx % rho_n]) }))
            .collect();
        // separable discrete cosine transform
        let dct = |m: usize, k: usize, j: usize| -> f64 {
            let f = if k == 0 { 1.0 } else { 2.0 };
            f / m as f64 * (PI * k as f64 * (j as f64 + 0.5) / m as f64).cos()
        };
        let mut tmp = vec![0.0; n * rho_n];
        for i in 0..n {
            for l in 0..rho_n {
                tmp[i * rho_n + l] = (0..rho_n).map(|j| dct(rho_n, l, j) * vals[i * rho_n + j]).sum();
            }
        }
        let mut coef = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..rho_n {
                coef[k * n + l] = (0..n).map(|i| dct(n, k, i) * tmp[i * rho_n + l]).sum();
            }
        }
        Self {
            n,
            r_lo: 0.0,
            r_hi,
            rho_hi,
            coef,
        }
    }

    /// 1-D series in ρ at fixed r.
    fn at_r(&self, r: f64) -> Vec<f64> {
        let t = cheb_basis(self.n, to_unit(r, self.r_lo, self.r_hi));
        (0..self.n)
            .map(|l| (0..self.n).map(|k| self.coef[k * self.n + l] * t[k]).sum())
            .collect()
    }

    fn eval_rho(&self, series: &[f64], rho: f64) -> f64 {
        if self.rho_hi == 0.0 {
            return series[0];
        }
        clenshaw(series, to_unit(rho.min(self.rho_hi), 0.0, self.rho_hi))
    }
}

/// Radial panel breakpoints: geometric from r_min to δ, then [δ, 2δ], each
/// panel capped at one oscillation period 2π/(|η|+1).
fn radial_panels(r_min: f64, delta: f64, eta: f64) -> Vec<(f64, f64)> {
    let mut br = vec![r_min];
    let mut r = r_min;
    while 2.0 * r < delta {
        r *= 2.0;
        br.push(r);
    }
    br.push(delta);
    br.push(2.0 * delta);
    let cap = 2.0 * PI / (eta + 1.0);
    let mut out = Vec::new();
    for w in br.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let pieces = ((b - a) / cap).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        out.extend((0..pieces).map(|i| (a + i as f64 * h, a + (i + 1) as f64 * h)));
    }
    out
}

/// Per-|v| tables shared across evaluations.
pub struct CarlemanEvaluator {
    params: CarlemanParams,
    tables: HashMap<u64, Chebyshev2>,
}

impl CarlemanEvaluator {
    pub fn new(params: CarlemanParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            tables: HashMap::new(),
        })
    }

    pub fn params(&self) -> &CarlemanParams {
        &self.params
    }

    /// Builds the G(r, ρ) table for velocity magnitude `vnorm` if missing.
    pub fn prepare(&mut self, vnorm: f64) -> Result<()> {
        let key = vnorm.to_bits();
        if self.tables.contains_key(&key) {
            return Ok(());
        }
        let p = self.params;
        let radius = p.plane_radius(vnorm)?;
        let plane = PlaneRule::new(p.gamma + 1.0 + 2.0 * p.s, radius, p.n_alpha);
        let table = Chebyshev2::build(&plane, 2 * p.n_alpha + 1, 2.0 * p.delta, vnorm);
        self.tables.insert(key, table);
        Ok(())
    }

    /// ã₀(v, η); the table for |v| must have been prepared.
    pub fn eval(&self, v: Vec3, eta: Vec3) -> Result<f64> {
        let vn = norm(v);
        let table = self
            .tables
            .get(&vn.to_bits())
            .ok_or_else(|| invalid("velocity magnitude not prepared"))?;
        let p = self.params;
        let cost = sphere_cost(&p, v, eta);
        if cost > p.max_evals {
            let mut coarse = p;
            while sphere_cost(&coarse, v, eta) > p.max_evals && coarse.n_r > 4 {
                coarse = coarse.coarsened();
            }
            let estimate = integrate(&coarse, table, v, eta);
            let rougher = integrate(&coarse.coarsened(), table, v, eta);
            return Err(Error::BudgetExceeded {
                estimate,
                error_bound: (estimate - rougher).abs(),
            });
        }
        Ok(integrate(&p, table, v, eta))
    }
}

fn sphere_counts(p: &CarlemanParams, v: Vec3, eta: Vec3) -> (usize, bool) {
    let en = norm(eta);
    let vperp = if en > 0.0 {
        norm(cross(v, eta)) / en
    } else {
        0.0
    };
    let n_phi = 2 * p.n_sphere;
    (n_phi, vperp > 0.0)
}

fn n_u(p: &CarlemanParams, r: f64, en: f64) -> usize {
    p.n_sphere + (0.5 * r * en).ceil() as usize
}

fn sphere_cost(p: &CarlemanParams, v: Vec3, eta: Vec3) -> u64 {
    let en = norm(eta);
    if en == 0.0 {
        return 0;
    }
    let (n_phi, azimuthal) = sphere_counts(p, v, eta);
    let phi_evals = if azimuthal { n_phi / 2 + 1 } else { 1 };
    let r_min = 1e-3 * (1.0f64).min(1.0 / (1.0 + en));
    radial_panels(r_min, p.delta, en)
        .iter()
        .map(|&(_, b)| (p.n_r * n_u(p, b, en) * phi_evals) as u64)
        .sum()
}

fn integrate(p: &CarlemanParams, table: &Chebyshev2, v: Vec3, eta: Vec3) -> f64 {
    let en = norm(eta);
    if en == 0.0 {
        return 0.0;
    }
    let e3 = [eta[0] / en, eta[1] / en, eta[2] / en];
    let v_par = dot(v, e3);
    let v_perp_vec = [v[0] - v_par * e3[0], v[1] - v_par * e3[1], v[2] - v_par * e3[2]];
    let v_perp = norm(v_perp_vec);
    let v2 = dot(v, v);
    let (n_phi, azimuthal) = sphere_counts(p, v, eta);
    // symmetric azimuth samples φ_k = 2πk/N folded onto [0, π]
    let phis: Vec<(f64, f64)> = if azimuthal {
        let h = 2.0 * PI / n_phi as f64;
        (0..=n_phi / 2)
            .map(|k| {
                let w = if k == 0 || k == n_phi / 2 { h } else { 2.0 * h };
                ((k as f64 * h).cos(), w)
            })
            .collect()
    } else {
        vec![(1.0, 2.0 * PI)]
    };
    let mut rules: HashMap<usize, GaussLegendre> = HashMap::new();
    let sphere = |r: f64, weight_u: &dyn Fn(f64) -> f64, series: &[f64], rules: &mut HashMap<usize, GaussLegendre>| {
        let nu = n_u(p, r, en);
        let rule = rules.entry(nu).or_insert_with(|| GaussLegendre::new(nu));
        let mut acc = 0.0;
        for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
            let fu = weight_u(u);
            if fu == 0.0 {
                continue;
            }
            let sin_t = (1.0 - u * u).max(0.0).sqrt();
            let mut inner = 0.0;
            for &(c, wp) in &phis {
                let vw = v_par * u + v_perp * sin_t * c;
                let rho = (v2 - vw * vw).max(0.0).sqrt();
                inner += wp * (-0.5 * vw * vw).exp() * table.eval_rho(series, rho);
            }
            acc += wu * fu * inner;
        }
        acc
    };
    let r_min = 1e-3 * (1.0f64).min(1.0 / (1.0 + en));
    let radial = GaussLegendre::new(p.n_r);
    let mut total = 0.0;
    for (a, b) in radial_panels(r_min, p.delta, en) {
        for (r, wr) in radial.mapped(a, b) {
            let chi = chi_delta(r, p.delta);
            if chi == 0.0 {
                continue;
            }
            let series = table.at_r(r);
            let k = r * en;
            let s_r = sphere(r, &|u: f64| 1.0 - (k * u).cos(), &series, &mut rules);
            total += wr * r.powf(-1.0 - 2.0 * p.s) * chi * s_r;
        }
    }
    // (0, r_min): 1 − cos(rη·ω) ≈ r²(η·ω)²/2 and G(r, ρ) ≈ G(0, ρ)
    let series0 = table.at_r(0.0);
    let s0 = sphere(0.0, &|u: f64| 0.5 * (en * u).powi(2), &series0, &mut rules);
    total += r_min.powf(2.0 - 2.0 * p.s) / (2.0 - 2.0 * p.s) * s0;
    total * (2.0 * PI).powf(-1.5)
}

/// One-shot ã₀(v, η).
pub fn a0_eval(v: Vec3, eta: Vec3, params: &CarlemanParams) -> Result<f64> {
    if norm(eta) == 0.0 {
        params.validate()?;
        return Ok(0.0);
    }
    let mut ev = CarlemanEvaluator::new(*params)?;
    ev.prepare(norm(v))?;
    ev.eval(v, eta)
}

/// P̃(v, η) = ⟨v⟩^γ(1 + |η|² + |v∧η|²)^s.
pub fn p_tilde(v: Vec3, eta: Vec3, s: f64, gamma: f64) -> f64 {
    let w = cross(v, eta);
    (1.0 + dot(v, v)).powf(0.5 * gamma) * (1.0 + dot(eta, eta) + dot(w, w)).powf(s)
}

/// Exponent p from (ã(4k) − ã(2k))/(ã(2k) − ã(k)) = 2^p along η = k·direction;
/// the increments cancel the |η|-independent offset left by the cutoff.
pub fn scaling_exponent(v: Vec3, direction: Vec3, k: f64, params: &CarlemanParams) -> Result<f64> {
    let dn = norm(direction);
    if dn == 0.0 || !(k > 0.0) {
        return Err(invalid("scaling fit needs a nonzero direction and k > 0"));
    }
    let mut ev = CarlemanEvaluator::new(*params)?;
    ev.prepare(norm(v))?;
    let at = |m: f64| ev.eval(v, [direction[0] * m / dn, direction[1] * m / dn, direction[2] * m / dn]);
    let (a1, a2, a4) = (at(k)?, at(2.0 * k)?, at(4.0 * k)?);
    Ok(((a4 - a2) / (a2 - a1)).log2())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRow {
    pub v: Vec3,
    pub eta: Vec3,
    pub a0: f64,
    pub p_tilde: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub c_slack: f64,
    pub c_low: f64,
    pub c_high: f64,
}

impl AuditReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v1,v2,v3,eta1,eta2,eta3,a0,P_tilde,ratio\n");
        for r in &self.rows {
            let cells = r.v.iter().chain(&r.eta).chain([&r.a0, &r.p_tilde, &r.ratio]).map(|&x| fmt_f64(x));
            out.push_str(&csv_row(cells));
        }
        out
    }

    pub fn finite(&self) -> bool {
        self.c_slack.is_finite() && self.c_low.is_finite() && self.c_high.is_finite() && self.c_low > 0.0
    }
}

/// Default audit grid: |v| ∈ {0, 1.5, 3, 4.5, 6} × |η| ∈ {0, 0.5, 2, 5, 10, 20, 30, 40}
/// × five angles between v and η, in a fixed generic frame.
pub fn audit_grid() -> Vec<(Vec3, Vec3)> {
    let vs = [0.0, 1.5, 3.0, 4.5, 6.0];
    let etas = [0.0, 0.5, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0];
    let angles = [0.0, 0.25 * PI, 0.5 * PI, 0.75 * PI, PI];
    // orthonormal frame not aligned with the axes
    let f1 = [2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0];
    let f2 = [-2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0];
    let mut out = Vec::new();
    for &vn in &vs {
        for &en in &etas {
            for &th in &angles {
                let v = [vn * f1[0], vn * f1[1], vn * f1[2]];
                let (c, s) = (th.cos(), th.sin());
                let eta = [
                    en * (c * f1[0] + s * f2[0]),
                    en * (c * f1[1] + s * f2[1]),
                    en * (c * f1[2] + s * f2[2]),
                ];
                out.push((v, eta));
            }
        }
    }
    out
}

/// Empirical constants of c_low·P̃ − c_slack⟨v⟩^{γ+2s} ≤ ã₀ ≤ c_high·P̃:
/// c_low is half the smallest ratio ã₀/P̃ over points with |η| ≥ 1/δ (½ if none),
/// c_slack the least slack making the lower bound hold at every point,
/// c_high the largest ratio.
pub fn ellipticity_audit(points: &[(Vec3, Vec3)], params: &CarlemanParams) -> Result<AuditReport> {
    if points.is_empty() {
        return Err(invalid("audit grid is empty"));
    }
    let mut ev = CarlemanEvaluator::new(*params)?;
    let mut mags: Vec<f64> = points.iter().map(|(v, _)| norm(*v)).collect();
    mags.sort_by(f64::total_cmp);
    mags.dedup();
    for m in mags {
        ev.prepare(m)?;
    }
    let rows: Vec<AuditRow> = points
        .par_iter()
        .map(|&(v, eta)| {
            let a0 = ev.eval(v, eta)?;
            let pt = p_tilde(v, eta, params.s, params.gamma);
            Ok(AuditRow {
                v,
                eta,
                a0,
                p_tilde: pt,
                ratio: a0 / pt,
            })
        })
        .collect::<Result<_>>()?;
    let elliptic: Vec<f64> = rows
        .iter()
        .filter(|r| norm(r.eta) >= 1.0 / params.delta)
        .map(|r| r.ratio)
        .collect();
    let c_low = if elliptic.is_empty() {
        0.5
    } else {
        0.5 * elliptic.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let c_slack = rows
        .iter()
        .map(|r| {
            let jv = (1.0 + dot(r.v, r.v)).powf(0.5 * (params.gamma + 2.0 * params.s));
            (c_low * r.p_tilde - r.a0) / jv
        })
        .fold(0.0, f64::max);
    let c_high = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(AuditReport {
        rows,
        c_slack,
        c_low,
        c_high,
    })
}
