//! Reference weights λ_v, λ_x, p, q, ω on R³_v × R³_η × R³_ξ and pointwise
//! checks of the symbol inequalities built on them.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::numerics::Halton;
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

fn scale(a: Vec3, c: f64) -> Vec3 {
    [a[0] * c, a[1] * c, a[2] * c]
}

/// s ∈ (0, 1/2), γ > 0, K ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    s: f64,
    gamma: f64,
    k: f64,
}

impl WeightParams {
    pub fn new(s: f64, gamma: f64, k: f64) -> Result<Self> {
        if !(s > 0.0 && s < 0.5) {
            return Err(invalid(format!("s must lie in (0, 1/2), got {s}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("gamma must be positive, got {gamma}")));
        }
        if !(k >= 1.0 && k.is_finite()) {
            return Err(invalid(format!("K must be at least 1, got {k}")));
        }
        Ok(Self { s, gamma, k })
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(self.s, self.gamma, k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub v: Vec3,
    pub eta: Vec3,
    pub xi: Vec3,
}

impl PhasePoint {
    pub fn new(v: Vec3, eta: Vec3, xi: Vec3) -> Self {
        Self { v, eta, xi }
    }

    /// ⟨v⟩
    pub fn jv(&self) -> f64 {
        (1.0 + dot(self.v, self.v)).sqrt()
    }

    /// λ_v² = ⟨η⟩² + ⟨v∧η⟩² + ⟨v⟩²
    pub fn lambda_v_sq(&self) -> f64 {
        let w = cross(self.v, self.eta);
        3.0 + dot(self.eta, self.eta) + dot(w, w) + dot(self.v, self.v)
    }

    /// λ_x² = ⟨ξ⟩² + ⟨v∧ξ⟩² + ⟨v⟩²
    pub fn lambda_x_sq(&self) -> f64 {
        let w = cross(self.v, self.xi);
        3.0 + dot(self.xi, self.xi) + dot(w, w) + dot(self.v, self.v)
    }

    /// B = η·ξ + (v∧η)·(v∧ξ)
    pub fn coupling(&self) -> f64 {
        dot(self.eta, self.xi) + dot(cross(self.v, self.eta), cross(self.v, self.xi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightValues {
    pub lambda_v: f64,
    pub lambda_x: f64,
    pub p: f64,
    pub q: f64,
    pub omega: f64,
}

/// Closed-form λ_v, λ_x, p, q and ω.
pub fn weight_values(pt: &PhasePoint, wp: &WeightParams) -> WeightValues {
    let (s, g, k) = (wp.s, wp.gamma, wp.k);
    let jv = pt.jv();
    let lv = pt.lambda_v_sq().sqrt();
    let lx = pt.lambda_x_sq().sqrt();
    let vg = jv.powf(g);
    WeightValues {
        lambda_v: lv,
        lambda_x: lx,
        p: vg * lv.powf(2.0 * s) + k * jv.powf(g + 2.0 * s),
        q: vg * lx.powf(2.0 * s) + k * jv.powf(g + 2.0 * s),
        omega: -vg * lx.powf(s - 1.0) * lv.powf(s - 1.0) * pt.coupling(),
    }
}

/// ∇_η(λ_v²) = 2η + 2v∧(η∧v).
pub fn grad_eta_lambda_v_sq(pt: &PhasePoint) -> Vec3 {
    let w = cross(pt.v, cross(pt.eta, pt.v));
    [2.0 * (pt.eta[0] + w[0]), 2.0 * (pt.eta[1] + w[1]), 2.0 * (pt.eta[2] + w[2])]
}

/// ∇_η p = s⟨v⟩^γ λ_v^{2s−2} ∇_η(λ_v²).
pub fn grad_eta_p(pt: &PhasePoint, wp: &WeightParams) -> Vec3 {
    let c = wp.s * pt.jv().powf(wp.gamma) * pt.lambda_v_sq().powf(wp.s - 1.0);
    scale(grad_eta_lambda_v_sq(pt), c)
}

/// Outcome of one scalar inequality lhs ≤ rhs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub id: Inequality,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl Check {
    fn relative(id: Inequality, lhs: f64, rhs: f64, slack: f64) -> Self {
        let tol = slack * lhs.abs().max(rhs.abs());
        Self { id, lhs, rhs, ok: lhs <= rhs + tol }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inequality {
    /// |∇_η p| ≤ 2sK^{−1/2}p
    GradEtaP,
    /// {p, v·ξ} ≤ 2s⟨v⟩^γ λ_x λ_v^{2s−1}
    BracketP,
    /// {ω, v·ξ} ≤ −s⟨v⟩^γ λ_x^{s+1}λ_v^{s−1} + ⟨v⟩^{γ+2s}
    BracketOmega,
    /// ⟨v⟩^{2γ}λ_v^{4s} ≤ p²
    PSquaredLower,
    /// p² ≤ 2(1+K²)⟨v⟩^{2γ}λ_v^{4s}
    PSquaredUpper,
    /// |p − ⟨v⟩^γλ_v^{2s} − K⟨v⟩^{γ+2s}| ≤ 0
    PSplit,
    /// ⟨v⟩^{2γ}λ_v^{2s}λ_x^{2s} ≤ pq
    PqLower,
    /// pq ≤ (1+K)²⟨v⟩^{2γ}λ_v^{2s}λ_x^{2s}
    PqUpper,
    /// |η·ξ + (v∧η)·(v∧ξ)| ≤ λ_xλ_v
    CauchySchwarz,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inequality::GradEtaP => "grad_eta_p",
            Inequality::BracketP => "bracket_p_vxi",
            Inequality::BracketOmega => "bracket_omega_vxi",
            Inequality::PSquaredLower => "p2_lower",
            Inequality::PSquaredUpper => "p2_upper",
            Inequality::PSplit => "p_split",
            Inequality::PqLower => "pq_lower",
            Inequality::PqUpper => "pq_upper",
            Inequality::CauchySchwarz => "cross_cauchy_schwarz",
        })
    }
}

/// |∇_η p| against 2sK^{−1/2}p, slack 1e−12·p.
pub fn grad_eta_p_bound(pt: &PhasePoint, wp: &WeightParams) -> Check {
    let lhs = norm(grad_eta_p(pt, wp));
    let p = weight_values(pt, wp).p;
    let rhs = 2.0 * wp.s / wp.k.sqrt() * p;
    Check {
        id: Inequality::GradEtaP,
        lhs,
        rhs,
        ok: lhs <= rhs + 1e-12 * p,
    }
}

/// {p, v·ξ} = ∇_η p·ξ = 2s⟨v⟩^γ λ_v^{2s−2} B.
pub fn bracket_p_vxi(pt: &PhasePoint, wp: &WeightParams) -> f64 {
    2.0 * wp.s * pt.jv().powf(wp.gamma) * pt.lambda_v_sq().powf(wp.s - 1.0) * pt.coupling()
}

/// {p, v·ξ} against 2s⟨v⟩^γ λ_x λ_v^{2s−1}.
pub fn bracket_p_bound(pt: &PhasePoint, wp: &WeightParams, slack: f64) -> Check {
    let lv = pt.lambda_v_sq().sqrt();
    let lx = pt.lambda_x_sq().sqrt();
    let rhs = 2.0 * wp.s * pt.jv().powf(wp.gamma) * lx * lv.powf(2.0 * wp.s - 1.0);
    Check::relative(Inequality::BracketP, bracket_p_vxi(pt, wp), rhs, slack)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaBracket {
    pub value: f64,
    pub upper_bound: f64,
    pub ok: bool,
}

/// {ω, v·ξ} = ∇_η ω·ξ
///   = −⟨v⟩^γ λ_x^{s−1} λ_v^{s−1}(|ξ|² + |v∧ξ|²) − (s−1)⟨v⟩^γ λ_x^{s−1} λ_v^{s−3} B²,
/// using ∇_η B·ξ = |ξ|² + |v∧ξ|² = λ_x² − ⟨v⟩² − 2.
pub fn bracket_omega_vxi(pt: &PhasePoint, wp: &WeightParams) -> OmegaBracket {
    let (s, g) = (wp.s, wp.gamma);
    let jv = pt.jv();
    let vg = jv.powf(g);
    let lv = pt.lambda_v_sq().sqrt();
    let lx = pt.lambda_x_sq().sqrt();
    let vx = cross(pt.v, pt.xi);
    let b = pt.coupling();
    let grad_b_xi = dot(pt.xi, pt.xi) + dot(vx, vx);
    let value = -vg * lx.powf(s - 1.0) * lv.powf(s - 1.0) * grad_b_xi
        - (s - 1.0) * vg * lx.powf(s - 1.0) * lv.powf(s - 3.0) * b * b;
    let upper_bound = -s * vg * lx.powf(s + 1.0) * lv.powf(s - 1.0) + jv.powf(g + 2.0 * s);
    OmegaBracket {
        value,
        upper_bound,
        ok: value <= upper_bound + 1e-10 * (1.0 + value.abs()),
    }
}

/// Symbol-level sandwiches for p², p and pq.
pub fn symbol_sandwiches(pt: &PhasePoint, wp: &WeightParams, slack: f64) -> Vec<Check> {
    let (s, g, k) = (wp.s, wp.gamma, wp.k);
    let w = weight_values(pt, wp);
    let jv = pt.jv();
    // Independent route for the components: λ² via |v|²|η|² − (v·η)².
    let v2 = dot(pt.v, pt.v);
    let lv2_alt = 3.0 + dot(pt.eta, pt.eta) + v2 + v2 * dot(pt.eta, pt.eta) - dot(pt.v, pt.eta).powi(2);
    let a = jv.powf(g) * lv2_alt.max(0.0).powf(s);
    let b = k * jv.powf(g + 2.0 * s);
    let base_p2 = jv.powf(2.0 * g) * w.lambda_v.powf(4.0 * s);
    let base_pq = jv.powf(2.0 * g) * w.lambda_v.powf(2.0 * s) * w.lambda_x.powf(2.0 * s);
    let split_gap = (w.p - (a + b)).abs();
    vec![
        Check::relative(Inequality::PSquaredLower, base_p2, w.p * w.p, slack),
        Check::relative(Inequality::PSquaredUpper, w.p * w.p, 2.0 * (1.0 + k * k) * base_p2, slack),
        Check {
            id: Inequality::PSplit,
            lhs: split_gap,
            rhs: 0.0,
            ok: split_gap <= 1e-12 * w.p,
        },
        Check::relative(Inequality::PqLower, base_pq, w.p * w.q, slack),
        Check::relative(Inequality::PqUpper, w.p * w.q, (1.0 + k).powi(2) * base_pq, slack),
    ]
}

/// |B| ≤ λ_x λ_v.
pub fn cross_cs_bound(pt: &PhasePoint, slack: f64) -> Check {
    let rhs = (pt.lambda_x_sq() * pt.lambda_v_sq()).sqrt();
    Check::relative(Inequality::CauchySchwarz, pt.coupling().abs(), rhs, slack)
}

/// Every inequality at one point.
pub fn all_checks(pt: &PhasePoint, wp: &WeightParams, slack: f64) -> Vec<Check> {
    let om = bracket_omega_vxi(pt, wp);
    let mut out = vec![
        grad_eta_p_bound(pt, wp),
        bracket_p_bound(pt, wp, slack),
        Check {
            id: Inequality::BracketOmega,
            lhs: om.value,
            rhs: om.upper_bound,
            ok: om.ok,
        },
        cross_cs_bound(pt, slack),
    ];
    out.extend(symbol_sandwiches(pt, wp, slack));
    out
}

fn unit(a: Vec3) -> Vec3 {
    let n = norm(a);
    scale(a, 1.0 / n)
}

/// Low-discrepancy points with |v|, |η|, |ξ| ≤ `radius` (radii ∝ u², denser near 0).
pub fn sample_points(n: usize, radius: f64, seed: u64) -> Vec<PhasePoint> {
    let h = Halton::new(9, seed);
    let vec_from = |u: &[f64]| -> Vec3 {
        let r = radius * u[0] * u[0];
        let z = 2.0 * u[1] - 1.0;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let phi = 2.0 * PI * u[2];
        [r * rho * phi.cos(), r * rho * phi.sin(), r * z]
    };
    (0..n as u64)
        .map(|i| {
            let u = h.point(i);
            PhasePoint::new(vec_from(&u[0..3]), vec_from(&u[3..6]), vec_from(&u[6..9]))
        })
        .collect()
}

/// Degenerate configurations: parallel and orthogonal triples, diagonals,
/// zero and tiny vectors, across magnitudes up to `radius`.
pub fn special_points(radius: f64) -> Vec<PhasePoint> {
    let mags = [0.0, 1e-6, 0.3, 1.0, 7.0, radius];
    let e1 = [1.0, 0.0, 0.0];
    let e2 = [0.0, 1.0, 0.0];
    let e3 = [0.0, 0.0, 1.0];
    let d1 = unit([1.0, 1.0, 1.0]);
    let d2 = unit([1.0, -1.0, 0.0]);
    let d3 = unit([1.0, 1.0, -2.0]);
    let frames: [(Vec3, Vec3, Vec3); 6] = [
        (e1, e1, e1),
        (e1, e2, e3),
        (e1, e2, e2),
        (d1, d2, d3),
        (e1, unit([1.0, 1.0, 0.0]), scale(e2, -1.0)),
        (d1, d1, scale(d1, -1.0)),
    ];
    let mut out = Vec::new();
    for &mv in &mags {
        for &me in &mags {
            for &mx in &mags {
                for (a, b, c) in frames {
                    out.push(PhasePoint::new(scale(a, mv), scale(b, me), scale(c, mx)));
                }
            }
        }
    }
    out
}

/// A failed inequality at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub point: PhasePoint,
    pub k: f64,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub points: usize,
    pub evaluations: usize,
    pub violations: Vec<Violation>,
    /// max_i |∂p/∂η_i| K^{1/2}/p over all samples
    pub fitted_c_p: f64,
    /// same for q (η-independent)
    pub fitted_c_q: f64,
}

impl SuiteReport {
    pub fn passed(&self, s: f64) -> bool {
        self.violations.is_empty() && self.fitted_c_p <= 2.0 * s + 0.01
    }

    pub fn violations_csv(&self) -> String {
        let mut out = String::from("v1,v2,v3,eta1,eta2,eta3,xi1,xi2,xi3,K,inequality,lhs,rhs\n");
        for viol in &self.violations {
            let p = &viol.point;
            let mut cells: Vec<String> = p.v.iter().chain(&p.eta).chain(&p.xi).map(|&x| fmt_f64(x)).collect();
            cells.push(fmt_f64(viol.k));
            cells.push(viol.check.id.to_string());
            cells.push(fmt_f64(viol.check.lhs));
            cells.push(fmt_f64(viol.check.rhs));
            out.push_str(&csv_row(cells));
        }
        out
    }
}

/// Runs every inequality at every point for each K.
pub fn run_suite(points: &[PhasePoint], base: &WeightParams, ks: &[f64], slack: f64) -> Result<SuiteReport> {
    let params: Vec<WeightParams> = ks.iter().map(|&k| base.with_k(k)).collect::<Result<_>>()?;
    let per_point: Vec<(Vec<Violation>, f64)> = points
        .par_iter()
        .map(|pt| {
            let mut viol = Vec::new();
            let mut c_p: f64 = 0.0;
            for wp in &params {
                for check in all_checks(pt, wp, slack) {
                    if !check.ok {
                        viol.push(Violation { point: *pt, k: wp.k, check });
                    }
                }
                let p = weight_values(pt, wp).p;
                let gp = grad_eta_p(pt, wp);
                let worst = gp.iter().map(|x| x.abs()).fold(0.0, f64::max);
                c_p = c_p.max(worst * wp.k.sqrt() / p);
            }
            (viol, c_p)
        })
        .collect();
    let mut violations = Vec::new();
    let mut fitted_c_p: f64 = 0.0;
    for (v, c) in per_point {
        violations.extend(v);
        fitted_c_p = fitted_c_p.max(c);
    }
    Ok(SuiteReport {
        points: points.len(),
        evaluations: points.len() * params.len(),
        violations,
        fitted_c_p,
        fitted_c_q: 0.0,
    })
}
