//! Time-weighted entropy functional
//! H(t) = C‖f‖² + Dt‖Λ_v^{s−1}∇_v f‖² + E t^{1+s}⟨Λ_v^{s−1}∇_v f, Λ_x^{s−1}∇_x f⟩ + t^{1+2s}‖Λ_x^{s−1}∇_x f‖²,
//! admissible constants and audits along solver trajectories.

use std::fmt;

use crate::error::{invalid, Result};
use crate::report::{csv_row, fmt_f64};
use crate::spectral::{dot2, xi_f64, SpectralField};

/// Constants of the functional plus the auxiliary Young-splitting parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyWeights {
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub eps_iii: f64,
    pub eps_iv: f64,
    pub eps_v: f64,
    pub eps_vii: f64,
}

impl EntropyWeights {
    pub fn new(c: f64, d: f64, e: f64, eps: [f64; 4]) -> Result<Self> {
        let all = [c, d, e, eps[0], eps[1], eps[2], eps[3]];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(invalid("entropy weights must be positive and finite"));
        }
        Ok(Self {
            c,
            d,
            e,
            eps_iii: eps[0],
            eps_iv: eps[1],
            eps_v: eps[2],
            eps_vii: eps[3],
        })
    }

    /// E ≤ √D, needed for the coercive lower bound.
    pub fn cross_term_controlled(&self) -> bool {
        self.e <= self.d.sqrt()
    }
}

fn check_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(invalid(format!("s must lie in (0, 1], got {s}")));
    }
    Ok(())
}

/// The four quadratic quantities entering H, time weights not applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyTerms {
    /// ‖f‖²
    pub mass: f64,
    /// ‖Λ_v^{s−1}∇_v f‖²
    pub grad_v: f64,
    /// ⟨Λ_v^{s−1}∇_v f, Λ_x^{s−1}∇_x f⟩ (real part)
    pub cross: f64,
    /// ‖Λ_x^{s−1}∇_x f‖²
    pub grad_x: f64,
}

impl EntropyTerms {
    pub fn compute(field: &SpectralField, s: f64) -> Self {
        let gv = |eta: [f64; 2]| {
            let e2 = dot2(eta, eta);
            (1.0 + e2).powf(s - 1.0) * e2
        };
        let gx = |xi: [f64; 2]| {
            let x2 = dot2(xi, xi);
            (1.0 + x2).powf(s - 1.0) * x2
        };
        Self {
            mass: field.weighted_energy(|_, _| 1.0),
            grad_v: field.weighted_energy(|_, eta| gv(eta)),
            cross: field.weighted_energy(|xi, eta| {
                let xf = xi_f64(xi);
                (1.0 + dot2(eta, eta)).powf(0.5 * (s - 1.0))
                    * (1.0 + dot2(xf, xf)).powf(0.5 * (s - 1.0))
                    * dot2(eta, xf)
            }),
            grad_x: field.weighted_energy(|xi, _| gx(xi_f64(xi))),
        }
    }

    pub fn functional(&self, t: f64, w: &EntropyWeights, s: f64) -> f64 {
        w.c * self.mass
            + w.d * t * self.grad_v
            + w.e * t.powf(1.0 + s) * self.cross
            + t.powf(1.0 + 2.0 * s) * self.grad_x
    }

    /// C‖f‖² + (D/2)t‖Λ_v^{s−1}∇_v f‖² + ½t^{1+2s}‖Λ_x^{s−1}∇_x f‖².
    pub fn coercive_part(&self, t: f64, w: &EntropyWeights, s: f64) -> f64 {
        w.c * self.mass + 0.5 * w.d * t * self.grad_v + 0.5 * t.powf(1.0 + 2.0 * s) * self.grad_x
    }
}

/// H(t) for the field f(t).
pub fn evaluate(field: &SpectralField, t: f64, w: &EntropyWeights, s: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!("time must be nonnegative, got {t}")));
    }
    check_order(s)?;
    Ok(EntropyTerms::compute(field, s).functional(t, w, s))
}

/// 0 ≤ coercive part ≤ H(t), with slack 1e−10·C‖f‖².
pub fn lower_bound_check(field: &SpectralField, t: f64, w: &EntropyWeights, s: f64) -> Result<bool> {
    if !w.cross_term_controlled() {
        return Err(invalid(format!("weights violate E <= sqrt(D): E = {}, D = {}", w.e, w.d)));
    }
    if !(t >= 0.0) {
        return Err(invalid(format!("time must be nonnegative, got {t}")));
    }
    check_order(s)?;
    let terms = EntropyTerms::compute(field, s);
    let h = terms.functional(t, w, s);
    let low = terms.coercive_part(t, w, s);
    let slack = 1e-10 * w.c * terms.mass;
    Ok(low >= -slack && low <= h + slack)
}

/// Named scalar inequalities on (C, D, E, ε) that make H nonincreasing on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// 2D ≤ 2C/10
    DiffusionGrowth,
    /// ε_iii^{−1}·2(2−s)D ≤ 2C/10
    VCommutatorMass,
    /// ε_iii^s·2(2−s)D ≤ Es/10
    VCommutatorCross,
    /// ε_iv^{−1}E(s+1) ≤ 2C/10
    CrossGrowthMass,
    /// ε_iv^{1/s}E(s+1) ≤ Es/10
    CrossGrowthCross,
    /// ε_v^{−1}dE ≤ 2D/10
    CrossCommutatorV,
    /// ε_v·dE ≤ 2/10
    CrossCommutatorX,
    /// E ≤ 2C/10
    CrossLowOrder,
    /// ε_vii^{−1}(1+2s) ≤ 2C/10
    XGrowthMass,
    /// ε_vii^{(1−s)/(2s)}(1+2s) ≤ Es/10
    XGrowthCross,
    /// 2 ≤ 2C/10
    XLowOrder,
}

impl Condition {
    pub const ALL: [Condition; 11] = [
        Condition::DiffusionGrowth,
        Condition::VCommutatorMass,
        Condition::VCommutatorCross,
        Condition::CrossGrowthMass,
        Condition::CrossGrowthCross,
        Condition::CrossCommutatorV,
        Condition::CrossCommutatorX,
        Condition::CrossLowOrder,
        Condition::XGrowthMass,
        Condition::XGrowthCross,
        Condition::XLowOrder,
    ];

    /// (lhs, rhs) of the inequality lhs ≤ rhs.
    pub fn sides(&self, w: &EntropyWeights, s: f64, dim: usize) -> (f64, f64) {
        let d = dim as f64;
        let mass = 2.0 * w.c / 10.0;
        let cross = w.e * s / 10.0;
        match self {
            Condition::DiffusionGrowth => (2.0 * w.d, mass),
            Condition::VCommutatorMass => (2.0 * (2.0 - s) * w.d / w.eps_iii, mass),
            Condition::VCommutatorCross => (w.eps_iii.powf(s) * 2.0 * (2.0 - s) * w.d, cross),
            Condition::CrossGrowthMass => (w.e * (s + 1.0) / w.eps_iv, mass),
            Condition::CrossGrowthCross => (w.eps_iv.powf(1.0 / s) * w.e * (s + 1.0), cross),
            Condition::CrossCommutatorV => (d * w.e / w.eps_v, 2.0 * w.d / 10.0),
            Condition::CrossCommutatorX => (w.eps_v * d * w.e, 2.0 / 10.0),
            Condition::CrossLowOrder => (w.e, mass),
            Condition::XGrowthMass => ((1.0 + 2.0 * s) / w.eps_vii, mass),
            Condition::XGrowthCross => (w.eps_vii.powf((1.0 - s) / (2.0 * s)) * (1.0 + 2.0 * s), cross),
            Condition::XLowOrder => (2.0, mass),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Condition::DiffusionGrowth => "diffusion_growth",
            Condition::VCommutatorMass => "v_commutator_mass",
            Condition::VCommutatorCross => "v_commutator_cross",
            Condition::CrossGrowthMass => "cross_growth_mass",
            Condition::CrossGrowthCross => "cross_growth_cross",
            Condition::CrossCommutatorV => "cross_commutator_v",
            Condition::CrossCommutatorX => "cross_commutator_x",
            Condition::CrossLowOrder => "cross_low_order",
            Condition::XGrowthMass => "x_growth_mass",
            Condition::XGrowthCross => "x_growth_cross",
            Condition::XLowOrder => "x_low_order",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub id: Condition,
    pub satisfied: bool,
    /// rhs − lhs
    pub margin: f64,
}

/// Evaluates every condition literally.
pub fn validate_conditions(w: &EntropyWeights, s: f64, dim: usize) -> Vec<ConditionCheck> {
    Condition::ALL
        .iter()
        .map(|&id| {
            let (lhs, rhs) = id.sides(w, s, dim);
            ConditionCheck {
                id,
                satisfied: lhs <= rhs,
                margin: rhs - lhs,
            }
        })
        .collect()
}

/// Closed-form admissible constants; every condition holds with a factor-2 margin
/// and E ≤ √D/10.
pub fn select_constants(s: f64, dim: usize) -> Result<EntropyWeights> {
    check_order(s)?;
    if !(1..=3).contains(&dim) {
        return Err(invalid(format!("dimension must be 1, 2 or 3, got {dim}")));
    }
    let d = dim as f64;
    let e = 20.0 * (1.0 + 2.0 * s) / s;
    // With this E the x-growth condition already holds at ε_vii = 1 for every s.
    let eps_vii = 1.0;
    let eps_iv = (s / (20.0 * (s + 1.0))).powf(s);
    let eps_v = 1.0 / (10.0 * d * e);
    let big_d = (e * e).max(100.0 * d * d * e * e);
    let eps_iii = (e * s / (40.0 * (2.0 - s) * big_d)).powf(1.0 / s);
    let c = 2.0
        * [
            10.0 * big_d,
            10.0 * (2.0 - s) * big_d / eps_iii,
            5.0 * e * (s + 1.0) / eps_iv,
            5.0 * e,
            5.0 * (1.0 + 2.0 * s) / eps_vii,
            10.0,
        ]
        .into_iter()
        .fold(0.0, f64::max);
    if !(c.is_finite() && eps_iii > 0.0) {
        return Err(invalid(format!(
            "admissible constants for s = {s} are not representable in double precision"
        )));
    }
    EntropyWeights::new(c, big_d, e, [eps_iii, eps_iv, eps_v, eps_vii])
}

/// Σ (I + II + III + IV)|f̂|² with
/// I = 2C⟨η⟩^{2s}, II = 2Dt⟨η⟩^{4s}, III = Es t^{1+s}⟨η⟩^{s−1}⟨ξ⟩^{s+1},
/// IV = 2t^{1+2s}⟨η⟩^{2s}⟨ξ⟩^{2s}.
pub fn dissipation_form(field: &SpectralField, t: f64, w: &EntropyWeights, s: f64) -> f64 {
    let t1 = t.powf(1.0 + s);
    let t2 = t.powf(1.0 + 2.0 * s);
    field.weighted_energy(|xi, eta| {
        let xf = xi_f64(xi);
        let be = (1.0 + dot2(eta, eta)).sqrt();
        let bx = (1.0 + dot2(xf, xf)).sqrt();
        2.0 * w.c * be.powf(2.0 * s)
            + 2.0 * w.d * t * be.powf(4.0 * s)
            + w.e * s * t1 * be.powf(s - 1.0) * bx.powf(s + 1.0)
            + 2.0 * t2 * be.powf(2.0 * s) * bx.powf(2.0 * s)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub t: f64,
    pub h: f64,
    pub dh_dt_fd: f64,
    pub bound_rhs: f64,
    pub monotone_ok: bool,
    pub slope_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
}

impl DecayReport {
    pub fn monotone(&self) -> bool {
        self.rows.iter().all(|r| r.monotone_ok)
    }

    pub fn slopes_bounded(&self) -> bool {
        self.rows.iter().all(|r| r.slope_ok)
    }

    pub fn passed(&self) -> bool {
        self.monotone() && self.slopes_bounded()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,H,dH_dt_fd,bound_rhs,monotone_ok\n");
        for r in &self.rows {
            out.push_str(&csv_row([
                fmt_f64(r.t),
                fmt_f64(r.h),
                fmt_f64(r.dh_dt_fd),
                fmt_f64(r.bound_rhs),
                r.monotone_ok.to_string(),
            ]));
        }
        out
    }
}

/// Relative slack of the monotonicity check.
pub const MONOTONE_SLACK: f64 = 1e-8;

/// Checks H(t_{n+1}) ≤ H(t_n)(1 + 1e−8) and the finite-difference slope bound
/// (H_{n+1} − H_n)/Δt ≤ −min(Q_n, Q_{n+1})/10 + 10Δt|H_n|, Q the dissipation form.
/// Each row reports the interval starting at its sample (the last row repeats
/// the final interval).
pub fn decay_audit(trajectory: &[(f64, SpectralField)], w: &EntropyWeights, s: f64) -> Result<DecayReport> {
    check_order(s)?;
    for (t, _) in trajectory {
        if !(0.0..=1.0).contains(t) {
            return Err(invalid(format!("audit times must lie in [0, 1], got {t}")));
        }
    }
    if trajectory.windows(2).any(|p| !(p[1].0 > p[0].0)) {
        return Err(invalid("audit times must be strictly ascending"));
    }
    let samples: Vec<(f64, f64, f64)> = trajectory
        .iter()
        .map(|(t, f)| {
            let h = EntropyTerms::compute(f, s).functional(*t, w, s);
            (*t, h, dissipation_form(f, *t, w, s))
        })
        .collect();
    let n = samples.len();
    let rows = (0..n)
        .map(|i| {
            let (t, h, _) = samples[i];
            if n < 2 {
                return DecayRow {
                    t,
                    h,
                    dh_dt_fd: 0.0,
                    bound_rhs: 0.0,
                    monotone_ok: true,
                    slope_ok: true,
                };
            }
            let a = if i + 1 < n { i } else { i - 1 };
            let (ta, ha, qa) = samples[a];
            let (tb, hb, qb) = samples[a + 1];
            let dt = tb - ta;
            let slope = (hb - ha) / dt;
            let bound = -0.1 * qa.min(qb) + 10.0 * dt * ha.abs();
            DecayRow {
                t,
                h,
                dh_dt_fd: slope,
                bound_rhs: bound,
                monotone_ok: hb <= ha * (1.0 + MONOTONE_SLACK),
                slope_ok: slope <= bound,
            }
        })
        .collect();
    Ok(DecayReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_weights_fail_first_condition_literally() {
        let w = EntropyWeights::new(1.0, 1.0, 1.0, [1.0; 4]).unwrap();
        let checks = validate_conditions(&w, 0.5, 1);
        assert_eq!(checks.len(), 11);
        let first = checks[0];
        assert_eq!(first.id, Condition::DiffusionGrowth);
        assert!(!first.satisfied);
        assert!((first.margin + 1.8).abs() < 1e-15);
    }

    #[test]
    fn selected_constants_pass_with_margin() {
        for &s in &[0.05, 0.3, 0.5, 0.8, 1.0] {
            for dim in 1..=3 {
                let w = select_constants(s, dim).unwrap();
                assert!(w.cross_term_controlled());
                for c in validate_conditions(&w, s, dim) {
                    assert!(c.satisfied && c.margin > 0.0, "s={s} dim={dim} {} {}", c.id, c.margin);
                }
                let scaled = EntropyWeights { c: 10.0 * w.c, ..w };
                assert!(validate_conditions(&scaled, s, dim).iter().all(|c| c.satisfied));
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(select_constants(0.0, 1).is_err());
        assert!(select_constants(0.5, 4).is_err());
        assert!(EntropyWeights::new(1.0, -1.0, 1.0, [1.0; 4]).is_err());
    }
}
