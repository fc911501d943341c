//! Command bodies. Each returns the resolved parameters and a report.

use kinreg_core::carleman::{self, CarlemanParams};
use kinreg_core::commutators;
use kinreg_core::kolmogorov::{
    random_band_limited, solve_trajectory, InitialDatum, KolmogorovParams, SpatialProfile, VelocityProfile,
};
use kinreg_core::lyapunov::{decay_audit, lower_bound_check, select_constants};
use kinreg_core::quantization::{
    hermiticity_defect, random_bracket_symbol, random_nonnegative_symbol, weyl_matrix, wick_positivity,
    wick_rows_to_csv, wick_transport_bracket_check, Grid1d, SymbolField, WickRow,
};
use kinreg_core::report::{csv_row, fmt_f64};
use kinreg_core::spectral::{sobolev_norm, GridSpec, SpectralField};
use kinreg_core::weights::{self, WeightParams};

use crate::config::{Params, RawConfig};
use crate::rates::rate_series;
use crate::{CliError, Command, Report};

pub fn execute(command: Command, raw: &RawConfig, seed: u64) -> Result<(Params, Report), CliError> {
    let declared = declared(command);
    let p = Params::resolve(declared, raw)?;
    let report = match command {
        Command::Solve => solve(&p, seed),
        Command::Rates => rates(&p),
        Command::LyapunovAudit => lyapunov_audit(&p),
        Command::CommCheck => comm_check(&p, seed),
        Command::WeightsCheck => weights_check(&p, seed),
        Command::A0Audit => a0_audit(&p),
        Command::WickCheck => wick_check(&p, seed),
    }?;
    Ok((p, report))
}

/// Parameter keys and defaults per command.
pub fn declared(command: Command) -> &'static [(&'static str, &'static str)] {
    match command {
        Command::Solve => &[
            ("s", "0.5"),
            ("d", "1"),
            ("n_x_modes", "4"),
            ("n_v", "128"),
            ("l_v", "8"),
            ("t_final", "1"),
            ("n_times", "33"),
            ("datum", "random"),
        ],
        Command::Rates => &[
            ("s", "0.5"),
            ("n_x_modes", "3"),
            ("n_v", "128"),
            ("l_v", "8"),
            ("velocity", "hat"),
            ("levels", "10"),
            ("tolerance", "0.2"),
        ],
        Command::LyapunovAudit => &[
            ("s_values", "0.3,0.5,0.8,1.0"),
            ("data", "gaussian,hat,indicator"),
            ("n_times", "64"),
            ("n_x_modes", "3"),
            ("n_v", "128"),
            ("l_v", "8"),
        ],
        Command::CommCheck => &[
            ("s_values", "0.3,0.5,0.8"),
            ("n_points", "10000"),
            ("dim", "3"),
            ("radius", "20"),
            ("xi_max", "5"),
            ("h", "1e-4"),
            ("tolerance", "1e-4"),
            ("zero_tolerance", "1e-12"),
            ("min_order", "1.9"),
        ],
        Command::WeightsCheck => &[
            ("gamma_s_pairs", "0.5:0.25,1.0:0.4"),
            ("k_values", "100,10000"),
            ("n_points", "100000"),
            ("radius", "100"),
            ("slack", "1e-10"),
        ],
        Command::A0Audit => &[
            ("s", "0.25"),
            ("gamma", "0.5"),
            ("delta", "1"),
            ("n_r", "8"),
            ("n_sphere", "24"),
            ("n_alpha", "12"),
            ("refine", "true"),
            ("stability_tolerance", "0.1"),
            ("max_ratio", "1000"),
            ("scaling_k", "8"),
            ("scaling_tolerance", "0.15"),
        ],
        Command::WickCheck => &[
            ("n", "128"),
            ("l", "8"),
            ("n_positivity", "20"),
            ("n_bracket", "5"),
            ("xi", "2"),
            ("positivity_tolerance", "1e-8"),
            ("bracket_tolerance", "1e-6"),
            ("hermitian_tolerance", "1e-12"),
        ],
    }
}

pub fn velocity_profile(name: &str) -> Result<VelocityProfile, CliError> {
    match name {
        "gaussian" => Ok(VelocityProfile::Gaussian),
        "hat" => Ok(VelocityProfile::Hat),
        "indicator" => Ok(VelocityProfile::SmoothedIndicator { width: 0.1 }),
        other => Err(CliError::Invalid(format!(
            "unknown velocity profile {other}; expected gaussian, hat or indicator"
        ))),
    }
}

fn grid_from(p: &Params, d: usize) -> Result<GridSpec, CliError> {
    Ok(GridSpec::new(d, p.get("n_x_modes")?, p.get("n_v")?, p.get("l_v")?)?)
}

fn solve(p: &Params, seed: u64) -> Result<Report, CliError> {
    let s: f64 = p.get("s")?;
    let params = KolmogorovParams::new(s)?;
    let grid = grid_from(p, p.get("d")?)?;
    let t_final: f64 = p.get("t_final")?;
    let n_times: usize = p.get("n_times")?;
    if !(t_final >= 0.0 && t_final.is_finite()) || n_times < 2 {
        return Err(CliError::Invalid("need t_final ≥ 0 and n_times ≥ 2".into()));
    }
    let f0 = match p.text("datum") {
        "random" => random_band_limited(&grid, seed)?,
        "plane" => InitialDatum::new(SpatialProfile::PlaneWave { k: [1, 0] }, VelocityProfile::Gaussian).build(&grid)?,
        other => InitialDatum::new(SpatialProfile::Rough, velocity_profile(other)?).build(&grid)?,
    };
    let times: Vec<f64> = (0..n_times)
        .map(|i| t_final * i as f64 / (n_times - 1) as f64)
        .collect();
    let traj = solve_trajectory(&f0, &times, params)?;
    let l0 = sobolev_norm(&f0, 0.0, 0.0);
    let mut csv = String::from("t,L2,H0s,Hs0\n");
    let mut decay_ok = true;
    for (t, f) in times.iter().zip(&traj) {
        let l2 = sobolev_norm(f, 0.0, 0.0);
        decay_ok &= l2 <= (-t).exp() * l0 * (1.0 + 1e-10);
        csv.push_str(&csv_row([t, &l2, &sobolev_norm(f, 0.0, s), &sobolev_norm(f, s, 0.0)].map(|x| fmt_f64(*x))));
    }
    let mut r = Report::new(csv);
    r.put("initial_L2", fmt_f64(l0));
    r.put("final_L2", fmt_f64(sobolev_norm(traj.last().unwrap_or(&f0), 0.0, 0.0)));
    r.require("l2_decay", decay_ok);
    if let Some(last) = traj.last() {
        r.extra.push((".final.kreg".into(), last.to_bytes()));
    }
    Ok(r)
}

fn rates(p: &Params) -> Result<Report, CliError> {
    let s: f64 = p.get("s")?;
    let vel = velocity_profile(p.text("velocity"))?;
    let levels: u32 = p.get("levels")?;
    let tol: f64 = p.get("tolerance")?;
    let base = grid_from(p, 1)?;
    let fine = base.refined();
    let a = rate_series(&base, s, vel, levels)?;
    let b = rate_series(&fine, s, vel, levels)?;
    let mut csv = String::from("grid,t,norm_0s,norm_s0,scaled_0s,scaled_s0\n");
    for (label, series) in [("base", &a), ("refined", &b)] {
        for i in 0..series.times.len() {
            let t = series.times[i];
            csv.push_str(&csv_row(
                [
                    label.to_string(),
                    fmt_f64(t),
                    fmt_f64(series.velocity[i]),
                    fmt_f64(series.spatial[i]),
                    fmt_f64(t.sqrt() * series.velocity[i]),
                    fmt_f64(t.powf(0.5 + s) * series.spatial[i]),
                ]
                .into_iter(),
            ));
        }
    }
    let mut r = Report::new(csv);
    let change = |x: f64, y: f64| (y - x).abs() / x.abs();
    let cv = change(a.velocity_fit.sup_constant, b.velocity_fit.sup_constant);
    let cs = change(a.spatial_fit.sup_constant, b.spatial_fit.sup_constant);
    r.put("sup_t_half_norm_0s_base", fmt_f64(a.velocity_fit.sup_constant));
    r.put("sup_t_half_norm_0s_refined", fmt_f64(b.velocity_fit.sup_constant));
    r.put("sup_t_half_plus_s_norm_s0_base", fmt_f64(a.spatial_fit.sup_constant));
    r.put("sup_t_half_plus_s_norm_s0_refined", fmt_f64(b.spatial_fit.sup_constant));
    r.put("slope_0s_base", fmt_f64(a.velocity_fit.slope));
    r.put("slope_s0_base", fmt_f64(a.spatial_fit.slope));
    r.put("refinement_change_0s", fmt_f64(cv));
    r.put("refinement_change_s0", fmt_f64(cs));
    let finite = [a.velocity_fit, b.velocity_fit, a.spatial_fit, b.spatial_fit]
        .iter()
        .all(|f| f.sup_constant.is_finite());
    r.require("finite", finite);
    r.require("refinement_stable", cv <= tol && cs <= tol);
    Ok(r)
}

fn lyapunov_audit(p: &Params) -> Result<Report, CliError> {
    let s_values: Vec<f64> = p.list("s_values")?;
    let data: Vec<String> = p.list("data")?;
    let n_times: usize = p.get("n_times")?;
    if n_times < 2 {
        return Err(CliError::Invalid("n_times must be at least 2".into()));
    }
    let grid = grid_from(p, 1)?;
    let times: Vec<f64> = (0..n_times).map(|n| n as f64 / (n_times - 1) as f64).collect();
    let mut csv = String::from("s,datum,t,H,dH_dt_fd,bound_rhs,monotone_ok,lower_bound_ok\n");
    let mut r = Report::new(String::new());
    let mut all_ok = true;
    for &s in &s_values {
        let w = select_constants(s, 1)?;
        r.put(format!("s={s}.constants"), format!("C={} D={} E={}", fmt_f64(w.c), fmt_f64(w.d), fmt_f64(w.e)));
        for name in &data {
            let f0 = InitialDatum::new(SpatialProfile::Rough, velocity_profile(name)?).build(&grid)?;
            let traj = solve_trajectory(&f0, &times, KolmogorovParams::new(s)?)?;
            let lb: Vec<bool> = times
                .iter()
                .zip(&traj)
                .map(|(t, f)| lower_bound_check(f, *t, &w, s))
                .collect::<Result<_, _>>()?;
            let pairs: Vec<(f64, SpectralField)> = times.iter().copied().zip(traj).collect();
            let rep = decay_audit(&pairs, &w, s)?;
            for (row, ok) in rep.rows.iter().zip(&lb) {
                csv.push_str(&csv_row(
                    [
                        fmt_f64(s),
                        name.clone(),
                        fmt_f64(row.t),
                        fmt_f64(row.h),
                        fmt_f64(row.dh_dt_fd),
                        fmt_f64(row.bound_rhs),
                        row.monotone_ok.to_string(),
                        ok.to_string(),
                    ]
                    .into_iter(),
                ));
            }
            let ok = rep.monotone() && lb.iter().all(|&b| b);
            all_ok &= ok;
            r.put(
                format!("s={s}.{name}"),
                format!(
                    "monotone={} slope_bound={} lower_bound={}",
                    rep.monotone(),
                    rep.slopes_bounded(),
                    lb.iter().all(|&b| b)
                ),
            );
        }
    }
    r.csv = csv;
    r.require("monotone_and_lower_bound", all_ok);
    Ok(r)
}

fn comm_check(p: &Params, seed: u64) -> Result<Report, CliError> {
    let s_values: Vec<f64> = p.list("s_values")?;
    let n: usize = p.get("n_points")?;
    let h: f64 = p.get("h")?;
    let tol: f64 = p.get("tolerance")?;
    let zero_tol: f64 = p.get("zero_tolerance")?;
    let min_order: f64 = p.get("min_order")?;
    if !(h > 0.0) || n == 0 {
        return Err(CliError::Invalid("need h > 0 and n_points ≥ 1".into()));
    }
    let points = commutators::sample_points(n, p.get("dim")?, p.get("radius")?, p.get("xi_max")?, seed);
    let mut csv = format!("s,{}", commutators::CSV_HEADER);
    let mut r = Report::new(String::new());
    for &s in &s_values {
        let rows = commutators::commutator_rows(&points, s, h)?;
        let bad: Vec<_> = rows.iter().filter(|row| !(row.abs_err <= tol)).collect();
        for line in commutators::rows_to_csv(bad.iter().copied()).lines().skip(1) {
            csv.push_str(&format!("{},{line}\n", fmt_f64(s)));
        }
        let max_err = commutators::max_error(&rows);
        let order = commutators::fitted_order(&points, s, h)?;
        let zero = commutators::zero_commutators_check(&points, s, h);
        r.put(format!("s={s}.max_abs_error"), fmt_f64(max_err));
        r.put(format!("s={s}.fitted_order"), fmt_f64(order));
        r.put(format!("s={s}.zero_commutator_max"), fmt_f64(zero));
        r.require(format!("s={s}.identity"), bad.is_empty());
        // an error already at round-off level carries no order information
        r.require(format!("s={s}.order"), order >= min_order || max_err <= 1e-12);
        r.require(format!("s={s}.zero_commutators"), zero <= zero_tol);
    }
    r.csv = csv;
    Ok(r)
}

fn weights_check(p: &Params, seed: u64) -> Result<Report, CliError> {
    let pairs: Vec<String> = p.list("gamma_s_pairs")?;
    let ks: Vec<f64> = p.list("k_values")?;
    let radius: f64 = p.get("radius")?;
    let slack: f64 = p.get("slack")?;
    let mut points = weights::sample_points(p.get("n_points")?, radius, seed);
    points.extend(weights::special_points(radius));
    let mut csv = String::from("gamma,s,v1,v2,v3,eta1,eta2,eta3,xi1,xi2,xi3,K,inequality,lhs,rhs\n");
    let mut r = Report::new(String::new());
    r.put("points", points.len());
    for pair in &pairs {
        let (g, s) = pair
            .split_once(':')
            .ok_or_else(|| CliError::Invalid(format!("pair {pair} is not gamma:s")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Invalid(format!("pair {pair}: {e}")))
        };
        let (gamma, s) = (parse(g)?, parse(s)?);
        let base = WeightParams::new(s, gamma, ks.first().copied().unwrap_or(1.0))?;
        let rep = weights::run_suite(&points, &base, &ks, slack)?;
        for line in rep.violations_csv().lines().skip(1) {
            csv.push_str(&format!("{},{},{line}\n", fmt_f64(gamma), fmt_f64(s)));
        }
        let tag = format!("gamma={gamma},s={s}");
        r.put(format!("{tag}.evaluations"), rep.evaluations);
        r.put(format!("{tag}.violations"), rep.violations.len());
        r.put(format!("{tag}.fitted_c_p"), fmt_f64(rep.fitted_c_p));
        r.require(format!("{tag}.status"), rep.passed(s));
    }
    r.csv = csv;
    Ok(r)
}

/// Audit constants and the η-scaling fit for one quadrature setting.
#[derive(Debug, Clone, PartialEq)]
pub struct A0Study {
    pub report: carleman::AuditReport,
    pub exponent: f64,
}

pub fn a0_study(params: &CarlemanParams, scaling_k: f64) -> Result<A0Study, CliError> {
    let report = carleman::ellipticity_audit(&carleman::audit_grid(), params)?;
    let exponent = carleman::scaling_exponent([0.0; 3], [0.0, 0.0, 1.0], scaling_k, params)?;
    Ok(A0Study { report, exponent })
}

fn a0_audit(p: &Params) -> Result<Report, CliError> {
    let mut params = CarlemanParams::new(p.get("s")?, p.get("gamma")?, p.get("delta")?)?;
    params.n_r = p.get("n_r")?;
    params.n_sphere = p.get("n_sphere")?;
    params.n_alpha = p.get("n_alpha")?;
    params.validate()?;
    let refine: bool = p.get("refine")?;
    let tol: f64 = p.get("stability_tolerance")?;
    let scaling_k: f64 = p.get("scaling_k")?;
    let base = a0_study(&params, scaling_k)?;
    let mut r = Report::new(base.report.to_csv());
    let a = &base.report;
    r.put("angular_kernel", "1 (constant)");
    r.put("c_slack", fmt_f64(a.c_slack));
    r.put("c_low", fmt_f64(a.c_low));
    r.put("c_high", fmt_f64(a.c_high));
    r.put("c_high_over_c_low", fmt_f64(a.c_high / a.c_low));
    r.put("scaling_exponent", fmt_f64(base.exponent));
    r.require("finite_constants", a.finite());
    r.require("ratio_bound", a.c_high / a.c_low <= p.get::<f64>("max_ratio")?);
    let zero_eta = a.rows.iter().filter(|row| row.eta == [0.0; 3]).all(|row| row.a0 == 0.0);
    r.require("a0_vanishes_at_zero_eta", zero_eta);
    let target = 2.0 * params.s;
    r.require(
        "scaling_exponent_within_tolerance",
        (base.exponent - target).abs() <= p.get::<f64>("scaling_tolerance")? * target,
    );
    if refine {
        let fine = a0_study(&params.refined(), scaling_k)?;
        let b = &fine.report;
        let change = |x: f64, y: f64| if x == y { 0.0 } else { (y - x).abs() / x.abs().max(y.abs()) };
        let changes = [
            change(a.c_slack, b.c_slack),
            change(a.c_low, b.c_low),
            change(a.c_high, b.c_high),
        ];
        r.put("refined.c_slack", fmt_f64(b.c_slack));
        r.put("refined.c_low", fmt_f64(b.c_low));
        r.put("refined.c_high", fmt_f64(b.c_high));
        r.put("refinement_change_max", fmt_f64(changes.iter().copied().fold(0.0, f64::max)));
        r.require("refinement_stable", changes.iter().all(|&c| c <= tol));
    }
    Ok(r)
}

fn wick_check(p: &Params, seed: u64) -> Result<Report, CliError> {
    let n: usize = p.get("n")?;
    let l: f64 = p.get("l")?;
    let grid = Grid1d::new(n, l)?;
    let xi: f64 = p.get("xi")?;
    let pos_tol: f64 = p.get("positivity_tolerance")?;
    let br_tol: f64 = p.get("bracket_tolerance")?;
    let herm_tol: f64 = p.get("hermitian_tolerance")?;
    let mut rows = Vec::new();
    let herm = hermiticity_defect(&weyl_matrix(&SymbolField::from_fn(grid, |v, e| (v * e).sin() + v * v)));
    rows.push(WickRow {
        id: "hermitian".into(),
        n,
        l,
        metric: herm,
        tolerance: herm_tol,
        pass: herm <= herm_tol,
    });
    for i in 0..p.get::<u64>("n_positivity")? {
        let res = wick_positivity(&random_nonnegative_symbol(grid, seed.wrapping_add(i)))?;
        let metric = res.min_eig / res.norm2;
        rows.push(WickRow {
            id: format!("positivity_{i}"),
            n,
            l,
            metric,
            tolerance: -pos_tol,
            pass: res.passed(pos_tol),
        });
    }
    for i in 0..p.get::<u64>("n_bracket")? {
        let sym = random_bracket_symbol(grid, seed.wrapping_add(1_000_000 + i));
        let err = wick_transport_bracket_check(&sym, xi)?;
        rows.push(WickRow {
            id: format!("bracket_{i}"),
            n,
            l,
            metric: err,
            tolerance: br_tol,
            pass: err <= br_tol,
        });
    }
    let mut r = Report::new(wick_rows_to_csv(&rows));
    let failed = rows.iter().filter(|row| !row.pass).count();
    r.put("checks", rows.len());
    r.put("failed", failed);
    r.require("all_checks", failed == 0);
    Ok(r)
}
