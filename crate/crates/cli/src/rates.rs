//! Smoothing-rate estimation from solver trajectories.

use kinreg_core::kolmogorov::{solve_trajectory, InitialDatum, KolmogorovParams, SpatialProfile, VelocityProfile};
use kinreg_core::spectral::{sobolev_norm, GridSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// least-squares slope of log norm against log t
    pub slope: f64,
    /// max_t t^p·norm
    pub sup_constant: f64,
}

/// Fits log(norm) ≈ a + slope·log(t) and reports sup t^p·norm.
pub fn fit_rate(times: &[f64], norms: &[f64], p: f64) -> Result<RateFit, CliError> {
    if times.len() != norms.len() {
        return Err(CliError::Invalid("times and norms differ in length".into()));
    }
    if times.len() < 8 {
        return Err(CliError::Invalid(format!("need at least 8 samples, got {}", times.len())));
    }
    if times.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(CliError::Invalid("times must lie in (0, 1]".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Invalid("times must be strictly ascending".into()));
    }
    if norms.iter().any(|&n| !(n > 0.0 && n.is_finite())) {
        return Err(CliError::Invalid("norms must be positive and finite".into()));
    }
    let n = times.len() as f64;
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sup_constant = times
        .iter()
        .zip(norms)
        .map(|(t, v)| t.powf(p) * v)
        .fold(0.0, f64::max);
    Ok(RateFit {
        slope: sxy / sxx,
        sup_constant,
    })
}

/// Dyadic times 2^{−levels}, …, 1/2, 1.
pub fn dyadic_times(levels: u32) -> Vec<f64> {
    (0..=levels).rev().map(|k| 0.5f64.powi(k as i32)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub times: Vec<f64>,
    /// ‖f(t)‖_{0,s}/‖f₀‖
    pub velocity: Vec<f64>,
    /// ‖f(t)‖_{s,0}/‖f₀‖
    pub spatial: Vec<f64>,
    pub velocity_fit: RateFit,
    pub spatial_fit: RateFit,
}

/// Rough-in-x data with the given velocity profile, normalized norms along
/// dyadic times, with rate exponents 1/2 (velocity) and 1/2 + s (space).
pub fn rate_series(grid: &GridSpec, s: f64, velocity: VelocityProfile, levels: u32) -> Result<RateSeries, CliError> {
    let params = KolmogorovParams::new(s)?;
    let f0 = InitialDatum::new(SpatialProfile::Rough, velocity).build(grid)?;
    let n0 = sobolev_norm(&f0, 0.0, 0.0);
    let times = dyadic_times(levels);
    let traj = solve_trajectory(&f0, &times, params)?;
    let velocity: Vec<f64> = traj.iter().map(|f| sobolev_norm(f, 0.0, s) / n0).collect();
    let spatial: Vec<f64> = traj.iter().map(|f| sobolev_norm(f, s, 0.0) / n0).collect();
    Ok(RateSeries {
        velocity_fit: fit_rate(&times, &velocity, 0.5)?,
        spatial_fit: fit_rate(&times, &spatial, 0.5 + s)?,
        times,
        velocity,
        spatial,
    })
}
