//! Pathwise integral functionals of a discretely observed trajectory.
//!
//! Stochastic integrals are left-endpoint (adapted) Riemann–Stieltjes sums and
//! `ds`-integrals use the left rectangle rule, so the two share one quadrature
//! and the discrete Cauchy–Schwarz inequalities hold exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::SamplePath;

/// The integral functionals every estimator is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "int_inv_y_dY")]
    pub int_inv_y_dy: f64,
    pub delta_y: f64,
    #[serde(rename = "int_inv_y_dX")]
    pub int_inv_y_dx: f64,
    #[serde(rename = "int_x_over_y_dX")]
    pub int_x_over_y_dx: f64,
    pub int_inv_y_ds: f64,
    pub int_x_over_y_ds: f64,
    pub int_x2_over_y_ds: f64,
    pub int_y_ds: f64,
    pub int_x_ds: f64,
    pub int_x2_ds: f64,
    #[serde(rename = "int_x_dX")]
    pub int_x_dx: f64,
    pub delta_x: f64,
}

/// `sum_{i=1..n} integrand[i-1] * (integrator[i] - integrator[i-1])`.
pub fn stieltjes_sum(integrand: &[f64], integrator: &[f64]) -> Result<f64> {
    if integrand.len() != integrator.len() {
        return Err(Error::LengthMismatch { left: integrand.len(), right: integrator.len() });
    }
    Ok(integrand
        .iter()
        .zip(integrator.windows(2))
        .map(|(f, w)| f * (w[1] - w[0]))
        .sum())
}

/// Left rectangle rule over the grid points `values[0..n]`; the last value is not used.
pub fn time_integral(values: &[f64], dt: f64) -> f64 {
    match values.split_last() {
        Some((_, head)) => dt * head.iter().sum::<f64>(),
        None => 0.0,
    }
}

/// `int X dX` through the Itô identity `(X_T^2 - X_0^2 - int Y ds) / 2`.
pub fn ito_x_dx(path: &SamplePath) -> f64 {
    ito_identity(&path.x, time_integral(&path.y, path.grid.dt))
}

fn ito_identity(x: &[f64], int_y_ds: f64) -> f64 {
    match (x.first(), x.last()) {
        (Some(x0), Some(xt)) => 0.5 * (xt * xt - x0 * x0 - int_y_ds),
        _ => 0.0,
    }
}

/// The raw adapted sum for `int X dX`; a diagnostic companion to [`ito_x_dx`].
pub fn stieltjes_x_dx(path: &SamplePath) -> f64 {
    stieltjes_sum(&path.x, &path.x).expect("path arrays have equal length")
}

/// All functionals of `path`. Fails if `Y` is not strictly positive on the grid.
pub fn sufficient_stats(path: &SamplePath) -> Result<SufficientStats> {
    sufficient_stats_from(&path.y, &path.x, path.grid.dt)
}

/// [`sufficient_stats`] on raw arrays observed with spacing `dt`.
pub fn sufficient_stats_from(y: &[f64], x: &[f64], dt: f64) -> Result<SufficientStats> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch { left: y.len(), right: x.len() });
    }
    if y.len() < 2 {
        return Err(Error::InvalidGrid("need at least two observations".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
    }
    if let Some(index) = y.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NonpositiveY { index, value: y[index] });
    }
    let n = y.len() - 1;
    let mut acc = [0.0f64; 9];
    for i in 0..n {
        let (yi, xi) = (y[i], x[i]);
        let inv = 1.0 / yi;
        let dy = y[i + 1] - yi;
        let dx = x[i + 1] - xi;
        acc[0] += inv * dy;
        acc[1] += inv * dx;
        acc[2] += xi * inv * dx;
        acc[3] += inv;
        acc[4] += xi * inv;
        acc[5] += xi * xi * inv;
        acc[6] += yi;
        acc[7] += xi;
        acc[8] += xi * xi;
    }
    let int_y_ds = dt * acc[6];
    Ok(SufficientStats {
        t: n as f64 * dt,
        int_inv_y_dy: acc[0],
        delta_y: y[n] - y[0],
        int_inv_y_dx: acc[1],
        int_x_over_y_dx: acc[2],
        int_inv_y_ds: dt * acc[3],
        int_x_over_y_ds: dt * acc[4],
        int_x2_over_y_ds: dt * acc[5],
        int_y_ds,
        int_x_ds: dt * acc[7],
        int_x2_ds: dt * acc[8],
        int_x_dx: ito_identity(x, int_y_ds),
        delta_x: x[n] - x[0],
    })
}
