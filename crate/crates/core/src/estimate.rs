//! Closed-form drift estimators and the continuous-observation log-likelihood.
//!
//! Every continuous-time estimator is a function of [`SufficientStats`] alone.
//! The 2×2 normal equations are solved by Cramer's rule.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::stats::SufficientStats;

/// Relative size below which a difference-type denominator counts as zero.
pub const DENOM_REL_TOL: f64 = 1e-12;

fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::DegenerateDenominator { name, value })
    }
}

/// `value = big - small`; zero up to cancellation in `big` is degenerate.
fn check_difference(name: &'static str, value: f64, big: f64) -> Result<f64> {
    if value.is_finite() && value > DENOM_REL_TOL * big.abs() {
        Ok(value)
    } else {
        Err(Error::DegenerateDenominator { name, value })
    }
}

/// MLE of `theta` when `m` is known.
pub fn mle_theta_known_m(s: &SufficientStats, m: f64) -> Result<f64> {
    let den = check_positive("int_x2_over_y_ds", s.int_x2_over_y_ds)?;
    Ok((-s.int_x_over_y_dx + m * s.int_x_over_y_ds) / den)
}

/// MLE of all four drift parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleFull {
    pub a_hat: f64,
    pub b_hat: f64,
    pub m_hat: f64,
    pub theta_hat: f64,
    pub denom_ab: f64,
    pub denom_mtheta: f64,
}

/// `int Y ds * int 1/Y ds - T^2`.
pub fn denom_ab(s: &SufficientStats) -> f64 {
    s.int_y_ds * s.int_inv_y_ds - s.t * s.t
}

/// `int X^2/Y ds * int 1/Y ds - (int X/Y ds)^2`.
pub fn denom_mtheta(s: &SufficientStats) -> f64 {
    s.int_x2_over_y_ds * s.int_inv_y_ds - s.int_x_over_y_ds * s.int_x_over_y_ds
}

/// `T int X^2 ds - (int X ds)^2`.
pub fn denom_lse(s: &SufficientStats) -> f64 {
    s.t * s.int_x2_ds - s.int_x_ds * s.int_x_ds
}

pub fn mle_full(s: &SufficientStats) -> Result<MleFull> {
    let d1 = check_difference("denom_ab", denom_ab(s), s.int_y_ds * s.int_inv_y_ds)?;
    let d2 = check_difference("denom_mtheta", denom_mtheta(s), s.int_x2_over_y_ds * s.int_inv_y_ds)?;
    Ok(MleFull {
        a_hat: (s.int_y_ds * s.int_inv_y_dy - s.t * s.delta_y) / d1,
        b_hat: (s.t * s.int_inv_y_dy - s.int_inv_y_ds * s.delta_y) / d1,
        m_hat: (s.int_x2_over_y_ds * s.int_inv_y_dx - s.int_x_over_y_ds * s.int_x_over_y_dx) / d2,
        theta_hat: (s.int_x_over_y_ds * s.int_inv_y_dx - s.int_inv_y_ds * s.int_x_over_y_dx) / d2,
        denom_ab: d1,
        denom_mtheta: d2,
    })
}

/// Continuous-time LSE of `theta` when `m` is known.
pub fn lse_theta_known_m(s: &SufficientStats, m: f64) -> Result<f64> {
    let den = check_positive("int_x2_ds", s.int_x2_ds)?;
    Ok(-(s.int_x_dx - m * s.int_x_ds) / den)
}

/// Continuous-time LSE of `(m, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LseFull {
    pub m_hat: f64,
    pub theta_hat: f64,
    pub denom: f64,
}

pub fn lse_full(s: &SufficientStats) -> Result<LseFull> {
    let d = check_difference("denom", denom_lse(s), s.t * s.int_x2_ds)?;
    Ok(LseFull {
        m_hat: (s.delta_x * s.int_x2_ds - s.int_x_ds * s.int_x_dx) / d,
        theta_hat: (s.delta_x * s.int_x_ds - s.t * s.int_x_dx) / d,
        denom: d,
    })
}

/// Discrete-observation LSE. `m_hat` is `None` for the known-`m` variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LseDiscrete {
    pub m_hat: Option<f64>,
    pub theta_hat: f64,
    pub denom: f64,
}

/// LSE from observations `x_obs[0..=n]` at unit spacing.
pub fn lse_discrete(x_obs: &[f64], m: Option<f64>) -> Result<LseDiscrete> {
    if x_obs.len() < 2 {
        return Err(Error::InvalidGrid("need at least two observations".into()));
    }
    let n = (x_obs.len() - 1) as f64;
    let (mut sx, mut sxx, mut sd, mut sdx) = (0.0, 0.0, 0.0, 0.0);
    for w in x_obs.windows(2) {
        let (prev, dx) = (w[0], w[1] - w[0]);
        sx += prev;
        sxx += prev * prev;
        sd += dx;
        sdx += dx * prev;
    }
    match m {
        Some(m) => {
            let den = check_positive("sum_x_prev_sq", sxx)?;
            Ok(LseDiscrete { m_hat: None, theta_hat: -(sdx - m * sx) / den, denom: den })
        }
        None => {
            let den = check_difference("denom", n * sxx - sx * sx, n * sxx)?;
            Ok(LseDiscrete {
                m_hat: Some((sxx * sd - sx * sdx) / den),
                theta_hat: (sx * sd - n * sdx) / den,
                denom: den,
            })
        }
    }
}

/// [`lse_discrete`] for observations spaced `h` apart, returned in per-unit-time rates.
pub fn lse_discrete_spaced(x_obs: &[f64], h: f64, m: Option<f64>) -> Result<LseDiscrete> {
    if !(h > 0.0) {
        return Err(Error::InvalidGrid(format!("observation spacing must be positive, got {h}")));
    }
    let raw = lse_discrete(x_obs, m.map(|m| m * h))?;
    Ok(LseDiscrete { m_hat: raw.m_hat.map(|v| v / h), theta_hat: raw.theta_hat / h, denom: raw.denom })
}

/// Log-likelihood of the drift parameters relative to `(a, b, m, theta) = (1, 0, 0, 0)`.
pub fn loglik(s: &SufficientStats, p: &ModelParams) -> f64 {
    let ModelParams { a, b, m, theta } = *p;
    (a - 1.0) * s.int_inv_y_dy - b * s.delta_y + m * s.int_inv_y_dx - theta * s.int_x_over_y_dx
        - 0.5 * (a * a - 1.0) * s.int_inv_y_ds
        + a * b * s.t
        - 0.5 * b * b * s.int_y_ds
        - 0.5 * m * m * s.int_inv_y_ds
        + m * theta * s.int_x_over_y_ds
        - 0.5 * theta * theta * s.int_x2_over_y_ds
}

/// Hessian of [`loglik`] in `(a, b)`; constant in the parameters.
pub fn hessian_ab(s: &SufficientStats) -> [[f64; 2]; 2] {
    [[-s.int_inv_y_ds, s.t], [s.t, -s.int_y_ds]]
}

/// Hessian of [`loglik`] in `(m, theta)`; constant in the parameters.
pub fn hessian_mtheta(s: &SufficientStats) -> [[f64; 2]; 2] {
    [[-s.int_inv_y_ds, s.int_x_over_y_ds], [s.int_x_over_y_ds, -s.int_x2_over_y_ds]]
}

/// The estimators the harness and CLI can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    MleTheta,
    MleFull,
    LseTheta,
    LseFull,
    LseDiscrete,
}

impl Estimator {
    pub const ALL: [Estimator; 5] =
        [Estimator::MleTheta, Estimator::MleFull, Estimator::LseTheta, Estimator::LseFull, Estimator::LseDiscrete];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::MleTheta => "mle_theta",
            Estimator::MleFull => "mle_full",
            Estimator::LseTheta => "lse_theta",
            Estimator::LseFull => "lse_full",
            Estimator::LseDiscrete => "lse_discrete",
        }
    }

    /// Names of the estimated coordinates, in output order.
    pub fn coordinates(self, m_known: bool) -> &'static [&'static str] {
        match self {
            Estimator::MleTheta | Estimator::LseTheta => &["theta"],
            Estimator::MleFull => &["a", "b", "m", "theta"],
            Estimator::LseFull => &["m", "theta"],
            Estimator::LseDiscrete if m_known => &["theta"],
            Estimator::LseDiscrete => &["m", "theta"],
        }
    }

    pub fn needs_known_m(self) -> bool {
        matches!(self, Estimator::MleTheta | Estimator::LseTheta)
    }

    /// Run on one observed path. Degenerate denominators give `valid = false`
    /// rather than an error.
    pub fn apply(self, obs: &Observation<'_>, m_known: Option<f64>) -> Result<EstimateReport> {
        let s = obs.stats;
        let mut denominators = BTreeMap::new();
        let result: Result<Vec<f64>> = match self {
            Estimator::MleTheta => {
                let m = m_known.ok_or_else(|| Error::Config("mle_theta needs a known m".into()))?;
                denominators.insert("int_x2_over_y_ds".to_string(), s.int_x2_over_y_ds);
                mle_theta_known_m(s, m).map(|v| vec![v])
            }
            Estimator::LseTheta => {
                let m = m_known.ok_or_else(|| Error::Config("lse_theta needs a known m".into()))?;
                denominators.insert("int_x2_ds".to_string(), s.int_x2_ds);
                lse_theta_known_m(s, m).map(|v| vec![v])
            }
            Estimator::MleFull => {
                denominators.insert("denom_ab".to_string(), denom_ab(s));
                denominators.insert("denom_mtheta".to_string(), denom_mtheta(s));
                mle_full(s).map(|e| vec![e.a_hat, e.b_hat, e.m_hat, e.theta_hat])
            }
            Estimator::LseFull => {
                denominators.insert("denom".to_string(), denom_lse(s));
                lse_full(s).map(|e| vec![e.m_hat, e.theta_hat])
            }
            Estimator::LseDiscrete => {
                let (x, h) = obs.discrete_sample()?;
                let r = lse_discrete_spaced(&x, h, m_known);
                match &r {
                    Ok(e) => {
                        denominators.insert("denom".to_string(), e.denom);
                    }
                    Err(Error::DegenerateDenominator { value, .. }) => {
                        denominators.insert("denom".to_string(), *value);
                    }
                    Err(_) => {}
                }
                r.map(|e| e.m_hat.into_iter().chain([e.theta_hat]).collect())
            }
        };
        let names = self.coordinates(m_known.is_some());
        match result {
            Ok(values) => Ok(EstimateReport {
                estimator: self,
                values: names.iter().map(|n| n.to_string()).zip(values).collect(),
                denominators,
                valid: true,
                error: None,
            }),
            Err(e) if e.is_degenerate_input() => Ok(EstimateReport {
                estimator: self,
                values: BTreeMap::new(),
                denominators,
                valid: false,
                error: Some(e.to_string()),
            }),
            Err(e) => Err(e),
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown estimator `{s}` (expected one of mle_theta, mle_full, lse_theta, lse_full, lse_discrete)"
                ))
            })
    }
}

/// One observed path, reduced to what the estimators read.
#[derive(Debug, Clone)]
pub struct Observation<'a> {
    pub stats: &'a SufficientStats,
    /// The `X` observations on the simulation grid.
    pub x: &'a [f64],
    pub dt: f64,
    /// Spacing used by the discrete LSE; a multiple of `dt`. Defaults to `dt`.
    pub discrete_spacing: Option<f64>,
}

impl Observation<'_> {
    fn discrete_sample(&self) -> Result<(Vec<f64>, f64)> {
        let h = self.discrete_spacing.unwrap_or(self.dt);
        let k = (h / self.dt).round();
        if k < 1.0 || (k * self.dt - h).abs() > 1e-9 * h {
            return Err(Error::Config(format!("discrete spacing {h} is not a multiple of dt = {}", self.dt)));
        }
        let k = k as usize;
        Ok((self.x.iter().step_by(k).copied().collect(), k as f64 * self.dt))
    }
}

/// JSON form of one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: Estimator,
    pub values: BTreeMap<String, f64>,
    pub denominators: BTreeMap<String, f64>,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EstimateReport {
    /// Values in [`Estimator::coordinates`] order.
    pub fn ordered_values(&self, m_known: bool) -> Option<Vec<f64>> {
        if !self.valid {
            return None;
        }
        self.estimator.coordinates(m_known).iter().map(|n| self.values.get(*n).copied()).collect()
    }
}
