//! JSON experiment configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::Estimator;
use crate::model::ModelParams;
use crate::sim::{GridSpec, Scheme};

/// How each replicate starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    /// `Y_0` from the Gamma stationary law, `X` run in for `burn_in` from `m / theta`.
    Stationary {
        #[serde(default)]
        burn_in: f64,
    },
    Fixed {
        y0: f64,
        x0: f64,
    },
}

impl Default for Initial {
    fn default() -> Self {
        Initial::Stationary { burn_in: 10.0 }
    }
}

/// Settings for the long run that estimates the inverse moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRun {
    pub t_total: f64,
    pub dt: f64,
    #[serde(default)]
    pub burn_in: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    #[serde(default)]
    pub initial: Initial,
    pub horizons: Vec<f64>,
    pub dt: f64,
    pub n_replicates: usize,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    /// Known `m` for the `theta`-only estimators (default: the true `m`).
    /// When set, `lse_discrete` also runs its known-`m` variant.
    #[serde(default)]
    pub m_known: Option<f64>,
    #[serde(default)]
    pub scheme: Scheme,
    /// Observation spacing of `lse_discrete`; a multiple of `dt` (default `dt`).
    #[serde(default)]
    pub lse_discrete_spacing: Option<f64>,
    /// Long-run moment estimation for the theoretical covariances.
    #[serde(default)]
    pub moments: Option<MomentRun>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_replicates == 0 {
            return Err(Error::Config("n_replicates must be at least 1".into()));
        }
        if self.horizons.is_empty() {
            return Err(Error::Config("horizons must not be empty".into()));
        }
        if self.horizons.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("horizons must be strictly ascending".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        for t in &self.horizons {
            GridSpec::new(*t, self.dt).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("estimators must not be empty".into()));
        }
        let mut seen = self.estimators.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.estimators.len() {
            return Err(Error::Config("estimators must not repeat".into()));
        }
        match self.initial {
            Initial::Stationary { burn_in } if !(burn_in >= 0.0) => {
                return Err(Error::Config(format!("burn_in must be non-negative, got {burn_in}")));
            }
            Initial::Fixed { y0, .. } if !(y0 >= 0.0) => {
                return Err(Error::Config(format!("y0 must be non-negative, got {y0}")));
            }
            _ => {}
        }
        if let Some(h) = self.lse_discrete_spacing {
            let k = (h / self.dt).round();
            if !(h > 0.0) || k < 1.0 || (k * self.dt - h).abs() > 1e-9 * h {
                return Err(Error::Config(format!("lse_discrete_spacing {h} is not a multiple of dt")));
            }
        }
        if let Some(run) = self.moments {
            GridSpec::new(run.t_total, run.dt).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// `m` handed to the `theta`-only estimators.
    pub fn m_for_theta(&self) -> f64 {
        self.m_known.unwrap_or(self.params.m)
    }

    pub fn moment_run(&self) -> MomentRun {
        self.moments.unwrap_or(MomentRun { t_total: 1e4, dt: self.dt, burn_in: 100.0, seed: self.seed })
    }
}
