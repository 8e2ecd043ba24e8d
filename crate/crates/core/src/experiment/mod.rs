//! Monte Carlo replication of the estimators and the JSON report.
//!
//! Replicate `i` simulates one path on stream `(seed, i)` up to the largest
//! horizon; every horizon is estimated from a prefix of that path. Aggregation
//! runs in replicate order, so reports do not depend on the thread count.

mod config;
pub mod diagnostics;

pub use config::{ExperimentConfig, Initial, MomentRun};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::{asymptotic_covariance, moments_by_simulation, SimulatedMoments};
use crate::error::{Error, Result};
use crate::estimate::{Estimator, Observation};
use crate::model::{stationary_moments_closed, ModelParams, StationaryMoments};
use crate::sim::{simulate, simulate_stationary_start, GridSpec, RngStream, SamplePath};
use crate::stats::sufficient_stats_from;
use diagnostics::{covariance, covariance_std_errors, excess_kurtosis, ks_normal, ks_normal_fitted, mean, skewness};

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "AFFINE2F_THREADS";

/// KS critical value factor at level about 0.01: reject when `D > 1.63 / sqrt(N)`.
pub const KS_CRITICAL_01: f64 = 1.63;

/// Relative tolerance on empirical versus theoretical variances.
pub const VARIANCE_REL_TOL: f64 = 0.15;

/// Entrywise covariance tolerance, relative to the largest theoretical diagonal entry.
pub const ENTRY_REL_TOL: f64 = 0.20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateNormality {
    pub coordinate: String,
    /// KS distance from the normal fitted by sample mean and standard deviation.
    pub ks_fitted: f64,
    /// KS distance of `sqrt(T) (estimate - truth) / sqrt(theoretical variance)` from N(0, 1).
    pub ks_theory: Option<f64>,
    pub ks_critical: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceCheck {
    /// `|empirical / theoretical - 1|` for each variance.
    pub variance_rel_err: Vec<f64>,
    /// Largest `|empirical - theoretical|` entry over the largest theoretical variance.
    pub max_entry_err: f64,
    pub variances_within_tol: bool,
    pub entries_within_tol: bool,
}

/// Results for one estimator at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub estimator: Estimator,
    pub horizon: f64,
    pub coordinates: Vec<String>,
    pub truth: Vec<f64>,
    pub n_replicates: usize,
    pub n_valid: usize,
    pub degenerate_count: usize,
    /// One entry per replicate, `null` where a denominator was degenerate.
    pub estimates: Vec<Option<Vec<f64>>>,
    pub mean: Vec<f64>,
    pub bias: Vec<f64>,
    pub bias_se: Vec<f64>,
    pub rmse: Vec<f64>,
    /// Empirical covariance of `sqrt(T) (estimate - truth)`.
    pub scaled_covariance: Vec<Vec<f64>>,
    pub scaled_covariance_se: Vec<Vec<f64>>,
    pub theory_covariance: Option<Vec<Vec<f64>>>,
    pub covariance_check: Option<CovarianceCheck>,
    pub normality: Vec<CoordinateNormality>,
}

impl EstimatorResult {
    /// `sqrt(T) (estimate - truth)` for the valid replicates.
    pub fn scaled_errors(&self) -> Vec<Vec<f64>> {
        let st = self.horizon.sqrt();
        self.estimates
            .iter()
            .flatten()
            .map(|e| e.iter().zip(&self.truth).map(|(v, t)| st * (v - t)).collect())
            .collect()
    }

    pub fn coordinate_index(&self, name: &str) -> Option<usize> {
        self.coordinates.iter().position(|c| c == name)
    }
}

/// Consistency across the horizon ladder for one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyVerdict {
    pub estimator: Estimator,
    pub horizons: Vec<f64>,
    /// `rmse[h][c]`: horizon `h`, coordinate `c`.
    pub rmse: Vec<Vec<f64>>,
    pub rmse_strictly_decreasing: bool,
    /// Final-horizon `bias / bias_se` per coordinate.
    pub final_bias_z: Vec<f64>,
    pub final_bias_within_3se: bool,
    pub degenerate_total: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// SHA-256 of the canonical JSON form of `config`.
    pub config_hash: String,
    pub versions: BTreeMap<String, String>,
    /// Stream of every replicate, in replicate order.
    pub replicate_streams: Vec<RngStream>,
    pub moment_run: Option<SimulatedMoments>,
    /// Moments behind `theory_covariance`.
    pub theory_moments: Option<StationaryMoments>,
    pub results: Vec<EstimatorResult>,
    pub consistency: Vec<ConsistencyVerdict>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn result(&self, est: Estimator, horizon: f64) -> Option<&EstimatorResult> {
        self.results.iter().find(|r| r.estimator == est && r.horizon == horizon)
    }

    pub fn verdict(&self, est: Estimator) -> Option<&ConsistencyVerdict> {
        self.consistency.iter().find(|v| v.estimator == est)
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn versions() -> BTreeMap<String, String> {
    let v = env!("CARGO_PKG_VERSION").to_string();
    ["affine2f", "model", "sim", "stats", "estimate", "asymptotics", "experiment"]
        .iter()
        .map(|k| (k.to_string(), v.clone()))
        .collect()
}

fn truth(p: &ModelParams, coordinates: &[&str]) -> Vec<f64> {
    coordinates
        .iter()
        .map(|c| match *c {
            "a" => p.a,
            "b" => p.b,
            "m" => p.m,
            _ => p.theta,
        })
        .collect()
}

/// Estimates of every estimator at every horizon for one replicate.
type ReplicateOutcome = Vec<Vec<Option<Vec<f64>>>>;

fn simulate_replicate(cfg: &ExperimentConfig, stream: RngStream) -> Result<SamplePath> {
    let t_max = *cfg.horizons.last().expect("validated non-empty");
    let grid = GridSpec::new(t_max, cfg.dt)?;
    match cfg.initial {
        Initial::Stationary { burn_in } => simulate_stationary_start(&cfg.params, grid, burn_in, cfg.scheme, stream),
        Initial::Fixed { y0, x0 } => simulate(&cfg.params, y0, x0, grid, cfg.scheme, stream),
    }
}

fn run_replicate(cfg: &ExperimentConfig, stream: RngStream) -> Result<ReplicateOutcome> {
    let path = simulate_replicate(cfg, stream)?;
    let mut out = Vec::with_capacity(cfg.horizons.len());
    for t in &cfg.horizons {
        let n = GridSpec::new(*t, cfg.dt)?.n_steps;
        let (y, x) = (&path.y[..=n], &path.x[..=n]);
        let stats = match sufficient_stats_from(y, x, cfg.dt) {
            Ok(s) => s,
            Err(e) if e.is_degenerate_input() => {
                out.push(vec![None; cfg.estimators.len()]);
                continue;
            }
            Err(e) => return Err(e),
        };
        let obs = Observation { stats: &stats, x, dt: cfg.dt, discrete_spacing: cfg.lse_discrete_spacing };
        let mut row = Vec::with_capacity(cfg.estimators.len());
        for est in &cfg.estimators {
            let m = if est.needs_known_m() { Some(cfg.m_for_theta()) } else { cfg.m_known };
            let report = est.apply(&obs, m)?;
            row.push(report.ordered_values(m.is_some()));
        }
        out.push(row);
    }
    Ok(out)
}

fn theory_moments(cfg: &ExperimentConfig, warnings: &mut Vec<String>) -> (Option<SimulatedMoments>, Option<StationaryMoments>) {
    let needs_inverse = cfg.estimators.iter().any(|e| matches!(e, Estimator::MleTheta | Estimator::MleFull));
    if needs_inverse {
        let run = cfg.moment_run();
        // Stream id u64::MAX never collides with a replicate index.
        match moments_by_simulation(&cfg.params, run.t_total, run.dt, run.burn_in, RngStream::new(run.seed, u64::MAX)) {
            Ok(sim) => {
                warnings.extend(sim.warnings.iter().cloned());
                let combined = sim.combined();
                (Some(sim), Some(combined))
            }
            Err(e) => {
                warnings.push(format!("no theoretical covariances: {e}"));
                (None, None)
            }
        }
    } else {
        match stationary_moments_closed(&cfg.params) {
            Ok(m) => (None, Some(m)),
            Err(e) => {
                warnings.push(format!("no theoretical covariances: {e}"));
                (None, None)
            }
        }
    }
}

fn summarize(
    est: Estimator,
    horizon: f64,
    coordinates: &[&str],
    truth: Vec<f64>,
    estimates: Vec<Option<Vec<f64>>>,
    theory: Option<Vec<Vec<f64>>>,
) -> EstimatorResult {
    let valid: Vec<&Vec<f64>> = estimates.iter().flatten().collect();
    let n_valid = valid.len();
    let d = coordinates.len();
    let col = |j: usize| valid.iter().map(|e| e[j]).collect::<Vec<f64>>();
    let nan = f64::NAN;
    let mut means = vec![nan; d];
    let mut bias = vec![nan; d];
    let mut bias_se = vec![nan; d];
    let mut rmse = vec![nan; d];
    for j in 0..d {
        let c = col(j);
        if n_valid >= 1 {
            means[j] = mean(&c);
            bias[j] = means[j] - truth[j];
            rmse[j] = (c.iter().map(|v| (v - truth[j]).powi(2)).sum::<f64>() / n_valid as f64).sqrt();
        }
        if n_valid >= 2 {
            bias_se[j] = (diagnostics::variance(&c) / n_valid as f64).sqrt();
        }
    }
    let st = horizon.sqrt();
    let scaled: Vec<Vec<f64>> =
        valid.iter().map(|e| e.iter().zip(&truth).map(|(v, t)| st * (v - t)).collect()).collect();
    let (scaled_covariance, scaled_covariance_se) = if n_valid >= 2 {
        (covariance(&scaled), covariance_std_errors(&scaled))
    } else {
        (vec![vec![nan; d]; d], vec![vec![nan; d]; d])
    };

    let covariance_check = theory.as_ref().filter(|_| n_valid >= 2).map(|th| {
        let variance_rel_err: Vec<f64> = (0..d).map(|j| (scaled_covariance[j][j] / th[j][j] - 1.0).abs()).collect();
        let max_diag = (0..d).map(|j| th[j][j]).fold(0.0, f64::max);
        let max_entry_err = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| (scaled_covariance[i][j] - th[i][j]).abs())
            .fold(0.0, f64::max)
            / max_diag;
        CovarianceCheck {
            variances_within_tol: variance_rel_err.iter().all(|e| *e <= VARIANCE_REL_TOL),
            entries_within_tol: max_entry_err <= ENTRY_REL_TOL,
            variance_rel_err,
            max_entry_err,
        }
    });

    let normality = if n_valid >= 3 {
        (0..d)
            .map(|j| {
                let c: Vec<f64> = scaled.iter().map(|r| r[j]).collect();
                let ks_theory = theory.as_ref().map(|th| {
                    let sd = th[j][j].sqrt();
                    ks_normal(&c.iter().map(|v| v / sd).collect::<Vec<_>>())
                });
                CoordinateNormality {
                    coordinate: coordinates[j].to_string(),
                    ks_fitted: ks_normal_fitted(&c),
                    ks_theory,
                    ks_critical: KS_CRITICAL_01 / (n_valid as f64).sqrt(),
                    skewness: skewness(&c),
                    excess_kurtosis: excess_kurtosis(&c),
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    EstimatorResult {
        estimator: est,
        horizon,
        coordinates: coordinates.iter().map(|c| c.to_string()).collect(),
        truth,
        n_replicates: estimates.len(),
        n_valid,
        degenerate_count: estimates.len() - n_valid,
        estimates,
        mean: means,
        bias,
        bias_se,
        rmse,
        scaled_covariance,
        scaled_covariance_se,
        theory_covariance: theory,
        covariance_check,
        normality,
    }
}

fn consistency_verdict(est: Estimator, results: &[&EstimatorResult]) -> ConsistencyVerdict {
    let rmse: Vec<Vec<f64>> = results.iter().map(|r| r.rmse.clone()).collect();
    let d = rmse.first().map_or(0, Vec::len);
    let rmse_strictly_decreasing = results.len() >= 2 && (0..d).all(|j| rmse.windows(2).all(|w| w[1][j] < w[0][j]));
    let last = results.last().expect("at least one horizon");
    let final_bias_z: Vec<f64> = last.bias.iter().zip(&last.bias_se).map(|(b, s)| b / s).collect();
    let final_bias_within_3se = final_bias_z.iter().all(|z| z.abs() <= 3.0);
    let degenerate_total = results.iter().map(|r| r.degenerate_count).sum();
    ConsistencyVerdict {
        estimator: est,
        horizons: results.iter().map(|r| r.horizon).collect(),
        rmse,
        rmse_strictly_decreasing,
        final_bias_z,
        final_bias_within_3se,
        degenerate_total,
        pass: rmse_strictly_decreasing && final_bias_within_3se,
    }
}

fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

/// Run every replicate and aggregate; `stream_ids` fixes which streams are used, in order.
pub fn run_with_streams(cfg: &ExperimentConfig, stream_ids: &[u64]) -> Result<ExperimentReport> {
    cfg.validate()?;
    if stream_ids.len() != cfg.n_replicates {
        return Err(Error::Config(format!("{} stream ids for {} replicates", stream_ids.len(), cfg.n_replicates)));
    }
    let mut warnings = Vec::new();
    if cfg.params.a <= 0.5 && cfg.estimators.iter().any(|e| matches!(e, Estimator::MleTheta | Estimator::MleFull)) {
        warnings.push(format!("a = {} <= 1/2 is outside the validated range of the MLE", cfg.params.a));
    }
    if !matches!(cfg.params.criticality(), crate::model::Criticality::Subcritical) {
        warnings.push("parameters are not subcritical; estimator theory does not apply".into());
    }
    let streams: Vec<RngStream> = stream_ids.iter().map(|id| RngStream::new(cfg.seed, *id)).collect();
    let outcomes: Vec<ReplicateOutcome> =
        with_thread_pool(|| streams.par_iter().map(|s| run_replicate(cfg, *s)).collect::<Result<Vec<_>>>())??;

    let (moment_run, theory_moments) = theory_moments(cfg, &mut warnings);
    let mut results = Vec::new();
    for (k, est) in cfg.estimators.iter().enumerate() {
        let m_known = est.needs_known_m() || cfg.m_known.is_some();
        let coords = est.coordinates(m_known);
        let theory = match (&theory_moments, est) {
            (_, Estimator::LseDiscrete) => None,
            (Some(mom), _) => match asymptotic_covariance(*est, mom) {
                Ok(c) => c,
                Err(e) => {
                    warnings.push(format!("{est}: no theoretical covariance: {e}"));
                    None
                }
            },
            (None, _) => None,
        };
        for (h, t) in cfg.horizons.iter().enumerate() {
            let estimates = outcomes.iter().map(|o| o[h][k].clone()).collect();
            results.push(summarize(*est, *t, coords, truth(&cfg.params, coords), estimates, theory.clone()));
        }
    }
    let consistency = cfg
        .estimators
        .iter()
        .map(|est| {
            let rs: Vec<&EstimatorResult> = results.iter().filter(|r| r.estimator == *est).collect();
            consistency_verdict(*est, &rs)
        })
        .collect();

    Ok(ExperimentReport {
        config: cfg.clone(),
        config_hash: config_hash(cfg),
        versions: versions(),
        replicate_streams: streams,
        moment_run,
        theory_moments,
        results,
        consistency,
        warnings,
    })
}

/// Run replicates `0..n_replicates`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ids: Vec<u64> = (0..cfg.n_replicates as u64).collect();
    run_with_streams(cfg, &ids)
}

/// Consistency study over the horizon ladder; needs at least two horizons.
pub fn run_consistency(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.horizons.len() < 2 {
        return Err(Error::Config("a consistency run needs at least two horizons".into()));
    }
    run_experiment(cfg)
}

/// Normality study; the covariance checks need at least two valid replicates.
pub fn run_normality(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.n_replicates < 3 {
        return Err(Error::Config("a normality run needs at least three replicates".into()));
    }
    run_experiment(cfg)
}
