//! Sample-path generation on a uniform grid.

mod cir;
mod io;
mod rng;

pub use cir::CirTransition;
pub use rng::RngStream;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{exp_integral, ModelParams};
use rng::Channel;

/// Uniform time grid `0, dt, ..., n_steps * dt = t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_end: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl GridSpec {
    /// Grid for horizon `t_end` with step `dt`; `t_end` must be an integer multiple of `dt`.
    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidGrid(format!("t_end must be positive, got {t_end}")));
        }
        let n = (t_end / dt).round();
        if n < 1.0 || (n * dt - t_end).abs() > 1e-9 * t_end {
            return Err(Error::InvalidGrid(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
        }
        Ok(GridSpec { t_end, dt, n_steps: n as usize })
    }

    pub fn from_steps(n_steps: usize, dt: f64) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidGrid("need at least one step".into()));
        }
        GridSpec::new(n_steps as f64 * dt, dt)
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }
}

/// Discretisation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exact noncentral chi-square step for `Y`, conditionally Gaussian step for `X`.
    #[default]
    #[serde(alias = "exact_cir_cond_gauss_x")]
    Exact,
    /// Full-truncation Euler for both coordinates.
    #[serde(alias = "euler_full_truncation")]
    Euler,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact_cir_cond_gauss_x" => Ok(Scheme::Exact),
            "euler" | "euler_full_truncation" => Ok(Scheme::Euler),
            other => Err(Error::Config(format!("unknown scheme `{other}` (expected exact or euler)"))),
        }
    }
}

/// One discretised trajectory of `(Y, X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub grid: GridSpec,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    /// The stream that generated the path, if any.
    pub seed: Option<RngStream>,
}

impl SamplePath {
    pub fn new(grid: GridSpec, y: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        let n = grid.n_steps + 1;
        if y.len() != n || x.len() != n {
            return Err(Error::LengthMismatch { left: y.len().max(x.len()), right: n });
        }
        if let Some(i) = y.iter().position(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParams(format!("y[{i}] = {} is negative", y[i])));
        }
        Ok(SamplePath { grid, y, x, seed: None })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.grid.time(i))
    }

    /// The first `n_steps` steps as a new path.
    pub fn prefix(&self, n_steps: usize) -> Result<SamplePath> {
        if n_steps == 0 || n_steps > self.grid.n_steps {
            return Err(Error::InvalidGrid(format!(
                "prefix of {n_steps} steps from a path of {}",
                self.grid.n_steps
            )));
        }
        Ok(SamplePath {
            grid: GridSpec::from_steps(n_steps, self.grid.dt)?,
            y: self.y[..=n_steps].to_vec(),
            x: self.x[..=n_steps].to_vec(),
            seed: self.seed,
        })
    }
}

/// Single-step propagator shared by the path simulators and the ergodic averages.
pub(crate) struct Stepper {
    p: ModelParams,
    dt: f64,
    scheme: Scheme,
    cir: CirTransition,
    x_decay: f64,
    x_decay_sq: f64,
    x_drift: f64,
    sqrt_dt: f64,
    rng_l: ChaCha8Rng,
    rng_b: ChaCha8Rng,
}

impl Stepper {
    pub(crate) fn new(p: &ModelParams, dt: f64, scheme: Scheme, stream: RngStream) -> Self {
        let x_decay = (-p.theta * dt).exp();
        Stepper {
            p: *p,
            dt,
            scheme,
            cir: CirTransition::new(p.a, p.b, dt),
            x_decay,
            x_decay_sq: x_decay * x_decay,
            x_drift: p.m * exp_integral(p.theta, dt),
            sqrt_dt: dt.sqrt(),
            rng_l: stream.generator(Channel::L),
            rng_b: stream.generator(Channel::B),
        }
    }

    /// Draw from the Gamma(2a, rate 2b) stationary law of `Y`.
    pub(crate) fn stationary_y(&mut self) -> f64 {
        Gamma::new(2.0 * self.p.a, 1.0 / (2.0 * self.p.b))
            .expect("subcritical parameters")
            .sample(&mut self.rng_l)
    }

    pub(crate) fn step(&mut self, y: f64, x: f64) -> (f64, f64) {
        match self.scheme {
            Scheme::Exact => {
                let y_next = self.cir.sample(y, &mut self.rng_l);
                // Trapezoid rule for int_0^dt exp(-2 theta (dt - u)) Y_u du.
                let var = 0.5 * self.dt * (self.x_decay_sq * y + y_next);
                let z: f64 = StandardNormal.sample(&mut self.rng_b);
                (y_next, self.x_decay * x + self.x_drift + var.sqrt() * z)
            }
            Scheme::Euler => {
                let dl = self.sqrt_dt * self.rng_l.sample::<f64, _>(StandardNormal);
                let db = self.sqrt_dt * self.rng_b.sample::<f64, _>(StandardNormal);
                euler_step(&self.p, self.dt, y, x, dl, db)
            }
        }
    }
}

fn euler_step(p: &ModelParams, dt: f64, y: f64, x: f64, dl: f64, db: f64) -> (f64, f64) {
    let yp = y.max(0.0);
    let vol = yp.sqrt();
    let y_next = (y + (p.a - p.b * yp) * dt + vol * dl).max(0.0);
    let x_next = x + (p.m - p.theta * x) * dt + vol * db;
    (y_next, x_next)
}

fn run(stepper: &mut Stepper, grid: GridSpec, y0: f64, x0: f64) -> (Vec<f64>, Vec<f64>) {
    let mut y = Vec::with_capacity(grid.n_steps + 1);
    let mut x = Vec::with_capacity(grid.n_steps + 1);
    let (mut yc, mut xc) = (y0, x0);
    y.push(yc);
    x.push(xc);
    for _ in 0..grid.n_steps {
        (yc, xc) = stepper.step(yc, xc);
        y.push(yc);
        x.push(xc);
    }
    (y, x)
}

/// Simulate one path from `(y0, x0)`.
pub fn simulate(
    p: &ModelParams,
    y0: f64,
    x0: f64,
    grid: GridSpec,
    scheme: Scheme,
    rng: RngStream,
) -> Result<SamplePath> {
    p.validate()?;
    if !(y0 >= 0.0) {
        return Err(Error::NegativeY0(y0));
    }
    if !x0.is_finite() {
        return Err(Error::InvalidParams(format!("x0 must be finite, got {x0}")));
    }
    let mut stepper = Stepper::new(p, grid.dt, scheme, rng);
    let (y, x) = run(&mut stepper, grid, y0, x0);
    Ok(SamplePath { grid, y, x, seed: Some(rng) })
}

/// Number of whole steps covering `burn_in`.
pub(crate) fn burn_in_steps(burn_in: f64, dt: f64) -> Result<usize> {
    if !(burn_in >= 0.0) || !burn_in.is_finite() {
        return Err(Error::InvalidGrid(format!("burn_in must be non-negative, got {burn_in}")));
    }
    Ok((burn_in / dt).round() as usize)
}

/// Simulate with `Y_0 ~ Gamma(2a, 2b)` and `X_0` taken from a burn-in run of
/// length `burn_in` started at `m / theta`. Returns the segment after burn-in.
pub fn simulate_stationary_start(
    p: &ModelParams,
    grid: GridSpec,
    burn_in: f64,
    scheme: Scheme,
    rng: RngStream,
) -> Result<SamplePath> {
    p.require_subcritical()?;
    let burn = burn_in_steps(burn_in, grid.dt)?;
    let mut stepper = Stepper::new(p, grid.dt, scheme, rng);
    let (mut y0, mut x0) = (stepper.stationary_y(), p.m / p.theta);
    for _ in 0..burn {
        (y0, x0) = stepper.step(y0, x0);
    }
    let (y, x) = run(&mut stepper, grid, y0, x0);
    Ok(SamplePath { grid, y, x, seed: Some(rng) })
}

/// Brownian increments of `(L, B)` on a uniform grid, for coupled refinement studies.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianIncrements {
    pub dt: f64,
    pub dl: Vec<f64>,
    pub db: Vec<f64>,
}

impl BrownianIncrements {
    /// Draws the same normals, in the same order, as the Euler scheme of [`simulate`].
    pub fn generate(n_steps: usize, dt: f64, rng: RngStream) -> Self {
        let sd = dt.sqrt();
        let mut rl = rng.generator(Channel::L);
        let mut rb = rng.generator(Channel::B);
        let mut dl = Vec::with_capacity(n_steps);
        let mut db = Vec::with_capacity(n_steps);
        for _ in 0..n_steps {
            dl.push(sd * rl.sample::<f64, _>(StandardNormal));
            db.push(sd * rb.sample::<f64, _>(StandardNormal));
        }
        BrownianIncrements { dt, dl, db }
    }

    /// Sum consecutive blocks of `factor` increments.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.dl.len().is_multiple_of(factor) {
            return Err(Error::InvalidGrid(format!(
                "cannot coarsen {} increments by {factor}",
                self.dl.len()
            )));
        }
        let sum = |v: &[f64]| v.chunks(factor).map(|c| c.iter().sum()).collect();
        Ok(BrownianIncrements { dt: self.dt * factor as f64, dl: sum(&self.dl), db: sum(&self.db) })
    }

    pub fn n_steps(&self) -> usize {
        self.dl.len()
    }
}

/// Full-truncation Euler path driven by prescribed increments.
pub fn simulate_euler_driven(
    p: &ModelParams,
    y0: f64,
    x0: f64,
    increments: &BrownianIncrements,
) -> Result<SamplePath> {
    p.validate()?;
    if !(y0 >= 0.0) {
        return Err(Error::NegativeY0(y0));
    }
    let grid = GridSpec::from_steps(increments.n_steps(), increments.dt)?;
    let mut y = Vec::with_capacity(grid.n_steps + 1);
    let mut x = Vec::with_capacity(grid.n_steps + 1);
    let (mut yc, mut xc) = (y0, x0);
    y.push(yc);
    x.push(xc);
    for (dl, db) in increments.dl.iter().zip(&increments.db) {
        (yc, xc) = euler_step(p, grid.dt, yc, xc, *dl, *db);
        y.push(yc);
        x.push(xc);
    }
    Ok(SamplePath { grid, y, x, seed: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        let g = GridSpec::new(10.0, 0.01).unwrap();
        assert_eq!(g.n_steps, 1000);
        assert!(GridSpec::new(1.0, 0.3).is_err());
        assert!(GridSpec::new(1.0, 0.0).is_err());
        assert!(GridSpec::new(-1.0, 0.1).is_err());
        assert!(GridSpec::from_steps(0, 0.1).is_err());
    }

    #[test]
    fn simulate_rejects_negative_start() {
        let g = GridSpec::new(1.0, 0.1).unwrap();
        assert_eq!(
            simulate(&unit(), -0.1, 0.0, g, Scheme::Exact, RngStream::new(1, 0)),
            Err(Error::NegativeY0(-0.1))
        );
    }

    #[test]
    fn same_stream_is_bit_identical() {
        let g = GridSpec::new(5.0, 0.01).unwrap();
        for scheme in [Scheme::Exact, Scheme::Euler] {
            let a = simulate(&unit(), 1.0, 0.0, g, scheme, RngStream::new(9, 2)).unwrap();
            let b = simulate(&unit(), 1.0, 0.0, g, scheme, RngStream::new(9, 2)).unwrap();
            assert_eq!(a, b);
            let c = simulate(&unit(), 1.0, 0.0, g, scheme, RngStream::new(9, 3)).unwrap();
            assert_ne!(a.y, c.y);
        }
    }

    #[test]
    fn euler_matches_driven_version() {
        let p = ModelParams::new(0.3, 0.5, -1.0, 2.0).unwrap();
        let g = GridSpec::new(4.0, 0.01).unwrap();
        let s = RngStream::new(3, 1);
        let a = simulate(&p, 0.4, 1.0, g, Scheme::Euler, s).unwrap();
        let b = simulate_euler_driven(&p, 0.4, 1.0, &BrownianIncrements::generate(g.n_steps, g.dt, s)).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn y_non_negative_both_schemes() {
        // a < 1/2 so zero is reachable.
        let p = ModelParams::new(0.2, 1.0, 0.0, 1.0).unwrap();
        let g = GridSpec::new(20.0, 0.05).unwrap();
        for scheme in [Scheme::Exact, Scheme::Euler] {
            for id in 0..20 {
                let path = simulate(&p, 0.1, 0.0, g, scheme, RngStream::new(5, id)).unwrap();
                assert!(path.y.iter().all(|v| *v >= 0.0));
                assert_eq!(path.y.len(), g.n_steps + 1);
                assert_eq!(path.x.len(), g.n_steps + 1);
            }
        }
    }

    #[test]
    fn coarsen_sums_blocks() {
        let inc = BrownianIncrements { dt: 0.5, dl: vec![1.0, 2.0, 3.0, 4.0], db: vec![0.0, 1.0, 0.0, -1.0] };
        let c = inc.coarsen(2).unwrap();
        assert_eq!(c.dt, 1.0);
        assert_eq!(c.dl, vec![3.0, 7.0]);
        assert_eq!(c.db, vec![1.0, -1.0]);
        assert!(inc.coarsen(3).is_err());
    }

    #[test]
    fn stationary_start_requires_subcritical() {
        let p = ModelParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let g = GridSpec::new(1.0, 0.1).unwrap();
        assert!(matches!(
            simulate_stationary_start(&p, g, 0.0, Scheme::Exact, RngStream::new(1, 1)),
            Err(Error::NotSubcritical { .. })
        ));
    }

    #[test]
    fn prefix_keeps_leading_points() {
        let g = GridSpec::new(2.0, 0.1).unwrap();
        let path = simulate(&unit(), 1.0, 0.0, g, Scheme::Exact, RngStream::new(1, 1)).unwrap();
        let pre = path.prefix(5).unwrap();
        assert_eq!(pre.grid.n_steps, 5);
        assert_eq!(&pre.y[..], &path.y[..6]);
        assert!(path.prefix(21).is_err());
    }
}
