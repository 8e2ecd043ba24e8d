//! Exact transition of the square-root factor.
//!
//! Over a step `dt`, `Y_{t+dt} / c` given `Y_t = y` is noncentral chi-square with
//! `4a` degrees of freedom and noncentrality `y exp(-b dt) / c`, where
//! `c = (1 - exp(-b dt)) / (4b)` (unit diffusion coefficient).

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, Poisson, StandardNormal};

use crate::model::exp_integral;

#[derive(Debug, Clone)]
pub struct CirTransition {
    scale: f64,
    decay: f64,
    df: f64,
    /// chi-square with `df - 1` degrees of freedom, when `df > 1`.
    central: Option<ChiSquared<f64>>,
}

impl CirTransition {
    pub fn new(a: f64, b: f64, dt: f64) -> Self {
        let scale = exp_integral(b, dt) / 4.0;
        let df = 4.0 * a;
        let central = if df > 1.0 { Some(ChiSquared::new(df - 1.0).expect("df - 1 > 0")) } else { None };
        CirTransition { scale, decay: (-b * dt).exp(), df, central }
    }

    /// `E(Y_{t+dt} | Y_t = y)`.
    pub fn mean(&self, y: f64) -> f64 {
        self.scale * (self.df + self.noncentrality(y))
    }

    /// `Var(Y_{t+dt} | Y_t = y)`.
    pub fn variance(&self, y: f64) -> f64 {
        self.scale * self.scale * 2.0 * (self.df + 2.0 * self.noncentrality(y))
    }

    fn noncentrality(&self, y: f64) -> f64 {
        y * self.decay / self.scale
    }

    pub fn sample<R: Rng + ?Sized>(&self, y: f64, rng: &mut R) -> f64 {
        let lambda = self.noncentrality(y);
        let chi2 = match &self.central {
            Some(central) => {
                let z: f64 = StandardNormal.sample(rng);
                let shifted = z + lambda.sqrt();
                shifted * shifted + central.sample(rng)
            }
            None => {
                // Poisson mixture of central chi-squares.
                let n = if lambda > 0.0 {
                    Poisson::new(0.5 * lambda).expect("positive rate").sample(rng)
                } else {
                    0.0
                };
                let shape = 0.5 * self.df + n;
                Gamma::new(shape, 2.0).expect("positive shape").sample(rng)
            }
        };
        self.scale * chi2
    }
}
