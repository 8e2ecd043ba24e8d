//! Model parameters, regime classification and the stationary law.
//!
//! The diffusion is
//!
//! ```text
//! dY_t = (a - b Y_t) dt + sqrt(Y_t) dL_t
//! dX_t = (m - theta X_t) dt + sqrt(Y_t) dB_t
//! ```
//!
//! with `L`, `B` independent Brownian motions and `a > 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default step of the Riccati solver.
pub const DEFAULT_RICCATI_STEP: f64 = 1e-3;

/// Largest admissible bound on the neglected tail of `a * int v_s ds`.
pub const CHAR_TAIL_TOL: f64 = 1e-6;

/// Below this magnitude a mean-reversion rate is treated as exactly zero in [`mean_at`].
const ZERO_RATE: f64 = 1e-12;

/// Drift parameters `(a, b, m, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub theta: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, m: f64, theta: f64) -> Result<Self> {
        let p = ModelParams { a, b, m, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.a, self.b, self.m, self.theta].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite parameter in {self:?}")));
        }
        if self.a <= 0.0 {
            return Err(Error::InvalidParams(format!("a must be positive, got {}", self.a)));
        }
        Ok(())
    }

    pub fn criticality(&self) -> Criticality {
        classify(self)
    }

    pub fn require_subcritical(&self) -> Result<()> {
        self.validate()?;
        if classify(self) != Criticality::Subcritical {
            return Err(Error::NotSubcritical { b: self.b, theta: self.theta });
        }
        Ok(())
    }

    /// `a >= 1/2`: the range where `Y` never hits zero from a positive start
    /// and the likelihood is defined.
    pub fn in_mle_range(&self) -> bool {
        self.a >= 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

pub fn classify(p: &ModelParams) -> Criticality {
    if p.b < 0.0 || p.theta < 0.0 {
        Criticality::Supercritical
    } else if p.b > 0.0 && p.theta > 0.0 {
        Criticality::Subcritical
    } else {
        Criticality::Critical
    }
}

/// `int_0^t exp(-c s) ds`, with the `c -> 0` limit handled explicitly.
pub(crate) fn exp_integral(c: f64, t: f64) -> f64 {
    if c.abs() < ZERO_RATE {
        t
    } else {
        -(-c * t).exp_m1() / c
    }
}

/// Expected values `(E Y_t, E X_t)` started from means `(ey0, ex0)`.
pub fn mean_at(p: &ModelParams, ey0: f64, ex0: f64, t: f64) -> (f64, f64) {
    debug_assert!(t >= 0.0);
    let ey = (-p.b * t).exp() * ey0 + p.a * exp_integral(p.b, t);
    let ex = (-p.theta * t).exp() * ex0 + p.m * exp_integral(p.theta, t);
    (ey, ex)
}

/// Where a moment value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    ClosedForm,
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub value: f64,
    pub source: MomentSource,
    /// Batch-means standard error; only set for simulated values.
    pub std_error: Option<f64>,
}

impl Moment {
    pub fn closed(value: f64) -> Self {
        Moment { value, source: MomentSource::ClosedForm, std_error: None }
    }

    pub fn simulated(value: f64, std_error: f64) -> Self {
        Moment { value, source: MomentSource::Simulated, std_error: Some(std_error) }
    }
}

/// The nine stationary expectations entering the asymptotic covariances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StationaryMoments {
    /// E(Y)
    pub ey: Option<Moment>,
    /// E(X)
    pub ex: Option<Moment>,
    /// E(Y^2)
    pub ey2: Option<Moment>,
    /// E(XY)
    pub exy: Option<Moment>,
    /// E(X^2)
    pub ex2: Option<Moment>,
    /// E(X^2 Y)
    pub ex2y: Option<Moment>,
    /// E(1/Y)
    pub e_inv_y: Option<Moment>,
    /// E(X/Y)
    pub ex_over_y: Option<Moment>,
    /// E(X^2/Y)
    pub ex2_over_y: Option<Moment>,
}

/// Names the fields of [`StationaryMoments`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentKind {
    Ey,
    Ex,
    Ey2,
    Exy,
    Ex2,
    Ex2y,
    EInvY,
    ExOverY,
    Ex2OverY,
}

impl MomentKind {
    pub const ALL: [MomentKind; 9] = [
        MomentKind::Ey,
        MomentKind::Ex,
        MomentKind::Ey2,
        MomentKind::Exy,
        MomentKind::Ex2,
        MomentKind::Ex2y,
        MomentKind::EInvY,
        MomentKind::ExOverY,
        MomentKind::Ex2OverY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MomentKind::Ey => "ey",
            MomentKind::Ex => "ex",
            MomentKind::Ey2 => "ey2",
            MomentKind::Exy => "exy",
            MomentKind::Ex2 => "ex2",
            MomentKind::Ex2y => "ex2y",
            MomentKind::EInvY => "e_inv_y",
            MomentKind::ExOverY => "ex_over_y",
            MomentKind::Ex2OverY => "ex2_over_y",
        }
    }

    /// The integrand `f(y, x)` whose stationary mean this moment is.
    pub fn integrand(self, y: f64, x: f64) -> f64 {
        match self {
            MomentKind::Ey => y,
            MomentKind::Ex => x,
            MomentKind::Ey2 => y * y,
            MomentKind::Exy => x * y,
            MomentKind::Ex2 => x * x,
            MomentKind::Ex2y => x * x * y,
            MomentKind::EInvY => 1.0 / y,
            MomentKind::ExOverY => x / y,
            MomentKind::Ex2OverY => x * x / y,
        }
    }

    pub fn is_inverse(self) -> bool {
        matches!(self, MomentKind::EInvY | MomentKind::ExOverY | MomentKind::Ex2OverY)
    }
}

impl StationaryMoments {
    pub fn slot(&self, kind: MomentKind) -> &Option<Moment> {
        match kind {
            MomentKind::Ey => &self.ey,
            MomentKind::Ex => &self.ex,
            MomentKind::Ey2 => &self.ey2,
            MomentKind::Exy => &self.exy,
            MomentKind::Ex2 => &self.ex2,
            MomentKind::Ex2y => &self.ex2y,
            MomentKind::EInvY => &self.e_inv_y,
            MomentKind::ExOverY => &self.ex_over_y,
            MomentKind::Ex2OverY => &self.ex2_over_y,
        }
    }

    pub fn slot_mut(&mut self, kind: MomentKind) -> &mut Option<Moment> {
        match kind {
            MomentKind::Ey => &mut self.ey,
            MomentKind::Ex => &mut self.ex,
            MomentKind::Ey2 => &mut self.ey2,
            MomentKind::Exy => &mut self.exy,
            MomentKind::Ex2 => &mut self.ex2,
            MomentKind::Ex2y => &mut self.ex2y,
            MomentKind::EInvY => &mut self.e_inv_y,
            MomentKind::ExOverY => &mut self.ex_over_y,
            MomentKind::Ex2OverY => &mut self.ex2_over_y,
        }
    }

    /// Value of a moment, or [`Error::MissingMoment`].
    pub fn get(&self, kind: MomentKind) -> Result<f64> {
        self.slot(kind).map(|m| m.value).ok_or(Error::MissingMoment(kind.name()))
    }

    pub fn is_complete(&self) -> bool {
        MomentKind::ALL.iter().all(|k| self.slot(*k).is_some())
    }

    /// Builds a fully closed-form record from raw values, mostly for tests and examples.
    #[allow(clippy::too_many_arguments)]
    pub fn from_values(
        ey: f64,
        ex: f64,
        ey2: f64,
        exy: f64,
        ex2: f64,
        ex2y: f64,
        e_inv_y: f64,
        ex_over_y: f64,
        ex2_over_y: f64,
    ) -> Self {
        let c = |v| Some(Moment::closed(v));
        StationaryMoments {
            ey: c(ey),
            ex: c(ex),
            ey2: c(ey2),
            exy: c(exy),
            ex2: c(ex2),
            ex2y: c(ex2y),
            e_inv_y: c(e_inv_y),
            ex_over_y: c(ex_over_y),
            ex2_over_y: c(ex2_over_y),
        }
    }
}

/// Closed-form stationary moments.
///
/// `ex_over_y` and `ex2_over_y` are left empty; `e_inv_y` is the Gamma(2a, 2b)
/// value `2b / (2a - 1)` and is left empty when `a <= 1/2`, where it is infinite.
pub fn stationary_moments_closed(p: &ModelParams) -> Result<StationaryMoments> {
    p.require_subcritical()?;
    let ModelParams { a, b, m, theta } = *p;
    let ex2y = a / ((b + 2.0 * theta) * 2.0 * b * b * theta * theta)
        * (theta * (a * b + 2.0 * a * theta + theta) + 2.0 * m * m * b * (2.0 * theta + b));
    let c = |v| Some(Moment::closed(v));
    Ok(StationaryMoments {
        ey: c(a / b),
        ex: c(m / theta),
        ey2: c(a * (2.0 * a + 1.0) / (2.0 * b * b)),
        exy: c(m * a / (theta * b)),
        ex2: c((a * theta + 2.0 * b * m * m) / (2.0 * b * theta * theta)),
        ex2y: c(ex2y),
        e_inv_y: if a > 0.5 { c(2.0 * b / (2.0 * a - 1.0)) } else { None },
        ex_over_y: None,
        ex2_over_y: None,
    })
}

/// Right-hand side of the Riccati equation for `v_t(lambda1, lambda2)`.
fn riccati_rhs(p: &ModelParams, lambda2: f64, t: f64, v: f64) -> f64 {
    -p.b * v - 0.5 * v * v + 0.5 * (-2.0 * p.theta * t).exp() * lambda2 * lambda2
}

/// Solution of the Riccati equation at `t_end` together with `int_0^t_end v_s ds`.
///
/// The integral is carried as a second state component so both are advanced by
/// the same Runge-Kutta stages. No sign check is applied to `lambda1`; callers
/// guard the domain.
pub(crate) fn riccati_integrate(
    p: &ModelParams,
    lambda1: f64,
    lambda2: f64,
    t_end: f64,
    h: f64,
    check_sign: bool,
) -> Result<(f64, f64)> {
    if !(h > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParams(format!("need h > 0 and t >= 0, got h = {h}, t = {t_end}")));
    }
    if t_end == 0.0 {
        return Ok((lambda1, 0.0));
    }
    let n = (t_end / h).ceil().max(1.0) as usize;
    let step = t_end / n as f64;
    let tol = 1e-9 * (1.0 + lambda1.abs() + lambda2 * lambda2);

    let mut v = lambda1;
    let mut integral = 0.0;
    for i in 0..n {
        let t = i as f64 * step;
        let k1 = riccati_rhs(p, lambda2, t, v);
        let k2 = riccati_rhs(p, lambda2, t + 0.5 * step, v + 0.5 * step * k1);
        let k3 = riccati_rhs(p, lambda2, t + 0.5 * step, v + 0.5 * step * k2);
        let k4 = riccati_rhs(p, lambda2, t + step, v + step * k3);
        // u' = v, so the stage values of u' are the stage states of v.
        let v2 = v + 0.5 * step * k1;
        let v3 = v + 0.5 * step * k2;
        let v4 = v + step * k3;
        integral += step / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
        v += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !v.is_finite() {
            return Err(Error::StepTooLarge { t: t + step, value: v });
        }
        if check_sign && v < 0.0 {
            if v < -tol {
                return Err(Error::StepTooLarge { t: t + step, value: v });
            }
            v = 0.0;
        }
    }
    Ok((v, integral))
}

/// `v_t(lambda1, lambda2)`, the non-negative solution of
/// `v' = -b v - v^2/2 + exp(-2 theta t) lambda2^2 / 2`, `v_0 = lambda1`,
/// computed with classical fourth-order Runge-Kutta at step `h`.
pub fn riccati_v(p: &ModelParams, lambda1: f64, lambda2: f64, t: f64, h: f64) -> Result<f64> {
    if !(lambda1 >= 0.0) {
        return Err(Error::InvalidParams(format!("lambda1 must be non-negative, got {lambda1}")));
    }
    riccati_integrate(p, lambda1, lambda2, t, h, true).map(|(v, _)| v)
}

/// Default truncation horizon for the characteristic-function integral.
pub fn default_t_max(p: &ModelParams) -> f64 {
    (20.0 / p.b).max(20.0 / p.theta)
}

/// Value of the joint transform `E exp(-lambda1 Y + i lambda2 X)` of the
/// stationary law, with the truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharValue {
    pub re: f64,
    pub im: f64,
    pub t_max: f64,
    /// Upper bound on the neglected `a * int_{t_max}^inf v_s ds`.
    pub tail_bound: f64,
}

impl CharValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn modulus(&self) -> f64 {
        self.value().norm()
    }
}

/// Tail bound from the linearisation `v' <= -b v + exp(-2 theta t) lambda2^2 / 2`.
fn char_tail_bound(p: &ModelParams, lambda2: f64, t_max: f64, v_end: f64) -> f64 {
    p.a * (v_end / p.b + lambda2 * lambda2 * (-2.0 * p.theta * t_max).exp() / (4.0 * p.theta * p.b))
}

pub(crate) fn char_unchecked(
    p: &ModelParams,
    lambda1: f64,
    lambda2: f64,
    t_max: f64,
    h: f64,
) -> Result<CharValue> {
    let (v_end, integral) = riccati_integrate(p, lambda1, lambda2, t_max, h, lambda1 >= 0.0)?;
    let tail_bound = char_tail_bound(p, lambda2, t_max, v_end.max(0.0));
    let value = Complex64::new(-p.a * integral, p.m / p.theta * lambda2).exp();
    Ok(CharValue { re: value.re, im: value.im, t_max, tail_bound })
}

/// Stationary characteristic function `exp(-a int_0^t_max v_s ds + i (m/theta) lambda2)`.
pub fn stationary_char(
    p: &ModelParams,
    lambda1: f64,
    lambda2: f64,
    t_max: f64,
    h: f64,
) -> Result<CharValue> {
    p.require_subcritical()?;
    if !(lambda1 >= 0.0) {
        return Err(Error::InvalidParams(format!("lambda1 must be non-negative, got {lambda1}")));
    }
    let out = char_unchecked(p, lambda1, lambda2, t_max, h)?;
    if out.tail_bound > CHAR_TAIL_TOL {
        return Err(Error::TruncationTooShort { t_max, tail: out.tail_bound, tol: CHAR_TAIL_TOL });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(a: f64, b: f64, m: f64, theta: f64) -> ModelParams {
        ModelParams::new(a, b, m, theta).unwrap()
    }

    fn logistic(lambda1: f64, b: f64, t: f64) -> f64 {
        let e = (-b * t).exp();
        lambda1 * e / (1.0 + lambda1 * (1.0 - e) / (2.0 * b))
    }

    #[test]
    fn rejects_non_positive_a() {
        assert!(ModelParams::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&params(1.0, 1.0, 0.0, 1.0)), Criticality::Subcritical);
        assert_eq!(classify(&params(1.0, 0.0, 0.0, 0.0)), Criticality::Critical);
        assert_eq!(classify(&params(1.0, 2.0, 0.0, -0.1)), Criticality::Supercritical);
    }

    #[test]
    fn classify_sign_table() {
        use Criticality::*;
        let signs = [-1.0, 0.0, 1.0];
        for &b in &signs {
            for &theta in &signs {
                let expected = if b < 0.0 || theta < 0.0 {
                    Supercritical
                } else if b > 0.0 && theta > 0.0 {
                    Subcritical
                } else {
                    Critical
                };
                assert_eq!(classify(&params(1.0, b, 0.0, theta)), expected, "b={b} theta={theta}");
            }
        }
    }

    #[test]
    fn mean_at_examples() {
        let (ey, _) = mean_at(&params(2.0, 0.0, 0.0, 0.0), 1.0, 0.0, 3.0);
        assert_relative_eq!(ey, 7.0, epsilon = 1e-14);

        let p = params(1.0, 1.0, 1.0, 1.0);
        assert_eq!(mean_at(&p, 0.3, -2.0, 0.0), (0.3, -2.0));
        let (ey, ex) = mean_at(&p, 0.0, 0.0, 60.0);
        assert_relative_eq!(ey, 1.0, epsilon = 1e-12);
        assert_relative_eq!(ex, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mean_at_continuous_at_zero_rate() {
        let eps = 1e-8;
        for t in [0.5, 1.0, 4.0] {
            let limit = mean_at(&params(1.5, 0.0, 0.7, 0.0), 2.0, -1.0, t);
            let near = mean_at(&params(1.5, eps, 0.7, eps), 2.0, -1.0, t);
            assert!((limit.0 - near.0).abs() < 1e-6);
            assert!((limit.1 - near.1).abs() < 1e-6);
        }
    }

    #[test]
    fn closed_moments_unit_params() {
        let mom = stationary_moments_closed(&params(1.0, 1.0, 1.0, 1.0)).unwrap();
        assert_relative_eq!(mom.get(MomentKind::Ey).unwrap(), 1.0);
        assert_relative_eq!(mom.get(MomentKind::Ex).unwrap(), 1.0);
        assert_relative_eq!(mom.get(MomentKind::Ey2).unwrap(), 1.5);
        assert_relative_eq!(mom.get(MomentKind::Exy).unwrap(), 1.0);
        assert_relative_eq!(mom.get(MomentKind::Ex2).unwrap(), 1.5);
        assert_relative_eq!(mom.get(MomentKind::Ex2y).unwrap(), 5.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(mom.get(MomentKind::EInvY).unwrap(), 2.0);
        assert!(mom.ex_over_y.is_none() && mom.ex2_over_y.is_none());
    }

    #[test]
    fn closed_moments_zero_m_and_small_a() {
        let mom = stationary_moments_closed(&params(1.0, 2.0, 0.0, 1.0)).unwrap();
        assert_eq!(mom.get(MomentKind::Ex).unwrap(), 0.0);
        assert_eq!(mom.get(MomentKind::Exy).unwrap(), 0.0);

        let mom = stationary_moments_closed(&params(0.5, 1.0, 0.0, 1.0)).unwrap();
        assert!(mom.e_inv_y.is_none());
        assert_eq!(
            stationary_moments_closed(&params(1.0, 0.0, 0.0, 1.0)),
            Err(Error::NotSubcritical { b: 0.0, theta: 1.0 })
        );
    }

    #[test]
    fn inverse_moment_matches_gamma_quadrature() {
        // E(1/Y) for Y ~ Gamma(shape 2a, rate 2b), by midpoint quadrature of y^{-1} f(y).
        let (a, b) = (1.3_f64, 0.8_f64);
        let shape = 2.0 * a;
        let rate = 2.0 * b;
        let log_norm = shape * rate.ln() - libm::lgamma(shape);
        let dy = 1e-4;
        let mut acc = 0.0;
        for i in 0..400_000 {
            let y = (i as f64 + 0.5) * dy;
            acc += (log_norm + (shape - 2.0) * y.ln() - rate * y).exp() * dy;
        }
        let mom = stationary_moments_closed(&params(a, b, 0.0, 1.0)).unwrap();
        assert_relative_eq!(mom.get(MomentKind::EInvY).unwrap(), acc, max_relative = 1e-4);
    }

    #[test]
    fn riccati_zero_is_fixed_point() {
        let p = params(1.0, 1.0, 0.0, 1.0);
        for t in [0.0, 0.5, 3.0] {
            assert_eq!(riccati_v(&p, 0.0, 0.0, t, 1e-3).unwrap(), 0.0);
        }
    }

    #[test]
    fn riccati_matches_logistic_closed_form() {
        let b = 1.0;
        let p = params(1.0, b, 0.0, 1.0);
        let v1 = riccati_v(&p, 1.0, 0.0, 1.0, 1e-3).unwrap();
        assert!((v1 - 0.279_531).abs() < 5e-6, "{v1}");
        for lambda1 in [0.1, 1.0, 7.5] {
            for k in 0..=20 {
                let t = 0.5 * k as f64;
                let v = riccati_v(&p, lambda1, 0.0, t, 1e-3).unwrap();
                assert!((v - logistic(lambda1, b, t)).abs() < 1e-8, "lambda1={lambda1} t={t}");
            }
        }
    }

    #[test]
    fn riccati_coarse_step_is_reported() {
        let p = params(1.0, 1.0, 0.0, 1.0);
        assert!(matches!(
            riccati_v(&p, 1e3, 0.0, 1.0, 0.5),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn char_normalisation_and_gamma_laplace() {
        let p = params(1.0, 1.0, 0.3, 1.0);
        let h = DEFAULT_RICCATI_STEP;
        let tm = default_t_max(&p);
        let one = stationary_char(&p, 0.0, 0.0, tm, h).unwrap();
        assert_relative_eq!(one.re, 1.0, epsilon = 1e-15);
        assert_eq!(one.im, 0.0);

        let q = stationary_char(&p, 2.0, 0.0, tm, h).unwrap();
        assert!((q.re - 0.25).abs() < 1e-6);
    }

    #[test]
    fn char_truncation_too_short() {
        let p = params(2.0, 1.0, 0.0, 1.0);
        assert!(matches!(
            stationary_char(&p, 5.0, 0.0, 2.0, 1e-3),
            Err(Error::TruncationTooShort { .. })
        ));
    }

    #[test]
    fn char_derivative_recovers_mean() {
        // Central difference of the Laplace transform at the origin.
        let p = params(1.7, 0.9, 0.0, 1.2);
        let h = 1e-5;
        let tm = default_t_max(&p);
        let plus = char_unchecked(&p, h, 0.0, tm, 1e-3).unwrap().re;
        let minus = char_unchecked(&p, -h, 0.0, tm, 1e-3).unwrap().re;
        let deriv = -(plus - minus) / (2.0 * h);
        assert_relative_eq!(deriv, p.a / p.b, max_relative = 1e-4);
    }

    #[test]
    fn char_gaussian_phase_when_y_is_ignored() {
        // Phase is m/theta * lambda2 regardless of the Riccati integral.
        let p = params(1.0, 1.0, 2.0, 1.0);
        let c = stationary_char(&p, 0.0, 0.5, default_t_max(&p), 1e-3).unwrap();
        let arg = c.value().arg();
        assert_relative_eq!(arg, 1.0, epsilon = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn closed_moments_strict_inequalities(
            a in 0.55f64..4.0, b in 0.2f64..3.0, m in -2.0f64..2.0, theta in 0.2f64..3.0,
        ) {
            let mom = stationary_moments_closed(&params(a, b, m, theta)).unwrap();
            let g = |k| mom.get(k).unwrap();
            let (ey, ex, ey2, exy, ex2, ex2y, einv) = (
                g(MomentKind::Ey), g(MomentKind::Ex), g(MomentKind::Ey2), g(MomentKind::Exy),
                g(MomentKind::Ex2), g(MomentKind::Ex2y), g(MomentKind::EInvY),
            );
            prop_assert!(ey > 0.0);
            prop_assert!(ey2 > ey * ey);
            prop_assert!(ex2 > ex * ex);
            prop_assert!(einv * ey > 1.0);
            prop_assert!(ex2 * ey2 > exy * exy);
            prop_assert!(ex2y * ey > exy * exy);
        }

        #[test]
        fn char_modulus_at_most_one(lambda2 in -6.0f64..6.0, m in -2.0f64..2.0) {
            let p = params(1.2, 0.8, m, 1.1);
            let c = stationary_char(&p, 0.0, lambda2, default_t_max(&p), 2e-3).unwrap();
            prop_assert!(c.modulus() <= 1.0 + 1e-12);
        }
    }
}
