//! The deformed difference operator and its kernel of q-periodic
//! functions.
//!
//! D_{su,tu^2} f(x) = (f(u phi x) - f(u phi' x)) / (u (phi - phi') x) for
//! x != 0, and f'(0) at the origin. Functions p(x) = G(log_q x) with G of
//! period one satisfy p(phi x) = p(phi' x), so D annihilates them; they
//! are the source of solution non-uniqueness for the delay equations.

use std::sync::Arc;

use crate::error::{Result, StError};
use crate::params::StParams;

use crate::ward::TruncatedEgf;

/// A real function; boxed so callables can be stored and shared.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Deformed difference quotient of `f` at `x` for deformation `u > 0`.
/// At x = 0 this is f'(0), computed by Richardson-refined central
/// differences over h in {1e-4, 1e-5, 1e-6}.
pub fn st_derivative(f: &dyn Fn(f64) -> f64, p: &StParams, u: f64, x: f64) -> f64 {
    assert!(u > 0.0, "st_derivative requires u > 0");
    if x == 0.0 {
        return derivative_at_zero(f);
    }
    let phi = p.phi().to_f64();
    let phip = p.phi_prime().to_f64();
    (f(u * phi * x) - f(u * phip * x)) / (u * (phi - phip) * x)
}

fn derivative_at_zero(f: &dyn Fn(f64) -> f64) -> f64 {
    // Central differences at three step sizes, Richardson-extrapolated.
    // Steps shrink by 10, so each extrapolation removes the h^2 term with
    // weight 100/(100-1).
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    let (d1, d2, d3) = (d(1e-4), d(1e-5), d(1e-6));
    let r12 = (100.0 * d2 - d1) / 99.0;
    let r23 = (100.0 * d3 - d2) / 99.0;
    (10_000.0 * r23 - r12) / 9_999.0
}

/// Basis action of the undeformed operator on a truncated series:
/// D (x^n/{n}!) = x^{n-1}/{n-1}!, i.e. a coefficient shift.
///
/// # Panics
/// Panics when the series has order 0.
pub fn series_derivative(f: &TruncatedEgf) -> TruncatedEgf {
    assert!(f.order() >= 1, "series_derivative needs order >= 1");
    let coeffs = f.coeffs()[1..].to_vec();
    TruncatedEgf::new(f.params().clone(), coeffs).expect("validity is inherited")
}

/// A q-periodic function p(x) = G(log_q x) with G of period one.
///
/// Needs q in (0,1) or (1,inf), so t < 0 (q < 0 would require the complex
/// logarithm branch and is rejected as unsupported). The constructor
/// samples G on a grid to verify the period.
#[derive(Clone)]
pub struct QPeriodic {
    g: RealFn,
    params: StParams,
}

impl QPeriodic {
    pub fn new(g: RealFn, params: StParams) -> Result<Self> {
        let q = params.q().to_f64();
        if params.is_degenerate_q() {
            return Err(StError::DegenerateQ(
                "q-periodic functions need q != 1".into(),
            ));
        }
        if q < 0.0 {
            return Err(StError::Unsupported(
                "q < 0 periodic functions need the complex logarithm branch".into(),
            ));
        }
        if q == 0.0 {
            return Err(StError::DomainError(
                "q = 0 admits no logarithm base".into(),
            ));
        }
        // Period-one check on a sample grid.
        for i in 0..=16 {
            let y = -2.0 + 0.27 * i as f64;
            if (g(y + 1.0) - g(y)).abs() > 1e-10 * g(y).abs().max(1.0) {
                return Err(StError::DomainError(format!(
                    "G is not 1-periodic at y = {y}"
                )));
            }
        }
        Ok(QPeriodic { g, params })
    }

    pub fn constant(c: f64, params: StParams) -> Result<Self> {
        QPeriodic::new(Arc::new(move |_| c), params)
    }

    pub fn sin2pi(params: StParams) -> Result<Self> {
        QPeriodic::new(
            Arc::new(|y: f64| (2.0 * std::f64::consts::PI * y).sin()),
            params,
        )
    }

    pub fn cos2pi(params: StParams) -> Result<Self> {
        QPeriodic::new(
            Arc::new(|y: f64| (2.0 * std::f64::consts::PI * y).cos()),
            params,
        )
    }

    /// Symmetric triangle wave with period one and range [-1, 1].
    pub fn triangle(params: StParams) -> Result<Self> {
        QPeriodic::new(
            Arc::new(|y: f64| {
                let frac = y - y.floor();
                1.0 - 4.0 * (frac - 0.5).abs()
            }),
            params,
        )
    }

    pub fn params(&self) -> &StParams {
        &self.params
    }

    /// G itself (period-one view).
    pub fn g(&self, y: f64) -> f64 {
        (self.g)(y)
    }
}

/// Evaluate p(x) = G(log_q x); requires x > 0.
pub fn q_periodic_eval(qp: &QPeriodic, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(StError::DomainError(format!(
            "q-periodic functions are defined for x > 0, got {x}"
        )));
    }
    let q = qp.params.q().to_f64();
    Ok(qp.g(x.ln() / q.ln()))
}

/// Residual of the two product rules at `x` (undeformed operator):
/// D(fg)(x) = f(phi x) Dg(x) + g(phi' x) Df(x)
///          = f(phi' x) Dg(x) + g(phi x) Df(x).
/// Returns the larger of the two deviations.
///
/// # Panics
/// Panics at x = 0, where the rules reduce to the ordinary product rule.
pub fn product_rule_residual(
    f: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    p: &StParams,
    x: f64,
) -> f64 {
    assert!(x != 0.0, "product rules are stated for x != 0");
    let phi = p.phi().to_f64();
    let phip = p.phi_prime().to_f64();
    let fg = |y: f64| f(y) * g(y);
    let d_fg = st_derivative(&fg, p, 1.0, x);
    let df = st_derivative(f, p, 1.0, x);
    let dg = st_derivative(g, p, 1.0, x);
    let rule1 = (d_fg - (f(phi * x) * dg + g(phip * x) * df)).abs();
    let rule2 = (d_fg - (f(phip * x) * dg + g(phi * x) * df)).abs();
    rule1.max(rule2)
}
