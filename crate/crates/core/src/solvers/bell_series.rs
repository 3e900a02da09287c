//! Series solver for the autonomous delay equation D y = f(y(ux)) via
//! partial Bell polynomials.
//!
//! Writing y(x) = sum y_n x^n/n! (classical basis), the coefficients obey
//! y_1 = f(y_0) and
//! y_{n+1} = (n+1) u^n / {n+1}_{s,t} * sum_k f^(k)(y_0) B_{n,k}(y_1,...),
//! which is exact arithmetic when f is a polynomial and the inputs are
//! rational.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::One;

use crate::bell::{partial_bell, BellArgs};
use crate::error::Result;
use crate::expr::ExprAst;
use crate::params::StParams;
use crate::scalar::Scalar;
use crate::sequences::st_numbers_upto;
use crate::solvers::poly::expr_to_poly_in_y;
use crate::solvers::{residual_on_lattice, SolveReport};
use crate::ward::TruncatedEgf;

/// Derivative values f^(k)(y0) for k = 0..deg(f) of a polynomial given by
/// its coefficient vector.
fn poly_derivatives_at(coeffs: &[Scalar], y0: &Scalar) -> Vec<Scalar> {
    let mut out = Vec::new();
    let mut current = coeffs.to_vec();
    loop {
        // evaluate current at y0
        let mut acc = Scalar::zero();
        for c in current.iter().rev() {
            acc = &(&acc * y0) + c;
        }
        out.push(acc);
        if current.len() <= 1 {
            break;
        }
        // formal derivative
        current = current
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| &Scalar::from_int(i as i64) * c)
            .collect();
    }
    out
}

fn factorial_scalar(n: u32) -> Scalar {
    let mut acc = BigInt::one();
    for i in 2..=n as u64 {
        acc *= i;
    }
    Scalar::Exact(BigRational::from(acc))
}

/// Classical-basis coefficients y_0..y_order of the solution of
/// D y = f(y(ux)), y(0) = y0, where `f` is given as an expression in y.
pub fn bell_solution_coefficients(
    p: &StParams,
    f: &ExprAst,
    u: &Scalar,
    y0: &Scalar,
    order: usize,
) -> Result<Vec<Scalar>> {
    let f_coeffs = expr_to_poly_in_y(f, 64)?;
    let derivs = poly_derivatives_at(&f_coeffs, y0);
    let seq = st_numbers_upto(p.s(), p.t(), order as u32 + 1);
    let mut ys: Vec<Scalar> = vec![y0.clone()];
    if order >= 1 {
        ys.push(derivs[0].clone());
    }
    for n in 1..order as u32 {
        // y_{n+1} = (n+1) u^n / {n+1} * sum_k f^(k)(y0) B_{n,k}(y_1..y_{n-k+1})
        let mut sum = Scalar::zero();
        let k_max = (derivs.len() as u32 - 1).min(n);
        for k in 1..=k_max {
            if derivs[k as usize].is_zero() {
                continue;
            }
            let xs: Vec<Scalar> = (1..=(n - k + 1))
                .map(|i| ys[i as usize].clone())
                .collect();
            let b = partial_bell(&BellArgs::new(n, k, xs)?);
            sum = &sum + &(&derivs[k as usize] * &b);
        }
        let factor = &(&Scalar::from_int(n as i64 + 1) * &u.powu(n)) / &seq[n as usize + 1];
        ys.push(&factor * &sum);
    }
    Ok(ys)
}

/// Convert classical coefficients y_n (basis x^n/n!) into Ward-basis
/// coefficients a_n = y_n {n}!/n!.
pub fn classical_to_ward(p: &StParams, ys: &[Scalar]) -> Result<TruncatedEgf> {
    let seq = st_numbers_upto(p.s(), p.t(), ys.len() as u32);
    let mut st_fact = Scalar::one();
    let mut coeffs = Vec::with_capacity(ys.len());
    for (n, y) in ys.iter().enumerate() {
        if n > 0 {
            st_fact = &st_fact * &seq[n];
        }
        let a = &(y * &st_fact) / &factorial_scalar(n as u32);
        coeffs.push(a);
    }
    TruncatedEgf::new(p.clone(), coeffs)
}

/// Residual-lattice endpoint: 1 capped by 80% of the radius estimated
/// from the trailing classical coefficients (entire solutions keep 1).
fn residual_x_max(ys: &[Scalar]) -> f64 {
    let nonzero: Vec<(usize, f64)> = ys
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| {
            // ordinary coefficient |y_n/n!|
            (i, (c.to_f64() / factorial_scalar(i as u32).to_f64()).abs())
        })
        .collect();
    if nonzero.len() < 2 {
        return 1.0;
    }
    let (i, a) = nonzero[nonzero.len() - 2];
    let (j, b) = nonzero[nonzero.len() - 1];
    let growth = (b / a).powf(1.0 / (j - i) as f64);
    if growth <= 0.0 || !growth.is_finite() {
        return 1.0;
    }
    (0.8 / growth).min(1.0)
}

/// Solve D y = f(y(ux)), y(0) = y0 by the Bell-polynomial recursion.
/// `f` is an expression in the single variable y (the delayed value).
pub fn bell_autonomous_solve(
    p: &StParams,
    f: &ExprAst,
    u: &Scalar,
    y0: &Scalar,
    order: usize,
) -> Result<SolveReport> {
    let ys = bell_solution_coefficients(p, f, u, y0, order)?;
    let series = classical_to_ward(p, &ys)?;
    let uf = u.to_f64();
    let x_max = residual_x_max(&ys);
    let f_coeffs = expr_to_poly_in_y(f, 64)?;
    let f_eval = |v: f64| {
        let mut acc = 0.0;
        for c in f_coeffs.iter().rev() {
            acc = acc * v + c.to_f64();
        }
        acc
    };
    let y = |x: f64| series.eval(x);
    let rhs = move |_x: f64, _yx: f64, yux: f64| f_eval(yux);
    let (lattice, max_residual) = residual_on_lattice(p, uf, &y, &rhs, x_max)?;
    Ok(SolveReport {
        series: Some(series),
        lattice,
        max_residual,
        error_bound: None,
        region: None,
        diffs: None,
    })
}
