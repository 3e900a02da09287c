//! Deformed exponential functions.
//!
//! exp_{s,t}(z,u) = sum u^C(n,2) z^n/{n}_{s,t}!, with the two named
//! instances Exp (u = phi) and Exp' (u = phi'). Exp and Exp' also have
//! infinite-product representations, which extend them meromorphically
//! beyond the series disk; the product of Exp(z) with Exp'(-z) telescopes
//! to 1. The (p,q)-power (x (-) a)^n and the binomial exponential
//! Exp(ax) Exp'(-ay) come with it.

use serde::Serialize;

use crate::error::{Result, StError};
use crate::params::{QRegime, Root, StParams};
use crate::scalar::Scalar;
use crate::sequences::{binom2, fibonomial_raw, st_numbers_upto};

/// Which deformation parameter an exponential uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExpKind {
    Deformed(f64),
    /// u = phi.
    Exp,
    /// u = phi'.
    ExpPrime,
}

impl ExpKind {
    pub fn resolve_u(&self, p: &StParams) -> f64 {
        match self {
            ExpKind::Deformed(u) => *u,
            ExpKind::Exp => p.phi().to_f64(),
            ExpKind::ExpPrime => p.phi_prime().to_f64(),
        }
    }
}

/// Factor denominators smaller than this count as poles.
pub const POLE_TOL: f64 = 1e-14;

/// Product factors stop mattering once |factor - 1| drops below this.
const FACTOR_SETTLE: f64 = 1e-15;

/// Convergence domain of the series exp_{s,t}(z,u) in z.
///
/// For |q| < 1: entire when |u| < |phi|; disk |z| < |phi|/sqrt(s^2+4t)
/// when |u| = |phi|; only z = 0 beyond. For |q| > 1 the same with phi'.
/// Zero-discriminant pairs scale down to the classical deformed
/// exponential: entire iff |u| <= |s|/2.
pub fn exp_domain(p: &StParams, u: f64) -> crate::ward::ConvergenceClass {
    use crate::ward::ConvergenceClass as C;
    if u == 0.0 {
        return C::Entire; // the u = 0 convention is the polynomial 1 + z
    }
    if p.is_degenerate_q() {
        let c = p.s().to_f64().abs() / 2.0;
        return if u.abs() <= c { C::Entire } else { C::PointOnly };
    }
    let root = match p.q_regime() {
        QRegime::AbsLessOne => Root::Phi,
        QRegime::AbsGreaterOne => Root::PhiPrime,
        QRegime::One => unreachable!(),
    };
    let ua = Scalar::from_f64(u.abs());
    match p.cmp_abs_root(root, &ua) {
        std::cmp::Ordering::Greater => C::Entire,
        std::cmp::Ordering::Equal => {
            let radius = match root {
                Root::Phi => p.phi().to_f64().abs(),
                Root::PhiPrime => p.phi_prime().to_f64().abs(),
            } / p.disc().to_f64().sqrt();
            C::Disk { radius }
        }
        std::cmp::Ordering::Less => C::PointOnly,
    }
}

fn exp_domain_check(p: &StParams, u: f64, z: f64) -> Result<()> {
    if z == 0.0 {
        return Ok(());
    }
    match exp_domain(p, u) {
        crate::ward::ConvergenceClass::Entire => Ok(()),
        crate::ward::ConvergenceClass::Disk { radius } => {
            if z.abs() < radius {
                Ok(())
            } else {
                Err(StError::OutsideDomain(format!(
                    "|z| = {} is outside the boundary disk of radius {radius}",
                    z.abs()
                )))
            }
        }
        crate::ward::ConvergenceClass::PointOnly => Err(StError::OutsideDomain(format!(
            "deformation |u| = {} exceeds the convergent range; series diverges for z != 0",
            u.abs()
        ))),
    }
}

/// Incremental term generator for sum u^C(n,2) z^n/{n}!.
///
/// Works with the bounded quantities g_n = u^n/{n+1} and the sequence
/// ratio rho_n = {n+1}/{n} = s + t/rho_{n-1}, so boundary deformations
/// |u| = |phi| never overflow even though u^n and {n}! individually would.
struct ExpTerms {
    s: f64,
    t: f64,
    u: f64,
    z: f64,
    term: f64,
    g: f64,
    rho: f64,
    n: u32,
}

impl ExpTerms {
    fn new(p: &StParams, u: f64, z: f64) -> Self {
        ExpTerms {
            s: p.s().to_f64(),
            t: p.t().to_f64(),
            u,
            z,
            term: 1.0,
            g: 1.0, // u^0/{1}
            rho: 1.0,
            n: 0,
        }
    }
}

impl Iterator for ExpTerms {
    type Item = f64;
    /// Yields term n starting at n = 0.
    fn next(&mut self) -> Option<f64> {
        if self.n == 0 {
            self.n = 1;
            return Some(self.term);
        }
        self.term *= self.z * self.g;
        // advance g to u^n/{n+1}: rho_{n+1} = {n+2}/{n+1}
        self.rho = if self.n == 1 { self.s } else { self.s + self.t / self.rho };
        self.g *= self.u / self.rho;
        self.n += 1;
        Some(self.term)
    }
}

/// Series evaluation of exp_{s,t}(z,u) with tail below `tol`.
/// The convention at u = 0 keeps only 1 + z.
pub fn exp_st(p: &StParams, u: f64, z: f64, tol: f64) -> Result<f64> {
    exp_domain_check(p, u, z)?;
    if u == 0.0 {
        return Ok(1.0 + z);
    }
    let mut sum = 0.0;
    let mut quiet = 0;
    let mut terms = ExpTerms::new(p, u, z);
    for _ in 0..200_000u32 {
        let term = terms.next().unwrap();
        sum += term;
        if term.abs() < tol {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(StError::NonConvergentSum(format!(
        "exponential series stalled above tol = {tol}"
    )))
}

/// Partial sum of exp_{s,t}(z,u) with exactly `n_terms` terms (orders
/// 0..n_terms-1), plus the magnitude of the last term. No domain check;
/// used for truncation-order cross-checks and by the binomial exponential.
pub fn exp_st_partial(p: &StParams, u: f64, z: f64, n_terms: usize) -> (f64, f64) {
    let mut sum = 0.0;
    let mut last = 0.0;
    let terms = ExpTerms::new(p, u, z);
    for (n, term) in terms.take(n_terms).enumerate() {
        if u == 0.0 && n > 1 {
            break;
        }
        sum += term;
        last = term.abs();
    }
    (sum, last)
}

/// K-factor partial product for Exp (u = phi) or Exp' (u = phi').
///
/// For |q| < 1: Exp(z) = prod 1/(1 - (1-q) q^k z) and
/// Exp'(z) = prod (1 + (1-q) q^k z). For |q| > 1 the mirrored forms in
/// q^{-1} apply. The factors tend to 1 geometrically, so a partial
/// product converges wherever no factor hits a pole.
pub fn exp_product(p: &StParams, kind: ExpKind, z: f64, k_factors: usize) -> Result<f64> {
    let (gap, ratio) = match p.q_regime() {
        QRegime::One => {
            return Err(StError::DegenerateQ(
                "infinite products need q != 1".into(),
            ))
        }
        QRegime::AbsLessOne => {
            let q = p.q().to_f64();
            (1.0 - q, q)
        }
        QRegime::AbsGreaterOne => {
            let qi = 1.0 / p.q().to_f64();
            (qi - 1.0, qi)
        }
    };
    // Exp factors carry a minus (1 - gap w z), Exp' factors a plus; which
    // of the two is the reciprocal (meromorphic) form swaps with the
    // branch: Exp for |q| < 1, Exp' for |q| > 1.
    let (sign, reciprocal) = match (p.q_regime(), kind) {
        (QRegime::AbsLessOne, ExpKind::Exp) => (-1.0, true),
        (QRegime::AbsLessOne, ExpKind::ExpPrime) => (1.0, false),
        (QRegime::AbsGreaterOne, ExpKind::Exp) => (-1.0, false),
        (QRegime::AbsGreaterOne, ExpKind::ExpPrime) => (1.0, true),
        (_, ExpKind::Deformed(_)) => {
            return Err(StError::InvalidArgument(
                "product form exists for Exp and Exp' only".into(),
            ))
        }
        (QRegime::One, _) => unreachable!(),
    };
    let mut acc = 1.0;
    let mut weight = 1.0; // ratio^k
    for k in 0..k_factors {
        let factor = 1.0 + sign * gap * weight * z;
        if reciprocal {
            if factor.abs() < POLE_TOL {
                return Err(StError::PoleHit { k });
            }
            acc /= factor;
        } else {
            acc *= factor;
        }
        if (factor - 1.0).abs() < FACTOR_SETTLE {
            break;
        }
        weight *= ratio;
    }
    Ok(acc)
}

/// Enough factors for the last one to differ from 1 by < 1e-15 (capped).
pub fn auto_product_factors(p: &StParams) -> usize {
    let ratio = match p.q_regime() {
        QRegime::AbsLessOne => p.q().to_f64().abs(),
        QRegime::AbsGreaterOne => 1.0 / p.q().to_f64().abs(),
        QRegime::One => return 1,
    };
    if ratio <= 0.0 {
        return 4;
    }
    let k = (FACTOR_SETTLE.ln() / ratio.ln()).ceil();
    (k as usize + 8).min(40_000)
}

/// The (p,q)-power (x (-) a)^n = prod_{k=0}^{n-1} (p^k x - q^k a).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PqPower {
    pub x: f64,
    pub a: f64,
    pub n: u32,
    pub p: f64,
    pub q: f64,
}

/// Product form of the (p,q)-power; 1 for n = 0.
pub fn pq_power(arg: &PqPower) -> f64 {
    let mut acc = 1.0;
    let mut pk = 1.0;
    let mut qk = 1.0;
    for _ in 0..arg.n {
        acc *= pk * arg.x - qk * arg.a;
        pk *= arg.p;
        qk *= arg.q;
    }
    acc
}

/// Fibonomial expansion of the same power:
/// sum_k C(n,k)_{p,q} p^C(k,2) q^C(n-k,2) x^k (-a)^{n-k}.
pub fn pq_power_expansion(arg: &PqPower) -> Result<f64> {
    let s = Scalar::from_f64(arg.p + arg.q);
    let t = Scalar::from_f64(-arg.p * arg.q);
    let one = Scalar::one();
    let mut sum = 0.0;
    for k in 0..=arg.n {
        let c = fibonomial_raw(&s, &t, &one, arg.n, k)?.to_f64();
        sum += c
            * arg.p.powi(binom2(k) as i32)
            * arg.q.powi(binom2(arg.n - k) as i32)
            * arg.x.powi(k as i32)
            * (-arg.a).powi((arg.n - k) as i32);
    }
    Ok(sum)
}

/// Binomial exponential Exp(ax) Exp'(-ay), evaluated by series partial
/// sums of `n_terms` orders after checking both factors' domains.
pub fn binomial_exp(p: &StParams, a: f64, x: f64, y: f64, n_terms: usize) -> Result<f64> {
    let phi = p.phi().to_f64();
    let phip = p.phi_prime().to_f64();
    exp_domain_check(p, phi, a * x)?;
    exp_domain_check(p, phip, -a * y)?;
    let (left, _) = exp_st_partial(p, phi, a * x, n_terms);
    let (right, _) = exp_st_partial(p, phip, -a * y, n_terms);
    Ok(left * right)
}

/// One grid row of the inequality report.
#[derive(Clone, Debug, Serialize)]
pub struct ExpInequalityRow {
    pub x: f64,
    pub exp_u: f64,
    pub exp_v: f64,
    pub exp_prime: Option<f64>,
    pub classical: f64,
    /// exp(x,u) <= exp(x,v) for u < v (non-strict at x = 0).
    pub monotone_in_u: bool,
    /// exp(x,u) <= Exp'(x) <= e^x on the |q| < 1 branch for x > 0.
    pub ordered_chain: Option<bool>,
    /// exp_{s-1,t}(x,u) >= exp_{s,t}(x,u).
    pub monotone_in_s: Option<bool>,
    /// exp_{s,t-1}(x,u) >= exp_{s,t}(x,u).
    pub monotone_in_t: Option<bool>,
}

/// Inequality report over a grid. The x < 0 side of the chain inequality
/// is not asserted (small-u series can cross there); rows with x < 0
/// record `ordered_chain: None`.
#[derive(Clone, Debug, Serialize)]
pub struct ExpInequalityReport {
    pub rows: Vec<ExpInequalityRow>,
    pub all_monotone_in_u: bool,
    pub all_ordered: bool,
    pub all_monotone_in_s: bool,
    pub all_monotone_in_t: bool,
}

/// Check the exponential inequalities on a grid: monotonicity in u
/// (against v = 2u), the chain exp(x,u) <= Exp'(x) <= e^x for |q| < 1 and
/// u < phi', and monotonicity under growing s and t (each compared
/// against the parameter lowered by 1 where that pair is admissible).
pub fn exp_inequality_report(p: &StParams, u: f64, x_grid: &[f64]) -> Result<ExpInequalityReport> {
    let v = 2.0 * u;
    let tol = 1e-12;
    let phi_prime = p.phi_prime().to_f64();
    let chain_applies = matches!(p.q_regime(), QRegime::AbsLessOne) && u < phi_prime;
    let lower_s = StParams::new(p.s() - &Scalar::one(), p.t().clone()).ok();
    let lower_t = StParams::new(p.s().clone(), p.t() - &Scalar::one()).ok();
    let mut rows = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if x < 0.0 {
            return Err(StError::InvalidArgument(
                "inequality grid points must be nonnegative".into(),
            ));
        }
        let exp_u = exp_st(p, u, x, 1e-13)?;
        let exp_v = exp_st(p, v, x, 1e-13)?;
        let slack = tol * exp_v.abs().max(1.0);
        let monotone_in_u = 1.0 - slack <= exp_u && exp_u <= exp_v + slack;
        let (exp_prime, ordered_chain) = if chain_applies {
            let ep = exp_st(p, phi_prime, x, 1e-13)?;
            let ok = if x == 0.0 {
                (exp_u - ep).abs() <= tol && (ep - 1.0).abs() <= tol
            } else {
                exp_u <= ep + tol * ep.abs() && ep <= x.exp() * (1.0 + tol)
            };
            (Some(ep), Some(ok))
        } else {
            (None, None)
        };
        let monotone_in_s = lower_s.as_ref().map(|ls| {
            exp_st(ls, u, x, 1e-13)
                .map(|lower| lower >= exp_u - tol * exp_u.abs())
                .unwrap_or(false)
        });
        let monotone_in_t = lower_t.as_ref().map(|lt| {
            exp_st(lt, u, x, 1e-13)
                .map(|lower| lower >= exp_u - tol * exp_u.abs())
                .unwrap_or(false)
        });
        rows.push(ExpInequalityRow {
            x,
            exp_u,
            exp_v,
            exp_prime,
            classical: x.exp(),
            monotone_in_u,
            ordered_chain,
            monotone_in_s,
            monotone_in_t,
        });
    }
    let all = |f: &dyn Fn(&ExpInequalityRow) -> Option<bool>| {
        rows.iter().all(|r| f(r).unwrap_or(true))
    };
    Ok(ExpInequalityReport {
        all_monotone_in_u: rows.iter().all(|r| r.monotone_in_u),
        all_ordered: all(&|r| r.ordered_chain),
        all_monotone_in_s: all(&|r| r.monotone_in_s),
        all_monotone_in_t: all(&|r| r.monotone_in_t),
        rows,
    })
}

/// Reference series value with doubled order, for truncation cross-checks.
pub fn exp_reference(p: &StParams, u: f64, z: f64) -> f64 {
    let (v, _) = exp_st_partial(p, u, z, 120);
    v
}

/// Ward-basis coefficients u^C(n,2) of an exponential, exact when u is.
pub fn exp_series_coeffs(u: &Scalar, order: usize) -> Vec<Scalar> {
    (0..=order as u32).map(|n| u.powu(binom2(n))).collect()
}

/// {n}! values as floats, for direct series work.
pub fn fibotorials_f64(p: &StParams, order: usize) -> Vec<f64> {
    let seq = st_numbers_upto(p.s(), p.t(), order as u32);
    let mut out = Vec::with_capacity(order + 1);
    let mut acc = 1.0;
    out.push(1.0);
    for v in seq.iter().skip(1) {
        acc *= v.to_f64();
        out.push(acc);
    }
    out
}
