//! Solvers for functional-difference equations with proportional delay.
//!
//! All of them produce a [`SolveReport`]: the solution as a truncated
//! Ward-basis series, its values on a declared q-geometric lattice, and
//! the maximum residual of the original equation on that lattice.
//!
//! | equation | solver | solution kernel |
//! |---|---|---|
//! | D y = a y(ux), y(0) = xi | [`solve_linear_pantograph`] | xi exp(ax, u) |
//! | D y = a y(ux), x > 0 | [`modulated_solution`] | q-periodic modulation |
//! | D y = a y(x) + b y(ux) | [`two_term_pantograph`] | rising products (a (+) b)^n |
//! | D y = -y + y(x/v)/v | [`ambartsumian`] | (a (+) b)^n at a = -1, b = 1/v |
//! | D y = f(y(ux)) | [`bell_series::bell_autonomous_solve`] | Bell-polynomial recursion |
//! | D y = f(x, y, y(ux)) | [`picard::successive_approximation`] | Jackson-integral iteration |
//!
//! Convergence of the two-term family E(a,b,u;z) is classified by the
//! position of (q, phi) — or (1/q, phi') when only the conjugate branch
//! applies — in the S/T region tables; [`classify_E`] returns the label
//! plus the implied domain.

mod bell_series;
mod picard;
mod poly;

pub use bell_series::bell_autonomous_solve;
pub use picard::{successive_approximation, EquationSpec, LipschitzData, RegimeChoice};

use serde::Serialize;

use crate::error::{Result, StError};
use crate::exponentials::exp_domain;
use crate::integration::QLattice;
use crate::operators::{q_periodic_eval, st_derivative, QPeriodic};
use crate::params::{Root, StParams};
use crate::scalar::Scalar;
use crate::sequences::{binom2, st_numbers_upto};
use crate::ward::{ConvergenceClass, TruncatedEgf};

/// Rising-type product (a (+) b)^n_{1,u} = prod_{k=0}^{n-1} (a + b u^k).
#[derive(Clone, Debug, PartialEq)]
pub struct RisingFactor {
    pub a: Scalar,
    pub b: Scalar,
    pub u: Scalar,
    pub n: u32,
    pub value: Scalar,
}

impl RisingFactor {
    pub fn new(a: Scalar, b: Scalar, u: Scalar, n: u32) -> Self {
        let mut value = Scalar::one();
        let mut u_pow = Scalar::one();
        for _ in 0..n {
            value = &value * &(&a + &(&b * &u_pow));
            u_pow = &u_pow * &u;
        }
        RisingFactor { a, b, u, n, value }
    }
}

/// Region labels of the two-term convergence tables. `None` marks the
/// degenerate coefficient cases (a = 0 or b = 0) and combinations the
/// tables do not cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegionLabel {
    S1, S2, S3, S4, S5, S6, S7, S8, S9,
    T1, T2, T3, T4, T5, T6, T7, T8, T9,
    #[serde(rename = "none")]
    None,
}

/// Which comparison placed the parameters in their region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionBranch {
    /// |u| < |phi|, classified through (q, phi).
    BelowPhi,
    /// |u| = |phi|.
    AtPhi,
    /// |u| < |phi'|, classified through (1/q, phi').
    BelowPhiPrime,
    /// |u| = |phi'|.
    AtPhiPrime,
    /// a = 0 or b = 0: the function collapses to a plain exponential.
    DegenerateCoefficient,
    /// No table row matched.
    Uncovered,
}

/// Region classification together with the convergence domain it implies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub label: RegionLabel,
    pub branch: RegionBranch,
    pub domain: Option<ConvergenceClass>,
}

/// One solution sample on the residual lattice.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LatticePoint {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

/// Output of every solver: series, lattice samples, residual, optional
/// error bound (successive approximation only) and region label.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    /// Ward-basis coefficients of the solution; absent for lattice-mode
    /// iteration, which never forms coefficients.
    pub series: Option<TruncatedEgf>,
    pub lattice: Vec<LatticePoint>,
    pub max_residual: f64,
    pub error_bound: Option<f64>,
    pub region: Option<Region>,
    /// Successive-difference norms per iteration, when iterating.
    pub diffs: Option<Vec<f64>>,
}

impl SolveReport {
    /// JSON with the stable field names `series`, `lattice`, `residual`,
    /// `bound`, `region`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "series": self.series.as_ref().map(|s| s.to_json()),
            "lattice": self.lattice,
            "residual": self.max_residual,
            "bound": self.error_bound,
            "region": self.region.as_ref().map(|r| r.label),
            "region_domain": self.region.as_ref().map(|r| r.domain.clone()),
            "diffs": self.diffs,
        })
    }
}

/// Number of residual lattice points.
pub const RESIDUAL_POINTS: usize = 16;

/// Evaluate |D y(x) - rhs(x, y(x), y(ux))| on the residual lattice
/// x_j = x_max q^j / phi.
pub(crate) fn residual_on_lattice(
    p: &StParams,
    u: f64,
    y: &dyn Fn(f64) -> f64,
    rhs: &dyn Fn(f64, f64, f64) -> f64,
    x_max: f64,
) -> Result<(Vec<LatticePoint>, f64)> {
    let lattice = QLattice::new(p, x_max, RESIDUAL_POINTS - 1)?;
    let mut points = Vec::with_capacity(RESIDUAL_POINTS);
    let mut max_residual = 0.0f64;
    for &x in &lattice.points {
        let yx = y(x);
        let dy = st_derivative(y, p, 1.0, x);
        let r = (dy - rhs(x, yx, y(u * x))).abs();
        max_residual = max_residual.max(r);
        points.push(LatticePoint { x, y: yx, residual: r });
    }
    Ok((points, max_residual))
}

/// Largest admissible residual-lattice endpoint: `a_dom`, capped by 90%
/// of the convergence radius when the domain is a disk.
pub(crate) fn clamp_x_max(domain: Option<&ConvergenceClass>, a_dom: f64) -> Result<f64> {
    match domain {
        Some(ConvergenceClass::Disk { radius }) => Ok(a_dom.min(0.9 * radius)),
        Some(ConvergenceClass::PointOnly) => Err(StError::OutsideDomain(
            "series converges only at x = 0; no lattice to evaluate on".into(),
        )),
        _ => Ok(a_dom),
    }
}

/// Solve D_{s,t} y = a y(ux), y(0) = xi: the solution is xi exp(ax, u)
/// with Ward coefficients xi u^C(n,2) a^n (exact for exact inputs).
pub fn solve_linear_pantograph(
    p: &StParams,
    a: &Scalar,
    u: &Scalar,
    xi: &Scalar,
    order: usize,
) -> Result<SolveReport> {
    let uf = u.to_f64();
    if uf <= 0.0 {
        return Err(StError::InvalidArgument("delay factor u must be positive".into()));
    }
    let domain = exp_domain(p, uf);
    let af = a.to_f64();
    let scale = if af == 0.0 { 1.0 } else { af.abs() };
    let x_max = clamp_x_max(Some(&scale_domain(&domain, scale)), 1.0)?;
    let coeffs: Vec<Scalar> = (0..=order as u32)
        .map(|n| &(xi * &u.powu(binom2(n))) * &a.powu(n))
        .collect();
    let series = TruncatedEgf::new(p.clone(), coeffs)?;
    let y = |x: f64| series.eval(x);
    let rhs = |_x: f64, _yx: f64, yux: f64| af * yux;
    let (lattice, max_residual) = residual_on_lattice(p, uf, &y, &rhs, x_max)?;
    let region = classify_e_impl(p, uf, 0.0, af);
    Ok(SolveReport {
        series: Some(series),
        lattice,
        max_residual,
        error_bound: None,
        region: Some(region),
        diffs: None,
    })
}

/// Rescale a domain in z to a domain in x for the argument substitution
/// z = a x.
fn scale_domain(domain: &ConvergenceClass, a_abs: f64) -> ConvergenceClass {
    match domain {
        ConvergenceClass::Disk { radius } => ConvergenceClass::Disk { radius: radius / a_abs },
        other => other.clone(),
    }
}

/// The q-periodic-modulated solution of D y = a y(ux) at x > 0:
/// sum u^C(n,2) a^n p(u^n x / phi^n) x^n/{n}! with p(x) = G(log_q x).
pub fn modulated_solution(
    p: &StParams,
    a: f64,
    u: f64,
    g: &QPeriodic,
    x: f64,
    order: usize,
) -> Result<f64> {
    if x <= 0.0 {
        return Err(StError::DomainError(
            "modulated solutions are defined for x > 0".into(),
        ));
    }
    if u <= 0.0 {
        return Err(StError::InvalidArgument("delay factor u must be positive".into()));
    }
    // Bounded incremental update, as in the exponential series: the
    // plain term t_n = u^C(n,2) a^n x^n/{n}! times the modulation factor.
    let s = p.s().to_f64();
    let t = p.t().to_f64();
    let phi = p.phi().to_f64();
    let mut term = 1.0f64;
    let mut g_ratio = 1.0f64; // u^n/{n+1}
    let mut rho = 1.0f64;
    let mut delay_pow = 1.0f64; // (u/phi)^n
    let mut sum = 0.0;
    for n in 0..=order as u32 {
        if n > 0 {
            term *= a * x * g_ratio;
            rho = if n == 1 { s } else { s + t / rho };
            g_ratio *= u / rho;
            delay_pow *= u / phi;
        }
        sum += term * q_periodic_eval(g, delay_pow * x)?;
    }
    Ok(sum)
}

/// Solve the two-term pantograph equation D y = a y(x) + b y(ux),
/// y(0) = 1, with coefficients (a (+) b)^n_{1,u}. The report carries the
/// S/T region of the solution function.
pub fn two_term_pantograph(
    p: &StParams,
    a: &Scalar,
    b: &Scalar,
    u: &Scalar,
    order: usize,
) -> Result<SolveReport> {
    let uf = u.to_f64();
    if uf <= 0.0 {
        return Err(StError::InvalidArgument("delay factor u must be positive".into()));
    }
    let region = classify_e_impl(p, uf, a.to_f64(), b.to_f64());
    let x_max = clamp_x_max(region.domain.as_ref(), 1.0)?;
    let coeffs: Vec<Scalar> = (0..=order as u32)
        .map(|n| RisingFactor::new(a.clone(), b.clone(), u.clone(), n).value)
        .collect();
    let series = TruncatedEgf::new(p.clone(), coeffs)?;
    let (af, bf) = (a.to_f64(), b.to_f64());
    let y = |x: f64| series.eval(x);
    let rhs = |_x: f64, yx: f64, yux: f64| af * yx + bf * yux;
    let (lattice, max_residual) = residual_on_lattice(p, uf, &y, &rhs, x_max)?;
    Ok(SolveReport {
        series: Some(series),
        lattice,
        max_residual,
        error_bound: None,
        region: Some(region),
        diffs: None,
    })
}

/// Classify where E(a,b,u;z) converges via the S-table (q, phi) or, when
/// only the conjugate branch applies, the T-table (1/q, phi').
pub fn classify_e(p: &StParams, u: f64, a: f64, b: f64) -> Result<Region> {
    if a == 0.0 && b == 0.0 {
        return Err(StError::InvalidArgument(
            "classification needs a != 0 or b != 0".into(),
        ));
    }
    Ok(classify_e_impl(p, u, a, b))
}

fn classify_e_impl(p: &StParams, u: f64, a: f64, b: f64) -> Region {
    use std::cmp::Ordering::*;
    // Degenerate coefficients collapse to plain exponentials:
    // E(a,0,-;x) = exp(ax) and E(0,b,u;x) = exp(bx, u).
    if a == 0.0 || b == 0.0 {
        let (u_eff, alpha) = if b == 0.0 { (1.0, a.abs()) } else { (u, b.abs()) };
        let domain = if alpha == 0.0 {
            Some(ConvergenceClass::Entire)
        } else {
            crate::ward::classify_series(p, u_eff, alpha).ok()
        };
        return Region {
            label: RegionLabel::None,
            branch: RegionBranch::DegenerateCoefficient,
            domain,
        };
    }
    if p.is_degenerate_q() {
        return Region {
            label: RegionLabel::None,
            branch: RegionBranch::Uncovered,
            domain: None,
        };
    }
    let us = Scalar::from_f64(u.abs());
    let s_cmp = p.cmp_abs_root(Root::Phi, &us);
    if s_cmp != Less {
        if let Some(region) = s_table(p, s_cmp == Equal, a, b) {
            return region;
        }
    }
    let t_cmp = p.cmp_abs_root(Root::PhiPrime, &us);
    if t_cmp != Less {
        if let Some(region) = t_table(p, t_cmp == Equal, a, b) {
            return region;
        }
    }
    Region {
        label: RegionLabel::None,
        branch: RegionBranch::Uncovered,
        domain: None,
    }
}

/// S-table over (q, phi); `at_boundary` selects |u| = |phi| rows.
fn s_table(p: &StParams, at_boundary: bool, a: f64, b: f64) -> Option<Region> {
    let q_abs = p.q().to_f64().abs();
    let one = Scalar::one();
    let phi_cmp_one = p.cmp_abs_root(Root::Phi, &one);
    let phi_abs = p.phi().to_f64().abs();
    let gap = (1.0 - p.q().to_f64()).abs();
    let branch = if at_boundary { RegionBranch::AtPhi } else { RegionBranch::BelowPhi };
    use std::cmp::Ordering::*;
    let mk = |label, domain| Some(Region { label, branch, domain: Some(domain) });
    if !at_boundary {
        if phi_cmp_one == Greater {
            return mk(RegionLabel::S1, ConvergenceClass::Entire);
        }
        if q_abs < 1.0 {
            return match phi_cmp_one {
                Equal => mk(RegionLabel::S3, ConvergenceClass::Disk { radius: 1.0 / (gap * a.abs()) }),
                Less => mk(RegionLabel::S4, ConvergenceClass::PointOnly),
                Greater => unreachable!(),
            };
        }
        // |q| > 1 with |phi| <= 1: compare 1/|phi| against |q|.
        let inv_phi = 1.0 / phi_abs;
        if (inv_phi - q_abs).abs() <= 1e-12 * q_abs {
            return None; // 1/|phi| = |q| is not covered
        }
        if inv_phi < q_abs {
            return mk(RegionLabel::S2, ConvergenceClass::Entire);
        }
        return mk(RegionLabel::S5, ConvergenceClass::PointOnly);
    }
    if q_abs > 1.0 && phi_cmp_one == Greater {
        return mk(RegionLabel::S6, ConvergenceClass::Entire);
    }
    if q_abs < 1.0 && phi_cmp_one == Equal {
        return if a + b == 0.0 {
            mk(RegionLabel::S7, ConvergenceClass::Entire)
        } else {
            mk(RegionLabel::S9, ConvergenceClass::Disk { radius: 1.0 / ((a + b).abs() * gap) })
        };
    }
    if q_abs < 1.0 && phi_cmp_one == Greater {
        return mk(RegionLabel::S8, ConvergenceClass::Disk { radius: 1.0 / (b.abs() * gap) });
    }
    None
}

/// T-table over (1/q, phi'); mirrors the S-table with the conjugate data.
fn t_table(p: &StParams, at_boundary: bool, a: f64, b: f64) -> Option<Region> {
    let qi_abs = (1.0 / p.q().to_f64()).abs();
    let one = Scalar::one();
    let phip_cmp_one = p.cmp_abs_root(Root::PhiPrime, &one);
    let phip_abs = p.phi_prime().to_f64().abs();
    let gap = (1.0 / p.q().to_f64() - 1.0).abs();
    let branch = if at_boundary { RegionBranch::AtPhiPrime } else { RegionBranch::BelowPhiPrime };
    use std::cmp::Ordering::*;
    let mk = |label, domain| Some(Region { label, branch, domain: Some(domain) });
    if !at_boundary {
        if phip_cmp_one == Greater {
            return mk(RegionLabel::T1, ConvergenceClass::Entire);
        }
        if qi_abs < 1.0 {
            return match phip_cmp_one {
                Equal => mk(RegionLabel::T3, ConvergenceClass::Disk { radius: 1.0 / (gap * a.abs()) }),
                Less => mk(RegionLabel::T4, ConvergenceClass::PointOnly),
                Greater => unreachable!(),
            };
        }
        let inv_phip = 1.0 / phip_abs;
        if (inv_phip - qi_abs).abs() <= 1e-12 * qi_abs {
            return None;
        }
        if inv_phip < qi_abs {
            return mk(RegionLabel::T2, ConvergenceClass::Entire);
        }
        return mk(RegionLabel::T5, ConvergenceClass::PointOnly);
    }
    if qi_abs > 1.0 && phip_cmp_one == Greater {
        return mk(RegionLabel::T6, ConvergenceClass::Entire);
    }
    if qi_abs < 1.0 && phip_cmp_one == Equal {
        return if a + b == 0.0 {
            mk(RegionLabel::T7, ConvergenceClass::Entire)
        } else {
            mk(RegionLabel::T9, ConvergenceClass::Disk { radius: 1.0 / ((a + b).abs() * gap) })
        };
    }
    if qi_abs < 1.0 && phip_cmp_one == Greater {
        return mk(RegionLabel::T8, ConvergenceClass::Disk { radius: 1.0 / (b.abs() * gap) });
    }
    None
}

/// Partial product for E_q(a,b;z): for 0 < |q| < 1 the factors are
/// (1 + b(1-q)q^k z)/(1 - a(1-q)q^k z); for |q| > 1 the reciprocal form
/// in 1/q applies.
pub fn eq_product(q: f64, a: f64, b: f64, z: f64, k_factors: usize) -> Result<f64> {
    if q == 0.0 || q.abs() == 1.0 {
        return Err(StError::DegenerateQ(format!("E_q product needs 0 < |q| != 1, got q = {q}")));
    }
    let (gap, ratio, swap) = if q.abs() < 1.0 {
        (1.0 - q, q, false)
    } else {
        (1.0 / q - 1.0, 1.0 / q, true)
    };
    // |q| > 1 swaps the roles of a and b and the signs.
    let (num_coef, den_coef) = if swap { (-a, -b) } else { (b, a) };
    let mut acc = 1.0;
    let mut weight = 1.0;
    for k in 0..k_factors {
        let num = 1.0 + num_coef * gap * weight * z;
        let den = 1.0 - den_coef * gap * weight * z;
        if den.abs() < crate::exponentials::POLE_TOL {
            return Err(StError::PoleHit { k });
        }
        acc *= num / den;
        if (num - 1.0).abs() < 1e-15 && (den - 1.0).abs() < 1e-15 {
            break;
        }
        weight *= ratio;
    }
    Ok(acc)
}

/// Series value of E_{s,t}(a,b,u;z) truncated at `n_terms` orders:
/// sum (a (+) b)^n_{1,u} z^n/{n}!, generated by the term recurrence
/// term_{n+1} = term_n (a + b u^n) z / {n+1}.
pub fn e_series(p: &StParams, a: f64, b: f64, u: f64, z: f64, n_terms: usize) -> f64 {
    let s = p.s().to_f64();
    let t = p.t().to_f64();
    let mut sum = 0.0;
    let mut term = 1.0f64;
    let mut u_pow = 1.0f64; // u^n
    let mut inv_seq = 1.0f64; // 1/{n+1}
    let mut rho = 0.0f64; // {n+1}/{n}
    for n in 0..n_terms {
        sum += term;
        term *= (a + b * u_pow) * z * inv_seq;
        u_pow *= u;
        rho = if n == 0 { s } else { s + t / rho };
        inv_seq /= rho;
    }
    sum
}

/// Solve the Ambartsumian-type equation D y = -y(x) + y(x/v)/v for
/// v > 1, y(0) = xi; the coefficients are xi prod_{k=1..n} (v^{-k} - 1).
pub fn ambartsumian(p: &StParams, v: &Scalar, xi: &Scalar, order: usize) -> Result<SolveReport> {
    if v.to_f64() <= 1.0 {
        return Err(StError::InvalidArgument(format!(
            "Ambartsumian delay needs v > 1, got {v}"
        )));
    }
    let u = v.recip()?;
    let uf = u.to_f64();
    let region = classify_e_impl(p, uf, -1.0, uf);
    let x_max = clamp_x_max(region.domain.as_ref(), 1.0)?;
    let coeffs: Vec<Scalar> = (0..=order as u32)
        .map(|n| xi * &RisingFactor::new(Scalar::from_int(-1), u.clone(), u.clone(), n).value)
        .collect();
    let series = TruncatedEgf::new(p.clone(), coeffs)?;
    let y = |x: f64| series.eval(x);
    let rhs = |_x: f64, yx: f64, yux: f64| -yx + uf * yux;
    let (lattice, max_residual) = residual_on_lattice(p, uf, &y, &rhs, x_max)?;
    Ok(SolveReport {
        series: Some(series),
        lattice,
        max_residual,
        error_bound: None,
        region: Some(region),
        diffs: None,
    })
}

/// A-priori bound on |phi - phi_p| after `iter_p` successive
/// approximations:
/// M a^{p+1} (L1 (+) L2)^{p+1}_{1,u} / ((L1+L2) {p+1}_{|s|,t}!) *
/// E_{|s|,t}(L1, L2 u^{p+1}, u; a).
pub fn approximation_error_bound(
    p: &StParams,
    bound_m: f64,
    l1: f64,
    l2: f64,
    u: f64,
    a_dom: f64,
    iter_p: u32,
    n_trunc: usize,
) -> Result<f64> {
    if bound_m <= 0.0 || l1 < 0.0 || l2 < 0.0 || l1 + l2 == 0.0 || u <= 0.0 || a_dom <= 0.0 {
        return Err(StError::InvalidArgument(
            "error bound needs M > 0, L1, L2 >= 0 (not both 0), u > 0, a > 0".into(),
        ));
    }
    let p_abs = StParams::new(p.s().abs(), p.t().clone())?;
    // E must converge at a_dom.
    let b_tail = l2 * u.powi(iter_p as i32 + 1);
    let region = classify_e_impl(&p_abs, u, l1, b_tail);
    match region.domain {
        Some(ConvergenceClass::Entire) => {}
        Some(ConvergenceClass::Disk { radius }) if a_dom < radius => {}
        _ => {
            return Err(StError::OutsideDomain(format!(
                "E series for the bound does not converge at a = {a_dom} (region {:?})",
                region.label
            )))
        }
    }
    let rising = RisingFactor::new(
        Scalar::from_f64(l1),
        Scalar::from_f64(l2),
        Scalar::from_f64(u),
        iter_p + 1,
    )
    .value
    .to_f64();
    let seq = st_numbers_upto(p_abs.s(), p_abs.t(), iter_p + 1);
    let mut factorial = 1.0;
    for v in seq.iter().skip(1) {
        factorial *= v.to_f64();
    }
    let e_val = e_series(&p_abs, l1, b_tail, u, a_dom, n_trunc);
    Ok(bound_m * a_dom.powi(iter_p as i32 + 1) * rising / ((l1 + l2) * factorial) * e_val)
}
