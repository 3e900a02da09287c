//! Successive approximation for D y = f(x, y(x), y(ux)), y(0) = y0:
//! phi_{k+1}(x) = y0 + integral_0^x f(r, phi_k(r), phi_k(ur)) dr.
//!
//! Two backends share the interface. When the right-hand side is a
//! polynomial in (x, y, yu), each iterate is a polynomial and the
//! integral is the exact coefficient shift c_n -> c_n/{n+1} (series
//! mode). Otherwise the iterates are evaluated pointwise on the
//! q-geometric lattice (lattice mode); every point reachable through the
//! nested Jackson sums has the form x_max q^i u^j / scale^c, so the
//! recursion memoizes on those integer exponents instead of raw floats.

use std::collections::HashMap;

use crate::error::{Result, StError};
use crate::expr::ExprAst;
use crate::params::{QRegime, StParams};
use crate::scalar::Scalar;
use crate::sequences::st_numbers_upto;
use crate::solvers::poly::{eval_expr_poly, Poly};
use crate::solvers::{
    approximation_error_bound, classify_e, residual_on_lattice, LatticePoint, Region,
    SolveReport, RESIDUAL_POINTS,
};
use crate::ward::{ConvergenceClass, TruncatedEgf};

/// Which existence regime drives the iteration interval: the one scaled
/// by |phi| or by |phi'|.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RegimeChoice {
    /// Prefer the |phi'| regime when u <= |phi'|, else the |phi| regime.
    #[default]
    Auto,
    Phi,
    PhiPrime,
}

/// Optional Lipschitz data: constants in the second and third arguments,
/// the bound M on |f| over the rectangle, and the rectangle half-widths.
#[derive(Clone, Copy, Debug)]
pub struct LipschitzData {
    pub l1: f64,
    pub l2: f64,
    pub bound_m: f64,
    pub a_rect: f64,
    pub b_rect: f64,
}

/// A delay equation D y = rhs(x, y, yu), y(eta) = xi.
#[derive(Clone, Debug)]
pub struct EquationSpec {
    pub params: StParams,
    pub u: Scalar,
    pub rhs: ExprAst,
    /// (eta, xi); the iteration is anchored at eta = 0.
    pub init: (Scalar, Scalar),
    pub lipschitz: Option<LipschitzData>,
    pub regime: RegimeChoice,
}

impl EquationSpec {
    pub fn new(params: StParams, u: Scalar, rhs: ExprAst, xi: Scalar) -> Self {
        EquationSpec {
            params,
            u,
            rhs,
            init: (Scalar::zero(), xi),
            lipschitz: None,
            regime: RegimeChoice::Auto,
        }
    }
}

/// Estimate Lipschitz constants and the bound M by sampling the
/// right-hand side (and its y/yu difference quotients) on the rectangle,
/// with a 1.5 safety factor on the gradients.
fn estimate_lipschitz(spec: &EquationSpec, a_rect: f64, b_rect: f64) -> Result<LipschitzData> {
    let y0 = spec.init.1.to_f64();
    let h = 1e-5;
    let mut l1 = 0.0f64;
    let mut l2 = 0.0f64;
    let mut m = 0.0f64;
    let steps = 8;
    for ix in 0..=steps {
        let x = -a_rect + 2.0 * a_rect * ix as f64 / steps as f64;
        for iy in 0..=steps {
            let y = y0 - b_rect + 2.0 * b_rect * iy as f64 / steps as f64;
            for iz in 0..=steps {
                let yu = y0 - b_rect + 2.0 * b_rect * iz as f64 / steps as f64;
                let f = spec.rhs.eval_f64(x, y, yu)?;
                m = m.max(f.abs());
                let dy =
                    (spec.rhs.eval_f64(x, y + h, yu)? - spec.rhs.eval_f64(x, y - h, yu)?)
                        / (2.0 * h);
                let dyu =
                    (spec.rhs.eval_f64(x, y, yu + h)? - spec.rhs.eval_f64(x, y, yu - h)?)
                        / (2.0 * h);
                l1 = l1.max(dy.abs());
                l2 = l2.max(dyu.abs());
            }
        }
    }
    Ok(LipschitzData {
        l1: 1.5 * l1,
        l2: 1.5 * l2,
        bound_m: m.max(f64::MIN_POSITIVE),
        a_rect,
        b_rect,
    })
}

/// The iteration interval half-width and a note naming the binding
/// constraint: alpha/|root| from the rectangle, intersected with the
/// Lipschitz interval 1/(min L |1-q|) when constants are known.
fn iteration_interval(
    spec: &EquationSpec,
    lip: &LipschitzData,
) -> (f64, &'static str) {
    let p = &spec.params;
    let u = spec.u.to_f64();
    let use_prime = match spec.regime {
        RegimeChoice::Phi => false,
        RegimeChoice::PhiPrime => true,
        RegimeChoice::Auto => u <= p.phi_prime().to_f64().abs(),
    };
    let root = if use_prime {
        p.phi_prime().to_f64().abs()
    } else {
        p.phi().to_f64().abs()
    };
    let alpha = lip.a_rect.min(lip.b_rect / lip.bound_m);
    let from_rect = alpha / root;
    let gap = if use_prime {
        (1.0 / p.q().to_f64() - 1.0).abs()
    } else {
        (1.0 - p.q().to_f64()).abs()
    };
    let l_min = if lip.l1 == 0.0 || lip.l2 == 0.0 {
        lip.l1.max(lip.l2)
    } else {
        lip.l1.min(lip.l2)
    };
    let from_lip = if l_min == 0.0 { f64::INFINITY } else { 1.0 / (l_min * gap) };
    if from_rect <= from_lip {
        (from_rect, "alpha/|root| from the rectangle bound")
    } else {
        (from_lip, "Lipschitz convergence interval")
    }
}

/// Run a fixed number of series-mode iterations; returns the iterates'
/// polynomials and the successive-difference norms.
fn iterate_series(
    spec: &EquationSpec,
    iterations: usize,
    order: usize,
) -> Result<(Poly, Vec<f64>)> {
    let p = &spec.params;
    let xi = &spec.init.1;
    let x_poly = Poly::identity(order);
    let mut phi = Poly::constant(xi.clone(), order);
    let mut diffs = Vec::with_capacity(iterations);
    let mut grow_streak = 0;
    for _ in 0..iterations {
        let yu = phi.dilate(&spec.u);
        let rhs = eval_expr_poly(&spec.rhs, &x_poly, &phi, &yu, order)?;
        let next = Poly::constant(xi.clone(), order).add(&rhs.st_antiderivative(p));
        let d = next.max_coeff_dist(&phi);
        if let Some(prev) = diffs.last() {
            if d > *prev {
                grow_streak += 1;
                if grow_streak >= 3 {
                    return Err(StError::NonConvergentIteration(format!(
                        "successive differences grew for 3 iterations (last {d:.3e})"
                    )));
                }
            } else {
                grow_streak = 0;
            }
        }
        diffs.push(d);
        phi = next;
        if d == 0.0 {
            break;
        }
    }
    Ok((phi, diffs))
}

/// Canonical-point lattice iteration. Points are x_max q^i u^j / scale^c
/// with q the lattice ratio (q or 1/q) and scale the matching root.
struct LatticeIteration<'a> {
    spec: &'a EquationSpec,
    ratio: f64,
    scale: f64,
    x_max: f64,
    u: f64,
    /// Inner-sum length, from the geometric decay of the ratio.
    terms: usize,
    /// (phi, phi') as index increments on (i, c-1).
    phi_step: (u32, u32),
    memo: HashMap<(u32, u32, u32, u32), f64>,
}

impl<'a> LatticeIteration<'a> {
    fn new(spec: &'a EquationSpec, x_max: f64) -> Result<Self> {
        let p = &spec.params;
        let (ratio, scale, phi_step) = match p.q_regime() {
            QRegime::One => {
                return Err(StError::DegenerateQ("lattice iteration needs |q| != 1".into()))
            }
            QRegime::AbsLessOne => (p.q().to_f64(), p.phi().to_f64(), (0u32, 1u32)),
            QRegime::AbsGreaterOne => {
                (1.0 / p.q().to_f64(), p.phi_prime().to_f64(), (1u32, 0u32))
            }
        };
        let terms = ((-37.0 / ratio.abs().ln()).ceil() as usize + 8).min(4000);
        Ok(LatticeIteration {
            spec,
            ratio,
            scale,
            x_max,
            u: spec.u.to_f64(),
            terms,
            phi_step,
            memo: HashMap::new(),
        })
    }

    fn point(&self, i: u32, j: u32, c: u32) -> f64 {
        self.x_max * self.ratio.powi(i as i32) * self.u.powi(j as i32)
            / self.scale.powi(c as i32)
    }

    /// phi_level evaluated at the canonical point (i, j, c).
    fn eval(&mut self, level: u32, i: u32, j: u32, c: u32) -> Result<f64> {
        let xi = self.spec.init.1.to_f64();
        if level == 0 {
            return Ok(xi);
        }
        if let Some(v) = self.memo.get(&(level, i, j, c)) {
            return Ok(*v);
        }
        let p = self.point(i, j, c);
        let prefactor = 1.0 - self.ratio;
        let mut sum = 0.0;
        let mut weight = 1.0;
        for n in 0..self.terms as u32 {
            let r = self.point(i + n, j, c + 1);
            let y = self.eval(level - 1, i + n, j, c + 1)?;
            let yu = self.eval(level - 1, i + n, j + 1, c + 1)?;
            let f = self.spec.rhs.eval_f64(r, y, yu)?;
            sum += prefactor * p * f * weight;
            weight *= self.ratio;
        }
        let value = xi + sum;
        self.memo.insert((level, i, j, c), value);
        Ok(value)
    }

    /// Residual |D y - f| of the level-`k` iterate at lattice index r.
    fn residual_at(&mut self, k: u32, r: u32) -> Result<LatticePoint> {
        let x = self.point(r, 0, 1);
        let y = self.eval(k, r, 0, 1)?;
        let yu = self.eval(k, r, 1, 1)?;
        let y_phi = self.eval(k, r + self.phi_step.0, 0, 0)?;
        let y_phip = self.eval(k, r + self.phi_step.1, 0, 0)?;
        let p = &self.spec.params;
        let dy = (y_phi - y_phip) / ((p.phi().to_f64() - p.phi_prime().to_f64()) * x);
        let residual = (dy - self.spec.rhs.eval_f64(x, y, yu)?).abs();
        Ok(LatticePoint { x, y, residual })
    }
}

/// Successive approximation. Polynomial right-hand sides run the exact
/// series backend; everything else runs on the lattice. The report's
/// `error_bound` uses supplied Lipschitz data, or a sampled estimate.
pub fn successive_approximation(
    spec: &EquationSpec,
    iterations: usize,
    order: usize,
) -> Result<SolveReport> {
    if !spec.init.0.is_zero() {
        return Err(StError::Unsupported(
            "iteration is anchored at the initial point eta = 0".into(),
        ));
    }
    let uf = spec.u.to_f64();
    if uf <= 0.0 {
        return Err(StError::InvalidArgument("delay factor u must be positive".into()));
    }
    let p = &spec.params;
    let lip = match spec.lipschitz {
        Some(l) => l,
        None => estimate_lipschitz(spec, 1.0, 1.0)?,
    };
    let (half_width, constraint) = iteration_interval(spec, &lip);
    let region = classify_e(p, uf, lip.l1, lip.l2).ok();
    if let Some(Region { domain: Some(ConvergenceClass::PointOnly), .. }) = region {
        return Err(StError::OutsideDomain(
            "the comparison series converges only at x = 0 for these constants".into(),
        ));
    }
    let x_max = half_width.min(1.0);
    let bound = approximation_error_bound(
        p,
        lip.bound_m,
        lip.l1,
        lip.l2,
        uf,
        lip.a_rect.min(lip.b_rect / lip.bound_m),
        iterations as u32,
        256,
    )
    .ok();

    // Series mode when the right-hand side stays polynomial.
    match iterate_series(spec, iterations, order) {
        Ok((phi, diffs)) => {
            let seq = st_numbers_upto(p.s(), p.t(), order as u32);
            let mut st_fact = Scalar::one();
            let mut coeffs = Vec::with_capacity(order + 1);
            for (n, c) in phi.c.iter().enumerate() {
                if n > 0 {
                    st_fact = &st_fact * &seq[n];
                }
                coeffs.push(c * &st_fact);
            }
            let series = TruncatedEgf::new(p.clone(), coeffs)?;
            let y = |x: f64| series.eval(x);
            let rhs_ast = &spec.rhs;
            let rhs = move |x: f64, yx: f64, yux: f64| {
                rhs_ast.eval_f64(x, yx, yux).unwrap_or(f64::NAN)
            };
            let (lattice, max_residual) = residual_on_lattice(p, uf, &y, &rhs, x_max)?;
            let mut report = SolveReport {
                series: Some(series),
                lattice,
                max_residual,
                error_bound: bound,
                region,
                diffs: Some(diffs),
            };
            report.lattice.truncate(RESIDUAL_POINTS);
            let _ = constraint;
            Ok(report)
        }
        Err(StError::Unsupported(_)) => {
            successive_approximation_lattice(spec, iterations, x_max, bound, region)
        }
        Err(e) => Err(e),
    }
}

/// Lattice-mode iteration, also reachable directly for testing.
pub(crate) fn successive_approximation_lattice(
    spec: &EquationSpec,
    iterations: usize,
    x_max: f64,
    bound: Option<f64>,
    region: Option<Region>,
) -> Result<SolveReport> {
    let mut it = LatticeIteration::new(spec, x_max)?;
    let k = iterations as u32;
    // Successive differences at the residual lattice points.
    let mut diffs = Vec::with_capacity(iterations);
    let mut grow_streak = 0;
    for level in 1..=k {
        let mut d = 0.0f64;
        for r in 0..RESIDUAL_POINTS as u32 {
            let cur = it.eval(level, r, 0, 1)?;
            let prev = it.eval(level - 1, r, 0, 1)?;
            d = d.max((cur - prev).abs());
        }
        if let Some(prev) = diffs.last() {
            if d > *prev {
                grow_streak += 1;
                if grow_streak >= 3 {
                    return Err(StError::NonConvergentIteration(format!(
                        "lattice differences grew for 3 iterations (last {d:.3e})"
                    )));
                }
            } else {
                grow_streak = 0;
            }
        }
        diffs.push(d);
    }
    let mut lattice = Vec::with_capacity(RESIDUAL_POINTS);
    let mut max_residual = 0.0f64;
    for r in 0..RESIDUAL_POINTS as u32 {
        let pt = it.residual_at(k, r)?;
        max_residual = max_residual.max(pt.residual);
        lattice.push(pt);
    }
    Ok(SolveReport {
        series: None,
        lattice,
        max_residual,
        error_bound: bound,
        region,
        diffs: Some(diffs),
    })
}
