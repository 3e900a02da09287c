//! Jackson-type integral on q-geometric lattices.
//!
//! For 0 < |q| < 1 the integral over [a,b] is the lattice sum
//! (1-q) sum_n [b f(b q^n/phi) - a f(a q^n/phi)] q^n; for |q| > 1 the
//! roles of the roots swap and the sum runs over q^{-n}/phi' with
//! prefactor (1 - q^{-1}), which is what makes the telescoping identity
//! behind the fundamental theorem work on that branch. Sums are truncated
//! adaptively: a term below tol*(1-|q|) for five consecutive indices ends
//! the sum, with a hard cap of 200000 terms.

use crate::error::{Result, StError};
use crate::operators::{q_periodic_eval, st_derivative, QPeriodic};
use crate::params::{QRegime, StParams};
use crate::ward::TruncatedEgf;

/// Hard cap on lattice terms before reporting non-convergence.
pub const MAX_TERMS: usize = 200_000;

/// Consecutive below-threshold terms required to stop.
const QUIET_TERMS: usize = 5;

/// The geometric lattice {r q^n / phi} (or {r q^-n / phi'} when |q| > 1)
/// attached to an endpoint r.
#[derive(Clone, Debug)]
pub struct QLattice {
    pub r: f64,
    pub points: Vec<f64>,
}

impl QLattice {
    /// First `n_cut + 1` lattice points for endpoint `r`.
    pub fn new(p: &StParams, r: f64, n_cut: usize) -> Result<Self> {
        let (ratio, scale) = lattice_geometry(p)?;
        let mut points = Vec::with_capacity(n_cut + 1);
        let mut cur = r / scale;
        for _ in 0..=n_cut {
            points.push(cur);
            cur *= ratio;
        }
        Ok(QLattice { r, points })
    }
}

/// (ratio, scale): successive lattice points differ by `ratio` and start
/// at r/`scale`.
fn lattice_geometry(p: &StParams) -> Result<(f64, f64)> {
    match p.q_regime() {
        QRegime::One => Err(StError::DegenerateQ(
            "the q-lattice collapses at q = 1".into(),
        )),
        QRegime::AbsLessOne => Ok((p.q().to_f64(), p.phi().to_f64())),
        QRegime::AbsGreaterOne => Ok((1.0 / p.q().to_f64(), p.phi_prime().to_f64())),
    }
}

/// The (s,t)-integral of `f` over [a,b] to tolerance `tol`.
pub fn st_integral(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    p: &StParams,
    tol: f64,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(StError::InvalidArgument("integration endpoints must be finite".into()));
    }
    let (ratio, scale) = lattice_geometry(p)?;
    let prefactor = 1.0 - ratio;
    let mut sum = 0.0;
    let mut weight = 1.0; // ratio^n
    let mut quiet = 0usize;
    let threshold = tol * (1.0 - ratio.abs());
    for _ in 0..MAX_TERMS {
        let mut term = 0.0;
        if b != 0.0 {
            term += b * f(b * weight / scale);
        }
        if a != 0.0 {
            term -= a * f(a * weight / scale);
        }
        term *= prefactor * weight;
        sum += term;
        if term.abs() < threshold {
            quiet += 1;
            if quiet >= QUIET_TERMS {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
        weight *= ratio;
    }
    Err(StError::NonConvergentSum(format!(
        "lattice sum over [{a},{b}] did not settle below {tol} within {MAX_TERMS} terms"
    )))
}

/// Antiderivative on the series level: the inverse shift of the basis
/// action, a'_0 = 0, a'_{n+1} = a_n.
pub fn series_antiderivative(f: &TruncatedEgf) -> TruncatedEgf {
    let mut coeffs = Vec::with_capacity(f.coeffs().len() + 1);
    coeffs.push(crate::scalar::Scalar::zero());
    coeffs.extend_from_slice(f.coeffs());
    TruncatedEgf::new(f.params().clone(), coeffs).expect("validity is inherited")
}

/// | integral_a^b (Df) d_{s,t} - (f(b) - f(a)) |, the fundamental-theorem
/// residual for f continuous at 0.
pub fn fundamental_theorem_residual(
    f: &(dyn Fn(f64) -> f64 + Sync),
    a: f64,
    b: f64,
    p: &StParams,
) -> Result<f64> {
    let df = |x: f64| st_derivative(f, p, 1.0, x);
    let integral = st_integral(&df, a, b, p, 1e-13)?;
    Ok((integral - (f(b) - f(a))).abs())
}

/// Residual of integration by parts:
/// | int (Df)(x) g(phi' x) - [fg]_a^b + int f(phi x)(Dg)(x) |.
pub fn integration_by_parts_residual(
    f: &(dyn Fn(f64) -> f64 + Sync),
    g: &(dyn Fn(f64) -> f64 + Sync),
    a: f64,
    b: f64,
    p: &StParams,
) -> Result<f64> {
    let phi = p.phi().to_f64();
    let phip = p.phi_prime().to_f64();
    let lhs = |x: f64| st_derivative(f, p, 1.0, x) * g(phip * x);
    let rhs = |x: f64| f(phi * x) * st_derivative(g, p, 1.0, x);
    let left = st_integral(&lhs, a, b, p, 1e-13)?;
    let right = st_integral(&rhs, a, b, p, 1e-13)?;
    let boundary = f(b) * g(b) - f(a) * g(a);
    Ok((left - (boundary - right)).abs())
}

/// Residual of the q-periodic factor rule
/// int_a^b G(log_q x) f(x) = [G(log_q(r/phi)) int_0^r f]_{r=a}^{b}
/// for 0 <= a < b and q in (0,1).
pub fn q_periodic_factor_check(
    qp: &QPeriodic,
    f: &(dyn Fn(f64) -> f64 + Sync),
    a: f64,
    b: f64,
    p: &StParams,
) -> Result<f64> {
    if !(0.0 <= a && a < b) {
        return Err(StError::InvalidArgument(
            "q-periodic factor rule needs 0 <= a < b".into(),
        ));
    }
    let q = p.q().to_f64();
    if !(0.0 < q && q < 1.0) {
        return Err(StError::Unsupported(
            "q-periodic factor rule needs q in (0,1)".into(),
        ));
    }
    let phi = p.phi().to_f64();
    let integrand = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            q_periodic_eval(qp, x).expect("positive lattice point") * f(x)
        }
    };
    let lhs = st_integral(&integrand, a, b, p, 1e-13)?;
    let side = |r: f64| -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(q_periodic_eval(qp, r / phi)? * st_integral(f, 0.0, r, p, 1e-13)?)
    };
    Ok((lhs - (side(b)? - side(a)?)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn constant_integrates_to_length() {
        let p = StParams::from_int(5, -6).unwrap();
        let one = |_x: f64| 1.0;
        let v = st_integral(&one, 0.0, 2.0, &p, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        let v = st_integral(&one, 0.5, 2.0, &p, 1e-12).unwrap();
        assert!((v - 1.5).abs() < 1e-10);
    }

    #[test]
    fn linear_integrand_closed_form() {
        // int_0^b r dr = b^2/{2} = b^2/s.
        let p = StParams::from_int(5, -6).unwrap();
        let id = |x: f64| x;
        for b in [0.5, 1.0, 3.0] {
            let v = st_integral(&id, 0.0, b, &p, 1e-13).unwrap();
            assert!((v - b * b / 5.0).abs() < 1e-10, "b = {b}");
        }
    }

    #[test]
    fn monomials_match_basis_action() {
        // int_0^b D(x^n) = b^n for n <= 8.
        let p = StParams::from_int(3, -2).unwrap();
        for n in 1..=8i32 {
            let pr = &p;
            let df = move |x: f64| st_derivative(&|y: f64| y.powi(n), pr, 1.0, x);
            let v = st_integral(&df, 0.0, 1.0, &p, 1e-13).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "n = {n}: {v}");
        }
    }

    #[test]
    fn q_negative_branch() {
        // (1,1) has q < 0: alternating lattice, still convergent.
        let p = StParams::fibonacci();
        let one = |_x: f64| 1.0;
        let v = st_integral(&one, 0.0, 1.0, &p, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        let id = |x: f64| x;
        let v = st_integral(&id, 0.0, 1.0, &p, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10); // b^2/s with s = 1
    }

    #[test]
    fn q_greater_one_branch() {
        // s < 0 puts |q| > 1; the swapped-root formula still satisfies
        // int_0^b r dr = b^2/s (antiderivative x^2/{2}, {2} = s = -5).
        let p = StParams::from_int(-5, -6).unwrap();
        let id = |x: f64| x;
        let v = st_integral(&id, 0.0, 1.0, &p, 1e-13).unwrap();
        assert!((v + 0.2).abs() < 1e-10, "got {v}");
        let f = |x: f64| x.powi(3);
        let r = fundamental_theorem_residual(&f, 0.0, 1.0, &p).unwrap();
        assert!(r < 1e-9, "residual {r}");
    }

    #[test]
    fn degenerate_q_rejected() {
        let p = StParams::from_int(2, -1).unwrap();
        assert!(matches!(
            st_integral(&|_x| 1.0, 0.0, 1.0, &p, 1e-10),
            Err(StError::DegenerateQ(_))
        ));
    }

    #[test]
    fn scaling_under_deformation() {
        // int_a^b f d_{us,u^2 t} = u * int_{a/u}^{b/u} f d_{s,t}.
        let p = StParams::from_int(5, -6).unwrap();
        let u = 0.5;
        let d = crate::params::deform(
            &p,
            &crate::params::Deformation::new(Scalar::from_f64(u)).unwrap(),
        )
        .unwrap();
        let f = |x: f64| x * x - x + 1.0;
        let (a, b) = (0.25, 1.5);
        let lhs = st_integral(&f, a, b, &d, 1e-13).unwrap();
        let rhs = u * st_integral(&f, a / u, b / u, &p, 1e-13).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn fundamental_theorem() {
        let cases: [(i64, i64); 3] = [(5, -6), (3, -2), (1, 1)];
        for (s, t) in cases {
            let p = StParams::from_int(s, t).unwrap();
            let f = |x: f64| x.powi(3);
            let r = fundamental_theorem_residual(&f, 0.0, 1.0, &p).unwrap();
            assert!(r < 1e-9, "(s,t)=({s},{t}): residual {r}");
            let c = |_x: f64| 4.0;
            let r = fundamental_theorem_residual(&c, 0.0, 1.0, &p).unwrap();
            assert!(r < 1e-12);
        }
    }

    #[test]
    fn integration_by_parts() {
        for (s, t) in [(5i64, -6i64), (3, -2), (1, 1)] {
            let p = StParams::from_int(s, t).unwrap();
            let f = |x: f64| x * x;
            let g = |x: f64| x * x * x;
            let r = integration_by_parts_residual(&f, &g, 0.0, 1.0, &p).unwrap();
            assert!(r < 1e-8, "(s,t)=({s},{t}): residual {r}");
            // f = 1 reduces to the fundamental theorem.
            let one = |_x: f64| 1.0;
            let r = integration_by_parts_residual(&one, &g, 0.0, 1.0, &p).unwrap();
            assert!(r < 1e-9);
            let id = |x: f64| x;
            let r = integration_by_parts_residual(&id, &id, 0.0, 1.0, &p).unwrap();
            assert!(r < 1e-9);
        }
    }

    #[test]
    fn q_periodic_factor_rule() {
        let p = StParams::from_int(5, -6).unwrap();
        let qp = QPeriodic::constant(3.0, p.clone()).unwrap();
        let one = |_x: f64| 1.0;
        let r = q_periodic_factor_check(&qp, &one, 0.0, 1.0, &p).unwrap();
        assert!(r < 1e-10, "constant factor residual {r}");
        let qp = QPeriodic::sin2pi(p.clone()).unwrap();
        let r = q_periodic_factor_check(&qp, &one, 0.0, 1.0, &p).unwrap();
        assert!(r < 1e-8, "sin residual {r}");
        let qp = QPeriodic::cos2pi(p.clone()).unwrap();
        let id = |x: f64| x;
        let r = q_periodic_factor_check(&qp, &id, 0.0, 1.0, &p).unwrap();
        assert!(r < 1e-8, "cos residual {r}");
        // Nonzero lower endpoint.
        let r = q_periodic_factor_check(&qp, &id, 0.5, 1.0, &p).unwrap();
        assert!(r < 1e-8);
    }

    #[test]
    fn monotonicity_and_triangle() {
        let p = StParams::from_int(5, -6).unwrap();
        let f = |x: f64| x * x - 1.0;
        let g = |x: f64| x * x + 0.5; // f <= g everywhere
        let (a, b) = (-1.0, 1.5);
        let int_f = st_integral(&f, a, b, &p, 1e-12).unwrap();
        let int_g = st_integral(&g, a, b, &p, 1e-12).unwrap();
        assert!(int_f <= int_g + 1e-12);
        // |int f| <= int |f| for a <= 0 <= b.
        let h = |x: f64| x.powi(3) - 0.3;
        let int_h = st_integral(&h, a, b, &p, 1e-12).unwrap();
        let int_abs = st_integral(&|x: f64| h(x).abs(), a, b, &p, 1e-12).unwrap();
        assert!(int_h.abs() <= int_abs + 1e-12);
    }

    #[test]
    fn linearity_of_integral() {
        let p = StParams::from_int(3, -2).unwrap();
        let f = |x: f64| x * x;
        let g = |x: f64| 1.0 - x;
        let combo = |x: f64| 2.0 * f(x) - 3.0 * g(x);
        let lhs = st_integral(&combo, 0.0, 1.0, &p, 1e-13).unwrap();
        let rhs = 2.0 * st_integral(&f, 0.0, 1.0, &p, 1e-13).unwrap()
            - 3.0 * st_integral(&g, 0.0, 1.0, &p, 1e-13).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn series_antiderivative_shifts() {
        let p = StParams::from_int(5, -6).unwrap();
        let mk = |c: &[i64]| {
            TruncatedEgf::new(p.clone(), c.iter().map(|v| Scalar::from_int(*v)).collect())
                .unwrap()
        };
        let zero = series_antiderivative(&mk(&[0, 0]));
        assert_eq!(zero.coeffs(), mk(&[0, 0, 0]).coeffs());
        let anti = series_antiderivative(&mk(&[1, 1, 1]));
        assert_eq!(anti.coeffs(), mk(&[0, 1, 1, 1]).coeffs());
        // derivative of antiderivative is the identity on coefficients
        let back = crate::operators::series_derivative(&anti);
        assert_eq!(back.coeffs(), mk(&[1, 1, 1]).coeffs());
    }

    #[test]
    fn lattice_points_ratio() {
        let p = StParams::from_int(5, -6).unwrap();
        let lat = QLattice::new(&p, 1.0, 5).unwrap();
        assert!((lat.points[0] - 1.0 / 3.0).abs() < 1e-15);
        for w in lat.points.windows(2) {
            assert!((w[1] / w[0] - 2.0 / 3.0).abs() < 1e-12);
        }
        // |q| > 1 uses q^{-1} and phi'.
        let p = StParams::from_int(-5, -6).unwrap(); // phi = -2, phi' = -3, q = 3/2
        let lat = QLattice::new(&p, 1.0, 3).unwrap();
        assert!((lat.points[0] + 1.0 / 3.0).abs() < 1e-14);
        for w in lat.points.windows(2) {
            assert!((w[1] / w[0] - 2.0 / 3.0).abs() < 1e-12);
        }
    }
}
