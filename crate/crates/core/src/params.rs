//! Parameter pairs (s,t), their characteristic roots, and deformations.
//!
//! The recurrence {n+2} = s{n+1} + t{n} has characteristic polynomial
//! x^2 - sx - t with roots phi = (s + sqrt(s^2+4t))/2 and
//! phi' = (s - sqrt(s^2+4t))/2. The ratio q = phi'/phi drives every
//! convergence statement in the crate. Admissible parameters have s != 0
//! and s^2 + 4t >= 0; a zero discriminant means q = 1 (the pair is
//! proportional to (2,-1)) and is accepted but flagged, because the
//! q-lattice collapses there. The pair (s, 0) with s < 0 is rejected:
//! its larger root is zero and q is undefined.

use std::cmp::Ordering;

use crate::error::{Result, StError};
use crate::scalar::Scalar;

/// Relative tolerance for float-mode comparisons of roots and thresholds.
pub const ROOT_CMP_TOL: f64 = 1e-12;

/// Validated (s,t) pair with derived roots and ratio.
#[derive(Clone, Debug)]
pub struct StParams {
    s: Scalar,
    t: Scalar,
    disc: Scalar,
    sqrt_disc: Scalar,
    phi: Scalar,
    phi_prime: Scalar,
    q: Scalar,
    degenerate_q: bool,
}

/// Which characteristic root a comparison refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Root {
    Phi,
    PhiPrime,
}

/// Sign regime of q; |q| = 1 can only mean q = 1 here (zero discriminant),
/// since q = -1 would force s = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QRegime {
    /// |q| < 1, equivalently s > 0.
    AbsLessOne,
    /// |q| > 1, equivalently s < 0.
    AbsGreaterOne,
    /// q = 1, the flagged degenerate pair proportional to (2,-1).
    One,
}

impl StParams {
    /// Build parameters from s and t, deriving the roots.
    ///
    /// Rejects s = 0, negative discriminant, and (s<0, t=0). A zero
    /// discriminant is accepted with the `degenerate_q` flag set.
    pub fn new(s: Scalar, t: Scalar) -> Result<Self> {
        if s.is_zero() {
            return Err(StError::DegenerateParams("s must be nonzero".into()));
        }
        let four = Scalar::from_int(4);
        let disc = &(&s * &s) + &(&four * &t);
        match disc.signum_i() {
            -1 => {
                return Err(StError::DegenerateParams(format!(
                    "discriminant s^2+4t = {disc} is negative"
                )))
            }
            0 => {
                // q = 1: phi = phi' = s/2.
                let half_s = &s / &Scalar::from_int(2);
                return Ok(StParams {
                    s,
                    t,
                    disc: Scalar::zero(),
                    sqrt_disc: Scalar::zero(),
                    phi: half_s.clone(),
                    phi_prime: half_s,
                    q: Scalar::one(),
                    degenerate_q: true,
                });
            }
            _ => {}
        }
        if t.is_zero() && s.signum_i() < 0 {
            return Err(StError::DegenerateParams(
                "(s,0) with s<0 has a zero Fibonacci constant, q undefined".into(),
            ));
        }
        let sqrt_disc = disc.sqrt();
        let two = Scalar::from_int(2);
        let phi = &(&s + &sqrt_disc) / &two;
        let phi_prime = &(&s - &sqrt_disc) / &two;
        let q = &phi_prime / &phi;
        Ok(StParams {
            s,
            t,
            disc,
            sqrt_disc,
            phi,
            phi_prime,
            q,
            degenerate_q: false,
        })
    }

    pub fn from_f64(s: f64, t: f64) -> Result<Self> {
        StParams::new(Scalar::from_f64(s), Scalar::from_f64(t))
    }

    pub fn from_int(s: i64, t: i64) -> Result<Self> {
        StParams::new(Scalar::from_int(s), Scalar::from_int(t))
    }

    // Named specializations.

    /// (1,1): Fibonacci numbers.
    pub fn fibonacci() -> Self {
        StParams::from_int(1, 1).unwrap()
    }

    /// (2,1): Pell numbers.
    pub fn pell() -> Self {
        StParams::from_int(2, 1).unwrap()
    }

    /// (1,2): Jacobsthal numbers.
    pub fn jacobsthal() -> Self {
        StParams::from_int(1, 2).unwrap()
    }

    /// (3,-2): Mersenne numbers 2^n - 1.
    pub fn mersenne() -> Self {
        StParams::from_int(3, -2).unwrap()
    }

    /// (p+q, -pq): the (p,q)-numbers (p^n - q^n)/(p - q).
    pub fn pq(p: Scalar, q: Scalar) -> Result<Self> {
        StParams::new(&p + &q, -&(&p * &q))
    }

    /// (2r, -1): Chebyshev-U values {n} = U_{n-1}(r); needs |r| > 1 for a
    /// positive discriminant (|r| = 1 is accepted as the degenerate pair).
    pub fn chebyshev(r: Scalar) -> Result<Self> {
        StParams::new(&Scalar::from_int(2) * &r, Scalar::from_int(-1))
    }

    /// (P, -Q): the Lucas sequence U_n(P, Q).
    pub fn lucas(p_coef: Scalar, q_coef: Scalar) -> Result<Self> {
        StParams::new(p_coef, -&q_coef)
    }

    pub fn s(&self) -> &Scalar {
        &self.s
    }

    pub fn t(&self) -> &Scalar {
        &self.t
    }

    /// Discriminant s^2 + 4t.
    pub fn disc(&self) -> &Scalar {
        &self.disc
    }

    pub fn sqrt_disc(&self) -> &Scalar {
        &self.sqrt_disc
    }

    /// The (s,t)-Fibonacci constant, root (s + sqrt(s^2+4t))/2.
    pub fn phi(&self) -> &Scalar {
        &self.phi
    }

    /// The conjugate root (s - sqrt(s^2+4t))/2.
    pub fn phi_prime(&self) -> &Scalar {
        &self.phi_prime
    }

    /// Ratio q = phi'/phi, invariant under deformation.
    pub fn q(&self) -> &Scalar {
        &self.q
    }

    /// True when the discriminant vanishes (q = 1).
    pub fn is_degenerate_q(&self) -> bool {
        self.degenerate_q
    }

    /// True when s, t (and hence all recurrence values) are exact rationals.
    pub fn is_exact(&self) -> bool {
        self.s.is_exact() && self.t.is_exact()
    }

    /// True when the roots themselves are exact (perfect-square discriminant).
    pub fn has_exact_roots(&self) -> bool {
        self.is_exact() && self.sqrt_disc.is_exact()
    }

    pub fn q_regime(&self) -> QRegime {
        if self.degenerate_q {
            QRegime::One
        } else if self.s.signum_i() > 0 {
            QRegime::AbsLessOne
        } else {
            QRegime::AbsGreaterOne
        }
    }

    /// Exact sign of phi (+1, 0 never occurs post-construction, -1).
    pub fn phi_sign(&self) -> i32 {
        if self.degenerate_q {
            return self.s.signum_i();
        }
        // phi > 0 iff s > 0 or t > 0.
        if self.s.signum_i() > 0 || self.t.signum_i() > 0 {
            1
        } else {
            -1
        }
    }

    /// Exact sign of phi'.
    pub fn phi_prime_sign(&self) -> i32 {
        if self.degenerate_q {
            return self.s.signum_i();
        }
        // phi' < 0 iff s < 0 or t > 0; phi' = 0 iff t = 0 (with s > 0).
        if self.t.is_zero() {
            0
        } else if self.s.signum_i() < 0 || self.t.signum_i() > 0 {
            -1
        } else {
            1
        }
    }

    /// Compare a root against a rational or float threshold `c`.
    ///
    /// When s, t, c are all exact this is an exact algebraic comparison even
    /// if the root itself is irrational: the sign of phi - c equals the sign
    /// of sqrt(D) - (2c - s), decidable by squaring. Float mode uses a
    /// relative equality collar of [`ROOT_CMP_TOL`].
    pub fn cmp_root(&self, root: Root, c: &Scalar) -> Ordering {
        if self.has_exact_roots() && c.is_exact() {
            let r = match root {
                Root::Phi => &self.phi,
                Root::PhiPrime => &self.phi_prime,
            };
            return r.partial_cmp(c).unwrap();
        }
        if self.is_exact() && c.is_exact() {
            let e = &(&Scalar::from_int(2) * c) - &self.s; // 2c - s
            let e_sq = &e * &e;
            return match root {
                Root::Phi => {
                    // sign(phi - c) = sign(sqrt(D) - e)
                    if e.signum_i() < 0 {
                        Ordering::Greater
                    } else {
                        self.disc.partial_cmp(&e_sq).unwrap()
                    }
                }
                Root::PhiPrime => {
                    // sign(phi' - c) = -sign(sqrt(D) + e)
                    if e.signum_i() >= 0 {
                        Ordering::Less
                    } else {
                        e_sq.partial_cmp(&self.disc).unwrap()
                    }
                }
            };
        }
        let r = match root {
            Root::Phi => self.phi.to_f64(),
            Root::PhiPrime => self.phi_prime.to_f64(),
        };
        let cv = c.to_f64();
        if (r - cv).abs() <= ROOT_CMP_TOL * r.abs().max(cv.abs()).max(1.0) {
            Ordering::Equal
        } else {
            r.partial_cmp(&cv).unwrap()
        }
    }

    /// Compare |root| against a nonnegative threshold `c`.
    pub fn cmp_abs_root(&self, root: Root, c: &Scalar) -> Ordering {
        let sign = match root {
            Root::Phi => self.phi_sign(),
            Root::PhiPrime => self.phi_prime_sign(),
        };
        if sign >= 0 {
            self.cmp_root(root, c)
        } else {
            self.cmp_root(root, &-c).reverse()
        }
    }
}

impl PartialEq for StParams {
    fn eq(&self, other: &Self) -> bool {
        self.s == other.s && self.t == other.t
    }
}

/// Positive deformation parameter u, mapping (s,t) to (us, u^2 t).
#[derive(Clone, Debug, PartialEq)]
pub struct Deformation(Scalar);

impl Deformation {
    pub fn new(u: Scalar) -> Result<Self> {
        if u.signum_i() <= 0 {
            return Err(StError::InvalidArgument(format!(
                "deformation parameter must be positive, got {u}"
            )));
        }
        Ok(Deformation(u))
    }

    pub fn value(&self) -> &Scalar {
        &self.0
    }
}

/// Deform (s,t) to (us, u^2 t). The ratio q is unchanged; both roots scale
/// by u.
pub fn deform(p: &StParams, u: &Deformation) -> Result<StParams> {
    let uv = u.value();
    StParams::new(uv * &p.s, &(uv * uv) * &p.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0),
            "{a} vs {b}"
        );
    }

    #[test]
    fn golden_ratio_roots() {
        let p = StParams::fibonacci();
        assert_close(p.phi().to_f64(), (1.0 + 5f64.sqrt()) / 2.0, 1e-15);
        assert_close(p.phi_prime().to_f64(), (1.0 - 5f64.sqrt()) / 2.0, 1e-15);
        assert!(!p.has_exact_roots());
    }

    #[test]
    fn rational_roots_when_perfect_square() {
        let p = StParams::from_int(5, -6).unwrap();
        assert_eq!(p.phi(), &Scalar::from_int(3));
        assert_eq!(p.phi_prime(), &Scalar::from_int(2));
        assert_eq!(p.q(), &Scalar::ratio(2, 3));
        assert!(p.has_exact_roots());
    }

    #[test]
    fn degenerate_pair_flagged() {
        let p = StParams::from_int(2, -1).unwrap();
        assert!(p.is_degenerate_q());
        assert_eq!(p.phi(), &Scalar::one());
        assert_eq!(p.phi_prime(), &Scalar::one());
        assert_eq!(p.q(), &Scalar::one());
    }

    #[test]
    fn invalid_pairs_rejected() {
        assert!(StParams::from_int(0, 1).is_err());
        assert!(StParams::from_int(1, -1).is_err()); // disc = -3
        assert!(StParams::from_int(-2, 0).is_err()); // zero Fibonacci constant
    }

    #[test]
    fn root_identities() {
        for (s, t) in [(1.0, 1.0), (2.0, 1.0), (1.0, 2.0), (3.0, -2.0), (-1.0, 1.0)] {
            let p = StParams::from_f64(s, t).unwrap();
            let (phi, phip) = (p.phi().to_f64(), p.phi_prime().to_f64());
            assert_close(phi * phip, -t, 1e-12);
            assert_close(phi + phip, s, 1e-12);
            assert_close(p.q().to_f64(), phip / phi, 1e-12);
        }
    }

    #[test]
    fn q_sign_cases() {
        // t > 0 gives q < 0; t < 0, s > 0 gives 0 < q < 1; t < 0, s < 0 gives q > 1.
        assert!(StParams::from_int(1, 1).unwrap().q().to_f64() < 0.0);
        let q = StParams::from_int(5, -6).unwrap().q().to_f64();
        assert!(q > 0.0 && q < 1.0);
        assert!(StParams::from_int(-5, -6).unwrap().q().to_f64() > 1.0);
    }

    #[test]
    fn deformation_examples() {
        let p = StParams::fibonacci();
        let d = deform(&p, &Deformation::new(Scalar::ratio(1, 2)).unwrap()).unwrap();
        assert_eq!(d.s(), &Scalar::ratio(1, 2));
        assert_eq!(d.t(), &Scalar::ratio(1, 4));

        let p = StParams::from_int(5, -6).unwrap();
        let d = deform(&p, &Deformation::new(Scalar::from_int(2)).unwrap()).unwrap();
        assert_eq!(d.s(), &Scalar::from_int(10));
        assert_eq!(d.t(), &Scalar::from_int(-24));
        assert_eq!(d.q(), &Scalar::ratio(2, 3));
        // phi scales by u.
        assert_eq!(d.phi(), &Scalar::from_int(6));
    }

    #[test]
    fn deform_identity() {
        let p = StParams::from_int(5, -6).unwrap();
        let d = deform(&p, &Deformation::new(Scalar::one()).unwrap()).unwrap();
        assert_eq!(&d, &p);
    }

    #[test]
    fn exact_root_comparison_irrational() {
        // phi(1,1) = 1.618..., phi'(1,1) = -0.618...
        let p = StParams::fibonacci();
        assert_eq!(p.cmp_root(Root::Phi, &Scalar::ratio(3, 2)), Ordering::Greater);
        assert_eq!(p.cmp_root(Root::Phi, &Scalar::from_int(2)), Ordering::Less);
        assert_eq!(
            p.cmp_root(Root::PhiPrime, &Scalar::ratio(-1, 2)),
            Ordering::Less
        );
        assert_eq!(
            p.cmp_root(Root::PhiPrime, &Scalar::from_int(-1)),
            Ordering::Greater
        );
        // |phi'| vs 0.618...: exactly between squares.
        assert_eq!(
            p.cmp_abs_root(Root::PhiPrime, &Scalar::ratio(618, 1000)),
            Ordering::Greater
        );
        assert_eq!(
            p.cmp_abs_root(Root::PhiPrime, &Scalar::ratio(619, 1000)),
            Ordering::Less
        );
    }

    #[test]
    fn exact_root_comparison_rational() {
        let p = StParams::from_int(5, -6).unwrap();
        assert_eq!(p.cmp_root(Root::Phi, &Scalar::from_int(3)), Ordering::Equal);
        assert_eq!(
            p.cmp_abs_root(Root::PhiPrime, &Scalar::from_int(2)),
            Ordering::Equal
        );
    }

    fn small_rational() -> impl Strategy<Value = Scalar> {
        (-6i64..=6, 1i64..=4).prop_map(|(p, q)| Scalar::ratio(p, q))
    }

    proptest! {
        #[test]
        fn deform_composes(( s, t) in (1i64..=5, -4i64..=4).prop_filter("valid", |(s,t)| {
            s*s + 4*t > 0
        }), u in 1i64..=4, v in 1i64..=4) {
            let p = StParams::from_int(s, t).unwrap();
            let du = Deformation::new(Scalar::ratio(u, 2)).unwrap();
            let dv = Deformation::new(Scalar::ratio(v, 3)).unwrap();
            let duv = Deformation::new(Scalar::ratio(u * v, 6)).unwrap();
            let a = deform(&deform(&p, &du).unwrap(), &dv).unwrap();
            let b = deform(&p, &duv).unwrap();
            prop_assert_eq!(a.s().clone(), b.s().clone());
            prop_assert_eq!(a.t().clone(), b.t().clone());
            // q invariant under deformation (exact when roots are exact).
            if p.has_exact_roots() {
                prop_assert_eq!(a.q().clone(), p.q().clone());
            } else {
                prop_assert!(a.q().approx_eq(p.q(), 1e-12));
            }
        }

        #[test]
        fn quadratic_comparison_matches_float(c in small_rational()) {
            let p = StParams::fibonacci();
            let exact = p.cmp_root(Root::Phi, &c);
            let f = p.phi().to_f64() - c.to_f64();
            if f.abs() > 1e-9 {
                prop_assert_eq!(exact, f.partial_cmp(&0.0).unwrap());
            }
        }
    }
}
