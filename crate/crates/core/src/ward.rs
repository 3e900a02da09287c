//! The Ward ring of truncated (s,t)-exponential generating functions.
//!
//! A series lives in the basis x^n/{n}_{s,t}! with coefficients a_0..a_N.
//! Addition is coefficient-wise; the product convolves through the
//! fibonomials: c_n = sum_k C(n,k)_{s,t} a_k b_{n-k}. Deformed evaluation
//! weights term n by u^C(n,2), and convergence of that deformed series is
//! classified by the position of |u| relative to the characteristic roots.

use serde::Serialize;

use crate::error::{Result, StError};
use crate::params::{QRegime, Root, StParams};
use crate::scalar::Scalar;
use crate::sequences::{fibonomial, fibotorial};

/// Default truncation order for series produced by the solvers.
pub const DEFAULT_ORDER: usize = 32;

/// Truncated series sum a_n x^n/{n}_{s,t}!.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedEgf {
    params: StParams,
    coeffs: Vec<Scalar>,
}

/// Convergence classification of a deformed series.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceClass {
    Entire,
    Disk { radius: f64 },
    #[serde(rename = "point")]
    PointOnly,
}

/// Value of a deformed series evaluation along with its geometric tail
/// estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EgfEval {
    pub value: f64,
    pub tail_bound: f64,
    /// Terms actually summed (N + 1 unless trailing coefficients vanish).
    pub terms: usize,
}

impl TruncatedEgf {
    /// Build a series from coefficients a_0..a_N. Fails with `ZeroFactor`
    /// if some {n}! vanishes below the truncation order (excluded
    /// parameter families).
    pub fn new(params: StParams, coeffs: Vec<Scalar>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(StError::InvalidArgument(
                "a truncated series needs at least a_0".into(),
            ));
        }
        // Surface ZeroFactor now rather than at evaluation time.
        fibotorial(&params, &Scalar::one(), coeffs.len() as u32 - 1)?;
        Ok(TruncatedEgf { params, coeffs })
    }

    pub fn params(&self) -> &StParams {
        &self.params
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Plain (undeformed) evaluation sum a_n x^n/{n}!.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_deformed_raw(1.0, x)
    }

    fn eval_deformed_raw(&self, u: f64, x: f64) -> f64 {
        let mut sum = 0.0;
        for (term, _) in self.deformed_terms(u, x) {
            sum += term;
        }
        sum
    }

    /// The deformed terms u^C(n,2) a_n x^n/{n}! as floats.
    fn deformed_terms(&self, u: f64, x: f64) -> Vec<(f64, usize)> {
        let mut denom = 1.0f64; // {n}!
        let mut seq_prev = 0.0;
        let mut seq_cur = 1.0; // {1}
        let s = self.params.s().to_f64();
        let t = self.params.t().to_f64();
        let mut x_pow = 1.0;
        let mut u_pow = 1.0; // u^C(n,2)
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (n, a) in self.coeffs.iter().enumerate() {
            if n > 0 {
                x_pow *= x;
                if n > 1 {
                    u_pow *= u.powi(n as i32 - 1);
                }
                denom *= seq_cur;
                let next = s * seq_cur + t * seq_prev;
                seq_prev = seq_cur;
                seq_cur = next;
            }
            out.push((u_pow * a.to_f64() * x_pow / denom, n));
        }
        out
    }

    /// JSON form `{"s":..,"t":..,"N":..,"basis":"st-egf","coeffs":[..]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "s": self.params.s(),
            "t": self.params.t(),
            "N": self.order(),
            "basis": "st-egf",
            "coeffs": self.coeffs,
        })
    }
}

impl Serialize for TruncatedEgf {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(ser)
    }
}

/// Coefficient-wise sum; the result is truncated to the shorter operand.
pub fn egf_add(f: &TruncatedEgf, g: &TruncatedEgf) -> Result<TruncatedEgf> {
    if f.params != g.params {
        return Err(StError::ParamMismatch);
    }
    let n = f.coeffs.len().min(g.coeffs.len());
    let coeffs = (0..n).map(|i| &f.coeffs[i] + &g.coeffs[i]).collect();
    TruncatedEgf::new(f.params.clone(), coeffs)
}

/// Fibonomial convolution product c_n = sum_k C(n,k)_{s,t} a_k b_{n-k}.
pub fn egf_mul(f: &TruncatedEgf, g: &TruncatedEgf) -> Result<TruncatedEgf> {
    if f.params != g.params {
        return Err(StError::ParamMismatch);
    }
    let n = f.coeffs.len().min(g.coeffs.len());
    let one = Scalar::one();
    let mut coeffs = Vec::with_capacity(n);
    for m in 0..n {
        let mut c = Scalar::zero();
        for k in 0..=m {
            let b = fibonomial(&f.params, &one, m as u32, k as u32)?;
            c = &c + &(&(&b * &f.coeffs[k]) * &g.coeffs[m - k]);
        }
        coeffs.push(c);
    }
    TruncatedEgf::new(f.params.clone(), coeffs)
}

/// Classify the convergence of a deformed series with coefficient ratio
/// limit `alpha` = lim |a_{n+1}/a_n| (supplied by the caller).
///
/// For |q| < 1 the branch points sit at |u| = |phi|; for |q| > 1 at
/// |u| = |phi'|. The pair (2,-1) has its own rule: entire for 0 < u <= 1,
/// convergent only at z = 0 for u > 1. Other zero-discriminant pairs are
/// rejected.
pub fn classify_series(p: &StParams, u: f64, alpha: f64) -> Result<ConvergenceClass> {
    if !(u > 0.0) {
        return Err(StError::InvalidArgument("classify_series requires u > 0".into()));
    }
    if alpha < 0.0 {
        return Err(StError::InvalidArgument("alpha must be >= 0".into()));
    }
    if p.is_degenerate_q() {
        let is_two_minus_one =
            p.s() == &Scalar::from_int(2) && p.t() == &Scalar::from_int(-1);
        if !is_two_minus_one {
            return Err(StError::DegenerateQ(
                "series classification at |q| = 1 is only available for (2,-1)".into(),
            ));
        }
        return Ok(if u <= 1.0 {
            ConvergenceClass::Entire
        } else {
            ConvergenceClass::PointOnly
        });
    }
    let (root, ratio_gap) = match p.q_regime() {
        QRegime::AbsLessOne => (Root::Phi, (1.0 - p.q().to_f64()).abs()),
        QRegime::AbsGreaterOne => {
            let q = p.q().to_f64();
            (Root::PhiPrime, (1.0 / q - 1.0).abs())
        }
        QRegime::One => unreachable!(),
    };
    let us = Scalar::from_f64(u);
    match p.cmp_abs_root(root, &us) {
        std::cmp::Ordering::Greater => Ok(ConvergenceClass::Entire),
        std::cmp::Ordering::Equal => {
            if alpha == 0.0 {
                Ok(ConvergenceClass::Entire)
            } else {
                Ok(ConvergenceClass::Disk {
                    radius: 1.0 / (alpha * ratio_gap),
                })
            }
        }
        std::cmp::Ordering::Less => Ok(ConvergenceClass::PointOnly),
    }
}

/// Estimate lim |a_{n+1}/a_n| from the trailing nonzero coefficients.
/// With fewer than two nonzero coefficients the series is a monomial and
/// the estimate is 0.
pub fn estimate_alpha(coeffs: &[Scalar]) -> f64 {
    let nonzero: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.to_f64().abs()))
        .collect();
    if nonzero.len() < 2 {
        return 0.0;
    }
    let (i, a) = nonzero[nonzero.len() - 2];
    let (j, b) = nonzero[nonzero.len() - 1];
    (b / a).powf(1.0 / (j - i) as f64)
}

/// Evaluate the deformed series sum u^C(n,2) a_n x^n/{n}! with a
/// geometric tail bound extrapolated from the last two retained terms.
///
/// The point must be admitted by the convergence classification (with
/// alpha estimated from the coefficients); evaluation refuses to report a
/// value when the extrapolated term ratio reaches 1.
pub fn egf_eval(f: &TruncatedEgf, u: f64, x: f64) -> Result<EgfEval> {
    // u = 0 only keeps n = 0, 1 (0^0 = 1 convention in u^C(n,2)).
    if u != 0.0 {
        let class = classify_series(f.params(), u.abs(), estimate_alpha(&f.coeffs))?;
        match class {
            ConvergenceClass::Entire => {}
            ConvergenceClass::Disk { radius } => {
                if x.abs() >= radius {
                    return Err(StError::OutsideDomain(format!(
                        "|x| = {} is outside the convergence disk of radius {radius}",
                        x.abs()
                    )));
                }
            }
            ConvergenceClass::PointOnly => {
                if x != 0.0 {
                    return Err(StError::OutsideDomain(
                        "series converges only at x = 0 for this deformation".into(),
                    ));
                }
            }
        }
    }
    let terms = f.deformed_terms(u, x);
    let value: f64 = terms.iter().map(|(t, _)| t).sum();
    let nonzero: Vec<(f64, usize)> = terms
        .iter()
        .copied()
        .filter(|(t, _)| *t != 0.0)
        .collect();
    if nonzero.len() < 2 {
        return Ok(EgfEval {
            value,
            tail_bound: 0.0,
            terms: terms.len(),
        });
    }
    let (t_prev, i) = nonzero[nonzero.len() - 2];
    let (t_last, j) = nonzero[nonzero.len() - 1];
    let r = (t_last.abs() / t_prev.abs()).powf(1.0 / (j - i) as f64);
    if !(r < 1.0) {
        return Err(StError::NonConvergentSum(format!(
            "trailing term ratio {r:.3} >= 1; raise the truncation order"
        )));
    }
    let first_omitted = t_last.abs() * r;
    Ok(EgfEval {
        value,
        tail_bound: first_omitted / (1.0 - r),
        terms: terms.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::binom2;
    use proptest::prelude::*;

    fn int(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    fn series(p: &StParams, c: &[i64]) -> TruncatedEgf {
        TruncatedEgf::new(p.clone(), c.iter().map(|v| int(*v)).collect()).unwrap()
    }

    #[test]
    fn add_basic() {
        let p = StParams::from_int(5, -6).unwrap();
        let f = series(&p, &[1, 1, 1, 1]);
        let zero = series(&p, &[0, 0, 0, 0]);
        assert_eq!(egf_add(&f, &zero).unwrap(), f);
        let g = series(&p, &[1, 1, 1, 1]);
        assert_eq!(egf_add(&f, &g).unwrap(), series(&p, &[2, 2, 2, 2]));
        let other = StParams::fibonacci();
        let h = series(&other, &[1, 1]);
        assert!(matches!(egf_add(&f, &h), Err(StError::ParamMismatch)));
    }

    #[test]
    fn add_of_exp_and_exp_neg_kills_odd_terms() {
        let p = StParams::from_int(5, -6).unwrap();
        let exp_pos = series(&p, &[1, 1, 1, 1, 1, 1]);
        let exp_neg = series(&p, &[1, -1, 1, -1, 1, -1]);
        let sum = egf_add(&exp_pos, &exp_neg).unwrap();
        assert_eq!(sum, series(&p, &[2, 0, 2, 0, 2, 0]));
    }

    #[test]
    fn mul_identity() {
        let p = StParams::from_int(5, -6).unwrap();
        let f = series(&p, &[2, -1, 3, 5]);
        let one = series(&p, &[1, 0, 0, 0]);
        assert_eq!(egf_mul(&f, &one).unwrap(), f);
    }

    #[test]
    fn mul_at_two_minus_one_is_classical_convolution() {
        // (1 + x)^2 = 1 + 2x + x^2 in the classical EGF basis means
        // coefficients (1,1,0..) squared -> (1,2,2,0..) wait: as EGF,
        // 1 + x has a = (1,1,0,...) and its square 1 + 2x + x^2 has
        // EGF coefficients (1, 2, 2, 0, ...) since x^2 = 2 x^2/2!.
        let p = StParams::from_int(2, -1).unwrap();
        let f = series(&p, &[1, 1, 0, 0]);
        let sq = egf_mul(&f, &f).unwrap();
        assert_eq!(sq, series(&p, &[1, 2, 2, 0]));
    }

    #[test]
    fn exp_times_exp_prime_neg_is_one_exact() {
        // Ward coefficients of Exp(z) are phi^C(n,2); of Exp'(-z) are
        // (-1)^n phi'^C(n,2). With rational roots the product telescopes
        // exactly to (1, 0, ..., 0).
        let p = StParams::from_int(5, -6).unwrap();
        let n = 13;
        let phi = p.phi().clone();
        let phip = p.phi_prime().clone();
        let a: Vec<Scalar> = (0..n).map(|k| phi.powu(binom2(k as u32))).collect();
        let b: Vec<Scalar> = (0..n)
            .map(|k| {
                let sign = if k % 2 == 0 { int(1) } else { int(-1) };
                &sign * &phip.powu(binom2(k as u32))
            })
            .collect();
        let fa = TruncatedEgf::new(p.clone(), a).unwrap();
        let fb = TruncatedEgf::new(p.clone(), b).unwrap();
        let prod = egf_mul(&fa, &fb).unwrap();
        assert_eq!(prod.coeffs()[0], int(1));
        for c in &prod.coeffs()[1..] {
            assert!(c.is_zero(), "expected zero, got {c}");
        }
    }

    #[test]
    fn classify_branches() {
        let fib = StParams::fibonacci();
        assert_eq!(
            classify_series(&fib, 1.0, 7.0).unwrap(),
            ConvergenceClass::Entire
        );
        let phi = fib.phi().to_f64();
        let q = fib.q().to_f64();
        match classify_series(&fib, phi, 1.0).unwrap() {
            ConvergenceClass::Disk { radius } => {
                assert!((radius - 1.0 / (1.0 - q).abs()).abs() < 1e-12);
            }
            other => panic!("expected disk, got {other:?}"),
        }
        assert_eq!(
            classify_series(&fib, phi, 0.0).unwrap(),
            ConvergenceClass::Entire
        );
        assert_eq!(
            classify_series(&fib, phi + 0.5, 1.0).unwrap(),
            ConvergenceClass::PointOnly
        );
        // (2,-1) special rule.
        let cls = StParams::from_int(2, -1).unwrap();
        assert_eq!(classify_series(&cls, 1.0, 3.0).unwrap(), ConvergenceClass::Entire);
        assert_eq!(
            classify_series(&cls, 1.5, 3.0).unwrap(),
            ConvergenceClass::PointOnly
        );
        // Other degenerate pairs are rejected.
        let deg = StParams::from_int(4, -4).unwrap();
        assert!(matches!(
            classify_series(&deg, 1.0, 1.0),
            Err(StError::DegenerateQ(_))
        ));
        // |q| > 1 branch uses phi'.
        let neg = StParams::from_int(-5, -6).unwrap(); // phi' = -3
        assert_eq!(
            classify_series(&neg, 2.9, 1.0).unwrap(),
            ConvergenceClass::Entire
        );
        assert_eq!(
            classify_series(&neg, 3.1, 1.0).unwrap(),
            ConvergenceClass::PointOnly
        );
    }

    #[test]
    fn eval_basics() {
        let p = StParams::from_int(5, -6).unwrap();
        let f = series(&p, &[7, 1, 1, 1]);
        assert_eq!(egf_eval(&f, 1.0, 0.0).unwrap().value, 7.0);
        // u = 0 keeps a0 + a1 x.
        let e = egf_eval(&f, 0.0, 2.0).unwrap();
        assert_eq!(e.value, 7.0 + 2.0);
    }

    #[test]
    fn eval_exp_series_tail() {
        let p = StParams::from_int(5, -6).unwrap();
        let f31 = TruncatedEgf::new(p.clone(), vec![int(1); 31]).unwrap();
        let f61 = TruncatedEgf::new(p.clone(), vec![int(1); 61]).unwrap();
        let a = egf_eval(&f31, 0.5, 1.0).unwrap();
        let b = egf_eval(&f61, 0.5, 1.0).unwrap();
        assert!(a.tail_bound < 1e-12, "tail = {}", a.tail_bound);
        assert!((a.value - b.value).abs() <= a.tail_bound + 1e-15);
    }

    #[test]
    fn eval_rejects_outside_disk() {
        let p = StParams::from_int(5, -6).unwrap();
        // u = phi = 3 puts exp-type coefficients on the disk boundary case.
        let f = TruncatedEgf::new(p.clone(), vec![int(1); 25]).unwrap();
        // alpha estimate for all-ones coefficients is 1 -> radius 1/|1-q| = 3.
        assert!(egf_eval(&f, 3.0, 2.9).is_ok());
        assert!(matches!(
            egf_eval(&f, 3.0, 3.1),
            Err(StError::OutsideDomain(_))
        ));
    }

    #[test]
    fn json_shape() {
        let p = StParams::from_int(5, -6).unwrap();
        let f = series(&p, &[1, 2]);
        let v = f.to_json();
        assert_eq!(v["basis"], "st-egf");
        assert_eq!(v["N"], 1);
        assert_eq!(v["s"], 5);
        assert_eq!(v["coeffs"][1], 2);
    }

    fn coeff_strategy() -> impl Strategy<Value = Vec<Scalar>> {
        proptest::collection::vec((-4i64..=4, 1i64..=3).prop_map(|(p, q)| Scalar::ratio(p, q)), 1..=9)
    }

    proptest! {
        #[test]
        fn ring_laws_exact(a in coeff_strategy(), b in coeff_strategy(), c in coeff_strategy()) {
            let p = StParams::from_int(5, -6).unwrap();
            let n = a.len().min(b.len()).min(c.len());
            let fa = TruncatedEgf::new(p.clone(), a[..n].to_vec()).unwrap();
            let fb = TruncatedEgf::new(p.clone(), b[..n].to_vec()).unwrap();
            let fc = TruncatedEgf::new(p.clone(), c[..n].to_vec()).unwrap();
            // commutativity
            prop_assert_eq!(egf_add(&fa, &fb).unwrap(), egf_add(&fb, &fa).unwrap());
            prop_assert_eq!(egf_mul(&fa, &fb).unwrap(), egf_mul(&fb, &fa).unwrap());
            // associativity
            prop_assert_eq!(
                egf_mul(&egf_mul(&fa, &fb).unwrap(), &fc).unwrap(),
                egf_mul(&fa, &egf_mul(&fb, &fc).unwrap()).unwrap()
            );
            // distributivity
            prop_assert_eq!(
                egf_mul(&fa, &egf_add(&fb, &fc).unwrap()).unwrap(),
                egf_add(&egf_mul(&fa, &fb).unwrap(), &egf_mul(&fa, &fc).unwrap()).unwrap()
            );
        }
    }
}
