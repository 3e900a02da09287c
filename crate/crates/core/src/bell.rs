//! Partial Bell polynomials and Faa di Bruno composition of exponential
//! generating functions.
//!
//! B_{n,k}(x_1,...,x_{n-k+1}) is the sum over partitions of n with exactly
//! k parts of n!/(j_1!...j_n!) * prod_h (x_h/h!)^{j_h}, where j_h counts
//! parts of size h. Factorial coefficients are computed with big integers;
//! the result only becomes a float when the arguments are floats.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::One;

use crate::error::{Result, StError};
use crate::scalar::Scalar;

/// Default cap on n; partition counts grow subexponentially but the
/// solver never needs more than this.
pub const DEFAULT_BELL_CAP: u32 = 64;

/// Validated arguments for B_{n,k}: 1 <= k <= n and exactly n-k+1 inputs.
#[derive(Clone, Debug)]
pub struct BellArgs {
    n: u32,
    k: u32,
    x: Vec<Scalar>,
}

impl BellArgs {
    pub fn new(n: u32, k: u32, x: Vec<Scalar>) -> Result<Self> {
        Self::with_cap(n, k, x, DEFAULT_BELL_CAP)
    }

    pub fn with_cap(n: u32, k: u32, x: Vec<Scalar>, cap: u32) -> Result<Self> {
        if n < 1 || k < 1 || k > n {
            return Err(StError::InvalidArgument(format!(
                "partial Bell polynomial needs 1 <= k <= n, got n={n}, k={k}"
            )));
        }
        if n > cap {
            return Err(StError::InvalidArgument(format!(
                "n={n} exceeds the Bell polynomial cap {cap}"
            )));
        }
        let want = (n - k + 1) as usize;
        if x.len() != want {
            return Err(StError::InvalidArgument(format!(
                "B_{{{n},{k}}} takes {want} arguments, got {}",
                x.len()
            )));
        }
        Ok(BellArgs { n, k, x })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

/// A partition of n with exactly k parts, as (part size, multiplicity)
/// pairs with increasing part size.
type Partition = Vec<(u32, u32)>;

fn partition_cache() -> &'static Mutex<HashMap<(u32, u32), Arc<Vec<Partition>>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<Vec<Partition>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// All partitions of n into exactly k parts, memoized per (n,k).
fn partitions(n: u32, k: u32) -> Arc<Vec<Partition>> {
    if let Some(hit) = partition_cache().lock().unwrap().get(&(n, k)) {
        return Arc::clone(hit);
    }
    let mut out = Vec::new();
    let mut current: Partition = Vec::new();
    // Choose parts in decreasing size so multiplicity grouping is direct.
    fn rec(remaining: u32, parts_left: u32, max_part: u32, current: &mut Partition, out: &mut Vec<Partition>) {
        if parts_left == 0 {
            if remaining == 0 {
                let mut p = current.clone();
                p.reverse();
                out.push(p);
            }
            return;
        }
        // Each remaining part is at least 1 and at most max_part.
        let hi = max_part.min(remaining.saturating_sub(parts_left - 1));
        for size in (1..=hi).rev() {
            if size * parts_left < remaining {
                break;
            }
            // Take m parts of this size.
            let max_m = (remaining / size).min(parts_left);
            for m in 1..=max_m {
                current.push((size, m));
                rec(
                    remaining - size * m,
                    parts_left - m,
                    size.saturating_sub(1),
                    current,
                    out,
                );
                current.pop();
            }
        }
    }
    rec(n, k, n, &mut current, &mut out);
    let arc = Arc::new(out);
    partition_cache()
        .lock()
        .unwrap()
        .insert((n, k), Arc::clone(&arc));
    arc
}

fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n as u64 {
        acc *= i;
    }
    acc
}

/// Partial Bell polynomial B_{n,k}(x_1,...,x_{n-k+1}); exact for exact
/// arguments.
pub fn partial_bell(args: &BellArgs) -> Scalar {
    let n = args.n;
    let k = args.k;
    let mut sum = Scalar::zero();
    for part in partitions(n, k).iter() {
        // coefficient n! / (prod j_h! * prod (h!)^{j_h})
        let mut den = BigInt::one();
        for &(h, j) in part {
            den *= factorial(j);
            let hf = factorial(h);
            for _ in 0..j {
                den *= &hf;
            }
        }
        let coeff = Scalar::Exact(BigRational::new(factorial(n), den));
        let mut term = coeff;
        for &(h, j) in part {
            term = &term * &args.x[(h - 1) as usize].powu(j);
        }
        sum = &sum + &term;
    }
    sum
}

/// Faa di Bruno composition of exponential generating functions.
///
/// `f_derivs[k]` holds f^(k)(b_0) (index 0 is f(b_0) itself) and `g` holds
/// classical EGF coefficients b_0..b_N of the inner function. Returns the
/// classical EGF coefficients of f(g(x)) through order N:
/// h_0 = f(b_0), h_n = sum_k f^(k)(b_0) B_{n,k}(b_1,...,b_{n-k+1}).
pub fn compose_egf(f_derivs: &[Scalar], g: &[Scalar]) -> Result<Vec<Scalar>> {
    if f_derivs.is_empty() || g.is_empty() {
        return Err(StError::InvalidArgument(
            "compose_egf needs at least the constant coefficient of each series".into(),
        ));
    }
    let order = g.len() - 1;
    let mut out = Vec::with_capacity(order + 1);
    out.push(f_derivs[0].clone());
    for n in 1..=order as u32 {
        let mut h = Scalar::zero();
        let k_max = (f_derivs.len() as u32 - 1).min(n);
        for k in 1..=k_max {
            let fk = &f_derivs[k as usize];
            if fk.is_zero() {
                continue;
            }
            let xs: Vec<Scalar> = (1..=(n - k + 1))
                .map(|h_idx| g[h_idx as usize].clone())
                .collect();
            let args = BellArgs::with_cap(n, k, xs, u32::MAX)?;
            h = &h + &(fk * &partial_bell(&args));
        }
        out.push(h);
    }
    Ok(out)
}
