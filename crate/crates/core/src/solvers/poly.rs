//! Truncated polynomials in x with scalar coefficients, used by the
//! series-mode Picard iteration and the Bell solver.

use crate::error::{Result, StError};
use crate::expr::{BinOp, ExprAst, Var};
use crate::params::StParams;
use crate::scalar::Scalar;
use crate::sequences::st_numbers_upto;

/// Dense polynomial c_0 + c_1 x + ... truncated at a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub c: Vec<Scalar>,
    pub order: usize,
}

impl Poly {
    pub fn constant(v: Scalar, order: usize) -> Self {
        let mut c = vec![Scalar::zero(); order + 1];
        c[0] = v;
        Poly { c, order }
    }

    pub fn identity(order: usize) -> Self {
        let mut c = vec![Scalar::zero(); order + 1];
        if order >= 1 {
            c[1] = Scalar::one();
        }
        Poly { c, order }
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let mut c = self.c.clone();
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a = &*a + b;
        }
        Poly { c, order: self.order }
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let mut c = self.c.clone();
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a = &*a - b;
        }
        Poly { c, order: self.order }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            c: self.c.iter().map(|v| -v).collect(),
            order: self.order,
        }
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        let mut c = vec![Scalar::zero(); self.order + 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                if i + j > self.order {
                    break;
                }
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        Poly { c, order: self.order }
    }

    pub fn scale(&self, v: &Scalar) -> Poly {
        Poly {
            c: self.c.iter().map(|a| a * v).collect(),
            order: self.order,
        }
    }

    pub fn powu(&self, e: u32) -> Poly {
        let mut acc = Poly::constant(Scalar::one(), self.order);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitute x -> u x: coefficient i picks up u^i.
    pub fn dilate(&self, u: &Scalar) -> Poly {
        let mut c = Vec::with_capacity(self.c.len());
        let mut u_pow = Scalar::one();
        for a in &self.c {
            c.push(a * &u_pow);
            u_pow = &u_pow * u;
        }
        Poly { c, order: self.order }
    }

    /// Jackson antiderivative: x^n -> x^{n+1}/{n+1}_{s,t}, truncated.
    pub fn st_antiderivative(&self, p: &StParams) -> Poly {
        let seq = st_numbers_upto(p.s(), p.t(), self.order as u32 + 1);
        let mut c = vec![Scalar::zero(); self.order + 1];
        for (i, a) in self.c.iter().enumerate() {
            if i + 1 > self.order {
                break;
            }
            c[i + 1] = a / &seq[i + 1];
        }
        Poly { c, order: self.order }
    }

    /// Largest coefficient-wise |difference| as a float.
    pub fn max_coeff_dist(&self, rhs: &Poly) -> f64 {
        self.c
            .iter()
            .zip(rhs.c.iter())
            .map(|(a, b)| (a - b).to_f64().abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluate an expression in the truncated polynomial ring, substituting
/// polynomials for x, y and yu. Division is admitted only by (constant)
/// degree-0 polynomials; anything else makes the right-hand side
/// non-polynomial and the caller falls back to lattice iteration.
pub fn eval_expr_poly(
    ast: &ExprAst,
    x: &Poly,
    y: &Poly,
    yu: &Poly,
    order: usize,
) -> Result<Poly> {
    match ast {
        ExprAst::Number(v) => Ok(Poly::constant(v.clone(), order)),
        ExprAst::Var(Var::X) => Ok(x.clone()),
        ExprAst::Var(Var::Y) => Ok(y.clone()),
        ExprAst::Var(Var::Yu) => Ok(yu.clone()),
        ExprAst::Neg(e) => Ok(eval_expr_poly(e, x, y, yu, order)?.neg()),
        ExprAst::Binary(op, l, r) => {
            let a = eval_expr_poly(l, x, y, yu, order)?;
            let b = eval_expr_poly(r, x, y, yu, order)?;
            match op {
                BinOp::Add => Ok(a.add(&b)),
                BinOp::Sub => Ok(a.sub(&b)),
                BinOp::Mul => Ok(a.mul(&b)),
                BinOp::Div => {
                    if b.c[1..].iter().all(|c| c.is_zero()) {
                        if b.c[0].is_zero() {
                            return Err(StError::DomainError("division by zero".into()));
                        }
                        Ok(a.scale(&b.c[0].recip()?))
                    } else {
                        Err(StError::Unsupported(
                            "division by a non-constant makes the right-hand side non-polynomial"
                                .into(),
                        ))
                    }
                }
            }
        }
        ExprAst::Pow(b, e) => Ok(eval_expr_poly(b, x, y, yu, order)?.powu(*e)),
    }
}

/// Coefficients of an expression as a univariate polynomial in y.
/// Used by the Bell solver, whose right-hand side is a function of the
/// delayed value alone.
pub fn expr_to_poly_in_y(ast: &ExprAst, max_degree: usize) -> Result<Vec<Scalar>> {
    if ast.uses(Var::X) || ast.uses(Var::Yu) {
        return Err(StError::Unsupported(
            "the autonomous solver takes f as an expression in y only".into(),
        ));
    }
    let x = Poly::constant(Scalar::zero(), max_degree);
    let y = Poly::identity(max_degree);
    let yu = Poly::constant(Scalar::zero(), max_degree);
    let p = eval_expr_poly(ast, &x, &y, &yu, max_degree)?;
    Ok(p.c)
}
