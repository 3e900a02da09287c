//! Expression language for right-hand sides: variables x, y, yu (the
//! delayed value y(ux)), rational/decimal literals, and + - * / ^.
//!
//! Grammar:
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' uint)?
//! atom   := number | 'x' | 'y' | 'yu' | '(' expr ')' | '-' atom
//! ```
//! Exponents are nonnegative integer literals. Integer literals are exact,
//! decimals force float mode; a leading minus on a literal folds into it.

use std::fmt;

use crate::error::{Result, StError};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Yu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprAst {
    Number(Scalar),
    Var(Var),
    Neg(Box<ExprAst>),
    Binary(BinOp, Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, u32),
}

/// All values of the three variables at one evaluation point.
#[derive(Clone, Debug)]
pub struct Env {
    pub x: Scalar,
    pub y: Scalar,
    pub yu: Scalar,
}

impl ExprAst {
    pub fn eval(&self, env: &Env) -> Result<Scalar> {
        match self {
            ExprAst::Number(v) => Ok(v.clone()),
            ExprAst::Var(Var::X) => Ok(env.x.clone()),
            ExprAst::Var(Var::Y) => Ok(env.y.clone()),
            ExprAst::Var(Var::Yu) => Ok(env.yu.clone()),
            ExprAst::Neg(e) => Ok(-&e.eval(env)?),
            ExprAst::Binary(op, l, r) => {
                let a = l.eval(env)?;
                let b = r.eval(env)?;
                Ok(match op {
                    BinOp::Add => &a + &b,
                    BinOp::Sub => &a - &b,
                    BinOp::Mul => &a * &b,
                    BinOp::Div => {
                        if b.is_zero() {
                            return Err(StError::DomainError("division by zero".into()));
                        }
                        &a / &b
                    }
                })
            }
            ExprAst::Pow(b, e) => Ok(b.eval(env)?.powu(*e)),
        }
    }

    /// Fast float evaluation used by lattice-mode solvers.
    pub fn eval_f64(&self, x: f64, y: f64, yu: f64) -> Result<f64> {
        match self {
            ExprAst::Number(v) => Ok(v.to_f64()),
            ExprAst::Var(Var::X) => Ok(x),
            ExprAst::Var(Var::Y) => Ok(y),
            ExprAst::Var(Var::Yu) => Ok(yu),
            ExprAst::Neg(e) => Ok(-e.eval_f64(x, y, yu)?),
            ExprAst::Binary(op, l, r) => {
                let a = l.eval_f64(x, y, yu)?;
                let b = r.eval_f64(x, y, yu)?;
                Ok(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(StError::DomainError("division by zero".into()));
                        }
                        a / b
                    }
                })
            }
            ExprAst::Pow(b, e) => Ok(b.eval_f64(x, y, yu)?.powi(*e as i32)),
        }
    }

    /// True when a variable occurs in the expression.
    pub fn uses(&self, var: Var) -> bool {
        match self {
            ExprAst::Number(_) => false,
            ExprAst::Var(v) => *v == var,
            ExprAst::Neg(e) => e.uses(var),
            ExprAst::Binary(_, l, r) => l.uses(var) || r.uses(var),
            ExprAst::Pow(b, _) => b.uses(var),
        }
    }
}

impl fmt::Display for ExprAst {
    /// Canonical form: binary nodes fully parenthesized, so that parsing
    /// the output reproduces the tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Number(v) => write!(f, "{v}"),
            ExprAst::Var(Var::X) => write!(f, "x"),
            ExprAst::Var(Var::Y) => write!(f, "y"),
            ExprAst::Var(Var::Yu) => write!(f, "yu"),
            ExprAst::Neg(e) => match e.as_ref() {
                ExprAst::Number(_) | ExprAst::Var(_) | ExprAst::Neg(_) => write!(f, "-{e}"),
                _ => write!(f, "-({e})"),
            },
            ExprAst::Binary(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({l} {sym} {r})")
            }
            ExprAst::Pow(b, e) => match b.as_ref() {
                ExprAst::Number(_) | ExprAst::Var(_) | ExprAst::Neg(_) => write!(f, "{b}^{e}"),
                _ => write!(f, "({b})^{e}"),
            },
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, expected: &str) -> StError {
        StError::Syntax {
            pos: self.pos,
            expected: expected.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ExprAst> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    node = ExprAst::Binary(BinOp::Add, Box::new(node), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    node = ExprAst::Binary(BinOp::Sub, Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst> {
        let mut node = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    node = ExprAst::Binary(BinOp::Mul, Box::new(node), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    node = ExprAst::Binary(BinOp::Div, Box::new(node), Box::new(self.factor()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn factor(&mut self) -> Result<ExprAst> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.uint()?;
            return Ok(ExprAst::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let inner = self.atom()?;
                // Fold a minus on a literal into the literal so that
                // printed negative numbers round-trip structurally.
                if let ExprAst::Number(v) = inner {
                    Ok(ExprAst::Number(-&v))
                } else {
                    Ok(ExprAst::Neg(Box::new(inner)))
                }
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("`)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.err("number, `x`, `y`, `yu`, `(`, or `-`")),
        }
    }

    fn uint(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("nonnegative integer exponent"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("exponent in range"))
    }

    fn number(&mut self) -> Result<ExprAst> {
        self.skip_ws();
        let start = self.pos;
        let mut is_float = false;
        while let Some(&c) = self.src.get(self.pos) {
            match c {
                b'0'..=b'9' => self.pos += 1,
                b'.' => {
                    is_float = true;
                    self.pos += 1;
                }
                b'e' | b'E' => {
                    // Exponent suffix, optionally signed.
                    is_float = true;
                    self.pos += 1;
                    if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value = if is_float {
            Scalar::from_f64(text.parse().map_err(|_| {
                let mut e = self.err("well-formed number");
                if let StError::Syntax { pos, .. } = &mut e {
                    *pos = start;
                }
                e
            })?)
        } else {
            Scalar::parse(text)?
        };
        Ok(ExprAst::Number(value))
    }

    fn ident(&mut self) -> Result<ExprAst> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        match &self.src[start..self.pos] {
            b"x" => Ok(ExprAst::Var(Var::X)),
            b"y" => Ok(ExprAst::Var(Var::Y)),
            b"yu" => Ok(ExprAst::Var(Var::Yu)),
            _ => {
                self.pos = start;
                Err(self.err("one of the variables `x`, `y`, `yu`"))
            }
        }
    }
}

/// Parse an expression; errors carry the byte position and expected tokens.
pub fn parse_expr(text: &str) -> Result<ExprAst> {
    let mut p = Parser::new(text);
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("end of input or an operator"));
    }
    Ok(ast)
}
