//! Calculus on deformed generalized Fibonacci polynomials.
//!
//! The sequence {n}_{s,t} defined by {0} = 0, {1} = 1,
//! {n+2} = s{n+1} + t{n} specializes to the Fibonacci, Pell, Jacobsthal,
//! Mersenne, Chebyshev-U and Lucas families. This crate builds the
//! difference/Jackson-integral calculus attached to that sequence family
//! and uses it to solve functional-difference equations with proportional
//! delay (pantograph type):
//!
//! - [`params`]: validated (s,t) pairs, characteristic roots phi, phi',
//!   ratio q, and deformations (s,t) -> (us, u^2 t);
//! - [`sequences`]: {n}_{s,t}, fibotorials, fibonomials, matrix powers,
//!   limit/bifurcation classification of u^{n-1}{n}_{s,t};
//! - [`bell`]: partial Bell polynomials and Faa di Bruno composition;
//! - [`ward`]: the Ward ring of truncated exponential generating functions
//!   over the basis x^n/{n}!, with convergence classification;
//! - [`operators`]: the deformed difference operator and q-periodic
//!   functions (its kernel);
//! - [`integration`]: the Jackson-type integral on q-geometric lattices,
//!   fundamental theorem, integration by parts;
//! - [`exponentials`]: deformed exponential functions, infinite products,
//!   (p,q)-powers and inequality reports;
//! - [`solvers`]: pantograph, Ambartsumian, Bell-polynomial and
//!   successive-approximation solvers with residual reports and error
//!   bounds;
//! - [`expr`]: the small expression language used to describe right-hand
//!   sides on the command line.
//!
//! Arithmetic is dual-backend: rational inputs are processed exactly
//! (bit-exact recurrences, fibonomials, series coefficients), while
//! analytic operations fall back to IEEE doubles. See [`scalar::Scalar`].

pub mod bell;
pub mod error;
pub mod expr;
pub mod exponentials;
pub mod integration;
pub mod operators;
pub mod params;
pub mod scalar;
pub mod sequences;
pub mod solvers;
pub mod ward;

pub use error::{Result, StError};
pub use params::{deform, Deformation, StParams};
pub use scalar::Scalar;

/// Version tag written into every JSON artifact.
pub const SCHEMA: &str = "stcalc/1";
