//! Exact rational scalars, univariate polynomials and real root isolation.

pub mod intpoly;
pub mod poly;
pub mod rational;
pub mod roots;

pub use poly::Poly;
pub use rational::Rational;
pub use roots::{
    isolate_positive_roots, isolate_roots_in, poly_nonneg_on, refine_bracket, refine_root,
    NonnegCheck, RootBracket, SturmChain,
};

use crate::error::Result;
use crate::transport::FunctionExpr;

/// `g_n(t) = t + t^3/3 + ... + t^(2n-1)/(2n-1)`.
pub fn gn_poly(n: usize) -> Result<Poly> {
    Poly::gn(n)
}

/// First divided difference `[f; x, y]`, equal to `f'(x)` when `x == y`.
pub fn divided_difference(f: &FunctionExpr, x: &Rational, y: &Rational) -> Result<Rational> {
    f.divided_difference(x, y)
}
