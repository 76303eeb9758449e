//! Exact and numerical tooling for matrix monotone functions.
//!
//! The crate builds the odd polynomials
//! `g_n(t) = t + t^3/3 + ... + t^(2n-1)/(2n-1)`, certifies with exact rational
//! arithmetic that `g_n` is matrix monotone of order `n` near the origin while
//! failing order `n + 1` on every subinterval, brackets the monotonicity radius,
//! and transports the gap functions to arbitrary half-open intervals and to
//! matrix convexity.
//!
//! Modules:
//! - [`exactpoly`]: rationals, polynomials, Sturm root isolation.
//! - [`psdcert`]: exact PD / PSD verdicts with checkable witnesses.
//! - [`dobsch`]: the derivative (Dobsch) matrix, Hankel moments and the gap certificate.
//! - [`loewner`]: divided-difference matrices and exact violation search.
//! - [`numfalsify`]: floating point matrix-pair falsifier.
//! - [`transport`]: intervals, function expressions, operator monotone bijections.
//! - [`cli`]: expression parser and JSON reports behind the `monotone-gap` binary.

pub mod cli;
pub mod dobsch;
pub mod error;
pub mod exactpoly;
pub mod loewner;
pub mod numfalsify;
pub mod psdcert;
pub mod transport;

pub use error::{Error, Result};
pub use exactpoly::{Poly, Rational, RootBracket};
pub use psdcert::{Definiteness, PsdVerdict, PsdWitness, SymMatrix};
pub use transport::{FunctionExpr, Interval};
