//! Operator monotone bijections between half-open intervals, transported gap
//! functions and the Bendat–Sherman quotient.
//!
//! Every interval of the left-closed family (`[a,b)`, `[a,inf)`) is reached
//! from `[0,1)` by an increasing affine map or by `u -> a + u/(1-u)`; the
//! right-closed family (`(a,b]`, `(-inf,b]`) is reached from `(0,1]` by an
//! affine map or by `u -> b + 1 - 1/u`. All of these are increasing Möbius
//! maps without a pole on the interval, hence operator monotone, and so are
//! their inverses and composites.

pub mod expr;
pub mod interval;

pub use expr::{FunctionExpr, Mobius};
pub use interval::Interval;

use num_traits::{One, Signed, Zero};

use crate::dobsch::radius_covers;
use crate::error::{invalid, Error, Result};
use crate::exactpoly::rational::{format_rational, rat};
use crate::exactpoly::{Poly, Rational};

/// Increasing bijection `src -> dst` together with its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectionPair {
    pub forward: FunctionExpr,
    pub inverse: FunctionExpr,
    pub src: Interval,
    pub dst: Interval,
}

impl BijectionPair {
    /// Exact round trips at `probes` points of each interval, plus membership
    /// of the images.
    pub fn verify(&self, probes: usize) -> Result<bool> {
        for p in self.src.probes(probes) {
            let q = self.forward.eval(&p)?;
            if !self.dst.contains(&q) || self.inverse.eval(&q)? != p {
                return Ok(false);
            }
        }
        for q in self.dst.probes(probes) {
            let p = self.inverse.eval(&q)?;
            if !self.src.contains(&p) || self.forward.eval(&p)? != q {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Map from the model interval of the family (`[0,1)` or `(0,1]`) onto `i`.
fn canonical(i: &Interval) -> Mobius {
    let one = Rational::one;
    let zero = Rational::zero;
    let m = match i {
        Interval::ClosedOpen { lo, hi } | Interval::OpenClosed { lo, hi } => {
            Mobius::affine(hi - lo, lo.clone())
        }
        // a + u/(1-u) = ((1-a) u + a) / (1 - u)
        Interval::ClosedUnbounded { lo } => Mobius::new(one() - lo, lo.clone(), -one(), one()),
        // b + 1 - 1/u = ((b+1) u - 1) / u
        Interval::UnboundedClosed { hi } => Mobius::new(hi + one(), -one(), one(), zero()),
    };
    m.expect("canonical interval maps are nondegenerate")
}

fn as_expr(m: &Mobius) -> FunctionExpr {
    if m.c.is_zero() {
        FunctionExpr::affine(&m.a / &m.d, &m.b / &m.d)
    } else {
        FunctionExpr::Mobius(m.normalized())
    }
}

/// Operator monotone bijection between two intervals of the same family.
pub fn interval_bijection(src: &Interval, dst: &Interval) -> Result<BijectionPair> {
    if src.is_left_closed() != dst.is_left_closed() {
        return Err(Error::UnsupportedIntervalPair(format!(
            "{src} and {dst} are not both left-closed or both right-closed; an increasing bijection \
             must send the closed endpoint to the closed endpoint"
        )));
    }
    let (cs, cd) = (canonical(src), canonical(dst));
    let forward = cd.after(&cs.inverse());
    let inverse = cs.after(&cd.inverse());
    Ok(BijectionPair {
        forward: as_expr(&forward),
        inverse: as_expr(&inverse),
        src: src.clone(),
        dst: dst.clone(),
    })
}

/// `g_n ∘ phi^{-1}` where `phi: [0, alpha_rat) -> interval`. The caller's
/// `alpha_rat` must lie inside the certified radius of `g_n`.
pub fn gap_function(n: usize, interval: &Interval, alpha_rat: &Rational) -> Result<FunctionExpr> {
    if !interval.is_left_closed() {
        return Err(Error::UnsupportedIntervalPair(format!(
            "gap functions are transported from [0, alpha) and need a target of the form [a,b) or [a,inf), got {interval}"
        )));
    }
    if !alpha_rat.is_positive() {
        return invalid(format!(
            "alpha must be positive, got {}",
            format_rational(alpha_rat)
        ));
    }
    if !radius_covers(n, alpha_rat)? {
        return invalid(format!(
            "alpha {} exceeds the certified radius of g({n})",
            format_rational(alpha_rat)
        ));
    }
    let base = Interval::closed_open(Rational::zero(), alpha_rat.clone())?;
    let pair = interval_bijection(&base, interval)?;
    Ok(FunctionExpr::compose(FunctionExpr::gn(n)?, pair.inverse))
}

/// `(f(t) - f(t0)) / (t - t0)`, a polynomial when `f` is one.
pub fn bendat_sherman(f: &FunctionExpr, t0: &Rational) -> Result<FunctionExpr> {
    // surfaces poles at t0 as domain errors
    f.eval(t0)?;
    Ok(match f.as_poly() {
        Some(p) => FunctionExpr::Poly(p.synthetic_div(t0).0),
        None => FunctionExpr::bendat(f.clone(), t0.clone()),
    })
}

/// `F(t) (t - t0)` with `F = gap_function(n, interval, alpha_rat)` and `t0`
/// the left endpoint of `interval`.
pub fn convex_gap_function(
    n: usize,
    interval: &Interval,
    alpha_rat: &Rational,
) -> Result<FunctionExpr> {
    let f = gap_function(n, interval, alpha_rat)?;
    let t0 = interval
        .lo()
        .expect("left-closed intervals have a left endpoint")
        .clone();
    let shift = Poly::new(vec![-&t0, Rational::one()]);
    Ok(match f.as_poly() {
        Some(p) => FunctionExpr::Poly(&p * &shift),
        None => FunctionExpr::mul(f, FunctionExpr::affine(Rational::one(), -t0)),
    })
}

/// Points used by the transport reports: `lo + k` on unbounded intervals,
/// `lo + k (hi - lo) / 10` on bounded ones, `k = 0..10`.
pub fn sample_points(interval: &Interval) -> Vec<Rational> {
    (0..10)
        .map(|k| match interval {
            Interval::ClosedOpen { lo, hi } => lo + rat(k, 10) * (hi - lo),
            Interval::OpenClosed { lo, hi } => hi - rat(k, 10) * (hi - lo),
            Interval::ClosedUnbounded { lo } => lo + rat(k, 1),
            Interval::UnboundedClosed { hi } => hi - rat(k, 1),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rational::int;

    fn iv(s: &str) -> Interval {
        Interval::parse(s).unwrap()
    }

    #[test]
    fn bijection_examples() {
        let p = interval_bijection(&iv("[0,inf)"), &iv("[0,1)")).unwrap();
        assert_eq!(p.forward.to_string(), "mobius(1,0,1,1)");
        assert_eq!(p.inverse.to_string(), "mobius(-1,0,1,-1)");
        assert!(p.verify(20).unwrap());

        let p = interval_bijection(&iv("[0,1)"), &iv("[2,inf)")).unwrap();
        assert_eq!(p.forward.eval(&int(0)).unwrap(), int(2));
        assert_eq!(p.forward.eval(&rat(1, 2)).unwrap(), int(3));
        assert!(p.verify(20).unwrap());

        let p = interval_bijection(&iv("(-inf,0]"), &iv("(0,1]")).unwrap();
        assert_eq!(p.forward.to_string(), "mobius(0,-1,1,-1)");
        assert!(p.verify(20).unwrap());
    }

    #[test]
    fn mixed_families_rejected() {
        let e = interval_bijection(&iv("[0,1)"), &iv("(0,1]")).unwrap_err();
        assert!(matches!(e, Error::UnsupportedIntervalPair(_)));
    }

    #[test]
    fn gap_function_examples() {
        let f = gap_function(2, &iv("[0,inf)"), &rat(7, 10)).unwrap();
        assert_eq!(f.to_string(), "compose(g(2), mobius(7,0,10,10))");
        assert_eq!(f.eval(&int(1)).unwrap(), rat(8743, 24000));
        assert_eq!(f.eval(&int(0)).unwrap(), int(0));
        let f = gap_function(2, &iv("[0,1)"), &rat(7, 10)).unwrap();
        assert_eq!(f.to_string(), "compose(g(2), affine(7/10,0))");
        assert_eq!(f.as_poly().unwrap().degree(), Some(3));
        let f = gap_function(3, &iv("[2,5)"), &rat(3, 16)).unwrap();
        assert_eq!(f.eval(&int(2)).unwrap(), int(0));
        assert!(gap_function(2, &iv("[0,1)"), &rat(3, 4)).is_err());
        assert!(gap_function(2, &iv("[0,1)"), &int(0)).is_err());
        assert!(gap_function(2, &iv("(0,1]"), &rat(1, 2)).is_err());
    }

    #[test]
    fn bendat_sherman_examples() {
        let f = bendat_sherman(&FunctionExpr::pow(2), &int(0)).unwrap();
        assert_eq!(f, FunctionExpr::identity());
        let f = bendat_sherman(&FunctionExpr::pow(3), &int(1)).unwrap();
        assert_eq!(
            f.as_poly().unwrap(),
            Poly::new(vec![int(1), int(1), int(1)])
        );
        let f = bendat_sherman(&FunctionExpr::gn(2).unwrap(), &int(0)).unwrap();
        assert_eq!(
            f.as_poly().unwrap(),
            Poly::new(vec![int(1), int(0), rat(1, 3)])
        );
        let h = FunctionExpr::mobius(int(1), int(0), int(1), int(1)).unwrap();
        assert!(matches!(
            bendat_sherman(&h, &int(-1)),
            Err(Error::Domain(_))
        ));
        let f = bendat_sherman(&h, &int(1)).unwrap();
        // (t/(1+t) - 1/2) / (t - 1) = 1 / (2 (1 + t))
        assert_eq!(f.eval(&int(3)).unwrap(), rat(1, 8));
        assert_eq!(f.eval(&int(1)).unwrap(), rat(1, 4));
    }

    #[test]
    fn convex_gap_examples() {
        let f = convex_gap_function(2, &iv("[0,1)"), &rat(7, 10)).unwrap();
        let p = f.as_poly().unwrap();
        assert_eq!(p.degree(), Some(4));
        assert_eq!(p.eval(&int(0)), int(0));
        let f = convex_gap_function(2, &iv("[0,inf)"), &rat(7, 10)).unwrap();
        assert_eq!(f.eval(&int(1)).unwrap(), rat(8743, 24000));
        assert_eq!(f.eval(&int(0)).unwrap(), int(0));
    }
}
