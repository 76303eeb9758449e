//! Real root isolation by Sturm sequences over the integers.
//!
//! Polynomials are first made square-free and scaled to primitive integer
//! polynomials by a positive factor, so signs are untouched. The sequence is
//! built with pseudo-remainders and content removal.

use num_traits::{One, Signed, Zero};

use super::intpoly::{
    self, derivative, exact_div, make_primitive, pseudo_rem, to_int_primitive, IntPoly,
};
use super::poly::Poly;
use super::rational::{from_f64, rat, to_f64, Rational};
use crate::error::{invalid, Error, Result};
use crate::transport::Interval;

/// Open interval `(lo, hi)` containing exactly one real root of its polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootBracket {
    pub lo: Rational,
    pub hi: Rational,
    /// Whether the original polynomial changes sign across the bracket
    /// (false for roots of even multiplicity).
    pub sign_change: bool,
}

fn int_sign_at(p: &IntPoly, x: &Rational) -> i32 {
    intpoly::sign_at(p, x)
}

/// Sturm chain of the square-free part of a polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<IntPoly>,
}

impl SturmChain {
    pub fn new(p: &Poly) -> Result<Self> {
        if p.is_zero() {
            return invalid("Sturm chain of the zero polynomial");
        }
        let q = to_int_primitive(p);
        let mut chain = vec![q.clone()];
        let dq = make_primitive(derivative(&q));
        if !dq.is_empty() {
            chain.push(dq);
            loop {
                let k = chain.len();
                let (r, steps) = pseudo_rem(&chain[k - 2], &chain[k - 1]);
                if r.is_empty() {
                    break;
                }
                let flip = chain[k - 1].last().unwrap().is_negative() && steps % 2 == 1;
                let mut next = make_primitive(r);
                if !flip {
                    for c in &mut next {
                        *c = -&*c;
                    }
                }
                chain.push(next);
            }
        }
        // the last element is gcd(q, q') up to a constant; dividing the whole
        // chain by it leaves the sign variations unchanged away from roots
        let g = chain.last().unwrap().clone();
        if g.len() > 1 {
            chain = chain
                .iter()
                .map(|c| make_primitive(exact_div(c, &g)))
                .collect();
        }
        Ok(SturmChain { chain })
    }

    /// Square-free part the chain was built from.
    fn base(&self) -> &IntPoly {
        &self.chain[0]
    }

    pub fn sign_at(&self, x: &Rational) -> i32 {
        int_sign_at(self.base(), x)
    }

    fn variations(&self, x: &Rational) -> usize {
        let mut last = 0;
        let mut v = 0;
        for s in self.chain.iter().map(|p| int_sign_at(p, x)) {
            if s != 0 {
                if last != 0 && s != last {
                    v += 1;
                }
                last = s;
            }
        }
        v
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count(&self, a: &Rational, b: &Rational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }

    /// Strict upper bound on the absolute value of every root (Cauchy).
    pub fn cauchy_bound(&self) -> Rational {
        let q = self.base();
        let lead = q.last().unwrap().abs();
        let max = q[..q.len() - 1]
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_default();
        Rational::one() + Rational::new(max, lead)
    }
}

fn split_point(chain: &SturmChain, l: &Rational, h: &Rational) -> Rational {
    // a root-free split point; finitely many roots, so this terminates
    for k in 2i64.. {
        for j in 1..k {
            if num_integer::gcd(j, k) != 1 {
                continue;
            }
            let m = l + (h - l) * rat(j, k);
            if chain.sign_at(&m) != 0 {
                return m;
            }
        }
    }
    unreachable!()
}

/// Isolates the distinct real roots of `p` in the open interval `(lo, hi)`
/// (`hi = None` meaning `+inf`). Brackets are sorted and have root-free endpoints.
pub fn isolate_roots_in(
    p: &Poly,
    lo: &Rational,
    hi: Option<&Rational>,
) -> Result<Vec<RootBracket>> {
    let chain = SturmChain::new(p)?;
    if chain.base().len() <= 1 {
        return Ok(Vec::new());
    }
    let bound = chain.cauchy_bound();
    let mut l = lo.clone();
    let mut h = match hi {
        Some(h) if *h < bound => h.clone(),
        _ => bound,
    };
    if l >= h {
        return Ok(Vec::new());
    }
    if chain.sign_at(&l) == 0 {
        let mut d = (&h - &l) / rat(2, 1);
        while chain.count(&l, &(&l + &d)) > 0 {
            d /= rat(2, 1);
        }
        l += d;
    }
    if chain.sign_at(&h) == 0 {
        let mut d = (&h - &l) / rat(2, 1);
        while chain.count(&(&h - &d), &h) > 1 || chain.sign_at(&(&h - &d)) == 0 {
            d /= rat(2, 1);
        }
        h -= d;
    }
    let mut out = Vec::new();
    let mut stack = vec![(l, h)];
    while let Some((l, h)) = stack.pop() {
        match chain.count(&l, &h) {
            0 => {}
            1 => out.push(RootBracket {
                sign_change: p.sign_at(&l) * p.sign_at(&h) < 0,
                lo: l,
                hi: h,
            }),
            _ => {
                let m = split_point(&chain, &l, &h);
                stack.push((m.clone(), h));
                stack.push((l, m));
            }
        }
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(out)
}

/// Brackets for every distinct positive real root of `p`.
pub fn isolate_positive_roots(p: &Poly) -> Result<Vec<RootBracket>> {
    if p.is_zero() {
        return invalid("root isolation of the zero polynomial");
    }
    isolate_roots_in(p, &Rational::zero(), None)
}

/// Shrinks a bracket by exact bisection until its width is at most `tol`.
pub fn refine_bracket(p: &Poly, b: &RootBracket, tol: &Rational) -> Result<RootBracket> {
    let chain = SturmChain::new(p)?;
    let (mut l, mut h) = (b.lo.clone(), b.hi.clone());
    let sl = chain.sign_at(&l);
    if sl == 0 || sl * chain.sign_at(&h) >= 0 {
        return Err(Error::Internal(format!(
            "bracket ({l}, {h}) does not isolate a root"
        )));
    }
    while &h - &l > *tol {
        let m = (&l + &h) / rat(2, 1);
        match chain.sign_at(&m) {
            0 => {
                let q = tol / rat(4, 1);
                return Ok(RootBracket {
                    lo: &m - &q,
                    hi: &m + q,
                    sign_change: b.sign_change,
                });
            }
            s if s == sl => l = m,
            _ => h = m,
        }
    }
    Ok(RootBracket {
        lo: l,
        hi: h,
        sign_change: b.sign_change,
    })
}

/// Float approximation of the bracketed root with absolute error at most `tol`.
pub fn refine_root(p: &Poly, b: &RootBracket, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let r = refine_bracket(p, b, &from_f64(tol)?)?;
    Ok(to_f64(&((&r.lo + &r.hi) / rat(2, 1))))
}

/// Outcome of an exact nonnegativity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonnegCheck {
    pub nonneg: bool,
    /// Point of the interval where the polynomial is negative, when not nonnegative.
    pub witness: Option<Rational>,
}

/// Decides `p(t) >= 0` for all `t` in `interval` exactly.
pub fn poly_nonneg_on(p: &Poly, interval: &Interval) -> Result<NonnegCheck> {
    if !interval.is_left_closed() {
        // reflect t -> -t onto a left-closed interval
        let reflected = p.compose(&Poly::monomial(-Rational::one(), 1));
        let mirrored = match interval {
            Interval::OpenClosed { lo, hi } => Interval::closed_open(-hi, -lo)?,
            Interval::UnboundedClosed { hi } => Interval::closed_unbounded(-hi),
            _ => unreachable!(),
        };
        let mut check = poly_nonneg_on(&reflected, &mirrored)?;
        check.witness = check.witness.map(|w| -w);
        return Ok(check);
    }
    let lo = interval.lo().unwrap();
    let hi = interval.hi();
    let negative = |x: &Rational| p.sign_at(x) < 0;
    if p.is_zero() {
        return Ok(NonnegCheck {
            nonneg: true,
            witness: None,
        });
    }
    let mut samples = vec![lo.clone()];
    let brackets = isolate_roots_in(p, lo, hi)?;
    let two = rat(2, 1);
    match (brackets.first(), brackets.last()) {
        (None, _) => samples.push(match hi {
            Some(h) => (lo + h) / &two,
            None => lo + Rational::one(),
        }),
        (Some(first), Some(last)) => {
            if first.lo > *lo {
                samples.push((lo + &first.lo) / &two);
            }
            for w in brackets.windows(2) {
                samples.push((&w[0].hi + &w[1].lo) / &two);
            }
            samples.push(match hi {
                None => &last.hi + Rational::one(),
                Some(h) => {
                    let chain = SturmChain::new(p)?;
                    let (mut l, mut r) = (last.lo.clone(), last.hi.clone());
                    loop {
                        if r < *h {
                            break (&r + h) / &two;
                        }
                        let m = (&l + &r) / &two;
                        if chain.sign_at(&m) == 0 {
                            break (&m + h) / &two;
                        }
                        if chain.count(&l, &m) == 1 {
                            r = m;
                        } else {
                            l = m;
                        }
                    }
                }
            });
        }
        _ => unreachable!(),
    }
    let witness = samples.into_iter().find(|x| negative(x));
    Ok(NonnegCheck {
        nonneg: witness.is_none(),
        witness,
    })
}
