//! Closed expression language for the functions the laboratory manipulates:
//! polynomials, Möbius and affine maps, composition, products and the
//! divided-difference (Bendat–Sherman) quotient.
//!
//! Everything is exactly evaluable at rational points. Exact derivatives come
//! from truncated Taylor series ("jets") propagated through the tree.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, invalid, Result};
use crate::exactpoly::rational::{format_rational, from_f64, to_f64, Rational};
use crate::exactpoly::Poly;
use crate::transport::Interval;

/// `t -> (a t + b) / (c t + d)` with `ad - bc != 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mobius {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl Mobius {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        if m.det().is_zero() {
            return invalid("mobius map with ad - bc = 0 is degenerate");
        }
        Ok(m)
    }

    pub fn affine(slope: Rational, offset: Rational) -> Result<Self> {
        Self::new(slope, offset, Rational::zero(), Rational::one())
    }

    pub fn det(&self) -> Rational {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn pole(&self) -> Option<Rational> {
        (!self.c.is_zero()).then(|| -&self.d / &self.c)
    }

    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        let den = &self.c * t + &self.d;
        if den.is_zero() {
            return domain(format!("{t} is a pole of {self}"));
        }
        Ok((&self.a * t + &self.b) / den)
    }

    pub fn inverse(&self) -> Mobius {
        Mobius {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    /// `self ∘ inner`
    pub fn after(&self, inner: &Mobius) -> Mobius {
        Mobius {
            a: &self.a * &inner.a + &self.b * &inner.c,
            b: &self.a * &inner.b + &self.b * &inner.d,
            c: &self.c * &inner.a + &self.d * &inner.c,
            d: &self.c * &inner.b + &self.d * &inner.d,
        }
    }

    /// Coprime integer coefficients with `c > 0`, or `c = 0` and `d > 0`.
    pub fn normalized(&self) -> Mobius {
        let coeffs = [&self.a, &self.b, &self.c, &self.d];
        let l = coeffs.iter().fold(BigInt::one(), |l, x| {
            num_integer::Integer::lcm(&l, x.denom())
        });
        let ints: Vec<BigInt> = coeffs
            .iter()
            .map(|x| (*x * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let g = ints
            .iter()
            .fold(BigInt::zero(), |g, x| num_integer::Integer::gcd(&g, x));
        let lead = if self.c.is_zero() { &self.d } else { &self.c };
        let g = if lead.is_negative() { -g } else { g };
        let s: Vec<Rational> = ints
            .into_iter()
            .map(|x| Rational::new(x, g.clone()))
            .collect();
        Mobius {
            a: s[0].clone(),
            b: s[1].clone(),
            c: s[2].clone(),
            d: s[3].clone(),
        }
    }

    /// Image of an interval free of the pole; orientation flips for decreasing maps.
    pub fn image(&self, dom: &Interval) -> Result<Interval> {
        let pole = self.pole();
        if let Some(p) = &pole {
            if dom.contains(p) {
                return domain(format!(
                    "pole {} of {self} lies in {dom}",
                    format_rational(p)
                ));
            }
        }
        let increasing = self.det().is_positive();
        let (closed, open) = if dom.is_left_closed() {
            (dom.lo(), dom.hi())
        } else {
            (dom.hi(), dom.lo())
        };
        let closed_end = self.eval(closed.expect("every kind has a closed end"))?;
        // None: the image is unbounded on that side
        let open_end = match open {
            Some(v) if pole.as_ref() == Some(v) => None,
            Some(v) => Some(self.eval(v)?),
            None => (!self.c.is_zero()).then(|| &self.a / &self.c),
        };
        match (dom.is_left_closed() == increasing, open_end) {
            (true, Some(o)) => Interval::closed_open(closed_end, o),
            (true, None) => Ok(Interval::closed_unbounded(closed_end)),
            (false, Some(o)) => Interval::open_closed(o, closed_end),
            (false, None) => Ok(Interval::unbounded_closed(closed_end)),
        }
    }
}

impl fmt::Display for Mobius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mobius({},{},{},{})",
            format_rational(&self.a),
            format_rational(&self.b),
            format_rational(&self.c),
            format_rational(&self.d)
        )
    }
}

/// Expression tree of a real function of one variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FunctionExpr {
    Poly(Poly),
    Mobius(Mobius),
    /// `t -> slope * t + offset`
    Affine {
        slope: Rational,
        offset: Rational,
    },
    /// `outer(inner(t))`
    Compose(Box<FunctionExpr>, Box<FunctionExpr>),
    /// `(f(t) - f(t0)) / (t - t0)`, extended by `f'(t0)` at `t0`.
    BendatSherman(Box<FunctionExpr>, Rational),
    /// Pointwise product.
    Mul(Box<FunctionExpr>, Box<FunctionExpr>),
}

type Series = Vec<Rational>;

fn series_mul(a: &[Rational], b: &[Rational], order: usize) -> Series {
    let mut out = vec![Rational::zero(); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

impl FunctionExpr {
    pub fn gn(n: usize) -> Result<Self> {
        Ok(FunctionExpr::Poly(Poly::gn(n)?))
    }

    pub fn pow(k: usize) -> Self {
        FunctionExpr::Poly(Poly::monomial(Rational::one(), k))
    }

    pub fn identity() -> Self {
        Self::pow(1)
    }

    pub fn mobius(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self> {
        Ok(FunctionExpr::Mobius(Mobius::new(a, b, c, d)?))
    }

    pub fn affine(slope: Rational, offset: Rational) -> Self {
        FunctionExpr::Affine { slope, offset }
    }

    pub fn compose(outer: FunctionExpr, inner: FunctionExpr) -> Self {
        FunctionExpr::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn mul(f: FunctionExpr, g: FunctionExpr) -> Self {
        FunctionExpr::Mul(Box::new(f), Box::new(g))
    }

    pub fn bendat(f: FunctionExpr, t0: Rational) -> Self {
        FunctionExpr::BendatSherman(Box::new(f), t0)
    }

    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        match self {
            FunctionExpr::Poly(p) => Ok(p.eval(t)),
            FunctionExpr::Mobius(m) => m.eval(t),
            FunctionExpr::Affine { slope, offset } => Ok(slope * t + offset),
            FunctionExpr::Compose(f, g) => f.eval(&g.eval(t)?),
            FunctionExpr::Mul(f, g) => Ok(f.eval(t)? * g.eval(t)?),
            FunctionExpr::BendatSherman(f, t0) => {
                if t == t0 {
                    f.derivative_at(t0, 1)
                } else {
                    Ok((f.eval(t)? - f.eval(t0)?) / (t - t0))
                }
            }
        }
    }

    /// Floating point evaluation; NaN at poles.
    pub fn eval_f64(&self, t: f64) -> f64 {
        match self {
            FunctionExpr::Poly(p) => p.eval_f64(t),
            FunctionExpr::Mobius(m) => {
                let den = to_f64(&m.c) * t + to_f64(&m.d);
                if den == 0.0 {
                    f64::NAN
                } else {
                    (to_f64(&m.a) * t + to_f64(&m.b)) / den
                }
            }
            FunctionExpr::Affine { slope, offset } => to_f64(slope) * t + to_f64(offset),
            FunctionExpr::Compose(f, g) => f.eval_f64(g.eval_f64(t)),
            FunctionExpr::Mul(f, g) => f.eval_f64(t) * g.eval_f64(t),
            FunctionExpr::BendatSherman(..) => from_f64(t)
                .and_then(|x| self.eval(&x))
                .map(|v| to_f64(&v))
                .unwrap_or(f64::NAN),
        }
    }

    /// Taylor coefficients `f^(j)(x) / j!` for `j = 0..=order`.
    pub fn jet(&self, x: &Rational, order: usize) -> Result<Series> {
        match self {
            FunctionExpr::Poly(p) => {
                let mut out = Vec::with_capacity(order + 1);
                let mut q = p.clone();
                for _ in 0..=order {
                    let (next, r) = q.synthetic_div(x);
                    out.push(r);
                    q = next;
                }
                Ok(out)
            }
            FunctionExpr::Affine { slope, offset } => {
                let mut out = vec![Rational::zero(); order + 1];
                out[0] = slope * x + offset;
                if order >= 1 {
                    out[1] = slope.clone();
                }
                Ok(out)
            }
            FunctionExpr::Mobius(m) => {
                let mut out = vec![m.eval(x)?];
                let den = &m.c * x + &m.d;
                let det = m.det();
                // d^j/dt^j / j! of (at + b)/(ct + d) = det (-c)^(j-1) / den^(j+1)
                let mut term = &det / (&den * &den);
                for _ in 1..=order {
                    out.push(term.clone());
                    term = -(term * &m.c) / &den;
                }
                Ok(out)
            }
            FunctionExpr::Compose(f, g) => {
                let inner = g.jet(x, order)?;
                let outer = f.jet(&inner[0], order)?;
                let mut shift = inner;
                shift[0] = Rational::zero();
                let mut acc = vec![Rational::zero(); order + 1];
                for c in outer.iter().rev() {
                    acc = series_mul(&acc, &shift, order);
                    acc[0] += c;
                }
                Ok(acc)
            }
            FunctionExpr::Mul(f, g) => Ok(series_mul(&f.jet(x, order)?, &g.jet(x, order)?, order)),
            FunctionExpr::BendatSherman(f, t0) => {
                if x == t0 {
                    Ok(f.jet(t0, order + 1)?.split_off(1))
                } else {
                    let mut num = f.jet(x, order)?;
                    num[0] -= f.eval(t0)?;
                    let h = x - t0;
                    let mut out: Series = Vec::with_capacity(order + 1);
                    for j in 0..=order {
                        let prev = if j == 0 {
                            Rational::zero()
                        } else {
                            out[j - 1].clone()
                        };
                        out.push((&num[j] - prev) / &h);
                    }
                    Ok(out)
                }
            }
        }
    }

    /// Exact `k`-th derivative at `x`.
    pub fn derivative_at(&self, x: &Rational, k: usize) -> Result<Rational> {
        let jet = self.jet(x, k)?;
        let fact: BigInt = (1..=k).map(BigInt::from).product();
        Ok(&jet[k] * Rational::from_integer(fact))
    }

    /// `[f; x, y]`, with the confluent value `f'(x)` when `x == y`.
    pub fn divided_difference(&self, x: &Rational, y: &Rational) -> Result<Rational> {
        if x == y {
            return self.derivative_at(x, 1);
        }
        Ok((self.eval(x)? - self.eval(y)?) / (x - y))
    }

    /// Floating divided difference assembled structurally (chain and product
    /// rules) so nearby nodes do not cancel.
    pub fn divided_difference_f64(&self, x: f64, y: f64) -> f64 {
        match self {
            FunctionExpr::Poly(p) => {
                // quotient of (p(t) - p(y)) / (t - y) evaluated at x
                let c = p.coeffs();
                if c.len() <= 1 {
                    return 0.0;
                }
                let mut b = 0.0;
                let mut acc = 0.0;
                for k in (1..c.len()).rev() {
                    b = to_f64(&c[k]) + y * b;
                    acc = acc * x + b;
                }
                acc
            }
            FunctionExpr::Affine { slope, .. } => to_f64(slope),
            FunctionExpr::Mobius(m) => {
                let (c, d) = (to_f64(&m.c), to_f64(&m.d));
                to_f64(&m.det()) / ((c * x + d) * (c * y + d))
            }
            FunctionExpr::Compose(f, g) => {
                f.divided_difference_f64(g.eval_f64(x), g.eval_f64(y))
                    * g.divided_difference_f64(x, y)
            }
            FunctionExpr::Mul(f, g) => {
                f.eval_f64(x) * g.divided_difference_f64(x, y)
                    + f.divided_difference_f64(x, y) * g.eval_f64(y)
            }
            FunctionExpr::BendatSherman(..) => from_f64(x)
                .and_then(|xr| Ok((xr, from_f64(y)?)))
                .and_then(|(xr, yr)| self.divided_difference(&xr, &yr))
                .map(|v| to_f64(&v))
                .unwrap_or(f64::NAN),
        }
    }

    /// Collapses the tree to a polynomial when it is one.
    pub fn as_poly(&self) -> Option<Poly> {
        match self {
            FunctionExpr::Poly(p) => Some(p.clone()),
            FunctionExpr::Affine { slope, offset } => {
                Some(Poly::new(vec![offset.clone(), slope.clone()]))
            }
            FunctionExpr::Mobius(m) if m.c.is_zero() => {
                Some(Poly::new(vec![&m.b / &m.d, &m.a / &m.d]))
            }
            FunctionExpr::Mobius(_) => None,
            FunctionExpr::Compose(f, g) => Some(f.as_poly()?.compose(&g.as_poly()?)),
            FunctionExpr::Mul(f, g) => Some(&f.as_poly()? * &g.as_poly()?),
            FunctionExpr::BendatSherman(f, t0) => Some(f.as_poly()?.synthetic_div(t0).0),
        }
    }

    /// Rejects expressions with a pole inside `dom`, where that can be decided
    /// from the tree (images are tracked through affine and Möbius maps only).
    pub fn check_domain(&self, dom: &Interval) -> Result<()> {
        match self {
            FunctionExpr::Poly(_) | FunctionExpr::Affine { .. } => Ok(()),
            FunctionExpr::Mobius(m) => m.image(dom).map(|_| ()),
            FunctionExpr::Compose(f, g) => {
                g.check_domain(dom)?;
                let image = match g.as_ref() {
                    FunctionExpr::Mobius(m) => Some(m.image(dom)?),
                    FunctionExpr::Affine { slope, offset } if !slope.is_zero() => {
                        Some(Mobius::affine(slope.clone(), offset.clone())?.image(dom)?)
                    }
                    _ => None,
                };
                match image {
                    Some(img) => f.check_domain(&img),
                    None => Ok(()),
                }
            }
            FunctionExpr::Mul(f, g) => {
                f.check_domain(dom)?;
                g.check_domain(dom)
            }
            FunctionExpr::BendatSherman(f, t0) => {
                f.eval(t0)?;
                f.check_domain(dom)
            }
        }
    }
}

fn poly_surface(p: &Poly) -> String {
    if let Some(k) = p.degree() {
        if k % 2 == 1 && Poly::gn(k.div_ceil(2)).is_ok_and(|g| &g == p) {
            return format!("g({})", k.div_ceil(2));
        }
        if p.coeffs()[..k].iter().all(Zero::is_zero) && p.coeffs()[k].is_one() {
            return format!("pow({k})");
        }
    }
    let cs: Vec<String> = p.coeffs().iter().map(format_rational).collect();
    if cs.is_empty() {
        "poly(0)".to_string()
    } else {
        format!("poly({})", cs.join(","))
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionExpr::Poly(p) => write!(f, "{}", poly_surface(p)),
            FunctionExpr::Mobius(m) => write!(f, "{m}"),
            FunctionExpr::Affine { slope, offset } => {
                write!(
                    f,
                    "affine({},{})",
                    format_rational(slope),
                    format_rational(offset)
                )
            }
            FunctionExpr::Compose(a, b) => write!(f, "compose({a}, {b})"),
            FunctionExpr::Mul(a, b) => write!(f, "mul({a}, {b})"),
            FunctionExpr::BendatSherman(a, t0) => write!(f, "bendat({a}, {})", format_rational(t0)),
        }
    }
}
