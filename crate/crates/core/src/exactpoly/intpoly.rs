//! Dense polynomials over the integers, used where rational arithmetic would
//! spend most of its time in gcds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::poly::Poly;
use super::rational::Rational;

/// `p[k]` multiplies `t^k`; no trailing zeros once trimmed.
pub type IntPoly = Vec<BigInt>;

pub fn trim(p: &mut IntPoly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

/// Divides out the content (gcd of the coefficients), keeping the sign.
pub fn make_primitive(mut p: IntPoly) -> IntPoly {
    trim(&mut p);
    let g = p.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for c in &mut p {
            *c /= &g;
        }
    }
    p
}

/// Least common multiple of the coefficient denominators.
pub fn denominator_lcm<'a>(ps: impl IntoIterator<Item = &'a Poly>) -> BigInt {
    ps.into_iter()
        .flat_map(|p| p.coeffs())
        .fold(BigInt::one(), |l, c| l.lcm(c.denom()))
}

/// `l * p`, which must have integer coefficients.
pub fn scaled_to_int(p: &Poly, l: &BigInt) -> IntPoly {
    let l = Rational::from_integer(l.clone());
    p.coeffs().iter().map(|c| (c * &l).to_integer()).collect()
}

/// Positive multiple of `p` with coprime integer coefficients.
pub fn to_int_primitive(p: &Poly) -> IntPoly {
    make_primitive(scaled_to_int(p, &denominator_lcm([p])))
}

pub fn to_poly(p: &IntPoly) -> Poly {
    Poly::new(p.iter().cloned().map(Rational::from_integer).collect())
}

pub fn mul(a: &IntPoly, b: &IntPoly) -> IntPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

pub fn sub(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let mut out = a.clone();
    if out.len() < b.len() {
        out.resize(b.len(), BigInt::zero());
    }
    for (o, y) in out.iter_mut().zip(b) {
        *o -= y;
    }
    trim(&mut out);
    out
}

pub fn derivative(p: &IntPoly) -> IntPoly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigInt::from(k))
        .collect()
}

/// Quotient of a division known to be exact over the integers.
pub fn exact_div(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let db = b
        .len()
        .checked_sub(1)
        .expect("division by the zero polynomial");
    let lead = &b[db];
    let mut rem = a.clone();
    trim(&mut rem);
    if rem.len() <= db {
        debug_assert!(rem.is_empty(), "inexact polynomial division");
        return Vec::new();
    }
    let mut quot = vec![BigInt::zero(); rem.len() - db];
    for k in (0..quot.len()).rev() {
        let q = &rem[k + db] / lead;
        if !q.is_zero() {
            for (j, d) in b.iter().enumerate() {
                rem[k + j] -= &q * d;
            }
        }
        quot[k] = q;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact polynomial division");
    trim(&mut quot);
    quot
}

/// Returns `r` and the number of reduction steps `s` with `r = lc(b)^s * (a mod b)`.
pub fn pseudo_rem(a: &IntPoly, b: &IntPoly) -> (IntPoly, usize) {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = a.clone();
    let mut steps = 0;
    while r.len() > db && !r.is_empty() {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - 1 - db;
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (j, bc) in b.iter().enumerate() {
            r[shift + j] -= &lr * bc;
        }
        trim(&mut r);
        steps += 1;
    }
    (r, steps)
}

/// Sign of `p(x)` via homogeneous Horner on `num/den`.
pub fn sign_at(p: &IntPoly, x: &Rational) -> i32 {
    let (n, d) = (x.numer(), x.denom());
    let mut acc = BigInt::zero();
    let mut dpow = BigInt::one();
    for c in p.iter().rev() {
        acc = acc * n + c * &dpow;
        dpow *= d;
    }
    match acc.sign() {
        num_bigint::Sign::Plus => 1,
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
    }
}

/// Leading principal minors of a square matrix by fraction-free elimination
/// without pivoting; stops after the first minor that vanishes.
pub fn leading_minors(rows: &[Vec<IntPoly>]) -> Vec<IntPoly> {
    let n = rows.len();
    let mut a = rows.to_vec();
    let mut prev: IntPoly = vec![BigInt::one()];
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(a[k][k].clone());
        if a[k][k].is_empty() {
            break;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let num = sub(&mul(&a[i][j], &a[k][k]), &mul(&a[i][k], &a[k][j]));
                a[i][j] = exact_div(&num, &prev);
            }
        }
        prev = a[k][k].clone();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(v: &[i64]) -> IntPoly {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn arithmetic() {
        let a = ip(&[1, 1]);
        let b = ip(&[-1, 1]);
        let p = mul(&a, &b);
        assert_eq!(p, ip(&[-1, 0, 1]));
        assert_eq!(exact_div(&p, &a), b);
        assert_eq!(sub(&p, &p), ip(&[]));
        assert_eq!(make_primitive(ip(&[-4, 6])), ip(&[-2, 3]));
        assert_eq!(sign_at(&p, &Rational::new(1.into(), 2.into())), -1);
    }

    #[test]
    fn minors_of_constant_matrix() {
        let rows = vec![vec![ip(&[2]), ip(&[1])], vec![ip(&[1]), ip(&[2])]];
        assert_eq!(leading_minors(&rows), vec![ip(&[2]), ip(&[3])]);
    }
}
