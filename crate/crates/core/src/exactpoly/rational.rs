//! Helpers around [`BigRational`], the exact scalar used by every certificate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision fraction, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_f64(x).ok_or_else(|| Error::InvalidArgument(format!("non-finite value {x}")))
}

/// Closest fraction with denominator `2^bits`, rounding to nearest.
pub fn dyadic_round(x: f64, bits: u32) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite value {x}")));
    }
    let scale = 2f64.powi(bits as i32);
    let n = BigInt::from_f64((x * scale).round())
        .ok_or_else(|| Error::InvalidArgument(format!("value {x} out of range")))?;
    Ok(Rational::new(n, BigInt::one() << bits))
}

/// Parses `INT` or `INT/POSINT`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if !d.is_positive() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// `num/den`, or just `num` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with exactly `sig` significant digits, rounded half away
/// from zero from the exact value. Positional for moderate exponents,
/// scientific otherwise.
pub fn format_decimal(r: &Rational, sig: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let ten = BigInt::from(10);
    // exponent e with 10^e <= a < 10^(e+1)
    let mut e: i64 = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            Rational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while a < pow10(e) {
        e -= 1;
    }
    while a >= pow10(e + 1) {
        e += 1;
    }
    let scaled = &a * pow10(sig as i64 - 1 - e);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = q;
    if Rational::new(rem * BigInt::from(2), scaled.denom().clone()) >= Rational::one() {
        digits += 1;
    }
    let mut ds = digits.to_string();
    if ds.len() > sig {
        // rounding carried into a new digit, e.g. 9.99.. -> 10.0..
        e += 1;
        ds.truncate(sig);
    }
    let sign = if neg { "-" } else { "" };
    if (-5..17).contains(&e) {
        let e = e as isize;
        let body = if e < 0 {
            format!("0.{}{}", "0".repeat((-e - 1) as usize), ds)
        } else if (e as usize) + 1 >= ds.len() {
            format!("{}{}", ds, "0".repeat(e as usize + 1 - ds.len()))
        } else {
            let (int_part, frac) = ds.split_at(e as usize + 1);
            format!("{int_part}.{frac}")
        };
        format!("{sign}{body}")
    } else {
        let (first, rest) = ds.split_at(1);
        format!("{sign}{first}.{rest}e{e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("-71/45000").unwrap(), rat(-71, 45000));
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(-2, 54)), "-1/27");
        assert_eq!(format_rational(&int(5)), "5");
    }

    #[test]
    fn decimals() {
        assert_eq!(format_decimal(&rat(-1, 27), 17), "-0.037037037037037037");
        assert_eq!(format_decimal(&int(1), 17), "1.0000000000000000");
        assert_eq!(format_decimal(&rat(2, 3), 5), "0.66667");
        assert_eq!(format_decimal(&rat(9999, 1000), 3), "10.0");
        assert_eq!(format_decimal(&rat(1, 1_000_000), 3), "1.00e-6");
        assert_eq!(format_decimal(&rat(8743, 24000), 17), "0.36429166666666667");
        assert_eq!(format_decimal(&Rational::zero(), 17), "0");
    }

    #[test]
    fn decimal_agrees_with_float() {
        for (n, d) in [(1, 3), (-22, 7), (355, 113), (1, 729), (123456789, 1000)] {
            let r = rat(n, d);
            let s = format_decimal(&r, 17);
            let back: f64 = s.parse().unwrap();
            assert!((back - to_f64(&r)).abs() <= 1e-15 * to_f64(&r).abs());
        }
    }

    #[test]
    fn dyadic() {
        assert_eq!(dyadic_round(0.75, 4).unwrap(), rat(3, 4));
        assert_eq!(dyadic_round(1.0 / 3.0, 2).unwrap(), rat(1, 4));
        assert!(dyadic_round(f64::NAN, 2).is_err());
    }
}
