//! Recursive descent parser for function specs.
//!
//! ```text
//! expr := "g(" INT ")" | "pow(" INT ")" | "poly(" RAT {"," RAT} ")"
//!       | "mobius(" RAT "," RAT "," RAT "," RAT ")" | "affine(" RAT "," RAT ")"
//!       | "compose(" expr "," expr ")" | "mul(" expr "," expr ")"
//!       | "bendat(" expr "," RAT ")"
//! RAT  := INT | INT "/" POSINT
//! ```
//!
//! Whitespace is allowed between tokens. Errors carry the byte offset.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::exactpoly::{Poly, Rational};
use crate::transport::FunctionExpr;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, at: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: at,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self
                .src
                .get(self.pos)
                .map_or("end of input".to_string(), |b| format!("{:?}", *b as char));
            self.err(self.pos, format!("expected {:?}, found {found}", c as char))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected a function name");
        }
        Ok((
            start,
            std::str::from_utf8(&self.src[start..self.pos]).expect("ascii"),
        ))
    }

    fn digits(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii")
            .parse()
            .expect("digits"))
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let negative = self.src.get(self.pos) == Some(&b'-');
        if negative {
            self.pos += 1;
        }
        let d = self.digits()?;
        Ok(if negative { -d } else { d })
    }

    fn small(&mut self) -> Result<usize> {
        self.skip_ws();
        let at = self.pos;
        let v = self.integer()?;
        match v.to_usize() {
            Some(v) if v <= 10_000 => Ok(v),
            _ => self.err(at, "expected a non-negative integer of at most 10000"),
        }
    }

    fn rational(&mut self) -> Result<Rational> {
        let num = self.integer()?;
        if self.peek() != Some(b'/') {
            return Ok(Rational::from_integer(num));
        }
        self.pos += 1;
        self.skip_ws();
        let at = self.pos;
        let den = self.digits()?;
        if !den.is_positive() {
            return self.err(at, "denominator must be positive");
        }
        Ok(Rational::new(num, den))
    }

    fn expr(&mut self) -> Result<FunctionExpr> {
        let (at, name) = self.ident()?;
        self.expect(b'(')?;
        let semantic = |e: Error| match e {
            Error::InvalidArgument(m) => Error::Syntax {
                offset: at,
                message: m,
            },
            other => other,
        };
        let e = match name {
            "g" => FunctionExpr::gn(self.small()?).map_err(semantic)?,
            "pow" => FunctionExpr::pow(self.small()?),
            "poly" => {
                let mut cs = vec![self.rational()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    cs.push(self.rational()?);
                }
                FunctionExpr::Poly(Poly::new(cs))
            }
            "mobius" => {
                let a = self.rational()?;
                self.expect(b',')?;
                let b = self.rational()?;
                self.expect(b',')?;
                let c = self.rational()?;
                self.expect(b',')?;
                let d = self.rational()?;
                FunctionExpr::mobius(a, b, c, d).map_err(semantic)?
            }
            "affine" => {
                let c = self.rational()?;
                self.expect(b',')?;
                FunctionExpr::affine(c, self.rational()?)
            }
            "compose" | "mul" => {
                let f = self.expr()?;
                self.expect(b',')?;
                let g = self.expr()?;
                if name == "compose" {
                    FunctionExpr::compose(f, g)
                } else {
                    FunctionExpr::mul(f, g)
                }
            }
            "bendat" => {
                let f = self.expr()?;
                self.expect(b',')?;
                let t0 = self.rational()?;
                FunctionExpr::bendat(f, t0)
            }
            other => return self.err(at, format!("unknown function {other:?}")),
        };
        self.expect(b')')?;
        Ok(e)
    }
}

/// Parses a function spec; see the module docs for the grammar.
pub fn parse_function(spec: &str) -> Result<FunctionExpr> {
    let mut p = Parser {
        src: spec.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err(p.pos, "unexpected trailing input");
    }
    Ok(e)
}

/// Comma separated rationals, as in `13/20,17/20`.
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>> {
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
    };
    let mut out = vec![p.rational()?];
    while p.peek() == Some(b',') {
        p.pos += 1;
        out.push(p.rational()?);
    }
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err(p.pos, "unexpected trailing input");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rational::{int, rat};

    #[test]
    fn examples() {
        assert_eq!(
            parse_function("g(2)").unwrap().as_poly().unwrap().coeffs(),
            &[int(0), int(1), int(0), rat(1, 3)]
        );
        let f = parse_function("compose(g(2), affine(7/10, 0))").unwrap();
        assert_eq!(f.eval(&int(1)).unwrap(), rat(7, 10) + rat(343, 3000));
        let h = parse_function("mobius(1,0,1,1)").unwrap();
        assert_eq!(h.eval(&int(1)).unwrap(), rat(1, 2));
        assert_eq!(
            parse_function(" bendat( pow(3) , -1/2 ) ")
                .unwrap()
                .to_string(),
            "bendat(pow(3), -1/2)"
        );
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_function("compose(g(2), foo(1))").unwrap_err();
        assert_eq!(
            e,
            Error::Syntax {
                offset: 14,
                message: "unknown function \"foo\"".into()
            }
        );
        assert!(matches!(
            parse_function("g(2"),
            Err(Error::Syntax { offset: 3, .. })
        ));
        assert!(matches!(
            parse_function("g(2) x"),
            Err(Error::Syntax { offset: 5, .. })
        ));
        assert!(matches!(
            parse_function("affine(1/0,1)"),
            Err(Error::Syntax { offset: 9, .. })
        ));
        assert!(matches!(
            parse_function("mobius(1,2,2,4)"),
            Err(Error::Syntax { offset: 0, .. })
        ));
        assert!(matches!(
            parse_function("g(0)"),
            Err(Error::Syntax { offset: 0, .. })
        ));
    }

    #[test]
    fn rational_lists() {
        assert_eq!(
            parse_rational_list("13/20,17/20").unwrap(),
            vec![rat(13, 20), rat(17, 20)]
        );
        assert!(parse_rational_list("1,,2").is_err());
    }
}
