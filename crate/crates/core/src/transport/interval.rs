use std::fmt;

use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::exactpoly::rational::{format_rational, parse_rational, rat, to_f64, Rational};

/// Half-open or half-unbounded real interval, the four kinds the transport
/// constructions work with.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Interval {
    /// `[lo, hi)`
    ClosedOpen { lo: Rational, hi: Rational },
    /// `(lo, hi]`
    OpenClosed { lo: Rational, hi: Rational },
    /// `[lo, inf)`
    ClosedUnbounded { lo: Rational },
    /// `(-inf, hi]`
    UnboundedClosed { hi: Rational },
}

impl Interval {
    pub fn closed_open(lo: Rational, hi: Rational) -> Result<Self> {
        if lo >= hi {
            return invalid(format!("empty interval [{lo}, {hi})"));
        }
        Ok(Interval::ClosedOpen { lo, hi })
    }

    pub fn open_closed(lo: Rational, hi: Rational) -> Result<Self> {
        if lo >= hi {
            return invalid(format!("empty interval ({lo}, {hi}]"));
        }
        Ok(Interval::OpenClosed { lo, hi })
    }

    pub fn closed_unbounded(lo: Rational) -> Self {
        Interval::ClosedUnbounded { lo }
    }

    pub fn unbounded_closed(hi: Rational) -> Self {
        Interval::UnboundedClosed { hi }
    }

    /// `[0, inf)`
    pub fn nonneg() -> Self {
        Self::closed_unbounded(Rational::zero())
    }

    /// `[0, 1)`
    pub fn unit() -> Self {
        Interval::ClosedOpen {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    pub fn lo(&self) -> Option<&Rational> {
        match self {
            Interval::ClosedOpen { lo, .. }
            | Interval::OpenClosed { lo, .. }
            | Interval::ClosedUnbounded { lo } => Some(lo),
            Interval::UnboundedClosed { .. } => None,
        }
    }

    pub fn hi(&self) -> Option<&Rational> {
        match self {
            Interval::ClosedOpen { hi, .. }
            | Interval::OpenClosed { hi, .. }
            | Interval::UnboundedClosed { hi } => Some(hi),
            Interval::ClosedUnbounded { .. } => None,
        }
    }

    /// True for `[a, b)` and `[a, inf)`.
    pub fn is_left_closed(&self) -> bool {
        matches!(
            self,
            Interval::ClosedOpen { .. } | Interval::ClosedUnbounded { .. }
        )
    }

    pub fn is_bounded(&self) -> bool {
        matches!(
            self,
            Interval::ClosedOpen { .. } | Interval::OpenClosed { .. }
        )
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            Interval::ClosedOpen { lo, hi } => lo <= x && x < hi,
            Interval::OpenClosed { lo, hi } => lo < x && x <= hi,
            Interval::ClosedUnbounded { lo } => lo <= x,
            Interval::UnboundedClosed { hi } => x <= hi,
        }
    }

    /// Membership with the closure widened by `tol` on every side.
    pub fn contains_f64(&self, x: f64, tol: f64) -> bool {
        let above = self.lo().is_none_or(|lo| x >= to_f64(lo) - tol);
        let below = self.hi().is_none_or(|hi| x <= to_f64(hi) + tol);
        x.is_finite() && above && below
    }

    /// Maps `u` in `[0, 1)` monotonically onto the interval, anchored at its
    /// closed endpoint: affine for bounded kinds, `u / (1 - u)` otherwise.
    pub fn from_unit(&self, u: &Rational) -> Rational {
        let stretch = || u / (Rational::one() - u);
        match self {
            Interval::ClosedOpen { lo, hi } => lo + u * (hi - lo),
            Interval::OpenClosed { lo, hi } => hi - u * (hi - lo),
            Interval::ClosedUnbounded { lo } => lo + stretch(),
            Interval::UnboundedClosed { hi } => hi - stretch(),
        }
    }

    /// `count` distinct deterministic rational points inside the interval.
    pub fn probes(&self, count: usize) -> Vec<Rational> {
        (0..count)
            .map(|k| self.from_unit(&rat(2 * k as i64 + 1, 2 * count as i64 + 1)))
            .collect()
    }

    /// Parses the bracket syntax `[lo,hi)`, `[lo,inf)`, `(lo,hi]`, `(-inf,hi]`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || {
            Error::InvalidArgument(format!(
                "bad interval {s:?}; expected [lo,hi), [lo,inf), (lo,hi] or (-inf,hi]"
            ))
        };
        if t.len() < 2 {
            return Err(bad());
        }
        let (open, body, close) = (&t[..1], &t[1..t.len() - 1], &t[t.len() - 1..]);
        let (a, b) = body.split_once(',').ok_or_else(bad)?;
        let (a, b) = (a.trim(), b.trim());
        match (open, close) {
            ("[", ")") => {
                let lo = parse_rational(a)?;
                if is_inf(b) {
                    Ok(Self::closed_unbounded(lo))
                } else {
                    Self::closed_open(lo, parse_rational(b)?)
                }
            }
            ("(", "]") => {
                let hi = parse_rational(b)?;
                if a == "-inf" {
                    Ok(Self::unbounded_closed(hi))
                } else {
                    Self::open_closed(parse_rational(a)?, hi)
                }
            }
            ("(", ")") | ("[", "]") => Err(Error::UnsupportedIntervalPair(format!(
                "{s} is not half-open; only [a,b), [a,inf), (a,b] and (-inf,b] are supported \
                 (an operator monotone function on the whole real line is affine, so no such \
                 bijection reaches an open interval)"
            ))),
            _ => Err(bad()),
        }
    }

    /// Parses the bare `lo,hi` / `lo,inf` form, read as `[lo,hi)` / `[lo,inf)`.
    pub fn parse_bare(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('[') || t.starts_with('(') {
            return Self::parse(t);
        }
        let (a, b) = t.split_once(',').ok_or_else(|| {
            Error::InvalidArgument(format!("bad interval {s:?}; expected lo,hi or lo,inf"))
        })?;
        let lo = parse_rational(a)?;
        if is_inf(b.trim()) {
            Ok(Self::closed_unbounded(lo))
        } else {
            Self::closed_open(lo, parse_rational(b)?)
        }
    }
}

fn is_inf(s: &str) -> bool {
    matches!(s, "inf" | "+inf")
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::ClosedOpen { lo, hi } => {
                write!(f, "[{},{})", format_rational(lo), format_rational(hi))
            }
            Interval::OpenClosed { lo, hi } => {
                write!(f, "({},{}]", format_rational(lo), format_rational(hi))
            }
            Interval::ClosedUnbounded { lo } => write!(f, "[{},inf)", format_rational(lo)),
            Interval::UnboundedClosed { hi } => write!(f, "(-inf,{}]", format_rational(hi)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rational::int;

    #[test]
    fn parse_four_kinds() {
        for s in ["[0,1)", "[2,inf)", "(-1/2,3]", "(-inf,0]"] {
            assert_eq!(Interval::parse(s).unwrap().to_string(), s);
        }
        assert!(Interval::parse("[1,0)").is_err());
        assert!(Interval::parse("[0,1]").is_err());
        assert!(Interval::parse("(0,1)").is_err());
        assert_eq!(Interval::parse_bare("0,inf").unwrap(), Interval::nonneg());
        assert_eq!(
            Interval::parse_bare("0,3/2").unwrap().to_string(),
            "[0,3/2)"
        );
    }

    #[test]
    fn membership_and_probes() {
        let i = Interval::parse("(0,1]").unwrap();
        assert!(!i.contains(&int(0)));
        assert!(i.contains(&int(1)));
        for kind in ["[0,1)", "[2,inf)", "(-1/2,3]", "(-inf,0]"] {
            let i = Interval::parse(kind).unwrap();
            let ps = i.probes(20);
            assert!(ps.iter().all(|p| i.contains(p)), "{kind}");
            let mut sorted = ps.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), 20);
        }
        assert_eq!(Interval::nonneg().from_unit(&rat(1, 2)), int(1));
    }
}
