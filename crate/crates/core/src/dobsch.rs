//! The derivative matrix `M_n(f; t) = (f^(i+j-1)(t) / (i+j-1)!)`, the Hankel
//! moment matrix it reduces to at `t = 0` for `f = g_n`, and the exact gap
//! certificate for `g_n`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::exactpoly::rational::{format_rational, from_f64, int, rat, to_f64};
use crate::exactpoly::{
    intpoly, isolate_positive_roots, isolate_roots_in, poly_nonneg_on, refine_bracket, Poly,
    Rational, RootBracket,
};
use crate::loewner::{find_violation, SearchOutcome};
use crate::psdcert::{is_pd, is_psd, Definiteness, PsdVerdict, SymMatrix};
use crate::transport::{FunctionExpr, Interval};

/// `b_k = (1/2) * integral_{-1}^{1} t^k dt`.
pub fn moment_b(k: usize) -> Rational {
    if k % 2 == 0 {
        rat(1, k as i64 + 1)
    } else {
        Rational::zero()
    }
}

/// `(b_{i+j-2})`, the value of `M_n(g_n; 0)`.
pub fn hankel_at_zero(n: usize) -> Result<SymMatrix<Rational>> {
    if n == 0 {
        return invalid("order must be at least 1");
    }
    Ok(SymMatrix::from_fn(n, |i, j| moment_b(i + j)))
}

/// `M_n(f; t)` with polynomial entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DobschMatrix {
    pub n: usize,
    pub f: Poly,
    pub entries: SymMatrix<Poly>,
}

impl DobschMatrix {
    pub fn at(&self, t: &Rational) -> SymMatrix<Rational> {
        self.entries.at(t)
    }
}

fn factorial(m: usize) -> Rational {
    Rational::from_integer((1..=m).map(BigInt::from).product())
}

pub fn dobsch_matrix(f: &Poly, n: usize) -> Result<DobschMatrix> {
    if n == 0 {
        return invalid("order must be at least 1");
    }
    let scaled: Vec<Poly> = (1..2 * n)
        .map(|m| f.derivative(m).scale(&(Rational::one() / factorial(m))))
        .collect();
    let entries = SymMatrix::from_fn(n, |i, j| scaled[i + j].clone());
    Ok(DobschMatrix {
        n,
        f: f.clone(),
        entries,
    })
}

/// Principal block of `M_{n+1}(g_n; t)` on its last three indices.
pub fn trailing_block(n: usize) -> Result<SymMatrix<Poly>> {
    if n <= 1 {
        return invalid("the trailing block needs n >= 2");
    }
    let m = dobsch_matrix(&Poly::gn(n)?, n + 1)?;
    Ok(m.entries.principal(&[n - 2, n - 1, n]))
}

/// `[[1/(2n-3) + (n-1) t^2, t, 1/(2n-1)], [t, 1/(2n-1), 0], [1/(2n-1), 0, 0]]`
pub fn trailing_block_closed_form(n: usize) -> Result<SymMatrix<Poly>> {
    if n <= 1 {
        return invalid("the trailing block needs n >= 2");
    }
    let a = rat(1, 2 * n as i64 - 3);
    let c = Poly::constant(rat(1, 2 * n as i64 - 1));
    let corner = Poly::new(vec![a, Rational::zero(), int(n as i64 - 1)]);
    SymMatrix::from_rows(vec![
        vec![corner, Poly::t(), c.clone()],
        vec![Poly::t(), c.clone(), Poly::zero()],
        vec![c, Poly::zero(), Poly::zero()],
    ])
}

pub fn trailing_block_det(n: usize) -> Result<Poly> {
    Ok(crate::psdcert::det_exact(&trailing_block(n)?))
}

/// `-(2n-1)^(-3)`
pub fn expected_trailing_det(n: usize) -> Rational {
    let d = 2 * n as i64 - 1;
    rat(-1, d * d * d)
}

/// Leading principal minors of `M_n(g_n; t)` as polynomials in `t`.
pub fn leading_minor_polys(n: usize) -> Result<Vec<Poly>> {
    let m = dobsch_matrix(&Poly::gn(n)?, n)?;
    // clear denominators once; the k-th minor of l * M is l^k times the minor of M
    let l = intpoly::denominator_lcm(m.entries.entries());
    let rows: Vec<Vec<_>> = m
        .entries
        .rows()
        .iter()
        .map(|r| r.iter().map(|p| intpoly::scaled_to_int(p, &l)).collect())
        .collect();
    let minors = intpoly::leading_minors(&rows);
    if minors.last().is_some_and(Vec::is_empty) || minors.len() != n {
        let k = minors
            .iter()
            .position(Vec::is_empty)
            .map_or(minors.len(), |k| k + 1);
        return Err(Error::Internal(format!(
            "leading minor {k} of M_{n}(g_{n}; t) vanishes identically"
        )));
    }
    let l = Rational::from_integer(l);
    let mut scale = Rational::one();
    Ok(minors
        .iter()
        .map(|p| {
            scale /= &l;
            intpoly::to_poly(p).scale(&scale)
        })
        .collect())
}

/// `q` with `q(t^2) = p(t)` for an even `p`.
fn even_reduction(p: &Poly) -> Option<Poly> {
    if !p.is_even() {
        return None;
    }
    Some(Poly::new(p.coeffs().iter().step_by(2).cloned().collect()))
}

/// Rationals `lo <= sqrt(a)` and `hi >= sqrt(b)` close to the square roots.
fn sqrt_bounds(a: &Rational, b: &Rational) -> Result<(Rational, Rational)> {
    let nudge = |x: &Rational, up: bool| -> Result<Rational> {
        let mut f = to_f64(x).sqrt();
        loop {
            let r = from_f64(f)?;
            let sq = &r * &r;
            if (up && sq >= *x) || (!up && sq <= *x) {
                return Ok(r);
            }
            f = if up {
                f.next_up()
            } else {
                f.next_down().max(0.0)
            };
        }
    };
    Ok((nudge(a, false)?, nudge(b, true)?))
}

/// Radius of positive definiteness of `M_n(g_n; t)` on `[0, alpha)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaEstimate {
    /// `f64::INFINITY` when no leading minor has a positive root.
    pub value: f64,
    /// Bracket of width at most `tol` around the limiting root.
    pub bracket: Option<RootBracket>,
    /// 1-based index of the leading minor whose root limits the radius.
    pub minor_index: Option<usize>,
}

impl AlphaEstimate {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Smallest positive root over all leading minors of `M_n(g_n; t)`, refined
/// by exact bisection to width `tol`.
pub fn alpha_dobsch(n: usize, tol: f64) -> Result<AlphaEstimate> {
    alpha_from_minors(&leading_minor_polys(n)?, tol)
}

/// First positive root of `p` bracketed to width at most `tol`.
fn first_positive_root(p: &Poly, tol: f64) -> Result<Option<RootBracket>> {
    let Some(q) = even_reduction(p) else {
        let Some(first) = isolate_positive_roots(p)?.into_iter().next() else {
            return Ok(None);
        };
        return refine_bracket(p, &first, &from_f64(tol)?).map(Some);
    };
    let Some(first) = isolate_positive_roots(&q)?.into_iter().next() else {
        return Ok(None);
    };
    // sqrt(b) - sqrt(a) <= sqrt(b - a), so width tol^2 / 4 in s gives tol / 2 in t
    let b = refine_bracket(&q, &first, &from_f64(tol * tol / 4.0)?)?;
    let (lo, hi) = sqrt_bounds(&b.lo, &b.hi)?;
    let inside = isolate_roots_in(&q, &(&lo * &lo), Some(&(&hi * &hi)))?;
    if inside.len() != 1 || q.sign_at(&(&lo * &lo)) == 0 || q.sign_at(&(&hi * &hi)) == 0 {
        return Err(Error::Internal("square root bracket lost its root".into()));
    }
    Ok(Some(RootBracket {
        lo,
        hi,
        sign_change: b.sign_change,
    }))
}

fn alpha_from_minors(minors: &[Poly], tol: f64) -> Result<AlphaEstimate> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let mut best: Option<(RootBracket, usize, f64)> = None;
    for (k, p) in minors.iter().enumerate() {
        let Some(b) = first_positive_root(p, tol)? else {
            continue;
        };
        let mid = to_f64(&((&b.lo + &b.hi) / int(2)));
        if best.as_ref().is_none_or(|(_, _, v)| mid < *v) {
            best = Some((b, k + 1, mid));
        }
    }
    Ok(match best {
        None => AlphaEstimate {
            value: f64::INFINITY,
            bracket: None,
            minor_index: None,
        },
        Some((b, k, v)) => AlphaEstimate {
            value: v,
            bracket: Some(b),
            minor_index: Some(k),
        },
    })
}

/// Exact check that every leading minor of `M_n(g_n; t)` is positive on `[0, alpha)`.
pub fn radius_covers(n: usize, alpha: &Rational) -> Result<bool> {
    covers(&leading_minor_polys(n)?, alpha)
}

fn covers(minors: &[Poly], alpha: &Rational) -> Result<bool> {
    if !alpha.is_positive() {
        return Ok(false);
    }
    for p in minors {
        if !p.eval(&Rational::zero()).is_positive() {
            return Ok(false);
        }
        let roots = match even_reduction(p) {
            Some(q) => isolate_roots_in(&q, &Rational::zero(), Some(&(alpha * alpha)))?,
            None => isolate_roots_in(p, &Rational::zero(), Some(alpha))?,
        };
        if !roots.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest `k / 64` strictly below `alpha - tol` (1 when the radius is
/// infinite); finer dyadic grids are used when that would be zero.
pub fn default_alpha_rat(alpha: &AlphaEstimate, tol: f64) -> Rational {
    if !alpha.is_finite() {
        return Rational::one();
    }
    let target = alpha.value - tol;
    let mut den: i64 = 64;
    loop {
        let k = (target * den as f64).ceil() as i64 - 1;
        if k >= 1 {
            return rat(k, den);
        }
        den *= 2;
    }
}

/// Positivity and convexity of `g_n^(m)` on `[0, alpha_rat)`, `m = 2n - 3`
/// (`m = 1` for `n = 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypothesisCheck {
    pub derivative_order: usize,
    pub interval: Interval,
    pub derivative: Poly,
    pub positive: bool,
    pub convex: bool,
    /// Rational point where the derivative is negative (or zero at the origin), if found.
    pub positivity_witness: Option<Rational>,
    /// Point where its second derivative is negative, if any.
    pub convexity_witness: Option<Rational>,
}

impl HypothesisCheck {
    pub fn holds(&self) -> bool {
        self.positive && self.convex
    }
}

pub fn hypothesis_check(n: usize, alpha_rat: &Rational) -> Result<HypothesisCheck> {
    let m = if n == 1 { 1 } else { 2 * n - 3 };
    let interval = Interval::closed_open(Rational::zero(), alpha_rat.clone())?;
    let d = Poly::gn(n)?.derivative(m);
    let nonneg = poly_nonneg_on(&d, &interval)?;
    let (positive, positivity_witness) = if !nonneg.nonneg {
        (false, nonneg.witness)
    } else if !d.eval(&Rational::zero()).is_positive() {
        (false, Some(Rational::zero()))
    } else {
        // a root inside the interval is irrational in general, so no point is reported
        (
            isolate_roots_in(&d, &Rational::zero(), Some(alpha_rat))?.is_empty(),
            None,
        )
    };
    let convex = poly_nonneg_on(&d.derivative(2), &interval)?;
    Ok(HypothesisCheck {
        derivative_order: m,
        interval,
        derivative: d,
        positive,
        convex: convex.nonneg,
        positivity_witness,
        convexity_witness: convex.witness,
    })
}

/// Exact evidence that `g_n` is order `n` monotone near 0 and fails order
/// `n + 1` on every subinterval.
#[derive(Clone, Debug, PartialEq)]
pub struct GapCertificate {
    pub n: usize,
    /// `is_pd(M_n(g_n; 0))`
    pub hankel_pd: PsdVerdict,
    pub alpha: AlphaEstimate,
    /// Certified rational radius: all leading minors are positive on `[0, alpha_rat)`.
    pub alpha_rat: Rational,
    pub alpha_rat_covered: bool,
    /// `det` of the trailing block, `None` for `n = 1`.
    pub trailing_det: Option<Poly>,
    pub trailing_matches_closed_form: Option<bool>,
    /// Verdict on the trailing block at `t = 0`.
    pub trailing_not_psd: Option<PsdVerdict>,
    /// For `n = 1`: outcome of the exact order-2 Loewner search on `[0, alpha_rat)`.
    pub order2_search: Option<SearchOutcome>,
    pub hypothesis: HypothesisCheck,
    /// Names of failed sub-checks; empty iff the certificate is valid.
    pub failures: Vec<String>,
}

impl GapCertificate {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const DEFAULT_ALPHA_TOL: f64 = 1e-10;
/// Budget of the order-2 search used for `n = 1`.
pub const ORDER2_BUDGET: u64 = 1000;

pub fn gap_certificate(n: usize) -> Result<GapCertificate> {
    gap_certificate_with(n, DEFAULT_ALPHA_TOL)
}

pub fn gap_certificate_with(n: usize, tol: f64) -> Result<GapCertificate> {
    if n == 0 {
        return invalid("order must be at least 1");
    }
    let mut failures = Vec::new();
    let hankel_pd = is_pd(&hankel_at_zero(n)?)?;
    if !hankel_pd.is_pd() {
        failures.push("hankel_pd".to_string());
    }
    let minors = leading_minor_polys(n)?;
    let alpha = alpha_from_minors(&minors, tol)?;
    let alpha_rat = default_alpha_rat(&alpha, tol);
    let alpha_rat_covered = covers(&minors, &alpha_rat)?;
    if !alpha_rat_covered {
        failures.push("alpha_rat".to_string());
    }

    let (
        mut trailing_det,
        mut trailing_matches_closed_form,
        mut trailing_not_psd,
        mut order2_search,
    ) = (None, None, None, None);
    if n >= 2 {
        let block = trailing_block(n)?;
        let matches = block == trailing_block_closed_form(n)?;
        if !matches {
            failures.push("trailing_block".to_string());
        }
        let det = crate::psdcert::det_exact(&block);
        if det != Poly::constant(expected_trailing_det(n)) {
            failures.push("trailing_det".to_string());
        }
        let verdict = is_psd(&block.at(&Rational::zero()))?;
        if verdict.kind != Definiteness::NotPsd {
            failures.push("trailing_not_psd".to_string());
        }
        trailing_det = Some(det);
        trailing_matches_closed_form = Some(matches);
        trailing_not_psd = Some(verdict);
    } else {
        let dom = Interval::closed_open(Rational::zero(), alpha_rat.clone())?;
        let outcome = find_violation(&FunctionExpr::gn(1)?, 2, &dom, ORDER2_BUDGET, 0)?;
        if !matches!(outcome, SearchOutcome::Witness { .. }) {
            failures.push("order2_violation".to_string());
        }
        order2_search = Some(outcome);
    }

    let hypothesis = hypothesis_check(n, &alpha_rat)?;
    if !hypothesis.holds() {
        failures.push("hypothesis".to_string());
    }
    Ok(GapCertificate {
        n,
        hankel_pd,
        alpha,
        alpha_rat,
        alpha_rat_covered,
        trailing_det,
        trailing_matches_closed_form,
        trailing_not_psd,
        order2_search,
        hypothesis,
        failures,
    })
}

/// Human readable one-line summary of a certificate.
pub fn summary(c: &GapCertificate) -> String {
    let status = if c.is_valid() { "VALID" } else { "INVALID" };
    let det = c
        .trailing_det
        .as_ref()
        .and_then(Poly::as_constant)
        .map(|d| format_rational(&d));
    format!(
        "g({}) {status}: hankel {}, alpha {}, trailing det {}{}",
        c.n,
        c.hankel_pd.kind.name(),
        if c.alpha.is_finite() {
            format!("{:.10}", c.alpha.value)
        } else {
            "inf".into()
        },
        det.unwrap_or_else(|| "n/a".into()),
        if c.failures.is_empty() {
            String::new()
        } else {
            format!(" (failed: {})", c.failures.join(", "))
        }
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        assert_eq!(moment_b(0), int(1));
        assert_eq!(moment_b(3), int(0));
        assert_eq!(moment_b(4), rat(1, 5));
    }

    #[test]
    fn hankel_examples() {
        assert_eq!(hankel_at_zero(1).unwrap().rows(), vec![vec![int(1)]]);
        assert_eq!(
            hankel_at_zero(2).unwrap().rows(),
            vec![vec![int(1), int(0)], vec![int(0), rat(1, 3)]]
        );
        assert!(hankel_at_zero(0).is_err());
    }

    #[test]
    fn dobsch_examples() {
        let m = dobsch_matrix(&Poly::gn(2).unwrap(), 2).unwrap();
        let t = Poly::t();
        let expected = SymMatrix::from_rows(vec![
            vec![Poly::new(vec![int(1), int(0), int(1)]), t.clone()],
            vec![t, Poly::constant(rat(1, 3))],
        ])
        .unwrap();
        assert_eq!(m.entries, expected);
        assert_eq!(m.at(&int(0)), hankel_at_zero(2).unwrap());
        let m = dobsch_matrix(&Poly::gn(1).unwrap(), 1).unwrap();
        assert_eq!(m.entries.rows(), vec![vec![Poly::one()]]);
        assert!(dobsch_matrix(&Poly::t(), 0).is_err());
    }

    #[test]
    fn trailing_blocks() {
        for n in 2..=6 {
            assert_eq!(
                trailing_block(n).unwrap(),
                trailing_block_closed_form(n).unwrap()
            );
            assert_eq!(
                trailing_block_det(n).unwrap(),
                Poly::constant(expected_trailing_det(n))
            );
        }
        assert_eq!(expected_trailing_det(5), rat(-1, 729));
        assert!(trailing_block(1).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert!(!alpha_dobsch(1, 1e-8).unwrap().is_finite());
        let a = alpha_dobsch(2, 1e-8).unwrap();
        assert!((a.value - 0.5f64.sqrt()).abs() < 1e-8);
        assert_eq!(a.minor_index, Some(2));
        assert!(radius_covers(2, &rat(7, 10)).unwrap());
        assert!(!radius_covers(2, &rat(71, 100)).unwrap());
        assert_eq!(default_alpha_rat(&a, 1e-8), rat(45, 64));
    }

    #[test]
    fn certificate_n2() {
        let c = gap_certificate(2).unwrap();
        assert!(c.is_valid(), "{:?}", c.failures);
        assert_eq!(c.hankel_pd.leading_minors, vec![int(1), rat(1, 3)]);
        assert_eq!(c.trailing_det, Some(Poly::constant(rat(-1, 27))));
        assert_eq!(
            c.hypothesis.derivative,
            Poly::new(vec![int(1), int(0), int(1)])
        );
    }

    #[test]
    fn certificate_n1_is_not_established() {
        let c = gap_certificate(1).unwrap();
        assert!(!c.is_valid());
        assert_eq!(c.failures, vec!["order2_violation".to_string()]);
        assert!(c.hankel_pd.is_pd());
    }
}
