//! Exact definiteness verdicts for symmetric matrices over the rationals or
//! over `Q[t]`.
//!
//! Positive definiteness is decided by Sylvester's criterion on leading
//! minors. Positive semidefiniteness is decided from the signs of the
//! elementary symmetric functions of the eigenvalues, read off the
//! characteristic polynomial. A negative verdict always carries a principal
//! minor with negative determinant.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::exactpoly::rational::{dyadic_round, to_f64};
use crate::exactpoly::{Poly, Rational};
use crate::numfalsify::eig::{sym_eig, SymMatrixF, DEFAULT_EIG_TOL};

/// Exact ring operations needed by fraction-free elimination.
pub trait Scalar: Clone + PartialEq + fmt::Debug {
    fn zero_el() -> Self;
    fn one_el() -> Self;
    fn is_zero_el(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    /// Division known to be exact.
    fn div_exact(&self, other: &Self) -> Self;
    fn negated(&self) -> Self {
        Self::zero_el().minus(self)
    }
}

impl Scalar for Rational {
    fn zero_el() -> Self {
        Zero::zero()
    }
    fn one_el() -> Self {
        One::one()
    }
    fn is_zero_el(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn div_exact(&self, other: &Self) -> Self {
        self / other
    }
}

impl Scalar for Poly {
    fn zero_el() -> Self {
        Poly::zero()
    }
    fn one_el() -> Self {
        Poly::one()
    }
    fn is_zero_el(&self) -> bool {
        Poly::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn div_exact(&self, other: &Self) -> Self {
        Poly::exact_div(self, other)
    }
}

/// Square symmetric matrix over one exact scalar kind.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    /// Fills the upper triangle from `f(i, j)` (`i <= j`) and mirrors it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = vec![T::zero_el(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                entries[j * n + i] = v.clone();
                entries[i * n + j] = v;
            }
        }
        SymMatrix { n, entries }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return invalid("matrix rows must form a square");
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return invalid(format!("matrix is not symmetric at ({i}, {j})"));
                }
            }
        }
        Ok(SymMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one_el() } else { T::zero_el() })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.n + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries
            .chunks(self.n.max(1))
            .map(<[T]>::to_vec)
            .collect()
    }

    /// Principal submatrix on `indices` (kept in the given order).
    pub fn principal(&self, indices: &[usize]) -> Self {
        Self::from_fn(indices.len(), |i, j| {
            self.get(indices[i], indices[j]).clone()
        })
    }

    /// Leading `k x k` block.
    pub fn leading(&self, k: usize) -> Self {
        self.principal(&(0..k).collect::<Vec<_>>())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SymMatrix<U> {
        SymMatrix {
            n: self.n,
            entries: self.entries.iter().map(f).collect(),
        }
    }
}

impl SymMatrix<Poly> {
    /// Entrywise evaluation at `t`.
    pub fn at(&self, t: &Rational) -> SymMatrix<Rational> {
        self.map(|p| p.eval(t))
    }
}

impl SymMatrix<Rational> {
    pub fn to_f64(&self) -> SymMatrixF {
        SymMatrixF::from_row_major(self.n, self.entries.iter().map(to_f64).collect())
            .expect("finite conversion of a rational matrix")
    }

    /// `v^T M v`
    pub fn quadratic_form(&self, v: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += &v[i] * self.get(i, j) * &v[j];
            }
        }
        acc
    }
}

impl<T: fmt::Display> fmt::Display for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.entries[i * self.n + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Determinant by Bareiss fraction-free elimination with row pivoting.
pub fn det_exact<T: Scalar>(m: &SymMatrix<T>) -> T {
    let n = m.order();
    let mut a = m.rows();
    let mut negate = false;
    let mut prev = T::one_el();
    for k in 0..n {
        if a[k][k].is_zero_el() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero_el()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return T::zero_el(),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                a[i][j] = a[i][j]
                    .times(&a[k][k])
                    .minus(&a[i][k].times(&a[k][j]))
                    .div_exact(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    let det = if n == 0 {
        T::one_el()
    } else {
        a[n - 1][n - 1].clone()
    };
    if negate {
        det.negated()
    } else {
        det
    }
}

/// Leading principal minors `D_1, D_2, ...` from pivot-free Bareiss
/// elimination, stopping after the first zero minor.
pub fn leading_minors<T: Scalar>(m: &SymMatrix<T>) -> Vec<T> {
    let n = m.order();
    let mut a = m.rows();
    let mut prev = T::one_el();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(a[k][k].clone());
        if a[k][k].is_zero_el() {
            break;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                a[i][j] = a[i][j]
                    .times(&a[k][k])
                    .minus(&a[i][k].times(&a[k][j]))
                    .div_exact(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    out
}

/// `det(lambda I - M)` by the Faddeev–LeVerrier recurrence.
pub fn char_poly(m: &SymMatrix<Rational>) -> Poly {
    let n = m.order();
    let a = m.rows();
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = Rational::one();
    let mut mk = vec![vec![Rational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Rational::zero();
                for l in 0..n {
                    if !Zero::is_zero(&mk[l][j]) {
                        s += &a[i][l] * &mk[l][j];
                    }
                }
                next[i][j] = s;
            }
            next[i][i] += &c[n - k + 1];
        }
        mk = next;
        // c_{n-k} = -tr(A M_k) / k
        let mut tr = Rational::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &a[i][l] * &mk[l][i];
            }
        }
        c[n - k] = -tr / Rational::from_integer((k as i64).into());
    }
    Poly::new(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefiniteSingular,
    NotPsd,
}

impl Definiteness {
    pub fn is_psd(self) -> bool {
        self != Definiteness::NotPsd
    }

    pub fn name(self) -> &'static str {
        match self {
            Definiteness::PositiveDefinite => "PositiveDefinite",
            Definiteness::PositiveSemidefiniteSingular => "PositiveSemidefiniteSingular",
            Definiteness::NotPsd => "NotPsd",
        }
    }
}

/// Independently checkable evidence that a matrix is not PSD.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsdWitness {
    /// Principal minor on `indices` with determinant `det < 0`.
    PrincipalMinor { indices: Vec<usize>, det: Rational },
    /// Vector with `v^T M v = value < 0`.
    Vector { v: Vec<Rational>, value: Rational },
}

impl PsdWitness {
    /// Recomputes the witness against `m`; true iff it is negative and matches.
    pub fn verify(&self, m: &SymMatrix<Rational>) -> bool {
        match self {
            PsdWitness::PrincipalMinor { indices, det } => {
                indices.iter().all(|&i| i < m.order())
                    && det.is_negative()
                    && det_exact(&m.principal(indices)) == *det
            }
            PsdWitness::Vector { v, value } => {
                v.len() == m.order() && value.is_negative() && m.quadratic_form(v) == *value
            }
        }
    }

    pub fn value(&self) -> &Rational {
        match self {
            PsdWitness::PrincipalMinor { det, .. } => det,
            PsdWitness::Vector { value, .. } => value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsdVerdict {
    pub kind: Definiteness,
    /// Present exactly when `kind` is `NotPsd`.
    pub witness: Option<PsdWitness>,
    /// Leading principal minors inspected by [`is_pd`], up to the first
    /// non-positive one; empty for verdicts produced by [`is_psd`] alone.
    pub leading_minors: Vec<Rational>,
}

impl PsdVerdict {
    pub fn is_pd(&self) -> bool {
        self.kind == Definiteness::PositiveDefinite
    }
}

/// Sylvester's criterion with exact Bareiss minors. When the matrix is not
/// PD the verdict falls back to [`is_psd`] and keeps the minors computed so far.
pub fn is_pd(m: &SymMatrix<Rational>) -> Result<PsdVerdict> {
    let minors = leading_minors(m);
    if minors.len() == m.order() && minors.iter().all(Signed::is_positive) {
        return Ok(PsdVerdict {
            kind: Definiteness::PositiveDefinite,
            witness: None,
            leading_minors: minors,
        });
    }
    let end = minors
        .iter()
        .position(|d| !d.is_positive())
        .map_or(minors.len(), |k| k + 1);
    let mut verdict = is_psd(m)?;
    verdict.leading_minors = minors[..end].to_vec();
    Ok(verdict)
}

/// PSD test from the characteristic polynomial: with
/// `det(lambda I - M) = sum (-1)^k e_k lambda^(n-k)`, `M` is PSD iff every
/// `e_k >= 0`.
pub fn is_psd(m: &SymMatrix<Rational>) -> Result<PsdVerdict> {
    let n = m.order();
    let cp = char_poly(m);
    let e = |k: usize| -> Rational {
        let c = cp.coeff(n - k);
        if k % 2 == 0 {
            c
        } else {
            -c
        }
    };
    let first_negative = (1..=n).find(|&k| e(k).is_negative());
    let Some(kmax) = first_negative else {
        let kind = if n == 0 || e(n).is_positive() {
            Definiteness::PositiveDefinite
        } else {
            Definiteness::PositiveSemidefiniteSingular
        };
        return Ok(PsdVerdict {
            kind,
            witness: None,
            leading_minors: Vec::new(),
        });
    };
    // e_kmax is the sum of the kmax x kmax principal minors, so one of size
    // at most kmax is negative
    for size in 1..=kmax {
        for idx in combinations(n, size) {
            let det = det_exact(&m.principal(&idx));
            if det.is_negative() {
                return Ok(PsdVerdict {
                    kind: Definiteness::NotPsd,
                    witness: Some(PsdWitness::PrincipalMinor { indices: idx, det }),
                    leading_minors: Vec::new(),
                });
            }
        }
    }
    Err(Error::Internal(format!(
        "e_{kmax} < 0 but no principal minor of size <= {kmax} is negative"
    )))
}

/// Lexicographic `size`-subsets of `0..n`.
pub fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

/// Rational vector `v` with `v^T M v < 0`, obtained from a float eigenvector of
/// the most negative eigenvalue rounded to a dyadic grid and checked exactly.
pub fn negative_direction(m: &SymMatrix<Rational>) -> Result<Option<PsdWitness>> {
    let eig = sym_eig(&m.to_f64(), DEFAULT_EIG_TOL)?;
    if eig.min() >= 0.0 {
        return Ok(None);
    }
    let col = eig.vectors.column(0);
    for bits in [20u32, 30, 40, 52] {
        let v: Vec<Rational> = col
            .iter()
            .map(|x| dyadic_round(*x, bits))
            .collect::<Result<_>>()?;
        let value = m.quadratic_form(&v);
        if value.is_negative() {
            return Ok(Some(PsdWitness::Vector { v, value }));
        }
    }
    Ok(None)
}
