use std::fmt;

use crate::error::{invalid, Result};

/// Dense real symmetric matrix, symmetrized on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrixF {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrixF {
    /// Builds from row-major data, replacing `a` by `(a + a^T) / 2`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return invalid(format!("expected {} entries, got {}", n * n, data.len()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return invalid("matrix has non-finite entries");
        }
        let mut m = SymMatrixF { n, data };
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (m.get(i, j) + m.get(j, i));
                m.set(i, j, s);
                m.set(j, i, s);
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return invalid("matrix rows must form a square");
        }
        Self::from_row_major(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrixF {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &SymMatrixF) -> SymMatrixF {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        SymMatrixF { n: self.n, data }
    }

    /// `self + s * v v^T`
    pub fn add_rank_one(&self, s: f64, v: &[f64]) -> SymMatrixF {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.data[i * self.n + j] += s * v[i] * v[j];
            }
        }
        out
    }

    /// `Q diag(values) Q^T` with `Q` given by its columns.
    pub fn from_spectral(q: &Orthogonal, values: &[f64]) -> SymMatrixF {
        let n = values.len();
        let mut out = SymMatrixF::zeros(n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| q.get(i, k) * values[k] * q.get(j, k)).sum();
                out.set(i, j, s);
                out.set(j, i, s);
            }
        }
        out
    }

    pub fn matmul(&self, other: &SymMatrixF) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }
}

impl fmt::Display for SymMatrixF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

/// Square matrix stored row-major whose columns are orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Orthogonal {
    n: usize,
    data: Vec<f64>,
}

impl Orthogonal {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Orthogonal { n, data }
    }

    /// Column-major construction from a list of columns.
    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let n = cols.len();
        let mut data = vec![0.0; n * n];
        for (k, c) in cols.iter().enumerate() {
            for i in 0..n {
                data[i * n + k] = c[i];
            }
        }
        Orthogonal { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, k)).collect()
    }

    /// `max |Q^T Q - I|`
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|i| self.get(i, a) * self.get(i, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Eigendecomposition `M = Q diag(values) Q^T`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub vectors: Orthogonal,
    pub values: Vec<f64>,
}

impl SymEig {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

pub const DEFAULT_EIG_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 30;

/// Cyclic Jacobi rotations until the off-diagonal mass drops below `tol * ||M||_F`.
pub fn sym_eig(m: &SymMatrixF, tol: f64) -> Result<SymEig> {
    let n = m.order();
    if m.row_major().iter().any(|x| !x.is_finite()) {
        return invalid("matrix has non-finite entries");
    }
    let mut a = m.row_major().to_vec();
    let mut v = Orthogonal::identity(n);
    let norm = m.frobenius();
    let target = tol * norm;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= target || norm == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v.data[k * n + p], v.data[k * n + q]);
                    v.data[k * n + p] = c * vkp - s * vkq;
                    v.data[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let cols: Vec<Vec<f64>> = order.iter().map(|&k| v.column(k)).collect();
    Ok(SymEig {
        vectors: Orthogonal::from_columns(&cols),
        values,
    })
}

pub fn min_eigenvalue(m: &SymMatrixF) -> Result<f64> {
    Ok(sym_eig(m, DEFAULT_EIG_TOL)?.min())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let e = sym_eig(
            &SymMatrixF::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            1e-14,
        )
        .unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let e = sym_eig(
            &SymMatrixF::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap(),
            1e-14,
        )
        .unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
        let e = sym_eig(&SymMatrixF::diag(&[5.0]), 1e-14).unwrap();
        assert_eq!(e.values, vec![5.0]);
        assert_eq!(e.vectors, Orthogonal::identity(1));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(SymMatrixF::from_rows(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn reconstruction() {
        let m = SymMatrixF::from_rows(&[
            vec![4.0, 1.0, -2.0, 0.5],
            vec![1.0, 3.0, 0.0, 1.0],
            vec![-2.0, 0.0, 1.0, 2.0],
            vec![0.5, 1.0, 2.0, -1.0],
        ])
        .unwrap();
        let tol = 1e-14;
        let e = sym_eig(&m, tol).unwrap();
        let back = SymMatrixF::from_spectral(&e.vectors, &e.values);
        assert!(back.sub(&m).frobenius() <= 10.0 * tol * m.frobenius());
        assert!(e.vectors.orthogonality_error() <= 10.0 * tol);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn symmetrizes_input() {
        let m = SymMatrixF::from_row_major(2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), 1.0);
    }
}
