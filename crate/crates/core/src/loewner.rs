//! Loewner matrices of first divided differences, exact order-k violation
//! search and the resulting upper bound on the monotonicity radius.
//!
//! The search is guided by the matrix of higher divided differences
//! `K_ab = [f; x_1..x_a, x_1..x_b]` (confluent on the repeated nodes). For
//! distinct nodes `L = W^T K W` with `W` the triangular Newton basis matrix, so
//! `K` and `L` have the same inertia, and `K` stays well scaled when the nodes
//! cluster, where `L` degenerates to a rank-one matrix. Every reported
//! violation is decided on the exact Loewner matrix.

use num_traits::{One, Signed, Zero};
use rand::RngExt;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::exactpoly::rational::{from_f64, rat, to_f64};
use crate::exactpoly::Rational;
use crate::numfalsify::eig::{sym_eig, SymMatrixF, DEFAULT_EIG_TOL};
use crate::numfalsify::stream;
use crate::psdcert::{is_psd, negative_direction, Definiteness, PsdVerdict, PsdWitness, SymMatrix};
use crate::transport::{FunctionExpr, Interval};

#[derive(Clone, Debug, PartialEq)]
pub struct LoewnerMatrix {
    pub nodes: Vec<Rational>,
    pub entries: SymMatrix<Rational>,
}

/// Values and first derivatives of `f` at each node.
fn node_jets(f: &FunctionExpr, nodes: &[Rational]) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let mut vals = Vec::with_capacity(nodes.len());
    let mut ders = Vec::with_capacity(nodes.len());
    for x in nodes {
        let mut j = f.jet(x, 1)?;
        ders.push(j.pop().expect("jet of order 1"));
        vals.push(j.pop().expect("jet of order 1"));
    }
    Ok((vals, ders))
}

pub fn loewner_matrix(f: &FunctionExpr, nodes: &[Rational]) -> Result<LoewnerMatrix> {
    if nodes.is_empty() {
        return invalid("at least one node is required");
    }
    let (vals, ders) = node_jets(f, nodes)?;
    let entries = SymMatrix::from_fn(nodes.len(), |i, j| {
        if nodes[i] == nodes[j] {
            ders[i].clone()
        } else {
            (&vals[i] - &vals[j]) / (&nodes[i] - &nodes[j])
        }
    });
    Ok(LoewnerMatrix {
        nodes: nodes.to_vec(),
        entries,
    })
}

/// Exact PSD verdict on the Loewner matrix; `NotPsd` disproves order
/// `nodes.len()` monotonicity on every interval containing the nodes.
pub fn order_test(f: &FunctionExpr, nodes: &[Rational]) -> Result<PsdVerdict> {
    is_psd(&loewner_matrix(f, nodes)?.entries)
}

/// Divided difference of `f` over the multiset of node indices `z`, where
/// every index occurs at most twice.
fn confluent_dd(
    z: &mut [usize],
    nodes: &[Rational],
    vals: &[Rational],
    ders: &[Rational],
) -> Rational {
    z.sort_by(|&a, &b| nodes[a].cmp(&nodes[b]));
    let m = z.len();
    let mut t: Vec<Rational> = z.iter().map(|&i| vals[i].clone()).collect();
    for k in 1..m {
        for i in 0..m - k {
            let (a, b) = (&nodes[z[i]], &nodes[z[i + k]]);
            t[i] = if a == b {
                ders[z[i]].clone()
            } else {
                (&t[i + 1] - &t[i]) / (b - a)
            };
        }
    }
    t.swap_remove(0)
}

/// `K_ab = [f; x_1..x_a, x_1..x_b]`.
pub fn divided_difference_matrix(
    f: &FunctionExpr,
    nodes: &[Rational],
) -> Result<SymMatrix<Rational>> {
    let (vals, ders) = node_jets(f, nodes)?;
    Ok(dd_matrix_from_jets(nodes, &vals, &ders))
}

fn dd_matrix_from_jets(
    nodes: &[Rational],
    vals: &[Rational],
    ders: &[Rational],
) -> SymMatrix<Rational> {
    SymMatrix::from_fn(nodes.len(), |a, b| {
        let mut z: Vec<usize> = (0..=a).chain(0..=b).collect();
        confluent_dd(&mut z, nodes, vals, ders)
    })
}

/// Upper triangular `W_ai = prod_{k < a} (x_i - x_k)`, zero below the diagonal.
pub fn newton_basis(nodes: &[Rational]) -> Vec<Vec<Rational>> {
    let m = nodes.len();
    let mut w = vec![vec![Rational::zero(); m]; m];
    for i in 0..m {
        let mut p = Rational::one();
        for a in 0..=i {
            w[a][i] = p.clone();
            p *= &nodes[i] - &nodes[a];
        }
    }
    w
}

/// Rational `u` with `u^T L u < 0`, lifted from a negative direction of the
/// divided-difference matrix through the Newton basis.
fn lifted_direction(
    l: &SymMatrix<Rational>,
    k: &SymMatrix<Rational>,
    nodes: &[Rational],
) -> Result<Option<PsdWitness>> {
    let Some(PsdWitness::Vector { v, .. }) = negative_direction(k)? else {
        return negative_direction(l);
    };
    let w = newton_basis(nodes);
    let m = nodes.len();
    if (0..m).any(|i| w[i][i].is_zero()) {
        return negative_direction(l);
    }
    // back substitution for W u = v
    let mut u = vec![Rational::zero(); m];
    for i in (0..m).rev() {
        let mut s = v[i].clone();
        for j in (i + 1)..m {
            s -= &w[i][j] * &u[j];
        }
        u[i] = s / &w[i][i];
    }
    let value = l.quadratic_form(&u);
    Ok(value
        .is_negative()
        .then_some(PsdWitness::Vector { v: u, value }))
}

/// Exactly verified failure of order-`nodes.len()` monotonicity.
#[derive(Clone, Debug, PartialEq)]
pub struct LoewnerWitness {
    pub function: FunctionExpr,
    pub nodes: Vec<Rational>,
    /// `NotPsd` verdict on the Loewner matrix, carrying a negative principal minor.
    pub verdict: PsdVerdict,
    /// Vector with negative Loewner quadratic form, when one was found.
    pub direction: Option<PsdWitness>,
}

impl LoewnerWitness {
    /// Builds the witness if the nodes give a `NotPsd` Loewner matrix.
    pub fn at(f: &FunctionExpr, nodes: &[Rational]) -> Result<Option<LoewnerWitness>> {
        let l = loewner_matrix(f, nodes)?;
        let verdict = is_psd(&l.entries)?;
        if verdict.kind != Definiteness::NotPsd {
            return Ok(None);
        }
        let k = divided_difference_matrix(f, nodes)?;
        let direction = lifted_direction(&l.entries, &k, nodes)?;
        Ok(Some(LoewnerWitness {
            function: f.clone(),
            nodes: nodes.to_vec(),
            verdict,
            direction,
        }))
    }

    /// Rebuilds the Loewner matrix from the stored nodes and re-checks the
    /// verdict, the negative minor and the direction.
    pub fn verify(&self) -> Result<bool> {
        let l = loewner_matrix(&self.function, &self.nodes)?;
        let fresh = is_psd(&l.entries)?;
        let minor_ok = self
            .verdict
            .witness
            .as_ref()
            .is_some_and(|w| w.verify(&l.entries));
        let direction_ok = self.direction.as_ref().is_none_or(|w| w.verify(&l.entries));
        Ok(fresh.kind == Definiteness::NotPsd
            && self.verdict.kind == Definiteness::NotPsd
            && minor_ok
            && direction_ok)
    }

    /// The negative minor determinant.
    pub fn determinant(&self) -> &Rational {
        self.verdict
            .witness
            .as_ref()
            .expect("NotPsd verdicts carry a witness")
            .value()
    }

    pub fn max_node(&self) -> &Rational {
        self.nodes.iter().max().expect("witnesses have nodes")
    }
}

/// Result of a bounded search. `Exhausted` is inconclusive.
#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Witness {
        witness: LoewnerWitness,
        tuple_index: u64,
    },
    Exhausted {
        tuples: u64,
    },
}

impl SearchOutcome {
    pub fn witness(&self) -> Option<&LoewnerWitness> {
        match self {
            SearchOutcome::Witness { witness, .. } => Some(witness),
            SearchOutcome::Exhausted { .. } => None,
        }
    }
}

const CHUNK: u64 = 512;
/// Node grid: unit coordinates are multiples of `2^-GRID_BITS`.
const GRID_BITS: u32 = 40;
/// Smallest cluster width in unit coordinates is `2^-MAX_SPREAD_EXP`.
const MAX_SPREAD_EXP: f64 = 30.0;
/// Relative eigenvalue below which a candidate is checked exactly.
const SCORE_TOL: f64 = 1e-13;

fn sweep_tuple(order: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut r = stream(seed, index);
    let spread =
        |r: &mut rand_xoshiro::Xoshiro256PlusPlus| (-r.random_range(1.0..MAX_SPREAD_EXP)).exp2();
    let equispaced = |start: f64, w: f64| -> Vec<f64> {
        if order == 1 {
            return vec![start];
        }
        (0..order)
            .map(|j| start + w * j as f64 / (order - 1) as f64)
            .collect()
    };
    match index % 4 {
        0 => {
            let w = spread(&mut r);
            let start = r.random::<f64>() * (1.0 - w);
            equispaced(start, w)
        }
        1 => {
            let w = spread(&mut r);
            let start = r.random::<f64>() * (1.0 - w);
            (0..order).map(|_| start + w * r.random::<f64>()).collect()
        }
        2 => {
            // clusters pressed against the right end, where radius bounds live
            let end = 1.0 - spread(&mut r);
            let w = spread(&mut r).min(end);
            equispaced(end - w, w)
        }
        _ => (0..order).map(|_| r.random::<f64>()).collect(),
    }
}

fn perturbed_tuple(base: &[f64], seed: u64, index: u64) -> Vec<f64> {
    let mut r = stream(seed, index);
    let lo = base.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = base.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = (hi - lo).max((-MAX_SPREAD_EXP).exp2()) * (-((index % 8) as f64)).exp2();
    let normal = Normal::new(0.0, scale).expect("positive scale");
    base.iter().map(|u| u + normal.sample(&mut r)).collect()
}

/// Quantizes unit coordinates to the dyadic grid inside `[0, 1)`, sorted and
/// distinct; `None` if coordinates collide. Grid values are exact in `f64`.
fn quantize(us: &[f64]) -> Option<Vec<f64>> {
    let scale = (GRID_BITS as f64).exp2();
    let top = scale - 1.0;
    let mut q: Vec<f64> = us
        .iter()
        .map(|u| (u * scale).round().clamp(0.0, top) / scale)
        .collect();
    if q.iter().any(|u| !u.is_finite()) {
        return None;
    }
    q.sort_by(f64::total_cmp);
    q.dedup();
    (q.len() == us.len()).then_some(q)
}

/// Float image of a unit coordinate, as [`Interval::from_unit`].
fn unit_to_node_f64(interval: &Interval, u: f64) -> f64 {
    let stretch = u / (1.0 - u);
    match interval {
        Interval::ClosedOpen { lo, hi } => to_f64(lo) + u * (to_f64(hi) - to_f64(lo)),
        Interval::OpenClosed { lo, hi } => to_f64(hi) - u * (to_f64(hi) - to_f64(lo)),
        Interval::ClosedUnbounded { lo } => to_f64(lo) + stretch,
        Interval::UnboundedClosed { hi } => to_f64(hi) - stretch,
    }
}

struct Candidate {
    units: Vec<f64>,
    score: f64,
    witness: Option<LoewnerWitness>,
}

/// Quotient of `q` by `t - y`, remainder dropped.
fn synthetic_quotient(q: &[f64], y: f64) -> Vec<f64> {
    let mut out = vec![0.0; q.len().saturating_sub(1)];
    let mut carry = 0.0;
    for k in (1..q.len()).rev() {
        carry = q[k] + y * carry;
        out[k - 1] = carry;
    }
    out
}

fn horner(q: &[f64], x: f64) -> f64 {
    q.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Float `K` for a polynomial. `[p; y_1..y_k]` is the value at `y_k` of `p`
/// divided by `(t - y_1)...(t - y_(k-1))`, which involves no differences of
/// nearby values and so keeps its accuracy on clustered nodes.
fn dd_matrix_poly_f64(p: &[f64], nodes: &[f64]) -> Result<SymMatrixF> {
    let m = nodes.len();
    let mut data = vec![0.0; m * m];
    for a in 0..m {
        let mut r = nodes[..=a]
            .iter()
            .fold(p.to_vec(), |q, &y| synthetic_quotient(&q, y));
        for b in 0..m {
            if b > 0 {
                r = synthetic_quotient(&r, nodes[b - 1]);
            }
            if b >= a {
                let v = horner(&r, nodes[b]);
                data[a * m + b] = v;
                data[b * m + a] = v;
            }
        }
    }
    SymMatrixF::from_row_major(m, data)
}

fn evaluate(
    f: &FunctionExpr,
    fpoly: Option<&[f64]>,
    interval: &Interval,
    units: Vec<f64>,
) -> Result<Option<Candidate>> {
    let Some(q) = quantize(&units) else {
        return Ok(None);
    };
    let exact_nodes = || -> Result<Vec<Rational>> {
        q.iter()
            .map(|u| Ok(interval.from_unit(&from_f64(*u)?)))
            .collect()
    };
    let k = match fpoly {
        Some(p) => dd_matrix_poly_f64(
            p,
            &q.iter()
                .map(|u| unit_to_node_f64(interval, *u))
                .collect::<Vec<_>>(),
        )?,
        None => {
            let nodes = exact_nodes()?;
            let Ok((vals, ders)) = node_jets(f, &nodes) else {
                return Ok(None);
            };
            dd_matrix_from_jets(&nodes, &vals, &ders).to_f64()
        }
    };
    let eig = sym_eig(&k, DEFAULT_EIG_TOL)?;
    let scale = eig.max_abs();
    let score = if scale == 0.0 { 0.0 } else { eig.min() / scale };
    let witness = if score < -SCORE_TOL {
        LoewnerWitness::at(f, &exact_nodes()?)?
    } else {
        None
    };
    Ok(Some(Candidate {
        units: q,
        score,
        witness,
    }))
}

/// Seeded search for `order` nodes in `interval` whose Loewner matrix is not
/// PSD. Three quarters of the budget go to a sweep of clustered and spread
/// tuples, the rest to perturbations of the most negative tuple seen. The
/// result does not depend on the number of worker threads.
pub fn find_violation(
    f: &FunctionExpr,
    order: usize,
    interval: &Interval,
    budget: u64,
    seed: u64,
) -> Result<SearchOutcome> {
    if order == 0 {
        return invalid("order must be at least 1");
    }
    if budget == 0 {
        return invalid("budget must be at least 1");
    }
    f.check_domain(interval)?;
    let fpoly: Option<Vec<f64>> = f.as_poly().map(|p| p.coeffs().iter().map(to_f64).collect());
    let sweep_len = budget - budget / 4;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut start = 0;
    while start < budget {
        let end = (start + CHUNK).min(budget);
        let base = best.as_ref().map(|(_, u)| u.clone());
        let results: Vec<Result<Option<Candidate>>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let units = match (&base, i >= sweep_len) {
                    (Some(b), true) => perturbed_tuple(b, seed, i),
                    _ => sweep_tuple(order, seed, i),
                };
                evaluate(f, fpoly.as_deref(), interval, units)
            })
            .collect();
        for (i, r) in (start..end).zip(results) {
            let Some(c) = r? else { continue };
            if let Some(witness) = c.witness {
                return Ok(SearchOutcome::Witness {
                    witness,
                    tuple_index: i,
                });
            }
            if best.as_ref().is_none_or(|(s, _)| c.score < *s) {
                best = Some((c.score, c.units));
            }
        }
        start = end;
    }
    Ok(SearchOutcome::Exhausted { tuples: budget })
}

/// Upper bound on the order-`n` monotonicity radius of `g_n` on `[0, c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaUpper {
    /// Largest node of the best witness; `f64::INFINITY` if none was found.
    pub value: f64,
    pub bound: Option<Rational>,
    pub witness: Option<LoewnerWitness>,
    /// Every `c` probed, with whether a violation was found on `[0, c)`.
    pub probes: Vec<(Rational, bool)>,
}

pub const DEFAULT_ALPHA_SEED: u64 = 0;

pub fn alpha_loewner(n: usize, tol: f64, budget: u64) -> Result<AlphaUpper> {
    alpha_loewner_seeded(n, tol, budget, DEFAULT_ALPHA_SEED)
}

/// Doubling from `c = 1/2` until a violation appears on `[0, c)`, then
/// bisection down to width `tol`. The bound is the largest node of the best
/// exact witness.
pub fn alpha_loewner_seeded(n: usize, tol: f64, budget: u64, seed: u64) -> Result<AlphaUpper> {
    if n == 0 {
        return invalid("order must be at least 1");
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let none = AlphaUpper {
        value: f64::INFINITY,
        bound: None,
        witness: None,
        probes: Vec::new(),
    };
    if n == 1 {
        return Ok(none);
    }
    let f = FunctionExpr::gn(n)?;
    let mut probes = Vec::new();
    let mut best: Option<LoewnerWitness> = None;
    let mut search = |c: &Rational, probes: &mut Vec<(Rational, bool)>| -> Result<bool> {
        let dom = Interval::closed_open(Rational::zero(), c.clone())?;
        let found = match find_violation(&f, n, &dom, budget, seed)? {
            SearchOutcome::Witness { witness, .. } => {
                if best
                    .as_ref()
                    .is_none_or(|b| witness.max_node() < b.max_node())
                {
                    best = Some(witness);
                }
                true
            }
            SearchOutcome::Exhausted { .. } => false,
        };
        probes.push((c.clone(), found));
        Ok(found)
    };
    let mut lo = Rational::zero();
    let mut c = rat(1, 2);
    let mut hi = None;
    for _ in 0..40 {
        if search(&c, &mut probes)? {
            hi = Some(c);
            break;
        }
        lo = c.clone();
        c *= rat(2, 1);
    }
    let Some(mut hi) = hi else {
        return Ok(AlphaUpper { probes, ..none });
    };
    while to_f64(&(&hi - &lo)) > tol {
        let mid = (&lo + &hi) / rat(2, 1);
        if search(&mid, &mut probes)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let witness = best.expect("a violation was found");
    let bound = witness.max_node().clone();
    Ok(AlphaUpper {
        value: to_f64(&bound),
        bound: Some(bound),
        witness: Some(witness),
        probes,
    })
}
