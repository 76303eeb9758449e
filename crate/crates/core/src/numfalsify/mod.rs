//! Floating point falsifier for matrix monotonicity: sample real symmetric
//! `x <= y` with spectra in an interval and look for `f(x) <= f(y)` failing.
//!
//! Real symmetric matrices are used throughout; complex Hermitian pairs are
//! not sampled.
//!
//! Randomness comes from xoshiro256++. Trial `i` under seed `s` draws from its
//! own stream seeded with `s + i * 0x9E3779B97F4A7C15` (wrapping), so results
//! do not depend on how trials are spread over threads.

pub mod eig;

pub use eig::{min_eigenvalue, sym_eig, Orthogonal, SymEig, SymMatrixF, DEFAULT_EIG_TOL};

use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::error::{domain, invalid, Error, Result};
use crate::exactpoly::rational::to_f64;
use crate::loewner::LoewnerWitness;
use crate::psdcert::PsdWitness;
use crate::transport::{FunctionExpr, Interval};

pub const GENERATOR: &str = "xoshiro256++";
const SPLIT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Random stream for work item `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed.wrapping_add(index.wrapping_mul(SPLIT)))
}

/// Order tolerance: `y - x` may have eigenvalues down to `-TOL_ORDER`.
pub const TOL_ORDER: f64 = 1e-12;
/// Relative violation threshold on the smallest eigenvalue of `f(y) - f(x)`.
pub const TOL_VIOLATION: f64 = 1e-8;
/// Slack for spectra against the interval endpoints.
pub const TOL_SPEC: f64 = 1e-12;
/// Width of the sampling window on the unbounded side of an interval.
pub const UNBOUNDED_WINDOW: f64 = 10.0;
const MAX_REJECTIONS: usize = 1000;

/// `Q diag(f(lambda)) Q^T`. Non-finite values of `f` are domain errors.
pub fn matrix_apply(f: &FunctionExpr, x: &SymMatrixF) -> Result<SymMatrixF> {
    apply_with(f, &sym_eig(x, DEFAULT_EIG_TOL)?)
}

/// [`matrix_apply`] after checking the spectrum against `dom` (with slack `tol`).
pub fn matrix_apply_on(
    f: &FunctionExpr,
    x: &SymMatrixF,
    dom: &Interval,
    tol: f64,
) -> Result<SymMatrixF> {
    let e = sym_eig(x, DEFAULT_EIG_TOL)?;
    if let Some(l) = e.values.iter().find(|l| !dom.contains_f64(**l, tol)) {
        return domain(format!("eigenvalue {l} lies outside {dom}"));
    }
    apply_with(f, &e)
}

fn apply_with(f: &FunctionExpr, e: &SymEig) -> Result<SymMatrixF> {
    let fv: Vec<f64> = e.values.iter().map(|l| f.eval_f64(*l)).collect();
    if let Some((l, _)) = e.values.iter().zip(&fv).find(|(_, v)| !v.is_finite()) {
        return domain(format!("{f} is not finite at eigenvalue {l}"));
    }
    Ok(SymMatrixF::from_spectral(&e.vectors, &fv))
}

/// Finite window `[a, b]` used for sampling inside `I`.
fn window(i: &Interval) -> (f64, f64) {
    match (i.lo(), i.hi()) {
        (Some(lo), Some(hi)) => (to_f64(lo), to_f64(hi)),
        (Some(lo), None) => (to_f64(lo), to_f64(lo) + UNBOUNDED_WINDOW),
        (None, Some(hi)) => (to_f64(hi) - UNBOUNDED_WINDOW, to_f64(hi)),
        (None, None) => unreachable!("intervals have at least one endpoint"),
    }
}

fn gaussian_vec<R: rand::Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn normalize(v: &mut [f64]) -> bool {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-8 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

/// Orthonormal matrix from Gram–Schmidt on Gaussian columns.
fn haar_like<R: rand::Rng>(rng: &mut R, n: usize) -> Orthogonal {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = gaussian_vec(rng, n);
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
        }
        if normalize(&mut v) {
            cols.push(v);
        }
    }
    Orthogonal::from_columns(&cols)
}

/// Rank in `1..=dim` with probability proportional to `2^-r`.
fn perturbation_rank<R: rand::Rng>(rng: &mut R, dim: usize) -> usize {
    let total: f64 = (1..=dim).map(|r| (-(r as f64)).exp2()).sum();
    let mut u = rng.random::<f64>() * total;
    for r in 1..=dim {
        u -= (-(r as f64)).exp2();
        if u <= 0.0 {
            return r;
        }
    }
    dim
}

/// Samples `x <= y` with both spectra in `I`: `x = Q diag(lambda) Q^T`
/// with `lambda` uniform in the middle 90% of the window, and
/// `y = x + sum s_i v_i v_i^T` with `s_i > 0`.
pub fn sample_ordered_pair<R: rand::Rng>(
    i: &Interval,
    dim: usize,
    rng: &mut R,
) -> Result<(SymMatrixF, SymMatrixF)> {
    if dim == 0 {
        return invalid("dimension must be at least 1");
    }
    let (a, b) = window(i);
    let w = b - a;
    let (ca, cb) = (a + 0.05 * w, b - 0.05 * w);
    for _ in 0..MAX_REJECTIONS {
        let q = haar_like(rng, dim);
        let lambda: Vec<f64> = (0..dim)
            .map(|_| ca + (cb - ca) * rng.random::<f64>())
            .collect();
        let x = SymMatrixF::from_spectral(&q, &lambda);
        let mut y = x.clone();
        for _ in 0..perturbation_rank(rng, dim) {
            let mut v = gaussian_vec(rng, dim);
            if !normalize(&mut v) {
                continue;
            }
            // log-uniform step between 5e-4 w and 0.5 w
            let s = w * (5e-4f64.ln() + rng.random::<f64>() * (0.5f64.ln() - 5e-4f64.ln())).exp();
            y = y.add_rank_one(s, &v);
        }
        let inside = |m: &SymMatrixF| -> Result<bool> {
            Ok(sym_eig(m, DEFAULT_EIG_TOL)?
                .values
                .iter()
                .all(|l| i.contains_f64(*l, TOL_SPEC)))
        };
        if inside(&x)? && inside(&y)? {
            return Ok((x, y));
        }
    }
    Err(Error::SamplingExhausted(format!(
        "no ordered pair of dimension {dim} fits in {i} after {MAX_REJECTIONS} draws"
    )))
}

/// Concrete pair `x <= y` with `f(x) <= f(y)` failing.
#[derive(Clone, Debug, PartialEq)]
pub struct PairWitness {
    pub x: SymMatrixF,
    pub y: SymMatrixF,
    pub function: FunctionExpr,
    pub interval: Interval,
    /// Smallest eigenvalue of `y - x`.
    pub min_eig_order: f64,
    /// Smallest eigenvalue of `f(y) - f(x)`.
    pub min_eig_gap: f64,
    pub spectra_x: Vec<f64>,
    pub spectra_y: Vec<f64>,
    /// Spectral norm of `f(y)`.
    pub norm_fy: f64,
    /// Seed and trial of the falsifier run, absent for constructed witnesses.
    pub seed: Option<u64>,
    pub trial_index: Option<u64>,
}

/// Recomputed statistics of a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCheck {
    pub min_eig_order: f64,
    pub min_eig_gap: f64,
    pub norm_fy: f64,
    pub spectra_x: Vec<f64>,
    pub spectra_y: Vec<f64>,
    pub spectra_inside: bool,
}

impl PairCheck {
    /// True when `x <= y` holds within `TOL_ORDER`, the spectra lie in the
    /// interval and `f(y) - f(x)` has an eigenvalue below `-TOL_VIOLATION (1 + ||f(y)||)`.
    pub fn is_violation(&self) -> bool {
        self.spectra_inside
            && self.min_eig_order >= -TOL_ORDER
            && self.min_eig_gap < -TOL_VIOLATION * (1.0 + self.norm_fy)
    }
}

/// Evaluates a pair from the matrices alone with eigensolver tolerance `eig_tol`.
pub fn check_pair(
    f: &FunctionExpr,
    i: &Interval,
    x: &SymMatrixF,
    y: &SymMatrixF,
    eig_tol: f64,
) -> Result<PairCheck> {
    if x.order() != y.order() {
        return invalid("x and y must have the same order");
    }
    let ex = sym_eig(x, eig_tol)?;
    let ey = sym_eig(y, eig_tol)?;
    let fx = apply_with(f, &ex)?;
    let fy = apply_with(f, &ey)?;
    let spectra_inside = ex
        .values
        .iter()
        .chain(&ey.values)
        .all(|l| i.contains_f64(*l, TOL_SPEC));
    let norm_fy = ey
        .values
        .iter()
        .map(|l| f.eval_f64(*l).abs())
        .fold(0.0, f64::max);
    Ok(PairCheck {
        min_eig_order: sym_eig(&y.sub(x), eig_tol)?.min(),
        min_eig_gap: sym_eig(&fy.sub(&fx), eig_tol)?.min(),
        norm_fy,
        spectra_x: ex.values,
        spectra_y: ey.values,
        spectra_inside,
    })
}

impl PairWitness {
    pub fn from_pair(
        f: &FunctionExpr,
        i: &Interval,
        x: SymMatrixF,
        y: SymMatrixF,
        seed: Option<u64>,
        trial_index: Option<u64>,
    ) -> Result<PairWitness> {
        let c = check_pair(f, i, &x, &y, DEFAULT_EIG_TOL)?;
        Ok(PairWitness {
            x,
            y,
            function: f.clone(),
            interval: i.clone(),
            min_eig_order: c.min_eig_order,
            min_eig_gap: c.min_eig_gap,
            spectra_x: c.spectra_x,
            spectra_y: c.spectra_y,
            norm_fy: c.norm_fy,
            seed,
            trial_index,
        })
    }

    /// Recomputes everything from the stored matrices.
    pub fn validate(&self) -> Result<PairCheck> {
        check_pair(
            &self.function,
            &self.interval,
            &self.x,
            &self.y,
            DEFAULT_EIG_TOL,
        )
    }

    /// Recheck with the eigensolver tolerance ten times tighter.
    pub fn validate_tight(&self) -> Result<bool> {
        Ok(check_pair(
            &self.function,
            &self.interval,
            &self.x,
            &self.y,
            DEFAULT_EIG_TOL / 10.0,
        )?
        .is_violation())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FalsifyOutcome {
    Witness(Box<PairWitness>),
    /// Inconclusive: no violation among `trials` samples.
    Exhausted {
        trials: u64,
    },
}

const CHUNK: u64 = 256;

fn trial(
    f: &FunctionExpr,
    dim: usize,
    i: &Interval,
    seed: u64,
    index: u64,
) -> Result<Option<PairWitness>> {
    let mut rng = stream(seed, index);
    let (x, y) = sample_ordered_pair(i, dim, &mut rng)?;
    let c = match check_pair(f, i, &x, &y, DEFAULT_EIG_TOL) {
        Ok(c) => c,
        Err(Error::Domain(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !c.is_violation() {
        return Ok(None);
    }
    let w = PairWitness::from_pair(f, i, x, y, Some(seed), Some(index))?;
    Ok(w.validate_tight()?.then_some(w))
}

/// Runs `trials` seeded trials and returns the lowest-index violation.
pub fn falsify(
    f: &FunctionExpr,
    dim: usize,
    i: &Interval,
    trials: u64,
    seed: u64,
) -> Result<FalsifyOutcome> {
    if dim == 0 {
        return invalid("dimension must be at least 1");
    }
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    let mut start = 0;
    while start < trials {
        let end = (start + CHUNK).min(trials);
        let hit = (start..end)
            .into_par_iter()
            .map(|k| trial(f, dim, i, seed, k))
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            });
        match hit {
            Some(Ok(Some(w))) => return Ok(FalsifyOutcome::Witness(Box::new(w))),
            Some(Err(e)) => return Err(e),
            _ => {}
        }
        start = end;
    }
    Ok(FalsifyOutcome::Exhausted { trials })
}

/// `x = diag(nodes)`, `y = x + eps u u^T` with `u` the negative Loewner
/// direction. To first order `f(y) - f(x) = eps diag(u) L diag(u)`, whose
/// quadratic form at the all-ones vector is `eps u^T L u < 0`. The largest
/// `eps = 2^-k` that passes validation is kept.
pub fn witness_from_loewner(w: &LoewnerWitness, domain_interval: &Interval) -> Result<PairWitness> {
    let Some(PsdWitness::Vector { v, .. }) = &w.direction else {
        return Err(Error::ConversionFailed(
            "the Loewner witness carries no negative direction".into(),
        ));
    };
    let mut u: Vec<f64> = v.iter().map(to_f64).collect();
    if !normalize(&mut u) {
        return Err(Error::ConversionFailed(
            "negative direction is numerically zero".into(),
        ));
    }
    let x = SymMatrixF::diag(&w.nodes.iter().map(to_f64).collect::<Vec<_>>());
    for k in 0..60 {
        let eps = (-(k as f64)).exp2();
        let y = x.add_rank_one(eps, &u);
        let c = match check_pair(&w.function, domain_interval, &x, &y, DEFAULT_EIG_TOL) {
            Ok(c) => c,
            Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        };
        if c.is_violation() {
            let p = PairWitness::from_pair(&w.function, domain_interval, x, y, None, None)?;
            if p.validate_tight()? {
                return Ok(p);
            }
            return Err(Error::ConversionFailed(
                "pair failed the tighter revalidation".into(),
            ));
        }
    }
    Err(Error::ConversionFailed(
        "no step 2^-k, k < 60, gives a numerically visible violation".into(),
    ))
}
