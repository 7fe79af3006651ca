//! Refining periodic trapezoidal quadrature on the torus `[0, 1)`.
//!
//! Means are taken over uniform grids `t_j = j / M`. The grid at size `M`
//! contains the grid at size `M / 2`, so every level yields two estimates
//! for free and each doubling only evaluates the new odd points. Sums use a
//! fixed pairwise order, so results do not depend on the rayon pool size.

use std::ops::{Add, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Binary64,
    Extended,
}

impl Precision {
    /// Relative tolerance used for pass/fail on inequality margins.
    pub fn margin_tolerance(self) -> f64 {
        match self {
            Precision::Binary64 => 1e-9,
            Precision::Extended => 1e-20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub initial_grid: usize,
    pub max_grid: usize,
    pub rel_tol: f64,
    pub precision: Precision,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            initial_grid: 256,
            max_grid: 1 << 20,
            rel_tol: 1e-10,
            precision: Precision::Binary64,
        }
    }
}

impl QuadratureConfig {
    pub fn new(initial_grid: usize, max_grid: usize, rel_tol: f64) -> Result<Self> {
        let cfg = Self {
            initial_grid,
            max_grid,
            rel_tol,
            precision: Precision::Binary64,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_grid < 2 || !self.initial_grid.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "initial_grid {} must be a power of two >= 2",
                self.initial_grid
            )));
        }
        if self.max_grid < self.initial_grid {
            return Err(Error::InvalidArgument(format!(
                "max_grid {} below initial_grid {}",
                self.max_grid, self.initial_grid
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rel_tol {} must be positive",
                self.rel_tol
            )));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub grid_used: usize,
    pub est_rel_error: f64,
    pub converged: bool,
}

impl NormResult {
    /// Turns a non-converged result into [`Error::NoConvergence`].
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence(self))
        }
    }
}

/// One level of the refinement: grid size, value and successive-difference
/// estimate against the half-size grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefinementStep {
    pub grid: usize,
    pub value: f64,
    pub est_rel_error: f64,
}

/// Values the refinement can accumulate: `f64` and [`DoubleDouble`].
pub trait QuadValue: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> {
    fn zero() -> Self;
    fn div_count(self, n: usize) -> Self;
    fn to_f64(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn div_count(self, n: usize) -> Self {
        self / n as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl QuadValue for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::ZERO
    }
    fn div_count(self, n: usize) -> Self {
        self / DoubleDouble::from(n as f64)
    }
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
}

const PAIRWISE_BLOCK: usize = 16;
const PAR_THRESHOLD: usize = 2048;

fn pairwise_sum<T: QuadValue>(n: usize, get: &impl Fn(usize) -> T) -> T {
    fn rec<T: QuadValue>(lo: usize, hi: usize, get: &impl Fn(usize) -> T) -> T {
        if hi - lo <= PAIRWISE_BLOCK {
            (lo..hi).fold(T::zero(), |acc, i| acc + get(i))
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, get) + rec(mid, hi, get)
        }
    }
    rec(0, n, get)
}

/// Evaluates `eval` at `points` abscissae, row-major `points x count`.
fn sample<T: QuadValue + Default + Clone>(
    points: usize,
    count: usize,
    abscissa: impl Fn(usize) -> f64 + Sync,
    eval: &(impl Fn(f64, &mut [T]) + Sync),
) -> Vec<T> {
    let mut buf = vec![T::default(); points * count];
    if points >= PAR_THRESHOLD {
        buf.par_chunks_mut(count)
            .enumerate()
            .for_each(|(j, row)| eval(abscissa(j), row));
    } else {
        buf.chunks_mut(count)
            .enumerate()
            .for_each(|(j, row)| eval(abscissa(j), row));
    }
    buf
}

fn rel_change(new: f64, old: f64) -> f64 {
    let diff = (new - old).abs();
    if diff == 0.0 {
        0.0
    } else if new == 0.0 {
        diff
    } else {
        diff / new.abs()
    }
}

/// Output of [`refine`]: per-component final values and the shared history.
pub(crate) struct Refined<T> {
    pub values: Vec<T>,
    pub results: Vec<NormResult>,
    pub history: Vec<Vec<RefinementStep>>,
}

/// Refines the means of a vector-valued periodic integrand. `finish` maps a
/// component's mean to the reported quantity (identity, or a root for
/// `L^q` norms); the stopping rule is applied to the finished values.
pub(crate) fn refine<T, E, Fin>(count: usize, eval: &E, finish: &Fin, cfg: &QuadratureConfig) -> Refined<T>
where
    T: QuadValue + Default + Clone,
    E: Fn(f64, &mut [T]) + Sync,
    Fin: Fn(usize, T) -> T,
{
    let mut m = cfg.initial_grid;
    let first = sample(m, count, |j| j as f64 / m as f64, eval);
    let mut sums: Vec<T> = Vec::with_capacity(count);
    let mut prev: Vec<T> = Vec::with_capacity(count);
    for i in 0..count {
        let even = pairwise_sum(m / 2, &|j| first[2 * j * count + i]);
        let odd = pairwise_sum(m / 2, &|j| first[(2 * j + 1) * count + i]);
        prev.push(finish(i, even.div_count(m / 2)));
        sums.push(even + odd);
    }
    let mut history: Vec<Vec<RefinementStep>> = vec![Vec::new(); count];
    loop {
        let current: Vec<T> = (0..count).map(|i| finish(i, sums[i].div_count(m))).collect();
        let ests: Vec<f64> = (0..count)
            .map(|i| rel_change(current[i].to_f64(), prev[i].to_f64()))
            .collect();
        for i in 0..count {
            history[i].push(RefinementStep {
                grid: m,
                value: current[i].to_f64(),
                est_rel_error: ests[i],
            });
        }
        let converged = ests.iter().all(|e| *e <= cfg.rel_tol);
        if converged || 2 * m > cfg.max_grid {
            let results = (0..count)
                .map(|i| NormResult {
                    value: current[i].to_f64(),
                    grid_used: m,
                    est_rel_error: ests[i],
                    converged: ests[i] <= cfg.rel_tol,
                })
                .collect();
            return Refined {
                values: current,
                results,
                history,
            };
        }
        let new_m = 2 * m;
        let odd = sample(m, count, |j| (2 * j + 1) as f64 / new_m as f64, eval);
        for i in 0..count {
            sums[i] = sums[i] + pairwise_sum(m, &|j| odd[j * count + i]);
        }
        prev = current;
        m = new_m;
    }
}

/// `x^q` for `x >= 0` through `exp(q ln x)`, with `0^q = 0`.
pub fn pow_nonneg(x: f64, q: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (q * x.ln()).exp()
    }
}

/// Mean of a periodic function over `[0, 1)`.
pub fn periodic_mean<F>(f: F, cfg: &QuadratureConfig) -> NormResult
where
    F: Fn(f64) -> f64 + Sync,
{
    let eval = |t: f64, out: &mut [f64]| out[0] = f(t);
    refine(1, &eval, &|_, m| m, cfg).results[0]
}

/// `(∫ f(t)^q dt)^{1/q}` for a nonnegative periodic `f`; `q = ∞` gives the
/// (polished) grid maximum.
pub fn lq_norm_periodic<F>(f: F, q: f64, cfg: &QuadratureConfig) -> NormResult
where
    F: Fn(f64) -> f64 + Sync,
{
    if q.is_infinite() {
        return sup_norm_periodic(f, cfg);
    }
    let eval = |t: f64, out: &mut [f64]| out[0] = pow_nonneg(f(t), q);
    refine(1, &eval, &|_, m| pow_nonneg(m, 1.0 / q), cfg).results[0]
}

/// Per-level history of [`lq_norm_periodic`] (finite `q`).
pub fn lq_refinement_history<F>(f: F, q: f64, cfg: &QuadratureConfig) -> Vec<RefinementStep>
where
    F: Fn(f64) -> f64 + Sync,
{
    let eval = |t: f64, out: &mut [f64]| out[0] = pow_nonneg(f(t), q);
    refine(1, &eval, &|_, m| pow_nonneg(m, 1.0 / q), cfg).history.remove(0)
}

/// `L^q` norms of `count` functions sampled together by `f(t, out)`.
pub fn lq_norms_periodic<F>(count: usize, f: F, q: f64, cfg: &QuadratureConfig) -> Vec<NormResult>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    if count == 0 {
        return Vec::new();
    }
    if q.is_infinite() {
        return (0..count)
            .map(|i| {
                sup_norm_periodic(
                    |t| {
                        let mut out = vec![0.0; count];
                        f(t, &mut out);
                        out[i]
                    },
                    cfg,
                )
            })
            .collect();
    }
    let eval = |t: f64, out: &mut [f64]| {
        f(t, out);
        for v in out.iter_mut() {
            *v = pow_nonneg(*v, q);
        }
    };
    refine(count, &eval, &|_, m| pow_nonneg(m, 1.0 / q), cfg).results
}

/// Extended-precision `L^q` norm; returns the double-double value alongside
/// the usual metadata.
pub fn lq_norm_periodic_dd<F>(f: F, q: DoubleDouble, cfg: &QuadratureConfig) -> (DoubleDouble, NormResult)
where
    F: Fn(f64) -> DoubleDouble + Sync,
{
    let eval = |t: f64, out: &mut [DoubleDouble]| out[0] = f(t).powf(q);
    let inv_q = q.recip();
    let mut refined = refine(1, &eval, &|_, m: DoubleDouble| m.powf(inv_q), cfg);
    (refined.values.remove(0), refined.results[0])
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    f1.max(f2)
}

/// Grid maximum at `stride`-spaced points of `values`, polished by a
/// golden-section search over the neighbouring cells.
fn polished_max(f: &impl Fn(f64) -> f64, values: &[f64], m: usize, stride: usize) -> f64 {
    let (best_j, best) =
        values.iter().enumerate().step_by(stride).fold(
            (0, f64::NEG_INFINITY),
            |acc, (j, v)| if *v > acc.1 { (j, *v) } else { acc },
        );
    let h = stride as f64 / m as f64;
    let t = best_j as f64 / m as f64;
    best.max(golden_max(f, t - h, t + h))
}

fn sup_norm_periodic<F>(f: F, cfg: &QuadratureConfig) -> NormResult
where
    F: Fn(f64) -> f64 + Sync,
{
    let mut m = cfg.initial_grid;
    loop {
        let values: Vec<f64> = sample(m, 1, |j| j as f64 / m as f64, &|t, out: &mut [f64]| out[0] = f(t));
        let coarse = polished_max(&f, &values, m, 2);
        let fine = polished_max(&f, &values, m, 1);
        let value = fine.max(coarse);
        let est = rel_change(value, coarse);
        if est <= cfg.rel_tol || 2 * m > cfg.max_grid {
            return NormResult {
                value,
                grid_used: m,
                est_rel_error: est,
                converged: est <= cfg.rel_tol,
            };
        }
        m *= 2;
    }
}
