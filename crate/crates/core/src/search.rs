//! Multi-start coordinate hill-climbing on the nonlinear Hausdorff-Young
//! ratio.
//!
//! The search distribution and move set are heuristics; results are lower
//! bounds for the best constant, never certificates.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::{hy_ratio, theorem1_margin};
use crate::norms::ExponentPair;
use crate::quadrature::QuadratureConfig;
use crate::sampling::{random_sequence, Window};
use crate::sequence::CoefficientSequence;

/// Entries are clamped to this modulus before the ℓ¹ projection.
pub const MODULUS_CAP: f64 = 1.0 - 2e-12;

/// Steps below this size end a local search.
const MIN_STEP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub window: Window,
    pub l1_cap: f64,
    pub starts: usize,
    pub max_iters: usize,
    pub init_step: f64,
    pub shrink: f64,
    pub seed: u64,
    /// Final evaluations.
    pub quadrature: QuadratureConfig,
    /// Tolerance used while climbing; never tighter than `quadrature`.
    pub search_rel_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            window: Window { lo: 0, hi: 7 },
            l1_cap: 0.5,
            starts: 8,
            max_iters: 50,
            init_step: 0.05,
            shrink: 0.5,
            seed: 0,
            quadrature: QuadratureConfig::default(),
            search_rel_tol: 1e-7,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.window.is_empty() {
            return bad(format!("empty window [{}, {}]", self.window.lo, self.window.hi));
        }
        if !(self.l1_cap > 0.0 && self.l1_cap < 1.0) {
            return bad(format!("l1_cap {} not in (0, 1)", self.l1_cap));
        }
        if self.starts == 0 {
            return bad("starts must be at least 1".into());
        }
        if !(self.init_step > 0.0 && self.init_step.is_finite()) {
            return bad(format!("init_step {} must be positive", self.init_step));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad(format!("shrink {} not in (0, 1)", self.shrink));
        }
        if !(self.search_rel_tol > 0.0) {
            return bad(format!("search_rel_tol {} must be positive", self.search_rel_tol));
        }
        self.quadrature.validate()
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    fn coarse(&self) -> QuadratureConfig {
        self.quadrature
            .with_rel_tol(self.search_rel_tol.max(self.quadrature.rel_tol))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub best_f: CoefficientSequence,
    /// `hy_ratio(best_f)` at the configured (final) tolerance.
    pub best_ratio: f64,
    pub exponents: ExponentPair,
    /// Completed sweeps.
    pub iters_used: usize,
    pub start_index: usize,
    /// `(sweep, ratio)` at the search tolerance, starting with sweep 0.
    pub trace: Option<Vec<(usize, f64)>>,
    pub seed: u64,
    pub config_digest: String,
}

/// Radial clamp to [`MODULUS_CAP`], then uniform scaling down to `l1_cap`.
pub fn project(values: &mut [Complex64], l1_cap: f64) {
    for v in values.iter_mut() {
        let r = v.norm();
        if r > MODULUS_CAP {
            *v *= MODULUS_CAP / r;
        }
    }
    let l1: f64 = values.iter().map(|v| v.norm()).sum();
    if l1 > l1_cap {
        // a few ulps inside, so rounding cannot land above the cap
        let s = l1_cap / l1 * (1.0 - 4.0 * f64::EPSILON);
        for v in values.iter_mut() {
            *v *= s;
        }
    }
}

fn ratio_of(seq: &CoefficientSequence, e: &ExponentPair, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(hy_ratio(seq, e, cfg)?.ratio)
}

const DIRECTIONS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(0.0, -1.0),
];

/// Coordinate hill-climb from `f0` with first-improvement acceptance.
///
/// Each sweep tries `±step`, `±i·step` and zeroing on every entry,
/// projecting back into the admissible set; the step shrinks after a sweep without
/// improvement. The returned ratio is re-evaluated at the final tolerance
/// and is never below that of `f0`.
pub fn local_search(f0: &CoefficientSequence, e: &ExponentPair, cfg: &SearchConfig) -> Result<SearchResult> {
    local_search_from(f0, e, cfg, 0)
}

fn local_search_from(
    f0: &CoefficientSequence,
    e: &ExponentPair,
    cfg: &SearchConfig,
    start_index: usize,
) -> Result<SearchResult> {
    if f0.is_zero() {
        return Err(Error::ZeroSequence);
    }
    cfg.validate()?;
    let coarse = cfg.coarse();
    let offset = f0.offset();
    let mut values = f0.values().to_vec();
    let mut best = ratio_of(f0, e, &coarse)?;
    let mut trace = vec![(0, best)];
    let mut step = cfg.init_step;
    let mut iters = 0;
    while iters < cfg.max_iters && step >= MIN_STEP {
        let mut improved = false;
        for k in 0..values.len() {
            for dir in DIRECTIONS.iter().map(Some).chain([None]) {
                let mut cand = values.clone();
                match dir {
                    Some(d) => cand[k] += d * step,
                    None if cand[k].norm() > 0.0 => cand[k] = Complex64::new(0.0, 0.0),
                    None => continue,
                }
                project(&mut cand, cfg.l1_cap);
                let seq = CoefficientSequence::new(offset, cand)?;
                if seq.is_zero() {
                    continue;
                }
                let r = ratio_of(&seq, e, &coarse)?;
                if r > best {
                    best = r;
                    values = seq.values().to_vec();
                    improved = true;
                    break;
                }
            }
        }
        iters += 1;
        trace.push((iters, best));
        if !improved {
            step *= cfg.shrink;
        }
    }
    let found = CoefficientSequence::new(offset, values)?;
    let found_ratio = ratio_of(&found, e, &cfg.quadrature)?;
    let start_ratio = ratio_of(f0, e, &cfg.quadrature)?;
    let (best_f, best_ratio) = if found_ratio >= start_ratio {
        (found, found_ratio)
    } else {
        (f0.clone(), start_ratio)
    };
    Ok(SearchResult {
        best_f,
        best_ratio,
        exponents: *e,
        iters_used: iters,
        start_index,
        trace: Some(trace),
        seed: cfg.seed,
        config_digest: cfg.digest(),
    })
}

/// The initial draw of a start: ChaCha8 seeded with `seed`, stream
/// `start_index`.
pub fn initial_draw(cfg: &SearchConfig, start_index: usize) -> CoefficientSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(start_index as u64);
    random_sequence(&mut rng, cfg.window, cfg.l1_cap)
}

/// Best of `cfg.starts` local searches. Ties go to the smaller start index,
/// so the result does not depend on scheduling.
///
/// With `l1_cap <= 1/2` every start's result is checked against the bound
/// `1 + 3‖F‖_1`; a violation beyond tolerance is returned as
/// [`Error::Counterexample`].
pub fn multi_start(e: &ExponentPair, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let results: Vec<Result<SearchResult>> = (0..cfg.starts)
        .into_par_iter()
        .map(|i| local_search_from(&initial_draw(cfg, i), e, cfg, i))
        .collect();
    let mut best: Option<SearchResult> = None;
    for r in results {
        let r = r?;
        if cfg.l1_cap <= 0.5 {
            let report = theorem1_margin(&r.best_f, e, &cfg.quadrature)?;
            if report.is_violation() {
                return Err(Error::Counterexample {
                    check: report.bound_label,
                    p: e.p(),
                    rel_margin: report.rel_margin,
                    sequence: Box::new(r.best_f),
                });
            }
        }
        if best.as_ref().is_none_or(|b| r.best_ratio > b.best_ratio) {
            best = Some(r);
        }
    }
    Ok(best.expect("starts >= 1"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub q: f64,
    pub best_ratio: f64,
    /// Ratio of a single spike in the window, the trivial equality case.
    pub spike_ratio: f64,
    /// SHA-256 of the JSON form of `best_f`.
    pub digest: String,
    pub start_index: usize,
    pub best_f: CoefficientSequence,
}

/// One [`multi_start`] per `p`, in the given order.
pub fn p_sweep(p_values: &[f64], cfg: &SearchConfig) -> Result<Vec<SweepRow>> {
    let spike = CoefficientSequence::spike(cfg.window.lo, Complex64::new(0.5 * cfg.l1_cap, 0.0))?;
    p_values
        .iter()
        .map(|&p| {
            let e = ExponentPair::new(p)?;
            let best = multi_start(&e, cfg)?;
            Ok(SweepRow {
                p,
                q: e.q(),
                best_ratio: best.best_ratio,
                spike_ratio: ratio_of(&spike, &e, &cfg.quadrature)?,
                digest: sha256_hex(best.best_f.to_json().as_bytes()),
                start_index: best.start_index,
                best_f: best.best_f,
            })
        })
        .collect()
}
