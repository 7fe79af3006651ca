//! Seeded generators for coefficient sequences.
//!
//! Every generator consumes a caller-owned RNG, so a fixed seed and call
//! order reproduce the same draws.

use num_complex::Complex64;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{alpha_delta, CcParameters};
use crate::sequence::CoefficientSequence;
use crate::transform::cis_turns;

/// Inclusive index interval `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty window [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `len` indices starting at 0.
    pub fn of_len(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidArgument("window length must be positive".into()));
        }
        Self::new(0, len as i64 - 1)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    cis_turns(rng.random::<f64>())
}

/// Independent uniform magnitudes and phases on `window`, rescaled so that
/// `‖F‖_1 = u · l1_cap` with `u` uniform in `(0, 1]`.
///
/// # Panics
///
/// If `l1_cap` is not in `(0, 1)`.
pub fn random_sequence<R: Rng + ?Sized>(rng: &mut R, window: Window, l1_cap: f64) -> CoefficientSequence {
    assert!(l1_cap > 0.0 && l1_cap < 1.0, "l1_cap {l1_cap} not in (0, 1)");
    let raw: Vec<(f64, Complex64)> = (0..window.len())
        .map(|_| (rng.random::<f64>(), random_phase(rng)))
        .collect();
    let target = (1.0 - rng.random::<f64>()) * l1_cap;
    let total: f64 = raw.iter().map(|(m, _)| m).sum();
    let values = if total > 0.0 {
        raw.iter().map(|(m, z)| z * (m / total * target)).collect()
    } else {
        let mut v = vec![Complex64::new(0.0, 0.0); window.len()];
        v[0] = Complex64::new(target, 0.0);
        v
    };
    CoefficientSequence::new(window.lo, values).expect("entries bounded by l1_cap < 1")
}

/// Window of random length in `1..=max_len` at a random offset in `-4..=4`,
/// entries with modulus uniform in `[0, linf_cap)` and uniform phase.
pub fn bounded_sequence<R: Rng + ?Sized>(rng: &mut R, max_len: usize, linf_cap: f64) -> Result<CoefficientSequence> {
    if max_len == 0 || !(linf_cap > 0.0 && linf_cap < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bounded_sequence needs max_len >= 1 and linf_cap in (0, 1), got {max_len}, {linf_cap}"
        )));
    }
    let len = rng.random_range(1..=max_len);
    let offset = rng.random_range(-4..=4i64);
    let values = (0..len)
        .map(|_| {
            let r = linf_cap * rng.random::<f64>();
            random_phase(rng) * r
        })
        .collect();
    CoefficientSequence::new(offset, values)
}

/// [`random_sequence`] on a window of random length in `1..=max_len` at a
/// random offset in `-4..=4`.
pub fn small_l1_sequence<R: Rng + ?Sized>(rng: &mut R, max_len: usize, l1_cap: f64) -> Result<CoefficientSequence> {
    if max_len == 0 || !(l1_cap > 0.0 && l1_cap < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "small_l1_sequence needs max_len >= 1 and l1_cap in (0, 1), got {max_len}, {l1_cap}"
        )));
    }
    let len = rng.random_range(1..=max_len);
    let lo = rng.random_range(-4..=4i64);
    let window = Window::new(lo, lo + len as i64 - 1)?;
    Ok(random_sequence(rng, window, l1_cap))
}

/// Many equal-magnitude entries with random phases, sized to sit inside the
/// spread condition `‖F‖_1 <= δ (1 - ‖F‖_∞ / ‖F‖_p)^α`.
///
/// With `K` entries of modulus `r` the right-hand side is
/// `δ (1 - K^{-1/p})^α`; `‖F‖_1 = K r` is set to a uniform fraction of it
/// drawn from `fraction`.
pub fn spread_sequence<R: Rng + ?Sized>(
    rng: &mut R,
    p: f64,
    cc: &CcParameters,
    entries: std::ops::RangeInclusive<usize>,
    fraction: std::ops::Range<f64>,
) -> Result<CoefficientSequence> {
    if *entries.start() < 2
        || entries.is_empty()
        || !(fraction.start > 0.0 && fraction.end <= 1.0 && !fraction.is_empty())
    {
        return Err(Error::InvalidArgument(
            "spread_sequence needs at least 2 entries and a fraction range inside (0, 1]".into(),
        ));
    }
    let k = rng.random_range(entries);
    let offset = rng.random_range(-4..=4i64);
    let (alpha, delta) = alpha_delta(cc);
    let rhs = delta * (1.0 - (k as f64).powf(-1.0 / p)).powf(alpha);
    let r = rng.random_range(fraction) * rhs / k as f64;
    let values = (0..k).map(|_| random_phase(rng) * r).collect();
    CoefficientSequence::new(offset, values)
}
