//! Both sides of each Hausdorff-Young type inequality, with signed margins.
//!
//! Every check is normalized as `lhs <= bound * rhs`. The absolute margin is
//! `bound * rhs - lhs`, the relative margin divides it by `rhs`, and a check
//! passes when the relative margin is at least `-tol` (`1e-9` in binary64,
//! `1e-20` in extended precision).

mod ledger;
mod probe;

pub use ledger::{proof_ledger, EntryStatus, LedgerEntry};
pub use probe::{quadratic_error_probe, ProbeResult, PROBE_GRID};

use num_complex::Complex64;
use serde::Serialize;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::extended::weight_norms_dd;
use crate::norms::{lp_sequence_norm, nl_weight_sequence, torus_weight_norm, ExponentPair};
use crate::quadrature::{lq_norm_periodic, NormResult, Precision, QuadratureConfig};
use crate::sequence::CoefficientSequence;
use crate::transform::phase;

/// Parameters `(c, γ, η)` of the near-extremizer estimate for the linear
/// inequality. No explicit values are known; `(1, 1, 1)` is the documented
/// example configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CcParameters {
    pub c: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl CcParameters {
    pub fn new(c: f64, gamma: f64, eta: f64) -> Result<Self> {
        if !(c > 0.0 && gamma > 0.0 && eta > 0.0 && eta <= 1.0) || !c.is_finite() || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cc parameters (c, gamma, eta) = ({c}, {gamma}, {eta}) need c, gamma > 0 and 0 < eta <= 1"
            )));
        }
        Ok(Self { c, gamma, eta })
    }

    pub fn example() -> Self {
        Self {
            c: 1.0,
            gamma: 1.0,
            eta: 1.0,
        }
    }
}

/// `α = max{1, γ}` and `δ = min{1/6, cη^γ/3, (3 + (3/c)^{1/γ})^{-α}}`.
pub fn alpha_delta(cc: &CcParameters) -> (f64, f64) {
    let alpha = cc.gamma.max(1.0);
    let third = cc.c * cc.eta.powf(cc.gamma) / 3.0;
    let algebraic = (3.0 + (3.0 / cc.c).powf(1.0 / cc.gamma)).powf(-alpha);
    (alpha, (1.0 / 6.0f64).min(third).min(algebraic))
}

/// Outcome of testing `‖F‖_1 <= δ (1 - ‖F‖_∞ / ‖F‖_p)^α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub l1: f64,
    pub rhs: f64,
    /// `rhs - l1`.
    pub margin: f64,
    /// `1 - ‖F‖_∞ / ‖F‖_p`.
    pub spread: f64,
    pub alpha: f64,
    pub delta: f64,
}

pub fn condition_check(seq: &CoefficientSequence, e: &ExponentPair, cc: &CcParameters) -> Result<ConditionCheck> {
    if seq.is_zero() {
        return Err(Error::ZeroSequence);
    }
    let (alpha, delta) = alpha_delta(cc);
    let l1 = seq.l1_norm();
    let spread = (1.0 - seq.linf_norm() / seq.lp_norm(e.p())).max(0.0);
    let rhs = delta * spread.powf(alpha);
    Ok(ConditionCheck {
        holds: l1 <= rhs,
        l1,
        rhs,
        margin: rhs - l1,
        spread,
        alpha,
        delta,
    })
}

/// A bound checked alongside the main one (the uniform `5/2` corollary, or
/// the refined factor `1 - 9‖F‖_1^2`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecondaryMargin {
    pub label: String,
    pub bound: f64,
    pub margin: f64,
    pub rel_margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyReport {
    pub exponents: ExponentPair,
    pub lhs: NormResult,
    pub rhs: f64,
    pub ratio: f64,
    pub bound: f64,
    pub bound_label: String,
    /// `bound * rhs - lhs`.
    pub margin: f64,
    /// `margin / rhs`.
    pub rel_margin: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// False for open conjectures, where a violation is evidence rather than
    /// a failure.
    pub asserted: bool,
    pub precision: Precision,
    pub secondary: Option<SecondaryMargin>,
    pub cc: Option<CcParameters>,
}

impl HyReport {
    /// Whether a proven inequality failed beyond tolerance.
    pub fn is_violation(&self) -> bool {
        (self.asserted && !self.holds) || self.secondary.as_ref().is_some_and(|s| !s.holds)
    }
}

/// Both sides of the nonlinear inequality, in the precision requested by
/// `cfg`.
struct Sides {
    lhs: DoubleDouble,
    meta: NormResult,
    rhs: DoubleDouble,
    precision: Precision,
}

fn nonlinear_sides(seq: &CoefficientSequence, e: &ExponentPair, cfg: &QuadratureConfig) -> Sides {
    if cfg.precision == Precision::Extended && e.q().is_finite() {
        let (lhs, meta, rhs) = weight_norms_dd(seq, e, cfg);
        return Sides {
            lhs,
            meta,
            rhs,
            precision: Precision::Extended,
        };
    }
    let meta = torus_weight_norm(seq, e.q(), cfg);
    let rhs = lp_sequence_norm(&nl_weight_sequence(seq), e.p());
    Sides {
        lhs: meta.value.into(),
        meta,
        rhs: rhs.into(),
        precision: Precision::Binary64,
    }
}

fn margin_of(bound: DoubleDouble, sides: &Sides) -> (f64, f64) {
    let margin = bound * sides.rhs - sides.lhs;
    let rel = if sides.rhs.is_zero() {
        margin.to_f64()
    } else {
        (margin / sides.rhs).to_f64()
    };
    (margin.to_f64(), rel)
}

fn report(
    e: &ExponentPair,
    sides: &Sides,
    bound: DoubleDouble,
    label: &str,
    asserted: bool,
    cc: Option<CcParameters>,
) -> HyReport {
    let (margin, rel_margin) = margin_of(bound, sides);
    let tolerance = sides.precision.margin_tolerance();
    let rhs = sides.rhs.to_f64();
    HyReport {
        exponents: *e,
        lhs: sides.meta,
        rhs,
        ratio: (sides.lhs / sides.rhs).to_f64(),
        bound: bound.to_f64(),
        bound_label: label.to_string(),
        margin,
        rel_margin,
        tolerance,
        holds: rel_margin >= -tolerance,
        asserted,
        precision: sides.precision,
        secondary: None,
        cc,
    }
}

fn secondary(label: &str, bound: DoubleDouble, sides: &Sides) -> SecondaryMargin {
    let (margin, rel_margin) = margin_of(bound, sides);
    SecondaryMargin {
        label: label.to_string(),
        bound: bound.to_f64(),
        margin,
        rel_margin,
        holds: rel_margin >= -sides.precision.margin_tolerance(),
    }
}

fn l1_dd(seq: &CoefficientSequence) -> DoubleDouble {
    seq.values().iter().fold(DoubleDouble::ZERO, |acc, f| {
        let r2 = DoubleDouble::from_product(f.re, f.re) + DoubleDouble::from_product(f.im, f.im);
        acc + r2.sqrt()
    })
}

/// `‖(log|a|^2)^{1/2}‖_{L^q} / ‖(log A_n^2)^{1/2}‖_{ℓ^p}`.
///
/// The report's bound is the conjectured sharp constant 1; it is recorded
/// but not asserted.
pub fn hy_ratio(seq: &CoefficientSequence, e: &ExponentPair, cfg: &QuadratureConfig) -> Result<HyReport> {
    if seq.is_zero() {
        return Err(Error::ZeroSequence);
    }
    let sides = nonlinear_sides(seq, e, cfg);
    Ok(report(
        e,
        &sides,
        DoubleDouble::ONE,
        "nonlinear_hy_constant_1",
        false,
        None,
    ))
}

/// `‖Ĝ‖_{L^q} <= ‖G‖_{ℓ^p}` for an arbitrary finitely supported `G` with
/// `G[offset + k] = values[k]`. Binary64 only.
pub fn linear_hy_margin(
    offset: i64,
    values: &[Complex64],
    e: &ExponentPair,
    cfg: &QuadratureConfig,
) -> Result<HyReport> {
    if values.iter().all(|g| g.norm() == 0.0) {
        return Err(Error::ZeroSequence);
    }
    let transform = |t: f64| -> f64 {
        values
            .iter()
            .enumerate()
            .map(|(k, g)| g * phase(offset + k as i64, t))
            .sum::<Complex64>()
            .norm()
    };
    let meta = lq_norm_periodic(transform, e.q(), cfg);
    let moduli: Vec<f64> = values.iter().map(|g| g.norm()).collect();
    let sides = Sides {
        lhs: meta.value.into(),
        meta,
        rhs: lp_sequence_norm(&moduli, e.p()).into(),
        precision: Precision::Binary64,
    };
    Ok(report(e, &sides, DoubleDouble::ONE, "linear_hy", true, None))
}

/// Nonlinear inequality with constant `1 + 3‖F‖_1` under `‖F‖_1 <= 1/2`,
/// plus the uniform constant `5/2` as the secondary margin.
pub fn theorem1_margin(seq: &CoefficientSequence, e: &ExponentPair, cfg: &QuadratureConfig) -> Result<HyReport> {
    if seq.is_zero() {
        return Err(Error::ZeroSequence);
    }
    let l1 = seq.l1_norm();
    if l1 > 0.5 {
        return Err(Error::PreconditionFailed(format!("‖F‖_1 = {l1} exceeds 1/2")));
    }
    let sides = nonlinear_sides(seq, e, cfg);
    let bound = DoubleDouble::ONE + l1_dd(seq).mul_f64(3.0);
    let mut r = report(e, &sides, bound, "theorem1_1+3l1", true, None);
    r.secondary = Some(secondary("uniform_5/2", DoubleDouble::from(2.5), &sides));
    Ok(r)
}

/// Sharp constant 1 under the spread condition, plus the refined bound
/// `1 - 9‖F‖_1^2` as the secondary margin.
pub fn theorem2_margin(
    seq: &CoefficientSequence,
    e: &ExponentPair,
    cc: &CcParameters,
    cfg: &QuadratureConfig,
) -> Result<HyReport> {
    let cond = condition_check(seq, e, cc)?;
    if !cond.holds {
        return Err(Error::PreconditionFailed(format!(
            "spread condition fails: ‖F‖_1 = {} > {}",
            cond.l1, cond.rhs
        )));
    }
    let sides = nonlinear_sides(seq, e, cfg);
    let mut r = report(e, &sides, DoubleDouble::ONE, "theorem2_sharp_1", true, Some(*cc));
    let refined = DoubleDouble::ONE - l1_dd(seq).sqr().mul_f64(9.0);
    r.secondary = Some(secondary("refined_1-9l1^2", refined, &sides));
    Ok(r)
}
