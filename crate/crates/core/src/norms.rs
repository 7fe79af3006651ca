//! Nonlinear weight functions, sequence and torus norms, and the nonlinear
//! Parseval identity `∫ log|a(t)|^2 dt = Σ log A_n^2`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quadrature::{lq_norm_periodic, periodic_mean, NormResult, QuadratureConfig};
use crate::sequence::{derive_entry, CoefficientSequence};
use crate::transform::{ProductEvaluator, Su11Element};

/// Hölder-conjugate exponents `1/p + 1/q = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentPair {
    p: f64,
    q: f64,
}

impl ExponentPair {
    /// `1 < p < 2`.
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0 && p < 2.0) {
            return Err(Error::InvalidArgument(format!("exponent p = {p} outside (1, 2)")));
        }
        Ok(Self { p, q: p / (p - 1.0) })
    }

    /// Also admits the endpoints `p = 1` (`q = ∞`) and `p = 2`.
    pub fn with_endpoints(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Self { p, q: f64::INFINITY })
        } else if p == 2.0 {
            Ok(Self { p, q: 2.0 })
        } else {
            Self::new(p)
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

impl Serialize for ExponentPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExponentPair", 2)?;
        st.serialize_field("p", &self.p)?;
        if self.q.is_finite() {
            st.serialize_field("q", &self.q)?;
        } else {
            st.serialize_field("q", "inf")?;
        }
        st.end()
    }
}

/// `(Σ |w_n|^p)^{1/p}`, or `max |w_n|` for `p = ∞`.
pub fn lp_sequence_norm(w: &[f64], p: f64) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    if p.is_infinite() {
        return w.iter().map(|x| x.abs()).fold(0.0, f64::max);
    }
    let scale = w.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    // scaled to keep |w/scale|^p in range
    let s: f64 = w.iter().map(|x| (x.abs() / scale).powf(p)).sum();
    scale * s.powf(1.0 / p)
}

/// `W_n = (log A_n^2)^{1/2} = (-log(1 - |F_n|^2))^{1/2}` over the stored
/// window.
pub fn nl_weight_sequence(seq: &CoefficientSequence) -> Vec<f64> {
    seq.values().iter().map(|f| weight_of_coefficient(*f)).collect()
}

/// Single-entry version of [`nl_weight_sequence`] that validates the input.
pub fn nl_weight_entry(f: Complex64) -> Result<f64> {
    derive_entry(f)?;
    Ok(weight_of_coefficient(f))
}

fn weight_of_coefficient(f: Complex64) -> f64 {
    (-(-f.norm_sqr()).ln_1p()).sqrt()
}

/// `(log|a|^2)^{1/2}`, computed as `(log(1 + |b|^2))^{1/2}` using the group
/// constraint.
pub fn torus_weight(g: &Su11Element) -> f64 {
    g.b.norm_sqr().ln_1p().sqrt()
}

/// `(log|a(t)|^2)^{1/2}`.
pub fn nl_weight_torus(seq: &CoefficientSequence, t: f64) -> f64 {
    torus_weight(&crate::transform::evaluate_product(seq, t))
}

/// `‖(log|a|^2)^{1/2}‖_{L^q(T)}`.
pub fn torus_weight_norm(seq: &CoefficientSequence, q: f64, cfg: &QuadratureConfig) -> NormResult {
    let eval = ProductEvaluator::new(seq);
    lq_norm_periodic(|t| torus_weight(&eval.at(t)), q, cfg)
}

/// Both sides of the nonlinear Parseval identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParsevalReport {
    pub integral: NormResult,
    pub sum: f64,
    pub residual: f64,
}

pub fn parseval_check(seq: &CoefficientSequence, cfg: &QuadratureConfig) -> ParsevalReport {
    let sum: f64 = seq.values().iter().map(|f| -(-f.norm_sqr()).ln_1p()).sum();
    if seq.is_zero() {
        let integral = NormResult {
            value: 0.0,
            grid_used: 0,
            est_rel_error: 0.0,
            converged: true,
        };
        return ParsevalReport {
            integral,
            sum,
            residual: 0.0,
        };
    }
    let eval = ProductEvaluator::new(seq);
    let integral = periodic_mean(|t| eval.at(t).b.norm_sqr().ln_1p(), cfg);
    ParsevalReport {
        integral,
        sum,
        residual: integral.value - sum,
    }
}

/// `∫ log|a(t)|^2 dt - Σ log A_n^2`.
pub fn parseval_residual(seq: &CoefficientSequence, cfg: &QuadratureConfig) -> Result<f64> {
    let report = parseval_check(seq, cfg);
    report.integral.into_result()?;
    Ok(report.residual)
}

/// Smallest index interval carrying every discrete Fourier coefficient of
/// `samples` above `1e-9` of the largest one. `samples[j]` is the value at
/// `t = j / M`; index `k` stands for `e^{2πikt}`. `None` when all samples
/// vanish.
pub fn frequency_support(samples: &[Complex64], bandwidth: u64) -> Result<Option<(i64, i64)>> {
    let m = samples.len();
    if (m as u64) < 2 * bandwidth + 2 {
        return Err(Error::AliasRisk { grid: m, bandwidth });
    }
    let coeffs = fourier_coefficients(samples);
    let max = coeffs.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(None);
    }
    let threshold = 1e-9 * max;
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for (k, c) in &coeffs {
        if c.norm() > threshold {
            lo = lo.min(*k);
            hi = hi.max(*k);
        }
    }
    Ok(Some((lo, hi)))
}

/// `(k, c_k)` with `c_k = M^{-1} Σ_j s_j e^{-2πijk/M}` and `k` in
/// `(-M/2, M/2]`.
pub fn fourier_coefficients(samples: &[Complex64]) -> Vec<(i64, Complex64)> {
    let m = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf.into_iter()
        .enumerate()
        .map(|(k, c)| {
            let signed = if k <= m / 2 { k as i64 } else { k as i64 - m as i64 };
            (signed, c / m as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{evaluate_on_grid, phase};
    use approx::assert_relative_eq;

    const LOG_FOUR_THIRDS_SQRT: f64 = 0.536_360_1;

    #[test]
    fn exponent_pairs() {
        let e = ExponentPair::new(1.5).unwrap();
        assert_eq!(e.q(), 3.0);
        assert!(ExponentPair::new(1.0).is_err());
        assert!(ExponentPair::new(2.0).is_err());
        assert!(ExponentPair::new(f64::NAN).is_err());
        assert!(ExponentPair::with_endpoints(1.0).unwrap().q().is_infinite());
        assert_eq!(ExponentPair::with_endpoints(2.0).unwrap().q(), 2.0);
        let json = serde_json::to_string(&ExponentPair::with_endpoints(1.0).unwrap()).unwrap();
        assert_eq!(json, r#"{"p":1.0,"q":"inf"}"#);
    }

    #[test]
    fn weight_sequence_values() {
        let s = CoefficientSequence::from_reals(0, &[0.0, 0.5]).unwrap();
        let w = nl_weight_sequence(&s);
        assert_eq!(w[0], 0.0);
        assert_relative_eq!(w[1], (4.0f64 / 3.0).ln().sqrt(), max_relative = 1e-15);
        assert!((w[1] - LOG_FOUR_THIRDS_SQRT).abs() < 1e-7);
        assert!(nl_weight_entry(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn torus_weight_values() {
        assert_eq!(nl_weight_torus(&CoefficientSequence::zero(), 0.4), 0.0);
        let spike = CoefficientSequence::from_reals(0, &[0.5]).unwrap();
        for t in [0.0, 0.3, 0.8] {
            assert_relative_eq!(
                nl_weight_torus(&spike, t),
                (4.0f64 / 3.0).ln().sqrt(),
                max_relative = 1e-14
            );
        }
        let halves = CoefficientSequence::from_reals(0, &[0.5, 0.5]).unwrap();
        assert!(nl_weight_torus(&halves, 0.5) < 1e-15);
    }

    #[test]
    fn lp_norm_values() {
        let w = [LOG_FOUR_THIRDS_SQRT; 2];
        assert!((lp_sequence_norm(&w, 1.5) - 0.851_418_5).abs() < 1e-7);
        assert_relative_eq!(lp_sequence_norm(&[3.0, 4.0], 2.0), 5.0, max_relative = 1e-15);
        assert_eq!(lp_sequence_norm(&[1.0, 2.0, 3.0], f64::INFINITY), 3.0);
        assert_eq!(lp_sequence_norm(&[], 1.5), 0.0);
        assert_eq!(lp_sequence_norm(&[0.0, 0.0], 1.5), 0.0);
    }

    #[test]
    fn parseval_two_halves() {
        let halves = CoefficientSequence::from_reals(0, &[0.5, 0.5]).unwrap();
        let r = parseval_check(&halves, &QuadratureConfig::default());
        let expected = 2.0 * (4.0f64 / 3.0).ln();
        assert!((expected - 0.575_364_1).abs() < 1e-7);
        assert!((r.sum - expected).abs() < 1e-15);
        assert!((r.integral.value - expected).abs() < 1e-10);
        assert!(r.residual.abs() <= 1e-10);
        assert_eq!(
            parseval_residual(&CoefficientSequence::zero(), &QuadratureConfig::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn frequency_support_examples() {
        let m = 8;
        let s: Vec<_> = (0..m).map(|j| phase(1, j as f64 / m as f64)).collect();
        assert_eq!(frequency_support(&s, 1).unwrap(), Some((1, 1)));

        let halves = CoefficientSequence::from_reals(0, &[0.5, 0.5]).unwrap();
        let grid = evaluate_on_grid(&halves, 16).unwrap();
        let b: Vec<_> = grid.iter().map(|g| g.b).collect();
        let a: Vec<_> = grid.iter().map(|g| g.a).collect();
        assert_eq!(frequency_support(&b, 1).unwrap(), Some((0, 1)));
        assert_eq!(frequency_support(&a, 1).unwrap(), Some((-1, 0)));

        assert!(matches!(frequency_support(&b[..3], 1), Err(Error::AliasRisk { .. })));
        assert_eq!(frequency_support(&[Complex64::new(0.0, 0.0); 4], 1).unwrap(), None);
    }
}
