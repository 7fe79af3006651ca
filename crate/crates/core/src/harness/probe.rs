use serde::Serialize;

use crate::error::{Error, Result};
use crate::sequence::CoefficientSequence;
use crate::transform::{linear_fourier, ProductEvaluator};

/// Grid on which `|b_{εF} - (εF)^|` is maximized.
pub const PROBE_GRID: usize = 512;

/// Points below this level are dropped from the fit.
const FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    /// Least-squares slope of `log m` against `log ε`.
    pub slope: f64,
    /// `(ε, m(ε))` for every scale, including dropped ones.
    pub points: Vec<(f64, f64)>,
}

/// How fast `b` approaches the linear transform as `F` shrinks: for each `ε`
/// computes `m(ε) = max_j |b_{εF}(t_j) - (εF)^(t_j)|` on a 512-point grid and
/// fits `log m ~ slope · log ε`.
///
/// Needs at least three scales in `(0, 1]` whose largest is at least 4 times
/// the smallest.
pub fn quadratic_error_probe(seq: &CoefficientSequence, scales: &[f64]) -> Result<ProbeResult> {
    if scales.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 scales, got {}",
            scales.len()
        )));
    }
    if let Some(bad) = scales.iter().find(|s| !(**s > 0.0 && **s <= 1.0)) {
        return Err(Error::InvalidArgument(format!("scale {bad} outside (0, 1]")));
    }
    let lo = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scales.iter().copied().fold(0.0, f64::max);
    if hi < 4.0 * lo {
        return Err(Error::InvalidArgument(format!("scales span only [{lo}, {hi}]")));
    }
    let mut points = Vec::with_capacity(scales.len());
    for &eps in scales {
        let scaled = seq.scaled(eps)?;
        let eval = ProductEvaluator::new(&scaled);
        let m = (0..PROBE_GRID)
            .map(|j| {
                let t = j as f64 / PROBE_GRID as f64;
                (eval.at(t).b - linear_fourier(&scaled, t)).norm()
            })
            .fold(0.0, f64::max);
        points.push((eps, m));
    }
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, m)| *m >= FLOOR)
        .map(|(e, m)| (e.ln(), m.ln()))
        .collect();
    let distinct = fit.iter().any(|(x, _)| *x != fit[0].0);
    if fit.len() < 2 || !distinct {
        return Err(Error::DegenerateFit);
    }
    let n = fit.len() as f64;
    let mx = fit.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = fit.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxy: f64 = fit.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = fit.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(ProbeResult {
        slope: sxy / sxx,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCALES: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

    #[test]
    fn two_halves_scale_cubically() {
        let f = CoefficientSequence::from_reals(0, &[0.5, 0.5]).unwrap();
        let r = quadratic_error_probe(&f, &SCALES).unwrap();
        assert!((r.slope - 3.0).abs() < 0.01, "{}", r.slope);
        // b - F^ = (A^2 - 1) F^ with A^2 = 1 / (1 - ε^2/4), max at t = 0
        for (eps, m) in &r.points {
            let a2 = 1.0 / (1.0 - eps * eps / 4.0);
            assert!((m - (a2 - 1.0) * eps).abs() < 1e-15, "{eps}: {m}");
        }
    }

    #[test]
    fn degenerate_and_invalid() {
        assert_eq!(
            quadratic_error_probe(&CoefficientSequence::zero(), &SCALES),
            Err(Error::DegenerateFit)
        );
        let f = CoefficientSequence::from_reals(0, &[0.5, 0.5]).unwrap();
        assert!(quadratic_error_probe(&f, &[0.1, 0.05]).is_err());
        assert!(quadratic_error_probe(&f, &[0.1, 0.09, 0.08]).is_err());
        assert!(quadratic_error_probe(&f, &[1.5, 0.1, 0.01]).is_err());
    }
}
