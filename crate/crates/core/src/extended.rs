//! Double-double versions of the product and of both weight norms, used when
//! an inequality margin is too small to trust in binary64.
//!
//! Inputs stay binary64; every derived quantity (`A_n`, `B_n`, phases,
//! partial products, logarithms, powers and quadrature sums) is carried in
//! [`DoubleDouble`].

use crate::dd::{ComplexDD, DoubleDouble};
use crate::norms::ExponentPair;
use crate::quadrature::{lq_norm_periodic_dd, NormResult, QuadratureConfig};
use crate::sequence::CoefficientSequence;

type Dd = DoubleDouble;

fn modulus_sqr(re: f64, im: f64) -> Dd {
    Dd::from_product(re, re) + Dd::from_product(im, im)
}

/// Precomputed `(n, A_n, B_n)` in double-double.
#[derive(Clone, Debug)]
pub struct ProductEvaluatorDd {
    factors: Vec<(i64, Dd, ComplexDD)>,
}

impl ProductEvaluatorDd {
    pub fn new(seq: &CoefficientSequence) -> Self {
        let factors = seq
            .iter()
            .filter(|(_, f)| f.norm_sqr() > 0.0)
            .map(|(n, f)| {
                let a = (Dd::ONE - modulus_sqr(f.re, f.im)).sqrt().recip();
                let b = ComplexDD::new(Dd::from(f.re), Dd::from(f.im)).scale(a);
                (n, a, b)
            })
            .collect();
        Self { factors }
    }

    /// `(a(t), b(t))`.
    pub fn at(&self, t: f64) -> (ComplexDD, ComplexDD) {
        let mut a = ComplexDD::ONE;
        let mut b = ComplexDD::ZERO;
        for (n, a_n, b_n) in &self.factors {
            let z = ComplexDD::cis_turns(Dd::from_product(*n as f64, t));
            let bz = *b_n * z;
            let next_a = a.scale(*a_n) + b * bz.conj();
            let next_b = a * bz + b.scale(*a_n);
            a = next_a;
            b = next_b;
        }
        (a, b)
    }

    /// `(log(1 + |b(t)|^2))^{1/2}`.
    pub fn torus_weight(&self, t: f64) -> Dd {
        let (_, b) = self.at(t);
        (Dd::ONE + b.norm_sqr()).ln().sqrt()
    }
}

pub fn nl_weight_sequence_dd(seq: &CoefficientSequence) -> Vec<Dd> {
    seq.values()
        .iter()
        .map(|f| {
            let r2 = modulus_sqr(f.re, f.im);
            if r2.is_zero() {
                Dd::ZERO
            } else {
                (-(Dd::ONE - r2).ln()).sqrt()
            }
        })
        .collect()
}

pub fn lp_norm_dd(w: &[Dd], p: Dd) -> Dd {
    let sum = w
        .iter()
        .filter(|x| !x.is_zero())
        .fold(Dd::ZERO, |acc, x| acc + x.abs().powf(p));
    if sum.is_zero() {
        Dd::ZERO
    } else {
        sum.powf(p.recip())
    }
}

/// Conjugate exponent `p / (p - 1)` in double-double.
pub fn conjugate_dd(p: f64) -> Dd {
    Dd::from(p) / (Dd::from(p) - Dd::ONE)
}

/// `‖(log|a|^2)^{1/2}‖_{L^q}` and `‖(log A_n^2)^{1/2}‖_{ℓ^p}` for a finite
/// `q`.
pub fn weight_norms_dd(seq: &CoefficientSequence, e: &ExponentPair, cfg: &QuadratureConfig) -> (Dd, NormResult, Dd) {
    let eval = ProductEvaluatorDd::new(seq);
    let q = conjugate_dd(e.p());
    let (lhs, meta) = lq_norm_periodic_dd(|t| eval.torus_weight(t), q, cfg);
    let rhs = lp_norm_dd(&nl_weight_sequence_dd(seq), Dd::from(e.p()));
    (lhs, meta, rhs)
}
