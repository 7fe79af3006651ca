//! The SU(1,1)-valued trigonometric product of a coefficient sequence.
//!
//! For each `t` on the torus the product
//!
//! ```text
//! [ a(t)        b(t)       ]      ___    [ A_n                B_n e^{2πint} ]
//! [ conj b(t)   conj a(t)  ]  =   | |    [ conj(B_n) e^{-2πint}   A_n       ]
//!                                n=N_min..N_max
//! ```
//!
//! is accumulated left to right as `n` increases. Matrices are kept in the
//! `(a, b)` form; the second row is always the conjugate of the first.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{derive_coefficients, CoefficientSequence};

/// First row `(a, b)` of an SU(1,1) matrix `[[a, b], [conj b, conj a]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Su11Element {
    pub a: Complex64,
    pub b: Complex64,
}

impl Su11Element {
    pub const IDENTITY: Self = Self {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    /// `|a|^2 - |b|^2`, which is 1 on the group.
    pub fn determinant(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    /// Whether `||a|^2 - |b|^2 - 1| <= rel_tol * |a|^2`.
    pub fn is_member(&self, rel_tol: f64) -> bool {
        (self.determinant() - 1.0).abs() <= rel_tol * self.a.norm_sqr()
    }

    /// Right-multiplies by `[[A, Bz], [conj(B) conj(z), A]]`, `|z| = 1`.
    #[inline]
    pub fn mul_factor(self, a_diag: f64, b_phase: Complex64) -> Self {
        Self {
            a: self.a * a_diag + self.b * b_phase.conj(),
            b: self.a * b_phase + self.b * a_diag,
        }
    }

    /// Full matrix product `self * rhs`.
    pub fn mul(self, rhs: Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.b.conj(),
            b: self.a * rhs.b + self.b * rhs.a.conj(),
        }
    }
}

/// `e^{2πix}` with the argument given in turns.
///
/// The argument is first reduced to a quarter-turn multiple plus a remainder
/// in `[-1/8, 1/8]`, so quarter turns are exact.
pub fn cis_turns(x: f64) -> Complex64 {
    let r = x - x.round();
    let quarter = (4.0 * r).round();
    let s = r - 0.25 * quarter;
    let (sn, cs) = (std::f64::consts::TAU * s).sin_cos();
    match (quarter as i64).rem_euclid(4) {
        0 => Complex64::new(cs, sn),
        1 => Complex64::new(-sn, cs),
        2 => Complex64::new(-cs, -sn),
        _ => Complex64::new(sn, -cs),
    }
}

/// `e^{2πint}`. The product `n t` is reduced modulo 1 (with its rounding
/// error carried) before the factor `2π` is applied.
pub fn phase(n: i64, t: f64) -> Complex64 {
    let nf = n as f64;
    let p = nf * t;
    let err = nf.mul_add(t, -p);
    cis_turns((p - p.round()) + err)
}

/// `(a(t), b(t))`. The zero sequence gives the identity.
pub fn evaluate_product(seq: &CoefficientSequence, t: f64) -> Su11Element {
    let derived = derive_coefficients(seq);
    product_from_derived(derived.offset, &derived.a_diag, &derived.b_off, t)
}

fn product_from_derived(offset: i64, a_diag: &[f64], b_off: &[Complex64], t: f64) -> Su11Element {
    let mut acc = Su11Element::IDENTITY;
    for (k, (&a, &b)) in a_diag.iter().zip(b_off).enumerate() {
        if b == Complex64::new(0.0, 0.0) {
            continue;
        }
        acc = acc.mul_factor(a, b * phase(offset + k as i64, t));
    }
    acc
}

/// Evaluator that derives `(A_n, B_n)` once and reuses them for many `t`.
#[derive(Clone, Debug)]
pub struct ProductEvaluator {
    offset: i64,
    a_diag: Vec<f64>,
    b_off: Vec<Complex64>,
}

impl ProductEvaluator {
    pub fn new(seq: &CoefficientSequence) -> Self {
        let d = derive_coefficients(seq);
        Self {
            offset: d.offset,
            a_diag: d.a_diag,
            b_off: d.b_off,
        }
    }

    pub fn at(&self, t: f64) -> Su11Element {
        product_from_derived(self.offset, &self.a_diag, &self.b_off, t)
    }
}

/// `evaluate_product` at `t_j = j / m`, `j = 0..m`.
pub fn evaluate_on_grid(seq: &CoefficientSequence, m: usize) -> Result<Vec<Su11Element>> {
    if m == 0 {
        return Err(Error::InvalidArgument("grid size must be at least 1".into()));
    }
    let eval = ProductEvaluator::new(seq);
    Ok((0..m).into_par_iter().map(|j| eval.at(j as f64 / m as f64)).collect())
}

/// Partial products and reduced quantities at one `t`.
///
/// Index `k` of each vector corresponds to `N = first_index + k`, where
/// `first_index = N_min - 1` and the last index is `N_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformTrace {
    pub t: f64,
    pub first_index: i64,
    /// `(a_N(t), b_N(t))`.
    pub partials: Vec<Su11Element>,
    /// `(ã_N(t), b̃_N(t))`.
    pub reduced: Vec<(Complex64, Complex64)>,
    /// `prod_{n <= N} A_n`.
    pub prefix_a: Vec<f64>,
}

impl TransformTrace {
    pub fn last_index(&self) -> i64 {
        self.first_index + self.partials.len() as i64 - 1
    }

    pub fn partial(&self, n: i64) -> Su11Element {
        self.partials[(n - self.first_index) as usize]
    }

    pub fn reduced(&self, n: i64) -> (Complex64, Complex64) {
        self.reduced[(n - self.first_index) as usize]
    }

    /// `|ã_N(t)| + |b̃_N(t)|`.
    pub fn reduced_size(&self, n: i64) -> f64 {
        let (ra, rb) = self.reduced(n);
        ra.norm() + rb.norm()
    }
}

/// Runs both recurrences from `N = N_min - 1` to `N_max`:
///
/// ```text
/// a_N = a_{N-1} A_N + b_{N-1} conj(B_N) e^{-2πiNt}
/// b_N = a_{N-1} B_N e^{2πiNt} + b_{N-1} A_N
/// ã_N = ã_{N-1} + b̃_{N-1} conj(F_N) e^{-2πiNt}
/// b̃_N = b̃_{N-1} + F_N e^{2πiNt} + ã_{N-1} F_N e^{2πiNt}
/// ```
pub fn transform_trace(seq: &CoefficientSequence, t: f64) -> Result<TransformTrace> {
    let (lo, hi) = seq.support().ok_or(Error::EmptySequence)?;
    let len = (hi - lo + 2) as usize;
    let mut partials = Vec::with_capacity(len);
    let mut reduced = Vec::with_capacity(len);
    let mut prefix_a = Vec::with_capacity(len);

    let mut partial = Su11Element::IDENTITY;
    let mut ra = Complex64::new(0.0, 0.0);
    let mut rb = Complex64::new(0.0, 0.0);
    let mut prod_a = 1.0;
    partials.push(partial);
    reduced.push((ra, rb));
    prefix_a.push(prod_a);

    for n in lo..=hi {
        let f = seq.get(n);
        let (a_n, b_n) = crate::sequence::derive_unchecked(f);
        let z = phase(n, t);
        partial = partial.mul_factor(a_n, b_n * z);
        let fz = f * z;
        let next_ra = ra + rb * fz.conj();
        let next_rb = rb + fz + ra * fz;
        ra = next_ra;
        rb = next_rb;
        prod_a *= a_n;
        partials.push(partial);
        reduced.push((ra, rb));
        prefix_a.push(prod_a);
    }
    Ok(TransformTrace {
        t,
        first_index: lo - 1,
        partials,
        reduced,
        prefix_a,
    })
}

/// The shifted, negated sequence `n -> -F[n+1]`.
///
/// For `N >= 1` the matrices
/// `diag(e^{2πiNt}, e^{-2πiNt}) (prod_{n=1..N} M_n(t))^T` are the Szegő
/// matrices with Verblunsky coefficients `(-F[n+1])_{n>=0}`; only the
/// coefficient map is provided here.
pub fn to_verblunsky(seq: &CoefficientSequence) -> CoefficientSequence {
    CoefficientSequence::new(seq.offset() - 1, seq.values().iter().map(|f| -f).collect())
        .expect("negation preserves the disk")
}

/// `sum_{n <= upto} F[n] e^{2πint}`; `None` sums the whole sequence.
pub fn linear_fourier_truncated(seq: &CoefficientSequence, upto: Option<i64>, t: f64) -> Complex64 {
    seq.iter()
        .take_while(|(n, _)| upto.is_none_or(|cap| *n <= cap))
        .map(|(n, f)| f * phase(n, t))
        .sum()
}

/// The linear Fourier transform `F̂(t)`.
pub fn linear_fourier(seq: &CoefficientSequence, t: f64) -> Complex64 {
    linear_fourier_truncated(seq, None, t)
}
