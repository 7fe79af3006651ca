//! Double-double arithmetic (an unevaluated sum `hi + lo` of two binary64
//! values, about 32 significant decimal digits).
//!
//! Only the operations needed by the extended-precision transform and
//! quadrature are provided: field arithmetic, `sqrt`, `exp`, `ln`, `powf`
//! and a turn-based `sin_cos`.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    pub const LN_2: Self = Self {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Builds a normalized value from two components.
    pub fn from_parts(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        Self { hi: h, lo: l }
    }

    /// Exact product of two binary64 values.
    pub fn from_product(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Self::from_parts(p, e)
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = p2 + self.lo * b;
        let (h, l) = quick_two_sum(p1, p2);
        Self { hi: h, lo: l }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Self::from_product(q1, b);
        let q2 = r.hi / b;
        let r = r - Self::from_product(q2, b);
        let q3 = r.hi / b;
        Self::from_parts(q1, q2) + Self::from_f64(q3)
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    /// Nearest integer. Exact ties are resolved on the leading component.
    pub fn round(self) -> Self {
        let h = self.hi.round();
        if h == self.hi {
            Self::from_parts(h, self.lo.round())
        } else {
            Self::from_f64(h)
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let ax_dd = Self::from_f64(ax);
        let diff = (self - ax_dd.sqr()).hi;
        ax_dd + Self::from_product(diff, x * 0.5)
    }

    pub fn exp(self) -> Self {
        const INV_K: f64 = 1.0 / 512.0;
        const DOUBLINGS: usize = 9;
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        let k = (self.hi / Self::LN_2.hi).round();
        let r = (self - Self::LN_2.mul_f64(k)).mul_f64(INV_K);

        // expm1(r) by Taylor series, |r| <= ln2/1024
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = (term * r).div_f64(n);
            if term.hi.abs() <= 1e-36 * sum.hi.abs().max(1e-300) {
                break;
            }
            sum += term;
            if n > 30.0 {
                break;
            }
        }
        // expm1(2x) = 2 expm1(x) + expm1(x)^2
        for _ in 0..DOUBLINGS {
            sum = sum.mul_f64(2.0) + sum.sqr();
        }
        let e = sum + Self::ONE;
        let scale = 2f64.powi(k as i32);
        Self {
            hi: e.hi * scale,
            lo: e.lo * scale,
        }
    }

    /// Natural logarithm by Newton iteration on `exp`.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(f64::NEG_INFINITY);
        }
        let mut x = Self::from_f64(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - Self::ONE;
        }
        x
    }

    pub fn powf(self, y: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        (y * self.ln()).exp()
    }

    /// `(sin 2πx, cos 2πx)` for `x` measured in turns.
    ///
    /// The argument is reduced modulo quarter turns before the series is
    /// applied, so multiples of 1/4 come out exact.
    pub fn sin_cos_turns(x: Self) -> (Self, Self) {
        let r = x - x.round();
        let quarter = r.mul_f64(4.0).round();
        let s = r - quarter.mul_f64(0.25);
        let angle = (Self::PI * s).mul_f64(2.0);
        let (sn, cs) = sin_cos_small(angle);
        match (quarter.hi as i64).rem_euclid(4) {
            0 => (sn, cs),
            1 => (cs, -sn),
            2 => (-sn, -cs),
            _ => (-cs, sn),
        }
    }
}

// Taylor series for |x| <= pi/4.
fn sin_cos_small(x: DoubleDouble) -> (DoubleDouble, DoubleDouble) {
    if x.is_zero() {
        return (DoubleDouble::ZERO, DoubleDouble::ONE);
    }
    let x2 = x.sqr();
    let mut sin = x;
    let mut term = x;
    let mut k = 1.0;
    loop {
        term = -(term * x2).div_f64((k + 1.0) * (k + 2.0));
        k += 2.0;
        sin += term;
        if term.hi.abs() < 1e-35 || k > 60.0 {
            break;
        }
    }
    let mut cos = DoubleDouble::ONE;
    let mut term = DoubleDouble::ONE;
    let mut k = 0.0;
    loop {
        term = -(term * x2).div_f64((k + 1.0) * (k + 2.0));
        k += 2.0;
        cos += term;
        if term.hi.abs() < 1e-35 || k > 60.0 {
            break;
        }
    }
    (sin, cos)
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (h, l) = quick_two_sum(s1, s2 + t2);
        Self { hi: h, lo: l }
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (h, l) = quick_two_sum(p1, p2);
        Self { hi: h, lo: l }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 } + Self::from_f64(q3)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

/// Complex number with double-double parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexDD {
    pub re: DoubleDouble,
    pub im: DoubleDouble,
}

impl ComplexDD {
    pub const ZERO: Self = Self {
        re: DoubleDouble::ZERO,
        im: DoubleDouble::ZERO,
    };
    pub const ONE: Self = Self {
        re: DoubleDouble::ONE,
        im: DoubleDouble::ZERO,
    };

    pub fn new(re: DoubleDouble, im: DoubleDouble) -> Self {
        Self { re, im }
    }

    pub fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn norm_sqr(self) -> DoubleDouble {
        self.re.sqr() + self.im.sqr()
    }

    pub fn scale(self, s: DoubleDouble) -> Self {
        Self {
            re: self.re * s,
            im: self.im * s,
        }
    }

    /// `e^{2πix}` for `x` in turns.
    pub fn cis_turns(x: DoubleDouble) -> Self {
        let (s, c) = DoubleDouble::sin_cos_turns(x);
        Self { re: c, im: s }
    }
}

impl Add for ComplexDD {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        Self {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl Mul for ComplexDD {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        Self {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}
