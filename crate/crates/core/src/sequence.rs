//! Finitely supported coefficient sequences and their plain-text and JSON
//! forms.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries with `|F| >= 1 - DISK_GUARD` are rejected.
pub const DISK_GUARD: f64 = 1e-12;

/// A doubly indexed complex sequence `F` with finitely many nonzero entries,
/// all inside the open unit disk.
///
/// Entry `k` of the stored window holds `F[offset + k]`; everything outside
/// the window is zero. Zeros inside the window are kept as identity factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(into = "SequenceRecord")]
pub struct CoefficientSequence {
    offset: i64,
    values: Vec<Complex64>,
}

impl CoefficientSequence {
    pub fn new(offset: i64, values: Vec<Complex64>) -> Result<Self> {
        Self::with_guard(offset, values, DISK_GUARD)
    }

    /// Like [`new`](Self::new) with a custom distance to the unit circle.
    pub fn with_guard(offset: i64, values: Vec<Complex64>, guard: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&guard) {
            return Err(Error::InvalidArgument(format!("disk guard {guard} not in [0, 1)")));
        }
        for (k, f) in values.iter().enumerate() {
            check_entry(offset + k as i64, *f, guard)?;
        }
        Ok(Self { offset, values })
    }

    pub fn zero() -> Self {
        Self {
            offset: 0,
            values: Vec::new(),
        }
    }

    /// A sequence with one nonzero entry `value` at `index`.
    pub fn spike(index: i64, value: Complex64) -> Result<Self> {
        Self::new(index, vec![value])
    }

    /// Real-valued convenience constructor.
    pub fn from_reals(offset: i64, values: &[f64]) -> Result<Self> {
        Self::new(offset, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `F[n]`, zero outside the stored window.
    pub fn get(&self, n: i64) -> Complex64 {
        let k = n - self.offset;
        if k < 0 || k as usize >= self.values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[k as usize]
        }
    }

    /// `(index, value)` pairs over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, f)| (self.offset + k as i64, *f))
    }

    /// `(N_min, N_max)`, the extreme indices carrying a nonzero entry.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.values.iter().position(|f| *f != Complex64::new(0.0, 0.0))?;
        let last = self.values.iter().rposition(|f| *f != Complex64::new(0.0, 0.0))?;
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_none()
    }

    /// The same sequence with leading and trailing zeros dropped.
    pub fn trimmed(&self) -> Self {
        match self.support() {
            None => Self::zero(),
            Some((lo, hi)) => Self {
                offset: lo,
                values: (lo..=hi).map(|n| self.get(n)).collect(),
            },
        }
    }

    /// `(..., F[N-1], F[N], 0, 0, ...)`.
    pub fn truncated(&self, upto: i64) -> Self {
        let keep = (upto - self.offset + 1).clamp(0, self.values.len() as i64) as usize;
        Self {
            offset: self.offset,
            values: self.values[..keep].to_vec(),
        }
    }

    /// `eps * F`; fails if a scaled entry leaves the admissible disk.
    pub fn scaled(&self, eps: f64) -> Result<Self> {
        Self::new(self.offset, self.values.iter().map(|f| f * eps).collect())
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|f| f.norm()).collect()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|f| f.norm()).sum()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|f| f.norm()).fold(0.0, f64::max)
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        crate::norms::lp_sequence_norm(&self.moduli(), p)
    }

    /// Serializes to the plain-text format: an `offset <n>` line followed by
    /// one `<re> <im>` line per stored entry. Floats are written in shortest
    /// round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = format!("offset {}\n", self.offset);
        for f in &self.values {
            writeln!(out, "{:?} {:?}", f.re, f.im).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut offset = None;
        let mut values = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            if offset.is_none() {
                match (tokens.next(), tokens.next(), tokens.next()) {
                    (Some("offset"), Some(n), None) => {
                        offset = Some(n.parse::<i64>().map_err(|e| Error::Parse {
                            line: line_no,
                            message: format!("bad offset {n:?}: {e}"),
                        })?);
                    }
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "expected `offset <integer>`".into(),
                        })
                    }
                }
                continue;
            }
            let parse = |tok: Option<&str>| -> Result<f64> {
                let tok = tok.ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "expected `<re> <im>`".into(),
                })?;
                let x = tok.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad number {tok:?}: {e}"),
                })?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(Error::Parse {
                        line: line_no,
                        message: format!("non-finite number {tok:?}"),
                    })
                }
            };
            let re = parse(tokens.next())?;
            let im = parse(tokens.next())?;
            if tokens.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "trailing tokens after `<re> <im>`".into(),
                });
            }
            let f = Complex64::new(re, im);
            let index = offset.unwrap() + values.len() as i64;
            if let Err(e) = check_entry(index, f, DISK_GUARD) {
                return Err(Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                });
            }
            values.push(f);
        }
        let offset = offset.ok_or_else(|| Error::Parse {
            line: 0,
            message: "missing `offset` line".into(),
        })?;
        Self::new(offset, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SequenceRecord::from(self.clone())).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: SequenceRecord = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        Self::try_from(record)
    }
}

fn check_entry(index: i64, f: Complex64, guard: f64) -> Result<()> {
    let modulus = f.norm();
    if !f.re.is_finite() || !f.im.is_finite() || modulus >= 1.0 - guard {
        return Err(Error::Domain {
            index,
            re: f.re,
            im: f.im,
            modulus,
            guard,
        });
    }
    Ok(())
}

/// JSON shape `{"offset": n, "values": [[re, im], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceRecord {
    pub offset: i64,
    pub values: Vec<[f64; 2]>,
}

impl From<CoefficientSequence> for SequenceRecord {
    fn from(s: CoefficientSequence) -> Self {
        Self {
            offset: s.offset,
            values: s.values.iter().map(|f| [f.re, f.im]).collect(),
        }
    }
}

impl TryFrom<SequenceRecord> for CoefficientSequence {
    type Error = Error;

    fn try_from(r: SequenceRecord) -> Result<Self> {
        Self::new(r.offset, r.values.iter().map(|v| Complex64::new(v[0], v[1])).collect())
    }
}

impl<'de> Deserialize<'de> for CoefficientSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let record = SequenceRecord::deserialize(d)?;
        Self::try_from(record).map_err(serde::de::Error::custom)
    }
}

/// `A_n = (1 - |F_n|^2)^{-1/2}` and `B_n = F_n A_n`, aligned with the source
/// window.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedCoefficients {
    pub offset: i64,
    pub a_diag: Vec<f64>,
    pub b_off: Vec<Complex64>,
}

/// `(A, B)` for a single coefficient.
pub fn derive_entry(f: Complex64) -> Result<(f64, Complex64)> {
    check_entry(0, f, DISK_GUARD)?;
    Ok(derive_unchecked(f))
}

pub(crate) fn derive_unchecked(f: Complex64) -> (f64, Complex64) {
    let r = f.norm();
    let a = 1.0 / ((1.0 - r) * (1.0 + r)).sqrt();
    (a, f * a)
}

pub fn derive_coefficients(seq: &CoefficientSequence) -> DerivedCoefficients {
    let (a_diag, b_off) = seq.values().iter().map(|f| derive_unchecked(*f)).unzip();
    DerivedCoefficients {
        offset: seq.offset(),
        a_diag,
        b_off,
    }
}
