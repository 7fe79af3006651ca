//! Report files: CSV rows, JSON records and two-column plot tables.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use su11_core::harness::{EntryStatus, HyReport, LedgerEntry, ProbeResult};
use su11_core::search::{SearchResult, SweepRow};

pub const CSV_HEADER: &str = "check_id,p,q,lhs,rhs,ratio,bound,margin,converged,context";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Plot,
}

/// One CSV line. Every inequality is normalized as `lhs <= bound * rhs`
/// with `margin = bound * rhs - lhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub check_id: String,
    pub p: f64,
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub bound: f64,
    pub margin: f64,
    pub converged: bool,
    pub context: String,
}

pub trait Record: Serialize {
    fn row(&self) -> ReportRow;

    /// `(x, y)` for plot tables, when the record has a natural one.
    fn point(&self) -> Option<(f64, f64)> {
        None
    }
}

impl Record for ReportRow {
    fn row(&self) -> ReportRow {
        self.clone()
    }
}

impl Record for HyReport {
    fn row(&self) -> ReportRow {
        let mut context = format!("{:?}", self.precision).to_lowercase();
        if !self.asserted {
            context.push_str(";not_asserted");
        }
        if let Some(s) = &self.secondary {
            let _ = write!(context, ";{}_margin={:?}", s.label, s.margin);
        }
        if let Some(cc) = &self.cc {
            let _ = write!(context, ";cc={:?},{:?},{:?}", cc.c, cc.gamma, cc.eta);
        }
        ReportRow {
            check_id: self.bound_label.clone(),
            p: self.exponents.p(),
            q: self.exponents.q(),
            lhs: self.lhs.value,
            rhs: self.rhs,
            ratio: self.ratio,
            bound: self.bound,
            margin: self.margin,
            converged: self.lhs.converged,
            context,
        }
    }
}

impl Record for LedgerEntry {
    fn row(&self) -> ReportRow {
        let status = match self.status {
            EntryStatus::Holds => "holds",
            EntryStatus::Violated => "violated",
            EntryStatus::PreconditionFailed => "precondition_failed",
        };
        let context = if self.context.is_empty() {
            status.to_string()
        } else {
            format!("{status};{}", self.context)
        };
        ReportRow {
            check_id: self.check_id.clone(),
            p: self.p,
            q: self.q,
            lhs: self.lhs,
            rhs: self.rhs,
            ratio: self.lhs / self.rhs,
            bound: 1.0,
            margin: self.margin,
            converged: self.converged,
            context,
        }
    }
}

impl Record for SearchResult {
    fn row(&self) -> ReportRow {
        ReportRow {
            check_id: "search".into(),
            p: self.exponents.p(),
            q: self.exponents.q(),
            lhs: self.best_ratio,
            rhs: 1.0,
            ratio: self.best_ratio,
            bound: 1.0,
            margin: 1.0 - self.best_ratio,
            converged: true,
            context: format!(
                "start={};iters={};seed={}",
                self.start_index, self.iters_used, self.seed
            ),
        }
    }
}

impl Record for SweepRow {
    fn row(&self) -> ReportRow {
        ReportRow {
            check_id: "sweep".into(),
            p: self.p,
            q: self.q,
            lhs: self.best_ratio,
            rhs: 1.0,
            ratio: self.best_ratio,
            bound: 1.0,
            margin: 1.0 - self.best_ratio,
            converged: true,
            context: format!("spike_ratio={:?};digest={}", self.spike_ratio, self.digest),
        }
    }

    fn point(&self) -> Option<(f64, f64)> {
        Some((self.p, self.best_ratio))
    }
}

impl Record for ProbeResult {
    fn row(&self) -> ReportRow {
        ReportRow {
            check_id: "probe".into(),
            p: f64::NAN,
            q: f64::NAN,
            lhs: crate::run::PROBE_MIN_SLOPE,
            rhs: self.slope,
            ratio: self.slope,
            bound: 1.0,
            margin: self.slope - crate::run::PROBE_MIN_SLOPE,
            converged: true,
            context: format!("scales={}", self.points.len()),
        }
    }
}

/// A bare plot point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Record for Point {
    fn row(&self) -> ReportRow {
        ReportRow {
            check_id: "point".into(),
            p: f64::NAN,
            q: f64::NAN,
            lhs: self.y,
            rhs: f64::NAN,
            ratio: f64::NAN,
            bound: f64::NAN,
            margin: f64::NAN,
            converged: true,
            context: format!("x={:?}", self.x),
        }
    }

    fn point(&self) -> Option<(f64, f64)> {
        Some((self.x, self.y))
    }
}

/// Renders `records` in memory; fails on an empty list or, for plot
/// tables, on a record without a point.
pub fn render<R: Record>(records: &[R], format: Format) -> Result<Vec<u8>> {
    if records.is_empty() {
        bail!("no records to write");
    }
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(r.row())?;
            }
            Ok(w.into_inner().map_err(|e| e.into_error())?)
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(records)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Plot => {
            let mut out = String::from("# x y\n");
            for r in records {
                let Some((x, y)) = r.point() else {
                    bail!("record has no plot point");
                };
                let _ = writeln!(out, "{x} {y}");
            }
            Ok(out.into_bytes())
        }
    }
}

/// Writes `records` to `path`. Nothing is created when rendering fails.
pub fn emit_report<R: Record>(records: &[R], format: Format, path: &Path) -> Result<()> {
    let bytes = render(records, format)?;
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
