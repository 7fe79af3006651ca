use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use su11_core::harness::{hy_ratio, proof_ledger, quadratic_error_probe, EntryStatus};
use su11_core::norms::{frequency_support, parseval_check};
use su11_core::sampling::{bounded_sequence, random_sequence};
use su11_core::search::{multi_start, p_sweep, SearchResult};
use su11_core::transform::{evaluate_on_grid, evaluate_product};
use su11_core::{CoefficientSequence, Error, ExponentPair};

use crate::config::{ExperimentConfig, Mode, Source};
use crate::report::{render, Format, Point, Record, ReportRow};

/// Probe slopes below this fail the run.
pub const PROBE_MIN_SLOPE: f64 = 1.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Every check held.
    Pass,
    /// A check failed; `counterexample.json` was written.
    Violation,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Violation => 2,
        }
    }
}

/// Contents of `counterexample.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub check: String,
    pub p: f64,
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub rel_margin: f64,
    pub sequence: CoefficientSequence,
    pub seed: u64,
    pub config_digest: String,
}

/// Files are collected here and written together once the run finishes.
struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn add<R: Record>(&mut self, name: &str, records: &[R], format: Format) -> Result<()> {
        self.files.push((name.to_string(), render(records, format)?));
        Ok(())
    }

    fn add_raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn write(self) -> Result<()> {
        std::fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        for (name, bytes) in self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

pub fn load_sequence(cfg: &ExperimentConfig) -> Result<CoefficientSequence> {
    match &cfg.source {
        Some(Source::File(path)) => read_sequence(path),
        Some(Source::Random) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Ok(random_sequence(&mut rng, cfg.search.window, cfg.search.l1_cap))
        }
        None => anyhow::bail!("no input sequence configured"),
    }
}

pub fn read_sequence(path: &Path) -> Result<CoefficientSequence> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let seq = if path.extension().is_some_and(|e| e == "json") {
        CoefficientSequence::from_json(&text)
    } else {
        CoefficientSequence::from_text(&text)
    };
    seq.with_context(|| format!("parsing {}", path.display()))
}

/// Runs one experiment, printing progress to `out` (seed first) and writing
/// the report files into `cfg.output`.
pub fn run(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<Outcome> {
    writeln!(out, "seed = {}", cfg.seed)?;
    let mut art = Artifacts {
        dir: cfg.output.clone(),
        files: Vec::new(),
    };
    let outcome = match cfg.mode {
        Mode::Verify => verify(cfg, out, &mut art)?,
        Mode::Ratio => ratio(cfg, out, &mut art)?,
        Mode::Ledger => ledger(cfg, out, &mut art)?,
        Mode::Search => search(cfg, out, &mut art)?,
        Mode::Sweep => sweep(cfg, out, &mut art)?,
        Mode::Probe => probe(cfg, out, &mut art)?,
    };
    if outcome == Outcome::Violation {
        writeln!(
            out,
            "counterexample written to {}",
            cfg.output.join("counterexample.json").display()
        )?;
    }
    art.write()?;
    Ok(outcome)
}

fn dump(art: &mut Artifacts, cx: &Counterexample) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(cx)?;
    bytes.push(b'\n');
    art.add_raw("counterexample.json", bytes);
    Ok(())
}

fn tolerance_row(check_id: &str, measured: f64, tol: f64, context: String) -> ReportRow {
    ReportRow {
        check_id: check_id.into(),
        p: f64::NAN,
        q: f64::NAN,
        lhs: measured,
        rhs: tol,
        ratio: measured / tol,
        bound: 1.0,
        margin: tol - measured,
        converged: true,
        context,
    }
}

fn print_row(out: &mut dyn Write, r: &ReportRow) -> Result<()> {
    let verdict = if r.margin >= 0.0 { "ok" } else { "FAIL" };
    writeln!(
        out,
        "{} [{}]: {:e} <= {:e} {verdict}",
        r.check_id, r.context, r.lhs, r.rhs
    )?;
    Ok(())
}

/// Largest `||a|^2 - |b|^2 - 1| / |a|^2` and `1 - min |a|` over the points.
fn group_errors(seq: &CoefficientSequence, ts: impl Iterator<Item = f64>) -> (f64, f64) {
    ts.map(|t| {
        let g = evaluate_product(seq, t);
        let a2 = g.a.norm_sqr();
        ((a2 - g.b.norm_sqr() - 1.0).abs() / a2, (1.0 - g.a.norm()).max(0.0))
    })
    .fold((0.0, 0.0), |(d, m), (d1, m1)| (d.max(d1), m.max(m1)))
}

fn verify(cfg: &ExperimentConfig, out: &mut dyn Write, art: &mut Artifacts) -> Result<Outcome> {
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut failed: Option<(ReportRow, CoefficientSequence)> = None;
    let mut record = |row: ReportRow, seq: &CoefficientSequence, out: &mut dyn Write| -> Result<()> {
        print_row(out, &row)?;
        if row.margin < 0.0 && failed.is_none() {
            failed = Some((row.clone(), seq.clone()));
        }
        rows.push(row);
        Ok(())
    };

    if cfg.source.is_some() {
        let f = load_sequence(cfg)?;
        let report = parseval_check(&f, &cfg.quadrature);
        writeln!(out, "parseval_residual = {:e}", report.residual)?;
        record(
            tolerance_row(
                "parseval",
                report.residual.abs(),
                1e-10,
                format!("sum={:?}", report.sum),
            ),
            &f,
            out,
        )?;
        let grid = 256;
        let (det, modulus) = group_errors(&f, (0..grid).map(|j| j as f64 / grid as f64));
        record(
            tolerance_row("su11_determinant", det, 1e-10, format!("grid={grid}")),
            &f,
            out,
        )?;
        record(
            tolerance_row("su11_modulus", modulus, 1e-12, format!("grid={grid}")),
            &f,
            out,
        )?;
        if let Some((lo, hi)) = f.support() {
            let bandwidth = lo.unsigned_abs().max(hi.unsigned_abs()).max((hi - lo) as u64);
            let m = (2 * bandwidth as usize + 2).next_power_of_two().max(16);
            let samples = evaluate_on_grid(&f, m)?;
            let b: Vec<_> = samples.iter().map(|g| g.b).collect();
            let a: Vec<_> = samples.iter().map(|g| g.a).collect();
            for (name, s, window) in [("support_b", b, (lo, hi)), ("support_a", a, (lo - hi, 0))] {
                let found = frequency_support(&s, bandwidth)?;
                let inside = found.is_none_or(|(l, h)| l >= window.0 && h <= window.1);
                let row = tolerance_row(
                    name,
                    if inside { 0.0 } else { 1.0 },
                    0.0,
                    format!("found={found:?};allowed={window:?}"),
                );
                record(row, &f, out)?;
            }
        }
    }

    // randomized suites
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst_parseval = (0.0, CoefficientSequence::zero());
    let mut worst_det = (0.0, CoefficientSequence::zero());
    let mut worst_mod = (0.0, CoefficientSequence::zero());
    for _ in 0..cfg.draws {
        let f = bounded_sequence(&mut rng, 10, 0.9)?;
        let r = parseval_check(&f, &cfg.quadrature);
        let res = if r.integral.converged {
            r.residual.abs()
        } else {
            f64::INFINITY
        };
        if res > worst_parseval.0 || worst_parseval.1.is_zero() {
            worst_parseval = (res, f.clone());
        }
        let ts: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
        let (det, modulus) = group_errors(&f, ts.into_iter());
        if det > worst_det.0 || worst_det.1.is_zero() {
            worst_det = (det, f.clone());
        }
        if modulus > worst_mod.0 || worst_mod.1.is_zero() {
            worst_mod = (modulus, f);
        }
    }
    if cfg.draws > 0 {
        let ctx = format!("draws={}", cfg.draws);
        record(
            tolerance_row("parseval_suite", worst_parseval.0, 1e-9, ctx.clone()),
            &worst_parseval.1,
            out,
        )?;
        record(
            tolerance_row("su11_suite_determinant", worst_det.0, 1e-10, ctx.clone()),
            &worst_det.1,
            out,
        )?;
        record(
            tolerance_row("su11_suite_modulus", worst_mod.0, 1e-12, ctx),
            &worst_mod.1,
            out,
        )?;
    }

    if rows.is_empty() {
        anyhow::bail!("verify ran no checks (no input and draws = 0)");
    }
    art.add("verify.csv", &rows, Format::Csv)?;
    art.add("verify.json", &rows, Format::Json)?;
    if let Some((row, seq)) = failed {
        dump(
            art,
            &Counterexample {
                check: row.check_id,
                p: cfg.p,
                q: cfg.p / (cfg.p - 1.0),
                lhs: row.lhs,
                rhs: row.rhs,
                margin: row.margin,
                rel_margin: row.margin / row.rhs,
                sequence: seq,
                seed: cfg.seed,
                config_digest: cfg.digest(),
            },
        )?;
        return Ok(Outcome::Violation);
    }
    Ok(Outcome::Pass)
}

fn ratio(cfg: &ExperimentConfig, out: &mut dyn Write, art: &mut Artifacts) -> Result<Outcome> {
    let f = load_sequence(cfg)?;
    let e = ExponentPair::with_endpoints(cfg.p)?;
    let rep = hy_ratio(&f, &e, &cfg.quadrature)?;
    rep.lhs.into_result()?;
    writeln!(out, "lhs = {:?}", rep.lhs.value)?;
    writeln!(out, "rhs = {:?}", rep.rhs)?;
    writeln!(out, "ratio = {:?}", rep.ratio)?;
    art.add("ratio.csv", std::slice::from_ref(&rep), Format::Csv)?;
    art.add("ratio.json", std::slice::from_ref(&rep), Format::Json)?;
    Ok(Outcome::Pass)
}

fn ledger(cfg: &ExperimentConfig, out: &mut dyn Write, art: &mut Artifacts) -> Result<Outcome> {
    let f = load_sequence(cfg)?;
    let e = ExponentPair::new(cfg.p)?;
    let entries = proof_ledger(&f, &e, &cfg.cc, &cfg.quadrature, cfg.t_samples)?;
    writeln!(out, "cc = {:?},{:?},{:?}", cfg.cc.c, cfg.cc.gamma, cfg.cc.eta)?;
    for x in &entries {
        let status = match x.status {
            EntryStatus::Holds => "holds",
            EntryStatus::Violated => "VIOLATED",
            EntryStatus::PreconditionFailed => "precondition-failed",
        };
        writeln!(
            out,
            "{} [{}]: {:e} <= {:e} {status}",
            x.check_id, x.context, x.lhs, x.rhs
        )?;
    }
    art.add("ledger.csv", &entries, Format::Csv)?;
    art.add("ledger.json", &entries, Format::Json)?;
    let worst = entries
        .iter()
        .filter(|x| x.status == EntryStatus::Violated)
        .min_by(|a, b| a.rel_margin.total_cmp(&b.rel_margin));
    if let Some(x) = worst {
        dump(
            art,
            &Counterexample {
                check: format!("{} [{}]", x.check_id, x.context),
                p: x.p,
                q: x.q,
                lhs: x.lhs,
                rhs: x.rhs,
                margin: x.margin,
                rel_margin: x.rel_margin,
                sequence: f,
                seed: cfg.seed,
                config_digest: cfg.digest(),
            },
        )?;
        return Ok(Outcome::Violation);
    }
    Ok(Outcome::Pass)
}

fn counterexample_from_error(cfg: &ExperimentConfig, err: &Error) -> Option<Counterexample> {
    match err {
        Error::Counterexample {
            check,
            p,
            rel_margin,
            sequence,
        } => Some(Counterexample {
            check: check.clone(),
            p: *p,
            q: p / (p - 1.0),
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            rel_margin: *rel_margin,
            sequence: (**sequence).clone(),
            seed: cfg.seed,
            config_digest: cfg.digest(),
        }),
        _ => None,
    }
}

fn search(cfg: &ExperimentConfig, out: &mut dyn Write, art: &mut Artifacts) -> Result<Outcome> {
    let e = ExponentPair::new(cfg.p)?;
    let res: SearchResult = match multi_start(&e, &cfg.search) {
        Ok(r) => r,
        Err(err) => {
            let Some(cx) = counterexample_from_error(cfg, &err) else {
                return Err(err.into());
            };
            writeln!(out, "{err}")?;
            dump(art, &cx)?;
            return Ok(Outcome::Violation);
        }
    };
    writeln!(out, "best_ratio = {:?}", res.best_ratio)?;
    writeln!(out, "start_index = {}", res.start_index)?;
    writeln!(out, "config_digest = {}", res.config_digest)?;
    art.add("search.csv", std::slice::from_ref(&res), Format::Csv)?;
    art.add("search.json", std::slice::from_ref(&res), Format::Json)?;
    let trace: Vec<Point> = res
        .trace
        .iter()
        .flatten()
        .map(|&(i, r)| Point { x: i as f64, y: r })
        .collect();
    art.add("search_trace.plot", &trace, Format::Plot)?;
    art.add_raw("best_f.txt", res.best_f.to_text().into_bytes());
    Ok(Outcome::Pass)
}

fn sweep(cfg: &ExperimentConfig, out: &mut dyn Write, art: &mut Artifacts) -> Result<Outcome> {
    let rows = match p_sweep(&cfg.p_values, &cfg.search) {
        Ok(r) => r,
        Err(err) => {
            let Some(cx) = counterexample_from_error(cfg, &err) else {
                return Err(err.into());
            };
            writeln!(out, "{err}")?;
            dump(art, &cx)?;
            return Ok(Outcome::Violation);
        }
    };
    for r in &rows {
        writeln!(
            out,
            "p = {:?}: best_ratio = {:?} (spike {:?})",
            r.p, r.best_ratio, r.spike_ratio
        )?;
    }
    art.add("sweep.csv", &rows, Format::Csv)?;
    art.add("sweep.json", &rows, Format::Json)?;
    art.add("sweep.plot", &rows, Format::Plot)?;
    Ok(Outcome::Pass)
}

fn probe(cfg: &ExperimentConfig, out: &mut dyn Write, art: &mut Artifacts) -> Result<Outcome> {
    let f = load_sequence(cfg)?;
    let r = quadratic_error_probe(&f, &cfg.scales)?;
    writeln!(out, "slope = {:?}", r.slope)?;
    let pts: Vec<Point> = r.points.iter().map(|&(x, y)| Point { x, y }).collect();
    art.add("probe.plot", &pts, Format::Plot)?;
    art.add("probe.json", std::slice::from_ref(&r), Format::Json)?;
    if r.slope < PROBE_MIN_SLOPE {
        dump(
            art,
            &Counterexample {
                check: "linearization_slope".into(),
                p: f64::NAN,
                q: f64::NAN,
                lhs: PROBE_MIN_SLOPE,
                rhs: r.slope,
                margin: r.slope - PROBE_MIN_SLOPE,
                rel_margin: (r.slope - PROBE_MIN_SLOPE) / PROBE_MIN_SLOPE,
                sequence: f,
                seed: cfg.seed,
                config_digest: cfg.digest(),
            },
        )?;
        return Ok(Outcome::Violation);
    }
    Ok(Outcome::Pass)
}
