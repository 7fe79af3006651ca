//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use su11_core::harness::{
    condition_check, hy_ratio, proof_ledger, quadratic_error_probe, theorem1_margin, theorem2_margin, CcParameters,
    EntryStatus,
};
use su11_core::norms::parseval_check;
use su11_core::sampling::{bounded_sequence, small_l1_sequence, spread_sequence, Window};
use su11_core::search::{multi_start, p_sweep, SearchConfig};
use su11_core::transform::evaluate_product;
use su11_core::{CoefficientSequence, ExponentPair, QuadratureConfig};

const P_GRID: [f64; 5] = [1.1, 1.3, 1.5, 1.7, 1.9];

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn within(elapsed: Duration, target: Duration) -> (bool, String) {
    (
        elapsed < target,
        format!("{:.2}s (target < {}s)", elapsed.as_secs_f64(), target.as_secs()),
    )
}

fn parseval() -> Outcome {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let halves = CoefficientSequence::from_reals(0, &[0.5, 0.5]).unwrap();
    let r = parseval_check(&halves, &cfg);
    let exact = 2.0 * (4.0f64 / 3.0).ln();
    let fixture = (r.integral.value - exact).abs() <= 1e-10 && (r.sum - exact).abs() <= 1e-10;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = bounded_sequence(&mut rng, 10, 0.9).unwrap();
        let r = parseval_check(&f, &cfg);
        worst = worst.max(if r.integral.converged {
            r.residual.abs()
        } else {
            f64::INFINITY
        });
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(10));
    outcome(
        fixture && worst <= 1e-9 && fast,
        format!(
            "fixture |lhs-exact|={:.1e}, 100 draws max |residual|={worst:.1e}, {time}",
            (r.integral.value - exact).abs()
        ),
    )
}

fn su11_invariant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut worst_det: f64 = 0.0;
    let mut min_a = f64::INFINITY;
    for _ in 0..500 {
        let f = bounded_sequence(&mut rng, 10, 0.9).unwrap();
        let t = rng.random::<f64>();
        let g = evaluate_product(&f, t);
        let a2 = g.a.norm_sqr();
        worst_det = worst_det.max((a2 - g.b.norm_sqr() - 1.0).abs() / a2);
        min_a = min_a.min(g.a.norm());
    }
    outcome(
        worst_det <= 1e-10 && min_a >= 1.0 - 1e-12,
        format!("500 (F, t): max ||a|^2-|b|^2-1|/|a|^2={worst_det:.1e}, min |a|={min_a}"),
    )
}

fn trivial_equality() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for p in [1.1, 1.5, 1.9] {
        let e = ExponentPair::new(p).unwrap();
        for (n, r, theta) in [(0, 0.1, 0.0), (3, 0.5, 1.0), (-7, 0.95, 2.5)] {
            let spike = CoefficientSequence::spike(n, Complex64::from_polar(r, theta)).unwrap();
            worst = worst.max((hy_ratio(&spike, &e, &cfg).unwrap().ratio - 1.0).abs());
        }
    }
    outcome(
        worst <= 1e-12,
        format!("spikes at p in {{1.1,1.5,1.9}}: max |ratio-1|={worst:.1e}"),
    )
}

/// Criteria 4 and 5 share the draws.
fn theorem1_and_ledger() -> (Outcome, Outcome) {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let cc = CcParameters::example();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let draws: Vec<CoefficientSequence> = (0..1000)
        .map(|_| small_l1_sequence(&mut rng, 8, 0.5).unwrap())
        .collect();
    let mut worst_rel = f64::INFINITY;
    let mut worst_ratio: f64 = 0.0;
    let mut t1_fail = 0;
    let mut ledger_fail = Vec::new();
    let mut ledger_entries = 0usize;
    for p in P_GRID {
        let e = ExponentPair::new(p).unwrap();
        for (i, f) in draws.iter().enumerate() {
            let r = theorem1_margin(f, &e, &cfg).unwrap();
            worst_rel = worst_rel.min(r.rel_margin);
            worst_ratio = worst_ratio.max(r.ratio);
            let corollary = r.ratio <= 2.5 + 1e-9;
            if r.rel_margin < -1e-9 || !corollary || !r.lhs.converged {
                t1_fail += 1;
            }
            for x in proof_ledger(f, &e, &cc, &cfg, 16).unwrap() {
                let id = x.check_id.as_str();
                if matches!(id, "L8" | "L9") {
                    continue;
                }
                ledger_entries += 1;
                if x.status != EntryStatus::Holds {
                    ledger_fail.push(format!("draw {i} p={p} {id}[{}]", x.context));
                }
            }
        }
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(300));
    let t1 = outcome(
        t1_fail == 0 && fast,
        format!(
            "1000 draws x 5 p: min rel margin={worst_rel:.3e}, max ratio={worst_ratio:.6}, failures={t1_fail}, {time} (with ledger)"
        ),
    );
    let ledger = outcome(
        ledger_fail.is_empty(),
        format!(
            "{ledger_entries} L1-L7 entries, 16 t-points for L3, failures={}{}",
            ledger_fail.len(),
            ledger_fail.first().map(|s| format!(" first: {s}")).unwrap_or_default()
        ),
    );
    (t1, ledger)
}

fn theorem2() -> Outcome {
    let cfg = QuadratureConfig::default();
    let cc = CcParameters::example();
    let p = 1.5;
    let e = ExponentPair::new(p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut fails = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut min_refined = f64::INFINITY;
    for i in 0..200 {
        let f = spread_sequence(&mut rng, p, &cc, 8..=16, 0.05..0.5).unwrap();
        assert!(condition_check(&f, &e, &cc).unwrap().holds);
        let r = theorem2_margin(&f, &e, &cc, &cfg).unwrap();
        let refined = r.secondary.as_ref().unwrap();
        min_margin = min_margin.min(r.rel_margin);
        min_refined = min_refined.min(refined.rel_margin);
        if r.rel_margin < -1e-9 || refined.rel_margin < -1e-9 {
            fails.push(format!("draw {i} theorem"));
        }
        for x in proof_ledger(&f, &e, &cc, &cfg, 16).unwrap() {
            if matches!(x.check_id.as_str(), "L8" | "L9") && x.status != EntryStatus::Holds {
                fails.push(format!("draw {i} {}[{}]", x.check_id, x.context));
            }
        }
    }
    outcome(
        fails.is_empty(),
        format!(
            "200 spread draws at p=1.5, cc=(1,1,1): min rel margin={min_margin:.3e}, min refined={min_refined:.3e}, failures={}{}",
            fails.len(),
            fails.first().map(|s| format!(" first: {s}")).unwrap_or_default()
        ),
    )
}

/// Not a criterion: how the placeholder constants behave at the edge of the
/// spread condition for p close to 2.
fn placeholder_edge_info() -> String {
    let cfg = QuadratureConfig::default();
    let cc = CcParameters::example();
    let p = 1.9;
    let e = ExponentPair::new(p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0066);
    let (mut main, mut refined, mut l8, mut draws_with_l8) = (0, 0, 0, 0);
    for _ in 0..50 {
        let f = spread_sequence(&mut rng, p, &cc, 8..=16, 0.5..0.95).unwrap();
        let r = theorem2_margin(&f, &e, &cc, &cfg).unwrap();
        main += usize::from(!r.holds);
        refined += usize::from(!r.secondary.unwrap().holds);
        let bad = proof_ledger(&f, &e, &cc, &cfg, 16)
            .unwrap()
            .iter()
            .filter(|x| x.check_id == "L8" && x.status == EntryStatus::Violated)
            .count();
        l8 += bad;
        draws_with_l8 += usize::from(bad > 0);
    }
    format!(
        "50 draws at p=1.9 near the condition edge: sharp bound violated {main}x, refined {refined}x, L8 {l8} entries on {draws_with_l8} draws"
    )
}

fn endpoints() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let two = ExponentPair::with_endpoints(2.0).unwrap();
    let one = ExponentPair::with_endpoints(1.0).unwrap();
    let mut dev2: f64 = 0.0;
    let mut max1: f64 = 0.0;
    for _ in 0..50 {
        let f = bounded_sequence(&mut rng, 8, 0.9).unwrap();
        if f.is_zero() {
            continue;
        }
        dev2 = dev2.max((hy_ratio(&f, &two, &cfg).unwrap().ratio - 1.0).abs());
        max1 = max1.max(hy_ratio(&f, &one, &cfg).unwrap().ratio);
    }
    outcome(
        dev2 <= 1e-9 && max1 <= 1.0 + 1e-9,
        format!("50 draws: p=2 max |ratio-1|={dev2:.1e}, p=1 max ratio={max1:.9}"),
    )
}

fn linearization() -> Outcome {
    let halves = CoefficientSequence::from_reals(0, &[0.5, 0.5]).unwrap();
    let r = quadratic_error_probe(&halves, &[0.1, 0.05, 0.025, 0.0125]).unwrap();
    outcome(r.slope >= 2.0 - 0.1, format!("fixture slope={:.4} (>= 1.9)", r.slope))
}

fn search_soundness() -> Outcome {
    let start = Instant::now();
    let cfg = SearchConfig {
        window: Window::of_len(8).unwrap(),
        l1_cap: 0.5,
        starts: 20,
        seed: 2024,
        ..SearchConfig::default()
    };
    let e = ExponentPair::new(1.9).unwrap();
    let on = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| multi_start(&e, &cfg).unwrap())
    };
    let a = on(1);
    let b = on(4);
    let identical = serde_json::to_string(&a).unwrap() == serde_json::to_string(&b).unwrap()
        && a.best_ratio.to_bits() == b.best_ratio.to_bits();
    // the lower end is the spike value 1, which floating point reproduces
    // only to rounding
    let in_range = a.best_ratio >= 1.0 - 1e-12 && a.best_ratio <= 1.0 + 3.0 * 0.5 + 1e-6;
    let (fast, time) = within(start.elapsed(), Duration::from_secs(120));
    outcome(
        identical && in_range && fast,
        format!(
            "best_ratio={:?} (start {}), identical on 1 and 4 threads: {identical}, {time} for both runs",
            a.best_ratio, a.start_index
        ),
    )
}

fn never_silent() -> Outcome {
    let cfg = QuadratureConfig::default();
    // the conjecture is reported, never asserted
    let e = ExponentPair::new(1.5).unwrap();
    let f = CoefficientSequence::from_reals(0, &[0.3, -0.2, 0.1]).unwrap();
    let rep = hy_ratio(&f, &e, &cfg).unwrap();
    let unasserted = !rep.asserted && !rep.is_violation();

    // sweeps only emit lower bounds: every row is at least the spike value
    let sweep_cfg = SearchConfig {
        window: Window::of_len(3).unwrap(),
        starts: 2,
        max_iters: 5,
        seed: 7,
        ..SearchConfig::default()
    };
    let rows = p_sweep(&[1.3, 1.7], &sweep_cfg).unwrap();
    let lower_bounds = rows
        .iter()
        .all(|r| (r.spike_ratio - 1.0).abs() <= 1e-12 && r.best_ratio >= 1.0 - 1e-12);

    // a failed inequality becomes exit code 2 plus a counterexample file
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("aligned.txt");
    let values: Vec<f64> = vec![0.011; 10];
    std::fs::write(&input, CoefficientSequence::from_reals(0, &values).unwrap().to_text()).unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_su11"))
        .args(["ledger", "--p", "1.9", "--cc", "1,1,1"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    let dumped = std::fs::read_to_string(out.join("counterexample.json")).unwrap_or_default();
    let json: serde_json::Value = serde_json::from_str(&dumped).unwrap_or_default();
    let has_fields = ["check", "p", "margin", "rel_margin", "sequence", "config_digest"]
        .iter()
        .all(|k| json.get(k).is_some());
    let surfaced = status.status.code() == Some(2) && has_fields;
    outcome(
        unasserted && lower_bounds && surfaced,
        format!(
            "conjecture unasserted: {unasserted}; sweep rows are lower bounds: {lower_bounds}; violation -> exit {:?} with counterexample ({})",
            status.status.code(),
            json.get("check").and_then(|c| c.as_str()).unwrap_or("missing")
        ),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("parseval", parseval()),
        ("su11_invariant", su11_invariant()),
        ("trivial_equality", trivial_equality()),
    ];
    let (t1, ledger) = theorem1_and_ledger();
    results.push(("theorem1", t1));
    results.push(("ledger_l1_l7", ledger));
    results.push(("theorem2", theorem2()));
    results.push(("endpoints", endpoints()));
    results.push(("linearization", linearization()));
    results.push(("search_soundness", search_soundness()));
    results.push(("never_silent", never_silent()));

    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let tag = if o.ok { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.ok);
    }
    println!("info theorem2_placeholder_edge: {}", placeholder_edge_info());
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
