use num_complex::Complex64;
use serde::Serialize;

use super::{alpha_delta, condition_check, CcParameters};
use crate::error::{Error, Result};
use crate::norms::{lp_sequence_norm, nl_weight_sequence, torus_weight, ExponentPair};
use crate::quadrature::{lq_norms_periodic, Precision, QuadratureConfig};
use crate::sequence::{derive_coefficients, CoefficientSequence};
use crate::transform::{phase, transform_trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Holds,
    Violated,
    PreconditionFailed,
}

/// One step of the proof chain, normalized as `lhs <= rhs`.
///
/// Quantities are still evaluated when a hypothesis fails (where they are
/// finite); the status then records `PreconditionFailed` instead of a
/// verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub check_id: String,
    pub status: EntryStatus,
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    /// `margin / max(rhs, lhs)`.
    pub rel_margin: f64,
    pub p: f64,
    pub q: f64,
    pub converged: bool,
    pub context: String,
}

struct Builder {
    p: f64,
    q: f64,
    tol: f64,
    entries: Vec<LedgerEntry>,
}

impl Builder {
    fn push(&mut self, id: &str, lhs: f64, rhs: f64, converged: bool, context: String, precondition: bool) {
        let margin = rhs - lhs;
        let rel_margin = relative(margin, lhs, rhs);
        let status = if !precondition {
            EntryStatus::PreconditionFailed
        } else if rel_margin >= -self.tol && converged {
            EntryStatus::Holds
        } else {
            EntryStatus::Violated
        };
        self.entries.push(LedgerEntry {
            check_id: id.to_string(),
            status,
            holds: status == EntryStatus::Holds,
            lhs,
            rhs,
            margin,
            rel_margin,
            p: self.p,
            q: self.q,
            converged,
            context,
        });
    }
}

/// Runs every step of both proof chains on a concrete `F`.
///
/// Entries come out in the fixed order L1, L2a, L2b, L3 (per N), L4 (per N),
/// L5 (per N), L6a, L6b, L7, L8 (per N), L9, with N running over
/// `N_min - 1 ..= N_max`. L3 reports the worst of `t_samples` uniform points
/// `t_j = j / t_samples` for each N. All quadratures are binary64 and the
/// pass tolerance is `1e-9` relative; an entry whose norms failed to converge
/// is reported as violated.
pub fn proof_ledger(
    seq: &CoefficientSequence,
    e: &ExponentPair,
    cc: &CcParameters,
    cfg: &QuadratureConfig,
    t_samples: usize,
) -> Result<Vec<LedgerEntry>> {
    if seq.is_zero() {
        return Err(Error::ZeroSequence);
    }
    if t_samples == 0 {
        return Err(Error::InvalidArgument("t_samples must be positive".into()));
    }
    let seq = seq.trimmed();
    let (n_min, n_max) = seq.support().expect("nonzero sequence has support");
    let (p, q) = (e.p(), e.q());
    let mut b = Builder {
        p,
        q,
        tol: Precision::Binary64.margin_tolerance(),
        entries: Vec::new(),
    };

    let l1 = seq.l1_norm();
    let lp = seq.lp_norm(p);
    let weights = nl_weight_sequence(&seq);
    let derived = derive_coefficients(&seq);
    let prod_a: f64 = derived.a_diag.iter().product();
    // mods[k] = |F_{N_min + k}|, the weight carried into step k + 1
    let mods: Vec<f64> = seq.moduli();
    let indices: Vec<i64> = (n_min - 1..=n_max).collect();
    let len = indices.len();

    b.push("L1", lp, lp_sequence_norm(&weights, p), true, String::new(), true);

    let small = l1 < 1.0;
    let half = l1 <= 0.5;
    let l2a_rhs = if small {
        1.0 / (1.0 - l1 * l1).sqrt()
    } else {
        f64::INFINITY
    };
    b.push("L2a", prod_a, l2a_rhs, true, format!("l1={l1:?}"), small);
    b.push("L2b", prod_a, 1.0 + l1 * l1, true, format!("l1={l1:?}"), half);

    // L3: pointwise recursion bound, worst t per N
    let mut worst: Vec<(f64, f64, f64, f64)> = vec![(0.0, 0.0, f64::INFINITY, 0.0); len];
    for j in 0..t_samples {
        let t = j as f64 / t_samples as f64;
        let trace = transform_trace(&seq, t)?;
        let mut partial_sum = Complex64::new(0.0, 0.0);
        let mut carried = 0.0;
        for (k, &n) in indices.iter().enumerate() {
            if k > 0 {
                carried += mods[k - 1] * trace.reduced_size(n - 1);
                partial_sum += seq.get(n) * phase(n, t);
            }
            let lhs = trace.reduced_size(n);
            let rhs = carried + partial_sum.norm();
            let rel = relative(rhs - lhs, lhs, rhs);
            if rel < worst[k].2 {
                worst[k] = (lhs, rhs, rel, t);
            }
        }
    }
    for (k, &n) in indices.iter().enumerate() {
        let (lhs, rhs, _, t) = worst[k];
        b.push("L3", lhs, rhs, true, format!("N={n};t={t:?}"), true);
    }

    // one vector quadrature: [W, |b|, r_N for each N, |S_N| for each N]
    let norms = lq_norms_periodic(
        2 + 2 * len,
        |t, out: &mut [f64]| {
            let trace = transform_trace(&seq, t).expect("nonzero sequence");
            let last = trace.partial(n_max);
            out[0] = torus_weight(&last);
            out[1] = last.b.norm();
            let mut partial_sum = Complex64::new(0.0, 0.0);
            for (k, &n) in indices.iter().enumerate() {
                if k > 0 {
                    partial_sum += seq.get(n) * phase(n, t);
                }
                out[2 + k] = trace.reduced_size(n);
                out[2 + len + k] = partial_sum.norm();
            }
        },
        q,
        cfg,
    );
    let all_converged = norms.iter().all(|r| r.converged);
    let w_norm = norms[0];
    let b_norm = norms[1];
    let r_norms: Vec<f64> = norms[2..2 + len].iter().map(|r| r.value).collect();
    let s_norms: Vec<f64> = norms[2 + len..].iter().map(|r| r.value).collect();

    let mut carried = 0.0;
    for (k, &n) in indices.iter().enumerate() {
        if k > 0 {
            carried += mods[k - 1] * r_norms[k - 1];
        }
        let conv = norms[2 + k].converged && norms[2..2 + k].iter().all(|r| r.converged);
        b.push("L4", r_norms[k], carried + lp, conv, format!("N={n}"), true);
    }
    let l5_rhs = if small { lp / (1.0 - l1) } else { f64::INFINITY };
    for (k, &n) in indices.iter().enumerate() {
        b.push(
            "L5",
            r_norms[k],
            l5_rhs,
            norms[2 + k].converged,
            format!("N={n}"),
            small,
        );
    }

    b.push(
        "L6a",
        w_norm.value,
        b_norm.value,
        w_norm.converged && b_norm.converged,
        "log-weight vs |b|".into(),
        true,
    );
    let l6_rhs = if small { prod_a * lp / (1.0 - l1) } else { f64::INFINITY };
    b.push(
        "L6b",
        b_norm.value,
        l6_rhs,
        b_norm.converged,
        "|b| vs product bound".into(),
        small,
    );

    let sup_s = s_norms.iter().copied().fold(0.0, f64::max);
    b.push(
        "L7",
        w_norm.value,
        (1.0 + 3.0 * l1) * sup_s,
        all_converged,
        format!("sup_N={sup_s:?}"),
        half,
    );

    let cond = condition_check(&seq, e, cc)?;
    let factor = 1.0 - 3.0 * l1;
    for (k, &n) in indices.iter().enumerate() {
        let truncated_p = seq.truncated(n).lp_norm(p);
        let case = if truncated_p <= factor * lp { "case1" } else { "case2" };
        b.push(
            "L8",
            s_norms[k],
            factor * lp,
            norms[2 + len + k].converged,
            format!("N={n};{case}"),
            cond.holds,
        );
    }

    let (alpha, delta) = alpha_delta(cc);
    let l9_lhs = 3.0 * l1 + (3.0 * l1 / cc.c).powf(1.0 / cc.gamma);
    let l9_rhs = (l1 / delta).powf(1.0 / alpha);
    b.push(
        "L9",
        l9_lhs,
        l9_rhs,
        true,
        format!("alpha={alpha:?};delta={delta:?}"),
        cond.holds,
    );
    Ok(b.entries)
}

fn relative(margin: f64, lhs: f64, rhs: f64) -> f64 {
    let scale = rhs.abs().max(lhs.abs());
    if scale > 0.0 {
        margin / scale
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(values: &[f64], p: f64) -> Vec<LedgerEntry> {
        let f = CoefficientSequence::from_reals(0, values).unwrap();
        let e = ExponentPair::new(p).unwrap();
        proof_ledger(&f, &e, &CcParameters::example(), &QuadratureConfig::default(), 16).unwrap()
    }

    fn ids(entries: &[LedgerEntry], status: EntryStatus) -> Vec<String> {
        entries
            .iter()
            .filter(|e| e.status == status)
            .map(|e| format!("{}[{}]", e.check_id, e.context))
            .collect()
    }

    #[test]
    fn spike_ledger() {
        let entries = run(&[0.1], 1.5);
        let failed_pre: Vec<_> = entries
            .iter()
            .filter(|e| e.status == EntryStatus::PreconditionFailed)
            .map(|e| e.check_id.as_str())
            .collect();
        assert!(failed_pre.iter().all(|id| *id == "L8" || *id == "L9"));
        assert!(failed_pre.contains(&"L8") && failed_pre.contains(&"L9"));
        assert!(ids(&entries, EntryStatus::Violated).is_empty());
        // L4 at N = N_min is an equality: |F_0| <= ‖F‖_p
        let l4 = entries
            .iter()
            .find(|e| e.check_id == "L4" && e.context == "N=0")
            .unwrap();
        assert!(l4.margin.abs() < 1e-15);
    }

    #[test]
    fn two_term_ledger_has_positive_margins() {
        let entries = run(&[0.2, 0.2], 1.5);
        assert!(ids(&entries, EntryStatus::Violated).is_empty());
        for id in ["L1", "L2a", "L2b", "L5", "L6a", "L6b", "L7"] {
            for e in entries.iter().filter(|e| e.check_id == id) {
                assert!(e.margin > 0.0, "{id} {}: {}", e.context, e.margin);
            }
        }
        let n_values: Vec<_> = entries
            .iter()
            .filter(|e| e.check_id == "L3")
            .map(|e| &e.context)
            .collect();
        assert_eq!(n_values.len(), 3);
    }

    #[test]
    fn spread_ledger_holds_everywhere() {
        let entries = run(&[0.001; 10], 1.5);
        assert_eq!(ids(&entries, EntryStatus::Holds).len(), entries.len(), "{entries:#?}");
        let l8: Vec<_> = entries.iter().filter(|e| e.check_id == "L8").collect();
        assert_eq!(l8.len(), 11);
        assert_eq!(l8[0].context, "N=-1;case1");
        assert!(l8.last().unwrap().context.ends_with("case2"));
    }

    #[test]
    fn large_l1_marks_preconditions() {
        let entries = run(&[0.5, 0.5], 1.5);
        let pre = ids(&entries, EntryStatus::PreconditionFailed);
        for id in ["L2a", "L2b", "L5", "L6b", "L7", "L8", "L9"] {
            assert!(pre.iter().any(|s| s.starts_with(id)), "{id}");
        }
        assert!(ids(&entries, EntryStatus::Violated).is_empty());
        assert!(proof_ledger(
            &CoefficientSequence::zero(),
            &ExponentPair::new(1.5).unwrap(),
            &CcParameters::example(),
            &QuadratureConfig::default(),
            16
        )
        .is_err());
    }
}
