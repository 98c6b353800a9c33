//! Plain-text tables. Numbers are printed in shortest round-trip form, so
//! they parse back to the same `f64` as the JSON output.

use std::fmt::Write;

use geomsum::BoundsReport;

use crate::commands::{
    AnalyzeDoc, GreedyAnalysis, GreedyDoc, LawSeries, SimComparison, SimulateDoc, SstDoc, SweepDoc,
    SweepTally,
};

/// Shortest round-trip form, in scientific notation when very small or large.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), num)
}

pub struct Table {
    out: String,
    color: bool,
}

impl Table {
    pub fn new(color: bool) -> Self {
        Table {
            out: String::new(),
            color,
        }
    }

    pub fn finish(self) -> String {
        self.out
    }

    fn heading(&mut self, text: &str) {
        let _ = writeln!(self.out, "{text}");
    }

    fn row(&mut self, indent: usize, label: &str, value: impl std::fmt::Display) {
        let pad = 40usize.saturating_sub(indent);
        let _ = writeln!(self.out, "{:indent$}{label:<pad$}{value}", "");
    }

    fn verdict(&self, ok: bool) -> String {
        match (ok, self.color) {
            (true, true) => "\x1b[32mPASS\x1b[0m".into(),
            (false, true) => "\x1b[31mFAIL\x1b[0m".into(),
            (true, false) => "PASS".into(),
            (false, false) => "FAIL".into(),
        }
    }

    fn check(&mut self, indent: usize, label: &str, ok: bool, detail: impl std::fmt::Display) {
        let v = self.verdict(ok);
        self.row(indent, label, format!("{v}  {detail}"));
    }

    fn bounds(&mut self, r: &BoundsReport) {
        let c = &r.checks;
        self.row(4, "E T", num(r.mean_t));
        self.row(4, "E W_j (return sums)", num(r.mean_w));
        self.check(
            4,
            "tv bound >= exact TV",
            c.tv_bound_holds && c.tv_bound_nonnegative,
            format!(
                "bound {} exact {} (+/- {})",
                num(r.tv_bound),
                num(r.tv_exact.value),
                num(r.tv_exact.error_bound)
            ),
        );
        self.check(
            4,
            "U dominates W_j",
            c.dominance,
            format!(
                "worst gap {} at t = {}",
                num(r.dominance.worst_gap),
                r.dominance.worst_t
            ),
        );
        let second = match c.mean_second {
            Some(ok) => format!(
                "{} ({})",
                num(r.mean_upper_2),
                if ok { "ok" } else { "violated" }
            ),
            None => format!("{} (not asserted)", num(r.mean_upper_2)),
        };
        self.check(
            4,
            "mean bounds",
            c.mean_first && c.mean_second.unwrap_or(true),
            format!(
                "E W_j {} <= {} <= {}",
                num(r.mean_w),
                num(r.mean_upper_1),
                second
            ),
        );
        self.check(
            4,
            "lower bound on E T",
            c.sst_mean_lower,
            num(r.sst_mean_lower),
        );
        self.check(
            4,
            "MGF bounds",
            c.mgf,
            format!("{} points", r.mgf_checks.len()),
        );
        for m in &r.mgf_checks {
            self.row(
                6,
                &format!("theta {}", num(m.theta)),
                format!(
                    "gate {} bound {} exact {} {}",
                    opt(m.gate),
                    opt(m.bound),
                    opt(m.exact),
                    self.verdict(m.holds)
                ),
            );
        }
        self.row(4, "report", self.verdict(r.all_pass));
    }

    fn greedy(&mut self, g: &GreedyAnalysis) {
        let d = &g.dual;
        self.row(4, "c_r", format!("{:?}", d.c));
        self.row(4, "A_r", format!("{:?}", d.sets));
        self.row(
            4,
            "absorb / stay / other",
            format!(
                "{} / {} / {}",
                num(d.p_absorb),
                num(d.p_stay),
                num(d.p_other)
            ),
        );
        self.row(4, "regime", format!("{:?}", g.classification.regime));
        self.row(4, "mean", num(g.mean));
        self.check(
            4,
            "intertwining",
            g.intertwining_holds,
            format!("residual {}", num(g.intertwining_residual)),
        );
        self.check(4, "fastest SST below greedy", g.fastest_dominated, "");
    }

    pub fn analyze(mut self, doc: &AnalyzeDoc) -> String {
        let c = &doc.chain;
        self.heading(&format!(
            "chain: {} states, reversible {} (defect {})",
            c.states.len(),
            c.reversible,
            num(c.detailed_balance_defect)
        ));
        for (label, p) in c.states.iter().zip(&c.pi) {
            self.row(2, &format!("pi[{label}]"), num(*p));
        }
        for s in &doc.states {
            self.heading(&format!("\nstate {} (index {})", s.state, s.j));
            self.row(
                2,
                "E W_j direct / return sums",
                format!("{} / {}", num(s.mean_w_direct), num(s.mean_w_returns)),
            );
            self.heading("  fastest SST");
            self.bounds(&s.fastest);
            self.heading("  greedy dual SST");
            self.greedy(&s.greedy);
            self.bounds(&s.greedy.report);
            match &s.return_condition.first_violation {
                None => self.row(
                    2,
                    "hitting condition",
                    format!("holds up to t = {}", s.return_condition.horizon),
                ),
                Some(v) => self.row(
                    2,
                    "hitting condition",
                    format!("fails at t = {}, y = {} (gap {})", v.t, v.y, num(v.gap)),
                ),
            }
            self.check(
                2,
                "no hit before SST",
                s.no_hit.holds,
                format!(
                    "max discrepancy {} up to t = {}",
                    num(s.no_hit.max_discrepancy),
                    s.no_hit.horizon
                ),
            );
        }
        let k = &doc.chain_checks;
        self.heading("\nchain checks");
        self.row(
            2,
            "worst-case E T_(l)",
            format!(
                "{} (state {})",
                num(k.worst_case.t_star),
                k.worst_case.argmax_state
            ),
        );
        self.check(
            2,
            "average hitting time",
            k.worst_case.avg_hitting_holds,
            format!(
                "{} <= {}",
                num(k.worst_case.average_hitting_time),
                num(k.worst_case.avg_hitting_bound)
            ),
        );
        let e = &k.ergodic_average;
        self.check(
            2,
            &format!("ergodic average, n = {}", e.n),
            e.holds,
            format!("worst TV {} <= {}", num(e.worst_tv), num(e.bound)),
        );
        let w = &k.worst_state;
        let detail = match (w.applicable, w.m, w.column_condition_fails_at) {
            (true, Some(m), _) => {
                format!("applicable, m = {m}, checked to t = {}", w.horizon_checked)
            }
            (false, _, Some(t)) => format!("not applicable: column condition fails at t = {t}"),
            _ => "not applicable: chain is not reversible".to_string(),
        };
        match w.conclusion_holds {
            Some(ok) => self.check(2, "worst-start state", ok, detail),
            None => self.row(2, "worst-start state", format!("n/a  {detail}")),
        }
        if let Some(r) = &doc.reference {
            self.heading("\nreference");
            self.row(
                2,
                &format!("older two-state bound (delta {})", num(r.delta)),
                num(r.comparison_two_state_bound),
            );
            self.row(2, "this bound", num(r.tv_bound));
        }
        let v = self.verdict(doc.all_pass);
        self.heading(&format!("\noverall: {v}"));
        self.finish()
    }

    fn tally(&mut self, t: &SweepTally) {
        self.row(
            4,
            "reports / failed",
            format!("{} / {}", t.reports, t.failed_reports),
        );
        self.row(4, "tv bound failures", t.tv_bound);
        self.row(4, "dominance failures", t.dominance);
        self.row(4, "mean chain failures", t.mean_chain);
        self.row(4, "MGF failures", t.mgf);
        self.row(4, "lower bound failures", t.sst_mean_lower);
        self.row(4, "min tv slack", num(t.min_tv_slack));
        self.row(4, "max dominance gap", num(t.max_dominance_gap));
        self.row(4, "min mean slack", num(t.min_mean_slack));
        self.row(4, "min lower-bound slack", num(t.min_lower_slack));
    }

    pub fn sweep(mut self, doc: &SweepDoc) -> String {
        self.heading(&format!(
            "sweep: {} chains of size {}, seed {}",
            doc.count, doc.size, doc.seed
        ));
        if let Some(t) = &doc.fastest {
            self.heading("  fastest SST");
            self.tally(t);
        }
        if let Some(g) = &doc.greedy {
            self.heading("  greedy dual SST");
            self.tally(&g.tally);
            self.row(4, "intertwining failures", g.intertwining_failures);
            self.row(4, "fastest not below greedy", g.fastest_not_dominated);
        }
        self.row(2, "reversible chains", doc.reversible_chains);
        self.row(2, "worst-state applicable", doc.worst_state_applicable);
        self.row(2, "worst-state failures", doc.worst_state_failures);
        self.row(2, "chain check failures", doc.chain_check_failures);
        let v = self.verdict(doc.all_pass);
        self.heading(&format!("overall: {v}"));
        self.finish()
    }

    fn comparison(&mut self, label: &str, c: &SimComparison) {
        self.heading(&format!("  {label}"));
        self.row(
            4,
            "empirical / exact mean",
            format!("{} / {}", num(c.empirical_mean), num(c.exact_mean)),
        );
        self.check(
            4,
            "TV to exact law",
            c.pass,
            format!("{} <= {}", num(c.tv), num(c.threshold)),
        );
    }

    pub fn simulate(mut self, doc: &SimulateDoc) -> String {
        self.heading(&format!(
            "simulate: state {}, {} samples over {} replicas, seed {}",
            doc.state, doc.samples, doc.replicas, doc.seed
        ));
        self.comparison("hitting time from pi", &doc.hitting_time);
        self.comparison("greedy dual SST", &doc.greedy_sst);
        let v = self.verdict(doc.all_pass);
        self.heading(&format!("overall: {v}"));
        self.finish()
    }

    pub fn greedy_doc(mut self, doc: &GreedyDoc) -> String {
        self.heading(&format!("greedy dual for state {}", doc.state));
        self.greedy(&doc.greedy);
        for e in &doc.greedy.dual.dual_row {
            self.row(4, &format!("P*(S_j, {:?})", e.set), num(e.prob));
        }
        self.finish()
    }

    fn series(&mut self, label: &str, s: &LawSeries) {
        self.heading(&format!(
            "  {label}: mean {}, tail bound {}",
            num(s.mean),
            num(s.tail_bound)
        ));
        self.row(4, "t", "pmf / survival");
        for (t, (p, q)) in s.pmf.iter().zip(&s.survival).enumerate() {
            self.row(4, &t.to_string(), format!("{} / {}", num(*p), num(*q)));
        }
    }

    pub fn sst(mut self, doc: &SstDoc) -> String {
        self.heading(&format!("laws for state {}", doc.state));
        self.series("fastest SST", &doc.fastest);
        self.series("greedy dual SST", &doc.greedy);
        self.series("hitting time from pi", &doc.hitting_time);
        let r = &doc.return_probability;
        self.heading(&format!(
            "  return-probability survival ({} issues, hitting condition {})",
            r.issues.len(),
            if r.return_condition.holds {
                "holds"
            } else {
                "fails"
            }
        ));
        for (t, s) in r.survival.iter().enumerate() {
            self.row(4, &t.to_string(), num(*s));
        }
        self.finish()
    }
}
