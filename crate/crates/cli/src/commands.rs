//! Report documents built by each subcommand. Field names are the JSON
//! schema; the table renderer reads the same structs.

use geomsum::bounds::{
    self, check_worst_start_state, ergodic_average_check, worst_case_sst, BoundsOptions,
    ErgodicAverageCheck, WorstCaseSst, WorstStateCheck,
};
use geomsum::dist::{check_stochastic_dominance, DOMINANCE_TOL};
use geomsum::greedy::{
    classify_greedy_case, dual_sst_dist, dual_sst_mean, greedy_dual_row, intertwining_residual,
};
use geomsum::hitting::hitting_time_dist;
use geomsum::sim::{
    empirical_tv, replica_rng, sample_dual_sst, sample_hitting_time, sample_many, tv_threshold,
    SimConfig,
};
use geomsum::sst::{
    check_no_hit_before_sst, check_return_condition, default_horizon, fastest_sst_restricted,
    return_prob_survival, NoHitCheck, ReturnConditionCheck, ReturnProbTrace,
};
use geomsum::{fixtures, BoundsReport, GreedyClass, GreedyDual, IntDist, MarkovChain, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Tolerance for the intertwining check of the greedy dual.
pub const INTERTWINING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct ChainSummary {
    pub states: Vec<String>,
    pub pi: Vec<f64>,
    pub reversible: bool,
    pub detailed_balance_defect: f64,
}

impl ChainSummary {
    pub fn new(chain: &MarkovChain, tol: f64) -> Self {
        ChainSummary {
            states: chain.labels().to_vec(),
            pi: chain.stationary().to_vec(),
            reversible: chain.is_reversible(tol),
            detailed_balance_defect: chain.detailed_balance_defect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GreedyAnalysis {
    pub dual: GreedyDual,
    pub classification: GreedyClass,
    pub mean: f64,
    /// Largest entry of `Lambda P - P* Lambda` on the `S_j` row.
    pub intertwining_residual: f64,
    pub intertwining_holds: bool,
    /// Fastest SST stochastically below the greedy one.
    pub fastest_dominated: bool,
    pub report: BoundsReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateAnalysis {
    pub state: String,
    pub j: usize,
    pub mean_w_direct: f64,
    pub mean_w_returns: f64,
    pub fastest: BoundsReport,
    pub greedy: GreedyAnalysis,
    pub return_condition: ReturnConditionCheck,
    pub no_hit: NoHitCheck,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainChecks {
    pub worst_case: WorstCaseSst,
    pub ergodic_average: ErgodicAverageCheck,
    pub worst_state: WorstStateCheck,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Reference {
    pub delta: f64,
    /// Older geometric-approximation constant for the two-state chain.
    pub comparison_two_state_bound: f64,
    /// This bound on the same chain and target.
    pub tv_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeDoc {
    pub chain: ChainSummary,
    pub states: Vec<StateAnalysis>,
    pub chain_checks: ChainChecks,
    pub reference: Option<Reference>,
    pub all_pass: bool,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub opts: BoundsOptions,
    pub horizon: Option<usize>,
    pub ergodic_steps: usize,
}

pub fn analyze_state(chain: &MarkovChain, j: usize, s: &Settings) -> Result<StateAnalysis> {
    let opts = &s.opts;
    let hit = hitting_time_dist(chain, j, opts.tail_eps)?;
    let fastest_sst = fastest_sst_restricted(chain, j, opts.tail_eps)?;
    let fastest = bounds::tv_report_with(chain, j, &fastest_sst, &hit, opts)?;

    let dual = greedy_dual_row(chain, j)?;
    let greedy_sst = dual_sst_dist(&dual, opts.tail_eps)?;
    let residual = intertwining_residual(chain, &dual)?;
    let greedy = GreedyAnalysis {
        classification: classify_greedy_case(chain, j)?,
        mean: dual_sst_mean(&dual)?,
        intertwining_residual: residual,
        intertwining_holds: residual <= INTERTWINING_TOL,
        fastest_dominated: check_stochastic_dominance(
            &greedy_sst.dist,
            &fastest_sst.dist,
            DOMINANCE_TOL,
        )
        .holds,
        report: bounds::tv_report_with(chain, j, &greedy_sst, &hit, opts)?,
        dual,
    };

    let horizon = s
        .horizon
        .unwrap_or_else(|| default_horizon(fastest_sst.dist.n_max() + 1));
    let return_condition = check_return_condition(chain, j, horizon, opts.tol)?;
    let no_hit = check_no_hit_before_sst(chain, j, horizon, opts.tol)?;
    let all_pass = fastest.all_pass
        && greedy.report.all_pass
        && greedy.intertwining_holds
        && greedy.fastest_dominated
        && no_hit.holds;
    Ok(StateAnalysis {
        state: chain.labels()[j].clone(),
        j,
        mean_w_direct: hit.mean_direct,
        mean_w_returns: hit.mean_returns,
        fastest,
        greedy,
        return_condition,
        no_hit,
        all_pass,
    })
}

pub fn chain_checks(chain: &MarkovChain, s: &Settings) -> Result<ChainChecks> {
    let opts = &s.opts;
    let worst_case = worst_case_sst(chain, opts.tail_eps, opts.tol, Some(s.ergodic_steps))?;
    let ergodic_average = ergodic_average_check(chain, s.ergodic_steps, opts.tail_eps, opts.tol)?;
    let horizon = s
        .horizon
        .unwrap_or_else(|| default_horizon(worst_case.t_star.ceil() as usize));
    let worst_state = check_worst_start_state(chain, horizon, opts.tol, opts.tail_eps)?;
    let all_pass = worst_case.avg_hitting_holds
        && ergodic_average.holds
        && worst_state.conclusion_holds != Some(false);
    Ok(ChainChecks {
        worst_case,
        ergodic_average,
        worst_state,
        all_pass,
    })
}

pub fn analyze(
    chain: &MarkovChain,
    targets: &[usize],
    s: &Settings,
    two_state_delta: Option<f64>,
) -> Result<AnalyzeDoc> {
    let states = targets
        .iter()
        .map(|&j| analyze_state(chain, j, s))
        .collect::<Result<Vec<_>>>()?;
    let checks = chain_checks(chain, s)?;
    let reference = match two_state_delta {
        Some(delta) => {
            let sst = fastest_sst_restricted(chain, 1, s.opts.tail_eps)?;
            Some(Reference {
                delta,
                comparison_two_state_bound: fixtures::comparison_two_state_bound(delta),
                tv_bound: bounds::tv_bound(chain, 1, &sst, s.opts.tail_eps)?,
            })
        }
        None => None,
    };
    let all_pass = states.iter().all(|a| a.all_pass) && checks.all_pass;
    Ok(AnalyzeDoc {
        chain: ChainSummary::new(chain, s.opts.tol),
        states,
        chain_checks: checks,
        reference,
        all_pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepSst {
    Fastest,
    Greedy,
    Both,
}

/// Failure counts and tightest margins over every report of one SST kind.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepTally {
    pub reports: usize,
    pub failed_reports: usize,
    pub tv_bound: usize,
    pub dominance: usize,
    pub mean_chain: usize,
    pub mgf: usize,
    pub sst_mean_lower: usize,
    /// Smallest `tv_bound - tv_exact`.
    pub min_tv_slack: f64,
    /// Largest survival excess of `W_j` over `U`.
    pub max_dominance_gap: f64,
    /// Smallest `mean_upper_1 - E W_j`.
    pub min_mean_slack: f64,
    /// Smallest `E T - lower bound`.
    pub min_lower_slack: f64,
}

impl SweepTally {
    fn empty() -> Self {
        SweepTally {
            min_tv_slack: f64::INFINITY,
            max_dominance_gap: f64::NEG_INFINITY,
            min_mean_slack: f64::INFINITY,
            min_lower_slack: f64::INFINITY,
            ..Default::default()
        }
    }

    fn add(&mut self, r: &BoundsReport) {
        let c = &r.checks;
        self.reports += 1;
        self.failed_reports += usize::from(!r.all_pass);
        self.tv_bound += usize::from(!(c.tv_bound_holds && c.tv_bound_nonnegative));
        self.dominance += usize::from(!c.dominance);
        self.mean_chain += usize::from(!(c.mean_first && c.mean_second.unwrap_or(true)));
        self.mgf += usize::from(!c.mgf);
        self.sst_mean_lower += usize::from(!c.sst_mean_lower);
        self.min_tv_slack = self.min_tv_slack.min(r.tv_bound - r.tv_exact.value);
        self.max_dominance_gap = self.max_dominance_gap.max(r.dominance.worst_gap);
        self.min_mean_slack = self.min_mean_slack.min(r.mean_upper_1 - r.mean_w);
        self.min_lower_slack = self.min_lower_slack.min(r.mean_t - r.sst_mean_lower);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GreedySweep {
    pub tally: SweepTally,
    pub intertwining_failures: usize,
    pub fastest_not_dominated: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepDoc {
    pub count: usize,
    pub size: usize,
    pub seed: u64,
    pub sst: SweepSst,
    pub fastest: Option<SweepTally>,
    pub greedy: Option<GreedySweep>,
    pub reversible_chains: usize,
    pub worst_state_applicable: usize,
    pub worst_state_failures: usize,
    pub chain_check_failures: usize,
    pub all_pass: bool,
}

struct ChainOutcome {
    fastest: Vec<BoundsReport>,
    greedy: Vec<(BoundsReport, bool, bool)>,
    checks: ChainChecks,
}

fn sweep_one(chain: &MarkovChain, kind: SweepSst, s: &Settings) -> Result<ChainOutcome> {
    let opts = &s.opts;
    let mut fastest = Vec::new();
    let mut greedy = Vec::new();
    for j in 0..chain.len() {
        let hit = hitting_time_dist(chain, j, opts.tail_eps)?;
        let fast = fastest_sst_restricted(chain, j, opts.tail_eps)?;
        if kind != SweepSst::Greedy {
            fastest.push(bounds::tv_report_with(chain, j, &fast, &hit, opts)?);
        }
        if kind != SweepSst::Fastest {
            let dual = greedy_dual_row(chain, j)?;
            let sst = dual_sst_dist(&dual, opts.tail_eps)?;
            let valid = intertwining_residual(chain, &dual)? <= INTERTWINING_TOL;
            let ordered = check_stochastic_dominance(&sst.dist, &fast.dist, DOMINANCE_TOL).holds;
            greedy.push((
                bounds::tv_report_with(chain, j, &sst, &hit, opts)?,
                valid,
                ordered,
            ));
        }
    }
    Ok(ChainOutcome {
        fastest,
        greedy,
        checks: chain_checks(chain, s)?,
    })
}

pub fn sweep(
    count: usize,
    size: usize,
    seed: u64,
    kind: SweepSst,
    s: &Settings,
) -> Result<SweepDoc> {
    let mut rng = replica_rng(seed, 0);
    let chains = (0..count)
        .map(|_| fixtures::random_dirichlet(size, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let outcomes = chains
        .par_iter()
        .map(|c| sweep_one(c, kind, s))
        .collect::<Result<Vec<_>>>()?;

    let mut fastest = (kind != SweepSst::Greedy).then(SweepTally::empty);
    let mut greedy = (kind != SweepSst::Fastest).then(|| GreedySweep {
        tally: SweepTally::empty(),
        intertwining_failures: 0,
        fastest_not_dominated: 0,
    });
    let mut doc = SweepDoc {
        count,
        size,
        seed,
        sst: kind,
        fastest: None,
        greedy: None,
        reversible_chains: 0,
        worst_state_applicable: 0,
        worst_state_failures: 0,
        chain_check_failures: 0,
        all_pass: true,
    };
    for o in &outcomes {
        if let Some(t) = fastest.as_mut() {
            o.fastest.iter().for_each(|r| t.add(r));
        }
        if let Some(g) = greedy.as_mut() {
            for (r, valid, ordered) in &o.greedy {
                g.tally.add(r);
                g.intertwining_failures += usize::from(!valid);
                g.fastest_not_dominated += usize::from(!ordered);
            }
        }
        let ws = &o.checks.worst_state;
        doc.reversible_chains += usize::from(ws.reversible);
        doc.worst_state_applicable += usize::from(ws.applicable);
        doc.worst_state_failures += usize::from(ws.conclusion_holds == Some(false));
        doc.chain_check_failures += usize::from(!o.checks.all_pass);
    }
    doc.all_pass = doc.chain_check_failures == 0
        && fastest.as_ref().is_none_or(|t| t.failed_reports == 0)
        && greedy.as_ref().is_none_or(|g| {
            g.tally.failed_reports == 0
                && g.intertwining_failures == 0
                && g.fastest_not_dominated == 0
        });
    doc.fastest = fastest;
    doc.greedy = greedy;
    Ok(doc)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimComparison {
    pub empirical_mean: f64,
    pub exact_mean: f64,
    pub tv: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn compare(samples: &[u64], exact: &IntDist) -> Result<SimComparison> {
    let tv = empirical_tv(samples, exact)?;
    let threshold = tv_threshold(exact, samples.len());
    Ok(SimComparison {
        empirical_mean: samples.iter().map(|&x| x as f64).sum::<f64>() / samples.len() as f64,
        exact_mean: exact.mean().value(),
        tv,
        threshold,
        pass: tv <= threshold,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateDoc {
    pub state: String,
    pub seed: u64,
    pub samples: usize,
    pub replicas: usize,
    pub hitting_time: SimComparison,
    pub greedy_sst: SimComparison,
    pub all_pass: bool,
}

pub fn simulate(
    chain: &MarkovChain,
    j: usize,
    cfg: &SimConfig,
    tail_eps: f64,
) -> Result<SimulateDoc> {
    let pi = chain.stationary().clone();
    let exact_w = hitting_time_dist(chain, j, tail_eps)?.dist;
    let w = sample_many(cfg, |rng| sample_hitting_time(chain, j, &pi, rng))?;
    let dual = greedy_dual_row(chain, j)?;
    let exact_t = dual_sst_dist(&dual, tail_eps)?.dist;
    let t = sample_many(cfg, |rng| sample_dual_sst(&dual, rng))?;
    let hitting_time = compare(&w, &exact_w)?;
    let greedy_sst = compare(&t, &exact_t)?;
    Ok(SimulateDoc {
        state: chain.labels()[j].clone(),
        seed: cfg.seed,
        samples: cfg.total(),
        replicas: cfg.replicas,
        all_pass: hitting_time.pass && greedy_sst.pass,
        hitting_time,
        greedy_sst,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GreedyDoc {
    pub state: String,
    pub pi: Vec<f64>,
    pub greedy: GreedyAnalysis,
}

pub fn greedy(chain: &MarkovChain, j: usize, opts: &BoundsOptions) -> Result<GreedyDoc> {
    let s = Settings {
        opts: opts.clone(),
        horizon: None,
        ergodic_steps: 1,
    };
    Ok(GreedyDoc {
        state: chain.labels()[j].clone(),
        pi: chain.stationary().to_vec(),
        greedy: analyze_state(chain, j, &s)?.greedy,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LawSeries {
    pub pmf: Vec<f64>,
    pub survival: Vec<f64>,
    pub tail_bound: f64,
    pub mean: f64,
}

impl LawSeries {
    fn new(d: &IntDist) -> Self {
        LawSeries {
            pmf: d.pmf().to_vec(),
            survival: d.survival_curve(),
            tail_bound: d.tail_bound(),
            mean: d.mean().value(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SstDoc {
    pub state: String,
    pub fastest: LawSeries,
    pub greedy: LawSeries,
    pub return_probability: ReturnProbTrace,
    pub hitting_time: LawSeries,
}

pub fn sst(chain: &MarkovChain, j: usize, tail_eps: f64) -> Result<SstDoc> {
    let fastest = fastest_sst_restricted(chain, j, tail_eps)?;
    let dual = greedy_dual_row(chain, j)?;
    let greedy = dual_sst_dist(&dual, tail_eps)?;
    Ok(SstDoc {
        state: chain.labels()[j].clone(),
        fastest: LawSeries::new(&fastest.dist),
        greedy: LawSeries::new(&greedy.dist),
        return_probability: return_prob_survival(chain, j, tail_eps)?,
        hitting_time: LawSeries::new(&hitting_time_dist(chain, j, tail_eps)?.dist),
    })
}
