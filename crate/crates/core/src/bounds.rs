//! Bounds relating `W_j` to the geometric sum `U = T_1 + ... + T_N`,
//! `N ~ Geom(pi_j)`, and the exact quantities they bound.
//!
//! Every comparison carries a slack of `tol * max(1, scale)` where `scale`
//! is the magnitude of the quantities compared, plus any truncation error
//! certified by the distributions involved.

use serde::Serialize;

use crate::chain::MarkovChain;
use crate::dist::{
    check_stochastic_dominance, geometric_compound, tv_distance, DominanceWitness, IntDist,
    TvDistance, DEFAULT_TAIL_EPS,
};
use crate::hitting::{
    average_hitting_time, expected_hitting_from_returns, hitting_time_dist, HittingResult,
};
use crate::sst::{fastest_sst_from_state, fastest_sst_restricted, SstProvenance, SstResult};
use crate::{Error, Result};

/// Default relative slack for bound comparisons.
pub const DEFAULT_TOL: f64 = 1e-10;

/// MGF evaluation points; only those passing the gate are compared.
pub fn default_thetas() -> Vec<f64> {
    vec![0.01, 0.05, 0.1, 0.25, 0.5, std::f64::consts::LN_2 - 0.01]
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsOptions {
    pub tail_eps: f64,
    pub tol: f64,
    pub thetas: Vec<f64>,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions {
            tail_eps: DEFAULT_TAIL_EPS,
            tol: DEFAULT_TOL,
            thetas: default_thetas(),
        }
    }
}

fn slack(tol: f64, scale: f64) -> f64 {
    tol * scale.abs().max(1.0)
}

/// `(1 - pi_j) E T - pi_j E W_j`, with `E W_j` from return probabilities.
pub fn tv_bound(chain: &MarkovChain, j: usize, sst: &SstResult, tail_eps: f64) -> Result<f64> {
    let pi_j = chain.pi(j);
    let mean_w = expected_hitting_from_returns(chain, j, tail_eps)?;
    Ok((1.0 - pi_j) * sst.dist.mean().value() - pi_j * mean_w)
}

/// `E T >= pi_j + pi_j / (1 - pi_j) * sum_{s != j} pi_s P(s,s) / (1 - P(s,s))`.
pub fn sst_mean_lower_bound(chain: &MarkovChain, j: usize) -> Result<f64> {
    chain.check_state(j)?;
    let pi_j = chain.pi(j);
    let sum: f64 = (0..chain.len())
        .filter(|&s| s != j)
        .map(|s| {
            let stay = chain.p(s, s);
            chain.pi(s) * stay / (1.0 - stay)
        })
        .sum();
    Ok(pi_j + pi_j / (1.0 - pi_j) * sum)
}

/// One evaluation of the MGF bound `E e^{theta W} <= pi_j / (1 - gate)`,
/// `gate = (1 - pi_j) E e^{theta T}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MgfCheck {
    pub theta: f64,
    /// `None` when `E e^{theta T}` cannot be certified.
    pub gate: Option<f64>,
    /// Present only when `gate < 1`.
    pub bound: Option<f64>,
    /// `E e^{theta W}`; `None` when not certified.
    pub exact: Option<f64>,
    pub holds: bool,
}

fn mgf_check(pi_j: f64, t: &IntDist, w: &IntDist, theta: f64) -> MgfCheck {
    let tm = t.mgf(theta);
    if tm.divergent {
        return MgfCheck {
            theta,
            gate: None,
            bound: None,
            exact: None,
            holds: true,
        };
    }
    let gate = (1.0 - pi_j) * tm.value;
    let wm = w.mgf(theta);
    let exact = (!wm.divergent).then_some(wm.value);
    if gate >= 1.0 {
        return MgfCheck {
            theta,
            gate: Some(gate),
            bound: None,
            exact,
            holds: true,
        };
    }
    let bound = pi_j / (1.0 - gate);
    // A finite gate forces a finite E e^{theta W}; failing to certify it is
    // counted against the check.
    let holds = exact.is_some_and(|e| e <= bound + 1e-9 * bound.max(1.0));
    MgfCheck {
        theta,
        gate: Some(gate),
        bound: Some(bound),
        exact,
        holds,
    }
}

pub fn mgf_bound(
    chain: &MarkovChain,
    j: usize,
    sst: &SstResult,
    theta: f64,
    tail_eps: f64,
) -> Result<MgfCheck> {
    if theta.is_nan() || theta <= 0.0 || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "theta {theta} must be positive"
        )));
    }
    if sst.dist.mgf(theta).divergent {
        return Err(Error::DivergentMgf(theta));
    }
    let hit = hitting_time_dist(chain, j, tail_eps)?;
    Ok(mgf_check(chain.pi(j), &sst.dist, &hit.dist, theta))
}

/// Pass/fail for each relation in a [`BoundsReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportChecks {
    /// `tv_bound >= tv_exact - error`.
    pub tv_bound_holds: bool,
    pub tv_bound_nonnegative: bool,
    /// `U >=_st W_j`.
    pub dominance: bool,
    /// `E W_j <= (1 - pi_j)/pi_j E T`.
    pub mean_first: bool,
    /// `(1 - pi_j)/pi_j E T <= (1/pi_j) sum_{l != j} pi_l E T_(l)`; only
    /// asserted for the fastest SST, `None` otherwise.
    pub mean_second: Option<bool>,
    pub mgf: bool,
    /// Lower bound on `E T` does not exceed `E T`.
    pub sst_mean_lower: bool,
}

impl ReportChecks {
    pub fn all(&self) -> bool {
        self.tv_bound_holds
            && self.tv_bound_nonnegative
            && self.dominance
            && self.mean_first
            && self.mean_second.unwrap_or(true)
            && self.mgf
            && self.sst_mean_lower
    }
}

/// Every bound for one `(chain, j, T)` next to the exact quantity it bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub j: usize,
    pub state: String,
    pub provenance: SstProvenance,
    pub pi_j: f64,
    pub mean_t: f64,
    pub mean_w: f64,
    pub tv_bound: f64,
    pub tv_exact: TvDistance,
    pub dominance: DominanceWitness,
    pub mean_upper_1: f64,
    pub mean_upper_2: f64,
    pub mgf_checks: Vec<MgfCheck>,
    pub sst_mean_lower: f64,
    pub checks: ReportChecks,
    pub all_pass: bool,
}

/// Builds `U`, compares it with `W_j`, and evaluates every mean, MGF and
/// total-variation bound for the given SST law.
pub fn tv_report(
    chain: &MarkovChain,
    j: usize,
    sst: &SstResult,
    opts: &BoundsOptions,
) -> Result<BoundsReport> {
    let hit = hitting_time_dist(chain, j, opts.tail_eps)?;
    tv_report_with(chain, j, sst, &hit, opts)
}

/// [`tv_report`] with a precomputed hitting law.
pub fn tv_report_with(
    chain: &MarkovChain,
    j: usize,
    sst: &SstResult,
    hit: &HittingResult,
    opts: &BoundsOptions,
) -> Result<BoundsReport> {
    let tol = opts.tol;
    let pi_j = chain.pi(j);
    let mean_t = sst.dist.mean().value();
    let mean_w = hit.mean_returns;

    let u = geometric_compound(pi_j, &sst.dist, opts.tail_eps)?;
    let tv_exact = tv_distance(&hit.dist, &u);
    let bound = (1.0 - pi_j) * mean_t - pi_j * mean_w;
    let scale = (1.0 - pi_j) * mean_t;
    let dominance = check_stochastic_dominance(&u, &hit.dist, crate::dist::DOMINANCE_TOL);

    let mean_upper_1 = (1.0 - pi_j) / pi_j * mean_t;
    let mut weighted = 0.0;
    for l in (0..chain.len()).filter(|&l| l != j) {
        let t_l = fastest_sst_from_state(chain, l, opts.tail_eps)?;
        weighted += chain.pi(l) * t_l.dist.mean().value();
    }
    let mean_upper_2 = weighted / pi_j;
    let mean_second = match sst.provenance {
        SstProvenance::GreedyDual => None,
        _ => Some(mean_upper_1 <= mean_upper_2 + slack(10.0 * tol, mean_upper_2)),
    };

    let mgf_checks: Vec<MgfCheck> = opts
        .thetas
        .iter()
        .map(|&theta| mgf_check(pi_j, &sst.dist, &hit.dist, theta))
        .collect();
    let sst_mean_lower = sst_mean_lower_bound(chain, j)?;

    let checks = ReportChecks {
        tv_bound_holds: bound + slack(tol, scale) >= tv_exact.value - tv_exact.error_bound,
        tv_bound_nonnegative: bound >= -slack(tol, scale),
        dominance: dominance.holds,
        mean_first: mean_w <= mean_upper_1 + slack(tol, mean_upper_1),
        mean_second,
        mgf: mgf_checks.iter().all(|m| m.holds),
        sst_mean_lower: sst_mean_lower <= mean_t + slack(tol, mean_t),
    };
    Ok(BoundsReport {
        j,
        state: chain.labels()[j].clone(),
        provenance: sst.provenance,
        pi_j,
        mean_t,
        mean_w,
        tv_bound: bound,
        tv_exact,
        dominance,
        mean_upper_1,
        mean_upper_2,
        mgf_checks,
        sst_mean_lower,
        all_pass: checks.all(),
        checks,
    })
}

/// Worst-case expected fastest SST over point-mass starts and the bounds it
/// implies for the average hitting time and for ergodic averages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseSst {
    /// `E T_(l)` for each start `l`.
    pub means: Vec<f64>,
    pub t_star: f64,
    pub argmax_state: usize,
    pub average_hitting_time: f64,
    /// `(|S| - 1) t*`.
    pub avg_hitting_bound: f64,
    pub avg_hitting_holds: bool,
    /// `(|S| - 1) t* / n` when `n` is supplied.
    pub ergodic_avg_bound: Option<f64>,
}

pub fn worst_case_sst(
    chain: &MarkovChain,
    tail_eps: f64,
    tol: f64,
    n: Option<usize>,
) -> Result<WorstCaseSst> {
    let means = (0..chain.len())
        .map(|l| {
            Ok(fastest_sst_from_state(chain, l, tail_eps)?
                .dist
                .mean()
                .value())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (argmax_state, t_star) =
        means
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |b, (l, m)| if m > b.1 { (l, m) } else { b },
            );
    let size = (chain.len() - 1) as f64;
    let avg = average_hitting_time(chain, tail_eps)?;
    let avg_hitting_bound = size * t_star;
    Ok(WorstCaseSst {
        means,
        t_star,
        argmax_state,
        average_hitting_time: avg,
        avg_hitting_bound,
        avg_hitting_holds: avg <= avg_hitting_bound + slack(tol, avg_hitting_bound),
        ergodic_avg_bound: n.filter(|&n| n > 0).map(|n| avg_hitting_bound / n as f64),
    })
}

/// Exact total variation between the time-averaged law
/// `(1/n) sum_{t<n} delta_l P^t` and `pi`, maximised over starts `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErgodicAverageCheck {
    pub n: usize,
    pub bound: f64,
    pub worst_tv: f64,
    pub worst_state: usize,
    pub holds: bool,
}

pub fn ergodic_average_check(
    chain: &MarkovChain,
    n: usize,
    tail_eps: f64,
    tol: f64,
) -> Result<ErgodicAverageCheck> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "ergodic average length must be positive".into(),
        ));
    }
    let worst = worst_case_sst(chain, tail_eps, tol, Some(n))?;
    let bound = worst.ergodic_avg_bound.unwrap_or(f64::INFINITY);
    let pi = chain.stationary();
    let mut worst_tv: f64 = 0.0;
    let mut worst_state = 0;
    for l in 0..chain.len() {
        let mut v = vec![0.0; chain.len()];
        v[l] = 1.0;
        let mut avg = vec![0.0; chain.len()];
        for _ in 0..n {
            for (a, x) in avg.iter_mut().zip(&v) {
                *a += x;
            }
            v = chain.step(&v);
        }
        let tv = 0.5
            * avg
                .iter()
                .zip(pi.iter())
                .map(|(a, p)| (a / n as f64 - p).abs())
                .sum::<f64>();
        if tv > worst_tv {
            worst_tv = tv;
            worst_state = l;
        }
    }
    Ok(ErgodicAverageCheck {
        n,
        bound,
        worst_tv,
        worst_state,
        holds: worst_tv <= bound + slack(tol, bound),
    })
}

/// Finite-horizon check of the worst-start dominance for reversible
/// chains: if the smallest entry of every `P^t` lies in the column of a
/// most likely state `m`, then `T_(m)` dominates every `T_(l)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstStateCheck {
    pub reversible: bool,
    pub applicable: bool,
    pub m: Option<usize>,
    /// First `t` at which the column condition failed for every candidate.
    pub column_condition_fails_at: Option<usize>,
    /// Last `t` examined; iteration stops early once `P^t` is within `tol`
    /// of its limit, after which the column ordering is fixed.
    pub horizon_checked: usize,
    pub conclusion_holds: Option<bool>,
}

pub fn check_worst_start_state(
    chain: &MarkovChain,
    horizon: usize,
    tol: f64,
    tail_eps: f64,
) -> Result<WorstStateCheck> {
    let n = chain.len();
    let pi = chain.stationary();
    let reversible = chain.is_reversible(tol);
    let not_applicable = |fails_at, checked| WorstStateCheck {
        reversible,
        applicable: false,
        m: None,
        column_condition_fails_at: fails_at,
        horizon_checked: checked,
        conclusion_holds: None,
    };
    if !reversible {
        return Ok(not_applicable(None, 0));
    }
    let pi_max = pi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut candidates: Vec<usize> = (0..n).filter(|&m| pi[m] >= pi_max - tol).collect();

    let mut power: Vec<Vec<f64>> = chain.rows();
    let mut checked = 0;
    for t in 1..=horizon.max(1) {
        if t > 1 {
            power = power.iter().map(|row| chain.step(row)).collect();
        }
        checked = t;
        let global_min = power
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        candidates.retain(|&m| {
            let col_min = power.iter().map(|row| row[m]).fold(f64::INFINITY, f64::min);
            col_min <= global_min + tol
        });
        if candidates.is_empty() {
            return Ok(not_applicable(Some(t), checked));
        }
        let converged = power
            .iter()
            .all(|row| row.iter().zip(pi.iter()).all(|(a, b)| (a - b).abs() <= tol));
        if converged {
            break;
        }
    }
    let m = candidates[0];
    let t_m = fastest_sst_from_state(chain, m, tail_eps)?;
    let mut holds = true;
    for l in (0..n).filter(|&l| l != m) {
        let t_l = fastest_sst_from_state(chain, l, tail_eps)?;
        holds &= check_stochastic_dominance(&t_m.dist, &t_l.dist, tol).holds;
    }
    Ok(WorstStateCheck {
        reversible,
        applicable: true,
        m: Some(m),
        column_condition_fails_at: None,
        horizon_checked: checked,
        conclusion_holds: Some(holds),
    })
}

/// Fastest SST from `pi^(j)` followed by its report; the default analysis.
pub fn fastest_report(chain: &MarkovChain, j: usize, opts: &BoundsOptions) -> Result<BoundsReport> {
    let sst = fastest_sst_restricted(chain, j, opts.tail_eps)?;
    tv_report(chain, j, &sst, opts)
}
