//! Separation distance and the laws of strong stationary times (SSTs).
//!
//! The fastest SST from an initial law has survival function equal to the
//! separation `s(t) = 1 - min_s P(X_t = s) / pi_s`. When the chain's target
//! state `j` always carries the smallest likelihood ratio under the start
//! `pi^(j)`, the same law is given by normalised return probabilities
//! `(P^t(j,j) - pi_j) / (1 - pi_j)`.

use serde::Serialize;

use crate::chain::{MarkovChain, ProbVector};
use crate::dist::{IntDist, SUPPORT_CAP};
use crate::{Error, Result};

/// Tolerance on the side conditions checked in this module.
pub const CONDITION_TOL: f64 = 1e-10;
/// Upper limit on automatically chosen check horizons.
pub const HORIZON_CAP: usize = 100_000;
const MONOTONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SstProvenance {
    SeparationFastest,
    ReturnProbability,
    GreedyDual,
}

/// The law of a strong stationary time and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SstResult {
    pub dist: IntDist,
    pub provenance: SstProvenance,
    pub init_desc: String,
}

/// Default horizon for the all-`t` side conditions: ten times the adaptive
/// support length, capped at [`HORIZON_CAP`].
pub fn default_horizon(support_len: usize) -> usize {
    (10 * support_len.max(1)).min(HORIZON_CAP)
}

fn separation_of(chain: &MarkovChain, v: &[f64]) -> f64 {
    let min_ratio = v
        .iter()
        .zip(chain.stationary().iter())
        .map(|(x, p)| x / p)
        .fold(f64::INFINITY, f64::min);
    (1.0 - min_ratio).clamp(0.0, 1.0)
}

/// `s(t)` for the chain started from `init`.
pub fn separation(chain: &MarkovChain, init: &ProbVector, t: usize) -> Result<f64> {
    let v = chain.step_distribution(init, t)?;
    Ok(separation_of(chain, &v))
}

/// Law of the fastest SST from `init`: `P(T > t) = s(t)`, extended until
/// `s(t) <= tail_eps`.
pub fn fastest_sst(chain: &MarkovChain, init: &ProbVector, tail_eps: f64) -> Result<SstResult> {
    fastest_sst_described(chain, init, tail_eps, "custom".to_string())
}

/// Fastest SST from the point mass at `l`.
pub fn fastest_sst_from_state(chain: &MarkovChain, l: usize, tail_eps: f64) -> Result<SstResult> {
    let init = ProbVector::point_mass(chain.len(), l)?;
    let desc = format!("delta_{}", chain.labels()[l]);
    fastest_sst_described(chain, &init, tail_eps, desc)
}

/// Fastest SST from `pi^(j)`, the stationary law conditioned to avoid `j`.
pub fn fastest_sst_restricted(chain: &MarkovChain, j: usize, tail_eps: f64) -> Result<SstResult> {
    let init = chain.restricted_stationary(j)?;
    let desc = format!("pi^({})", chain.labels()[j]);
    fastest_sst_described(chain, &init, tail_eps, desc)
}

fn fastest_sst_described(
    chain: &MarkovChain,
    init: &ProbVector,
    tail_eps: f64,
    init_desc: String,
) -> Result<SstResult> {
    if init.len() != chain.len() {
        return Err(Error::DimensionMismatch("initial law length".into()));
    }
    let mut v = init.as_slice().to_vec();
    let mut survival = vec![separation_of(chain, &v)];
    while survival[survival.len() - 1] > tail_eps {
        if survival.len() >= SUPPORT_CAP {
            return Err(Error::TruncationCap { cap: SUPPORT_CAP });
        }
        v = chain.step(&v);
        let next = separation_of(chain, &v);
        let prev = survival[survival.len() - 1];
        if next > prev + MONOTONE_TOL {
            return Err(Error::NonMonotoneSeparation {
                t: survival.len(),
                prev,
                next,
            });
        }
        survival.push(next.min(prev));
    }
    Ok(SstResult {
        dist: IntDist::from_survival(&survival)?,
        provenance: SstProvenance::SeparationFastest,
        init_desc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnConditionViolation {
    pub t: usize,
    pub y: usize,
    /// `pi_y P(X_t = j) - pi_j P(X_t = y)`.
    pub gap: f64,
}

/// Finite-horizon check of `pi_y P(X_t=j) <= pi_j P(X_t=y)` for all `y`
/// and `t <= horizon`, with `X_0 ~ pi^(j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnConditionCheck {
    pub holds: bool,
    pub horizon: usize,
    pub first_violation: Option<ReturnConditionViolation>,
}

pub fn check_return_condition(
    chain: &MarkovChain,
    j: usize,
    horizon: usize,
    tol: f64,
) -> Result<ReturnConditionCheck> {
    let pi = chain.stationary();
    let mut v = chain.restricted_stationary(j)?.into_vec();
    for t in 0..=horizon {
        if t > 0 {
            v = chain.step(&v);
        }
        for y in 0..chain.len() {
            let gap = pi[y] * v[j] - pi[j] * v[y];
            if gap > tol {
                return Ok(ReturnConditionCheck {
                    holds: false,
                    horizon,
                    first_violation: Some(ReturnConditionViolation { t, y, gap }),
                });
            }
        }
    }
    Ok(ReturnConditionCheck {
        holds: true,
        horizon,
        first_violation: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ReturnProbIssue {
    /// `P^t(j,j) > P^(t-1)(j,j)` beyond rounding.
    NotDecreasing { t: usize },
    /// `P^t(j,j) < pi_j` beyond rounding.
    NegativeSurvival { t: usize },
}

/// The normalised return-probability sequence, built regardless of whether
/// it is a valid survival function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnProbTrace {
    pub survival: Vec<f64>,
    pub issues: Vec<ReturnProbIssue>,
    pub return_condition: ReturnConditionCheck,
}

/// Builds `(P^t(j,j) - pi_j) / (1 - pi_j)` until it drops to `tail_eps` and
/// records every validity problem as data.
pub fn return_prob_survival(
    chain: &MarkovChain,
    j: usize,
    tail_eps: f64,
) -> Result<ReturnProbTrace> {
    chain.check_state(j)?;
    let pi_j = chain.pi(j);
    let rest = 1.0 - pi_j;
    let mut row = ProbVector::point_mass(chain.len(), j)?.into_vec();
    let mut survival = vec![(row[j] - pi_j) / rest];
    let mut issues = Vec::new();
    let mut prev_return = row[j];
    while survival[survival.len() - 1] > tail_eps {
        if survival.len() >= SUPPORT_CAP {
            return Err(Error::TruncationCap { cap: SUPPORT_CAP });
        }
        let t = survival.len();
        row = chain.step(&row);
        if row[j] > prev_return + MONOTONE_TOL {
            issues.push(ReturnProbIssue::NotDecreasing { t });
        }
        if row[j] < pi_j - MONOTONE_TOL {
            issues.push(ReturnProbIssue::NegativeSurvival { t });
        }
        prev_return = row[j];
        survival.push((row[j] - pi_j) / rest);
    }
    let return_condition =
        check_return_condition(chain, j, default_horizon(survival.len()), CONDITION_TOL)?;
    Ok(ReturnProbTrace {
        survival,
        issues,
        return_condition,
    })
}

/// The SST law with `P(T > t) = (P^t(j,j) - pi_j) / (1 - pi_j)`, valid when
/// the hitting condition holds. Fails on the first validity problem; use
/// [`return_prob_survival`] to inspect chains where it does not hold.
pub fn sst_from_return_probs(chain: &MarkovChain, j: usize, tail_eps: f64) -> Result<SstResult> {
    let trace = return_prob_survival(chain, j, tail_eps)?;
    match trace.issues.first() {
        Some(ReturnProbIssue::NotDecreasing { t }) => return Err(Error::NotDecreasing { t: *t }),
        Some(ReturnProbIssue::NegativeSurvival { t }) => {
            return Err(Error::NegativeSurvival { t: *t })
        }
        None => {}
    }
    if let Some(v) = trace.return_condition.first_violation {
        return Err(Error::ReturnConditionFails {
            t: v.t,
            y: v.y,
            gap: v.gap,
        });
    }
    Ok(SstResult {
        dist: IntDist::from_survival(&trace.survival)?,
        provenance: SstProvenance::ReturnProbability,
        init_desc: format!("pi^({})", chain.labels()[j]),
    })
}

/// Largest value of `P(T > t, X_t = j)` seen up to the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoHitCheck {
    pub holds: bool,
    pub horizon: usize,
    pub max_discrepancy: f64,
    pub worst_t: usize,
}

/// Checks `P(T > t, X_t = j) = 0` for the fastest SST `T` from `pi^(j)`.
///
/// Since `T` is an SST, `P(T <= t, X_t = j) = pi_j P(T <= t)`, so the
/// quantity checked is `P(X_t = j) - pi_j (1 - s(t))`.
pub fn check_no_hit_before_sst(
    chain: &MarkovChain,
    j: usize,
    horizon: usize,
    tol: f64,
) -> Result<NoHitCheck> {
    let pi_j = chain.stationary()[j];
    let mut v = chain.restricted_stationary(j)?.into_vec();
    let mut max_discrepancy: f64 = 0.0;
    let mut worst_t = 0;
    for t in 0..=horizon {
        if t > 0 {
            v = chain.step(&v);
        }
        let s = separation_of(chain, &v);
        let d = (v[j] - pi_j * (1.0 - s)).abs();
        if d > max_discrepancy {
            max_discrepancy = d;
            worst_t = t;
        }
    }
    Ok(NoHitCheck {
        holds: max_discrepancy <= tol,
        horizon,
        max_discrepancy,
        worst_t,
    })
}
