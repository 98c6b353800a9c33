//! Hitting times of a single state from stationarity.

use serde::Serialize;

use crate::chain::MarkovChain;
use crate::dist::{IntDist, SUPPORT_CAP};
use crate::{Error, Result};

/// Allowed disagreement between the two routes to `E W_j`, relative to
/// `max(1, E W_j)`.
pub const MEAN_CHECK_TOL: f64 = 1e-8;

/// The law of `W_j = inf{t >= 0 : X_t = j}` with `X_0 ~ pi`, and of
/// `W_j | W_j > 0`, which is the hitting time from `pi^(j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingResult {
    pub j: usize,
    pub dist: IntDist,
    pub conditional_dist: IntDist,
    /// `E W_j` from the pmf (with certified tail estimate).
    pub mean_direct: f64,
    /// `E W_j` from the return-probability sum.
    pub mean_returns: f64,
}

/// First-passage law by iterating the substochastic block of `P` on
/// `S \ {j}`, started from `pi^(j)`. The stationary-start law mixes in an
/// atom `pi_j` at zero.
pub fn hitting_time_dist(chain: &MarkovChain, j: usize, tail_eps: f64) -> Result<HittingResult> {
    let pi_j = chain.pi(j);
    let mut v = chain.restricted_stationary(j)?.into_vec();
    let mut pmf = vec![0.0];
    let mut surviving = 1.0;
    while surviving > tail_eps {
        if pmf.len() >= SUPPORT_CAP {
            return Err(Error::TruncationCap { cap: SUPPORT_CAP });
        }
        let mut next = chain.step(&v);
        pmf.push(next[j]);
        next[j] = 0.0;
        surviving = next.iter().sum();
        v = next;
    }
    let conditional_dist = IntDist::new(pmf, surviving)?;
    let dist = conditional_dist.mix_with_zero(pi_j)?;
    let mean_direct = dist.mean().value();
    let mean_returns = expected_hitting_from_returns(chain, j, tail_eps)?;
    if (mean_direct - mean_returns).abs() > MEAN_CHECK_TOL * mean_returns.max(1.0) {
        return Err(Error::MeanMismatch {
            direct: mean_direct,
            returns: mean_returns,
        });
    }
    Ok(HittingResult {
        j,
        dist,
        conditional_dist,
        mean_direct,
        mean_returns,
    })
}

/// `E W_j = (1/pi_j) sum_t [P^t(j,j) - pi_j]`.
///
/// The sum stops once the total variation distance of `P^t(j, .)` from `pi`
/// falls below `tail_eps * pi_j`; that distance is nonincreasing in `t` and
/// bounds every later term.
pub fn expected_hitting_from_returns(chain: &MarkovChain, j: usize, tail_eps: f64) -> Result<f64> {
    chain.check_state(j)?;
    let pi = chain.stationary();
    let pi_j = pi[j];
    let mut row = vec![0.0; chain.len()];
    row[j] = 1.0;
    let mut sum = 0.0;
    for _ in 0..SUPPORT_CAP {
        sum += row[j] - pi_j;
        let tv: f64 = 0.5
            * row
                .iter()
                .zip(pi.iter())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        if tv < tail_eps * pi_j {
            return Ok(sum / pi_j);
        }
        row = chain.step(&row);
    }
    Err(Error::TruncationCap { cap: SUPPORT_CAP })
}

/// `w = sum_j pi_j E W_j`.
pub fn average_hitting_time(chain: &MarkovChain, tail_eps: f64) -> Result<f64> {
    (0..chain.len()).try_fold(0.0, |acc, j| {
        Ok(acc + chain.pi(j) * expected_hitting_from_returns(chain, j, tail_eps)?)
    })
}
