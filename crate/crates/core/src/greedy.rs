//! Greedy set-valued dual for the start `pi^(j)`.
//!
//! The dual chain starts in `S_j = S \ {j}`. Its first row is built by
//! repeatedly peeling the largest multiple of `pi` (restricted to a
//! shrinking set `A_r`) off the vector `(pi P)`-minus-`j` row
//!
//! ```text
//! Q_0(l) = (pi_l - pi_j P(j,l)) / (1 - pi_j)
//! c_r    = min { Q_{r-1}(l) / pi_l : l in A_{r-1}, Q_{r-1}(l) > 0 }
//! A_r    = { l in A_{r-1} : Q_{r-1}(l) / pi_l >= c_r }
//! Q_r    = Q_{r-1} - c_r pi   on A_r
//! P*(S_j, A_r) = c_r pi(A_r)
//! ```
//!
//! Every other dual state is sent to the full set `S` in one step, so the
//! absorption time only depends on the three masses `P*(S_j, S)`,
//! `P*(S_j, S_j)` and the rest.
//!
//! With the link whose `S_j` row is `pi^(j)` and whose other rows are `pi`,
//! the intertwining `Lambda P = P* Lambda` holds only when no intermediate
//! set receives mass; [`intertwining_residual`] measures the defect, and the
//! absorption time is a genuine strong stationary time only when it is zero.

use serde::Serialize;

use crate::chain::MarkovChain;
use crate::dist::{IntDist, SUPPORT_CAP};
use crate::sst::{SstProvenance, SstResult};
use crate::{Error, Result};

/// `Q` entries at or below this count as exhausted.
pub const POSITIVE_TOL: f64 = 1e-14;
/// States whose ratio is within this of `c_r` stay in `A_r`.
pub const MEMBERSHIP_TOL: f64 = 1e-12;
const NEGATIVE_Q_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-12;

/// One entry `P*(S_j, A)` of the dual row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualEntry {
    pub set: Vec<usize>,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyDual {
    pub j: usize,
    /// `c_1, ..., c_z`.
    pub c: Vec<f64>,
    /// `A_1 ⊋ A_2 ⊋ ... ⊋ A_z`, each sorted.
    pub sets: Vec<Vec<usize>>,
    /// `P*(S_j, S)`.
    pub p_absorb: f64,
    /// `P*(S_j, S_j)`.
    pub p_stay: f64,
    /// Mass sent to every other set.
    pub p_other: f64,
    pub dual_row: Vec<DualEntry>,
}

impl GreedyDual {
    pub fn z(&self) -> usize {
        self.c.len()
    }
}

/// Runs the greedy recursion for the dual row out of `S_j`.
pub fn greedy_dual_row(chain: &MarkovChain, j: usize) -> Result<GreedyDual> {
    chain.check_state(j)?;
    let n = chain.len();
    let pi = chain.stationary();
    let pi_j = pi[j];
    let mut q: Vec<f64> = (0..n)
        .map(|l| (pi[l] - pi_j * chain.p(j, l)) / (1.0 - pi_j))
        .collect();
    let mut members: Vec<usize> = (0..n).collect();
    let mut c = Vec::new();
    let mut sets = Vec::new();
    let mut dual_row = Vec::new();

    loop {
        let step = c.len() + 1;
        let c_r = members
            .iter()
            .filter(|&&l| q[l] > POSITIVE_TOL)
            .map(|&l| q[l] / pi[l])
            .fold(f64::INFINITY, f64::min);
        if !c_r.is_finite() {
            break;
        }
        if step > n + 2 {
            return Err(Error::NonTermination(step));
        }
        members.retain(|&l| q[l] / pi[l] >= c_r - MEMBERSHIP_TOL);
        for &l in &members {
            q[l] -= c_r * pi[l];
            if q[l] < -NEGATIVE_Q_TOL {
                return Err(Error::NegativeQ { step, value: q[l] });
            }
            q[l] = q[l].max(0.0);
        }
        let mass = c_r * members.iter().map(|&l| pi[l]).sum::<f64>();
        c.push(c_r);
        sets.push(members.clone());
        dual_row.push(DualEntry {
            set: members.clone(),
            prob: mass,
        });
    }

    let mut p_absorb = 0.0;
    let mut p_stay = 0.0;
    let mut total = 0.0;
    for e in &dual_row {
        total += e.prob;
        if e.set.len() == n {
            p_absorb += e.prob;
        } else if e.set.len() == n - 1 && !e.set.contains(&j) {
            p_stay += e.prob;
        }
    }
    Ok(GreedyDual {
        j,
        c,
        sets,
        p_absorb,
        p_stay,
        p_other: (total - p_absorb - p_stay).max(0.0),
        dual_row,
    })
}

/// Absorption time at `S` from `S_j`: `pmf(1) = P*(S_j,S)` and
/// `pmf(t) = P*(S_j,S_j)^(t-2) (P*(S_j,S_j) P*(S_j,S) + rest)` for `t >= 2`.
pub fn dual_sst_dist(gd: &GreedyDual, tail_eps: f64) -> Result<SstResult> {
    let (pa, ps) = (gd.p_absorb, gd.p_stay);
    let later = ps * pa + gd.p_other;
    let mut pmf = vec![0.0, pa];
    // P(T > t) = ps^(t-1) (1 - pa) for t >= 1.
    let mut tail = 1.0 - pa;
    let mut hold = 1.0;
    while tail > tail_eps {
        if pmf.len() >= SUPPORT_CAP {
            return Err(Error::TruncationCap { cap: SUPPORT_CAP });
        }
        pmf.push(hold * later);
        hold *= ps;
        tail = hold * (1.0 - pa);
    }
    Ok(SstResult {
        dist: IntDist::new(pmf, tail.max(0.0))?,
        provenance: SstProvenance::GreedyDual,
        init_desc: format!("pi^({})", gd.j),
    })
}

/// `E T = 1 + (1 - P*(S_j,S)) / (1 - P*(S_j,S_j))`.
pub fn dual_sst_mean(gd: &GreedyDual) -> Result<f64> {
    if gd.p_stay >= 1.0 - 1e-12 {
        return Err(Error::DegenerateStay(gd.p_stay));
    }
    Ok(1.0 + (1.0 - gd.p_absorb) / (1.0 - gd.p_stay))
}

/// `max_l |(Lambda P)(S_j, l) - (P* Lambda)(S_j, l)|` for the link whose
/// `S_j` row is `pi^(j)` and whose other rows are `pi`. All other rows of
/// the intertwining hold identically.
pub fn intertwining_residual(chain: &MarkovChain, gd: &GreedyDual) -> Result<f64> {
    let restricted = chain.restricted_stationary(gd.j)?;
    let lambda_p = chain.step(&restricted);
    let pi = chain.stationary();
    Ok(lambda_p
        .iter()
        .enumerate()
        .map(|(l, &lp)| {
            let pl = gd.p_stay * restricted[l] + (1.0 - gd.p_stay) * pi[l];
            (lp - pl).abs()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GreedyRegime {
    /// `(pi_l - pi_j P(j,l)) / pi_l` is minimised only at `l = j`.
    UniqueMinAtJ,
    /// Some `l* != j` attains the minimum.
    MinElsewhere,
    /// `pi_l = pi_j P(j,l)` for some `l`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreedyClass {
    pub regime: GreedyRegime,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub l_star: Option<usize>,
}

/// Sorts `(chain, j)` into the closed-form regimes of the greedy dual.
pub fn classify_greedy_case(chain: &MarkovChain, j: usize) -> Result<GreedyClass> {
    chain.check_state(j)?;
    let pi = chain.stationary();
    let pi_j = pi[j];
    let n = chain.len();
    let excess: Vec<f64> = (0..n).map(|l| pi[l] - pi_j * chain.p(j, l)).collect();
    if excess.iter().any(|e| e.abs() <= TIE_TOL) {
        return Ok(GreedyClass {
            regime: GreedyRegime::Degenerate,
            alpha: None,
            beta: None,
            gamma: None,
            l_star: None,
        });
    }
    let ratio: Vec<f64> = (0..n).map(|l| excess[l] / pi[l]).collect();
    let l_star = (0..n)
        .filter(|&l| l != j)
        .min_by(|&a, &b| ratio[a].total_cmp(&ratio[b]))
        .expect("chains have at least two states");
    let gd = greedy_dual_row(chain, j)?;
    if ratio[l_star] > ratio[j] + TIE_TOL {
        let c2 = gd.c.get(1).copied().unwrap_or(0.0);
        Ok(GreedyClass {
            regime: GreedyRegime::UniqueMinAtJ,
            alpha: Some((1.0 - chain.p(j, j)) / (1.0 - pi_j)),
            beta: Some((1.0 - pi_j) * c2),
            gamma: None,
            l_star: None,
        })
    } else {
        Ok(GreedyClass {
            regime: GreedyRegime::MinElsewhere,
            alpha: None,
            beta: None,
            gamma: Some(gd.p_absorb),
            l_star: Some(l_star),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sst::fastest_sst_restricted;

    #[test]
    fn two_state_quarter_trace() {
        let c = fixtures::two_state(0.25).unwrap();
        let gd = greedy_dual_row(&c, 1).unwrap();
        assert!((gd.c[0] - 0.75).abs() < 1e-14);
        assert_eq!(gd.sets[0], vec![0, 1]);
        assert_eq!(gd.sets[1], vec![0]);
        assert!((gd.p_absorb - 0.75).abs() < 1e-14);
        assert!((gd.p_stay - 0.25).abs() < 1e-14);
        assert!(gd.p_other.abs() < 1e-14);
        assert!((dual_sst_mean(&gd).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        assert!(intertwining_residual(&c, &gd).unwrap() < 1e-14);

        let t = dual_sst_dist(&gd, 1e-12).unwrap();
        let f = fastest_sst_restricted(&c, 1, 1e-12).unwrap();
        for k in 0..=t.dist.n_max().max(f.dist.n_max()) {
            assert!((t.dist.prob(k) - f.dist.prob(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn iid_rows_absorb_at_once() {
        let c = fixtures::iid_rows(&[0.5, 0.3, 0.2]).unwrap();
        for j in 0..3 {
            let gd = greedy_dual_row(&c, j).unwrap();
            assert_eq!(gd.z(), 1);
            assert!((gd.p_absorb - 1.0).abs() < 1e-14);
            let t = dual_sst_dist(&gd, 1e-12).unwrap().dist;
            assert_eq!(t.n_max(), 1);
            assert!((t.prob(1) - 1.0).abs() < 1e-15);
            assert!((dual_sst_mean(&gd).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_point_support_when_stay_is_zero() {
        let gd = GreedyDual {
            j: 0,
            c: vec![],
            sets: vec![],
            p_absorb: 0.4,
            p_stay: 0.0,
            p_other: 0.6,
            dual_row: vec![],
        };
        let t = dual_sst_dist(&gd, 1e-12).unwrap();
        assert_eq!(t.dist.pmf(), &[0.0, 0.4, 0.6]);
        assert_eq!(t.dist.tail_bound(), 0.0);
        assert!((dual_sst_mean(&gd).unwrap() - 1.6).abs() < 1e-15);
    }

    #[test]
    fn degenerate_chain_still_runs() {
        // State 1 is entered only from 0, so pi_1 = pi_0 P(0,1).
        let c = MarkovChain::from_rows(vec![
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.0, 0.5],
        ])
        .unwrap();
        let class = classify_greedy_case(&c, 0).unwrap();
        assert_eq!(class.regime, GreedyRegime::Degenerate);
        let gd = greedy_dual_row(&c, 0).unwrap();
        assert!((gd.p_absorb + gd.p_stay + gd.p_other - 1.0).abs() < 1e-12);
        assert!(!gd.sets[0].contains(&1));
    }

    #[test]
    fn intermediate_sets_break_the_intertwining() {
        let c = MarkovChain::from_rows(vec![
            vec![0.2, 0.5, 0.3],
            vec![0.6, 0.1, 0.3],
            vec![0.1, 0.2, 0.7],
        ])
        .unwrap();
        let gd = greedy_dual_row(&c, 0).unwrap();
        assert!(gd.p_other > 1e-3);
        assert!(intertwining_residual(&c, &gd).unwrap() > 1e-3);
    }

    #[test]
    fn sets_are_strictly_decreasing() {
        let c = fixtures::birth_death(6, 0.3, 0.2).unwrap();
        for j in 0..6 {
            let gd = greedy_dual_row(&c, j).unwrap();
            for w in gd.sets.windows(2) {
                assert!(w[1].len() < w[0].len());
                assert!(w[1].iter().all(|l| w[0].contains(l)));
            }
            let total: f64 = gd.dual_row.iter().map(|e| e.prob).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for (e, (&cr, set)) in gd.dual_row.iter().zip(gd.c.iter().zip(&gd.sets)) {
                let want = cr * set.iter().map(|&l| c.pi(l)).sum::<f64>();
                assert!((e.prob - want).abs() < 1e-15);
            }
        }
    }
}
