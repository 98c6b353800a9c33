//! Truncated distributions on the nonnegative integers.
//!
//! Every [`IntDist`] carries an explicit `tail_bound`: an upper bound on the
//! probability mass beyond the stored support. Distances, means and
//! generating functions fold that bound into their reported error terms
//! instead of silently dropping it.

use serde::Serialize;

use crate::{Error, Result};

/// Default mass left beyond the stored support by adaptive truncation.
pub const DEFAULT_TAIL_EPS: f64 = 1e-10;
/// Hard cap on the number of support points any adaptive routine may create.
pub const SUPPORT_CAP: usize = 1_000_000;
/// Survival-function gaps below this are treated as rounding noise.
pub const DOMINANCE_TOL: f64 = 1e-10;
/// Tolerance on `sum(pmf) + tail_bound == 1`.
pub const MASS_TOL: f64 = 1e-9;
/// Negative pmf entries of at most this magnitude are clamped to zero.
pub const NEGATIVE_DUST: f64 = 1e-12;

/// A law on `{0, 1, 2, ...}` stored up to `n_max` with a certified tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntDist {
    pmf: Vec<f64>,
    tail_bound: f64,
}

/// Mean of a truncated law, split into the stored part and an estimate of
/// the contribution from beyond the support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub truncated: f64,
    pub tail: f64,
    /// Whether `tail` rests on a geometric rate certificate.
    pub certified: bool,
}

impl MeanEstimate {
    pub fn value(&self) -> f64 {
        self.truncated + self.tail
    }
}

/// `E exp(theta X)` of a truncated law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MgfEstimate {
    /// Stored part plus the certified tail contribution.
    pub value: f64,
    pub tail: f64,
    /// Set when the tail certificate cannot bound `exp(theta k)` growth.
    pub divergent: bool,
}

/// Total variation distance between two truncated laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvDistance {
    pub value: f64,
    pub error_bound: f64,
}

/// Outcome of a survival-function comparison `upper >=_st lower`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceWitness {
    pub holds: bool,
    pub worst_t: usize,
    /// Largest `S_lower(t) - S_upper(t)` after tail allowances.
    pub worst_gap: f64,
}

impl IntDist {
    /// Builds a law from a pmf and a tail bound. Negative entries down to
    /// `-NEGATIVE_DUST` are clamped to zero and their magnitude added to the
    /// tail bound.
    pub fn new(mut pmf: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidPmf("empty pmf".into()));
        }
        if !tail_bound.is_finite() || tail_bound < -NEGATIVE_DUST {
            return Err(Error::InvalidPmf(format!("tail bound {tail_bound}")));
        }
        let mut tail = tail_bound.max(0.0);
        for (k, x) in pmf.iter_mut().enumerate() {
            if !x.is_finite() || *x < -NEGATIVE_DUST {
                return Err(Error::InvalidPmf(format!("pmf({k}) = {x}")));
            }
            if *x < 0.0 {
                tail += -*x;
                *x = 0.0;
            }
        }
        let total: f64 = pmf.iter().sum::<f64>() + tail;
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidPmf(format!("total mass {total}")));
        }
        Ok(IntDist {
            pmf,
            tail_bound: tail,
        })
    }

    /// Law with survival function `survival[t] = P(X > t)` for
    /// `t = 0..=n`; the tail bound is `survival[n]`.
    pub fn from_survival(survival: &[f64]) -> Result<Self> {
        if survival.is_empty() {
            return Err(Error::InvalidPmf("empty survival sequence".into()));
        }
        let mut pmf = Vec::with_capacity(survival.len());
        let mut prev = 1.0;
        for &s in survival {
            pmf.push(prev - s);
            prev = s;
        }
        Self::new(pmf, prev)
    }

    pub fn point_mass(k: usize) -> Self {
        let mut pmf = vec![0.0; k + 1];
        pmf[k] = 1.0;
        IntDist {
            pmf,
            tail_bound: 0.0,
        }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `P(X = k)` for stored points, zero beyond.
    pub fn prob(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn n_max(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `P(X > t)`, with the tail bound standing in for the mass beyond the
    /// support. Equals `1 - P(X <= t)` up to rounding.
    pub fn survival(&self, t: usize) -> f64 {
        if t >= self.n_max() {
            return self.tail_bound;
        }
        self.tail_bound + self.pmf[t + 1..].iter().sum::<f64>()
    }

    /// `P(X > t)` for `t = 0..=n_max`, accumulated from the tail.
    pub fn survival_curve(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.pmf.len()];
        let mut acc = self.tail_bound;
        for t in (0..self.pmf.len()).rev() {
            out[t] = acc;
            acc += self.pmf[t];
        }
        out
    }

    /// Empirical geometric decay rate over the upper half of the support:
    /// `max pmf(k+1)/pmf(k)`. `None` when no rate can be read off.
    pub fn tail_rate(&self) -> Option<f64> {
        let n = self.n_max();
        if n < 2 {
            return None;
        }
        let mut rate: Option<f64> = None;
        for k in n / 2..n {
            let (a, b) = (self.pmf[k], self.pmf[k + 1]);
            if a > 0.0 {
                rate = Some(rate.map_or(b / a, |r| r.max(b / a)));
            } else if b > 0.0 {
                return None;
            }
        }
        rate
    }

    pub fn mean(&self) -> MeanEstimate {
        let truncated = self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        if self.tail_bound == 0.0 {
            return MeanEstimate {
                truncated,
                tail: 0.0,
                certified: true,
            };
        }
        let n = self.n_max() as f64;
        match self.tail_rate() {
            Some(r) if r < 1.0 => MeanEstimate {
                truncated,
                tail: self.tail_bound * (n + 1.0 / (1.0 - r)),
                certified: true,
            },
            _ => MeanEstimate {
                truncated,
                tail: self.tail_bound * (n + 1.0),
                certified: false,
            },
        }
    }

    pub fn mgf(&self, theta: f64) -> MgfEstimate {
        let value: f64 = self
            .pmf
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, p)| (theta * k as f64 + p.ln()).exp())
            .sum();
        if self.tail_bound == 0.0 {
            return MgfEstimate {
                value,
                tail: 0.0,
                divergent: false,
            };
        }
        let edge = theta * (self.n_max() + 1) as f64;
        if theta <= 0.0 {
            let tail = (edge + self.tail_bound.ln()).exp();
            return MgfEstimate {
                value: value + tail,
                tail,
                divergent: false,
            };
        }
        match self.tail_rate() {
            Some(r) if r * theta.exp() < 1.0 => {
                let tail =
                    (edge + self.tail_bound.ln()).exp() * (1.0 - r) / (1.0 - r * theta.exp());
                MgfEstimate {
                    value: value + tail,
                    tail,
                    divergent: false,
                }
            }
            _ => MgfEstimate {
                value: f64::INFINITY,
                tail: f64::INFINITY,
                divergent: true,
            },
        }
    }

    /// The law of `X + k`.
    pub fn shifted(&self, k: usize) -> Self {
        let mut pmf = vec![0.0; k];
        pmf.extend_from_slice(&self.pmf);
        IntDist {
            pmf,
            tail_bound: self.tail_bound,
        }
    }

    /// `pi0 * delta_0 + (1 - pi0) * self`.
    pub fn mix_with_zero(&self, pi0: f64) -> Result<Self> {
        let mut pmf: Vec<f64> = self.pmf.iter().map(|p| (1.0 - pi0) * p).collect();
        pmf[0] += pi0;
        Self::new(pmf, (1.0 - pi0) * self.tail_bound)
    }
}

/// `Geom(p)` on `{0, 1, ...}`, `P(N = k) = p (1-p)^k`, stored up to `n_max`.
pub fn geometric(p: f64, n_max: usize) -> Result<IntDist> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "geometric success probability {p} outside (0, 1]"
        )));
    }
    let q = 1.0 - p;
    let mut pmf = Vec::with_capacity(n_max + 1);
    let mut w = p;
    for _ in 0..=n_max {
        pmf.push(w);
        w *= q;
    }
    IntDist::new(pmf, q.powi(n_max as i32 + 1))
}

/// `Geom(p)` truncated once the remaining mass drops to `tail_eps`.
pub fn geometric_to_tail(p: f64, tail_eps: f64) -> Result<IntDist> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "geometric success probability {p} outside (0, 1]"
        )));
    }
    if p == 1.0 {
        return Ok(IntDist::point_mass(0));
    }
    let n = ((tail_eps.ln() / (1.0 - p).ln()).ceil() as usize).saturating_sub(1);
    if n >= SUPPORT_CAP {
        return Err(Error::TruncationCap { cap: SUPPORT_CAP });
    }
    geometric(p, n)
}

/// Half the L1 distance over the union of stored supports. The error bound
/// `(tail_a + tail_b) / 2` covers every way the unstored mass could change
/// the true distance, including support-length mismatch.
pub fn tv_distance(a: &IntDist, b: &IntDist) -> TvDistance {
    let n = a.pmf.len().max(b.pmf.len());
    let l1: f64 = (0..n).map(|k| (a.prob(k) - b.prob(k)).abs()).sum();
    TvDistance {
        value: 0.5 * l1,
        error_bound: 0.5 * (a.tail_bound + b.tail_bound),
    }
}

/// Law of `T_1 + ... + T_N` with `N ~ Geom(p)` and IID `T_i ~ compounder`,
/// via the renewal recursion
/// `f_U(0) = p`, `f_U(n) = (1-p) sum_{m=1}^{n} f_T(m) f_U(n-m)`.
///
/// The support grows until the computed mass reaches what the truncated
/// compounder can produce, minus `tail_eps`. The tail bound is the missing
/// mass `1 - sum f_U`, which dominates the true tail because the recursion
/// is monotone in `f_T`.
pub fn geometric_compound(p: f64, compounder: &IntDist, tail_eps: f64) -> Result<IntDist> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "geometric success probability {p} outside (0, 1]"
        )));
    }
    if compounder.prob(0) > 1e-12 {
        return Err(Error::CompounderHasMassAtZero(compounder.prob(0)));
    }
    if p == 1.0 {
        return Ok(IntDist::point_mass(0));
    }
    let q = 1.0 - p;
    let f_t = compounder.pmf();
    let stored: f64 = f_t[1..].iter().sum();
    // Total mass of the compound built from the stored part of f_T only.
    let reachable = p / (1.0 - q * stored);
    let target = reachable - tail_eps;

    let mut f_u = vec![p];
    let mut cumulative = p;
    while cumulative < target {
        let n = f_u.len();
        if n >= SUPPORT_CAP {
            return Err(Error::TruncationCap { cap: SUPPORT_CAP });
        }
        let upper = n.min(f_t.len() - 1);
        let conv: f64 = (1..=upper).map(|m| f_t[m] * f_u[n - m]).sum();
        let next = q * conv;
        f_u.push(next);
        cumulative += next;
        // Floating stagnation below the target: the remaining deficit is at
        // rounding level of the accumulated sum.
        if target - cumulative <= 4.0 * f64::EPSILON * n as f64 {
            break;
        }
    }
    let tail = (1.0 - cumulative).max(0.0);
    IntDist::new(f_u, tail)
}

/// Checks `upper >=_st lower` through `S_lower(t) <= S_upper(t) + tol` over
/// the union of supports. Beyond either support the unstored mass is only
/// known up to its bound, so both tail bounds are added to `tol` there.
pub fn check_stochastic_dominance(upper: &IntDist, lower: &IntDist, tol: f64) -> DominanceWitness {
    let n = upper.pmf.len().max(lower.pmf.len());
    let su = upper.survival_curve();
    let sl = lower.survival_curve();
    let boundary = upper.n_max().min(lower.n_max());
    let mut worst_t = 0;
    let mut worst_gap = f64::NEG_INFINITY;
    for t in 0..n {
        let u = su.get(t).copied().unwrap_or(upper.tail_bound);
        let l = sl.get(t).copied().unwrap_or(lower.tail_bound);
        let allowance = if t >= boundary {
            upper.tail_bound + lower.tail_bound
        } else {
            0.0
        };
        let gap = l - u - allowance;
        if gap > worst_gap {
            worst_gap = gap;
            worst_t = t;
        }
    }
    DominanceWitness {
        holds: worst_gap <= tol,
        worst_t,
        worst_gap,
    }
}
