//! Finite ergodic Markov chains: validation, stationary laws and
//! distribution propagation.
//!
//! All arithmetic is `f64`. The transition matrix is stored row-major and
//! every operation works on state indices; labels are carried only for
//! reporting.

use std::collections::VecDeque;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{Error, Result};

/// Row sums and normalisation must hold to this absolute tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Bound on `max |pi P - pi|` accepted from the stationary solve.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-12;

/// A probability vector over the states of a chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Checks nonnegativity and normalisation within [`STOCHASTIC_TOL`].
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProbVector("empty vector".into()));
        }
        if let Some((i, x)) = entries
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_finite() || **x < 0.0)
        {
            return Err(Error::InvalidProbVector(format!("entry {i} is {x}")));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidProbVector(format!("entries sum to {total}")));
        }
        Ok(ProbVector(entries))
    }

    /// Dirac mass on state `k` of an `n`-state space.
    pub fn point_mass(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidState { index: k, size: n });
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Ok(ProbVector(v))
    }

    // Propagated vectors are sums of nonnegative products; they are exact up
    // to rounding and skip the normalisation check.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        ProbVector(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ProbVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A validated irreducible, aperiodic, row-stochastic chain with its cached
/// stationary distribution.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    states: Vec<String>,
    n: usize,
    p: Vec<f64>,
    pi: ProbVector,
}

impl MarkovChain {
    /// Validates `matrix` and solves for the stationary law.
    pub fn new(matrix: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        let n = matrix.len();
        if labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} rows",
                labels.len(),
                n
            )));
        }
        if n < 2 {
            return Err(Error::TooFewStates(n));
        }
        let mut p = Vec::with_capacity(n * n);
        for (row, entries) in matrix.iter().enumerate() {
            if entries.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {row} has {} entries, expected {n}",
                    entries.len()
                )));
            }
            let mut sum = 0.0;
            for (col, &x) in entries.iter().enumerate() {
                if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                    return Err(Error::NotStochastic {
                        row,
                        detail: format!("entry {col} is {x}"),
                    });
                }
                sum += x;
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic {
                    row,
                    detail: format!("row sums to {sum}"),
                });
            }
            p.extend_from_slice(entries);
        }
        check_ergodic(n, &p)?;
        let pi = solve_stationary(n, &p)?;
        Ok(MarkovChain {
            states: labels,
            n,
            p,
            pi,
        })
    }

    /// Builds a chain with labels `"0"`, `"1"`, ...
    pub fn from_rows(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..matrix.len()).map(|i| i.to_string()).collect();
        Self::new(matrix, labels)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn check_state(&self, j: usize) -> Result<()> {
        if j < self.n {
            Ok(())
        } else {
            Err(Error::InvalidState {
                index: j,
                size: self.n,
            })
        }
    }

    /// One-step transition probability `P(k, l)`.
    #[inline]
    pub fn p(&self, k: usize, l: usize) -> f64 {
        self.p[k * self.n + l]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.p[k * self.n..(k + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|k| self.row(k).to_vec()).collect()
    }

    pub fn stationary(&self) -> &ProbVector {
        &self.pi
    }

    pub fn pi(&self, k: usize) -> f64 {
        self.pi[k]
    }

    /// Row vector times `P`.
    pub fn step(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (k, &mass) in v.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (o, &pkl) in out.iter_mut().zip(self.row(k)) {
                *o += mass * pkl;
            }
        }
        out
    }

    /// `init * P^t` by repeated vector-matrix products.
    pub fn step_distribution(&self, init: &ProbVector, t: usize) -> Result<ProbVector> {
        if init.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "initial law has {} entries for {} states",
                init.len(),
                self.n
            )));
        }
        let mut v = init.as_slice().to_vec();
        for _ in 0..t {
            v = self.step(&v);
        }
        Ok(ProbVector::from_raw(v))
    }

    /// `pi` conditioned to avoid state `j`.
    pub fn restricted_stationary(&self, j: usize) -> Result<ProbVector> {
        self.check_state(j)?;
        let rest = 1.0 - self.pi[j];
        if rest < 1e-12 {
            return Err(Error::DegenerateMass(rest));
        }
        let v = self
            .pi
            .iter()
            .enumerate()
            .map(|(l, &x)| if l == j { 0.0 } else { x / rest })
            .collect();
        Ok(ProbVector::from_raw(v))
    }

    /// Largest detailed-balance defect `|pi_k P(k,l) - pi_l P(l,k)|`.
    pub fn detailed_balance_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.n {
            for l in (k + 1)..self.n {
                let d = (self.pi[k] * self.p(k, l) - self.pi[l] * self.p(l, k)).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_reversible(&self, tol: f64) -> bool {
        self.detailed_balance_defect() <= tol
    }

    /// The same chain with state `perm[i]` of `self` becoming state `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        let matrix = perm
            .iter()
            .map(|&a| perm.iter().map(|&b| self.p(a, b)).collect())
            .collect();
        let labels = perm.iter().map(|&a| self.states[a].clone()).collect();
        Self::new(matrix, labels)
    }
}

fn reach(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> Vec<Option<usize>> {
    let mut level = vec![None; n];
    level[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let lu = level[u].unwrap_or(0);
        for (v, lv) in level.iter_mut().enumerate() {
            if lv.is_none() && adjacent(u, v) {
                *lv = Some(lu + 1);
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_ergodic(n: usize, p: &[f64]) -> Result<()> {
    let forward = reach(n, |u, v| p[u * n + v] > 0.0);
    if let Some(v) = forward.iter().position(Option::is_none) {
        return Err(Error::NotIrreducible { unreachable: v });
    }
    let backward = reach(n, |u, v| p[v * n + u] > 0.0);
    if let Some(v) = backward.iter().position(Option::is_none) {
        return Err(Error::NotIrreducible { unreachable: v });
    }
    // Every edge u -> v closes a walk through 0 of length level(u) + 1 - level(v)
    // modulo the period; the gcd of these differences is the period.
    let mut period = 0;
    for u in 0..n {
        for v in 0..n {
            if p[u * n + v] > 0.0 {
                let lu = forward[u].unwrap_or(0) as isize;
                let lv = forward[v].unwrap_or(0) as isize;
                period = gcd(period, (lu + 1 - lv).unsigned_abs());
            }
        }
    }
    if period != 1 {
        return Err(Error::Periodic { period });
    }
    Ok(())
}

fn stationary_residual(n: usize, p: &[f64], pi: &[f64]) -> f64 {
    (0..n)
        .map(|l| {
            let flow: f64 = (0..n).map(|k| pi[k] * p[k * n + l]).sum();
            (flow - pi[l]).abs()
        })
        .fold(0.0, f64::max)
}

/// Solves `pi (P - I) = 0`, `sum pi = 1` by dense LU with one refinement step.
fn solve_stationary(n: usize, p: &[f64]) -> Result<ProbVector> {
    let mut a = DMatrix::<f64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            a[(r, c)] = p[c * n + r] - if r == c { 1.0 } else { 0.0 };
        }
    }
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let lu = a.clone().lu();
    let mut x = lu.solve(&b).ok_or(Error::SingularSystem)?;
    let r = &b - &a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    if x.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::SingularSystem);
    }
    let total: f64 = x.iter().sum();
    let pi: Vec<f64> = x.iter().map(|v| v / total).collect();
    let residual = stationary_residual(n, p, &pi);
    if residual > STATIONARY_RESIDUAL_TOL {
        return Err(Error::StationaryResidual { residual });
    }
    Ok(ProbVector::from_raw(pi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn two_state_quarter() {
        let c = MarkovChain::from_rows(vec![vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        assert!(close(c.pi(0), 1.0 / 3.0, 1e-14));
        assert!(close(c.pi(1), 2.0 / 3.0, 1e-14));
    }

    #[test]
    fn rejects_periodic() {
        let err = MarkovChain::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap_err();
        assert_eq!(err, Error::Periodic { period: 2 });
    }

    #[test]
    fn rejects_period_three() {
        let rows = vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ];
        assert_eq!(
            MarkovChain::from_rows(rows).unwrap_err(),
            Error::Periodic { period: 3 }
        );
    }

    #[test]
    fn rejects_bad_row_sum() {
        let err = MarkovChain::from_rows(vec![vec![0.5, 0.6], vec![0.2, 0.8]]).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 0, .. }));
    }

    #[test]
    fn rejects_negative_entry() {
        let err = MarkovChain::from_rows(vec![vec![1.1, -0.1], vec![0.2, 0.8]]).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 0, .. }));
    }

    #[test]
    fn rejects_reducible() {
        let err = MarkovChain::from_rows(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::NotIrreducible { .. }));
    }

    #[test]
    fn rejects_single_state_and_shape() {
        assert_eq!(
            MarkovChain::from_rows(vec![vec![1.0]]).unwrap_err(),
            Error::TooFewStates(1)
        );
        assert!(matches!(
            MarkovChain::from_rows(vec![vec![0.5, 0.5], vec![1.0]]).unwrap_err(),
            Error::DimensionMismatch(_)
        ));
        assert!(matches!(
            MarkovChain::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]], vec!["a".into()]).unwrap_err(),
            Error::DimensionMismatch(_)
        ));
    }

    #[test]
    fn iid_rows_stationary_is_row() {
        let r = vec![0.5, 0.3, 0.2];
        let c = MarkovChain::from_rows(vec![r.clone(), r.clone(), r.clone()]).unwrap();
        for (a, b) in c.stationary().iter().zip(&r) {
            assert!(close(*a, *b, 1e-14));
        }
    }

    #[test]
    fn doubly_stochastic_is_uniform() {
        let c = MarkovChain::from_rows(vec![
            vec![0.2, 0.5, 0.3],
            vec![0.3, 0.2, 0.5],
            vec![0.5, 0.3, 0.2],
        ])
        .unwrap();
        for &x in c.stationary().iter() {
            assert!(close(x, 1.0 / 3.0, 1e-14));
        }
    }

    #[test]
    fn step_distribution_reads_rows() {
        let c = MarkovChain::from_rows(vec![vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let init = ProbVector::point_mass(2, 1).unwrap();
        let one = c.step_distribution(&init, 1).unwrap();
        assert_eq!(one.as_slice(), &[0.25, 0.75]);
        let two = c.step_distribution(&init, 2).unwrap();
        assert!(close(two[0], 5.0 / 16.0, 1e-15));
        assert!(close(two[1], 11.0 / 16.0, 1e-15));
        assert_eq!(c.step_distribution(&init, 0).unwrap(), init);
    }

    #[test]
    fn restricted_stationary_cases() {
        let c = MarkovChain::from_rows(vec![vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let r = c.restricted_stationary(1).unwrap();
        assert!(close(r[0], 1.0, 1e-15));
        assert_eq!(r[1], 0.0);

        let u = MarkovChain::from_rows(vec![vec![0.25; 4]; 4]).unwrap();
        let r = u.restricted_stationary(0).unwrap();
        assert_eq!(r[0], 0.0);
        for &x in &r[1..] {
            assert!(close(x, 1.0 / 3.0, 1e-14));
        }

        let row = vec![0.5, 0.3, 0.2];
        let iid = MarkovChain::from_rows(vec![row.clone(), row.clone(), row]).unwrap();
        let r = iid.restricted_stationary(2).unwrap();
        assert!(close(r[0], 0.625, 1e-14));
        assert!(close(r[1], 0.375, 1e-14));
        assert_eq!(r[2], 0.0);
        assert!(matches!(
            iid.restricted_stationary(3),
            Err(Error::InvalidState { .. })
        ));
    }

    #[test]
    fn reversibility() {
        let two = MarkovChain::from_rows(vec![vec![0.9, 0.1], vec![0.6, 0.4]]).unwrap();
        assert!(two.is_reversible(1e-12));
        let sym = MarkovChain::from_rows(vec![
            vec![0.2, 0.5, 0.3],
            vec![0.5, 0.1, 0.4],
            vec![0.3, 0.4, 0.3],
        ])
        .unwrap();
        assert!(sym.is_reversible(1e-12));
        let cyc = MarkovChain::from_rows(vec![
            vec![0.0, 0.9, 0.1],
            vec![0.1, 0.0, 0.9],
            vec![0.9, 0.1, 0.0],
        ])
        .unwrap();
        assert!(!cyc.is_reversible(1e-12));
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbVector::new(vec![0.6, 0.5]).is_err());
        assert!(ProbVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbVector::new(vec![]).is_err());
    }
}
