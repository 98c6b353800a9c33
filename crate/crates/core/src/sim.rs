//! Seeded Monte Carlo for cross-checking the exact laws.
//!
//! Random streams come from ChaCha8. Replica `r` of a run with master seed
//! `s` uses `ChaCha8Rng::seed_from_u64(s)` switched to stream `r`; streams
//! are disjoint 2^64-block sequences, so replicas never overlap. Results are
//! concatenated in replica order, which makes the output independent of how
//! the replicas are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{MarkovChain, ProbVector};
use crate::dist::IntDist;
use crate::greedy::GreedyDual;
use crate::{Error, Result};

/// Longest simulated path before giving up.
pub const PATH_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub replicas: usize,
    pub samples_per_replica: usize,
}

impl SimConfig {
    /// Splits `samples` over `replicas` streams; the count must divide evenly.
    pub fn new(seed: u64, replicas: usize, samples: usize) -> Result<Self> {
        if replicas == 0 || samples == 0 || !samples.is_multiple_of(replicas) {
            return Err(Error::InvalidParameter(format!(
                "{samples} samples cannot be split over {replicas} replicas"
            )));
        }
        Ok(SimConfig {
            seed,
            replicas,
            samples_per_replica: samples / replicas,
        })
    }

    pub fn total(&self) -> usize {
        self.replicas * self.samples_per_replica
    }
}

pub fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left `u` above the accumulated mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Runs the chain from a draw of `init` until it first sits in `j`.
pub fn sample_hitting_time<R: Rng + ?Sized>(
    chain: &MarkovChain,
    j: usize,
    init: &ProbVector,
    rng: &mut R,
) -> Result<u64> {
    chain.check_state(j)?;
    let mut x = sample_categorical(init, rng);
    let mut t = 0;
    while x != j {
        t += 1;
        if t > PATH_CAP {
            return Err(Error::PathCap(PATH_CAP));
        }
        x = sample_categorical(chain.row(x), rng);
    }
    Ok(t)
}

/// Walks the dual chain from `S_j`: absorb, hold, or move to an
/// intermediate set that absorbs on the next step.
pub fn sample_dual_sst<R: Rng + ?Sized>(gd: &GreedyDual, rng: &mut R) -> Result<u64> {
    let mut t = 0;
    loop {
        t += 1;
        if t > PATH_CAP {
            return Err(Error::PathCap(PATH_CAP));
        }
        let u: f64 = rng.random();
        if u < gd.p_absorb {
            return Ok(t);
        }
        if u >= gd.p_absorb + gd.p_stay {
            return Ok(t + 1);
        }
    }
}

/// Draws `cfg.total()` samples with `draw`, replicas in parallel, results in
/// replica order.
pub fn sample_many<F>(cfg: &SimConfig, draw: F) -> Result<Vec<u64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<u64> + Sync,
{
    let chunks: Vec<Result<Vec<u64>>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(cfg.seed, r);
            (0..cfg.samples_per_replica)
                .map(|_| draw(&mut rng))
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(cfg.total());
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

/// Total variation between the empirical law of `samples` and `exact`.
pub fn empirical_tv(samples: &[u64], exact: &IntDist) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let top = samples.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; top.max(exact.n_max()) + 1];
    for &s in samples {
        counts[s as usize] += 1;
    }
    let n = samples.len() as f64;
    Ok(0.5
        * counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (c as f64 / n - exact.prob(k)).abs())
            .sum::<f64>())
}

/// `sqrt(K / n)` where `K` counts support points with mass at least `1/n`.
pub fn tv_threshold(exact: &IntDist, n: usize) -> f64 {
    let floor = 1.0 / n as f64;
    let k = exact.pmf().iter().filter(|&&p| p >= floor).count().max(1);
    (k as f64 / n as f64).sqrt()
}
