//! Chain generators used by the CLI builtins, the benches and the tests.

use rand::Rng;
use rand_distr::Exp1;

use crate::chain::MarkovChain;
use crate::{Error, Result};

/// The two-state chain `[[1/2, 1/2], [1/2 - delta, 1/2 + delta]]`,
/// `0 <= delta < 1/2`. Its hitting time of state 1 from stationarity is
/// exactly a geometric sum with compounding survival `delta^t`.
pub fn two_state(delta: f64) -> Result<MarkovChain> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "two-state delta {delta} outside [0, 1/2)"
        )));
    }
    MarkovChain::from_rows(vec![vec![0.5, 0.5], vec![0.5 - delta, 0.5 + delta]])
}

/// Reference constant for the two-state chain: the bound
/// `delta (1 - 2 delta) / (2 (1 - delta)^2)` on the distance between the
/// hitting time of state 1 and `Geom(pi_1)` obtained from the older
/// compound-geometric approximation. Reported for comparison only.
pub fn comparison_two_state_bound(delta: f64) -> f64 {
    delta * (1.0 - 2.0 * delta) / (2.0 * (1.0 - delta).powi(2))
}

/// Every row equal to `row`: the chain forgets its state after one step.
pub fn iid_rows(row: &[f64]) -> Result<MarkovChain> {
    MarkovChain::from_rows(vec![row.to_vec(); row.len()])
}

/// Lazy birth-death walk on `0..size`: up with probability `up`, down with
/// probability `down`, otherwise stay.
pub fn birth_death(size: usize, up: f64, down: f64) -> Result<MarkovChain> {
    if up <= 0.0 || down <= 0.0 || up + down >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "birth-death rates up = {up}, down = {down} must be positive with up + down < 1"
        )));
    }
    let rows = (0..size)
        .map(|i| {
            let mut row = vec![0.0; size];
            if i + 1 < size {
                row[i + 1] = up;
            }
            if i > 0 {
                row[i - 1] = down;
            }
            row[i] = 1.0 - row.iter().sum::<f64>();
            row
        })
        .collect();
    MarkovChain::from_rows(rows)
}

/// A chain with independent Dirichlet(1, ..., 1) rows, redrawn until it
/// validates as ergodic.
pub fn random_dirichlet<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Result<MarkovChain> {
    if size < 2 {
        return Err(Error::TooFewStates(size));
    }
    loop {
        let rows: Vec<Vec<f64>> = (0..size)
            .map(|_| {
                let draws: Vec<f64> = (0..size).map(|_| rng.sample::<f64, _>(Exp1)).collect();
                let total: f64 = draws.iter().sum();
                let mut row: Vec<f64> = draws.iter().map(|x| x / total).collect();
                // Push the rounding residue into the largest entry.
                let residue = 1.0 - row.iter().sum::<f64>();
                let (imax, _) =
                    row.iter()
                        .enumerate()
                        .fold((0, f64::MIN), |b, (i, &x)| if x > b.1 { (i, x) } else { b });
                row[imax] += residue;
                row
            })
            .collect();
        match MarkovChain::from_rows(rows) {
            Ok(chain) => return Ok(chain),
            Err(Error::Periodic { .. }) | Err(Error::NotIrreducible { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}
