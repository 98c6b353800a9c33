//! Hitting times of finite ergodic Markov chains started from stationarity,
//! compared with geometric sums of strong stationary times.
//!
//! For a target state `j`, the hitting time `W_j` from `pi` is approximated
//! by `U = T_1 + ... + T_N` with `N ~ Geom(pi_j)` and `T_i` IID copies of a
//! strong stationary time for the chain started from `pi` conditioned away
//! from `j`. The crate computes every law involved exactly (up to certified
//! truncation), evaluates the bounds connecting them, and offers a seeded
//! simulator to cross-check the exact laws.
//!
//! ```
//! use geomsum::{bounds, fixtures};
//!
//! let chain = fixtures::two_state(0.25).unwrap();
//! let report = bounds::fastest_report(&chain, 1, &Default::default()).unwrap();
//! assert!(report.all_pass);
//! assert!(report.tv_bound.abs() < 1e-10);
//! ```

pub mod bounds;
pub mod chain;
pub mod dist;
mod error;
pub mod fixtures;
pub mod greedy;
pub mod hitting;
pub mod sim;
pub mod sst;

pub use bounds::{BoundsOptions, BoundsReport};
pub use chain::{MarkovChain, ProbVector};
pub use dist::{DominanceWitness, IntDist, TvDistance};
pub use error::{Error, Result};
pub use greedy::{GreedyClass, GreedyDual, GreedyRegime};
pub use hitting::HittingResult;
pub use sst::{SstProvenance, SstResult};
