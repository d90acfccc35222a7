//! Minimum-age sampling of partially observable sensors.
//!
//! An access point polls one of `N` sensors per slot. Each sensor's age of
//! information (AoI) follows a truncated Markov chain and is only revealed
//! when the sensor is sampled, so the access point schedules on beliefs.
//!
//! * [`chain`]: the per-sensor AoI chain and its steady state.
//! * [`belief`]: closed-form belief evolution and expected AoI.
//! * [`threshold`]: per-branch sampling thresholds of the relaxed greedy
//!   policy, plus a real Lambert W0.
//! * [`relaxed`]: long-run sampling and AoI rates of the relaxed policy and
//!   the search for the level that samples once per slot.
//! * [`baselines`]: random sampling and a universal lower bound.
//! * [`sim`]: seeded Monte Carlo simulation of the greedy, relaxed greedy and
//!   random policies.
//! * [`experiments`]: scenario sweeps and CSV output.

pub mod baselines;
pub mod belief;
pub mod chain;
pub mod error;
pub mod experiments;
pub mod relaxed;
pub mod selftest;
pub mod sim;
pub mod threshold;

pub use belief::{BranchState, ExpectedAoiTable};
pub use chain::ChainParams;
pub use error::{Error, Result};
pub use threshold::{Threshold, ThresholdTable};
