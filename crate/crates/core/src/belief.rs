//! Belief-state evolution of one sensor.
//!
//! After the AP samples a sensor and observes AoI `k`, the belief `i` slots
//! later is the row `e_k T^i`. That row has a closed form: a geometric prefix
//! `[q, qp, ..., qp^(i-1)]` followed by a single mass `p^i` at position
//! `min(i + k, M)`. From `i = M - 1` on it equals the steady state, so a
//! belief is fully described by the pair `(k, i)` with `i` saturating at
//! `M - 1`.

use crate::chain::{steady_state, ChainParams};
use crate::error::{Error, Result};

/// Belief summarized by its evolution branch `k` (the AoI observed at the
/// last sample) and the slots `i` elapsed since that sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BranchState {
    k: usize,
    i: usize,
}

/// What the AP does with a sensor in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Rest,
    /// Sample and observe the AoI held at the end of the previous slot.
    Sample { observed: usize },
}

impl BranchState {
    /// `1 <= k <= M`, `i >= 1`; `i` is saturated at `M - 1`.
    pub fn new(params: &ChainParams, k: usize, i: usize) -> Result<Self> {
        let m = params.m();
        if !(1..=m).contains(&k) {
            return Err(Error::Domain(format!("branch {k} outside 1..={m}")));
        }
        if i == 0 {
            return Err(Error::Domain("elapsed slots must be at least 1".into()));
        }
        Ok(Self { k, i: i.min(m - 1) })
    }

    /// The belief held before any observation: the steady state.
    pub fn steady(params: &ChainParams) -> Self {
        Self {
            k: params.m(),
            i: params.m() - 1,
        }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn i(&self) -> usize {
        self.i
    }

    pub fn is_steady(&self, params: &ChainParams) -> bool {
        self.i >= params.m() - 1
    }

    /// Belief transition for one slot.
    ///
    /// Resting ages the belief by one slot. Sampling with observation `k'`
    /// resets it to `e_{k'} T`, i.e. the branch state `(k', 1)`.
    pub fn evolve(&self, params: &ChainParams, action: Action) -> Result<Self> {
        match action {
            Action::Rest => Ok(self.rest(params)),
            Action::Sample { observed } => Self::new(params, observed, 1),
        }
    }

    #[inline]
    pub(crate) fn rest(&self, params: &ChainParams) -> Self {
        Self {
            k: self.k,
            i: (self.i + 1).min(params.m() - 1),
        }
    }

    #[inline]
    pub(crate) fn reset(observed: usize) -> Self {
        Self { k: observed, i: 1 }
    }
}

/// Probability vector over AoI states `1..=M` (stored 0-indexed).
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefVector {
    pub pi: Vec<f64>,
}

impl BeliefVector {
    /// Expected AoI `pi . [1, 2, ..., M]`.
    pub fn mean(&self) -> f64 {
        self.pi
            .iter()
            .enumerate()
            .map(|(j, &w)| (j + 1) as f64 * w)
            .sum()
    }
}

pub fn branch_belief(params: &ChainParams, s: BranchState) -> BeliefVector {
    let m = params.m();
    if s.is_steady(params) {
        return BeliefVector {
            pi: steady_state(params).h,
        };
    }
    let q = params.q();
    let mut pi = vec![0.0; m];
    for (j, slot) in pi.iter_mut().take(s.i).enumerate() {
        *slot = q * params.p_pow(j);
    }
    pi[(s.i + s.k).min(m) - 1] += params.p_pow(s.i);
    BeliefVector { pi }
}

/// Expected AoI obtained by sampling in state `(k, i)`:
/// `(1 - p^i)/(1 - p) - i p^i + p^i min(i + k, M)`.
///
/// Evaluated as `hbar + p^i (min(i + k, M) - i - (1 - p^(M-i))/(1 - p))`.
/// The bracket carries the exact sign of `A[k][i] - hbar`, so comparisons
/// against the steady-state value are not decided by rounding noise.
pub fn expected_aoi(params: &ChainParams, s: BranchState) -> f64 {
    let hbar = steady_expected_aoi(params);
    if s.is_steady(params) {
        return hbar;
    }
    let m = params.m();
    let reach = ((s.i + s.k).min(m) - s.i) as f64;
    let offset = reach - (1.0 - params.p_pow(m - s.i)) / params.q();
    hbar + params.p_pow(s.i) * offset
}

/// Expected AoI of the steady state, `(1 - p^M)/(1 - p)`.
pub fn steady_expected_aoi(params: &ChainParams) -> f64 {
    (1.0 - params.p_pow(params.m())) / params.q()
}

/// All expected AoI values `A[k][i]` for `k` in `1..=M`, `i` in `1..=M-1`.
///
/// Lookups with `i >= M - 1` return the steady-state value.
#[derive(Debug, Clone)]
pub struct ExpectedAoiTable {
    m: usize,
    values: Vec<f64>,
}

impl ExpectedAoiTable {
    pub fn new(params: &ChainParams) -> Self {
        let m = params.m();
        let width = m - 1;
        let mut values = Vec::with_capacity(m * width);
        for k in 1..=m {
            for i in 1..=width {
                values.push(expected_aoi(params, BranchState { k, i }));
            }
        }
        Self { m, values }
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> f64 {
        let width = self.m - 1;
        self.values[(k - 1) * width + i.min(width) - 1]
    }

    #[inline]
    pub fn at(&self, s: BranchState) -> f64 {
        self.get(s.k, s.i)
    }

    /// Every tabulated value, unsorted.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
