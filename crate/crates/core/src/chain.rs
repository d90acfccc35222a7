//! The truncated age-of-information Markov chain of a single sensor.
//!
//! A sensor captures the monitored state with probability `q = 1 - p` per
//! slot. On success its AoI resets to 1, otherwise it grows by one. Ages of
//! `M` and beyond are merged into the single state `M`, which gives the
//! `M x M` transition matrix
//!
//! ```text
//! [ q  p  0 ... 0  0 ]
//! [ q  0  p ... 0  0 ]
//! [ ...          p  0 ]
//! [ q  0  0 ... 0  p ]
//! [ q  0  0 ... 0  p ]
//! ```
//!
//! AoI states are 1-indexed at every public interface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model of one sensor: failure probability `p` and truncation size `M`.
///
/// `q` is always derived as `1 - p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    p: f64,
    m: usize,
}

impl ChainParams {
    /// Builds the parameters, rejecting `p` outside `[0, 1)` and `M < 2`.
    ///
    /// `p = 1` is rejected: such a sensor never captures the state.
    pub fn new(p: f64, m: usize) -> Result<Self> {
        if !p.is_finite() || !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "failure probability must lie in [0, 1), got {p}"
            )));
        }
        if m < 2 {
            return Err(Error::InvalidParams(format!(
                "truncation size must be at least 2, got {m}"
            )));
        }
        Ok(Self { p, m })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    /// Number of AoI states.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// `p^n`, with `0^0 = 1`.
    #[inline]
    pub(crate) fn p_pow(&self, n: usize) -> f64 {
        self.p.powi(n as i32)
    }
}

/// Dense row-major `M x M` transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    m: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.m
    }

    /// Probability of moving from AoI `from` to AoI `to` (both 1-indexed).
    pub fn at(&self, from: usize, to: usize) -> f64 {
        assert!((1..=self.m).contains(&from) && (1..=self.m).contains(&to));
        self.entries[(from - 1) * self.m + (to - 1)]
    }

    /// Row of the 1-indexed state `from`, as a 0-indexed slice.
    pub fn row(&self, from: usize) -> &[f64] {
        let start = (from - 1) * self.m;
        &self.entries[start..start + self.m]
    }

    /// Left multiplication `v * T` of a row vector.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.m);
        let mut out = vec![0.0; self.m];
        for (r, &weight) in v.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            let row = &self.entries[r * self.m..(r + 1) * self.m];
            for (o, &t) in out.iter_mut().zip(row) {
                *o += weight * t;
            }
        }
        out
    }
}

/// Stationary distribution `h` of the truncated chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub h: Vec<f64>,
}

pub fn build_transition(params: &ChainParams) -> TransitionMatrix {
    let m = params.m();
    let (p, q) = (params.p(), params.q());
    let mut entries = vec![0.0; m * m];
    for r in 0..m {
        entries[r * m] += q;
        let next = (r + 1).min(m - 1);
        entries[r * m + next] += p;
    }
    TransitionMatrix { m, entries }
}

/// Closed form `[q, qp, qp^2, ..., qp^(M-2), p^(M-1)]`.
pub fn steady_state(params: &ChainParams) -> SteadyState {
    let m = params.m();
    let q = params.q();
    let mut h: Vec<f64> = (0..m - 1).map(|j| q * params.p_pow(j)).collect();
    h.push(params.p_pow(m - 1));
    SteadyState { h }
}

/// Advances the hidden AoI by one slot given a uniform draw `u` in `[0, 1)`.
///
/// # Panics
///
/// If `aoi` is outside `1..=M`.
#[inline]
pub fn step_aoi(params: &ChainParams, aoi: usize, u: f64) -> usize {
    assert!(
        (1..=params.m()).contains(&aoi),
        "AoI state {aoi} outside 1..={}",
        params.m()
    );
    if u < params.q() {
        1
    } else {
        (aoi + 1).min(params.m())
    }
}
