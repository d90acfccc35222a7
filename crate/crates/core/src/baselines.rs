//! Closed-form benchmarks: random sampling and the universal lower bound.
//!
//! The lower bound comes from a fictitious proactive transmission policy in
//! which each sensor transmits by itself whenever its AoI is below `L`, and
//! with probability `omega` when it equals `L`. Its cycle analysis runs on
//! the untruncated chain (cycle lengths are geometric), so `M` does not enter
//! the bound.

use crate::belief::steady_expected_aoi;
use crate::chain::ChainParams;
use crate::error::{Error, Result};

/// Largest threshold tried when searching for `L*`.
const MAX_LEVEL: u32 = 1 << 20;

/// Per-slot rates of the proactive policy for a single sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProactiveRates {
    pub tx_per_slot: f64,
    pub aoi_per_slot: f64,
}

/// Transmissions per slot `1 - omega p^L - (1 - omega) p^(L-1)` and
/// transmitted AoI per slot
/// `((L-1) p^L - L p^(L-1) + 1)/q + omega L q p^(L-1)`.
pub fn proactive_rates(params: &ChainParams, level: u32, omega: f64) -> Result<ProactiveRates> {
    if level == 0 || level as usize > params.m() {
        return Err(Error::Domain(format!(
            "transmission threshold must lie in 1..={}, got {level}",
            params.m()
        )));
    }
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::Domain(format!("omega must lie in (0, 1], got {omega}")));
    }
    Ok(proactive_unchecked(params.p(), level, omega))
}

fn proactive_unchecked(p: f64, level: u32, omega: f64) -> ProactiveRates {
    let q = 1.0 - p;
    let l = level as f64;
    let p_l = p.powi(level as i32);
    let p_lm1 = p.powi(level as i32 - 1);
    ProactiveRates {
        tx_per_slot: 1.0 - omega * p_l - (1.0 - omega) * p_lm1,
        aoi_per_slot: ((l - 1.0) * p_l - l * p_lm1 + 1.0) / q + omega * l * q * p_lm1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundResult {
    /// Smallest `L` whose full-probability transmissions reach one per slot.
    /// `None` when no finite `L` does (a single imperfect sensor); the bound
    /// is then the `L -> infinity` limit.
    pub l_star: Option<u32>,
    pub omega_star: f64,
    /// Lower bound on the long-run sampled AoI per slot of any policy.
    pub l_b: f64,
}

/// Universal lower bound from the proactive policy tuned to one
/// transmission per slot on average.
///
/// `L*` is found by search; `omega*` then solves the (linear) rate
/// constraint exactly.
pub fn lower_bound(sensors: &[ChainParams]) -> Result<LowerBoundResult> {
    if sensors.is_empty() {
        return Err(Error::Domain("at least one sensor is required".into()));
    }
    // sum(1 - p^L) >= 1 rewritten as sum(p^L) <= N - 1, which stays exact
    // when every p^L is far below machine epsilon
    let n_minus_1 = (sensors.len() - 1) as f64;
    let misses = |level: u32| -> f64 { sensors.iter().map(|s| s.p().powi(level as i32)).sum() };
    let reachable = sensors.len() > 1 || sensors[0].p() == 0.0;
    let found = if reachable {
        (1..=MAX_LEVEL).find(|&l| misses(l) <= n_minus_1)
    } else {
        None
    };
    let Some(level) = found else {
        // Only reachable with one sensor: the policy then transmits at every
        // AoI and collects the untruncated mean 1/q.
        let l_b = sensors.iter().map(|s| 1.0 / s.q()).sum();
        return Ok(LowerBoundResult {
            l_star: None,
            omega_star: 1.0,
            l_b,
        });
    };
    let slope: f64 = sensors
        .iter()
        .map(|s| s.p().powi(level as i32 - 1) - s.p().powi(level as i32))
        .sum();
    let omega = ((misses(level - 1) - n_minus_1) / slope).clamp(f64::MIN_POSITIVE, 1.0);
    let l_b = sensors
        .iter()
        .map(|s| proactive_unchecked(s.p(), level, omega).aoi_per_slot)
        .sum();
    Ok(LowerBoundResult {
        l_star: Some(level),
        omega_star: omega,
        l_b,
    })
}

/// Closed forms for `N` identical sensors:
/// `L* = ceil(log_p(1 - 1/N))` and
/// `omega* = (p^(L*-1) + 1/N - 1) / (p^(L*-1) - p^L*)`.
///
/// Defined for `N >= 2`; `p = 0` gives `L* = 1`, `omega* = 1/N`.
pub fn lower_bound_symmetric(p: f64, n: usize) -> Result<(u32, f64)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1), got {p}")));
    }
    if n < 2 {
        return Err(Error::Domain(
            "the symmetric closed form needs at least two sensors".into(),
        ));
    }
    let inv_n = 1.0 / n as f64;
    if p == 0.0 {
        return Ok((1, inv_n));
    }
    let level = ((1.0 - inv_n).ln() / p.ln()).ceil().max(1.0) as u32;
    let p_lm1 = p.powi(level as i32 - 1);
    let p_l = p_lm1 * p;
    Ok((level, (p_lm1 + inv_n - 1.0) / (p_lm1 - p_l)))
}

/// Random sampling: `(1/N) sum_n (1 - p_n^M)/(1 - p_n)`.
pub fn random_policy_value(sensors: &[ChainParams]) -> Result<f64> {
    if sensors.is_empty() {
        return Err(Error::Domain("at least one sensor is required".into()));
    }
    Ok(sensors.iter().map(steady_expected_aoi).sum::<f64>() / sensors.len() as f64)
}

/// Random sampling averaged over failure probabilities drawn i.i.d. from
/// `U[1/2 - w/2, 1/2 + w/2]`, in the large-`M` limit:
/// `(1/w) ln((1 + w)/(1 - w))`.
pub fn random_policy_value_uniform(width: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&width) {
        return Err(Error::Domain(format!(
            "interval width must lie in [0, 1), got {width}"
        )));
    }
    if width < 1e-6 {
        // series 2 + 2 w^2 / 3
        return Ok(2.0 + 2.0 * width * width / 3.0);
    }
    Ok(((1.0 + width) / (1.0 - width)).ln() / width)
}
