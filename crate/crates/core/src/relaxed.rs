//! Long-run performance of the relaxed greedy policy.
//!
//! Under the relaxed policy every sensor is sampled whenever its expected AoI
//! drops below a common level `eta`, so sensors decouple. For one sensor with
//! thresholds `gamma_k`, let `d(k, T)` be the expected number of samples in
//! `T` slots starting right after observing AoI `k`. Then
//!
//! ```text
//! d(k, T) = 0                                    T < gamma_k
//! d(k, gamma_k + tau) = 1 + pi_{k,gamma_k} . d(., tau)
//! ```
//!
//! and the reward counterpart `R(k, T)` collects `A[k][gamma_k]` instead of 1.
//! Both grow affinely, `d(k, T) ~ alpha T + b(k)`. Substituting that form and
//! pinning `b(M) = 0` leaves an `M x M` linear system in
//! `[b(1), ..., b(M-1), -alpha]` whose coefficient matrix is the stacked
//! threshold beliefs minus the identity, with column `M` replaced by the
//! thresholds; the right-hand side is all `-1` for the sampling rate and
//! `-A[k][gamma_k]` for the AoI rate.
//!
//! The aggregate level `eta*` is then picked so that the active sensors
//! (`hbar_n < eta`) are sampled about once per slot in total.

use nalgebra::DMatrix;

use crate::belief::{branch_belief, expected_aoi, steady_expected_aoi, BranchState, ExpectedAoiTable};
use crate::chain::ChainParams;
use crate::error::{Error, Result};
use crate::threshold::{gamma_analytic, ThresholdTable};

/// Threshold beliefs and rewards of one sensor at a fixed `eta`.
#[derive(Debug, Clone)]
pub struct RecurrenceSystem {
    params: ChainParams,
    gammas: Vec<usize>,
    /// `rows[k - 1] = pi_{k, gamma_k}`
    rows: Vec<Vec<f64>>,
    /// `rewards[k - 1] = A[k][gamma_k]`
    rewards: Vec<f64>,
}

impl RecurrenceSystem {
    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn gammas(&self) -> &[usize] {
        &self.gammas
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    fn size(&self) -> usize {
        self.gammas.len()
    }
}

/// Rejects tables with a `Never` entry: such a branch is absorbing and the
/// sensor's long-run sampling rate is zero.
pub fn build_system(params: &ChainParams, table: &ThresholdTable) -> Result<RecurrenceSystem> {
    let m = params.m();
    assert_eq!(table.gamma.len(), m, "threshold table size does not match M");
    let mut gammas = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    let mut rewards = Vec::with_capacity(m);
    for k in 1..=m {
        let g = table
            .get(k)
            .finite()
            .ok_or(Error::AbsorbingBranch { branch: k })?;
        let s = BranchState::new(params, k, g)?;
        gammas.push(g);
        rows.push(branch_belief(params, s).pi);
        rewards.push(expected_aoi(params, s));
    }
    Ok(RecurrenceSystem {
        params: *params,
        gammas,
        rows,
        rewards,
    })
}

/// Long-run samples per slot and expected AoI collected per slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerSensorRates {
    pub d_bar: f64,
    pub r_bar: f64,
}

/// Both rates from a single factorization of the coefficient matrix.
pub fn rates(sys: &RecurrenceSystem) -> Result<PerSensorRates> {
    let m = sys.size();
    let coefficients = DMatrix::from_fn(m, m, |r, c| {
        if c == m - 1 {
            sys.gammas[r] as f64
        } else {
            sys.rows[r][c] - if r == c { 1.0 } else { 0.0 }
        }
    });
    let rhs = DMatrix::from_fn(m, 2, |r, c| if c == 0 { -1.0 } else { -sys.rewards[r] });
    let solution = coefficients.lu().solve(&rhs).ok_or_else(|| {
        Error::Singular(format!(
            "recurrence system for p = {}, M = {}, thresholds {:?}",
            sys.params.p(),
            sys.params.m(),
            sys.gammas
        ))
    })?;
    let d_bar = -solution[(m - 1, 0)];
    let r_bar = -solution[(m - 1, 1)];
    if !d_bar.is_finite() || !r_bar.is_finite() {
        return Err(Error::Singular(format!(
            "non-finite rates for p = {}, M = {}",
            sys.params.p(),
            sys.params.m()
        )));
    }
    Ok(PerSensorRates { d_bar, r_bar })
}

/// Samples per slot, `d-bar`.
pub fn sampling_rate(sys: &RecurrenceSystem) -> Result<f64> {
    rates(sys).map(|r| r.d_bar)
}

/// Expected AoI collected per slot, `R-bar`.
pub fn aoi_rate(sys: &RecurrenceSystem) -> Result<f64> {
    rates(sys).map(|r| r.r_bar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrenceKind {
    /// `d(k, T)`: number of samples.
    Count,
    /// `R(k, T)`: expected AoI collected.
    Reward,
}

/// Exact dynamic-programming evaluation of `d(., T)` or `R(., T)`.
pub fn iterate_recurrence(sys: &RecurrenceSystem, horizon: usize, kind: RecurrenceKind) -> Vec<f64> {
    let m = sys.size();
    let sparse: Vec<Vec<(usize, f64)>> = sys
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(j, &w)| (j, w))
                .collect()
        })
        .collect();
    let base: Vec<f64> = match kind {
        RecurrenceKind::Count => vec![1.0; m],
        RecurrenceKind::Reward => sys.rewards.clone(),
    };
    let depth = sys.gammas.iter().copied().max().unwrap_or(1) + 1;
    // history[t % depth] holds the vector at horizon t; t = 0 is all zeros
    let mut history = vec![vec![0.0; m]; depth];
    for t in 1..=horizon {
        let mut current = vec![0.0; m];
        for k in 0..m {
            let g = sys.gammas[k];
            if t < g {
                continue;
            }
            let earlier = &history[(t - g) % depth];
            let tail: f64 = sparse[k].iter().map(|&(j, w)| w * earlier[j]).sum();
            current[k] = base[k] + tail;
        }
        history[t % depth] = current;
    }
    history[horizon % depth].clone()
}

/// How [`solve_eta`] walks the candidate levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaSearch {
    /// Evaluate every candidate level.
    Exhaustive,
    /// Binary search for the first level with `d-hat >= 1` and the last
    /// with `d-hat <= 1`, then evaluate `window` candidates on each side of
    /// both.
    Bisection { window: usize },
}

impl Default for EtaSearch {
    fn default() -> Self {
        EtaSearch::Bisection { window: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct EtaSolution {
    pub eta_star: f64,
    /// Aggregate sampling rate at `eta_star`.
    pub d_hat: f64,
    /// Indices (into the caller's sensor list) with `hbar_n < eta_star`.
    pub active: Vec<usize>,
    /// Per-sensor rates at `eta_star`, `None` for inactive sensors.
    pub rates: Vec<Option<PerSensorRates>>,
    /// Long-run expected sampled AoI per sample, `sum R-bar / d-hat`.
    pub j_value: f64,
    /// Candidate levels evaluated by the search.
    pub evaluated: usize,
    /// Places where `d-hat` decreased between consecutive evaluated levels.
    pub monotone_violations: usize,
}

/// Aggregate sampling rate and per-sensor rates at one level.
struct LevelEval {
    eta: f64,
    d_hat: f64,
    rates: Vec<Option<PerSensorRates>>,
}

/// Evaluates levels for a fixed sensor set, reusing work across sensors
/// with identical parameters.
struct LevelEvaluator<'a> {
    sensors: &'a [ChainParams],
    hbar: Vec<f64>,
    /// `group[n]` is the first sensor with the same parameters as `n`.
    group: Vec<usize>,
}

impl<'a> LevelEvaluator<'a> {
    fn new(sensors: &'a [ChainParams]) -> Self {
        let hbar = sensors.iter().map(steady_expected_aoi).collect();
        let group = (0..sensors.len())
            .map(|n| sensors.iter().position(|s| *s == sensors[n]).unwrap())
            .collect();
        Self { sensors, hbar, group }
    }

    fn eval(&self, eta: f64) -> Result<LevelEval> {
        let mut rates: Vec<Option<PerSensorRates>> = vec![None; self.sensors.len()];
        for n in 0..self.sensors.len() {
            if self.hbar[n] >= eta {
                continue;
            }
            let g = self.group[n];
            rates[n] = match rates[g] {
                Some(r) if g != n => Some(r),
                _ => Some(sensor_rates(&self.sensors[n], eta)?),
            };
        }
        let d_hat = rates.iter().flatten().map(|r| r.d_bar).sum();
        Ok(LevelEval { eta, d_hat, rates })
    }
}

fn sensor_rates(params: &ChainParams, eta: f64) -> Result<PerSensorRates> {
    let table = gamma_analytic(params, eta);
    rates(&build_system(params, &table)?)
}

/// Levels at which the aggregate rate can change, one per constant piece.
///
/// `d-hat` only changes when `eta` crosses an attainable expected AoI, so
/// one representative per gap between consecutive attainable values (plus
/// one above the largest) covers every distinct outcome.
fn candidate_levels(sensors: &[ChainParams]) -> Vec<f64> {
    let mut values: Vec<f64> = Vec::new();
    let mut seen: Vec<ChainParams> = Vec::new();
    for s in sensors {
        if seen.contains(s) {
            continue;
        }
        seen.push(*s);
        values.extend_from_slice(ExpectedAoiTable::new(s).values());
    }
    values.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        match distinct.last() {
            Some(&last) if v - last <= 1e-12 * v.abs().max(1.0) => {}
            _ => distinct.push(v),
        }
    }
    let mut levels = Vec::with_capacity(distinct.len() + 1);
    levels.push(distinct[0] / 2.0);
    levels.extend(distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    levels.push(distinct[distinct.len() - 1] + 1.0);
    levels
}

/// Finds the level `eta*` that brings the aggregate sampling rate closest
/// to one sample per slot.
///
/// Among levels equally close to one, the largest level with `d-hat <= 1`
/// wins; if every tied level over-samples, the smallest wins.
pub fn solve_eta(sensors: &[ChainParams], search: EtaSearch) -> Result<EtaSolution> {
    if sensors.is_empty() {
        return Err(Error::Domain("at least one sensor is required".into()));
    }
    let levels = candidate_levels(sensors);
    let evaluator = LevelEvaluator::new(sensors);

    let mut evaluated: Vec<LevelEval> = Vec::new();
    match search {
        EtaSearch::Exhaustive => {
            for &eta in &levels {
                evaluated.push(evaluator.eval(eta)?);
            }
        }
        EtaSearch::Bisection { window } => {
            let mut cache: Vec<Option<usize>> = vec![None; levels.len()];
            let mut eval_at = |idx: usize, evaluated: &mut Vec<LevelEval>| -> Result<f64> {
                if let Some(slot) = cache[idx] {
                    return Ok(evaluated[slot].d_hat);
                }
                let e = evaluator.eval(levels[idx])?;
                let d = e.d_hat;
                cache[idx] = Some(evaluated.len());
                evaluated.push(e);
                Ok(d)
            };
            // first index with d-hat >= 1, or levels.len() if none
            let (mut lo, mut hi) = (0usize, levels.len());
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if eval_at(mid, &mut evaluated)? >= 1.0 {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            // a plateau at exactly one sample per slot is resolved towards
            // its largest level, so locate its right end as well
            let (mut lo2, mut hi2) = (lo, levels.len());
            while lo2 < hi2 {
                let mid = lo2 + (hi2 - lo2) / 2;
                if eval_at(mid, &mut evaluated)? > 1.0 + 1e-12 {
                    hi2 = mid;
                } else {
                    lo2 = mid + 1;
                }
            }
            for centre in [lo, lo2.saturating_sub(1)] {
                let from = centre.saturating_sub(window);
                let to = (centre + window).min(levels.len() - 1);
                for idx in from..=to {
                    eval_at(idx, &mut evaluated)?;
                }
            }
        }
    }

    evaluated.sort_by(|a, b| a.eta.total_cmp(&b.eta));
    let monotone_violations = evaluated
        .windows(2)
        .filter(|w| w[1].d_hat < w[0].d_hat - 1e-9)
        .count();

    let best_gap = evaluated
        .iter()
        .map(|e| (e.d_hat - 1.0).abs())
        .fold(f64::INFINITY, f64::min);
    let tied = || evaluated.iter().filter(|e| (e.d_hat - 1.0).abs() <= best_gap + 1e-12);
    let best = tied()
        .filter(|e| e.d_hat <= 1.0 + 1e-12)
        .max_by(|a, b| a.eta.total_cmp(&b.eta))
        .or_else(|| tied().min_by(|a, b| a.eta.total_cmp(&b.eta)))
        .expect("at least one level is evaluated");

    if best.d_hat <= 0.0 {
        return Err(Error::Infeasible { eta: best.eta });
    }
    let active: Vec<usize> = (0..sensors.len()).filter(|&n| best.rates[n].is_some()).collect();
    let total_reward: f64 = best.rates.iter().flatten().map(|r| r.r_bar).sum();
    Ok(EtaSolution {
        eta_star: best.eta,
        d_hat: best.d_hat,
        active,
        rates: best.rates.clone(),
        j_value: total_reward / best.d_hat,
        evaluated: evaluated.len(),
        monotone_violations,
    })
}

/// `J = (1 / d-hat) * sum over active sensors of R-bar_n` at level `eta`.
pub fn relaxed_performance(sensors: &[ChainParams], eta: f64) -> Result<f64> {
    let e = LevelEvaluator::new(sensors).eval(eta)?;
    if e.d_hat <= 0.0 {
        return Err(Error::Infeasible { eta });
    }
    let total: f64 = e.rates.iter().flatten().map(|r| r.r_bar).sum();
    Ok(total / e.d_hat)
}
