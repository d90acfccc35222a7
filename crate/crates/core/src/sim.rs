//! Seeded Monte Carlo simulation of the N-sensor system.
//!
//! Each slot the policy picks sensors from the AP's beliefs. A sampled
//! sensor delivers the AoI it held at the end of the previous slot, its
//! belief resets to branch `(observed, 1)`, and every other belief ages by
//! one slot. Then all hidden AoIs advance.
//!
//! Random streams: stream `n + 1` of the run seed drives sensor `n` and
//! stream 0 drives the policy, so adding sensors does not perturb the
//! existing ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::{BranchState, ExpectedAoiTable};
use crate::chain::{steady_state, step_aoi, ChainParams};

/// Batches used for batch-means confidence intervals.
pub const BATCHES: usize = 20;
/// Two-sided 95% Student t quantile with `BATCHES - 1` degrees of freedom.
const T_QUANTILE_19: f64 = 2.093;

/// Burn-in slots discarded before measuring: ten times the largest `M`.
pub fn burn_in(sensors: &[ChainParams]) -> usize {
    10 * sensors.iter().map(|s| s.m()).max().unwrap_or(0)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Hidden AoIs plus the access point's beliefs about them.
pub struct SensorWorld {
    sensors: Vec<ChainParams>,
    tables: Vec<ExpectedAoiTable>,
    true_aoi: Vec<usize>,
    beliefs: Vec<BranchState>,
    streams: Vec<ChaCha8Rng>,
}

/// One delivery from a sampled sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleEvent {
    pub sensor: usize,
    /// Belief held when the sampling decision was made.
    pub belief: BranchState,
    /// Expected AoI of that belief.
    pub expected: f64,
    /// AoI actually delivered.
    pub observed: usize,
}

impl SensorWorld {
    /// Hidden AoIs start from each sensor's steady state and beliefs start at
    /// the steady-state belief.
    pub fn new(sensors: &[ChainParams], seed: u64) -> Self {
        let mut streams: Vec<ChaCha8Rng> =
            (0..sensors.len()).map(|n| stream(seed, n as u64 + 1)).collect();
        let true_aoi = sensors
            .iter()
            .zip(streams.iter_mut())
            .map(|(s, rng)| {
                let h = steady_state(s).h;
                let u: f64 = rng.random();
                let mut acc = 0.0;
                h.iter()
                    .position(|&w| {
                        acc += w;
                        u < acc
                    })
                    .map_or(s.m(), |j| j + 1)
            })
            .collect();
        Self {
            tables: sensors.iter().map(ExpectedAoiTable::new).collect(),
            beliefs: sensors.iter().map(BranchState::steady).collect(),
            sensors: sensors.to_vec(),
            true_aoi,
            streams,
        }
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    pub fn sensors(&self) -> &[ChainParams] {
        &self.sensors
    }

    #[inline]
    pub fn expected_aoi(&self, n: usize) -> f64 {
        self.tables[n].at(self.beliefs[n])
    }

    pub fn belief(&self, n: usize) -> BranchState {
        self.beliefs[n]
    }

    pub fn true_aoi(&self, n: usize) -> usize {
        self.true_aoi[n]
    }

    /// Runs one slot with the sensors in `sampled` (ascending, distinct)
    /// being sampled.
    pub fn step(&mut self, sampled: &[usize], mut on_sample: impl FnMut(SampleEvent)) {
        let mut next_sampled = sampled.iter().peekable();
        for n in 0..self.sensors.len() {
            let params = &self.sensors[n];
            if next_sampled.next_if_eq(&&n).is_some() {
                // the delivered AoI is the one held at the end of the last slot
                let observed = self.true_aoi[n];
                on_sample(SampleEvent {
                    sensor: n,
                    belief: self.beliefs[n],
                    expected: self.tables[n].at(self.beliefs[n]),
                    observed,
                });
                self.beliefs[n] = BranchState::reset(observed);
            } else {
                self.beliefs[n] = self.beliefs[n].rest(params);
            }
            let u: f64 = self.streams[n].random();
            self.true_aoi[n] = step_aoi(params, self.true_aoi[n], u);
        }
        debug_assert!(next_sampled.next().is_none(), "sampled indices must be ascending");
    }
}

/// A sampling rule driven by the AP's beliefs.
pub trait Policy {
    /// Pushes the sensors to sample this slot, ascending.
    fn choose(&mut self, world: &SensorWorld, chosen: &mut Vec<usize>);
}

/// Sample the sensor with the smallest expected AoI; ties go to the lowest
/// index.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl Policy for Greedy {
    fn choose(&mut self, world: &SensorWorld, chosen: &mut Vec<usize>) {
        let mut best = 0;
        let mut best_value = f64::INFINITY;
        for n in 0..world.len() {
            let v = world.expected_aoi(n);
            if v < best_value {
                best = n;
                best_value = v;
            }
        }
        chosen.push(best);
    }
}

/// Sample every sensor whose expected AoI is below `eta`.
#[derive(Debug, Clone, Copy)]
pub struct RelaxedGreedy {
    pub eta: f64,
}

impl Policy for RelaxedGreedy {
    fn choose(&mut self, world: &SensorWorld, chosen: &mut Vec<usize>) {
        chosen.extend((0..world.len()).filter(|&n| world.expected_aoi(n) < self.eta));
    }
}

/// Sample one sensor uniformly at random.
#[derive(Debug, Clone)]
pub struct RandomSampling {
    rng: ChaCha8Rng,
}

impl RandomSampling {
    pub fn new(seed: u64) -> Self {
        Self { rng: stream(seed, 0) }
    }
}

impl Policy for RandomSampling {
    fn choose(&mut self, world: &SensorWorld, chosen: &mut Vec<usize>) {
        chosen.push(self.rng.random_range(0..world.len()));
    }
}

/// Empirical averages over the measured slots of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub slots: usize,
    pub seed: u64,
    /// Mean delivered AoI per sample.
    pub j_realized: f64,
    /// Mean expected AoI (at decision time) per sample.
    pub j_expected: f64,
    /// Delivered AoI summed over sensors, per slot.
    pub realized_per_slot: f64,
    /// Expected AoI summed over sampled sensors, per slot.
    pub expected_per_slot: f64,
    pub samples_per_slot: f64,
    pub per_sensor_samples: Vec<u64>,
    /// 95% batch-means half-width of `j_realized`.
    pub ci_realized: f64,
    /// 95% batch-means half-width of `j_expected`.
    pub ci_expected: f64,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    realized: f64,
    expected: f64,
    samples: u64,
}

/// Runs `policy` for `burn_in(sensors)` unmeasured slots followed by `slots`
/// measured ones. `on_sample` sees every measured delivery.
pub fn run<P: Policy>(
    sensors: &[ChainParams],
    policy: &mut P,
    slots: usize,
    seed: u64,
    mut on_sample: impl FnMut(SampleEvent),
) -> SimResult {
    assert!(!sensors.is_empty(), "at least one sensor is required");
    assert!(slots >= 1, "at least one measured slot is required");
    let mut world = SensorWorld::new(sensors, seed);
    let mut chosen = Vec::with_capacity(sensors.len());
    for _ in 0..burn_in(sensors) {
        chosen.clear();
        policy.choose(&world, &mut chosen);
        world.step(&chosen, |_| {});
    }

    let batch_len = (slots / BATCHES).max(1);
    let mut batches = vec![Tally::default(); BATCHES];
    let mut total = Tally::default();
    let mut per_sensor = vec![0u64; sensors.len()];
    for t in 0..slots {
        chosen.clear();
        policy.choose(&world, &mut chosen);
        let batch = &mut batches[(t / batch_len).min(BATCHES - 1)];
        world.step(&chosen, |e| {
            batch.realized += e.observed as f64;
            batch.expected += e.expected;
            batch.samples += 1;
            per_sensor[e.sensor] += 1;
            on_sample(e);
        });
    }
    for b in &batches {
        total.realized += b.realized;
        total.expected += b.expected;
        total.samples += b.samples;
    }

    let per_sample = |x: f64| {
        if total.samples == 0 {
            0.0
        } else {
            x / total.samples as f64
        }
    };
    SimResult {
        slots,
        seed,
        j_realized: per_sample(total.realized),
        j_expected: per_sample(total.expected),
        realized_per_slot: total.realized / slots as f64,
        expected_per_slot: total.expected / slots as f64,
        samples_per_slot: total.samples as f64 / slots as f64,
        per_sensor_samples: per_sensor,
        ci_realized: batch_half_width(&batches, slots, |b| b.realized),
        ci_expected: batch_half_width(&batches, slots, |b| b.expected),
    }
}

fn batch_half_width(batches: &[Tally], slots: usize, value: impl Fn(&Tally) -> f64) -> f64 {
    if slots < BATCHES || batches.iter().any(|b| b.samples == 0) {
        return f64::NAN;
    }
    let ratios: Vec<f64> = batches.iter().map(|b| value(b) / b.samples as f64).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (ratios.len() - 1) as f64;
    T_QUANTILE_19 * (var / ratios.len() as f64).sqrt()
}

pub fn run_random(sensors: &[ChainParams], slots: usize, seed: u64) -> SimResult {
    run(sensors, &mut RandomSampling::new(seed), slots, seed, |_| {})
}

pub fn run_greedy(sensors: &[ChainParams], slots: usize, seed: u64) -> SimResult {
    run(sensors, &mut Greedy, slots, seed, |_| {})
}

pub fn run_relaxed(sensors: &[ChainParams], eta: f64, slots: usize, seed: u64) -> SimResult {
    run(sensors, &mut RelaxedGreedy { eta }, slots, seed, |_| {})
}
