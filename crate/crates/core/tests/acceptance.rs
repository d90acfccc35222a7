//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed; the
//! process exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use aoi_bandit::baselines::random_policy_value;
use aoi_bandit::belief::branch_belief;
use aoi_bandit::experiments::{emit_figure_data, gen_sensors, run_scenario, ScenarioConfig, ScenarioKind, ScenarioRow};
use aoi_bandit::relaxed::{build_system, iterate_recurrence, rates, RecurrenceKind};
use aoi_bandit::sim::{run, run_random, RelaxedGreedy};
use aoi_bandit::threshold::{gamma_analytic, gamma_scan, lambert_w0};
use aoi_bandit::{BranchState, ChainParams};

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn params(p: f64, m: usize) -> ChainParams {
    ChainParams::new(p, m).unwrap()
}

/// Row `from` of `T^i`, built from the transition rule alone.
fn matrix_power_rows(p: f64, m: usize, k: usize, steps: usize) -> Vec<Vec<f64>> {
    let q = 1.0 - p;
    let mut row = vec![0.0; m];
    row[k - 1] = 1.0;
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut next = vec![0.0; m];
        for (j, &w) in row.iter().enumerate() {
            next[0] += w * q;
            next[(j + 1).min(m - 1)] += w * p;
        }
        row = next;
        out.push(row.clone());
    }
    out
}

fn criterion_1() -> Outcome {
    let ps: Vec<f64> = (1..=9).map(|j| j as f64 / 10.0).chain([0.95]).collect();
    let mut worst: f64 = 0.0;
    let mut states = 0;
    for &p in &ps {
        for m in [2usize, 5, 10, 50] {
            let c = params(p, m);
            for k in 1..=m {
                // i runs past M - 1 to cover the saturated steady state
                for (idx, oracle) in matrix_power_rows(p, m, k, m + 2).iter().enumerate() {
                    let pi = branch_belief(&c, BranchState::new(&c, k, idx + 1).unwrap()).pi;
                    for (a, b) in pi.iter().zip(oracle) {
                        worst = worst.max((a - b).abs());
                    }
                    states += 1;
                }
            }
        }
    }
    outcome(
        worst < 1e-10,
        format!("{states} (k, i) states, max abs error {worst:.2e} (limit 1e-10)"),
    )
}

fn criterion_2() -> Outcome {
    let mut points = 0usize;
    let mut mismatches = Vec::new();
    for j in 1..=49 {
        let p = j as f64 / 50.0;
        for m in [2usize, 3, 5, 10, 20, 50, 100] {
            let c = params(p, m);
            let top = c.q() + m as f64 * p;
            let mut etas: Vec<f64> = (0..36)
                .map(|e| 1.0 + (top + 0.5 - 1.0) * (e as f64 + 0.5) / 36.0)
                .collect();
            // attainable values, where the strict inequality decides
            etas.extend([top, (1.0 - p.powi(m as i32)) / c.q(), c.q() + p * 2f64.min(m as f64)]);
            etas.push(1.0);
            for eta in etas {
                points += 1;
                if gamma_analytic(&c, eta) != gamma_scan(&c, eta) {
                    mismatches.push((p, m, eta));
                }
            }
        }
    }
    outcome(
        mismatches.is_empty() && points >= 10_000,
        format!(
            "{points} (p, M, eta) points, {} mismatches{}",
            mismatches.len(),
            mismatches
                .first()
                .map(|x| format!(", first at {x:?}"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let horizon = 100_000;
    let slots = 1_000_000;
    let (mut worst_iter, mut worst_sim) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for instance in 0..50 {
        let p = rng.random_range(0.05..0.95);
        let m = rng.random_range(2..=50usize);
        let c = params(p, m);
        let hbar = (1.0 - p.powi(m as i32)) / c.q();
        let top = c.q() + m as f64 * p;
        // eta in (hbar, q + M p]
        let eta = top - (top - hbar) * rng.random::<f64>();
        let sys = match build_system(&c, &gamma_analytic(&c, eta)) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("instance {instance}: {e}"));
                continue;
            }
        };
        let r = match rates(&sys) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("instance {instance}: {e}"));
                continue;
            }
        };
        let d = iterate_recurrence(&sys, horizon, RecurrenceKind::Count)[m - 1] / horizon as f64;
        let rr = iterate_recurrence(&sys, horizon, RecurrenceKind::Reward)[m - 1] / horizon as f64;
        let e_iter = (d - r.d_bar).abs().max((rr - r.r_bar).abs());
        worst_iter = worst_iter.max(e_iter);

        let sim = run(&[c], &mut RelaxedGreedy { eta }, slots, SEED + instance, |_| {});
        let e_sim = (sim.samples_per_slot / r.d_bar - 1.0)
            .abs()
            .max((sim.expected_per_slot / r.r_bar - 1.0).abs());
        worst_sim = worst_sim.max(e_sim);
        if e_iter > 1e-3 || e_sim > 0.01 {
            failures.push(format!(
                "instance {instance} (p = {p:.4}, M = {m}, eta = {eta:.4}): iteration {e_iter:.2e}, simulation {e_sim:.2e}"
            ));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "50 instances, max |solve - iteration| {worst_iter:.2e} (limit 1e-3), max simulation rel. error {worst_sim:.2e} (limit 1e-2){}",
            failures.first().map(|f| format!("; {f}")).unwrap_or_default()
        ),
    )
}

fn criterion_4() -> Outcome {
    let sensors = vec![params(0.8, 100); 4];
    let closed = random_policy_value(&sensors).unwrap();
    let oracle = (1.0 - 0.8f64.powi(100)) / 0.2;
    let sim = run_random(&sensors, 1_000_000, SEED);
    let rel = (sim.j_realized / closed - 1.0).abs();
    outcome(
        rel < 0.01 && (closed - oracle).abs() < 1e-12 && (closed - 5.0).abs() < 1e-8,
        format!(
            "closed form {closed:.9}, simulated {:.6}, rel. error {rel:.2e} (limit 1e-2)",
            sim.j_realized
        ),
    )
}

fn symmetric_config() -> ScenarioConfig {
    ScenarioConfig {
        kind: ScenarioKind::Symmetric,
        n: 4,
        m: 100,
        sweep: (1..=9).map(|j| j as f64 / 10.0).collect(),
        trials: 1,
        horizon: 1_000_000,
        seed: Some(SEED),
    }
}

fn criterion_5(rows: &[ScenarioRow]) -> Outcome {
    let mut worst_a: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    for r in rows {
        worst_a = worst_a.max((r.j_relaxed_sim / r.j_relaxed_analytic - 1.0).abs());
        worst_b = worst_b.max((r.j_greedy_sim / r.j_relaxed_analytic - 1.0).abs());
    }
    let last = rows.last().unwrap();
    let gap = last.j_random_sim - last.j_greedy_sim;
    let flagged = rows.iter().filter(|r| r.error.is_some()).count();
    outcome(
        rows.len() == 9 && flagged == 0 && worst_a <= 0.02 && worst_b <= 0.03 && (gap - 3.8).abs() <= 0.5,
        format!(
            "(a) relaxed sim vs analytic max {:.2}% (limit 2%), (b) greedy vs relaxed analytic max {:.2}% (limit 3%), (c) random - greedy at p = 0.9 is {gap:.3} (3.8 +- 0.5)",
            100.0 * worst_a,
            100.0 * worst_b
        ),
    )
}

fn random_family(kind: ScenarioKind, n: usize) -> ScenarioConfig {
    let sweep = match kind {
        ScenarioKind::AsymUniform => vec![0.1, 0.3, 0.5, 0.7, 0.9],
        _ => vec![0.05, 0.1, 0.15, 0.2, 0.25],
    };
    ScenarioConfig {
        kind,
        n,
        m: 100,
        sweep,
        trials: 200,
        horizon: 20_000,
        seed: Some(SEED),
    }
}

fn criterion_6(families: &[(ScenarioKind, Vec<Vec<ScenarioRow>>)]) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (kind, per_n) in families {
        let limit = if *kind == ScenarioKind::AsymUniform { 0.025 } else { 0.021 };
        let gap = per_n
            .iter()
            .flatten()
            .map(|r| (r.j_greedy_sim / r.j_relaxed_analytic - 1.0).abs())
            .fold(0.0, f64::max);
        let trials_ok = per_n.iter().flatten().all(|r| r.trials >= 200 && r.error.is_none());
        // j_random_sim must not depend on N. Every (sweep value, N pair)
        // difference is tested at a family-wise 5% level (Bonferroni), with
        // z-scores recovered from the reported 95% half-widths.
        let comparisons = per_n[0].len() * per_n.len() * (per_n.len() - 1) / 2;
        let normal = Normal::new(0.0, 1.0).unwrap();
        let z_crit = normal.inverse_cdf(1.0 - 0.05 / (2.0 * comparisons as f64));
        let mut worst_z: f64 = 0.0;
        for xi in 0..per_n[0].len() {
            for a in 0..per_n.len() {
                for b in a + 1..per_n.len() {
                    let (ra, rb) = (&per_n[a][xi], &per_n[b][xi]);
                    let sd = ra.ci_random.hypot(rb.ci_random) / 1.96;
                    worst_z = worst_z.max((ra.j_random_sim - rb.j_random_sim).abs() / sd);
                }
            }
        }
        let ok = gap <= limit && worst_z <= z_crit && trials_ok;
        passed &= ok;
        parts.push(format!(
            "{kind:?}: max gap {:.2}% (limit {:.1}%), j_random_sim across N max |z| {worst_z:.2} (limit {z_crit:.2}, {comparisons} comparisons)",
            100.0 * gap,
            100.0 * limit,
        ));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_7(rows: &[&ScenarioRow]) -> Outcome {
    let violations: Vec<String> = rows
        .iter()
        .filter(|r| {
            [
                (r.j_random_sim, r.ci_random),
                (r.j_relaxed_sim, r.ci_relaxed),
                (r.j_greedy_sim, r.ci_greedy),
            ]
            .iter()
            .any(|&(v, ci)| !(r.lb <= v - ci))
        })
        .map(|r| format!("x = {}", r.x))
        .collect();
    outcome(
        violations.is_empty(),
        format!("{} rows checked, {} violations", rows.len(), violations.len()),
    )
}

fn criterion_8() -> Outcome {
    let config = ScenarioConfig {
        kind: ScenarioKind::AsymUniform,
        n: 4,
        m: 100,
        sweep: vec![0.8],
        trials: 10_000,
        horizon: 1_000,
        seed: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let draws = 10_000;
    let mut total = 0.0;
    for _ in 0..draws {
        let sensors = gen_sensors(&config, 0.8, &mut rng).unwrap();
        total += random_policy_value(&sensors).unwrap();
    }
    let mean = total / draws as f64;
    let closed = ((1.0f64 + 0.8) / (1.0 - 0.8)).ln() / 0.8;
    let rel = (mean / closed - 1.0).abs();
    outcome(
        rel < 0.01,
        format!("mean over {draws} draws {mean:.6} vs {closed:.7}, rel. error {rel:.2e} (limit 1e-2)"),
    )
}

fn criterion_9() -> Outcome {
    let mut worst: f64 = 0.0;
    for j in 0..1000 {
        let w = -1.0 + 11.0 * j as f64 / 999.0;
        let got = lambert_w0(w * w.exp()).unwrap();
        worst = worst.max((got - w).abs());
    }
    let branch = (lambert_w0(-(-1.0f64).exp()).unwrap() + 1.0).abs();
    let zero = lambert_w0(0.0).unwrap().abs();
    outcome(
        worst <= 1e-9 && branch <= 1e-12 && zero <= 1e-12,
        format!("1000 points, max round-trip error {worst:.2e} (limit 1e-9); W(-1/e) error {branch:.1e}, W(0) error {zero:.1e}"),
    )
}

fn csv_bytes(rows: &[ScenarioRow]) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    emit_figure_data(rows, &path).unwrap();
    std::fs::read(path).unwrap()
}

fn criterion_10(symmetric_rows: &[ScenarioRow]) -> Outcome {
    let again = run_scenario(&symmetric_config(), SEED).unwrap();
    let symmetric_same = csv_bytes(symmetric_rows) == csv_bytes(&again);

    let mut uniform = random_family(ScenarioKind::AsymUniform, 4);
    uniform.trials = 20;
    uniform.horizon = 5_000;
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = serial.install(|| run_scenario(&uniform, SEED)).unwrap();
    let b = wide.install(|| run_scenario(&uniform, SEED)).unwrap();
    let uniform_same = csv_bytes(&a) == csv_bytes(&b);
    outcome(
        symmetric_same && uniform_same,
        format!("symmetric sweep rerun identical: {symmetric_same}; uniform sweep on 1 vs 3 threads identical: {uniform_same}"),
    )
}

fn report(number: usize, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let passed = o.passed && elapsed <= budget;
    println!(
        "criterion {number:>2} {}: {} [{:.1} s, budget {} s]",
        if passed { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    passed
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;
    all &= report(1, secs(10), criterion_1);
    all &= report(2, secs(30), criterion_2);
    all &= report(3, secs(120), criterion_3);
    all &= report(4, secs(30), criterion_4);

    let mut symmetric_rows = Vec::new();
    all &= report(5, secs(600), || {
        symmetric_rows = run_scenario(&symmetric_config(), SEED).unwrap();
        criterion_5(&symmetric_rows)
    });

    let mut families = Vec::new();
    all &= report(6, secs(1800), || {
        for kind in [ScenarioKind::AsymUniform, ScenarioKind::AsymGaussian] {
            let per_n = [4usize, 8, 12]
                .iter()
                .map(|&n| run_scenario(&random_family(kind, n), SEED).unwrap())
                .collect();
            families.push((kind, per_n));
        }
        criterion_6(&families)
    });

    let rows: Vec<&ScenarioRow> = symmetric_rows
        .iter()
        .chain(families.iter().flat_map(|(_, per_n)| per_n.iter().flatten()))
        .collect();
    all &= report(7, secs(10), || criterion_7(&rows));
    all &= report(8, secs(30), criterion_8);
    all &= report(9, secs(10), criterion_9);
    all &= report(10, secs(600), || criterion_10(&symmetric_rows));

    if all {
        println!("acceptance: all criteria PASS");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: at least one criterion FAILED");
        ExitCode::FAILURE
    }
}
