//! Fast oracle checks run by `aoi-bandit selftest`.
//!
//! Each check compares a closed form or solver against an independent
//! computation on a small grid.

use crate::baselines::{lower_bound, lower_bound_symmetric};
use crate::belief::{branch_belief, BranchState};
use crate::chain::{build_transition, steady_state, ChainParams};
use crate::relaxed::{build_system, iterate_recurrence, rates, RecurrenceKind};
use crate::sim::run_greedy;
use crate::threshold::{gamma_analytic, gamma_scan, lambert_w0};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn grid() -> impl Iterator<Item = ChainParams> {
    [0.1, 0.5, 0.8, 0.95].into_iter().flat_map(|p| {
        [2usize, 5, 10, 30]
            .into_iter()
            .map(move |m| ChainParams::new(p, m).expect("valid grid point"))
    })
}

fn check(name: &'static str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= tol,
        detail: format!("max error {worst:.3e} (tolerance {tol:.0e})"),
    }
}

fn steady_state_fixed_point() -> CheckResult {
    let worst = grid()
        .map(|c| {
            let h = steady_state(&c).h;
            build_transition(&c)
                .left_mul(&h)
                .iter()
                .zip(&h)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    check("steady state is a fixed point", worst, 1e-12)
}

fn beliefs_match_matrix_powers() -> CheckResult {
    let mut worst: f64 = 0.0;
    for c in grid() {
        let t = build_transition(&c);
        for k in 1..=c.m() {
            let mut row = vec![0.0; c.m()];
            row[k - 1] = 1.0;
            for i in 1..c.m() {
                row = t.left_mul(&row);
                let pi = branch_belief(&c, BranchState::new(&c, k, i).expect("valid state")).pi;
                for (a, b) in pi.iter().zip(&row) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    check("beliefs equal matrix powers", worst, 1e-10)
}

fn thresholds_match_scan() -> CheckResult {
    let mut mismatches = 0;
    let mut total = 0;
    for c in grid() {
        let top = c.q() + c.m() as f64 * c.p() + 1.0;
        for e in 0..25 {
            let eta = 1.0 + (top - 1.0) * (e as f64 + 0.5) / 25.0;
            total += 1;
            if gamma_analytic(&c, eta) != gamma_scan(&c, eta) {
                mismatches += 1;
            }
        }
    }
    CheckResult {
        name: "closed-form thresholds equal the scan",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches in {total} levels"),
    }
}

fn rates_match_recurrence() -> CheckResult {
    let mut worst: f64 = 0.0;
    for (p, m, eta) in [(0.8, 10, 5.0), (0.5, 20, 2.5), (0.9, 30, 12.0)] {
        let c = ChainParams::new(p, m).expect("valid params");
        let sys = match build_system(&c, &gamma_analytic(&c, eta)) {
            Ok(s) => s,
            Err(e) => {
                return CheckResult {
                    name: "linear-solve rates equal the recurrence",
                    passed: false,
                    detail: e.to_string(),
                }
            }
        };
        let r = match rates(&sys) {
            Ok(r) => r,
            Err(e) => {
                return CheckResult {
                    name: "linear-solve rates equal the recurrence",
                    passed: false,
                    detail: e.to_string(),
                }
            }
        };
        let horizon = 20_000;
        let d = iterate_recurrence(&sys, horizon, RecurrenceKind::Count)[m - 1] / horizon as f64;
        let rr = iterate_recurrence(&sys, horizon, RecurrenceKind::Reward)[m - 1] / horizon as f64;
        worst = worst.max((d - r.d_bar).abs()).max((rr - r.r_bar).abs());
    }
    check("linear-solve rates equal the recurrence", worst, 1e-2)
}

fn lambert_round_trip() -> CheckResult {
    let mut worst: f64 = 0.0;
    for j in 0..=1000 {
        let w = -1.0 + 11.0 * j as f64 / 1000.0;
        match lambert_w0(w * w.exp()) {
            Ok(got) => worst = worst.max((got - w).abs() / (1.0 + w.abs())),
            Err(_) => worst = f64::INFINITY,
        }
    }
    check("Lambert W0 inverts w exp(w)", worst, 1e-6)
}

fn symmetric_lower_bound() -> CheckResult {
    let mut worst: f64 = 0.0;
    for p in [0.2, 0.5, 0.9] {
        for n in [2usize, 4, 12] {
            let sensors = vec![ChainParams::new(p, 100).expect("valid params"); n];
            let (level, omega) = lower_bound_symmetric(p, n).expect("valid input");
            let lb = lower_bound(&sensors).expect("valid input");
            if lb.l_star != Some(level) {
                worst = f64::INFINITY;
            }
            worst = worst.max((lb.omega_star - omega).abs());
        }
    }
    check("symmetric lower bound equals the search", worst, 1e-9)
}

fn simulation_is_reproducible() -> CheckResult {
    let sensors: Vec<ChainParams> = [0.3, 0.6, 0.9]
        .iter()
        .map(|&p| ChainParams::new(p, 20).expect("valid params"))
        .collect();
    let same = run_greedy(&sensors, 5_000, 17) == run_greedy(&sensors, 5_000, 17);
    CheckResult {
        name: "simulation is reproducible",
        passed: same,
        detail: if same { "bit-identical".into() } else { "runs differ".into() },
    }
}

pub fn run_all() -> Vec<CheckResult> {
    vec![
        steady_state_fixed_point(),
        beliefs_match_matrix_powers(),
        thresholds_match_scan(),
        rates_match_recurrence(),
        lambert_round_trip(),
        symmetric_lower_bound(),
        simulation_is_reproducible(),
    ]
}
