// Long-run sampling rate and collected AoI of one sensor under the relaxed
// policy, from the linear solve and from the exact recurrence.

use aoi_bandit::relaxed::{build_system, iterate_recurrence, rates, RecurrenceKind};
use aoi_bandit::threshold::gamma_analytic;
use aoi_bandit::ChainParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sensor = ChainParams::new(0.8, 10)?;
    let eta = 5.0;
    let sys = build_system(&sensor, &gamma_analytic(&sensor, eta))?;
    let r = rates(&sys)?;
    println!("eta = {eta}: d-bar = {:.6}, R-bar = {:.6}", r.d_bar, r.r_bar);

    let horizon = 10_000;
    let d = iterate_recurrence(&sys, horizon, RecurrenceKind::Count);
    let rr = iterate_recurrence(&sys, horizon, RecurrenceKind::Reward);
    println!(
        "recurrence after {horizon} slots from branch M: {:.6} samples/slot, {:.6} AoI/slot",
        d[9] / horizon as f64,
        rr[9] / horizon as f64
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
