// Greedy, relaxed greedy and random sampling simulated on the same hidden
// AoI paths.

use aoi_bandit::relaxed::{solve_eta, EtaSearch};
use aoi_bandit::sim::{run_greedy, run_random, run_relaxed};
use aoi_bandit::ChainParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sensors = vec![ChainParams::new(0.9, 100)?; 4];
    let slots = 100_000;
    let seed = 7;
    let eta = solve_eta(&sensors, EtaSearch::default())?;
    let random = run_random(&sensors, slots, seed);
    let greedy = run_greedy(&sensors, slots, seed);
    let relaxed = run_relaxed(&sensors, eta.eta_star, slots, seed);
    println!("random:  {:.4} +- {:.4}", random.j_realized, random.ci_realized);
    println!("greedy:  {:.4} +- {:.4}", greedy.j_realized, greedy.ci_realized);
    println!(
        "relaxed: {:.4} +- {:.4} at {:.3} samples/slot (analytic {:.4})",
        relaxed.j_expected, relaxed.ci_expected, relaxed.samples_per_slot, eta.j_value
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
