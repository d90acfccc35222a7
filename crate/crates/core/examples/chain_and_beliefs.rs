// Steady state of one sensor and how the AP's belief drifts back to it
// after a sample.

use aoi_bandit::belief::{branch_belief, expected_aoi, steady_expected_aoi};
use aoi_bandit::chain::steady_state;
use aoi_bandit::{BranchState, ChainParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sensor = ChainParams::new(0.8, 10)?;
    let h = steady_state(&sensor).h;
    println!("steady state (p = 0.8, M = 10): {h:.4?}");
    println!("steady expected AoI: {:.6}", steady_expected_aoi(&sensor));

    // the AP just observed AoI 3
    for i in [1, 2, 5, 9] {
        let s = BranchState::new(&sensor, 3, i)?;
        let pi = branch_belief(&sensor, s).pi;
        println!("k = 3, i = {i}: expected AoI {:.4}, belief {pi:.3?}", expected_aoi(&sensor, s));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
