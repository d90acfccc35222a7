// Per-branch sampling thresholds of the relaxed policy for a few levels.

use aoi_bandit::threshold::{gamma_analytic, gamma_scan, lambert_w0};
use aoi_bandit::ChainParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sensor = ChainParams::new(0.8, 10)?;
    for eta in [4.0, 5.0, 7.5, 9.0] {
        let table = gamma_analytic(&sensor, eta);
        assert_eq!(table, gamma_scan(&sensor, eta));
        let shown: Vec<String> = table.gamma.iter().map(|g| g.to_string()).collect();
        println!("eta = {eta}: gamma = [{}]", shown.join(", "));
    }
    println!("W0(1) = {:.15}", lambert_w0(1.0)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
