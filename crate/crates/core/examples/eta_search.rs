// Choosing the relaxed level that samples about once per slot.

use aoi_bandit::relaxed::{solve_eta, EtaSearch};
use aoi_bandit::ChainParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let sensors = [0.2, 0.4, 0.6, 0.8]
        .iter()
        .map(|&p| ChainParams::new(p, 100))
        .collect::<Result<Vec<_>, _>>()?;
    let s = solve_eta(&sensors, EtaSearch::default())?;
    println!("eta* = {:.6}, d-hat = {:.6}, J = {:.6}", s.eta_star, s.d_hat, s.j_value);
    println!("active sensors: {:?}", s.active);
    for (n, r) in s.rates.iter().enumerate() {
        match r {
            Some(r) => println!("  sensor {n}: d-bar {:.4}, R-bar {:.4}", r.d_bar, r.r_bar),
            None => println!("  sensor {n}: inactive"),
        }
    }
    println!("levels evaluated: {}", s.evaluated);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
