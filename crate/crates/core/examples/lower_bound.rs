// Universal lower bound and the random-sampling benchmark.

use aoi_bandit::baselines::{lower_bound, lower_bound_symmetric, random_policy_value, random_policy_value_uniform};
use aoi_bandit::ChainParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for p in [0.5, 0.8, 0.9] {
        let sensors = vec![ChainParams::new(p, 100)?; 4];
        let lb = lower_bound(&sensors)?;
        let (l, omega) = lower_bound_symmetric(p, 4)?;
        println!(
            "p = {p}: L* = {:?} (closed form {l}), omega* = {:.4} ({omega:.4}), l_b = {:.4}, random = {:.4}",
            lb.l_star,
            lb.omega_star,
            lb.l_b,
            random_policy_value(&sensors)?
        );
    }
    println!("uniform p' = 0.8, random sampling: {:.7}", random_policy_value_uniform(0.8)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
