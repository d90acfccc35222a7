// A small uniform-asymmetric sweep written to CSV.

use aoi_bandit::experiments::{emit_figure_data, run_scenario, ScenarioConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = ScenarioConfig::from_json(
        r#"{"kind": "asym_uniform", "N": 4, "M": 50, "sweep": [0.2, 0.8], "trials": 5, "horizon": 5000}"#,
    )?;
    let rows = run_scenario(&config, 11)?;
    let path = std::env::temp_dir().join("aoi_bandit_scenario_sweep.csv");
    emit_figure_data(&rows, &path)?;
    print!("{}", std::fs::read_to_string(&path)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
