use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aoi_bandit::baselines::{lower_bound, lower_bound_symmetric};
use aoi_bandit::experiments::{derive_seed, emit_figure_data, gen_sensors, run_scenario, ScenarioConfig};
use aoi_bandit::relaxed::{solve_eta, EtaSearch};
use aoi_bandit::{selftest, ChainParams, Error, Result};

#[derive(Parser)]
#[command(name = "aoi-bandit", version, about = "Minimum-age sampling of partially observable sensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario sweep and write its CSV into the output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Master seed; overrides the config and AOI_BANDIT_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Measured slots per simulation; overrides the config.
        #[arg(long)]
        horizon: Option<usize>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Universal lower bound for a sensor set.
    Lb {
        /// Failure probabilities, comma separated. A single value is
        /// repeated `--n` times.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 100)]
        m: usize,
    },
    /// Solve for the relaxed level at every sweep value of a config (first
    /// draw for random families).
    SolveEta {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in oracle checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out, seed, horizon, jobs } => run(&config, &out, seed, horizon, jobs),
        Command::Lb { p, n, m } => lb(&p, n, m),
        Command::SolveEta { config, seed } => solve(&config, seed),
        Command::Selftest => Ok(selftest_cmd()),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(config_path: &Path, out: &Path, seed: Option<u64>, horizon: Option<usize>, jobs: Option<usize>) -> Result<ExitCode> {
    let mut config = ScenarioConfig::from_file(config_path)?;
    if let Some(h) = horizon {
        config.horizon = h;
        config.validate()?;
    }
    let seed = config.resolve_seed(seed)?;
    config.seed = Some(seed);

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = jobs {
        if k == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    let rows = pool.install(|| run_scenario(&config, seed))?;

    std::fs::create_dir_all(out)?;
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let csv_path = out.join(format!("{stem}.csv"));
    emit_figure_data(&rows, &csv_path)?;
    // the resolved config (seed and horizon included) reproduces the CSV
    std::fs::write(
        out.join(format!("{stem}.config.json")),
        serde_json::to_string_pretty(&config)? + "\n",
    )?;

    let mut failed = 0;
    for r in &rows {
        if let Some(e) = &r.error {
            failed += 1;
            eprintln!("row x = {}: {e}", r.x);
        }
    }
    println!("wrote {} rows to {}", rows.len(), csv_path.display());
    Ok(if failed > 0 { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn lb(p: &[f64], n: Option<usize>, m: usize) -> Result<ExitCode> {
    let probs: Vec<f64> = match (p, n) {
        ([single], Some(n)) => vec![*single; n],
        (_, Some(n)) if n != p.len() => {
            return Err(Error::Config(format!("--n {n} does not match {} values of --p", p.len())))
        }
        _ => p.to_vec(),
    };
    if probs.is_empty() {
        return Err(Error::Config("--n must be at least 1".into()));
    }
    let sensors = probs
        .iter()
        .map(|&p| ChainParams::new(p, m))
        .collect::<Result<Vec<_>>>()?;
    let r = lower_bound(&sensors)?;
    match r.l_star {
        Some(l) => println!("L* = {l}"),
        None => println!("L* = none (single sensor; limit taken)"),
    }
    println!("omega* = {}", r.omega_star);
    println!("l_b = {}", r.l_b);
    if probs.len() >= 2 && probs.iter().all(|&q| q == probs[0]) {
        let (l, omega) = lower_bound_symmetric(probs[0], probs.len())?;
        println!("symmetric closed form: L* = {l}, omega* = {omega}");
    }
    Ok(ExitCode::SUCCESS)
}

fn solve(config_path: &Path, seed: Option<u64>) -> Result<ExitCode> {
    let config = ScenarioConfig::from_file(config_path)?;
    let seed = config.resolve_seed(seed)?;
    for (xi, &x) in config.sweep.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &config, xi, 0));
        let sensors = gen_sensors(&config, x, &mut rng)?;
        let s = solve_eta(&sensors, EtaSearch::default())?;
        let active: Vec<String> = s.active.iter().map(|n| n.to_string()).collect();
        println!(
            "x = {x}: eta* = {}, d_hat = {}, active = [{}], J = {}",
            s.eta_star,
            s.d_hat,
            active.join(", "),
            s.j_value
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn selftest_cmd() -> ExitCode {
    let results = selftest::run_all();
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
