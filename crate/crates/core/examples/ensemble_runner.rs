//! A small disorder ensemble driven through the runner: jobs are written as
//! JSON lines, a second call resumes without repeating work, and the records
//! are averaged over disorder.

use annealkz::cli::analyze::{Dataset, Observable};
use annealkz::cli::{run_ensemble, ExperimentConfig};

const CONFIG: &str = r#"{
  "model": {"kind": "regular", "sizes": [12, 16, 20], "disorder": 4},
  "protocol": {"mode": "hamiltonian", "velocities": {"list": [0.4, 0.2, 0.1, 0.05]}, "end": 0.3, "points": 4},
  "sampling": {"sweeps": 300, "thermalization": 50},
  "execution": {"workers": 2, "seed": 17, "output": "ensemble-out"}
}"#;

fn main() -> annealkz::Result<()> {
    let dir = std::env::temp_dir().join("annealkz-ensemble-example");
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    println!("config {} with {} jobs", &cfg.hash()[..12], cfg.jobs().len());

    let first = run_ensemble(&cfg, &dir)?;
    let second = run_ensemble(&cfg, &dir)?;
    println!("first pass: {} completed; second pass: {} skipped", first.completed + first.skipped, second.skipped);

    let data = Dataset::load(std::slice::from_ref(&dir))?;
    println!("{:>4} {:>6} {:>20}", "N", "v", "[<q^2>] at s = 0.3");
    for p in data.collapse_points(Observable::Q2, 0)? {
        println!("{:>4} {:>6.3} {:>10.5} +/- {:.5}", p.n, p.v, p.y, p.y_err);
    }
    println!("records in {}", dir.display());
    Ok(())
}
