//! Quenches in simulation time: a uniform string whose `s` is raised after
//! every Monte Carlo sweep. Local and cluster dynamics respond very
//! differently at the same velocity.

use annealkz::model::{make_chain, ModelSpec};
use annealkz::qaqmc::{run_simulation_time_quench, StringLength, UpdateKind};
use annealkz::rng::child_seed;

fn main() -> annealkz::Result<()> {
    let n = 12;
    let model = ModelSpec::new(make_chain(n)?, 1.0)?;
    println!("N = {n}, string length 2m with m = 4 N^2 = {}", StringLength::QuadraticInN(4).m(n));
    for update in [UpdateKind::Local, UpdateKind::Cluster] {
        for v in [0.05, 0.01, 0.002] {
            let samples: Vec<f64> = (0..100)
                .map(|q| {
                    run_simulation_time_quench(&model, 0.5, v, update, StringLength::QuadraticInN(4), child_seed(7, q))
                        .map(|s| s.mz2)
                })
                .collect::<annealkz::Result<_>>()?;
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            println!("{:>8} v = {v:<6} <m_z^2> = {mean:.4}", update.name());
        }
    }
    Ok(())
}
