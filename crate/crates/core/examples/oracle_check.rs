//! Exact reference values for a small instance: the asymmetric expectation
//! values that QAQMC samples, checked against a simulation, plus the gap.

use annealkz::model::{generate_regular_graph, ModelSpec};
use annealkz::oracle::{exact_asymmetric_curve, exact_gap, ground_state_averages};
use annealkz::qaqmc::{even_tau_grid, run_quench_with, QuenchProtocol, UpdateKind};

fn main() -> annealkz::Result<()> {
    let model = ModelSpec::new(generate_regular_graph(8, 3, 5)?, 1.0)?;
    let grid = even_tau_grid(64, 8);
    let protocol = QuenchProtocol::with_slots(model.n(), 0.0, 0.6, 64, 1.0)?.with_tau_grid(grid.clone())?;

    let exact = exact_asymmetric_curve(&model, &protocol, &grid)?;
    let sampled = run_quench_with(&model, &protocol, 20_000, Some(1000), UpdateKind::Cluster, 3)?;
    println!("{:>4} {:>6} {:>9} {:>20}", "tau", "s", "exact q2", "QAQMC q2");
    for (x, e) in exact.iter().zip(&sampled.entries) {
        let pull = (e.q2_mean - x.q2) / e.q2_err;
        println!("{:>4} {:>6.3} {:>9.5} {:>9.5} +/- {:.5} ({pull:+.1} sigma)", x.tau, x.s, x.q2, e.q2_mean, e.q2_err);
    }

    let (e0, gs) = ground_state_averages(&model, 0.6)?;
    println!("ground state at s = 0.6: E0 = {e0:.6}, <q^2> = {:.5}, <m_z^2> = {:.5}", gs.q2, gs.mz2);

    let s_grid: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    let gap = exact_gap(&model, &s_grid)?;
    for p in gap.points.iter().step_by(3) {
        match p.gap_nondegenerate {
            Some(g) if p.degenerate => println!("s = {:.2}: degenerate ground level, next gap {g:.5}", p.s),
            _ => println!("s = {:.2}: gap {:.5}", p.s, p.gap),
        }
    }
    Ok(())
}
