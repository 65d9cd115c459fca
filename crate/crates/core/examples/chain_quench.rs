//! Quasi-adiabatic quench of the periodic transverse-field Ising chain to its
//! critical point, printing the overlap and magnetization along the string.

use annealkz::model::{make_chain, ModelSpec};
use annealkz::qaqmc::{even_tau_grid, run_quench_with, QuenchProtocol, UpdateKind};

fn main() -> annealkz::Result<()> {
    let n = 32;
    let model = ModelSpec::new(make_chain(n)?, 1.0)?;
    // v N^2 = 1 puts the quench right at the Kibble-Zurek scale
    let v = 1.0 / (n * n) as f64;
    let protocol = QuenchProtocol::linear(n, 0.0, 0.5, v)?;
    let protocol = protocol.clone().with_tau_grid(even_tau_grid(protocol.m, 12))?;
    println!("N = {n}, v = {v:.3e}, m = {}", protocol.m);

    let series = run_quench_with(&model, &protocol, 2000, Some(200), UpdateKind::Cluster, 1)?;
    println!("{:>8} {:>7} {:>18} {:>18}", "tau", "s", "<q^2>", "<m_z^2>");
    for e in &series.entries {
        println!(
            "{:>8} {:>7.4} {:>10.5} +/- {:.5} {:>10.5} +/- {:.5}",
            e.tau, e.s_or_t, e.q2_mean, e.q2_err, e.mz2_mean, e.mz2_err
        );
    }
    for flag in &series.flags {
        println!("note: {flag}");
    }
    Ok(())
}
