//! Classical simulated annealing of 3-regular antiferromagnets from twice the
//! critical temperature, with the Binder cumulant of the replica overlap.

use annealkz::classical::{run_thermal_quench, ThermalProtocol, ThermalUpdate, T_C_REGULAR3};
use annealkz::model::generate_regular_graph;
use annealkz::observables::disorder_average;

fn main() -> annealkz::Result<()> {
    let protocol = ThermalProtocol::linear(2.0 * T_C_REGULAR3, 0.8, 1e-3, ThermalUpdate::Metropolis)?
        .with_measurements(8)
        .with_repeats(4);
    println!("T: {:.3} -> {:.3} in {} sweeps", protocol.t_start, protocol.t_end, protocol.sweeps);

    for n in [32, 64] {
        let group = (0..40)
            .map(|r| {
                let graph = generate_regular_graph(n, 3, 1000 * n as u64 + r)?;
                let mut series = run_thermal_quench(&graph, &protocol, r)?;
                series.realization = r;
                Ok(series)
            })
            .collect::<annealkz::Result<Vec<_>>>()?;
        let avg = disorder_average(&group, 9)?;
        println!("N = {n}");
        for e in &avg.entries {
            println!("  T = {:.3}  <q^2> = {:.4} +/- {:.4}  U = {:.3} +/- {:.3}", e.s_or_t, e.q2, e.q2_err, e.binder, e.binder_err);
        }
    }
    Ok(())
}
