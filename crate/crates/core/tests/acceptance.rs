//! Acceptance criteria. Each test prints one `PASS` or `FAIL` line before
//! asserting. The long-running criteria are ignored by default; run them
//! with `cargo test --release -p annealkz --test acceptance -- --ignored --nocapture`.

use annealkz::analysis::{
    collapse_fit, crossing_bootstrap, crossing_pairs, kz_slope_from, schedule_velocity, verify_slope, CollapseOptions,
    CollapsePoint, ExponentSet, SlopeOptions,
};
use annealkz::classical::{
    equilibrium_scan, metropolis_sweep, run_thermal_quench, swendsen_wang_sweep, IsingLattice, IsingState, ThermalProtocol, ThermalUpdate,
    T_C_REGULAR3,
};
use annealkz::cli::fixtures::OracleFixture;
use annealkz::cli::{load_records, run_ensemble, ExperimentConfig};
use annealkz::model::{
    classical_energy, generate_regular_graph, make_chain, make_complete, CouplingGraph, CouplingModel, ModelSpec,
};
use annealkz::observables::{binder, disorder_average, ObservableSeries};
use annealkz::oracle::{exact_cut_distribution, exact_slot_marginals};
use annealkz::qaqmc::{
    init_string, run_quench_with, run_simulation_time_quench, Op, QuenchProtocol, StringLength,
    UpdateKind,
};
use annealkz::rng::{child_seed, rng_from_seed};
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::path::Path;

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!("{} criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn fixture(name: &str) -> OracleFixture {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(format!("oracle_{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Mean and standard error of independent estimates.
fn mean_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn chain(n: usize) -> ModelSpec {
    ModelSpec::new(make_chain(n).unwrap(), 1.0).unwrap()
}

/// `v0 2^-j` for `j = 0..count`.
fn halving(v0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| v0 * 0.5f64.powi(j as i32)).collect()
}

const ORACLE_SWEEPS: usize = 40_000;
const ORACLE_SIGMAS: f64 = 3.0;
const ORACLE_MAX_REL_ERR: f64 = 0.02;

#[test]
fn criterion_1_oracle_equivalence() {
    let mut worst_pull: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut failures = Vec::new();
    for (i, name) in ["regular3_n6", "chain_n8"].into_iter().enumerate() {
        let f = fixture(name);
        let model = f.model().unwrap();
        assert_eq!(model.graph.content_hash(), f.graph_hash);
        let protocol = f.protocol().unwrap();
        let series = run_quench_with(&model, &protocol, ORACLE_SWEEPS, Some(2000), UpdateKind::Cluster, 100 + i as u64).unwrap();
        for (e, x) in series.entries.iter().zip(&f.points) {
            assert_eq!(e.tau, x.tau);
            for (label, got, err, exact) in [("q2", e.q2_mean, e.q2_err, x.q2), ("mz2", e.mz2_mean, e.mz2_err, x.mz2)] {
                let pull = (got - exact).abs() / err;
                let rel = err / exact;
                worst_pull = worst_pull.max(pull);
                worst_rel = worst_rel.max(rel);
                if pull > ORACLE_SIGMAS || rel >= ORACLE_MAX_REL_ERR {
                    failures.push(format!("{name} {label} tau={}: {got:.5} +/- {err:.5} vs {exact:.5}", x.tau));
                }
            }
        }
    }
    verdict(
        "1",
        failures.is_empty(),
        &format!(
            "64 comparisons, max deviation {worst_pull:.2} sigma (limit {ORACLE_SIGMAS}), max relative error {:.2}% (limit 2%){}",
            100.0 * worst_rel,
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    );
}

#[test]
fn criterion_2_trivial_limits() {
    let mut notes = Vec::new();
    let mut pass = true;
    for (i, n) in [16usize, 64, 256].into_iter().enumerate() {
        let model = ModelSpec::new(generate_regular_graph(n, 3, 40 + i as u64).unwrap(), 1.0).unwrap();
        let protocol = QuenchProtocol::constant(0.0, 16).unwrap().with_tau_grid(vec![4, 8, 16]).unwrap();
        let series = run_quench_with(&model, &protocol, 4000, Some(50), UpdateKind::Cluster, 7 + i as u64).unwrap();
        let exact = 1.0 / n as f64;
        let worst = series.entries.iter().map(|e| (e.q2_mean - exact).abs() / e.q2_err).fold(0.0, f64::max);
        pass &= worst <= 3.0;
        notes.push(format!("N={n} max |q2 - 1/N| = {worst:.2} sigma"));
    }
    let gaussian = binder(0.25, 0.1875).unwrap();
    let ordered = binder(1.0, 1.0).unwrap();
    pass &= gaussian == 0.0 && ordered == 1.0;
    notes.push(format!("U(Gaussian) = {gaussian}, U(ordered) = {ordered}"));
    verdict("2", pass, &notes.join(", "));
}

/// Slow chain quenches to the critical point: `v N^2 = 1/4`.
const CHAIN_SLOW_SCALED_V: f64 = 0.25;
const CHAIN_SIZES: [usize; 3] = [16, 32, 64];

#[test]
#[ignore = "about ten minutes in release mode"]
fn criterion_3_chain_equilibrium_scaling() {
    let rows: Vec<(usize, f64, f64)> = CHAIN_SIZES
        .par_iter()
        .map(|&n| {
            let v = CHAIN_SLOW_SCALED_V / (n * n) as f64;
            let p = QuenchProtocol::linear(n, 0.0, 0.5, v).unwrap();
            let m = p.m;
            let p = p.with_tau_grid(vec![m]).unwrap();
            let s = run_quench_with(&chain(n), &p, 3000, Some(300), UpdateKind::Cluster, 300 + n as u64).unwrap();
            let scale = (n as f64).powf(0.25);
            (n, s.entries[0].mz2_mean * scale, s.entries[0].mz2_err * scale)
        })
        .collect();
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.1), b.max(r.1)));
    let spread = hi / lo - 1.0;
    let table: Vec<String> = rows.iter().map(|(n, y, e)| format!("N={n}: {y:.4}({:.0})", e * 1e4)).collect();
    verdict("3", spread <= 0.05, &format!("m_z^2 N^(1/4) {} ; spread {:.2}% (limit 5%)", table.join(", "), 100.0 * spread));
}

fn chain_collapse_points(vs: &[f64], sweeps: usize) -> Vec<CollapsePoint> {
    let jobs: Vec<(usize, f64)> = CHAIN_SIZES.iter().flat_map(|&n| vs.iter().map(move |&v| (n, v))).collect();
    jobs.par_iter()
        .enumerate()
        .map(|(i, &(n, v))| {
            let p = QuenchProtocol::linear(n, 0.0, 0.5, v).unwrap();
            let m = p.m;
            let p = p.with_tau_grid(vec![m]).unwrap();
            let s = run_quench_with(&chain(n), &p, sweeps, Some(sweeps / 10), UpdateKind::Cluster, 400 + i as u64).unwrap();
            CollapsePoint { n, v: p.velocity, y: s.entries[0].mz2_mean, y_err: s.entries[0].mz2_err }
        })
        .collect()
}

#[test]
#[ignore = "a few minutes in release mode"]
fn criterion_4_hamiltonian_kz_exponent() {
    let points = chain_collapse_points(&halving(0.05, 8), 3000);
    let opts = CollapseOptions { fixed_b: Some(0.25), seed: 4, ..Default::default() };
    let fit = collapse_fit(&points, &opts).unwrap();
    verdict(
        "4",
        (fit.k - 2.0).abs() <= 0.2,
        &format!(
            "k = {:.3} +/- {:.3} (target 2.0 +/- 0.2), b fixed 1/4, {} of {} points used, chi2/dof {:.2}",
            fit.k,
            fit.k_err,
            fit.used.len(),
            points.len(),
            fit.chi2_dof
        ),
    );
}

fn simulation_time_points(sizes: &[usize], vs: &[f64], quenches: usize, update: UpdateKind) -> Vec<CollapsePoint> {
    let jobs: Vec<(usize, f64)> = sizes.iter().flat_map(|&n| vs.iter().map(move |&v| (n, v))).collect();
    jobs.par_iter()
        .enumerate()
        .map(|(i, &(n, v))| {
            let model = chain(n);
            let samples: Vec<f64> = (0..quenches as u64)
                .map(|q| {
                    let seed = child_seed(500 + i as u64, q);
                    run_simulation_time_quench(&model, 0.5, v, update, StringLength::QuadraticInN(4), seed).unwrap().mz2
                })
                .collect();
            let (y, y_err) = mean_err(&samples);
            CollapsePoint { n, v, y, y_err }
        })
        .collect()
}

fn dynamic_exponent(points: &[CollapsePoint], seed: u64) -> (f64, f64, usize, f64) {
    let opts = CollapseOptions { fixed_b: Some(0.25), seed, ..Default::default() };
    let fit = collapse_fit(points, &opts).unwrap();
    // k = z + 1/nu with nu = 1
    (fit.k - 1.0, fit.k_err, fit.used.len(), fit.chi2_dof)
}

#[test]
#[ignore = "about forty minutes in release mode"]
fn criterion_5_simulation_time_dynamics() {
    // local updates at reduced sizes, where the tolerance widens to 0.3
    let local = simulation_time_points(&[8, 12, 16], &halving(0.064, 10), 400, UpdateKind::Local);
    // cluster quenches need 8 to 2048 sweeps to reach v N^k ~ 1 at N = 64
    let cluster = simulation_time_points(&[16, 32, 64], &halving(0.0625, 9), 300, UpdateKind::Cluster);
    let (z_local, e_local, u_local, c_local) = dynamic_exponent(&local, 51);
    let (z_cluster, e_cluster, u_cluster, c_cluster) = dynamic_exponent(&cluster, 52);
    let pass = (z_local - 2.17).abs() <= 0.3 && (z_cluster - 0.30).abs() <= 0.10;
    verdict(
        "5",
        pass,
        &format!(
            "local z = {z_local:.3} +/- {e_local:.3} (2.17 +/- 0.3, N = 8..16, {u_local} points, chi2/dof {c_local:.2}); \
             cluster z = {z_cluster:.3} +/- {e_cluster:.3} (0.30 +/- 0.10, N = 16..64, {u_cluster} points, chi2/dof {c_cluster:.2})"
        ),
    );
}

fn thermal_ensemble(sizes: &[usize], realizations: usize, protocol_for: impl Fn(usize) -> ThermalProtocol + Sync) -> Vec<Vec<ObservableSeries>> {
    sizes
        .iter()
        .map(|&n| {
            let protocol = protocol_for(n);
            (0..realizations as u64)
                .into_par_iter()
                .map(|r| {
                    let graph = generate_regular_graph(n, 3, child_seed(600 + n as u64, r)).unwrap();
                    let mut s = run_thermal_quench(&graph, &protocol, child_seed(700 + n as u64, r)).unwrap();
                    s.realization = r;
                    s
                })
                .collect()
        })
        .collect()
}

#[test]
#[ignore = "about forty minutes in release mode"]
fn criterion_6_classical_baseline() {
    let sizes = [64usize, 128, 256];
    // Binder crossings of equilibrium curves on a descending temperature grid
    let temps: Vec<f64> = (0..=20).map(|i| 1.30 - 0.02 * i as f64).collect();
    let groups: Vec<Vec<ObservableSeries>> = sizes
        .iter()
        .map(|&n| {
            (0..500u64)
                .into_par_iter()
                .map(|r| {
                    let graph = generate_regular_graph(n, 3, child_seed(600 + n as u64, r)).unwrap();
                    let seed = child_seed(800 + n as u64, r);
                    let mut s = equilibrium_scan(&graph, &temps, 1000, 1000, ThermalUpdate::Metropolis, seed).unwrap();
                    s.realization = r;
                    s
                })
                .collect()
        })
        .collect();
    let crossings: Vec<_> =
        [(0, 1), (1, 2), (0, 2)].iter().map(|&(a, b)| crossing_bootstrap(&groups[a], &groups[b], 200, 60).unwrap()).collect();
    let t_star = crossings[1].s_star;
    let tc_ok = (t_star / T_C_REGULAR3 - 1.0).abs() <= 0.02;

    // thermal-quench collapse of <q^2> at T_c; b = 2 beta / nu' = 2/3 is exact
    let mut points = Vec::new();
    for v in halving(0.2, 12) {
        let protocol = ThermalProtocol::linear(2.0 * T_C_REGULAR3, T_C_REGULAR3, v, ThermalUpdate::Metropolis).unwrap().with_repeats(4);
        for group in thermal_ensemble(&sizes, 500, |_| protocol.clone()) {
            let avg = disorder_average(&group, 61).unwrap();
            let last = avg.entries.last().unwrap();
            points.push(CollapsePoint { n: avg.n, v: avg.velocity, y: last.q2, y_err: last.q2_err });
        }
    }
    let fit = collapse_fit(&points, &CollapseOptions { fixed_b: Some(2.0 / 3.0), seed: 62, ..Default::default() }).unwrap();
    let joint = collapse_fit(&points, &CollapseOptions { seed: 63, ..Default::default() }).unwrap();
    let x = kz_slope_from(fit.b, fit.k).unwrap();
    let x_err = x * fit.k_err / fit.k;
    let measured = verify_slope(&points, &fit, &SlopeOptions::default()).unwrap();
    let k_ok = (fit.k - 1.0).abs() <= 0.15;
    let x_ok = (x - 1.0 / 3.0).abs() <= 0.05;
    let pairs: Vec<String> = crossings
        .iter()
        .map(|c| format!("T*({},{}) = {:.4} +/- {:.4} ({} roots)", c.n_a, c.n_b, c.s_star, c.err, c.roots.len()))
        .collect();
    verdict(
        "6",
        tc_ok && k_ok && x_ok,
        &format!(
            "{}; T_c estimate {t_star:.4} vs {T_C_REGULAR3} ({:+.2}%, limit 2%); collapse with b = 2/3: k = {:.3} +/- {:.3} \
             (1 +/- 0.15), x = (1 - b)/k = {x:.3} +/- {x_err:.3} (1/3 +/- 0.05); joint fit b = {:.3} +/- {:.3}, \
             k = {:.3} +/- {:.3}; measured log-log slope {:.3} +/- {:.3}",
            pairs.join(", "),
            100.0 * (t_star / T_C_REGULAR3 - 1.0),
            fit.k,
            fit.k_err,
            joint.b,
            joint.b_err,
            joint.k,
            joint.k_err,
            -measured.slope,
            measured.slope_err
        ),
    );
}

const GLASS_SIZES: [usize; 4] = [64, 128, 192, 256];
const GLASS_ALPHA: f64 = 17.0 / 12.0;

fn glass_config(out: &Path, mode_block: &str, end: f64, points: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{"model": {{"kind": "regular", "sizes": {GLASS_SIZES:?}, "disorder": 1000}},
            "protocol": {{"mode": "hamiltonian", "velocities": {mode_block}, "end": {end}, "points": {points}}},
            "sampling": {{"sweeps": 2000}},
            "execution": {{"seed": {seed}, "output": {out:?}}}}}"#
    ))
    .unwrap()
}

#[test]
#[ignore = "multi-day run on a single core"]
fn criterion_7_quantum_regular_glass() {
    let root = std::env::temp_dir().join("annealkz-glass");
    let schedule = format!(r#"{{"power": {{"v0": [1.0], "alpha": {GLASS_ALPHA}}}}}"#);
    let crossing_cfg = glass_config(&root.join("crossings"), &schedule, 0.5, 48, 71);
    run_ensemble(&crossing_cfg, &root.join("crossings")).unwrap();
    let data = annealkz::cli::analyze::Dataset::from_records(load_records(&root.join("crossings")).unwrap());
    let report = annealkz::cli::analyze::analyze_crossings(&data, 64, 200, 72).unwrap();
    let sc = report.extrapolation.clone().unwrap();
    let velocities = format!("{{\"list\": {:?}}}", halving(0.2, 8));
    let collapse_cfg = glass_config(&root.join("collapse"), &velocities, sc.s_c, 1, 73);
    run_ensemble(&collapse_cfg, &root.join("collapse")).unwrap();
    let data = annealkz::cli::analyze::Dataset::from_records(load_records(&root.join("collapse")).unwrap());
    let collapse =
        annealkz::cli::analyze::analyze_collapse(&data, annealkz::cli::analyze::Observable::Q2, &CollapseOptions { seed: 74, ..Default::default() })
            .unwrap();
    let r = &collapse.result;
    let pass = (0.34..=0.375).contains(&sc.s_c) && (r.b - 0.86).abs() <= 0.10 && (r.k - 1.34).abs() <= 0.25;
    verdict(
        "7",
        pass,
        &format!(
            "s_c = {:.4} +/- {:.4} (0.34..0.375); b = {:.3} +/- {:.3} (0.86 +/- 0.10); k = {:.3} +/- {:.3} (1.34 +/- 0.25); \
             schedule v = N^-17/12 gives v(64) = {:.3e}",
            sc.s_c,
            sc.s_c_err,
            r.b,
            r.b_err,
            r.k,
            r.k_err,
            schedule_velocity(64, GLASS_ALPHA, 1.0)
        ),
    );
}

fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn state_index(spins: &[i8]) -> usize {
    spins.iter().enumerate().filter(|(_, &s)| s < 0).map(|(i, _)| 1 << i).sum()
}

/// Largest TV distance between sampled and exact cut-state distributions
/// and per-position operator-type marginals; also checks every sampled
/// configuration for positive weight and closure.
fn qaqmc_distribution_distance(model: &ModelSpec, protocol: &QuenchProtocol, update: UpdateKind, sweeps: usize, seed: u64) -> f64 {
    let len = protocol.string_len();
    let cuts: Vec<usize> = vec![0, len / 4, len / 2, 3 * len / 4];
    let exact_cuts: Vec<Vec<f64>> = cuts.iter().map(|&c| exact_cut_distribution(model, protocol, c).unwrap()).collect();
    let exact_ops = exact_slot_marginals(model, protocol).unwrap();
    let mut string = init_string(model, protocol, seed).unwrap();
    let sweep = |s: &mut annealkz::qaqmc::OperatorString| {
        match update {
            UpdateKind::Cluster => s.cluster_update(),
            UpdateKind::Local => s.segment_update(),
        }
        s.diagonal_sweep();
    };
    for _ in 0..1000 {
        sweep(&mut string);
    }
    let dim = 1usize << model.n();
    let mut cut_counts = vec![vec![0.0; dim]; cuts.len()];
    let mut op_counts = vec![[0.0; 3]; len];
    for _ in 0..sweeps {
        sweep(&mut string);
        string.check_consistency().unwrap();
        assert!(string.log_weight().is_finite());
        let snap = string.snapshot(&cuts);
        for (c, counts) in cut_counts.iter_mut().enumerate() {
            counts[state_index(&snap[c * model.n()..(c + 1) * model.n()])] += 1.0;
        }
        for (p, op) in string.ops().iter().enumerate() {
            op_counts[p][match op {
                Op::Bond(_) => 0,
                Op::Constant(_) => 1,
                Op::Flip(_) => 2,
            }] += 1.0;
        }
    }
    let norm = |v: &[f64]| v.iter().map(|x| x / sweeps as f64).collect::<Vec<f64>>();
    let cut_tv = cut_counts.iter().zip(&exact_cuts).map(|(c, e)| total_variation(&norm(c), e)).fold(0.0, f64::max);
    let op_tv = op_counts
        .iter()
        .zip(&exact_ops)
        .map(|(c, e)| total_variation(&norm(c), &[e.bond, e.constant, e.flip]))
        .fold(0.0, f64::max);
    cut_tv.max(op_tv)
}

fn classical_distribution_distance(graph: &CouplingGraph, t: f64, update: ThermalUpdate, sweeps: usize, seed: u64) -> f64 {
    let n = graph.n();
    let dim = 1usize << n;
    let weights: Vec<f64> = (0..dim)
        .map(|z| {
            let spins: Vec<i8> = (0..n).map(|i| if z >> i & 1 == 1 { -1 } else { 1 }).collect();
            (-classical_energy(graph, &spins).unwrap() / t).exp()
        })
        .collect();
    let zsum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / zsum).collect();
    let lattice = IsingLattice::new(graph);
    let mut rng = rng_from_seed(seed);
    let mut state = IsingState::random(graph, &mut rng);
    let mut counts = vec![0.0; dim];
    for k in 0..sweeps + 1000 {
        match update {
            ThermalUpdate::Metropolis => {
                metropolis_sweep(&mut state, &lattice, t, &mut rng);
            }
            ThermalUpdate::SwendsenWang => {
                swendsen_wang_sweep(&mut state, &lattice, t, &mut rng);
            }
        }
        if k >= 1000 {
            counts[state_index(&state.spins)] += 1.0 / sweeps as f64;
        }
    }
    total_variation(&counts, &exact)
}

#[test]
fn criterion_8_property_suites() {
    let mut notes = Vec::new();
    // stationary distributions of small strings against exhaustive sums
    let chain4 = chain(4);
    let mixed = ModelSpec::new(make_complete(4, CouplingModel::Gaussian, 5).unwrap(), 0.8).unwrap();
    let mut worst_q: f64 = 0.0;
    for (i, (model, protocol)) in [
        (&chain4, QuenchProtocol::constant(0.5, 8).unwrap()),
        (&chain4, QuenchProtocol::with_slots(4, 0.0, 0.7, 8, 1.0).unwrap()),
        (&mixed, QuenchProtocol::with_slots(4, 0.2, 0.9, 6, 1.0).unwrap()),
    ]
    .into_iter()
    .enumerate()
    {
        // the local dynamics decorrelates slowly and needs longer runs
        for (update, sweeps) in [(UpdateKind::Cluster, 200_000), (UpdateKind::Local, 1_000_000)] {
            worst_q = worst_q.max(qaqmc_distribution_distance(model, &protocol, update, sweeps, 80 + i as u64));
        }
    }
    notes.push(format!("QAQMC TV {worst_q:.4}"));
    let ring = make_chain(4).unwrap();
    let k4 = make_complete(4, CouplingModel::Gaussian, 9).unwrap();
    let mut worst_c: f64 = 0.0;
    for (g, t) in [(&k4, 0.7), (&k4, 2.0), (&ring, 1.5)] {
        for update in [ThermalUpdate::Metropolis, ThermalUpdate::SwendsenWang] {
            worst_c = worst_c.max(classical_distribution_distance(g, t, update, 400_000, 81));
        }
    }
    notes.push(format!("classical TV {worst_c:.4}"));

    // determinism and resume of the ensemble runner
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let cfg = |w: usize, out: &Path| {
        ExperimentConfig::from_json(&format!(
            r#"{{"model": {{"kind": "regular", "sizes": [8, 12], "disorder": 2}},
               "protocol": {{"mode": "hamiltonian", "velocities": {{"list": [0.5, 0.1]}}, "end": 0.5, "points": 4}},
               "sampling": {{"sweeps": 40}},
               "execution": {{"workers": {w}, "seed": 8, "output": {out:?}}}}}"#
        ))
        .unwrap()
    };
    let a = run_ensemble(&cfg(1, dirs[0].path()), dirs[0].path()).unwrap();
    let again = run_ensemble(&cfg(1, dirs[0].path()), dirs[0].path()).unwrap();
    run_ensemble(&cfg(2, dirs[1].path()), dirs[1].path()).unwrap();
    let lines = |d: &Path| -> BTreeSet<String> {
        std::fs::read_to_string(d.join("records.jsonl")).unwrap().lines().map(str::to_owned).collect()
    };
    let deterministic = lines(dirs[0].path()) == lines(dirs[1].path());
    let resumable = a.completed == 8 && again.completed == 0 && again.skipped == 8;
    notes.push(format!("runner deterministic {deterministic}, resume idempotent {resumable}"));

    // exponent conversions
    let mut round_trip = true;
    let mut rng = rng_from_seed(82);
    for _ in 0..1000 {
        use rand::Rng;
        let (beta, nu, z, d) = (rng.random_range(0.05..2.0), rng.random_range(0.1..5.0), rng.random_range(0.1..5.0), rng.random_range(1.0..8.0));
        let e = ExponentSet::from_unprimed(beta, nu, z, d);
        round_trip &= (e.nu(d) - nu).abs() < 1e-12 && (e.z(d) - z).abs() < 1e-12 && (e.b() - 2.0 * beta / (nu * d)).abs() < 1e-12;
    }
    notes.push(format!("exponent round trips {round_trip}"));

    verdict("8", worst_q < 0.01 && worst_c < 0.01 && deterministic && resumable && round_trip, &notes.join(", "));
}

#[test]
fn scheduled_velocities_follow_power_law() {
    let cfg = glass_config(Path::new("unused"), r#"{"power": {"v0": [1.0], "alpha": 1.4166666666666667}}"#, 0.5, 8, 1);
    let v64 = cfg.velocities(64)[0];
    assert!((v64 - schedule_velocity(64, GLASS_ALPHA, 1.0)).abs() < 1e-15);
    assert_eq!(crossing_pairs(&GLASS_SIZES, 64), vec![(64, 128), (128, 192), (192, 256)]);
}
