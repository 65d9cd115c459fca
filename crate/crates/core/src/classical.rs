//! Classical Ising Monte Carlo: single-spin Metropolis and Swendsen-Wang
//! kernels, and simulated annealing with a linear temperature schedule.
//!
//! Energies use the same convention as the quantum problem Hamiltonian,
//! `E = sum_edges J s_i s_j`, with temperatures in units of `|J|`.

use crate::error::{Error, Result};
use crate::model::{classical_energy, CouplingGraph};
use crate::observables::{
    magnetization, overlap_unchecked, ObservableSeries, ProtocolDescriptor, ProtocolKind, SeriesEntry,
};
use crate::rng::{child_seed, rng_from_seed, SimRng};
use crate::stats::{mean, variance};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Critical temperature of the antiferromagnetic 3-regular random graph,
/// `-2 / ln(1 - 2 / (1 + sqrt 2))`.
pub const T_C_REGULAR3: f64 = 1.134593;

/// Default equilibration at the starting temperature.
pub const DEFAULT_EQUIL_SWEEPS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalUpdate {
    Metropolis,
    SwendsenWang,
}

impl ThermalUpdate {
    pub fn name(self) -> &'static str {
        match self {
            ThermalUpdate::Metropolis => "metropolis",
            ThermalUpdate::SwendsenWang => "swendsen-wang",
        }
    }
}

/// Spin configuration with its incrementally tracked energy.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingState {
    pub spins: Vec<i8>,
    pub energy: f64,
}

impl IsingState {
    pub fn new(graph: &CouplingGraph, spins: Vec<i8>) -> Result<Self> {
        let energy = classical_energy(graph, &spins)?;
        Ok(Self { spins, energy })
    }

    pub fn random(graph: &CouplingGraph, rng: &mut SimRng) -> Self {
        let spins = (0..graph.n()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self::new(graph, spins).expect("sizes agree")
    }
}

/// Adjacency lists and edge list of a coupling graph, laid out for the
/// kernels.
#[derive(Clone, Debug)]
pub struct IsingLattice {
    neighbors: Vec<Vec<(u32, f64)>>,
    edges: Vec<(u32, u32, f64)>,
}

impl IsingLattice {
    pub fn new(graph: &CouplingGraph) -> Self {
        let neighbors = graph
            .adjacency()
            .into_iter()
            .map(|row| row.into_iter().map(|(j, c)| (j as u32, c)).collect())
            .collect();
        let edges = graph.edges().iter().map(|e| (e.i, e.j, e.coupling)).collect();
        Self { neighbors, edges }
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    fn energy(&self, spins: &[i8]) -> f64 {
        self.edges.iter().map(|&(i, j, c)| c * f64::from(spins[i as usize] * spins[j as usize])).sum()
    }

    /// Energy change of flipping spin `i`.
    #[inline]
    pub fn flip_delta(&self, spins: &[i8], i: usize) -> f64 {
        let field: f64 = self.neighbors[i].iter().map(|&(j, c)| c * f64::from(spins[j as usize])).sum();
        -2.0 * f64::from(spins[i]) * field
    }
}

/// `N` single-spin flip proposals at random sites, each accepted with
/// `min(1, exp(-dE / T))`. Returns the number of accepted flips.
pub fn metropolis_sweep(state: &mut IsingState, lattice: &IsingLattice, t: f64, rng: &mut SimRng) -> usize {
    debug_assert!(t > 0.0);
    let n = lattice.n();
    let mut accepted = 0;
    for _ in 0..n {
        let i = rng.random_range(0..n);
        let de = lattice.flip_delta(&state.spins, i);
        if de <= 0.0 || rng.random::<f64>() < (-de / t).exp() {
            state.spins[i] = -state.spins[i];
            state.energy += de;
            accepted += 1;
        }
    }
    accepted
}

#[inline]
fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = parent[x as usize];
    }
    x
}

/// One Swendsen-Wang pass: satisfied edges are bonded with probability
/// `1 - exp(-2|J|/T)` and every resulting cluster is flipped with
/// probability 1/2. Returns the number of clusters.
pub fn swendsen_wang_sweep(state: &mut IsingState, lattice: &IsingLattice, t: f64, rng: &mut SimRng) -> usize {
    debug_assert!(t > 0.0);
    let n = lattice.n();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for &(i, j, c) in &lattice.edges {
        let satisfied = c * f64::from(state.spins[i as usize] * state.spins[j as usize]) < 0.0;
        if satisfied && rng.random::<f64>() < 1.0 - (-2.0 * c.abs() / t).exp() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a as usize] = b;
            }
        }
    }
    // 0 = undecided, 1 = keep, 2 = flip
    let mut decision = vec![0u8; n];
    let mut clusters = 0;
    for i in 0..n {
        let root = find(&mut parent, i as u32) as usize;
        if decision[root] == 0 {
            decision[root] = if rng.random::<bool>() { 2 } else { 1 };
            clusters += 1;
        }
        if decision[root] == 2 {
            state.spins[i] = -state.spins[i];
        }
    }
    state.energy = lattice.energy(&state.spins);
    clusters
}

fn apply(update: ThermalUpdate, state: &mut IsingState, lattice: &IsingLattice, t: f64, rng: &mut SimRng) {
    match update {
        ThermalUpdate::Metropolis => {
            metropolis_sweep(state, lattice, t, rng);
        }
        ThermalUpdate::SwendsenWang => {
            swendsen_wang_sweep(state, lattice, t, rng);
        }
    }
}

/// Linear cooling from `t_start` to `t_end` in `sweeps` sweeps, with
/// measurements after the sweeps listed in `measure_at` (sweep 0 is the
/// equilibrated state at `t_start`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalProtocol {
    pub t_start: f64,
    pub t_end: f64,
    /// Temperature decrease per sweep; zero for a fixed-temperature run.
    pub v_t: f64,
    pub sweeps: usize,
    pub update: ThermalUpdate,
    pub equil_sweeps: usize,
    pub measure_at: Vec<usize>,
    /// Independent annealing runs per realization; entries average over them.
    pub repeats: usize,
}

impl ThermalProtocol {
    /// Cooling at rate `v_t`; the sweep count is `(t_start - t_end) / v_t`
    /// rounded, and the rate is adjusted to land exactly on `t_end`. Only
    /// the final temperature is measured.
    pub fn linear(t_start: f64, t_end: f64, v_t: f64, update: ThermalUpdate) -> Result<Self> {
        if !(t_end > 0.0 && t_start > t_end && t_start.is_finite()) {
            return Err(Error::InvalidProtocol(format!("need T_start > T_end > 0, got {t_start} -> {t_end}")));
        }
        if !(v_t > 0.0) {
            return Err(Error::InvalidProtocol(format!("v_T must be > 0, got {v_t}")));
        }
        let sweeps = (((t_start - t_end) / v_t).round() as usize).max(1);
        Ok(Self {
            t_start,
            t_end,
            v_t: (t_start - t_end) / sweeps as f64,
            sweeps,
            update,
            equil_sweeps: DEFAULT_EQUIL_SWEEPS,
            measure_at: vec![sweeps],
            repeats: 1,
        })
    }

    /// Cooling from `2 T_c` of the 3-regular graph to `t_end`.
    pub fn from_twice_tc(t_end: f64, v_t: f64) -> Result<Self> {
        Self::linear(2.0 * T_C_REGULAR3, t_end, v_t, ThermalUpdate::Metropolis)
    }

    /// `sweeps` sweeps at constant temperature, measured after each.
    pub fn fixed(t: f64, sweeps: usize, update: ThermalUpdate) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) || sweeps == 0 {
            return Err(Error::InvalidProtocol(format!("fixed run needs T > 0 and sweeps > 0, got {t}, {sweeps}")));
        }
        Ok(Self {
            t_start: t,
            t_end: t,
            v_t: 0.0,
            sweeps,
            update,
            equil_sweeps: DEFAULT_EQUIL_SWEEPS,
            measure_at: (1..=sweeps).collect(),
            repeats: 1,
        })
    }

    /// Measures at `points` sweeps evenly spread over the schedule,
    /// always including the last one.
    pub fn with_measurements(mut self, points: usize) -> Self {
        let points = points.clamp(1, self.sweeps);
        let mut at: Vec<usize> = (1..=points).map(|k| (k * self.sweeps).div_ceil(points)).collect();
        at.dedup();
        self.measure_at = at;
        self
    }

    pub fn with_equilibration(mut self, sweeps: usize) -> Self {
        self.equil_sweeps = sweeps;
        self
    }

    pub fn with_repeats(mut self, repeats: usize) -> Self {
        self.repeats = repeats.max(1);
        self
    }

    /// Temperature during sweep `k` (1-based); `k = 0` is `t_start`.
    pub fn temperature(&self, k: usize) -> f64 {
        if k >= self.sweeps {
            self.t_end
        } else {
            self.t_start - k as f64 * self.v_t
        }
    }

    fn validate(&self) -> Result<()> {
        if self.measure_at.iter().any(|&k| k > self.sweeps) || !self.measure_at.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidProtocol("measurement sweeps must be increasing and within the schedule".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidProtocol("repeats must be >= 1".into()));
        }
        Ok(())
    }
}

fn error_of(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        0.0
    } else {
        (variance(xs) / xs.len() as f64).sqrt()
    }
}

/// Two replicas equilibrated at `t_start` and cooled along the protocol;
/// each entry averages its measurement over the protocol's repeats.
pub fn run_thermal_quench(graph: &CouplingGraph, protocol: &ThermalProtocol, seed: u64) -> Result<ObservableSeries> {
    protocol.validate()?;
    graph.validate()?;
    let lattice = IsingLattice::new(graph);
    let points = protocol.measure_at.len();
    let mut acc = vec![[Vec::new(), Vec::new(), Vec::new()]; points];
    for rep in 0..protocol.repeats {
        let mut rngs = [0, 1].map(|r| rng_from_seed(child_seed(child_seed(seed, rep as u64), r)));
        let mut states = [0, 1].map(|r| IsingState::random(graph, &mut rngs[r]));
        for (state, rng) in states.iter_mut().zip(rngs.iter_mut()) {
            for _ in 0..protocol.equil_sweeps {
                apply(protocol.update, state, &lattice, protocol.t_start, rng);
            }
        }
        let mut next = 0;
        for k in 0..=protocol.sweeps {
            if k > 0 {
                let t = protocol.temperature(k);
                for (state, rng) in states.iter_mut().zip(rngs.iter_mut()) {
                    apply(protocol.update, state, &lattice, t, rng);
                }
            }
            if next < points && protocol.measure_at[next] == k {
                let q = overlap_unchecked(&states[0].spins, &states[1].spins);
                let mz2 = states.iter().map(|s| magnetization(&s.spins).powi(2)).sum::<f64>() / 2.0;
                acc[next][0].push(q * q);
                acc[next][1].push(q.powi(4));
                acc[next][2].push(mz2);
                next += 1;
            }
        }
        debug_assert!(states.iter().all(|s| (s.energy - lattice.energy(&s.spins)).abs() < 1e-9));
    }
    let entries = protocol
        .measure_at
        .iter()
        .zip(&acc)
        .map(|(&k, [q2, q4, mz2])| SeriesEntry {
            tau: k,
            s_or_t: protocol.temperature(k),
            q2_mean: mean(q2),
            q2_err: error_of(q2),
            q4_mean: mean(q4),
            q4_err: error_of(q4),
            mz2_mean: mean(mz2),
            mz2_err: error_of(mz2),
            n_samples: q2.len(),
        })
        .collect();
    Ok(ObservableSeries {
        model_id: format!("{}-n{}", graph.kind().to_string().replace(' ', ""), graph.n()),
        graph_hash: graph.content_hash(),
        n: graph.n(),
        protocol: ProtocolDescriptor {
            kind: ProtocolKind::Thermal,
            velocity: protocol.v_t,
            m: protocol.sweeps,
            r: 1.0,
            start: protocol.t_start,
            end: protocol.t_end,
            update: protocol.update.name().into(),
        },
        entries,
        seed,
        realization: 0,
        flags: vec![format!("schedule: linear from T_start = {}", protocol.t_start)],
    })
}

/// Equilibrium moments on a temperature grid, visited from hottest to
/// coldest. Two replicas start random at the first temperature; at each
/// grid point they get `equil` sweeps and then `sweeps` measured sweeps,
/// whose time averages form one entry. Entry errors ignore autocorrelation.
pub fn equilibrium_scan(
    graph: &CouplingGraph,
    temperatures: &[f64],
    equil: usize,
    sweeps: usize,
    update: ThermalUpdate,
    seed: u64,
) -> Result<ObservableSeries> {
    graph.validate()?;
    if temperatures.is_empty() || sweeps == 0 {
        return Err(Error::InvalidProtocol("equilibrium scan needs temperatures and sweeps > 0".into()));
    }
    if !temperatures.iter().all(|&t| t > 0.0 && t.is_finite()) || !temperatures.windows(2).all(|w| w[0] > w[1]) {
        return Err(Error::InvalidProtocol("scan temperatures must be positive and strictly decreasing".into()));
    }
    let lattice = IsingLattice::new(graph);
    let mut rngs = [0, 1].map(|r| rng_from_seed(child_seed(seed, r)));
    let mut states = [0, 1].map(|r| IsingState::random(graph, &mut rngs[r]));
    let mut entries = Vec::with_capacity(temperatures.len());
    for (i, &t) in temperatures.iter().enumerate() {
        let (mut q2, mut q4, mut mz2) = (Vec::with_capacity(sweeps), Vec::with_capacity(sweeps), Vec::with_capacity(sweeps));
        for k in 0..equil + sweeps {
            for (state, rng) in states.iter_mut().zip(rngs.iter_mut()) {
                apply(update, state, &lattice, t, rng);
            }
            if k >= equil {
                let q = overlap_unchecked(&states[0].spins, &states[1].spins);
                q2.push(q * q);
                q4.push(q.powi(4));
                mz2.push(states.iter().map(|s| magnetization(&s.spins).powi(2)).sum::<f64>() / 2.0);
            }
        }
        entries.push(SeriesEntry {
            tau: i + 1,
            s_or_t: t,
            q2_mean: mean(&q2),
            q2_err: error_of(&q2),
            q4_mean: mean(&q4),
            q4_err: error_of(&q4),
            mz2_mean: mean(&mz2),
            mz2_err: error_of(&mz2),
            n_samples: sweeps,
        });
    }
    Ok(ObservableSeries {
        model_id: format!("{}-n{}", graph.kind().to_string().replace(' ', ""), graph.n()),
        graph_hash: graph.content_hash(),
        n: graph.n(),
        protocol: ProtocolDescriptor {
            kind: ProtocolKind::Thermal,
            velocity: 0.0,
            m: temperatures.len() * (equil + sweeps),
            r: 1.0,
            start: temperatures[0],
            end: temperatures[temperatures.len() - 1],
            update: update.name().into(),
        },
        entries,
        seed,
        realization: 0,
        flags: vec![format!("equilibrium scan: {equil} + {sweeps} sweeps per temperature")],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_regular_graph, make_chain, make_square_lattice, GraphKind};
    use crate::oracle::{chain_transfer_matrix, classical_equilibrium};
    use crate::stats::binned;

    fn k4_af() -> CouplingGraph {
        let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)].map(|(i, j)| (i, j, 1.0));
        CouplingGraph::from_edges(4, edges, GraphKind::Complete, None).unwrap()
    }

    #[test]
    fn critical_temperature_constant() {
        let tc = -2.0 / (1.0 - 2.0 / (1.0 + 2f64.sqrt())).ln();
        assert!((tc - T_C_REGULAR3).abs() < 1e-6);
    }

    #[test]
    fn k4_all_up_flips_lower_energy() {
        let g = k4_af();
        let lat = IsingLattice::new(&g);
        let mut state = IsingState::new(&g, vec![1; 4]).unwrap();
        for i in 0..4 {
            assert_eq!(lat.flip_delta(&state.spins, i), -6.0);
        }
        let mut rng = rng_from_seed(1);
        // first proposal always accepted; every later one tracked exactly
        assert!(metropolis_sweep(&mut state, &lat, 0.01, &mut rng) >= 1);
        assert!((state.energy - classical_energy(&g, &state.spins).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn hot_limit_accepts_everything() {
        let g = generate_regular_graph(16, 3, 2).unwrap();
        let lat = IsingLattice::new(&g);
        let mut rng = rng_from_seed(3);
        let mut state = IsingState::random(&g, &mut rng);
        let acc: usize = (0..50).map(|_| metropolis_sweep(&mut state, &lat, 1e12, &mut rng)).sum();
        assert_eq!(acc, 50 * 16);
        let clusters = swendsen_wang_sweep(&mut state, &lat, 1e12, &mut rng);
        assert_eq!(clusters, 16);
    }

    #[test]
    fn cold_ferromagnet_is_one_cluster() {
        let g = make_square_lattice(4).unwrap();
        let lat = IsingLattice::new(&g);
        let mut rng = rng_from_seed(4);
        let mut state = IsingState::new(&g, vec![1; 16]).unwrap();
        for _ in 0..20 {
            assert_eq!(swendsen_wang_sweep(&mut state, &lat, 1e-6, &mut rng), 1);
            assert!(state.spins.iter().all(|&s| s == state.spins[0]));
        }
    }

    #[test]
    fn energy_bookkeeping_on_glass() {
        let g = generate_regular_graph(20, 3, 7).unwrap();
        let lat = IsingLattice::new(&g);
        let mut rng = rng_from_seed(5);
        let mut state = IsingState::random(&g, &mut rng);
        for k in 0..200 {
            let t = 0.3 + 2.0 * (k % 7) as f64 / 7.0;
            if k % 3 == 0 {
                swendsen_wang_sweep(&mut state, &lat, t, &mut rng);
            } else {
                metropolis_sweep(&mut state, &lat, t, &mut rng);
            }
            assert!((state.energy - classical_energy(&g, &state.spins).unwrap()).abs() < 1e-9);
        }
    }

    fn long_run_energy(g: &CouplingGraph, t: f64, update: ThermalUpdate, sweeps: usize, seed: u64) -> (f64, f64) {
        let lat = IsingLattice::new(g);
        let mut rng = rng_from_seed(seed);
        let mut state = IsingState::random(g, &mut rng);
        for _ in 0..1000 {
            apply(update, &mut state, &lat, t, &mut rng);
        }
        let es: Vec<f64> = (0..sweeps)
            .map(|_| {
                apply(update, &mut state, &lat, t, &mut rng);
                state.energy
            })
            .collect();
        let b = binned(&es, 50);
        (b.mean, b.err)
    }

    #[test]
    fn metropolis_chain_matches_transfer_matrix() {
        let g = make_chain(8).unwrap();
        let (_, exact) = chain_transfer_matrix(8, -1.0, 2.0);
        let (e, err) = long_run_energy(&g, 2.0, ThermalUpdate::Metropolis, 200_000, 11);
        assert!((e - exact).abs() < 3.0 * err, "{e} +- {err} vs {exact}");
        let (e, err) = long_run_energy(&g, 2.0, ThermalUpdate::SwendsenWang, 200_000, 12);
        assert!((e - exact).abs() < 3.0 * err, "{e} +- {err} vs {exact}");
    }

    #[test]
    fn swendsen_wang_square_lattice_matches_enumeration() {
        let g = make_square_lattice(4).unwrap();
        let exact = classical_equilibrium(&g, 2.269).unwrap();
        let (e, err) = long_run_energy(&g, 2.269, ThermalUpdate::SwendsenWang, 100_000, 13);
        assert!((e - exact.e).abs() < 3.0 * err, "{e} +- {err} vs {}", exact.e);
    }

    #[test]
    fn fixed_temperature_overlap_matches_enumeration() {
        let g = generate_regular_graph(10, 3, 8).unwrap();
        let t = 1.5;
        let exact = classical_equilibrium(&g, t).unwrap();
        let p = ThermalProtocol::fixed(t, 40_000, ThermalUpdate::Metropolis).unwrap();
        let series = run_thermal_quench(&g, &p, 21).unwrap();
        let q2: Vec<f64> = series.entries.iter().map(|e| e.q2_mean).collect();
        let b = binned(&q2, 50);
        assert!((b.mean - exact.q2).abs() < 3.0 * b.err, "{} +- {} vs {}", b.mean, b.err, exact.q2);
    }

    #[test]
    fn quasi_static_cooling_tracks_equilibrium() {
        let g = generate_regular_graph(8, 3, 9).unwrap();
        let p = ThermalProtocol::linear(2.0, 0.8, 0.002, ThermalUpdate::Metropolis)
            .unwrap()
            .with_measurements(4)
            .with_repeats(1000);
        let series = run_thermal_quench(&g, &p, 31).unwrap();
        assert_eq!(series.protocol.kind, ProtocolKind::Thermal);
        for e in &series.entries {
            let exact = classical_equilibrium(&g, e.s_or_t).unwrap();
            assert!((e.q2_mean - exact.q2).abs() < 3.5 * e.q2_err, "T = {}: {} +- {} vs {}", e.s_or_t, e.q2_mean, e.q2_err, exact.q2);
        }
    }

    #[test]
    fn protocol_validation() {
        assert!(ThermalProtocol::linear(1.0, 2.0, 0.1, ThermalUpdate::Metropolis).is_err());
        assert!(ThermalProtocol::linear(2.0, 0.0, 0.1, ThermalUpdate::Metropolis).is_err());
        let p = ThermalProtocol::linear(2.0, 1.0, 0.3, ThermalUpdate::Metropolis).unwrap();
        assert_eq!(p.sweeps, 3);
        assert!((p.temperature(3) - 1.0).abs() < 1e-15);
        let p = ThermalProtocol::from_twice_tc(T_C_REGULAR3, 0.01).unwrap().with_measurements(10);
        assert_eq!(p.measure_at.len(), 10);
        assert_eq!(*p.measure_at.last().unwrap(), p.sweeps);
    }

    #[test]
    fn fixed_runs_are_deterministic() {
        let g = generate_regular_graph(12, 3, 1).unwrap();
        let p = ThermalProtocol::fixed(1.0, 20, ThermalUpdate::Metropolis).unwrap();
        assert_eq!(run_thermal_quench(&g, &p, 5).unwrap(), run_thermal_quench(&g, &p, 5).unwrap());
        assert!(run_thermal_quench(&g, &p, 5).unwrap().entries.iter().all(|e| e.s_or_t == 1.0));
    }

    #[test]
    fn equilibrium_scan_matches_enumeration() {
        let g = generate_regular_graph(10, 3, 8).unwrap();
        let temps = [2.0, 1.4, 0.9];
        let series = equilibrium_scan(&g, &temps, 500, 60_000, ThermalUpdate::Metropolis, 41).unwrap();
        assert_eq!(series.entries.len(), 3);
        for e in &series.entries {
            let exact = classical_equilibrium(&g, e.s_or_t).unwrap();
            // samples are correlated; allow a generous multiple of the naive error
            assert!((e.q2_mean - exact.q2).abs() < 0.02, "T = {}: {} vs {}", e.s_or_t, e.q2_mean, exact.q2);
            assert!((e.q4_mean - exact.q4).abs() < 0.02, "T = {}: {} vs {}", e.s_or_t, e.q4_mean, exact.q4);
        }
        assert!(equilibrium_scan(&g, &[1.0, 1.5], 10, 10, ThermalUpdate::Metropolis, 1).is_err());
    }
}
