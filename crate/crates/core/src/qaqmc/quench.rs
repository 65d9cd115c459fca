use super::decomposition::Couplings;
use super::protocol::{QuenchMode, QuenchProtocol};
use super::string::OperatorString;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::observables::{
    magnetization, overlap_unchecked, ObservableSeries, ProtocolDescriptor, ProtocolKind, SeriesEntry,
};
use crate::rng::child_seed;
use crate::stats::binned;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Off-diagonal update used between diagonal sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateKind {
    Cluster,
    Local,
}

impl UpdateKind {
    pub fn name(self) -> &'static str {
        match self {
            UpdateKind::Cluster => "cluster",
            UpdateKind::Local => "local",
        }
    }
}

/// Number of bins for the error analysis of measured series.
pub const MEASUREMENT_BINS: usize = 32;
/// A series is flagged when its estimated integrated autocorrelation time
/// exceeds this fraction of the bin length.
pub const AUTOCORR_FLAG_FRACTION: f64 = 0.25;

/// Default thermalization: `max(100, 10 N)` sweeps.
pub fn default_therm_sweeps(n: usize) -> usize {
    (10 * n).max(100)
}

/// Two independent strings on the same instance and protocol.
#[derive(Clone, Debug)]
pub struct ReplicaPair {
    pub first: OperatorString,
    pub second: OperatorString,
    protocol: QuenchProtocol,
}

/// Observables of one measurement at slot `tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauSample {
    pub tau: usize,
    pub q: f64,
    pub q2: f64,
    pub q4: f64,
    pub mz2: f64,
}

/// Cuts used for a measurement grid: each `tau` and its mirror `2m - tau`,
/// which has the same marginal distribution because the string is a
/// palindrome. Returns the sorted cuts and, per grid point, the indices of
/// its two cuts.
fn cut_layout(grid: &[usize], m: usize) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut cuts: Vec<usize> = grid.iter().flat_map(|&t| [t, 2 * m - t]).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let pos = |c: usize| cuts.binary_search(&c).expect("cut present");
    let pairs = grid.iter().map(|&t| (pos(t), pos(2 * m - t))).collect();
    (cuts, pairs)
}

fn samples_from_snapshots(
    n: usize,
    grid: &[usize],
    pairs: &[(usize, usize)],
    a: &[i8],
    b: &[i8],
) -> Vec<TauSample> {
    let block = |buf: &'_ [i8], k: usize| -> Vec<i8> { buf[k * n..(k + 1) * n].to_vec() };
    grid.iter()
        .zip(pairs)
        .map(|(&tau, &(fwd, back))| {
            let ca = [block(a, fwd), block(a, back)];
            let cb = [block(b, fwd), block(b, back)];
            let (mut q, mut q2, mut q4) = (0.0, 0.0, 0.0);
            for x in &ca {
                for y in &cb {
                    let v = overlap_unchecked(x, y);
                    q += v;
                    q2 += v * v;
                    q4 += v * v * v * v;
                }
            }
            let mz2 = ca.iter().chain(&cb).map(|c| magnetization(c).powi(2)).sum::<f64>() / 4.0;
            TauSample { tau, q: q / 4.0, q2: q2 / 4.0, q4: q4 / 4.0, mz2 }
        })
        .collect()
}

impl ReplicaPair {
    pub fn new(model: &ModelSpec, protocol: &QuenchProtocol, seed: u64) -> Result<Self> {
        let couplings = Arc::new(Couplings::new(model));
        Ok(Self {
            first: OperatorString::new(couplings.clone(), protocol, child_seed(seed, 0))?,
            second: OperatorString::new(couplings, protocol, child_seed(seed, 1))?,
            protocol: protocol.clone(),
        })
    }

    pub fn protocol(&self) -> &QuenchProtocol {
        &self.protocol
    }

    /// One off-diagonal update followed by a diagonal sweep, on both replicas.
    pub fn sweep(&mut self, update: UpdateKind) {
        for r in [&mut self.first, &mut self.second] {
            match update {
                UpdateKind::Cluster => r.cluster_update(),
                UpdateKind::Local => r.segment_update(),
            }
            r.diagonal_sweep();
        }
    }

    /// Like [`ReplicaPair::sweep`] but measures on `grid` during the diagonal
    /// sweeps.
    pub fn sweep_and_measure(&mut self, update: UpdateKind, grid: &[usize]) -> Result<Vec<TauSample>> {
        let m = self.protocol.m;
        check_grid(grid, m)?;
        let n = self.first.n();
        let (cuts, pairs) = cut_layout(grid, m);
        let mut snaps = [vec![0i8; cuts.len() * n], vec![0i8; cuts.len() * n]];
        for (r, snap) in [&mut self.first, &mut self.second].into_iter().zip(snaps.iter_mut()) {
            match update {
                UpdateKind::Cluster => r.cluster_update(),
                UpdateKind::Local => r.segment_update(),
            }
            r.diagonal_sweep_recording(&cuts, snap);
        }
        Ok(samples_from_snapshots(n, grid, &pairs, &snaps[0], &snaps[1]))
    }
}

fn check_grid(grid: &[usize], m: usize) -> Result<()> {
    match grid.iter().find(|&&t| t == 0 || t > m) {
        Some(&tau) => Err(Error::TauOutOfRange { tau, m }),
        None => Ok(()),
    }
}

/// Diagonal observables of both replicas at every `tau` of `grid`, from the
/// current configurations.
pub fn measure(pair: &mut ReplicaPair, grid: &[usize]) -> Result<Vec<TauSample>> {
    let m = pair.protocol.m;
    check_grid(grid, m)?;
    let (cuts, pairs) = cut_layout(grid, m);
    let a = pair.first.snapshot(&cuts);
    let b = pair.second.snapshot(&cuts);
    Ok(samples_from_snapshots(pair.first.n(), grid, &pairs, &a, &b))
}

pub(crate) fn model_id(model: &ModelSpec) -> String {
    format!("{}-n{}", model.graph.kind().to_string().replace(' ', ""), model.n())
}

/// Thermalizes a replica pair and measures `<q^2>`, `<q^4>` and `<m_z^2>` on
/// the protocol's tau grid for `sweeps` sweeps.
pub fn run_quench(
    model: &ModelSpec,
    protocol: &QuenchProtocol,
    sweeps: usize,
    therm_sweeps: Option<usize>,
    seed: u64,
) -> Result<ObservableSeries> {
    run_quench_with(model, protocol, sweeps, therm_sweeps, UpdateKind::Cluster, seed)
}

pub fn run_quench_with(
    model: &ModelSpec,
    protocol: &QuenchProtocol,
    sweeps: usize,
    therm_sweeps: Option<usize>,
    update: UpdateKind,
    seed: u64,
) -> Result<ObservableSeries> {
    if protocol.mode != QuenchMode::Hamiltonian {
        return Err(Error::InvalidProtocol("run_quench needs a Hamiltonian-mode protocol".into()));
    }
    if sweeps == 0 {
        return Err(Error::InvalidProtocol("sweeps must be >= 1".into()));
    }
    let mut pair = ReplicaPair::new(model, protocol, seed)?;
    for _ in 0..therm_sweeps.unwrap_or_else(|| default_therm_sweeps(model.n())) {
        pair.sweep(update);
    }
    let grid = protocol.tau_grid.clone();
    let mut series: Vec<[Vec<f64>; 3]> = vec![[Vec::with_capacity(sweeps), Vec::with_capacity(sweeps), Vec::with_capacity(sweeps)]; grid.len()];
    for _ in 0..sweeps {
        let samples = pair.sweep_and_measure(update, &grid)?;
        for (acc, s) in series.iter_mut().zip(&samples) {
            acc[0].push(s.q2);
            acc[1].push(s.q4);
            acc[2].push(s.mz2);
        }
    }
    debug_assert!(pair.first.check_consistency().is_ok() && pair.second.check_consistency().is_ok());

    let mut flags = Vec::new();
    let mut entries = Vec::with_capacity(grid.len());
    let mut worst_tau = 0.0f64;
    let mut bin_len = sweeps;
    for (&tau, acc) in grid.iter().zip(&series) {
        let [q2, q4, mz2] = [binned(&acc[0], MEASUREMENT_BINS), binned(&acc[1], MEASUREMENT_BINS), binned(&acc[2], MEASUREMENT_BINS)];
        worst_tau = worst_tau.max(q2.tau_int).max(mz2.tau_int);
        bin_len = q2.bin_len;
        entries.push(SeriesEntry {
            tau,
            s_or_t: protocol.s_at(tau),
            q2_mean: q2.mean,
            q2_err: q2.err,
            q4_mean: q4.mean,
            q4_err: q4.err,
            mz2_mean: mz2.mean,
            mz2_err: mz2.err,
            n_samples: sweeps,
        });
    }
    if worst_tau > AUTOCORR_FLAG_FRACTION * bin_len as f64 {
        flags.push(format!(
            "autocorrelation: tau_int {worst_tau:.2} exceeds {AUTOCORR_FLAG_FRACTION} x bin length {bin_len}"
        ));
    }
    Ok(ObservableSeries {
        model_id: model_id(model),
        graph_hash: model.graph.content_hash(),
        n: model.n(),
        protocol: ProtocolDescriptor {
            kind: ProtocolKind::Hamiltonian,
            velocity: protocol.velocity,
            m: protocol.m,
            r: protocol.power,
            start: protocol.s_start,
            end: protocol.s_end,
            update: update.name().into(),
        },
        entries,
        seed,
        realization: 0,
        flags,
    })
}

/// String length rule for simulation-time quenches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StringLength {
    /// `m = factor N^2`.
    QuadraticInN(usize),
    Fixed(usize),
}

impl Default for StringLength {
    fn default() -> Self {
        StringLength::QuadraticInN(4)
    }
}

impl StringLength {
    pub fn m(self, n: usize) -> usize {
        match self {
            StringLength::QuadraticInN(f) => (f * n * n).max(1),
            StringLength::Fixed(m) => m.max(1),
        }
    }
}

/// Final observables of one simulation-time quench.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationTimeSample {
    pub n: usize,
    pub velocity: f64,
    pub sweeps: usize,
    pub s_final: f64,
    pub mz2: f64,
    pub mz4: f64,
    /// Spins at the center of the string.
    #[serde(skip)]
    pub center: Vec<i8>,
}

/// Quench in simulation time: a string with uniform `s`, started in
/// equilibrium at `s = 0`, with `s` raised by `v_sim` per sweep until it
/// reaches `s_target`. A sweep is one off-diagonal update followed by a
/// diagonal sweep at the new `s`. The magnetization is read at the center
/// of the string after the last sweep.
pub fn run_simulation_time_quench(
    model: &ModelSpec,
    s_target: f64,
    v_sim: f64,
    update: UpdateKind,
    length: StringLength,
    seed: u64,
) -> Result<SimulationTimeSample> {
    if !(s_target > 0.0 && s_target <= 1.0) {
        return Err(Error::InvalidProtocol(format!("s_target = {s_target} outside (0, 1]")));
    }
    if !(v_sim > 0.0) {
        return Err(Error::InvalidProtocol(format!("v_sim must be > 0, got {v_sim}")));
    }
    let n = model.n();
    let m = length.m(n);
    let protocol = QuenchProtocol::simulation_time(0.0, m)?;
    let mut string = OperatorString::new(Arc::new(Couplings::new(model)), &protocol, seed)?;
    // exact equilibrium at s = 0: uniform site operators, independent segments
    string.diagonal_sweep();
    string.cluster_update();
    let mut sweeps = 0usize;
    let mut s = 0.0;
    while s < s_target {
        sweeps += 1;
        s = (sweeps as f64 * v_sim).min(s_target);
        match update {
            UpdateKind::Cluster => string.cluster_update(),
            UpdateKind::Local => string.segment_update(),
        }
        string.set_uniform_s(s);
        string.diagonal_sweep();
    }
    debug_assert!(string.check_consistency().is_ok());
    let center = string.snapshot(&[m]);
    let mz = magnetization(&center);
    Ok(SimulationTimeSample { n, velocity: v_sim, sweeps, s_final: s, mz2: mz * mz, mz4: mz.powi(4), center })
}
