use crate::analysis::schedule_velocity;
use crate::classical::{ThermalUpdate, T_C_REGULAR3};
use crate::error::{Error, Result};
use crate::model::{generate_regular_graph, make_chain, make_complete, make_square_lattice, CouplingGraph, CouplingModel};
use crate::qaqmc::UpdateKind;
use crate::rng::child_seed;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Environment variable that overrides the output directory of a config.
pub const OUT_DIR_ENV: &str = "ANNEALKZ_OUT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelBlock,
    pub protocol: ProtocolBlock,
    pub sampling: SamplingBlock,
    pub execution: ExecutionBlock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Random regular graph with antiferromagnetic unit couplings.
    Regular,
    /// Periodic ferromagnetic chain.
    Chain,
    /// Complete graph with random couplings.
    Complete,
    /// Periodic ferromagnetic square lattice; sizes are `L^2`.
    Square,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub kind: ModelKind,
    pub sizes: Vec<usize>,
    /// Disorder realizations per size (independent runs for clean models).
    pub disorder: usize,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_field")]
    pub field: f64,
    #[serde(default = "default_couplings")]
    pub couplings: CouplingModel,
}

fn default_degree() -> usize {
    3
}

fn default_field() -> f64 {
    1.0
}

fn default_couplings() -> CouplingModel {
    CouplingModel::Gaussian
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Quasi-adiabatic imaginary-time quench.
    Hamiltonian,
    /// Uniform-`s` string with `s` raised per sweep.
    SimulationTime,
    /// Classical simulated annealing.
    Thermal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocitySchedule {
    List(Vec<f64>),
    /// `v0 N^-alpha` for each prefactor in `v0`.
    Power { v0: Vec<f64>, alpha: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolBlock {
    pub mode: Mode,
    pub velocities: VelocitySchedule,
    #[serde(default)]
    pub s_start: f64,
    /// Final `s` (quantum) or final temperature (thermal).
    pub end: f64,
    /// Starting temperature; defaults to twice the 3-regular critical
    /// temperature.
    #[serde(default)]
    pub t_start: Option<f64>,
    #[serde(default = "default_r")]
    pub r: f64,
    /// Measurement points along the quench.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub update: Option<String>,
    /// Simulation-time string length factor: `m = factor N^2`.
    #[serde(default = "default_length_factor")]
    pub length_factor: usize,
}

fn default_r() -> f64 {
    1.0
}

fn default_points() -> usize {
    16
}

fn default_length_factor() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingBlock {
    /// Measurement sweeps (Hamiltonian mode) or independent quenches per
    /// job (simulation-time and thermal modes).
    pub sweeps: usize,
    #[serde(default)]
    pub thermalization: Option<usize>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
}

fn default_replicas() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecutionBlock {
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub seed: u64,
    pub output: PathBuf,
}

fn default_workers() -> usize {
    1
}

/// One unit of work: a realization at a size and velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub index: u64,
    pub key: String,
    pub n: usize,
    pub realization: u64,
    pub velocity: f64,
    pub graph_seed: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parse(msg));
        let m = &self.model;
        if m.sizes.is_empty() || m.disorder == 0 {
            return bad("model block needs sizes and disorder >= 1".into());
        }
        if !(m.field > 0.0) {
            return bad(format!("field must be > 0, got {}", m.field));
        }
        if m.kind == ModelKind::Square && m.sizes.iter().any(|&n| (n as f64).sqrt().round().powi(2) as usize != n) {
            return bad("square lattice sizes must be perfect squares".into());
        }
        let p = &self.protocol;
        match &p.velocities {
            VelocitySchedule::List(v) if v.is_empty() || v.iter().any(|&x| !(x > 0.0)) => {
                return bad("velocity list must be nonempty and positive".into())
            }
            VelocitySchedule::Power { v0, .. } if v0.is_empty() || v0.iter().any(|&x| !(x > 0.0)) => {
                return bad("v0 list must be nonempty and positive".into())
            }
            _ => {}
        }
        if p.r != 1.0 {
            return bad("only linear schedules (r = 1) are supported".into());
        }
        match p.mode {
            Mode::Hamiltonian | Mode::SimulationTime => {
                if !(0.0..1.0).contains(&p.s_start) || !(p.end > p.s_start && p.end <= 1.0) {
                    return bad(format!("need 0 <= s_start < end <= 1, got {} -> {}", p.s_start, p.end));
                }
                if p.mode == Mode::SimulationTime && p.s_start != 0.0 {
                    return bad("simulation-time quenches start at s = 0".into());
                }
            }
            Mode::Thermal => {
                if !(p.end > 0.0 && self.t_start() > p.end) {
                    return bad(format!("need t_start > end > 0, got {} -> {}", self.t_start(), p.end));
                }
            }
        }
        self.quantum_update()?;
        self.thermal_update()?;
        if p.points == 0 || self.sampling.sweeps == 0 {
            return bad("points and sweeps must be >= 1".into());
        }
        if self.sampling.replicas != 2 {
            return bad("replica count is fixed at 2".into());
        }
        if self.execution.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        Ok(())
    }

    pub fn t_start(&self) -> f64 {
        self.protocol.t_start.unwrap_or(2.0 * T_C_REGULAR3)
    }

    pub(crate) fn quantum_update(&self) -> Result<UpdateKind> {
        if self.protocol.mode == Mode::Thermal {
            return Ok(UpdateKind::Cluster);
        }
        match self.protocol.update.as_deref() {
            None | Some("cluster") => Ok(UpdateKind::Cluster),
            Some("local") => Ok(UpdateKind::Local),
            Some(other) => Err(Error::Parse(format!("unknown quantum update {other:?}"))),
        }
    }

    pub(crate) fn thermal_update(&self) -> Result<ThermalUpdate> {
        if self.protocol.mode != Mode::Thermal {
            return Ok(ThermalUpdate::Metropolis);
        }
        match self.protocol.update.as_deref() {
            None | Some("metropolis") => Ok(ThermalUpdate::Metropolis),
            Some("swendsen-wang") => Ok(ThermalUpdate::SwendsenWang),
            Some(other) => Err(Error::Parse(format!("unknown thermal update {other:?}"))),
        }
    }

    /// Velocities used at size `n`, in configuration order.
    pub fn velocities(&self, n: usize) -> Vec<f64> {
        match &self.protocol.velocities {
            VelocitySchedule::List(v) => v.clone(),
            VelocitySchedule::Power { v0, alpha } => v0.iter().map(|&v| schedule_velocity(n, *alpha, v)).collect(),
        }
    }

    /// SHA-256 of the physics-relevant part of the configuration: every
    /// block except the worker count and output directory.
    pub fn hash(&self) -> String {
        let payload = serde_json::json!({
            "model": self.model,
            "protocol": self.protocol,
            "sampling": self.sampling,
            "seed": self.execution.seed,
        });
        hex::encode(Sha256::digest(payload.to_string().as_bytes()))
    }

    /// Jobs ordered by size, realization and velocity; seeds depend only on
    /// the master seed and the job's position in this order.
    pub fn jobs(&self) -> Vec<Job> {
        let mut jobs = Vec::new();
        for &n in &self.model.sizes {
            for r in 0..self.model.disorder as u64 {
                for (vi, v) in self.velocities(n).into_iter().enumerate() {
                    let index = jobs.len() as u64;
                    jobs.push(Job {
                        index,
                        key: format!("n{n}-r{r}-v{vi}"),
                        n,
                        realization: r,
                        velocity: v,
                        graph_seed: graph_seed(self.execution.seed, n, r),
                        seed: child_seed(self.execution.seed, index),
                    });
                }
            }
        }
        jobs
    }

    /// Instance for size `n` with the given graph seed.
    pub fn graph(&self, n: usize, seed: u64) -> Result<CouplingGraph> {
        build_graph(self.model.kind, n, self.model.degree, self.model.couplings, seed)
    }

    /// Output directory after applying `--out` and the environment override.
    pub fn output_dir(&self, cli_out: Option<&Path>) -> PathBuf {
        if let Some(p) = cli_out {
            return p.to_path_buf();
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => self.execution.output.clone(),
        }
    }
}

/// Seed of the disorder realization `r` at size `n`; shared by all
/// velocities so that one instance is quenched at every rate.
pub fn graph_seed(master: u64, n: usize, r: u64) -> u64 {
    child_seed(child_seed(master ^ 0x67_7261_7068, n as u64), r)
}

pub fn build_graph(kind: ModelKind, n: usize, degree: usize, couplings: CouplingModel, seed: u64) -> Result<CouplingGraph> {
    match kind {
        ModelKind::Regular => generate_regular_graph(n, degree, seed),
        ModelKind::Chain => make_chain(n),
        ModelKind::Complete => make_complete(n, couplings, seed),
        ModelKind::Square => make_square_lattice((n as f64).sqrt().round() as usize),
    }
}
