use super::config::{ExperimentConfig, Job, Mode};
use crate::classical::{run_thermal_quench, ThermalProtocol};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::observables::{overlap_q, ObservableSeries, ProtocolDescriptor, ProtocolKind, SeriesEntry};
use crate::qaqmc::{even_tau_grid, run_quench_with, run_simulation_time_quench, QuenchProtocol, StringLength};
use crate::rng::child_seed;
use crate::stats::{mean, variance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One finished job: the observable series plus provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub series: ObservableSeries,
    pub job_key: String,
    pub config_hash: String,
    pub code_version: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub output: PathBuf,
    pub completed: usize,
    pub skipped: usize,
    pub failed: Vec<(String, String)>,
}

/// Runs one job to completion.
pub fn execute_job(cfg: &ExperimentConfig, job: &Job) -> Result<ObservableSeries> {
    let graph = cfg.graph(job.n, job.graph_seed)?;
    let p = &cfg.protocol;
    let mut series = match p.mode {
        Mode::Hamiltonian => {
            let model = ModelSpec::new(graph, cfg.model.field)?;
            let protocol = QuenchProtocol::linear(job.n, p.s_start, p.end, job.velocity)?;
            let grid = even_tau_grid(protocol.m, p.points);
            let protocol = protocol.with_tau_grid(grid)?;
            run_quench_with(&model, &protocol, cfg.sampling.sweeps, cfg.sampling.thermalization, cfg.quantum_update()?, job.seed)?
        }
        Mode::SimulationTime => simulation_time_series(cfg, job, ModelSpec::new(graph, cfg.model.field)?)?,
        Mode::Thermal => {
            let mut protocol = ThermalProtocol::linear(cfg.t_start(), p.end, job.velocity, cfg.thermal_update()?)?
                .with_measurements(p.points)
                .with_repeats(cfg.sampling.sweeps);
            if let Some(t) = cfg.sampling.thermalization {
                protocol = protocol.with_equilibration(t);
            }
            run_thermal_quench(&graph, &protocol, job.seed)?
        }
    };
    series.realization = job.realization;
    Ok(series)
}

fn error_of(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        0.0
    } else {
        (variance(xs) / xs.len() as f64).sqrt()
    }
}

/// Pairs of independent simulation-time quenches; each pair contributes an
/// overlap of the two center configurations.
fn simulation_time_series(cfg: &ExperimentConfig, job: &Job, model: ModelSpec) -> Result<ObservableSeries> {
    let update = cfg.quantum_update()?;
    let length = StringLength::QuadraticInN(cfg.protocol.length_factor);
    let (mut q2, mut q4, mut mz2) = (Vec::new(), Vec::new(), Vec::new());
    let mut s_final = cfg.protocol.end;
    for i in 0..cfg.sampling.sweeps as u64 {
        let a = run_simulation_time_quench(&model, cfg.protocol.end, job.velocity, update, length, child_seed(job.seed, 2 * i))?;
        let b = run_simulation_time_quench(&model, cfg.protocol.end, job.velocity, update, length, child_seed(job.seed, 2 * i + 1))?;
        let q = overlap_q(&a.center, &b.center)?;
        q2.push(q * q);
        q4.push(q.powi(4));
        mz2.push(0.5 * (a.mz2 + b.mz2));
        s_final = a.s_final;
    }
    let m = length.m(model.n());
    Ok(ObservableSeries {
        model_id: crate::qaqmc::model_id(&model),
        graph_hash: model.graph.content_hash(),
        n: model.n(),
        protocol: ProtocolDescriptor {
            kind: ProtocolKind::SimulationTime,
            velocity: job.velocity,
            m,
            r: 1.0,
            start: 0.0,
            end: cfg.protocol.end,
            update: update.name().into(),
        },
        entries: vec![SeriesEntry {
            tau: m,
            s_or_t: s_final,
            q2_mean: mean(&q2),
            q2_err: error_of(&q2),
            q4_mean: mean(&q4),
            q4_err: error_of(&q4),
            mz2_mean: mean(&mz2),
            mz2_err: error_of(&mz2),
            n_samples: q2.len(),
        }],
        seed: job.seed,
        realization: job.realization,
        flags: Vec::new(),
    })
}

/// Reads the records of a file, or of `records.jsonl` inside a directory.
pub fn load_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = if path.is_dir() { path.join(RECORDS_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&file)?;
    parse_records(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", file.display())),
        other => other,
    })
}

fn parse_records(text: &str) -> Result<Vec<RunRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
        .collect()
}

/// Drops a trailing partial line left by an interrupted write and returns
/// the completed records.
fn recover_records(path: &Path) -> Result<Vec<RunRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    let complete = match text.rfind('\n') {
        Some(end) if end + 1 < text.len() => &text[..=end],
        None if !text.is_empty() => "",
        _ => &text[..],
    };
    if complete.len() != text.len() {
        let f = OpenOptions::new().write(true).open(path)?;
        f.set_len(complete.len() as u64)?;
    }
    parse_records(complete)
}

/// Executes every job of `cfg` not already present in the output directory.
///
/// Jobs run on `workers` threads; finished records are appended, one line
/// each, by a single writer. Records already on disk must come from the
/// same configuration.
pub fn run_ensemble(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    fs::create_dir_all(out_dir)?;
    let records_path = out_dir.join(RECORDS_FILE);
    let hash = cfg.hash();
    let existing = recover_records(&records_path)?;
    if let Some(r) = existing.iter().find(|r| r.config_hash != hash) {
        return Err(Error::Inconsistent(format!(
            "{} holds records of configuration {}, not {hash}",
            records_path.display(),
            r.config_hash
        )));
    }
    let config_path = out_dir.join("config.json");
    if !config_path.exists() {
        fs::write(&config_path, serde_json::to_string_pretty(cfg)?)?;
    }
    let done: HashSet<String> = existing.into_iter().map(|r| r.job_key).collect();
    let jobs: Vec<Job> = cfg.jobs().into_iter().filter(|j| !done.contains(&j.key)).collect();
    let mut summary = RunSummary { output: out_dir.to_path_buf(), skipped: done.len(), ..Default::default() };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.execution.workers)
        .build()
        .map_err(|e| Error::Inconsistent(format!("thread pool: {e}")))?;
    let mut file = OpenOptions::new().create(true).append(true).open(&records_path)?;
    let (tx, rx) = mpsc::channel::<(String, Result<ObservableSeries>)>();
    std::thread::scope(|scope| -> Result<()> {
        scope.spawn(move || {
            pool.install(|| {
                jobs.par_iter().for_each_with(tx, |tx, job| {
                    let _ = tx.send((job.key.clone(), execute_job(cfg, job)));
                });
            });
        });
        for (key, outcome) in rx {
            match outcome {
                Ok(series) => {
                    let record = RunRecord { series, job_key: key, config_hash: hash.clone(), code_version: CODE_VERSION.into() };
                    let mut line = serde_json::to_string(&record)?;
                    line.push('\n');
                    file.write_all(line.as_bytes())?;
                    file.flush()?;
                    summary.completed += 1;
                }
                Err(e) => summary.failed.push((key, e.to_string())),
            }
        }
        Ok(())
    })?;
    summary.failed.sort();
    Ok(summary)
}
