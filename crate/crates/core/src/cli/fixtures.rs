//! Regression fixtures: exact oracle curves for small instances and
//! synthetic ensembles with planted answers for the analysis commands.

use super::runner::{RunRecord, CODE_VERSION};
use crate::error::Result;
use crate::model::{generate_regular_graph, make_chain, parse_graph_text, write_graph_text, ModelSpec};
use crate::observables::{ObservableSeries, ProtocolDescriptor, ProtocolKind, SeriesEntry};
use crate::oracle::{exact_asymmetric_curve, ExactPoint};
use crate::qaqmc::{even_tau_grid, QuenchProtocol};
use crate::rng::rng_from_seed;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Seed of the 6-spin 3-regular fixture instance.
pub const FIXTURE_GRAPH_SEED: u64 = 3;
pub const FIXTURE_M: usize = 64;
pub const FIXTURE_S_END: f64 = 0.5;
pub const FIXTURE_POINTS: usize = 16;

/// Exact asymmetric expectation values of one instance along a quench.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleFixture {
    pub name: String,
    pub graph: String,
    pub graph_hash: String,
    pub field: f64,
    pub m: usize,
    pub s_start: f64,
    pub s_end: f64,
    pub tau_grid: Vec<usize>,
    pub points: Vec<ExactPoint>,
}

impl OracleFixture {
    pub fn compute(name: &str, model: &ModelSpec, m: usize, s_start: f64, s_end: f64, points: usize) -> Result<Self> {
        let grid = even_tau_grid(m, points);
        let protocol = QuenchProtocol::with_slots(model.n(), s_start, s_end, m, 1.0)?.with_tau_grid(grid.clone())?;
        Ok(Self {
            name: name.into(),
            graph: write_graph_text(&model.graph),
            graph_hash: model.graph.content_hash(),
            field: model.field,
            m,
            s_start,
            s_end,
            points: exact_asymmetric_curve(model, &protocol, &grid)?,
            tau_grid: grid,
        })
    }

    pub fn model(&self) -> Result<ModelSpec> {
        ModelSpec::new(parse_graph_text(&self.graph)?, self.field)
    }

    pub fn protocol(&self) -> Result<QuenchProtocol> {
        let n = self.model()?.n();
        QuenchProtocol::with_slots(n, self.s_start, self.s_end, self.m, 1.0)?.with_tau_grid(self.tau_grid.clone())
    }
}

/// The two reference instances: a 6-spin 3-regular antiferromagnet and the
/// 8-spin periodic chain, quenched from `s = 0` to `1/2` over 64 slots.
pub fn standard_oracle_fixtures() -> Result<Vec<OracleFixture>> {
    let regular = ModelSpec::new(generate_regular_graph(6, 3, FIXTURE_GRAPH_SEED)?, 1.0)?;
    let chain = ModelSpec::new(make_chain(8)?, 1.0)?;
    Ok(vec![
        OracleFixture::compute("regular3_n6", &regular, FIXTURE_M, 0.0, FIXTURE_S_END, FIXTURE_POINTS)?,
        OracleFixture::compute("chain_n8", &chain, FIXTURE_M, 0.0, FIXTURE_S_END, FIXTURE_POINTS)?,
    ])
}

/// Planted collapse `y = N^-b f(v N^k)` with `f(x) = (1 + x^2)^-(1-b)/2k`,
/// so the large-`x` slope is the Kibble-Zurek one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedCollapse {
    pub b: f64,
    pub k: f64,
    pub sizes: Vec<usize>,
    /// Scaled velocities `v N^k` sampled at every size.
    pub scaled: Vec<f64>,
    pub realizations: usize,
    pub rel_noise: f64,
    pub seed: u64,
}

impl Default for PlantedCollapse {
    fn default() -> Self {
        Self {
            b: 0.25,
            k: 2.0,
            sizes: vec![16, 32, 64],
            scaled: vec![0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0],
            realizations: 8,
            rel_noise: 0.01,
            seed: 11,
        }
    }
}

impl PlantedCollapse {
    pub fn value(&self, n: usize, v: f64) -> f64 {
        let n = n as f64;
        let x = v * n.powf(self.k);
        n.powf(-self.b) * (1.0 + x * x).powf(-0.5 * (1.0 - self.b) / self.k)
    }
}

fn synthetic_series(n: usize, velocity: f64, realization: u64, entries: Vec<SeriesEntry>) -> ObservableSeries {
    ObservableSeries {
        model_id: format!("synthetic-n{n}"),
        graph_hash: format!("synthetic-{n}-{realization}"),
        n,
        protocol: ProtocolDescriptor {
            kind: ProtocolKind::Hamiltonian,
            velocity,
            m: 0,
            r: 1.0,
            start: 0.0,
            end: 0.5,
            update: "synthetic".into(),
        },
        entries,
        seed: 0,
        realization,
        flags: vec!["synthetic".into()],
    }
}

fn synthetic_record(series: ObservableSeries, key: String) -> RunRecord {
    RunRecord { series, job_key: key, config_hash: "synthetic".into(), code_version: CODE_VERSION.into() }
}

fn entry(tau: usize, s: f64, q2: f64, q4: f64, err: f64) -> SeriesEntry {
    SeriesEntry {
        tau,
        s_or_t: s,
        q2_mean: q2,
        q2_err: err * q2,
        q4_mean: q4,
        q4_err: err * q4,
        mz2_mean: q2,
        mz2_err: err * q2,
        n_samples: 1,
    }
}

/// One record per realization, size and velocity, each realization being
/// the planted value with Gaussian relative noise.
pub fn synthetic_collapse_records(p: &PlantedCollapse) -> Vec<RunRecord> {
    let mut rng = rng_from_seed(p.seed);
    let mut out = Vec::new();
    for &n in &p.sizes {
        for (vi, &x) in p.scaled.iter().enumerate() {
            let v = x / (n as f64).powf(p.k);
            let y = p.value(n, v);
            for r in 0..p.realizations as u64 {
                let noisy = y * (1.0 + p.rel_noise * rng.sample::<f64, _>(StandardNormal));
                let series = synthetic_series(n, v, r, vec![entry(1, 0.5, noisy, 3.0 * noisy * noisy, p.rel_noise)]);
                out.push(synthetic_record(series, format!("n{n}-r{r}-v{vi}")));
            }
        }
    }
    out
}

/// Planted Binder curves `U_N(s) = 1/2 + 2/5 tanh(sqrt(N) (s - s_c) + kappa N^-lambda)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedCrossings {
    pub s_c: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub sizes: Vec<usize>,
    pub delta: usize,
    pub s_grid: Vec<f64>,
    pub realizations: usize,
    pub rel_noise: f64,
    pub seed: u64,
}

impl Default for PlantedCrossings {
    fn default() -> Self {
        Self {
            s_c: 0.36,
            kappa: 2.0,
            lambda: 0.5,
            sizes: vec![64, 128, 192, 256, 320],
            delta: 64,
            s_grid: (0..=40).map(|i| 0.2 + 0.0075 * i as f64).collect(),
            realizations: 12,
            rel_noise: 0.002,
            seed: 12,
        }
    }
}

impl PlantedCrossings {
    pub fn binder(&self, n: usize, s: f64) -> f64 {
        let n = n as f64;
        0.5 + 0.4 * (n.sqrt() * (s - self.s_c) + self.kappa * n.powf(-self.lambda)).tanh()
    }

    /// Exact crossing of the planted curves for sizes `a` and `b`.
    pub fn crossing(&self, a: usize, b: usize) -> f64 {
        let (a, b) = (a as f64, b as f64);
        self.s_c + self.kappa * (a.powf(-self.lambda) - b.powf(-self.lambda)) / (b.sqrt() - a.sqrt())
    }
}

/// Realizations whose moments reproduce the planted Binder curves, with a
/// little noise on `<q^4>` so that the bootstrap has something to resample.
pub fn synthetic_crossing_records(p: &PlantedCrossings) -> Vec<RunRecord> {
    const Q2: f64 = 0.3;
    let mut rng = rng_from_seed(p.seed);
    let mut out = Vec::new();
    for &n in &p.sizes {
        for r in 0..p.realizations as u64 {
            let entries = p
                .s_grid
                .iter()
                .enumerate()
                .map(|(t, &s)| {
                    let q4 = (3.0 - 2.0 * p.binder(n, s)) * Q2 * Q2;
                    let noisy = q4 * (1.0 + p.rel_noise * rng.sample::<f64, _>(StandardNormal));
                    entry(t + 1, s, Q2, noisy, p.rel_noise)
                })
                .collect();
            out.push(synthetic_record(synthetic_series(n, 1e-3, r, entries), format!("n{n}-r{r}-v0")));
        }
    }
    out
}

fn write_jsonl(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedAnswers {
    pub collapse: PlantedCollapse,
    pub crossings: PlantedCrossings,
    /// `(N_a, N_b, s*)` for every planted pair.
    pub crossing_table: Vec<(usize, usize, f64)>,
}

/// Writes oracle fixtures, synthetic datasets and their planted answers
/// into `dir`; returns the files written.
pub fn write_fixtures(dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in standard_oracle_fixtures()? {
        let path = dir.join(format!("oracle_{}.json", f.name));
        fs::write(&path, serde_json::to_string_pretty(&f)? + "\n")?;
        written.push(path);
    }
    let collapse = PlantedCollapse::default();
    let crossings = PlantedCrossings::default();
    let path = dir.join("synthetic_collapse.jsonl");
    write_jsonl(&path, &synthetic_collapse_records(&collapse))?;
    written.push(path);
    let path = dir.join("synthetic_crossings.jsonl");
    write_jsonl(&path, &synthetic_crossing_records(&crossings))?;
    written.push(path);
    let crossing_table = crate::analysis::crossing_pairs(&crossings.sizes, crossings.delta)
        .into_iter()
        .map(|(a, b)| (a, b, crossings.crossing(a, b)))
        .collect();
    let path = dir.join("planted.json");
    let answers = PlantedAnswers { collapse, crossings, crossing_table };
    fs::write(&path, serde_json::to_string_pretty(&answers)? + "\n")?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_fixture_round_trips() {
        let fixtures = standard_oracle_fixtures().unwrap();
        assert_eq!(fixtures.len(), 2);
        for f in &fixtures {
            assert_eq!(f.points.len(), FIXTURE_POINTS);
            assert_eq!(f.model().unwrap().graph.content_hash(), f.graph_hash);
            assert_eq!(f.protocol().unwrap().tau_grid, f.tau_grid);
            let back: OracleFixture = serde_json::from_str(&serde_json::to_string(f).unwrap()).unwrap();
            assert_eq!(&back, f);
        }
    }

    #[test]
    fn planted_crossing_is_exact() {
        let p = PlantedCrossings::default();
        let s = p.crossing(64, 128);
        assert!((p.binder(64, s) - p.binder(128, s)).abs() < 1e-12);
    }
}
