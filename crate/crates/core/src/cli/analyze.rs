//! Analysis drivers over stored ensemble records: each command loads JSONL
//! records, runs the matching analysis and writes a JSON report plus a CSV
//! table.

use super::runner::{load_records, RunRecord, CODE_VERSION};
use crate::analysis::{
    collapse_fit, crossing_bootstrap, crossing_pairs, extrapolate_sc, schedule_is_slow, verify_slope, CollapseOptions,
    CollapsePoint, CollapseResult, CrossingEstimate, CrossingPoint, ScExtrapolation, SlopeOptions, SlopeReport,
    EXTRAPOLATION_BOOTSTRAP,
};
use crate::error::{Error, Result};
use crate::observables::{disorder_average, ObservableSeries, ProtocolKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Default size offset between the two ensembles of a Binder crossing.
pub const DEFAULT_CROSSING_DELTA: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Q2,
    Mz2,
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q2" => Ok(Observable::Q2),
            "mz2" => Ok(Observable::Mz2),
            other => Err(Error::Parse(format!("unknown observable {other:?} (expected q2 or mz2)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
    pub records: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub code_version: String,
    pub inputs: Vec<InputFile>,
    pub config_hashes: Vec<String>,
    pub graph_hashes: usize,
}

/// Records gathered from one or more inputs.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub records: Vec<RunRecord>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn load(paths: &[PathBuf]) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InsufficientData("no input files".into()));
        }
        let mut records = Vec::new();
        let mut inputs = Vec::new();
        for path in paths {
            let file = if path.is_dir() { path.join(super::RECORDS_FILE) } else { path.clone() };
            let bytes = fs::read(&file)?;
            let recs = load_records(&file)?;
            inputs.push(InputFile { path: file, sha256: hex::encode(Sha256::digest(&bytes)), records: recs.len() });
            records.extend(recs);
        }
        Ok(Self::with_inputs(records, inputs))
    }

    /// Wraps records that did not come from files.
    pub fn from_records(records: Vec<RunRecord>) -> Self {
        Self::with_inputs(records, Vec::new())
    }

    fn with_inputs(records: Vec<RunRecord>, inputs: Vec<InputFile>) -> Self {
        let config_hashes: BTreeSet<String> = records.iter().map(|r| r.config_hash.clone()).collect();
        let graphs: BTreeSet<&str> = records.iter().map(|r| r.series.graph_hash.as_str()).collect();
        let provenance = Provenance {
            code_version: CODE_VERSION.into(),
            inputs,
            config_hashes: config_hashes.into_iter().collect(),
            graph_hashes: graphs.len(),
        };
        Self { records, provenance }
    }

    fn kind(&self) -> Result<ProtocolKind> {
        let first = self.records.first().ok_or_else(|| Error::InsufficientData("no records".into()))?;
        let kind = first.series.protocol.kind;
        if self.records.iter().any(|r| r.series.protocol.kind != kind) {
            return Err(Error::Inconsistent("records mix protocol kinds".into()));
        }
        Ok(kind)
    }

    /// Realizations grouped by `(N, v)`, ordered by size then velocity.
    pub fn groups(&self) -> Result<Vec<Vec<ObservableSeries>>> {
        self.kind()?;
        let mut map: BTreeMap<(usize, u64), Vec<ObservableSeries>> = BTreeMap::new();
        for r in &self.records {
            map.entry((r.series.n, r.series.protocol.velocity.to_bits())).or_default().push(r.series.clone());
        }
        Ok(map.into_values().collect())
    }

    /// Disorder-averaged final value of `observable` for every `(N, v)`.
    pub fn collapse_points(&self, observable: Observable, seed: u64) -> Result<Vec<CollapsePoint>> {
        self.groups()?
            .iter()
            .map(|g| {
                let avg = disorder_average(g, seed)?;
                let last = avg.entries.last().ok_or_else(|| Error::InsufficientData("empty series".into()))?;
                let (y, y_err) = match observable {
                    Observable::Q2 => (last.q2, last.q2_err),
                    Observable::Mz2 => (last.mz2, last.mz2_err),
                };
                Ok(CollapsePoint { n: avg.n, v: avg.velocity, y, y_err })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub observable: Observable,
    pub kind: ProtocolKind,
    pub options: CollapseOptions,
    pub points: Vec<CollapsePoint>,
    pub result: CollapseResult,
    /// `x = (1 - b)/k` with its error.
    pub slope: (f64, f64),
    pub provenance: Provenance,
}

pub fn analyze_collapse(data: &Dataset, observable: Observable, opts: &CollapseOptions) -> Result<CollapseReport> {
    let points = data.collapse_points(observable, opts.seed)?;
    let result = collapse_fit(&points, opts)?;
    Ok(CollapseReport {
        observable,
        kind: data.kind()?,
        options: opts.clone(),
        slope: result.slope()?,
        points,
        result,
        provenance: data.provenance.clone(),
    })
}

/// Whether a `v ~ N^-alpha` schedule was slow enough, judged against the
/// fitted `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleCheck {
    pub alpha: f64,
    pub k: f64,
    pub k_err: f64,
    pub pass: bool,
    /// `(alpha - k) / k_err`.
    pub margin_sigmas: f64,
}

impl ScheduleCheck {
    pub fn new(alpha: f64, k: f64, k_err: f64) -> Self {
        let margin_sigmas = if k_err > 0.0 { (alpha - k) / k_err } else { f64::INFINITY.copysign(alpha - k) };
        Self { alpha, k, k_err, pass: schedule_is_slow(alpha, k), margin_sigmas }
    }

    pub fn line(&self) -> String {
        format!(
            "{}: alpha = {:.4} vs fitted k = {:.4} +/- {:.4} ({:+.1} sigma)",
            if self.pass { "PASS" } else { "FAIL" },
            self.alpha,
            self.k,
            self.k_err,
            self.margin_sigmas
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeAnalysis {
    pub collapse: CollapseReport,
    pub options: SlopeOptions,
    pub slope: SlopeReport,
    pub schedule: Option<ScheduleCheck>,
}

pub fn analyze_slope(
    data: &Dataset,
    observable: Observable,
    opts: &CollapseOptions,
    slope_opts: &SlopeOptions,
    alpha: Option<f64>,
) -> Result<SlopeAnalysis> {
    let collapse = analyze_collapse(data, observable, opts)?;
    let slope = verify_slope(&collapse.points, &collapse.result, slope_opts)?;
    let schedule = alpha.map(|a| ScheduleCheck::new(a, collapse.result.k, collapse.result.k_err));
    Ok(SlopeAnalysis { collapse, options: slope_opts.clone(), slope, schedule })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub delta: usize,
    pub resamples: usize,
    pub crossings: Vec<CrossingEstimate>,
    /// Pairs without a crossing, with the reason.
    pub failed: Vec<(usize, usize, String)>,
    pub extrapolation: Option<ScExtrapolation>,
    pub provenance: Provenance,
}

impl CrossingReport {
    /// Crossings attributed to the midpoint size `N + delta/2`.
    pub fn points(&self) -> Vec<CrossingPoint> {
        self.crossings
            .iter()
            .filter(|c| !c.ambiguous && c.err.is_finite())
            .map(|c| CrossingPoint { n: 0.5 * (c.n_a + c.n_b) as f64, s_star: c.s_star, err: c.err })
            .collect()
    }
}

pub fn analyze_crossings(data: &Dataset, delta: usize, resamples: usize, seed: u64) -> Result<CrossingReport> {
    let mut by_n: BTreeMap<usize, Vec<ObservableSeries>> = BTreeMap::new();
    for g in data.groups()? {
        let n = g[0].n;
        if by_n.insert(n, g).is_some() {
            return Err(Error::Inconsistent(format!("several velocities at N = {n}; crossings need one per size")));
        }
    }
    let sizes: Vec<usize> = by_n.keys().copied().collect();
    let pairs = crossing_pairs(&sizes, delta);
    if pairs.is_empty() {
        return Err(Error::InsufficientData(format!("no size pairs N, N + {delta} among {sizes:?}")));
    }
    let mut report = CrossingReport {
        delta,
        resamples,
        crossings: Vec::new(),
        failed: Vec::new(),
        extrapolation: None,
        provenance: data.provenance.clone(),
    };
    for (i, &(a, b)) in pairs.iter().enumerate() {
        match crossing_bootstrap(&by_n[&a], &by_n[&b], resamples, crate::rng::child_seed(seed, i as u64)) {
            Ok(c) => report.crossings.push(c),
            Err(e) => report.failed.push((a, b, e.to_string())),
        }
    }
    let points = report.points();
    if points.len() >= 3 {
        report.extrapolation = Some(extrapolate_sc(&points, seed)?);
    }
    Ok(report)
}

fn csv(header: &[String], columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for line in header {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "{}", columns.join(","));
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

fn provenance_lines(p: &Provenance) -> Vec<String> {
    let mut lines = vec![format!("annealkz {}", p.code_version)];
    lines.extend(p.config_hashes.iter().map(|h| format!("config {h}")));
    lines.extend(p.inputs.iter().map(|i| format!("input {} sha256 {}", i.path.display(), i.sha256)));
    lines
}

fn collapse_rows(report: &CollapseReport, extra: impl Fn(usize) -> String) -> Vec<Vec<String>> {
    let r = &report.result;
    report
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (lx, ly) = r.scaled(p);
            vec![
                p.n.to_string(),
                format!("{:e}", p.v),
                format!("{:e}", p.y),
                format!("{:e}", p.y_err),
                format!("{:e}", lx.exp()),
                format!("{:e}", ly.exp()),
                format!("{:e}", r.master.eval(lx).exp()),
                u8::from(r.used.contains(&i)).to_string(),
                extra(i),
            ]
        })
        .collect()
}

fn collapse_header(report: &CollapseReport) -> Vec<String> {
    let r = &report.result;
    let mut h = vec![
        format!("collapse of {:?} ({:?} protocol): y N^b = f(v N^k)", report.observable, report.kind),
        format!("b = {} +/- {}{}", r.b, r.b_err, if r.fixed_b { " (fixed)" } else { "" }),
        format!("k = {} +/- {}", r.k, r.k_err),
        format!("chi2/dof = {}, window v N^k in [{}, {}]", r.chi2_dof, r.window.0, r.window.1),
    ];
    h.extend(provenance_lines(&report.provenance));
    h
}

const COLLAPSE_COLUMNS: [&str; 8] = ["n", "v", "y", "y_err", "v_scaled", "y_scaled", "master", "used"];

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Writes `collapse.json` and `collapse.csv` into `dir`.
pub fn write_collapse(dir: &Path, report: &CollapseReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("collapse.json"), report)?;
    let rows: Vec<Vec<String>> = collapse_rows(report, |_| String::new())
        .into_iter()
        .map(|mut r| {
            r.pop();
            r
        })
        .collect();
    fs::write(dir.join("collapse.csv"), csv(&collapse_header(report), &COLLAPSE_COLUMNS, &rows))?;
    Ok(())
}

/// Writes `slope.json` and `slope.csv` into `dir`.
pub fn write_slope(dir: &Path, analysis: &SlopeAnalysis) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("slope.json"), analysis)?;
    let s = &analysis.slope;
    let mut header = collapse_header(&analysis.collapse);
    header.push(format!("log-log slope {} +/- {}, expected -(1-b)/k with x = {} +/- {}", s.slope, s.slope_err, s.x_expected, s.x_err));
    if let Some(c) = &analysis.schedule {
        header.push(c.line());
    }
    let mut columns = COLLAPSE_COLUMNS.to_vec();
    columns.push("in_slope");
    let rows = collapse_rows(&analysis.collapse, |i| u8::from(s.used.contains(&i)).to_string());
    fs::write(dir.join("slope.csv"), csv(&header, &columns, &rows))?;
    Ok(())
}

/// Writes `crossings.json` and `crossings.csv` into `dir`.
pub fn write_crossings(dir: &Path, report: &CrossingReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("crossings.json"), report)?;
    let mut header = vec![format!("Binder crossings of N and N + {} ({} resamples)", report.delta, report.resamples)];
    if let Some(x) = &report.extrapolation {
        header.push(format!("s_c = {} +/- {}, c = {} +/- {}, omega = {} +/- {}", x.s_c, x.s_c_err, x.c, x.c_err, x.omega, x.omega_err));
    }
    header.extend(provenance_lines(&report.provenance));
    let rows: Vec<Vec<String>> = report
        .crossings
        .iter()
        .map(|c| {
            vec![
                c.n_a.to_string(),
                c.n_b.to_string(),
                format!("{}", 0.5 * (c.n_a + c.n_b) as f64),
                format!("{:e}", c.s_star),
                format!("{:e}", c.err),
                u8::from(c.ambiguous).to_string(),
                c.valid_resamples.to_string(),
            ]
        })
        .collect();
    let columns = ["n_a", "n_b", "n_mid", "s_star", "err", "ambiguous", "valid_resamples"];
    fs::write(dir.join("crossings.csv"), csv(&header, &columns, &rows))?;
    Ok(())
}

/// Number of resamples used by `analyze-crossings` unless overridden.
pub const DEFAULT_CROSSING_RESAMPLES: usize = EXTRAPOLATION_BOOTSTRAP;
