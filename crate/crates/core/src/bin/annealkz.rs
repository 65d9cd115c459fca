use annealkz::analysis::{CollapseOptions, ScaledWindow, SlopeOptions, DEFAULT_BOOTSTRAP};
use annealkz::cli::analyze::{
    analyze_collapse, analyze_crossings, analyze_slope, write_collapse, write_crossings, write_slope, Dataset,
    Observable, DEFAULT_CROSSING_DELTA, DEFAULT_CROSSING_RESAMPLES,
};
use annealkz::cli::config::{build_graph, graph_seed};
use annealkz::cli::fixtures::write_fixtures;
use annealkz::cli::{run_ensemble, ExperimentConfig, ModelKind};
use annealkz::model::{write_graph_text, CouplingModel};
use annealkz::Error;
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Kibble-Zurek quench simulations and scaling analysis.
#[derive(Parser)]
#[command(name = "annealkz", version)]
struct Cli {
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; overrides the configuration.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write coupling graphs as text files.
    GenGraphs {
        #[arg(long, value_parser = parse_kind, default_value = "regular")]
        kind: ModelKind,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Execute (or resume) an ensemble described by a JSON configuration.
    Run { config: PathBuf },
    /// Data collapse of disorder-averaged end-of-quench values.
    AnalyzeCollapse {
        #[command(flatten)]
        collapse: CollapseArgs,
    },
    /// Binder-cumulant crossings between sizes N and N + delta.
    AnalyzeCrossings {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CROSSING_DELTA)]
        delta: usize,
        #[arg(long, default_value_t = DEFAULT_CROSSING_RESAMPLES)]
        resamples: usize,
    },
    /// Collapse followed by a log-log slope check of the scaled data.
    AnalyzeSlope {
        #[command(flatten)]
        collapse: CollapseArgs,
        /// Exponent of a `v ~ N^-alpha` schedule to check against the fitted k.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        slope_min: Option<f64>,
        #[arg(long)]
        slope_max: Option<f64>,
    },
    /// Regenerate the oracle and synthetic fixtures.
    Fixtures,
}

#[derive(Args)]
struct CollapseArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "q2", value_parser = |s: &str| s.parse::<Observable>().map_err(|e| e.to_string()))]
    observable: Observable,
    #[arg(long)]
    fixed_b: Option<f64>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    #[arg(long)]
    min_scaled: Option<f64>,
    #[arg(long)]
    max_scaled: Option<f64>,
    /// Keep every point instead of trimming the highest scaled velocities.
    #[arg(long)]
    keep_high_v: bool,
}

impl CollapseArgs {
    fn options(&self, seed: u64) -> CollapseOptions {
        CollapseOptions {
            degree: self.degree,
            fixed_b: self.fixed_b,
            window: ScaledWindow { min: self.min_scaled, max: self.max_scaled },
            auto_high_v: !self.keep_high_v,
            bootstrap: self.bootstrap,
            seed,
            ..Default::default()
        }
    }
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown model kind {s:?}"))
}

fn out_dir(cli: Option<&Path>, fallback: &str) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(annealkz::cli::OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn gen_graphs(kind: ModelKind, sizes: &[usize], count: u64, degree: usize, seed: u64, out: &Path) -> annealkz::Result<()> {
    fs::create_dir_all(out)?;
    let tag = serde_json::to_value(kind)?.as_str().unwrap_or("graph").to_owned();
    for &n in sizes {
        for r in 0..count {
            let graph = build_graph(kind, n, degree, CouplingModel::Gaussian, graph_seed(seed, n, r))?;
            let path = out.join(format!("{tag}_n{n}_r{r}.txt"));
            fs::write(&path, write_graph_text(&graph))?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> annealkz::Result<ExitCode> {
    let seed = cli.seed.unwrap_or(0);
    let out = cli.out.as_deref();
    match cli.command {
        Command::GenGraphs { kind, sizes, count, degree } => {
            gen_graphs(kind, &sizes, count, degree, seed, &out_dir(out, "graphs"))?;
        }
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = cli.seed {
                cfg.execution.seed = s;
            }
            if let Some(w) = cli.workers {
                cfg.execution.workers = w;
            }
            cfg.validate()?;
            let dir = cfg.output_dir(out);
            let summary = run_ensemble(&cfg, &dir)?;
            println!(
                "{}: {} completed, {} already present, {} failed",
                summary.output.display(),
                summary.completed,
                summary.skipped,
                summary.failed.len()
            );
            if !summary.failed.is_empty() {
                for (key, err) in &summary.failed {
                    eprintln!("failed {key}: {err}");
                }
                return Ok(ExitCode::from(1));
            }
        }
        Command::AnalyzeCollapse { collapse } => {
            let data = Dataset::load(&collapse.inputs)?;
            let report = analyze_collapse(&data, collapse.observable, &collapse.options(seed))?;
            let r = &report.result;
            println!("b = {:.4} +/- {:.4}, k = {:.4} +/- {:.4}, chi2/dof = {:.3}", r.b, r.b_err, r.k, r.k_err, r.chi2_dof);
            write_collapse(&out_dir(out, "analysis"), &report)?;
        }
        Command::AnalyzeCrossings { inputs, delta, resamples } => {
            let data = Dataset::load(&inputs)?;
            let report = analyze_crossings(&data, delta, resamples, seed)?;
            for c in &report.crossings {
                println!("N = {} / {}: s* = {:.5} +/- {:.5}{}", c.n_a, c.n_b, c.s_star, c.err, if c.ambiguous { " (ambiguous)" } else { "" });
            }
            if let Some(x) = &report.extrapolation {
                println!("s_c = {:.5} +/- {:.5} (omega = {:.3})", x.s_c, x.s_c_err, x.omega);
            }
            write_crossings(&out_dir(out, "analysis"), &report)?;
        }
        Command::AnalyzeSlope { collapse, alpha, slope_min, slope_max } => {
            let data = Dataset::load(&collapse.inputs)?;
            let slope_opts = SlopeOptions { min_scaled: slope_min, max_scaled: slope_max, ..Default::default() };
            let analysis = analyze_slope(&data, collapse.observable, &collapse.options(seed), &slope_opts, alpha)?;
            let s = &analysis.slope;
            println!(
                "slope = {:.4} +/- {:.4}, expected -{:.4} +/- {:.4}: {}",
                s.slope,
                s.slope_err,
                s.x_expected,
                s.x_err,
                if s.agree { "consistent" } else { "inconsistent" }
            );
            if let Some(check) = &analysis.schedule {
                println!("{}", check.line());
            }
            write_slope(&out_dir(out, "analysis"), &analysis)?;
        }
        Command::Fixtures => {
            for path in write_fixtures(&out_dir(out, "fixtures"))? {
                println!("{}", path.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_)
                | Error::InvalidGraph(_)
                | Error::InvalidProtocol(_)
                | Error::Json(_)
                | Error::Inconsistent(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
