//! Subcommand definitions and their execution.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gnpr::cluster::{ari, AffinityOptions, Partition, Preference};
use gnpr::io::{
    read_distance_matrix, read_panel, read_partition, write_dendrogram, write_distance_matrix,
    write_panel, write_partition,
};
use gnpr::synth::SpecFile;
use gnpr::{generate, DistanceKind, Panel, ThetaWeight, DEFAULT_BINS};
use serde::Serialize;

use crate::error::{invalid, CliError, Result};
use crate::experiments::{
    monotonicity_violations, render_markdown, run_benchmark, run_consistency, run_stability,
    BenchmarkConfig, ConsistencyConfig, DatasetChoice, StabilityConfig,
};
use crate::ingest::ingest;
use crate::method::{cluster_matrix, cluster_panel, matrix_for, Algorithm, Method, Settings};

#[derive(Debug, Parser)]
#[command(name = "gnpr", version, about = "Cluster i.i.d. time series on dependence and distribution")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic panel, its ground-truth labels and the spec used.
    Generate(GenerateArgs),
    /// Turn a CSV of price levels into a panel (optionally of increments).
    Ingest(IngestArgs),
    /// Compute a full distance matrix.
    Distance(DistanceArgs),
    /// Cluster a panel or a precomputed distance matrix.
    Cluster(ClusterArgs),
    /// Run the dataset × distance × algorithm × seed benchmark table.
    Benchmark(BenchmarkArgs),
    /// Mean ARI on preset G over a grid of (N, T).
    Consistency(ConsistencyArgs),
    /// Cluster even and odd time indices separately and compare.
    Stability(StabilityArgs),
}

/// Flags shared by everything that clusters.
#[derive(Debug, Clone, Args)]
pub struct AlgoArgs {
    /// Histogram bins of the distribution term.
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Affinity propagation damping.
    #[arg(long, default_value_t = 0.9)]
    pub damping: f64,
    /// Affinity propagation preference: `median` or a number.
    #[arg(long, default_value = "median")]
    pub preference: String,
    /// k-means++ restarts.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
}

impl AlgoArgs {
    fn affinity(&self) -> Result<AffinityOptions> {
        let preference = match self.preference.trim() {
            "median" => Preference::Median,
            v => Preference::Value(
                v.parse()
                    .ok()
                    .filter(|p: &f64| p.is_finite())
                    .ok_or_else(|| invalid(format!("--preference {v:?} is neither `median` nor a number")))?,
            ),
        };
        Ok(AffinityOptions {
            preference,
            damping: self.damping,
            ..AffinityOptions::default()
        })
    }

    fn settings(&self, theta: f64, seed: u64) -> Result<Settings> {
        if self.bins == 0 {
            return Err(invalid("--bins must be positive"));
        }
        if self.restarts == 0 {
            return Err(invalid("--restarts must be positive"));
        }
        Ok(Settings {
            bins: self.bins,
            theta: ThetaWeight::new(theta)?,
            seed,
            restarts: self.restarts,
            affinity: self.affinity()?,
        })
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Preset A, B, C or G.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub preset: Option<String>,
    /// JSON spec `{name?, N, T, K, D, beta, factor_dist, noise_dists, seed}`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "T")]
    pub t: Option<usize>,
    /// Override the factor loading of the preset.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Seed (defaults to the spec file's seed, or 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Panel CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth partition CSV.
    #[arg(long)]
    pub labels: PathBuf,
    /// Spec echo (default: the panel path with extension `spec.json`).
    #[arg(long)]
    pub spec_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// CSV of price levels, one column per instrument.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Emit first differences instead of levels.
    #[arg(long)]
    pub diff: bool,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long)]
    pub panel: PathBuf,
    /// gnpr, gpr, l2 or pearson.
    #[arg(long, default_value = "gnpr")]
    pub kind: String,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Panel CSV (any algorithm).
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    pub panel: Option<PathBuf>,
    /// Distance-matrix CSV (hc-average, hc-ward, ap).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// hc-average, hc-ward, kmeanspp or ap.
    #[arg(long)]
    pub algo: String,
    /// Number of clusters; ignored by ap.
    #[arg(long = "Q", visible_alias = "q")]
    pub q: Option<usize>,
    /// Distance kind used with --panel.
    #[arg(long, default_value = "gnpr")]
    pub kind: String,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub algo_args: AlgoArgs,
    /// Ground-truth partition; the ARI is printed when given.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Partition CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Merge table of hierarchical runs.
    #[arg(long)]
    pub dendrogram: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, value_delimiter = ',', default_value = "A,B,C")]
    pub presets: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "gnpr")]
    pub kinds: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,0.5")]
    pub thetas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "hc-average")]
    pub algos: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub seeds: Vec<u64>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "T")]
    pub t: Option<usize>,
    /// Override the factor loading of every preset.
    #[arg(long)]
    pub beta: Option<f64>,
    #[command(flatten)]
    pub algo_args: AlgoArgs,
    /// JSON report.
    #[arg(long)]
    pub out: PathBuf,
    /// Markdown rendering of the table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Wall-clock seconds per cell (kept out of the report so it stays reproducible).
    #[arg(long)]
    pub timings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[arg(long = "N", value_delimiter = ',', default_value = "64")]
    pub ns: Vec<usize>,
    #[arg(long = "T", value_delimiter = ',', default_value = "10,50,200,500,2000")]
    pub ts: Vec<usize>,
    #[arg(long, default_value = "gnpr")]
    pub kind: String,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value = "hc-average")]
    pub algo: String,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[command(flatten)]
    pub algo_args: AlgoArgs,
    /// CSV `N,T,mean_ari,std_ari`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long)]
    pub panel: PathBuf,
    /// Comma-separated `kind:algorithm` list.
    #[arg(long, value_delimiter = ',', default_value = "gnpr:hc-ward,l2:hc-ward")]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long = "Q", visible_alias = "q")]
    pub q: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub algo_args: AlgoArgs,
    #[arg(long)]
    pub out: PathBuf,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Runs `write` on a fresh file and flushes it, tagging I/O errors with the path.
fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    write(&mut w)?;
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(gnpr::Error::from)?;
        writeln!(w).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn load_panel(path: &Path) -> Result<Panel> {
    Ok(read_panel(open(path)?)?)
}

fn load_labels(path: &Path, ids: &[String]) -> Result<Partition> {
    let (label_ids, partition) = read_partition(open(path)?)?;
    if label_ids != ids {
        return Err(invalid(format!(
            "{} does not list the same series, in the same order, as the input",
            path.display()
        )));
    }
    Ok(partition)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::Distance(a) => cmd_distance(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Consistency(a) => cmd_consistency(a),
        Command::Stability(a) => cmd_stability(a),
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let file = match (&a.preset, &a.spec) {
        (Some(name), _) => {
            let mut spec = gnpr::preset(name, a.n, a.t)?;
            if let Some(beta) = a.beta {
                spec.beta = beta;
                spec.validate()?;
            }
            SpecFile {
                spec,
                seed: a.seed.unwrap_or(0),
            }
        }
        (None, Some(path)) => {
            let mut file: SpecFile = serde_json::from_reader(open(path)?).map_err(gnpr::Error::from)?;
            if a.n.is_some() || a.t.is_some() || a.beta.is_some() {
                return Err(invalid("--N, --T and --beta only apply to --preset"));
            }
            if let Some(seed) = a.seed {
                file.seed = seed;
            }
            file
        }
        (None, None) => return Err(invalid("give --preset or --spec")),
    };
    let labeled = generate(&file.spec, file.seed)?;
    write_file(&a.out, |w| Ok(write_panel(&labeled.panel, w)?))?;
    write_file(&a.labels, |w| Ok(write_partition(labeled.panel.ids(), &labeled.labels, w)?))?;
    let spec_out = a.spec_out.unwrap_or_else(|| a.out.with_extension("spec.json"));
    write_json(&spec_out, &file)?;
    log::info!(
        "{} series × {} observations, {} classes",
        labeled.panel.n_series(),
        labeled.panel.len(),
        labeled.labels.n_clusters()
    );
    Ok(())
}

fn cmd_ingest(a: IngestArgs) -> Result<()> {
    let out = ingest(open(&a.input)?, a.diff)?;
    if out.dropped_rows > 0 {
        let plural = if out.dropped_rows == 1 { "" } else { "s" };
        log::warn!("{} row{plural} dropped", out.dropped_rows);
    }
    write_file(&a.out, |w| Ok(write_panel(&out.panel, w)?))
}

fn cmd_distance(a: DistanceArgs) -> Result<()> {
    let kind: DistanceKind = a.kind.parse()?;
    let panel = load_panel(&a.panel)?;
    let settings = AlgoArgs {
        bins: a.bins,
        damping: 0.9,
        preference: "median".into(),
        restarts: 1,
    }
    .settings(a.theta, 0)?;
    let start = Instant::now();
    let m = matrix_for(&panel, kind, &settings)?;
    let secs = start.elapsed().as_secs_f64();
    let pairs = panel.n_series() * panel.n_series().saturating_sub(1) / 2;
    log::info!("{pairs} pairs in {secs:.3} s ({:.0} pairs/s)", pairs as f64 / secs.max(1e-9));
    write_file(&a.out, |w| Ok(write_distance_matrix(&m, w)?))
}

fn cmd_cluster(a: ClusterArgs) -> Result<()> {
    let algorithm: Algorithm = a.algo.parse()?;
    let settings = a.algo_args.settings(a.theta, a.seed)?;
    if !algorithm.needs_q() && a.q.is_some() {
        log::warn!("--Q is ignored by {algorithm}");
    }
    let (ids, clustering) = match (&a.panel, &a.matrix) {
        (Some(path), _) => {
            let panel = load_panel(path)?;
            let method = Method {
                kind: a.kind.parse()?,
                algorithm,
            };
            (panel.ids().to_vec(), cluster_panel(&panel, method, a.q, &settings)?)
        }
        (None, Some(path)) => {
            let m = read_distance_matrix(open(path)?)?;
            (m.ids().to_vec(), cluster_matrix(&m, algorithm, a.q, &settings)?)
        }
        (None, None) => return Err(invalid("give --panel or --matrix")),
    };
    if let Some(ap) = clustering.affinity {
        log::info!(
            "preference {}, {} iterations, converged: {}",
            ap.preference,
            ap.iterations,
            ap.converged
        );
    }
    write_file(&a.out, |w| Ok(write_partition(&ids, &clustering.partition, w)?))?;
    match (&a.dendrogram, &clustering.dendrogram) {
        (Some(path), Some(d)) => write_file(path, |w| Ok(write_dendrogram(d, w)?))?,
        (Some(_), None) => log::warn!("{algorithm} builds no dendrogram; --dendrogram ignored"),
        _ => {}
    }
    if let Some(path) = &a.labels {
        let truth = load_labels(path, &ids)?;
        println!("ARI = {:.4}", ari(&clustering.partition, &truth)?);
    }
    Ok(())
}

fn parse_all<T: std::str::FromStr<Err = E>, E: Into<CliError>>(items: &[String]) -> Result<Vec<T>> {
    items.iter().map(|s| s.trim().parse().map_err(Into::into)).collect()
}

fn cmd_benchmark(a: BenchmarkArgs) -> Result<()> {
    let affinity = a.algo_args.affinity()?;
    a.algo_args.settings(0.5, 0)?;
    let kinds: Vec<DistanceKind> = a
        .kinds
        .iter()
        .map(|k| Ok(k.trim().parse::<DistanceKind>()?))
        .collect::<Result<_>>()?;
    let config = BenchmarkConfig {
        datasets: a
            .presets
            .iter()
            .map(|p| DatasetChoice {
                preset: p.trim().to_string(),
                n: a.n,
                t: a.t,
                beta: a.beta,
            })
            .collect(),
        kinds,
        thetas: a.thetas.clone(),
        algorithms: parse_all(&a.algos)?,
        seeds: a.seeds.clone(),
        bins: a.algo_args.bins,
        restarts: a.algo_args.restarts,
        affinity,
    };
    let (report, timings) = run_benchmark(&config)?;
    write_json(&a.out, &report)?;
    if let Some(path) = &a.table {
        let table = render_markdown(&report);
        write_file(path, |w| {
            w.write_all(table.as_bytes()).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })
        })?;
    }
    if let Some(path) = &a.timings {
        write_json(path, &timings)?;
    }
    for c in report.cells.iter().filter(|c| c.failures > 0) {
        log::warn!(
            "{} {} θ={:?} {}: {} of {} runs failed",
            c.dataset,
            c.kind,
            c.theta,
            c.algorithm,
            c.failures,
            c.runs
        );
    }
    Ok(())
}

fn cmd_consistency(a: ConsistencyArgs) -> Result<()> {
    let config = ConsistencyConfig {
        ns: a.ns.clone(),
        ts: a.ts.clone(),
        kind: a.kind.parse()?,
        theta: a.theta,
        algorithm: a.algo.parse()?,
        seeds: a.seeds.clone(),
        beta: a.beta,
        bins: a.algo_args.bins,
        restarts: a.algo_args.restarts,
        affinity: a.algo_args.affinity()?,
    };
    a.algo_args.settings(a.theta, 0)?;
    let rows = run_consistency(&config)?;
    for (n, ta, tb) in monotonicity_violations(&rows, 0.05) {
        log::warn!("N={n}: mean ARI drops by more than 0.05 from T={ta} to T={tb}");
    }
    write_file(&a.out, |w| {
        let mut csv = csv::Writer::from_writer(w);
        for row in &rows {
            csv.serialize(row).map_err(gnpr::Error::from)?;
        }
        csv.flush().map_err(|source| CliError::Io {
            path: a.out.clone(),
            source,
        })
    })
}

fn cmd_stability(a: StabilityArgs) -> Result<()> {
    let panel = load_panel(&a.panel)?;
    let config = StabilityConfig {
        methods: parse_all(&a.methods)?,
        q: a.q,
        settings: a.algo_args.settings(a.theta, a.seed)?,
    };
    let report = run_stability(&panel, &config)?;
    for m in &report.methods {
        println!("{}: ARI = {:.4}", m.method, m.ari);
    }
    write_json(&a.out, &report)
}
