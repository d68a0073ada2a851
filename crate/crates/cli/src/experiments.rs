//! Benchmark table, consistency-in-T sweep and odd/even stability.
//!
//! Reports are plain data with a `schema_version`; wall-clock timings are kept
//! in a separate [`Timings`] value so the reports themselves are reproducible
//! byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use gnpr::cluster::{ari, AffinityOptions, Partition, Preference};
use gnpr::synth::SyntheticSpec;
use gnpr::{generate, preset, DistanceKind, Panel, ThetaWeight};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::method::{cluster_matrix, cluster_panel, matrix_for, Algorithm, Method, Settings};

pub const SCHEMA_VERSION: u32 = 1;

/// Options echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub bins: usize,
    pub restarts: usize,
    pub ap_preference: String,
    pub ap_damping: f64,
    pub ap_max_iter: usize,
    pub ap_convergence_iter: usize,
}

impl ConfigEcho {
    pub fn new(bins: usize, restarts: usize, ap: &AffinityOptions) -> Self {
        Self {
            bins,
            restarts,
            ap_preference: match ap.preference {
                Preference::Median => "median".into(),
                Preference::Value(v) => v.to_string(),
            },
            ap_damping: ap.damping,
            ap_max_iter: ap.max_iter,
            ap_convergence_iter: ap.convergence_iter,
        }
    }
}

/// Sample mean and standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Dataset axis of a benchmark: a preset with optional overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetChoice {
    pub preset: String,
    pub n: Option<usize>,
    pub t: Option<usize>,
    pub beta: Option<f64>,
}

impl DatasetChoice {
    pub fn spec(&self) -> Result<SyntheticSpec> {
        let mut spec = preset(&self.preset, self.n, self.t)?;
        if let Some(beta) = self.beta {
            spec.beta = beta;
            spec.validate()?;
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub datasets: Vec<DatasetChoice>,
    pub kinds: Vec<DistanceKind>,
    pub thetas: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub bins: usize,
    pub restarts: usize,
    pub affinity: AffinityOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetEcho {
    pub name: String,
    pub spec: SyntheticSpec,
    /// The loading differs from the published preset value.
    pub beta_overridden: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRun {
    pub dataset: String,
    pub kind: DistanceKind,
    pub theta: Option<f64>,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub ari: Option<f64>,
    pub n_clusters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ap: Option<crate::method::AffinitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkCell {
    pub dataset: String,
    pub kind: DistanceKind,
    pub theta: Option<f64>,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub failures: usize,
    pub mean_ari: Option<f64>,
    pub std_ari: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub datasets: Vec<DatasetEcho>,
    pub seeds: Vec<u64>,
    pub runs: Vec<BenchmarkRun>,
    pub cells: Vec<BenchmarkCell>,
}

impl BenchmarkReport {
    pub fn cell(&self, dataset: &str, kind: DistanceKind, theta: Option<f64>, algorithm: Algorithm) -> Option<&BenchmarkCell> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.kind == kind && c.theta == theta && c.algorithm == algorithm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellTiming {
    pub dataset: String,
    pub kind: DistanceKind,
    pub theta: Option<f64>,
    pub algorithm: Algorithm,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub schema_version: u32,
    pub cells: Vec<CellTiming>,
}

/// Distance axis with θ expanded only for kinds that use it.
fn distance_axis(kinds: &[DistanceKind], thetas: &[f64]) -> Vec<(DistanceKind, Option<f64>)> {
    kinds
        .iter()
        .flat_map(|&k| {
            if k.uses_theta() {
                thetas.iter().map(|&t| (k, Some(t))).collect()
            } else {
                vec![(k, None)]
            }
        })
        .collect()
}

fn check_axes(config: &BenchmarkConfig) -> Result<()> {
    let empty = [
        ("datasets", config.datasets.is_empty()),
        ("distance kinds", config.kinds.is_empty()),
        ("algorithms", config.algorithms.is_empty()),
        ("seeds", config.seeds.is_empty()),
        ("θ values", config.kinds.iter().any(|k| k.uses_theta()) && config.thetas.is_empty()),
    ];
    if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
        return Err(invalid(format!("benchmark needs at least one of: {name}")));
    }
    for &t in &config.thetas {
        ThetaWeight::new(t)?;
    }
    Ok(())
}

struct RunOutcome {
    run: BenchmarkRun,
    seconds: f64,
}

/// Every (dataset, seed) pair is one parallel task; within it the matrix of
/// each (kind, θ) is built once and shared by the matrix-based algorithms.
fn runs_for(
    dataset: &str,
    spec: &SyntheticSpec,
    seed: u64,
    axis: &[(DistanceKind, Option<f64>)],
    config: &BenchmarkConfig,
) -> Vec<RunOutcome> {
    let q = spec.cluster_count();
    let mut out = Vec::new();
    let generated = generate(spec, seed);
    for &(kind, theta) in axis {
        let settings = Settings {
            bins: config.bins,
            theta: ThetaWeight::new(theta.unwrap_or(0.5)).expect("checked"),
            seed,
            restarts: config.restarts,
            affinity: config.affinity,
        };
        let needs_matrix = config.algorithms.iter().any(|&a| a != Algorithm::Kmeanspp);
        let start = Instant::now();
        let matrix = match &generated {
            Ok(lp) if needs_matrix => Some(matrix_for(&lp.panel, kind, &settings).map_err(|e| e.to_string())),
            _ => None,
        };
        let matrix_seconds = start.elapsed().as_secs_f64();
        for &algorithm in &config.algorithms {
            let start = Instant::now();
            let result = generated.as_ref().map_err(|e| e.to_string()).and_then(|lp| {
                let clustering = match (algorithm, &matrix) {
                    (Algorithm::Kmeanspp, _) => {
                        cluster_panel(&lp.panel, Method { kind, algorithm }, Some(q), &settings)
                            .map_err(|e| e.to_string())?
                    }
                    (_, Some(Ok(m))) => cluster_matrix(m, algorithm, Some(q), &settings).map_err(|e| e.to_string())?,
                    (_, Some(Err(e))) => return Err(e.clone()),
                    (_, None) => unreachable!("matrix is built whenever a matrix algorithm is requested"),
                };
                let score = ari(&clustering.partition, &lp.labels).map_err(|e| e.to_string())?;
                Ok((score, clustering))
            });
            let seconds = start.elapsed().as_secs_f64() + matrix_seconds;
            let (ari, n_clusters, ap, error) = match result {
                Ok((score, c)) => (Some(score), Some(c.partition.n_clusters()), c.affinity, None),
                Err(e) => {
                    log::warn!("{dataset} {kind} θ={theta:?} {algorithm} seed {seed}: {e}");
                    (None, None, None, Some(e))
                }
            };
            out.push(RunOutcome {
                run: BenchmarkRun {
                    dataset: dataset.to_string(),
                    kind,
                    theta,
                    algorithm,
                    seed,
                    ari,
                    n_clusters,
                    ap,
                    error,
                },
                seconds,
            });
        }
    }
    out
}

pub fn run_benchmark(config: &BenchmarkConfig) -> Result<(BenchmarkReport, Timings)> {
    check_axes(config)?;
    let datasets: Vec<DatasetEcho> = config
        .datasets
        .iter()
        .map(|d| {
            let spec = d.spec()?;
            let published = preset(&d.preset, None, None)?.beta;
            Ok(DatasetEcho {
                name: spec.name.clone().unwrap_or_else(|| d.preset.clone()),
                beta_overridden: spec.beta != published,
                spec,
            })
        })
        .collect::<Result<_>>()?;
    let axis = distance_axis(&config.kinds, &config.thetas);

    let tasks: Vec<(usize, u64)> = (0..datasets.len())
        .flat_map(|d| config.seeds.iter().map(move |&s| (d, s)))
        .collect();
    let outcomes: Vec<Vec<RunOutcome>> = tasks
        .par_iter()
        .map(|&(d, seed)| runs_for(&datasets[d].name, &datasets[d].spec, seed, &axis, config))
        .collect();
    let outcomes: Vec<RunOutcome> = outcomes.into_iter().flatten().collect();

    let mut cells = Vec::new();
    let mut timings = Vec::new();
    for ds in &datasets {
        for &(kind, theta) in &axis {
            for &algorithm in &config.algorithms {
                let members: Vec<&RunOutcome> = outcomes
                    .iter()
                    .filter(|o| {
                        let r = &o.run;
                        r.dataset == ds.name && r.kind == kind && r.theta == theta && r.algorithm == algorithm
                    })
                    .collect();
                let scores: Vec<f64> = members.iter().filter_map(|o| o.run.ari).collect();
                let (mean_ari, std_ari) = if scores.is_empty() {
                    (None, None)
                } else {
                    let (m, s) = mean_std(&scores);
                    (Some(m), Some(s))
                };
                cells.push(BenchmarkCell {
                    dataset: ds.name.clone(),
                    kind,
                    theta,
                    algorithm,
                    runs: members.len(),
                    failures: members.len() - scores.len(),
                    mean_ari,
                    std_ari,
                });
                timings.push(CellTiming {
                    dataset: ds.name.clone(),
                    kind,
                    theta,
                    algorithm,
                    seconds: members.iter().map(|o| o.seconds).sum(),
                });
            }
        }
    }

    let report = BenchmarkReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigEcho::new(config.bins, config.restarts, &config.affinity),
        datasets,
        seeds: config.seeds.clone(),
        runs: outcomes.into_iter().map(|o| o.run).collect(),
        cells,
    };
    Ok((
        report,
        Timings {
            schema_version: SCHEMA_VERSION,
            cells: timings,
        },
    ))
}

fn distance_label(kind: DistanceKind, theta: Option<f64>) -> String {
    let name = match kind {
        DistanceKind::Gnpr => "GNPR",
        DistanceKind::Gpr => "GPR",
        DistanceKind::L2 => "L2",
        DistanceKind::Pearson => "(1 − ρ)/2",
    };
    match theta {
        Some(t) => format!("{name} θ = {t}"),
        None => name.to_string(),
    }
}

/// One row per distance, one column per (algorithm, dataset).
pub fn render_markdown(report: &BenchmarkReport) -> String {
    let mut rows: Vec<(DistanceKind, Option<f64>)> = Vec::new();
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for c in &report.cells {
        if !rows.contains(&(c.kind, c.theta)) {
            rows.push((c.kind, c.theta));
        }
        if !algorithms.contains(&c.algorithm) {
            algorithms.push(c.algorithm);
        }
    }
    let columns: Vec<(Algorithm, &str)> = algorithms
        .iter()
        .flat_map(|&a| report.datasets.iter().map(move |d| (a, d.name.as_str())))
        .collect();

    let mut s = String::from("| Distance |");
    for (a, d) in &columns {
        let _ = write!(s, " {a} {d} |");
    }
    s.push_str("\n|---|");
    s.push_str(&"---|".repeat(columns.len()));
    s.push('\n');
    for &(kind, theta) in &rows {
        let _ = write!(s, "| {} |", distance_label(kind, theta));
        for &(a, d) in &columns {
            let text = match report.cell(d, kind, theta, a) {
                Some(BenchmarkCell {
                    mean_ari: Some(m),
                    std_ari: Some(sd),
                    ..
                }) => format!("{m:.2} ± {sd:.2}"),
                Some(_) => "failed".into(),
                None => "".into(),
            };
            let _ = write!(s, " {text} |");
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyConfig {
    pub ns: Vec<usize>,
    pub ts: Vec<usize>,
    pub kind: DistanceKind,
    pub theta: f64,
    pub algorithm: Algorithm,
    pub seeds: Vec<u64>,
    pub beta: Option<f64>,
    pub bins: usize,
    pub restarts: usize,
    pub affinity: AffinityOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub mean_ari: f64,
    pub std_ari: f64,
}

/// Mean ARI of preset G over seeds for every (N, T) pair, rows sorted by N then T.
pub fn run_consistency(config: &ConsistencyConfig) -> Result<Vec<ConsistencyRow>> {
    if config.ns.is_empty() || config.ts.is_empty() || config.seeds.is_empty() {
        return Err(invalid("consistency needs at least one N, one T and one seed"));
    }
    let mut ns = config.ns.clone();
    let mut ts = config.ts.clone();
    ns.sort_unstable();
    ns.dedup();
    ts.sort_unstable();
    ts.dedup();
    let grid: Vec<(usize, usize)> = ns.iter().flat_map(|&n| ts.iter().map(move |&t| (n, t))).collect();
    let specs = grid
        .iter()
        .map(|&(n, t)| {
            DatasetChoice {
                preset: "G".into(),
                n: Some(n),
                t: Some(t),
                beta: config.beta,
            }
            .spec()
        })
        .collect::<Result<Vec<_>>>()?;
    let settings = |seed| -> Result<Settings> {
        Ok(Settings {
            bins: config.bins,
            theta: ThetaWeight::new(config.theta)?,
            seed,
            restarts: config.restarts,
            affinity: config.affinity,
        })
    };
    settings(0)?;
    let method = Method {
        kind: config.kind,
        algorithm: config.algorithm,
    };
    let tasks: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|g| config.seeds.iter().map(move |&s| (g, s)))
        .collect();
    let scores = tasks
        .par_iter()
        .map(|&(g, seed)| {
            let lp = generate(&specs[g], seed)?;
            let c = cluster_panel(&lp.panel, method, Some(specs[g].cluster_count()), &settings(seed)?)?;
            Ok(ari(&c.partition, &lp.labels)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(g, &(n, t))| {
            let per_seed = &scores[g * config.seeds.len()..(g + 1) * config.seeds.len()];
            let (mean_ari, std_ari) = mean_std(per_seed);
            ConsistencyRow { n, t, mean_ari, std_ari }
        })
        .collect())
}

/// Pairs `(T_a, T_b)` with `T_a < T_b` at the same N where the mean ARI drops by
/// more than `tolerance`.
pub fn monotonicity_violations(rows: &[ConsistencyRow], tolerance: f64) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in rows {
        for b in rows {
            if a.n == b.n && a.t < b.t && b.mean_ari < a.mean_ari - tolerance {
                out.push((a.n, a.t, b.t));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    pub methods: Vec<Method>,
    pub q: Option<usize>,
    pub settings: Settings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeCount {
    pub size: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodStability {
    pub method: String,
    pub ari: f64,
    pub even_clusters: usize,
    pub odd_clusters: usize,
    pub even_size_histogram: Vec<SizeCount>,
    pub odd_size_histogram: Vec<SizeCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub theta: f64,
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    pub seed: u64,
    pub n_series: usize,
    pub even_length: usize,
    pub odd_length: usize,
    pub methods: Vec<MethodStability>,
}

pub fn size_histogram(p: &Partition) -> Vec<SizeCount> {
    let mut counts = BTreeMap::new();
    for size in p.sizes() {
        *counts.entry(size).or_insert(0) += 1;
    }
    counts.into_iter().map(|(size, count)| SizeCount { size, count }).collect()
}

/// Time indices 0, 2, 4, … and 1, 3, 5, …
pub fn split_even_odd(panel: &Panel) -> Result<(Panel, Panel)> {
    let t = panel.len();
    if t < 4 {
        return Err(invalid(format!("stability needs T ≥ 4, got {t}")));
    }
    let even: Vec<usize> = (0..t).step_by(2).collect();
    let odd: Vec<usize> = (1..t).step_by(2).collect();
    Ok((panel.select_times(&even)?, panel.select_times(&odd)?))
}

pub fn run_stability(panel: &Panel, config: &StabilityConfig) -> Result<StabilityReport> {
    if config.methods.is_empty() {
        return Err(invalid("stability needs at least one method"));
    }
    let (even, odd) = split_even_odd(panel)?;
    let methods = config
        .methods
        .iter()
        .map(|&m| {
            let a = cluster_panel(&even, m, config.q, &config.settings)?.partition;
            let b = cluster_panel(&odd, m, config.q, &config.settings)?.partition;
            Ok(MethodStability {
                method: m.to_string(),
                ari: ari(&a, &b)?,
                even_clusters: a.n_clusters(),
                odd_clusters: b.n_clusters(),
                even_size_histogram: size_histogram(&a),
                odd_size_histogram: size_histogram(&b),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let s = &config.settings;
    Ok(StabilityReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigEcho::new(s.bins, s.restarts, &s.affinity),
        theta: s.theta.value(),
        q: config.q,
        seed: s.seed,
        n_series: panel.n_series(),
        even_length: even.len(),
        odd_length: odd.len(),
        methods,
    })
}
