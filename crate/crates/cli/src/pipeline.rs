use std::fs;
use std::path::Path;
use std::time::Instant;

use mscluster_core::{
    ari, best_partition_vs_truth, build_graph, choose_scale, diffusion_operators, ensure_connected,
    find_robust_scales, load_dataset, nmi, pairwise_distances, purity, scan, select_partition_with_c,
    transition_at_time, Graph, Partition, RobustScale, ScaleChoice, ScanResult, Thresholds,
};
use serde::Serialize;

use crate::config::{ConfigEcho, PipelineConfig};
use crate::error::{CliError, Stage};
use crate::output::{self, write_json, write_text};

pub const FAILED_MARKER: &str = "FAILED";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub nmi: f64,
    pub ari: f64,
    pub purity: f64,
}

impl Metrics {
    pub fn compute(pred: &Partition, truth: &Partition) -> mscluster_core::Result<Self> {
        Ok(Metrics {
            nmi: nmi(pred, truth)?,
            ari: ari(pred, truth)?,
            purity: purity(pred, truth)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub name: String,
    pub n: usize,
    pub dim: usize,
    pub classes: Option<usize>,
    /// Largest over smallest non-zero feature standard deviation, before scaling.
    pub feature_spread: f64,
    pub standardized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub method: String,
    pub n: usize,
    pub edges: usize,
    pub mean_degree: f64,
    pub components_before_repair: usize,
    pub repaired: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleReport {
    pub c: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub persistence: f64,
    pub mean_block_vi: f64,
    pub mean_dispersion: f64,
    pub partition_file: String,
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnsupervisedReport {
    /// Index into `scales`.
    pub scale: usize,
    pub c: usize,
    /// All scales within 10% of the top persistence, finest first.
    pub tied: Vec<usize>,
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetReport {
    pub c: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub persistence: f64,
    pub score: f64,
    pub partition_file: String,
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestReport {
    pub t_index: usize,
    pub t: f64,
    pub c: usize,
    pub partition_file: String,
    pub metrics: Metrics,
}

/// Summary of one pipeline run, written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    pub n_louvain: usize,
    pub config: ConfigEcho,
    pub dataset: DatasetSummary,
    pub graph: GraphSummary,
    pub thresholds: Thresholds,
    /// Sorted by descending persistence.
    pub scales: Vec<ScaleReport>,
    pub unsupervised: Option<UnsupervisedReport>,
    pub c_target: Option<TargetReport>,
    pub best_vs_truth: Option<BestReport>,
}

#[derive(Serialize)]
struct RobustScalesFile<'a> {
    thresholds: Thresholds,
    primary: Option<usize>,
    tied: Vec<usize>,
    scales: &'a [RobustScale],
}

#[derive(Default, Serialize)]
struct Timing {
    stages: Vec<(String, f64)>,
    total: f64,
}

struct Clock {
    timing: Timing,
    last: Instant,
    start: Instant,
}

impl Clock {
    fn new() -> Self {
        let now = Instant::now();
        Clock {
            timing: Timing::default(),
            last: now,
            start: now,
        }
    }

    fn lap(&mut self, stage: Stage) {
        let now = Instant::now();
        self.timing
            .stages
            .push((stage.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
    }
}

/// Runs load, distances, graph, scan, selection and evaluation, writing every
/// artifact under `cfg.out`. On failure a `FAILED` file holding the error is
/// left next to whatever was already written.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::output(&cfg.out, e))?;
    let marker = cfg.out.join(FAILED_MARKER);
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| CliError::output(&marker, e))?;
    }
    let result = run_stages(cfg);
    if let Err(e) = &result {
        write_text(&marker, &format!("{e}\n"))?;
    }
    result
}

fn rel(out: &Path, path: &Path) -> String {
    path.strip_prefix(out).unwrap_or(path).display().to_string()
}

fn run_stages(cfg: &PipelineConfig) -> Result<RunReport, CliError> {
    let out = cfg.out.as_path();
    let mut clock = Clock::new();

    let mut ds = load_dataset(&cfg.data, cfg.label_col.as_ref()).map_err(CliError::stage(Stage::Load))?;
    let feature_spread = ds.feature_spread();
    let standardized = cfg.standardize.applies_to(&ds);
    if standardized {
        ds = ds.standardized();
    }
    cfg.graph.validate(ds.len()).map_err(CliError::stage(Stage::Graph))?;
    let truth = ds.labels().map(Partition::from_labels);
    clock.lap(Stage::Load);

    let dm = pairwise_distances(&ds);
    clock.lap(Stage::Distances);

    let mut raw_params = cfg.graph.clone();
    raw_params.connect = false;
    let raw = build_graph(&ds, &dm, &raw_params).map_err(CliError::stage(Stage::Graph))?;
    let components_before_repair = raw.component_count();
    let g = if cfg.graph.connect {
        ensure_connected(&raw, &dm).map_err(CliError::stage(Stage::Graph))?
    } else {
        raw
    };
    write_text(&out.join("graph.edgelist"), &output::edgelist(&g))?;
    write_text(&out.join("graph.mtx"), &matrix_market(&g))?;
    clock.lap(Stage::Graph);

    let grid = cfg.scan.grid();
    let sr = scan(&g, &grid, cfg.scan.n_louvain, cfg.scan.seed).map_err(CliError::stage(Stage::Scan))?;
    write_scan(out, &sr)?;
    if cfg.dump_bt {
        dump_bt(out, &g, &grid)?;
    }
    clock.lap(Stage::Scan);

    let thresholds = cfg
        .selection
        .resolve(ds.len())
        .map_err(CliError::stage(Stage::Selection))?;
    let scales = find_robust_scales(&sr, &cfg.selection).map_err(CliError::stage(Stage::Selection))?;
    let choice = choose_scale(&scales, ds.len());
    let target = cfg
        .c_target
        .map(|c| select_partition_with_c(&sr, c))
        .transpose()
        .map_err(CliError::stage(Stage::Selection))?;
    let (primary, tied) = match &choice {
        Some(ScaleChoice { primary, tied }) => (Some(*primary), tied.clone()),
        None => (None, Vec::new()),
    };
    write_json(
        &out.join("robust_scales.json"),
        &RobustScalesFile {
            thresholds,
            primary,
            tied,
            scales: &scales,
        },
    )?;
    let mut scale_files = Vec::new();
    for (i, s) in scales.iter().enumerate() {
        let path = out.join(format!("partitions/scale_{i:02}.csv"));
        output::save_partition(&path, &s.partition)?;
        scale_files.push(rel(out, &path));
    }
    let target_file = match &target {
        Some(sel) => {
            let path = out.join("partitions/c_target.csv");
            output::save_partition(&path, &sel.partition)?;
            Some(rel(out, &path))
        }
        None => None,
    };
    clock.lap(Stage::Selection);

    let metric = |p: &Partition| -> Result<Option<Metrics>, CliError> {
        truth
            .as_ref()
            .map(|t| Metrics::compute(p, t))
            .transpose()
            .map_err(CliError::stage(Stage::Metrics))
    };
    let mut scale_reports = Vec::new();
    for (s, file) in scales.iter().zip(scale_files) {
        scale_reports.push(ScaleReport {
            c: s.c,
            t_start: s.t_start,
            t_end: s.t_end,
            persistence: s.persistence,
            mean_block_vi: s.mean_block_vi,
            mean_dispersion: s.mean_dispersion,
            partition_file: file,
            metrics: metric(&s.partition)?,
        });
    }
    let unsupervised = match choice {
        Some(ch) => Some(UnsupervisedReport {
            scale: ch.primary,
            c: scales[ch.primary].c,
            tied: ch.tied,
            metrics: metric(&scales[ch.primary].partition)?,
        }),
        None => None,
    };
    let c_target = match (target, target_file) {
        (Some(sel), Some(file)) => Some(TargetReport {
            c: sel.partition.num_groups(),
            t_start: sel.t_start,
            t_end: sel.t_end,
            persistence: sel.persistence,
            score: sel.score,
            partition_file: file,
            metrics: metric(&sel.partition)?,
        }),
        _ => None,
    };
    let best_vs_truth = match &truth {
        Some(t) => {
            output::save_partition(&out.join("partitions/truth.csv"), t)?;
            let (p, _, _) = best_partition_vs_truth(&sr, t).map_err(CliError::stage(Stage::Metrics))?;
            let t_index = sr.optima.iter().position(|q| *q == p).unwrap_or(0);
            let path = out.join("partitions/best_vs_truth.csv");
            output::save_partition(&path, &p)?;
            Some(BestReport {
                t_index,
                t: sr.t_grid[t_index],
                c: p.num_groups(),
                partition_file: rel(out, &path),
                metrics: Metrics::compute(&p, t).map_err(CliError::stage(Stage::Metrics))?,
            })
        }
        None => None,
    };
    clock.lap(Stage::Metrics);

    let report = RunReport {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.scan.seed,
        t_grid: grid,
        n_louvain: cfg.scan.n_louvain,
        config: cfg.echo(),
        dataset: DatasetSummary {
            name: ds.name().to_string(),
            n: ds.len(),
            dim: ds.dim(),
            classes: ds.num_classes(),
            feature_spread,
            standardized,
        },
        graph: GraphSummary {
            method: method_label(&cfg.graph),
            n: g.node_count(),
            edges: g.edge_count(),
            mean_degree: g.mean_degree(),
            components_before_repair,
            repaired: components_before_repair > 1 && cfg.graph.connect,
        },
        thresholds,
        scales: scale_reports,
        unsupervised,
        c_target,
        best_vs_truth,
    };
    write_json(&out.join("report.json"), &report)?;
    clock.lap(Stage::Write);
    clock.timing.total = clock.start.elapsed().as_secs_f64();
    write_json(&out.join("timing.json"), &clock.timing)?;
    Ok(report)
}

fn write_scan(out: &Path, sr: &ScanResult) -> Result<(), CliError> {
    let dir = out.join("scan");
    write_text(&dir.join("partitions.csv"), &output::partitions_csv(sr))?;
    write_text(&dir.join("optima.csv"), &output::optima_csv(sr))?;
    write_text(&dir.join("vi_tt.csv"), &output::vi_tt_csv(sr))?;
    write_text(&dir.join("vi_t.csv"), &output::vi_t_csv(sr))?;
    write_text(&dir.join("ncomms_r.csv"), &output::ncomms_r_csv(sr))
}

fn dump_bt(out: &Path, g: &Graph, grid: &[f64]) -> Result<(), CliError> {
    let ops = diffusion_operators(g).map_err(CliError::stage(Stage::Scan))?;
    for (a, &t) in grid.iter().enumerate() {
        let ac = transition_at_time(&ops, t).map_err(CliError::stage(Stage::Scan))?;
        write_text(&out.join(format!("scan/bt/bt_{a:03}.csv")), &output::matrix_csv(&ac.b))?;
    }
    Ok(())
}

/// Symmetric pattern matrix, lower triangle, 1-based.
fn matrix_market(g: &Graph) -> String {
    use std::fmt::Write as _;
    let n = g.node_count();
    let mut s = String::from("%%MatrixMarket matrix coordinate pattern symmetric\n");
    writeln!(s, "{n} {n} {}", g.edge_count()).unwrap();
    for (i, j) in g.edges() {
        writeln!(s, "{} {}", j + 1, i + 1).unwrap();
    }
    s
}

/// Short human-readable name of a graph construction and its parameters.
pub fn method_label(p: &mscluster_core::GraphBuildParams) -> String {
    use mscluster_core::GraphMethod::*;
    match p.method {
        EpsBall => match p.eps {
            Some(e) => format!("eps eps={e}"),
            None => "eps eps=auto".into(),
        },
        Knn => format!("knn k={}", p.k),
        Cknn => format!("cknn k={} delta={}", p.k, p.delta),
        Mst => "mst".into(),
        Pmst => format!("pmst k={} r={} m={}", p.k, p.noise_ratio, p.ensemble_size),
        Rmst => format!("rmst k={} gamma={}", p.k, p.gamma),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, falling back to the
/// `MSCLUSTER_THREADS` environment variable and then to the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let threads = match threads {
        Some(t) => Some(t),
        None => match std::env::var("MSCLUSTER_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("MSCLUSTER_THREADS={v:?} is not a thread count")))?,
            ),
            _ => None,
        },
    };
    match threads {
        Some(0) => Err(CliError::Config("thread count must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}
