use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mscluster::config::PipelineConfig;
use mscluster::output::{load_partition, write_text};
use mscluster::pipeline::method_label;
use mscluster::{run_benchmark, run_pipeline, with_threads, CliError, RunReport};
use mscluster_core::{ari, LabelColumn, nmi, purity, variation_of_information};

#[derive(Parser)]
#[command(name = "mscluster", version, about = "Multiscale graph-based clustering with Markov Stability")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one dataset and write the scan artifacts.
    Cluster(ClusterArgs),
    /// Run every dataset against every graph construction and tabulate scores.
    Bench(BenchArgs),
    /// Compare two partition files (VI, NMI, ARI, purity of A against B).
    Metrics { a: PathBuf, b: PathBuf },
}

#[derive(Args)]
struct GraphArgs {
    /// eps, knn, cknn, mst, pmst or rmst.
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Epsilon-ball radius (default: mean distance to the 7th neighbour).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    pmst_r: Option<f64>,
    #[arg(long)]
    pmst_ensemble: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Label column: header name, zero-based index or `last` (bench defaults to `last`).
    #[arg(long)]
    label_col: Option<String>,
    /// z-score features before computing distances: `true` (the default
    /// when given without a value), `false`, or `auto` to scale only when
    /// feature spreads differ by more than a factor of 10.
    #[arg(long, value_name = "MODE", num_args = 0..=1, default_missing_value = "true")]
    standardize: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    n_times: Option<usize>,
    #[arg(long)]
    n_louvain: Option<usize>,
    /// Minimum scale persistence, in natural-log units of time.
    #[arg(long)]
    min_persistence: Option<f64>,
    #[arg(long)]
    vi_block_thresh: Option<f64>,
    #[arg(long)]
    vi_dispersion_thresh: Option<f64>,
    /// Also select the most persistent partition with this many communities.
    #[arg(long)]
    c_target: Option<usize>,
    /// Worker threads (default: MSCLUSTER_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Write B(t) for every scanned time under scan/bt/.
    #[arg(long)]
    dump_bt: bool,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Labelled data files; repeat for several datasets.
    #[arg(long, required = true)]
    data: Vec<PathBuf>,
    /// Graph construction as `method[,key=value...]`, e.g. `cknn,k=7,delta=1`;
    /// repeatable. Defaults to `cknn,k=7`.
    #[arg(long = "graph-spec")]
    graph_spec: Vec<String>,
    #[arg(long, default_value = "mscluster-bench")]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

fn some<T: ToString>(key: &'static str, v: &Option<T>) -> Option<(&'static str, String)> {
    v.as_ref().map(|x| (key, x.to_string()))
}

impl GraphArgs {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        [
            some("graph", &self.graph),
            some("k", &self.k),
            some("delta", &self.delta),
            some("gamma", &self.gamma),
            some("eps", &self.eps),
            some("pmst_r", &self.pmst_r),
            some("pmst_ensemble", &self.pmst_ensemble),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

impl RunArgs {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let flag = |key, on: bool| on.then(|| (key, "true".to_string()));
        [
            some("label_col", &self.label_col),
            some("standardize", &self.standardize),
            some("seed", &self.seed),
            some("t_min", &self.t_min),
            some("t_max", &self.t_max),
            some("n_times", &self.n_times),
            some("n_louvain", &self.n_louvain),
            some("min_persistence", &self.min_persistence),
            some("vi_block_thresh", &self.vi_block_thresh),
            some("vi_dispersion_thresh", &self.vi_dispersion_thresh),
            some("c_target", &self.c_target),
            flag("dump_bt", self.dump_bt),
        ]
        .into_iter()
        .flatten()
        .collect()
    }

    fn base_config(&self) -> Result<PipelineConfig, CliError> {
        let mut cfg = PipelineConfig::new("", "mscluster-out");
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        Ok(cfg)
    }
}

fn apply(cfg: &mut PipelineConfig, pairs: &[(&str, String)]) -> Result<(), CliError> {
    for (k, v) in pairs.iter().filter(|(k, _)| *k == "graph") {
        cfg.set(k, v)?;
    }
    for (k, v) in pairs.iter().filter(|(k, _)| *k != "graph") {
        cfg.set(k, v)?;
    }
    Ok(())
}

fn print_summary(report: &RunReport) {
    let g = &report.graph;
    println!(
        "{}: n={} edges={} mean degree={:.2} components before repair={}",
        g.method, g.n, g.edges, g.mean_degree, g.components_before_repair
    );
    println!("{} robust scale(s)", report.scales.len());
    for s in &report.scales {
        let m = s
            .metrics
            .map(|m| format!(" nmi={:.4} ari={:.4} purity={:.4}", m.nmi, m.ari, m.purity))
            .unwrap_or_default();
        println!(
            "  c={:<4} t=[{:.4}, {:.4}] persistence={:.3}{m}",
            s.c, s.t_start, s.t_end, s.persistence
        );
    }
    if let Some(u) = &report.unsupervised {
        println!("unsupervised choice: c={}", u.c);
    }
    if let Some(t) = &report.c_target {
        let m = t.metrics.map(|m| format!(" nmi={:.4} ari={:.4}", m.nmi, m.ari)).unwrap_or_default();
        println!("c-target {}: t=[{:.4}, {:.4}]{m}", t.c, t.t_start, t.t_end);
    }
    if let Some(b) = &report.best_vs_truth {
        println!(
            "closest to truth: c={} at t={:.4} nmi={:.4} ari={:.4} purity={:.4}",
            b.c, b.t, b.metrics.nmi, b.metrics.ari, b.metrics.purity
        );
    }
}

fn cluster(args: ClusterArgs) -> Result<(), CliError> {
    let mut cfg = args.run.base_config()?;
    let mut pairs = args.graph.pairs();
    pairs.extend(args.run.pairs());
    if let Some(d) = &args.data {
        pairs.push(("data", d.display().to_string()));
    }
    if let Some(o) = &args.out {
        pairs.push(("out", o.display().to_string()));
    }
    apply(&mut cfg, &pairs)?;
    if cfg.data.as_os_str().is_empty() {
        return Err(CliError::Config("no data file given (--data or `data =` in the config)".into()));
    }
    let report = with_threads(args.run.threads, || run_pipeline(&cfg))??;
    print_summary(&report);
    println!("artifacts written to {}", cfg.out.display());
    Ok(())
}

fn parse_spec(spec: &str) -> Result<Vec<(&str, String)>, CliError> {
    let mut parts = spec.split(',');
    let method = parts.next().unwrap_or("").trim();
    let mut pairs = vec![("graph", method.to_string())];
    for p in parts {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("graph spec {spec:?}: expected key=value, got {p:?}")))?;
        pairs.push((k.trim(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let specs = if args.graph_spec.is_empty() {
        vec!["cknn,k=7".to_string()]
    } else {
        args.graph_spec.clone()
    };
    let run_pairs = args.run.pairs();
    let mut cfgs = Vec::new();
    for data in &args.data {
        for spec in &specs {
            let mut cfg = args.run.base_config()?;
            let mut pairs = parse_spec(spec)?;
            pairs.extend(run_pairs.iter().map(|(k, v)| (*k, v.clone())));
            apply(&mut cfg, &pairs)?;
            cfg.data = data.clone();
            if cfg.label_col.is_none() {
                cfg.label_col = Some(LabelColumn::Last);
            }
            let stem = data.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let label: String = method_label(&cfg.graph)
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
                .collect();
            cfg.out = args.out.join("runs").join(format!("{stem}__{label}"));
            cfgs.push(cfg);
        }
    }
    let table = with_threads(args.run.threads, || run_benchmark(&cfgs))?;
    let csv = table.to_csv();
    write_text(&args.out.join("bench.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn metrics(a: PathBuf, b: PathBuf) -> Result<(), CliError> {
    let pa = load_partition(&a)?;
    let pb = load_partition(&b)?;
    let wrap = |e: mscluster_core::Error| CliError::Stage {
        stage: mscluster::Stage::Metrics,
        source: e,
    };
    let value = serde_json::json!({
        "n": pa.len(),
        "c_a": pa.num_groups(),
        "c_b": pb.num_groups(),
        "vi": variation_of_information(&pa, &pb).map_err(wrap)?,
        "nmi": nmi(&pa, &pb).map_err(wrap)?,
        "ari": ari(&pa, &pb).map_err(wrap)?,
        "purity": purity(&pa, &pb).map_err(wrap)?,
    });
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Cluster(args) => cluster(args),
        Command::Bench(args) => bench(args),
        Command::Metrics { a, b } => metrics(a, b),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
