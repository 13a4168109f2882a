use std::fmt::Write as _;

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::pipeline::{method_label, run_pipeline};

/// One dataset × method cell. Metric fields are `None` when the run failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub method: String,
    pub nmi: Option<f64>,
    pub ari: Option<f64>,
    pub purity: Option<f64>,
    pub c_found: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    /// One `Average` row per method, over the datasets that succeeded.
    pub averages: Vec<BenchRow>,
}

fn cell<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dataset,method,nmi,ari,purity,c_found,error\n");
        for r in self.rows.iter().chain(&self.averages) {
            let error = r.error.as_deref().unwrap_or("").replace(['"', '\n'], " ");
            let error = if error.is_empty() { error } else { format!("\"{error}\"") };
            writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.dataset,
                r.method,
                cell(&r.nmi),
                cell(&r.ari),
                cell(&r.purity),
                cell(&r.c_found),
                error
            )
            .unwrap();
        }
        s
    }

    pub fn average(&self, method: &str) -> Option<&BenchRow> {
        self.averages.iter().find(|r| r.method == method)
    }
}

/// Dataset name used in the table: the data file's stem.
pub fn dataset_name(cfg: &PipelineConfig) -> String {
    cfg.data
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| cfg.data.display().to_string())
}

/// Runs every configuration in turn. Scores are those of the stored optimum
/// closest to the ground truth; `c_found` is the unsupervised choice. A
/// failing run leaves empty cells and the table carries on.
pub fn run_benchmark(cfgs: &[PipelineConfig]) -> BenchTable {
    let mut rows = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let mut row = BenchRow {
            dataset: dataset_name(cfg),
            method: method_label(&cfg.graph),
            nmi: None,
            ari: None,
            purity: None,
            c_found: None,
            error: None,
        };
        match run_pipeline(cfg) {
            Ok(report) => match report.best_vs_truth {
                Some(best) => {
                    row.nmi = Some(best.metrics.nmi);
                    row.ari = Some(best.metrics.ari);
                    row.purity = Some(best.metrics.purity);
                    row.c_found = report.unsupervised.map(|u| u.c);
                }
                None => row.error = Some("dataset has no ground-truth labels".into()),
            },
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    let mut methods: Vec<String> = Vec::new();
    for r in &rows {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    let averages = methods
        .into_iter()
        .map(|m| {
            let ok: Vec<&BenchRow> = rows.iter().filter(|r| r.method == m && r.nmi.is_some()).collect();
            let mean = |f: fn(&BenchRow) -> Option<f64>| {
                (!ok.is_empty()).then(|| ok.iter().filter_map(|r| f(r)).sum::<f64>() / ok.len() as f64)
            };
            BenchRow {
                dataset: "Average".into(),
                nmi: mean(|r| r.nmi),
                ari: mean(|r| r.ari),
                purity: mean(|r| r.purity),
                c_found: None,
                error: None,
                method: m,
            }
        })
        .collect();
    BenchTable { rows, averages }
}
