//! Plain-text artifact formats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mscluster_core::{DenseMatrix, Graph, Partition, ScanResult};
use serde::Serialize;

use crate::error::CliError;

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::output(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::output(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

/// One label per line under a `community` header.
pub fn partition_to_string(p: &Partition) -> String {
    let mut s = String::from("community\n");
    for &g in p.assignment() {
        writeln!(s, "{g}").unwrap();
    }
    s
}

/// Reads a partition file: one integer label per line, an optional
/// non-numeric header line, and `#` comments.
pub fn parse_partition(text: &str) -> Result<Partition, String> {
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<usize>() {
            Ok(l) => labels.push(l),
            Err(_) if labels.is_empty() && i == 0 => {}
            Err(_) => return Err(format!("line {}: {line:?} is not a community label", i + 1)),
        }
    }
    if labels.is_empty() {
        return Err("no labels found".into());
    }
    Ok(Partition::from_labels(&labels))
}

pub fn save_partition(path: &Path, p: &Partition) -> Result<(), CliError> {
    write_text(path, &partition_to_string(p))
}

pub fn load_partition(path: &Path) -> Result<Partition, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::output(path, e))?;
    parse_partition(&text).map_err(|e| CliError::output(path, e))
}

fn join_row(s: &mut String, values: impl IntoIterator<Item = impl std::fmt::Display>) {
    let mut first = true;
    for v in values {
        if !first {
            s.push(',');
        }
        first = false;
        write!(s, "{v}").unwrap();
    }
    s.push('\n');
}

/// `t_index,run_index,node_0,...` with one row per stored run.
pub fn partitions_csv(sr: &ScanResult) -> String {
    let n = sr.n_nodes();
    let mut s = String::from("t_index,run_index");
    for i in 0..n {
        write!(s, ",node_{i}").unwrap();
    }
    s.push('\n');
    for (a, runs) in sr.all_partitions.iter().enumerate() {
        for (r, p) in runs.iter().enumerate() {
            write!(s, "{a},{r},").unwrap();
            join_row(&mut s, p.assignment());
        }
    }
    s
}

/// Best run per time: `t_index,t,run_index,score,c` followed by the assignment.
pub fn optima_csv(sr: &ScanResult) -> String {
    let mut s = String::from("t_index,t,run_index,score,c");
    for i in 0..sr.n_nodes() {
        write!(s, ",node_{i}").unwrap();
    }
    s.push('\n');
    for (a, p) in sr.optima.iter().enumerate() {
        write!(s, "{a},{},{},{},{},", sr.t_grid[a], sr.best_run[a], sr.scores[a], p.num_groups()).unwrap();
        join_row(&mut s, p.assignment());
    }
    s
}

/// Headerless square matrix.
pub fn vi_tt_csv(sr: &ScanResult) -> String {
    let nt = sr.n_times();
    let mut s = String::new();
    for a in 0..nt {
        join_row(&mut s, &sr.vi_tt[a * nt..(a + 1) * nt]);
    }
    s
}

pub fn vi_t_csv(sr: &ScanResult) -> String {
    let mut s = String::from("t,vi\n");
    for (t, v) in sr.t_grid.iter().zip(&sr.dispersion) {
        writeln!(s, "{t},{v}").unwrap();
    }
    s
}

pub fn ncomms_r_csv(sr: &ScanResult) -> String {
    let mut s = String::from("t,c,r\n");
    for ((t, p), r) in sr.t_grid.iter().zip(&sr.optima).zip(&sr.scores) {
        writeln!(s, "{t},{},{r}", p.num_groups()).unwrap();
    }
    s
}

/// `i j` per edge, `i < j`, lexicographic.
pub fn edgelist(g: &Graph) -> String {
    let mut s = String::new();
    for (i, j) in g.edges() {
        writeln!(s, "{i} {j}").unwrap();
    }
    s
}

pub fn matrix_csv(m: &DenseMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.dim() {
        join_row(&mut s, m.row(i));
    }
    s
}
