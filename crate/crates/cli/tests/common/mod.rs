#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mscluster::PipelineConfig;

/// Two well separated groups of points on a jittered grid, with a label column.
pub fn two_groups_csv(dir: &Path) -> PathBuf {
    let mut s = String::from("x,y,class\n");
    for g in 0..2 {
        for i in 0..12 {
            let x = (i % 4) as f64 + 0.13 * ((i * 7) % 5) as f64 + 40.0 * g as f64;
            let y = (i / 4) as f64 + 0.11 * ((i * 3) % 7) as f64;
            s.push_str(&format!("{x},{y},{}\n", if g == 0 { "left" } else { "right" }));
        }
    }
    let path = dir.join("groups.csv");
    fs::write(&path, s).unwrap();
    path
}

/// A short scan so tests stay fast.
pub fn quick_config(data: &Path, out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(data, out);
    for (k, v) in [
        ("label_col", "class"),
        ("k", "5"),
        ("t_min", "0.5"),
        ("t_max", "500"),
        ("n_times", "25"),
        ("n_louvain", "12"),
        ("seed", "3"),
    ] {
        cfg.set(k, v).unwrap();
    }
    cfg
}

/// Relative path to contents, for every file below `root` except `skip`.
pub fn snapshot(root: &Path, skip: &[&str]) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path.strip_prefix(root).unwrap().display().to_string();
            if !skip.contains(&rel.as_str()) {
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Names of files whose contents differ or exist on one side only.
pub fn differing(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().filter(|k| a.get(*k) != b.get(*k)).cloned().collect()
}
