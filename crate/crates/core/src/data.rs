//! Datasets, pairwise Euclidean distances and k-th neighbour distance profiles.
//!
//! Every graph construction starts from a [`DistanceMatrix`]; the
//! neighbourhood-based ones additionally need a [`NeighborProfile`].

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Which column of a delimited file holds the ground-truth labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Header name of the column.
    Name(String),
    /// Zero-based column index. Negative values are not supported; use
    /// [`LabelColumn::Last`] for the final column.
    Index(usize),
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parameter("empty label column selector".into()));
        }
        if s.eq_ignore_ascii_case("last") || s == "-1" {
            return Ok(LabelColumn::Last);
        }
        match s.parse::<usize>() {
            Ok(i) => Ok(LabelColumn::Index(i)),
            Err(_) => Ok(LabelColumn::Name(s.to_string())),
        }
    }
}

/// `n` samples of dimension `d`, stored row-major, with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    n: usize,
    dim: usize,
    values: Vec<f64>,
    labels: Option<Vec<usize>>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from sample rows. All rows must share one dimension.
    pub fn new(name: impl Into<String>, samples: Vec<Vec<f64>>) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::Size(format!("need at least 2 samples, got {n}")));
        }
        let dim = samples[0].len();
        if dim == 0 {
            return Err(Error::Size("samples have dimension 0".into()));
        }
        let mut values = Vec::with_capacity(n * dim);
        for (i, row) in samples.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Input(format!(
                    "sample {i} has dimension {}, expected {dim}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonNumeric {
                    row: i,
                    column: j,
                    value: row[j].to_string(),
                });
            }
            values.extend_from_slice(row);
        }
        Ok(Dataset {
            name: name.into(),
            n,
            dim,
            values,
            labels: None,
            class_names: Vec::new(),
        })
    }

    /// Attaches integer labels. Class names default to the label values.
    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Input(format!(
                "{} labels for {} samples",
                labels.len(),
                self.n
            )));
        }
        let max = labels.iter().copied().max().unwrap_or(0);
        self.class_names = (0..=max).map(|c| c.to_string()).collect();
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Class names indexed by label id.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Number of distinct ground-truth classes, if labels are present.
    pub fn num_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| {
            let mut seen = vec![false; l.iter().copied().max().map_or(0, |m| m + 1)];
            l.iter().for_each(|&c| seen[c] = true);
            seen.iter().filter(|&&s| s).count()
        })
    }

    /// Returns a copy with every feature centred to mean 0 and scaled to unit
    /// (population) standard deviation. Constant features are only centred.
    pub fn standardized(&self) -> Dataset {
        let n = self.n as f64;
        let mut out = self.clone();
        for (j, sd) in self.feature_std().into_iter().enumerate() {
            let mean = self.samples().map(|s| s[j]).sum::<f64>() / n;
            for i in 0..self.n {
                let v = &mut out.values[i * self.dim + j];
                *v -= mean;
                if sd > 0.0 {
                    *v /= sd;
                }
            }
        }
        out
    }

    /// Population standard deviation of every feature.
    pub fn feature_std(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..self.dim)
            .map(|j| {
                let mean = self.samples().map(|s| s[j]).sum::<f64>() / n;
                (self.samples().map(|s| (s[j] - mean).powi(2)).sum::<f64>() / n).sqrt()
            })
            .collect()
    }

    /// Ratio of the largest to the smallest non-zero feature standard
    /// deviation; 1 when fewer than two features vary.
    pub fn feature_spread(&self) -> f64 {
        let sd: Vec<f64> = self.feature_std().into_iter().filter(|&s| s > 0.0).collect();
        let max = sd.iter().copied().fold(f64::NAN, f64::max);
        let min = sd.iter().copied().fold(f64::NAN, f64::min);
        if sd.len() < 2 {
            1.0
        } else {
            max / min
        }
    }

    /// Returns the dataset with rows reordered so that row `i` of the result
    /// is row `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Dataset> {
        if order.len() != self.n {
            return Err(Error::Input("permutation length mismatch".into()));
        }
        let rows = order.iter().map(|&i| self.sample(i).to_vec()).collect();
        let mut out = Dataset::new(self.name.clone(), rows)?;
        if let Some(l) = &self.labels {
            out.labels = Some(order.iter().map(|&i| l[i]).collect());
            out.class_names = self.class_names.clone();
        }
        Ok(out)
    }
}

/// Loads a comma- or whitespace-delimited numeric table.
///
/// The first non-empty line is treated as a header when any of its feature
/// fields is not numeric. Lines starting with `#` are skipped.
pub fn load_dataset(path: impl AsRef<Path>, label_column: Option<&LabelColumn>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_dataset(&text, &name, label_column)
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else if line.contains(';') {
        line.split(';').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses delimited text; see [`load_dataset`]. Row numbers in errors are
/// 1-based line numbers of the source text.
pub fn parse_dataset(text: &str, name: &str, label_column: Option<&LabelColumn>) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();

    let Some(&(_, first_line)) = lines.peek() else {
        return Err(Error::Size("need at least 2 samples, got 0".into()));
    };
    let first = split_fields(first_line);
    let width = first.len();

    let resolve_index = |header: Option<&[&str]>| -> Result<Option<usize>> {
        match label_column {
            None => Ok(None),
            Some(LabelColumn::Last) => Ok(Some(width - 1)),
            Some(LabelColumn::Index(i)) if *i < width => Ok(Some(*i)),
            Some(LabelColumn::Index(i)) => Err(Error::Parameter(format!(
                "label column {i} out of range for {width} columns"
            ))),
            Some(LabelColumn::Name(name)) => header
                .and_then(|h| h.iter().position(|f| f == name))
                .map(Some)
                .ok_or_else(|| Error::Parameter(format!("label column {name:?} not found in header"))),
        }
    };

    // Header detection has to ignore the label column, whose values may be text.
    let provisional = match label_column {
        Some(LabelColumn::Name(_)) => None,
        _ => resolve_index(None)?,
    };
    let has_header = matches!(label_column, Some(LabelColumn::Name(_)))
        || first
            .iter()
            .enumerate()
            .any(|(j, f)| Some(j) != provisional && f.parse::<f64>().is_err());
    let label_idx = if has_header {
        let header = first.clone();
        lines.next();
        resolve_index(Some(&header))?
    } else {
        provisional
    };

    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    for (row, line) in lines {
        let fields = split_fields(line);
        if fields.len() != width {
            return Err(Error::Parse {
                row,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let mut sample = Vec::with_capacity(width);
        for (j, f) in fields.iter().enumerate() {
            if Some(j) == label_idx {
                raw_labels.push(f.to_string());
                continue;
            }
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => sample.push(v),
                _ => {
                    return Err(Error::NonNumeric {
                        row,
                        column: j,
                        value: f.to_string(),
                    })
                }
            }
        }
        rows.push(sample);
    }

    let mut ds = Dataset::new(name, rows)?;
    if label_idx.is_some() {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut names = Vec::new();
        let labels = raw_labels
            .into_iter()
            .map(|s| {
                let next = ids.len();
                *ids.entry(s.clone()).or_insert_with(|| {
                    names.push(s);
                    next
                })
            })
            .collect();
        ds.labels = Some(labels);
        ds.class_names = names;
    }
    Ok(ds)
}

/// Symmetric matrix of pairwise dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    metric: String,
}

impl DistanceMatrix {
    /// Wraps a row-major `n x n` matrix after checking symmetry, the zero
    /// diagonal and non-negativity.
    pub fn from_values(n: usize, values: Vec<f64>, metric: impl Into<String>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Input(format!(
                "{} values for a {n}x{n} matrix",
                values.len()
            )));
        }
        if n < 2 {
            return Err(Error::Size(format!("need at least 2 points, got {n}")));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::Input(format!("non-zero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let v = values[i * n + j];
                if !(v >= 0.0) || !v.is_finite() || v != values[j * n + i] {
                    return Err(Error::Input(format!(
                        "entry ({i},{j}) is negative, non-finite or asymmetric"
                    )));
                }
            }
        }
        Ok(DistanceMatrix {
            n,
            values,
            metric: metric.into(),
        })
    }

    /// Distances between points on the real line.
    pub fn from_line(points: &[f64]) -> Result<Self> {
        let rows = points.iter().map(|&p| vec![p]).collect();
        Ok(pairwise_distances(&Dataset::new("line", rows)?))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric_name(&self) -> &str {
        &self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every distance by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> DistanceMatrix {
        DistanceMatrix {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
            metric: self.metric.clone(),
        }
    }

    /// Indices of the other points ordered by increasing distance from `i`,
    /// ties broken by index.
    pub fn neighbor_order(&self, i: usize) -> Vec<usize> {
        let row = self.row(i);
        let mut idx: Vec<usize> = (0..self.n).filter(|&j| j != i).collect();
        idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        idx
    }
}

/// Euclidean distances between all pairs of samples.
pub fn pairwise_distances(ds: &Dataset) -> DistanceMatrix {
    let n = ds.len();
    let mut values = vec![0.0; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let yi = ds.sample(i);
        for (j, out) in row.iter_mut().enumerate() {
            if j != i {
                *out = yi
                    .iter()
                    .zip(ds.sample(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
            }
        }
    });
    DistanceMatrix {
        n,
        values,
        metric: "euclidean".into(),
    }
}

/// Distance from every point to its k-th nearest other point.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborProfile {
    pub k: usize,
    pub dk: Vec<f64>,
}

impl NeighborProfile {
    pub fn mean(&self) -> f64 {
        self.dk.iter().sum::<f64>() / self.dk.len() as f64
    }
}

/// `dk[i]` is the k-th smallest off-diagonal entry of row `i`.
pub fn kth_neighbor_distances(dm: &DistanceMatrix, k: usize) -> Result<NeighborProfile> {
    let n = dm.len();
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "neighbour index k={k} must lie in [1, {}]",
            n - 1
        )));
    }
    let dk = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut others: Vec<f64> = dm
                .row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .collect();
            let (_, kth, _) = others.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect();
    Ok(NeighborProfile { k, dk })
}
