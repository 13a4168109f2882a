//! Markov time scan: repeated optimisation at every time on a grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{diffusion_operators, transition_at_time};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::louvain::StabilityOptimizer;
use crate::metrics::{avg_vi_at_time, vi_matrix};
use crate::partition::Partition;
use crate::seed::derive_seed;

/// Grid and repetition settings of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    pub t_min: f64,
    pub t_max: f64,
    pub n_times: usize,
    pub n_louvain: usize,
    pub seed: u64,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            t_min: 1.0,
            t_max: 1000.0,
            n_times: 100,
            n_louvain: 100,
            seed: 0,
        }
    }
}

impl ScanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(Error::Parameter(format!(
                "time range [{}, {}] must be positive and finite",
                self.t_min, self.t_max
            )));
        }
        if self.t_max < self.t_min || (self.n_times > 1 && self.t_max == self.t_min) {
            return Err(Error::Parameter(format!(
                "t_max={} must exceed t_min={}",
                self.t_max, self.t_min
            )));
        }
        if self.n_times == 0 || self.n_louvain == 0 {
            return Err(Error::Parameter("n_times and n_louvain must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.t_min, self.t_max, self.n_times)
    }
}

/// `count` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| {
                    if i == count - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Everything recorded by a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub t_grid: Vec<f64>,
    /// Best partition `g*(t)` at each time.
    pub optima: Vec<Partition>,
    /// Its stability `r*(t)`.
    pub scores: Vec<f64>,
    /// Run index that produced `optima[a]`.
    pub best_run: Vec<usize>,
    /// Mean pairwise VI among the runs at each time.
    pub dispersion: Vec<f64>,
    /// `all_partitions[a][s]` is run `s` at time `a`.
    pub all_partitions: Vec<Vec<Partition>>,
    pub all_scores: Vec<Vec<f64>>,
    /// Row-major `n_T x n_T` matrix of VI between optima.
    pub vi_tt: Vec<f64>,
    pub n_louvain: usize,
    pub seed: u64,
}

impl ScanResult {
    pub fn n_times(&self) -> usize {
        self.t_grid.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.optima.first().map_or(0, Partition::len)
    }

    pub fn vi_tt(&self, a: usize, b: usize) -> f64 {
        self.vi_tt[a * self.n_times() + b]
    }

    /// Community count of the optimum at each time.
    pub fn community_counts(&self) -> Vec<usize> {
        self.optima.iter().map(Partition::num_groups).collect()
    }

    /// Assembles a result from per-time runs, choosing the best-scoring run
    /// at each time (lowest run index on ties) and computing both VI summaries.
    pub fn from_runs(
        t_grid: Vec<f64>,
        all_partitions: Vec<Vec<Partition>>,
        all_scores: Vec<Vec<f64>>,
        seed: u64,
    ) -> Result<Self> {
        if t_grid.is_empty() {
            return Err(Error::Input("empty time grid".into()));
        }
        if all_partitions.len() != t_grid.len() || all_scores.len() != t_grid.len() {
            return Err(Error::Input("runs do not match the time grid".into()));
        }
        let n_louvain = all_partitions[0].len();
        let mut optima = Vec::with_capacity(t_grid.len());
        let mut scores = Vec::with_capacity(t_grid.len());
        let mut best_run = Vec::with_capacity(t_grid.len());
        let mut dispersion = Vec::with_capacity(t_grid.len());
        for (parts, sc) in all_partitions.iter().zip(&all_scores) {
            if parts.len() != n_louvain || sc.len() != n_louvain || n_louvain == 0 {
                return Err(Error::Input("every time needs the same positive number of runs".into()));
            }
            let mut best = 0;
            for (s, &v) in sc.iter().enumerate() {
                if v > sc[best] {
                    best = s;
                }
            }
            optima.push(parts[best].clone());
            scores.push(sc[best]);
            best_run.push(best);
            dispersion.push(avg_vi_at_time(parts)?);
        }
        let vi_tt = vi_matrix(&optima)?;
        Ok(ScanResult {
            t_grid,
            optima,
            scores,
            best_run,
            dispersion,
            all_partitions,
            all_scores,
            vi_tt,
            n_louvain,
            seed,
        })
    }
}

/// Runs `n_louvain` optimisations at every time of `t_grid`.
///
/// Run `s` at time index `a` is seeded with `derive_seed(seed, [a, s])`, so the
/// result is identical for any thread count.
pub fn scan(g: &Graph, t_grid: &[f64], n_louvain: usize, seed: u64) -> Result<ScanResult> {
    if t_grid.is_empty() {
        return Err(Error::Parameter("empty time grid".into()));
    }
    if n_louvain == 0 {
        return Err(Error::Parameter("n_louvain must be positive".into()));
    }
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) || !(t_grid[0] > 0.0) {
        return Err(Error::Parameter("time grid must be positive and strictly increasing".into()));
    }
    let ops = diffusion_operators(g)?;
    let mut all_partitions = Vec::with_capacity(t_grid.len());
    let mut all_scores = Vec::with_capacity(t_grid.len());
    for (a, &t) in t_grid.iter().enumerate() {
        let ac = transition_at_time(&ops, t)?;
        let opt = StabilityOptimizer::new(&ac.b, g)?;
        let runs: Vec<(Partition, f64)> = (0..n_louvain)
            .into_par_iter()
            .map(|s| opt.run(derive_seed(seed, &[a as u64, s as u64])))
            .collect();
        let (parts, scores): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
        all_partitions.push(parts);
        all_scores.push(scores);
    }
    ScanResult::from_runs(t_grid.to_vec(), all_partitions, all_scores, seed)
}
