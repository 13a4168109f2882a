//! Robust scales and partition selection from a completed scan.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{ari, nmi};
use crate::partition::Partition;
use crate::scan::ScanResult;

/// A Markov-time interval over which the optimum is stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustScale {
    pub t_start: f64,
    pub t_end: f64,
    /// Grid indices of the interval, inclusive.
    pub start_index: usize,
    pub end_index: usize,
    pub partition: Partition,
    pub c: usize,
    /// `ln(t_end / t_start)`.
    pub persistence: f64,
    pub mean_block_vi: f64,
    pub mean_dispersion: f64,
    /// Fraction of the interval's optima equal to `partition`.
    pub modal_share: f64,
}

/// Thresholds for [`find_robust_scales`]. `None` fields take their defaults,
/// which depend on `n`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionParams {
    pub min_persistence: Option<f64>,
    pub block_vi: Option<f64>,
    pub dispersion: Option<f64>,
}

/// Thresholds with every default filled in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub min_persistence: f64,
    pub block_vi: f64,
    pub dispersion: f64,
}

impl SelectionParams {
    pub fn resolve(&self, n: usize) -> Result<Thresholds> {
        let ln_n = (n.max(2) as f64).ln();
        let th = Thresholds {
            min_persistence: self.min_persistence.unwrap_or(0.5 * std::f64::consts::LN_10),
            block_vi: self.block_vi.unwrap_or(0.1 * ln_n),
            dispersion: self.dispersion.unwrap_or(0.05 * ln_n),
        };
        for (name, v) in [
            ("min_persistence", th.min_persistence),
            ("block VI threshold", th.block_vi),
            ("dispersion threshold", th.dispersion),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(th)
    }
}

/// Segments the scan into robust scales, sorted by descending persistence.
///
/// Candidate runs have constant community count and consecutive optima within
/// `block_vi` of each other. Inside each run the longest sub-interval whose
/// mean dispersion is within threshold and whose modal optimum holds a strict
/// majority is kept; the leftovers on either side are searched the same way.
pub fn find_robust_scales(sr: &ScanResult, params: &SelectionParams) -> Result<Vec<RobustScale>> {
    let nt = sr.n_times();
    if nt == 0 || sr.optima.is_empty() {
        return Err(Error::Input("empty scan".into()));
    }
    let th = params.resolve(sr.n_nodes())?;
    let counts = sr.community_counts();
    let mut scales = Vec::new();
    let mut start = 0;
    for a in 1..=nt {
        let breaks = a == nt || counts[a] != counts[a - 1] || !(sr.vi_tt(a - 1, a) <= th.block_vi);
        if breaks {
            split_run(sr, &th, start, a - 1, &mut scales);
            start = a;
        }
    }
    scales.sort_by(|x, y| {
        y.persistence
            .total_cmp(&x.persistence)
            .then(x.start_index.cmp(&y.start_index))
    });
    Ok(scales)
}

fn split_run(sr: &ScanResult, th: &Thresholds, lo: usize, hi: usize, out: &mut Vec<RobustScale>) {
    if hi <= lo {
        return;
    }
    let mut best: Option<(usize, usize)> = None;
    for a in lo..hi {
        for b in (a + 1)..=hi {
            if best.is_some_and(|(x, y)| b - a <= y - x) {
                continue;
            }
            let mean_disp = sr.dispersion[a..=b].iter().sum::<f64>() / (b - a + 1) as f64;
            if mean_disp <= th.dispersion && modal(&sr.optima[a..=b]).1 * 2 > b - a + 1 {
                best = Some((a, b));
            }
        }
    }
    let Some((a, b)) = best else { return };
    let scale = make_scale(sr, a, b);
    if scale.persistence >= th.min_persistence {
        out.push(scale);
    }
    if a > lo {
        split_run(sr, th, lo, a - 1, out);
    }
    if b < hi {
        split_run(sr, th, b + 1, hi, out);
    }
}

fn modal(parts: &[Partition]) -> (&Partition, usize) {
    let mut counts: Vec<(&Partition, usize)> = Vec::new();
    for p in parts {
        match counts.iter_mut().find(|(q, _)| *q == p) {
            Some(e) => e.1 += 1,
            None => counts.push((p, 1)),
        }
    }
    let mut best = 0;
    for (i, e) in counts.iter().enumerate() {
        if e.1 > counts[best].1 {
            best = i;
        }
    }
    counts[best]
}

fn make_scale(sr: &ScanResult, a: usize, b: usize) -> RobustScale {
    let len = b - a + 1;
    let (rep, count) = modal(&sr.optima[a..=b]);
    let mut block = 0.0;
    for x in a..=b {
        for y in a..=b {
            if x != y {
                block += sr.vi_tt(x, y);
            }
        }
    }
    RobustScale {
        t_start: sr.t_grid[a],
        t_end: sr.t_grid[b],
        start_index: a,
        end_index: b,
        c: rep.num_groups(),
        partition: rep.clone(),
        persistence: (sr.t_grid[b] / sr.t_grid[a]).ln(),
        mean_block_vi: block / (len * (len - 1)) as f64,
        mean_dispersion: sr.dispersion[a..=b].iter().sum::<f64>() / len as f64,
        modal_share: count as f64 / len as f64,
    }
}

/// Outcome of the unsupervised choice among robust scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleChoice {
    /// Index into the scale list of the reported scale.
    pub primary: usize,
    /// Indices of every scale within 10% of the top persistence, finest first.
    pub tied: Vec<usize>,
}

/// Picks the most persistent scale, ignoring the trivial partitions into one
/// group and into singletons. Scales within 10% of the top persistence are
/// reported together and the finest of them is primary.
pub fn choose_scale(scales: &[RobustScale], n: usize) -> Option<ScaleChoice> {
    let eligible: Vec<usize> = (0..scales.len())
        .filter(|&i| scales[i].c > 1 && scales[i].c < n)
        .collect();
    let top = eligible
        .iter()
        .map(|&i| scales[i].persistence)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut tied: Vec<usize> = eligible
        .into_iter()
        .filter(|&i| scales[i].persistence >= 0.9 * top)
        .collect();
    tied.sort_by(|&x, &y| {
        scales[y]
            .c
            .cmp(&scales[x].c)
            .then(scales[x].t_start.total_cmp(&scales[y].t_start))
    });
    Some(ScaleChoice {
        primary: *tied.first()?,
        tied,
    })
}

/// Longest contiguous run of grid indices in `times` (sorted, distinct).
fn longest_run(times: &[usize]) -> (usize, usize) {
    let (mut best, mut start) = ((times[0], times[0]), times[0]);
    for w in times.windows(2) {
        if w[1] != w[0] + 1 {
            start = w[1];
        }
        if w[1] - start > best.1 - best.0 {
            best = (start, w[1]);
        }
    }
    best
}

/// A stored partition chosen for a prescribed community count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selected {
    pub partition: Partition,
    pub persistence: f64,
    pub score: f64,
    pub t_start: f64,
    pub t_end: f64,
}

/// Among all stored partitions with exactly `c_target` groups, returns the
/// one appearing over the longest contiguous stretch of times, ties broken by
/// the best stability it achieved.
pub fn select_partition_with_c(sr: &ScanResult, c_target: usize) -> Result<Selected> {
    let mut seen: BTreeMap<&Partition, (Vec<usize>, f64)> = BTreeMap::new();
    let mut available = std::collections::BTreeSet::new();
    for (a, (parts, scores)) in sr.all_partitions.iter().zip(&sr.all_scores).enumerate() {
        for (p, &s) in parts.iter().zip(scores) {
            available.insert(p.num_groups());
            if p.num_groups() != c_target {
                continue;
            }
            let e = seen.entry(p).or_insert_with(|| (Vec::new(), f64::NEG_INFINITY));
            if e.0.last() != Some(&a) {
                e.0.push(a);
            }
            e.1 = e.1.max(s);
        }
    }
    let mut best: Option<Selected> = None;
    for (p, (times, score)) in seen {
        let (a, b) = longest_run(&times);
        let persistence = (sr.t_grid[b] / sr.t_grid[a]).ln();
        let better = best.as_ref().is_none_or(|cur| {
            persistence > cur.persistence || (persistence == cur.persistence && score > cur.score)
        });
        if better {
            best = Some(Selected {
                partition: p.clone(),
                persistence,
                score,
                t_start: sr.t_grid[a],
                t_end: sr.t_grid[b],
            });
        }
    }
    best.ok_or(Error::NotFound {
        target: c_target,
        available: available.into_iter().collect(),
    })
}

/// The optimum `g*(t)` closest to `truth` by NMI, earliest time on ties.
pub fn best_partition_vs_truth(sr: &ScanResult, truth: &Partition) -> Result<(Partition, f64, f64)> {
    if sr.optima.is_empty() {
        return Err(Error::Input("empty scan".into()));
    }
    let mut best = 0;
    let mut best_nmi = f64::NEG_INFINITY;
    for (a, p) in sr.optima.iter().enumerate() {
        let v = nmi(p, truth)?;
        if v > best_nmi {
            best = a;
            best_nmi = v;
        }
    }
    let p = sr.optima[best].clone();
    let r = ari(&p, truth)?;
    Ok((p, best_nmi, r))
}
