//! Partition comparison: variation of information, NMI, ARI and purity.
//!
//! Entropies use the natural logarithm throughout, so the variation of
//! information between partitions of `n` nodes is bounded by `ln n`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Co-occurrence counts of two partitions of the same node set.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<usize>,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
    n: usize,
}

impl ContingencyTable {
    pub fn new(a: &Partition, b: &Partition) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Input(format!(
                "partitions cover {} and {} nodes",
                a.len(),
                b.len()
            )));
        }
        let (rows, cols) = (a.num_groups(), b.num_groups());
        let mut counts = vec![0usize; rows * cols];
        for (&u, &v) in a.assignment().iter().zip(b.assignment()) {
            counts[u * cols + v] += 1;
        }
        Ok(ContingencyTable {
            rows,
            cols,
            counts,
            row_sums: a.sizes(),
            col_sums: b.sizes(),
            n: a.len(),
        })
    }

    pub fn total(&self) -> usize {
        self.n
    }

    pub fn count(&self, u: usize, v: usize) -> usize {
        self.counts[u * self.cols + v]
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.rows).flat_map(move |u| {
            (0..self.cols)
                .map(move |v| (u, v, self.count(u, v)))
                .filter(|&(_, _, c)| c > 0)
        })
    }

    pub fn row_entropy(&self) -> f64 {
        entropy(&self.row_sums, self.n)
    }

    pub fn col_entropy(&self) -> f64 {
        entropy(&self.col_sums, self.n)
    }

    pub fn mutual_information(&self) -> f64 {
        let n = self.n as f64;
        let mi: f64 = self
            .cells()
            .map(|(u, v, c)| {
                let c = c as f64;
                let (a, b) = (self.row_sums[u] as f64, self.col_sums[v] as f64);
                c / n * (n * c / (a * b)).ln()
            })
            .sum();
        mi.max(0.0)
    }

    /// `H(a|b) + H(b|a)`, summed cell by cell so every term is non-negative.
    pub fn variation_of_information(&self) -> f64 {
        let n = self.n as f64;
        let vi = self
            .cells()
            .map(|(u, v, c)| {
                let c = c as f64;
                let (a, b) = (self.row_sums[u] as f64, self.col_sums[v] as f64);
                -c / n * ((c / a).ln() + (c / b).ln())
            })
            .sum::<f64>();
        if vi > 0.0 {
            vi
        } else {
            0.0
        }
    }
}

fn entropy(sizes: &[usize], n: usize) -> f64 {
    let n = n as f64;
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

pub fn variation_of_information(a: &Partition, b: &Partition) -> Result<f64> {
    Ok(ContingencyTable::new(a, b)?.variation_of_information())
}

/// Mutual information normalised by the geometric mean of the entropies.
/// Two single-group partitions score 1; one single-group partition against
/// any other scores 0.
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let (ha, hb) = (t.row_entropy(), t.col_entropy());
    Ok(match (ha > 0.0, hb > 0.0) {
        (false, false) => 1.0,
        (true, true) => (t.mutual_information() / (ha * hb).sqrt()).clamp(0.0, 1.0),
        _ => 0.0,
    })
}

/// Hubert-Arabie adjusted Rand index.
pub fn ari(a: &Partition, b: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    if t.total() < 2 {
        return Err(Error::Input("ARI needs at least 2 nodes".into()));
    }
    let index: f64 = t.cells().map(|(_, _, c)| comb2(c)).sum();
    let sa: f64 = t.row_sums().iter().copied().map(comb2).sum();
    let sb: f64 = t.col_sums().iter().copied().map(comb2).sum();
    let expected = sa * sb / comb2(t.total());
    let max_index = 0.5 * (sa + sb);
    let denom = max_index - expected;
    if denom == 0.0 {
        // Both partitions are all-singletons or both are a single group.
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Fraction of nodes whose predicted group's majority class matches their own.
pub fn purity(pred: &Partition, truth: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    let hits: usize = (0..pred.num_groups())
        .map(|u| (0..truth.num_groups()).map(|v| t.count(u, v)).max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / t.total() as f64)
}

/// Mean VI over all ordered pairs of distinct runs. A single run gives 0.
pub fn avg_vi_at_time(partitions: &[Partition]) -> Result<f64> {
    let n_runs = partitions.len();
    if n_runs == 0 {
        return Err(Error::Input("no partitions to compare".into()));
    }
    if n_runs == 1 {
        return Ok(0.0);
    }
    // Identical runs contribute zero, so compare each distinct partition once
    // and weight by multiplicity.
    let mut index: HashMap<&Partition, usize> = HashMap::new();
    let mut distinct: Vec<&Partition> = Vec::new();
    let mut mult: Vec<usize> = Vec::new();
    for p in partitions {
        p.check_len(partitions[0].len())?;
        match index.get(p) {
            Some(&k) => mult[k] += 1,
            None => {
                index.insert(p, distinct.len());
                distinct.push(p);
                mult.push(1);
            }
        }
    }
    let d = distinct.len();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| ((a + 1)..d).map(move |b| (a, b))).collect();
    let total: f64 = pairs
        .par_iter()
        .map(|&(a, b)| {
            let vi = variation_of_information(distinct[a], distinct[b]).expect("lengths checked");
            2.0 * (mult[a] * mult[b]) as f64 * vi
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total / (n_runs * (n_runs - 1)) as f64)
}

/// Symmetric matrix of pairwise VI between the given partitions, row-major.
pub fn vi_matrix(optima: &[Partition]) -> Result<Vec<f64>> {
    let k = optima.len();
    if k == 0 {
        return Err(Error::Input("no partitions to compare".into()));
    }
    for p in optima {
        p.check_len(optima[0].len())?;
    }
    let rows: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|a| {
            (0..k)
                .map(|b| {
                    if b <= a {
                        0.0
                    } else {
                        variation_of_information(&optima[a], &optima[b]).expect("lengths checked")
                    }
                })
                .collect()
        })
        .collect();
    let mut out = vec![0.0; k * k];
    for a in 0..k {
        for b in (a + 1)..k {
            out[a * k + b] = rows[a][b];
            out[b * k + a] = rows[a][b];
        }
    }
    Ok(out)
}
