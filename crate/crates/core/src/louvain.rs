//! Markov Stability of a partition and its greedy maximisation.
//!
//! The stability of a partition is the sum of `B(t)` over all node pairs that
//! share a group. It is maximised with a Louvain-style optimiser that treats
//! `B(t)` as a dense pairwise gain matrix: nodes move between neighbouring
//! groups while the score improves, then groups are merged into super-nodes
//! (summing the corresponding blocks of `B`) and the process repeats.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Autocovariance, DenseMatrix};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

/// Sum of `b` over all pairs of nodes in the same group.
pub fn stability_of(b: &DenseMatrix, p: &Partition) -> Result<f64> {
    p.check_len(b.dim())?;
    let mut total = 0.0;
    for group in p.groups() {
        for &i in &group {
            let row = b.row(i);
            total += group.iter().map(|&j| row[j]).sum::<f64>();
        }
    }
    Ok(total)
}

/// Markov Stability `r(t, g)` of a partition.
pub fn markov_stability(b: &Autocovariance, p: &Partition) -> Result<f64> {
    stability_of(&b.b, p)
}

/// Result of one optimiser run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationOutcome {
    pub partition: Partition,
    pub score: f64,
    pub t: f64,
    pub run_index: usize,
    pub seed: u64,
}

/// Gains at or below this multiple of the largest `|B_ij|` count as no gain.
const RELATIVE_TOLERANCE: f64 = 1e-12;

const MAX_SWEEPS: usize = 10_000;

/// Louvain optimiser for a fixed quality matrix. Candidate moves for a node
/// are the groups of its graph neighbours (plus a fresh empty group).
pub struct StabilityOptimizer<'a> {
    b: &'a DenseMatrix,
    graph: &'a Graph,
    tol: f64,
}

impl<'a> StabilityOptimizer<'a> {
    pub fn new(b: &'a DenseMatrix, graph: &'a Graph) -> Result<Self> {
        if b.dim() != graph.node_count() {
            return Err(Error::Input(format!(
                "quality matrix is {}x{} but the graph has {} nodes",
                b.dim(),
                b.dim(),
                graph.node_count()
            )));
        }
        Ok(StabilityOptimizer {
            b,
            graph,
            tol: RELATIVE_TOLERANCE * b.max_abs(),
        })
    }

    /// One seeded run; returns the partition and its score on the original matrix.
    pub fn run(&self, seed: u64) -> (Partition, f64) {
        let n = self.b.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // node -> super-node at the current level
        let mut membership: Vec<usize> = (0..n).collect();

        let adj: Vec<Vec<usize>> = (0..n).map(|i| self.graph.neighbors(i).to_vec()).collect();
        let mut level = Level {
            n,
            mat: std::borrow::Cow::Borrowed(self.b.as_slice()),
            adj,
        };
        loop {
            let (comm, moved) = level.local_moves(&mut rng, self.tol);
            if !moved {
                break;
            }
            let (labels, c) = renumber(&comm);
            for m in membership.iter_mut() {
                *m = labels[*m];
            }
            if c == 1 {
                break;
            }
            level = level.aggregate(&labels, c);
        }
        let p = Partition::from_labels(&membership);
        let score = stability_of(self.b, &p).expect("lengths match");
        (p, score)
    }
}

/// Optimises the stability of `b` with a single seeded run.
pub fn louvain_optimize(b: &Autocovariance, graph: &Graph, seed: u64) -> Result<OptimizationOutcome> {
    let opt = StabilityOptimizer::new(&b.b, graph)?;
    let (partition, score) = opt.run(seed);
    Ok(OptimizationOutcome {
        partition,
        score,
        t: b.t,
        run_index: 0,
        seed,
    })
}

struct Level<'m> {
    n: usize,
    mat: std::borrow::Cow<'m, [f64]>,
    adj: Vec<Vec<usize>>,
}

impl Level<'_> {
    /// Greedy node moves until a full sweep changes nothing. Returns the group
    /// label of every node and whether anything moved.
    fn local_moves(&self, rng: &mut ChaCha8Rng, tol: f64) -> (Vec<usize>, bool) {
        let n = self.n;
        let mut comm: Vec<usize> = (0..n).collect();
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut pos = vec![0usize; n];
        // Empty labels, kept sorted descending so pop() yields the smallest.
        let mut free: Vec<usize> = Vec::new();
        let mut mark = vec![usize::MAX; n];
        let mut candidates: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        let mut moved_any = false;
        #[cfg(debug_assertions)]
        let mut running = self.diag_sum();

        for _sweep in 0..MAX_SWEEPS {
            order.shuffle(rng);
            let mut moved = false;
            for &i in &order {
                let row = &self.mat[i * n..(i + 1) * n];
                let a = comm[i];
                let k_own: f64 = members[a].iter().filter(|&&j| j != i).map(|&j| row[j]).sum();

                candidates.clear();
                for &j in &self.adj[i] {
                    let s = comm[j];
                    if s != a && mark[s] != i {
                        mark[s] = i;
                        candidates.push(s);
                    }
                }
                let mut best = a;
                let mut best_gain = 0.0;
                for &s in &candidates {
                    let k_s: f64 = members[s].iter().map(|&j| row[j]).sum();
                    let gain = 2.0 * (k_s - k_own);
                    if gain > best_gain || (gain == best_gain && best != a && s < best) {
                        best = s;
                        best_gain = gain;
                    }
                }
                if members[a].len() > 1 {
                    let gain = -2.0 * k_own;
                    if gain > best_gain {
                        best_gain = gain;
                        best = *free.last().expect("a shared group implies an empty label");
                    }
                }
                for &s in &candidates {
                    mark[s] = usize::MAX;
                }
                if best == a || best_gain <= tol {
                    continue;
                }
                #[cfg(debug_assertions)]
                {
                    running += best_gain;
                }

                // remove i from a
                let p = pos[i];
                members[a].swap_remove(p);
                if let Some(&moved_node) = members[a].get(p) {
                    pos[moved_node] = p;
                }
                if members[a].is_empty() {
                    let at = free.partition_point(|&x| x > a);
                    free.insert(at, a);
                }
                if members[best].is_empty() {
                    let at = free.iter().position(|&x| x == best).expect("empty label is free");
                    free.remove(at);
                }
                pos[i] = members[best].len();
                members[best].push(i);
                comm[i] = best;
                moved = true;
                moved_any = true;
            }
            if !moved {
                break;
            }
        }
        #[cfg(debug_assertions)]
        {
            let check = self.score_of(&comm);
            debug_assert!(
                (check - running).abs() <= 1e-9 * (1.0 + check.abs()),
                "incremental score {running} drifted from {check}"
            );
        }
        (comm, moved_any)
    }

    #[cfg(debug_assertions)]
    fn diag_sum(&self) -> f64 {
        (0..self.n).map(|i| self.mat[i * self.n + i]).sum()
    }

    #[cfg(debug_assertions)]
    fn score_of(&self, comm: &[usize]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if comm[i] == comm[j] {
                    s += self.mat[i * n + j];
                }
            }
        }
        s
    }

    /// Collapses each group into one node. `labels[i]` is the dense group index
    /// of node `i`; the new matrix holds block sums of the old one.
    fn aggregate(&self, labels: &[usize], c: usize) -> Level<'static> {
        let n = self.n;
        let mut mat = vec![0.0; c * c];
        for i in 0..n {
            let row = &self.mat[i * n..(i + 1) * n];
            let out = &mut mat[labels[i] * c..(labels[i] + 1) * c];
            for (j, &v) in row.iter().enumerate() {
                out[labels[j]] += v;
            }
        }
        let mut adj = vec![Vec::new(); c];
        for i in 0..n {
            for &j in &self.adj[i] {
                if labels[i] != labels[j] {
                    adj[labels[i]].push(labels[j]);
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Level {
            n: c,
            mat: std::borrow::Cow::Owned(mat),
            adj,
        }
    }
}

/// Maps arbitrary labels to `0..c` by first appearance.
fn renumber(comm: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; comm.len()];
    let mut next = 0;
    let labels = comm
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect();
    (labels, next)
}
