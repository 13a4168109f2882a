//! Unweighted similarity graphs built from a distance matrix.
//!
//! Neighbourhood constructions (epsilon-ball, kNN, CkNN) connect points that
//! are locally close. MST-based constructions (MST, PMST, RMST) start from the
//! minimum spanning tree and add edges according to global path structure.
//! All constructions return a [`Graph`] whose node `i` is sample `i`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use petgraph::unionfind::UnionFind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{kth_neighbor_distances, pairwise_distances, Dataset, DistanceMatrix};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Undirected, unweighted simple graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    /// Builds a graph from an edge list. Duplicate and reversed edges are
    /// merged; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Input(format!("edge ({i},{j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(Error::Input(format!("self-loop at node {i}")));
            }
            adj[i].push(j);
            adj[j].push(i);
        }
        Ok(Self::from_adjacency(adj))
    }

    fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let m = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Graph { adj, m }
    }

    /// Builds the graph containing edge `(i, j)` whenever `connect(i, j)`
    /// holds for `i < j`.
    fn from_predicate(n: usize, connect: impl Fn(usize, usize) -> bool + Sync) -> Self {
        let upper: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).filter(|&j| connect(i, j)).collect())
            .collect();
        let mut adj = vec![Vec::new(); n];
        for (i, row) in upper.into_iter().enumerate() {
            for j in row {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        Self::from_adjacency(adj)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.m as f64 / self.node_count().max(1) as f64
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn union(&self, other: &Graph) -> Result<Graph> {
        if self.node_count() != other.node_count() {
            return Err(Error::Input(format!(
                "cannot union graphs on {} and {} nodes",
                self.node_count(),
                other.node_count()
            )));
        }
        let adj = self
            .adj
            .iter()
            .zip(&other.adj)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        Ok(Self::from_adjacency(adj))
    }

    /// True when every edge of `self` is also an edge of `other`.
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.node_count() == other.node_count() && self.edges().all(|(i, j)| other.has_edge(i, j))
    }

    /// Component label of every node, numbered by BFS discovery order.
    pub fn components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        let mut next = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }
}

/// Graph construction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMethod {
    #[serde(rename = "eps")]
    EpsBall,
    Knn,
    Cknn,
    Mst,
    Pmst,
    Rmst,
}

impl fmt::Display for GraphMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphMethod::EpsBall => "eps",
            GraphMethod::Knn => "knn",
            GraphMethod::Cknn => "cknn",
            GraphMethod::Mst => "mst",
            GraphMethod::Pmst => "pmst",
            GraphMethod::Rmst => "rmst",
        })
    }
}

impl FromStr for GraphMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eps" | "eps_ball" | "eps-ball" | "epsilon" => Ok(GraphMethod::EpsBall),
            "knn" => Ok(GraphMethod::Knn),
            "cknn" => Ok(GraphMethod::Cknn),
            "mst" => Ok(GraphMethod::Mst),
            "pmst" => Ok(GraphMethod::Pmst),
            "rmst" => Ok(GraphMethod::Rmst),
            other => Err(Error::Parameter(format!("unknown graph method {other:?}"))),
        }
    }
}

/// Parameters for [`build_graph`]. Fields a method does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphBuildParams {
    pub method: GraphMethod,
    /// Neighbour count for kNN/CkNN and the local scale `d^k` of RMST/PMST.
    pub k: usize,
    /// CkNN sparsity.
    pub delta: f64,
    /// RMST local-density weight.
    pub gamma: f64,
    /// Epsilon-ball radius; `None` means the mean distance to the 7th neighbour.
    pub eps: Option<f64>,
    /// PMST noise level `r`; each point gets standard deviation `r * d^k(i)`.
    pub noise_ratio: f64,
    /// Number of perturbed MSTs in the PMST union.
    pub ensemble_size: usize,
    pub seed: u64,
    /// Union with the MST when the graph is disconnected.
    pub connect: bool,
}

impl Default for GraphBuildParams {
    fn default() -> Self {
        GraphBuildParams {
            method: GraphMethod::Cknn,
            k: 7,
            delta: 1.0,
            gamma: 0.25,
            eps: None,
            noise_ratio: 0.5,
            ensemble_size: 20,
            seed: 0,
            connect: true,
        }
    }
}

impl GraphBuildParams {
    pub fn new(method: GraphMethod) -> Self {
        let mut p = GraphBuildParams {
            method,
            ..Default::default()
        };
        if matches!(method, GraphMethod::Pmst | GraphMethod::Rmst) {
            p.k = 1;
        }
        p
    }

    /// Checks the parameters the chosen method reads against a graph on `n` nodes.
    pub fn validate(&self, n: usize) -> Result<()> {
        let needs_k = !matches!(self.method, GraphMethod::Mst | GraphMethod::EpsBall);
        if needs_k && (self.k == 0 || self.k >= n) {
            return Err(Error::Parameter(format!(
                "k={} must lie in [1, {}]",
                self.k,
                n.saturating_sub(1)
            )));
        }
        match self.method {
            GraphMethod::Cknn if !(self.delta > 0.0 && self.delta.is_finite()) => {
                Err(Error::Parameter(format!("delta={} must be positive", self.delta)))
            }
            GraphMethod::Rmst if !(self.gamma > 0.0 && self.gamma.is_finite()) => {
                Err(Error::Parameter(format!("gamma={} must be positive", self.gamma)))
            }
            GraphMethod::EpsBall => match self.eps {
                Some(e) if !(e > 0.0 && e.is_finite()) => {
                    Err(Error::Parameter(format!("eps={e} must be positive")))
                }
                _ => Ok(()),
            },
            GraphMethod::Pmst if !(0.0..=1.0).contains(&self.noise_ratio) => Err(
                Error::Parameter(format!("noise ratio {} must lie in [0, 1]", self.noise_ratio)),
            ),
            GraphMethod::Pmst if self.ensemble_size == 0 => {
                Err(Error::Parameter("ensemble size must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Builds the graph requested by `params`, followed by [`ensure_connected`]
/// when `params.connect` is set.
pub fn build_graph(ds: &Dataset, dm: &DistanceMatrix, params: &GraphBuildParams) -> Result<Graph> {
    params.validate(dm.len())?;
    let g = match params.method {
        GraphMethod::EpsBall => {
            let eps = match params.eps {
                Some(e) => e,
                None => default_eps(dm)?,
            };
            build_eps_ball(dm, eps)?
        }
        GraphMethod::Knn => build_knn(dm, params.k)?,
        GraphMethod::Cknn => build_cknn(dm, params.k, params.delta)?,
        GraphMethod::Mst => build_mst(dm),
        GraphMethod::Pmst => build_pmst(ds, params.k, params.noise_ratio, params.ensemble_size, params.seed)?,
        GraphMethod::Rmst => build_rmst(dm, params.k, params.gamma)?,
    };
    if params.connect {
        ensure_connected(&g, dm)
    } else {
        Ok(g)
    }
}

/// Mean distance to the 7th nearest neighbour (or the farthest, for tiny sets).
pub fn default_eps(dm: &DistanceMatrix) -> Result<f64> {
    Ok(kth_neighbor_distances(dm, 7.min(dm.len() - 1))?.mean())
}

/// Connects every pair closer than `eps`.
pub fn build_eps_ball(dm: &DistanceMatrix, eps: f64) -> Result<Graph> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps={eps} must be positive")));
    }
    Ok(Graph::from_predicate(dm.len(), |i, j| dm.get(i, j) < eps))
}

/// Connects each point to its `k` nearest neighbours, symmetrised by union.
/// Equidistant neighbours are ranked by index.
pub fn build_knn(dm: &DistanceMatrix, k: usize) -> Result<Graph> {
    let n = dm.len();
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!("k={k} must lie in [1, {}]", n - 1)));
    }
    let lists: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut order = dm.neighbor_order(i);
            order.truncate(k);
            order
        })
        .collect();
    let mut adj = vec![Vec::new(); n];
    for (i, list) in lists.into_iter().enumerate() {
        for j in list {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    Ok(Graph::from_adjacency(adj))
}

/// Continuous kNN: connect `i, j` when `d(i,j) < delta * sqrt(d^k(i) d^k(j))`.
pub fn build_cknn(dm: &DistanceMatrix, k: usize, delta: f64) -> Result<Graph> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Parameter(format!("delta={delta} must be positive")));
    }
    let dk = kth_neighbor_distances(dm, k)?.dk;
    Ok(Graph::from_predicate(dm.len(), |i, j| {
        dm.get(i, j) < delta * (dk[i] * dk[j]).sqrt()
    }))
}

/// Kruskal's algorithm over all pairs, edges ordered by `(weight, i, j)`.
/// Returns the `n - 1` tree edges `(i, j, weight)` with `i < j`.
pub fn minimum_spanning_tree(dm: &DistanceMatrix) -> Vec<(usize, usize, f64)> {
    let n = dm.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((dm.get(i, j), i, j));
        }
    }
    pairs.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut uf = UnionFind::<usize>::new(n);
    let mut tree = Vec::with_capacity(n - 1);
    for (w, i, j) in pairs {
        if uf.union(i, j) {
            tree.push((i, j, w));
            if tree.len() == n - 1 {
                break;
            }
        }
    }
    tree
}

pub fn build_mst(dm: &DistanceMatrix) -> Graph {
    let tree = minimum_spanning_tree(dm);
    Graph::from_edges(dm.len(), tree.into_iter().map(|(i, j, _)| (i, j)))
        .expect("tree edges are in range")
}

/// Union of the MST with the MSTs of `ensemble_size` perturbed copies of the
/// data. Point `i` receives isotropic Gaussian noise with standard deviation
/// `noise_ratio * d^k(i)`. Realisation `r` draws from its own stream derived
/// from `(seed, r)`, so the result does not depend on scheduling.
pub fn build_pmst(
    ds: &Dataset,
    k: usize,
    noise_ratio: f64,
    ensemble_size: usize,
    seed: u64,
) -> Result<Graph> {
    if !(0.0..=1.0).contains(&noise_ratio) {
        return Err(Error::Parameter(format!("noise ratio {noise_ratio} must lie in [0, 1]")));
    }
    if ensemble_size == 0 {
        return Err(Error::Parameter("ensemble size must be positive".into()));
    }
    let dm = pairwise_distances(ds);
    let scale: Vec<f64> = kth_neighbor_distances(&dm, k)?
        .dk
        .into_iter()
        .map(|d| noise_ratio * d)
        .collect();
    let mut union = build_mst(&dm);
    let trees: Vec<Graph> = (0..ensemble_size)
        .into_par_iter()
        .map(|r| {
            let perturbed = perturb(ds, &scale, derive_seed(seed, &[r as u64]));
            build_mst(&pairwise_distances(&perturbed))
        })
        .collect();
    for t in &trees {
        union = union.union(t)?;
    }
    Ok(union)
}

/// Adds `N(0, scale[i]^2)` noise to every coordinate of sample `i`.
pub fn perturb(ds: &Dataset, scale: &[f64], seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = ds
        .samples()
        .zip(scale)
        .map(|(y, &s)| {
            y.iter()
                .map(|&v| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v + s * z
                })
                .collect()
        })
        .collect();
    let mut out = Dataset::new(ds.name(), rows).expect("same shape as the source");
    if let Some(l) = ds.labels() {
        out = out.with_labels(l.to_vec()).expect("same length");
    }
    out
}

/// For every pair, the largest edge weight on the MST path between them.
/// Row-major `n x n`; the diagonal is zero.
pub fn mst_path_max(dm: &DistanceMatrix) -> Vec<f64> {
    let n = dm.len();
    let mut tree_adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, j, w) in minimum_spanning_tree(dm) {
        tree_adj[i].push((j, w));
        tree_adj[j].push((i, w));
    }
    let mut out = vec![0.0f64; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(s, row)| {
        let mut seen = vec![false; n];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &(v, w) in &tree_adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    row[v] = row[u].max(w);
                    stack.push(v);
                }
            }
        }
    });
    out
}

/// Relaxed MST: connect `i, j` when
/// `d(i,j) < maxpath(i,j) + gamma * (d^k(i) + d^k(j))`.
pub fn build_rmst(dm: &DistanceMatrix, k: usize, gamma: f64) -> Result<Graph> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!("gamma={gamma} must be positive")));
    }
    let dk = kth_neighbor_distances(dm, k)?.dk;
    let n = dm.len();
    let path_max = mst_path_max(dm);
    Ok(Graph::from_predicate(n, |i, j| {
        dm.get(i, j) < path_max[i * n + j] + gamma * (dk[i] + dk[j])
    }))
}

/// Returns `g` unchanged when connected, otherwise its union with the MST.
pub fn ensure_connected(g: &Graph, dm: &DistanceMatrix) -> Result<Graph> {
    if g.node_count() != dm.len() {
        return Err(Error::Input(format!(
            "graph has {} nodes but the distance matrix has {}",
            g.node_count(),
            dm.len()
        )));
    }
    if g.is_connected() {
        return Ok(g.clone());
    }
    g.union(&build_mst(dm))
}
