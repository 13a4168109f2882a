//! Slow, direct reference implementations used to check the library.

#![allow(dead_code)]

use std::collections::HashMap;

use mscluster_core::{Graph, Partition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, max_groups: usize) -> Vec<usize> {
    let c = rng.random_range(1..=max_groups);
    (0..n).map(|_| rng.random_range(0..c)).collect()
}

fn counts(labels: &[usize]) -> HashMap<usize, usize> {
    let mut m = HashMap::new();
    for &l in labels {
        *m.entry(l).or_insert(0) += 1;
    }
    m
}

fn joint(a: &[usize], b: &[usize]) -> HashMap<(usize, usize), usize> {
    let mut m = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *m.entry((x, y)).or_insert(0) += 1;
    }
    m
}

fn h(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    counts(labels)
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let (ca, cb) = (counts(a), counts(b));
    joint(a, b)
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = c as f64 / n;
            let px = ca[&x] as f64 / n;
            let py = cb[&y] as f64 / n;
            pxy * (pxy / (px * py)).ln()
        })
        .sum()
}

pub fn vi(a: &[usize], b: &[usize]) -> f64 {
    (h(a) + h(b) - 2.0 * mi(a, b)).max(0.0)
}

pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    let (ha, hb) = (h(a), h(b));
    if ha == 0.0 && hb == 0.0 {
        1.0
    } else if ha == 0.0 || hb == 0.0 {
        0.0
    } else {
        (mi(a, b) / (ha * hb).sqrt()).clamp(0.0, 1.0)
    }
}

/// Pair counting over all `n(n-1)/2` pairs.
pub fn ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut in_a, mut in_b) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            in_a += sa as u8 as f64;
            in_b += sb as u8 as f64;
            both += (sa && sb) as u8 as f64;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let expected = in_a * in_b / pairs;
    let max = 0.5 * (in_a + in_b);
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

pub fn purity(pred: &[usize], truth: &[usize]) -> f64 {
    let mut by_group: HashMap<usize, Vec<usize>> = HashMap::new();
    for (&p, &t) in pred.iter().zip(truth) {
        by_group.entry(p).or_default().push(t);
    }
    let hits: usize = by_group.values().map(|ts| *counts(ts).values().max().unwrap()).sum();
    hits as f64 / pred.len() as f64
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(pos: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for g in 0..=max + 1 {
            cur[pos] = g;
            rec(pos + 1, max.max(g), cur, out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = vec![0; n];
    rec(1, 0, &mut cur, &mut out);
    out
}

/// `sum over same-group pairs (i, j) of b[i][j]`, including `i == j`.
pub fn stability(b: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = labels.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                s += b[i][j];
            }
        }
    }
    s
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| points.iter().map(|q| euclid(p, q)).collect())
        .collect()
}

/// k-th smallest distance to another point.
pub fn kth(d: &[Vec<f64>], i: usize, k: usize) -> f64 {
    let mut row: Vec<f64> = (0..d.len()).filter(|&j| j != i).map(|j| d[i][j]).collect();
    row.sort_by(f64::total_cmp);
    row[k - 1]
}

pub fn pairs_where(n: usize, keep: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if keep(i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn eps_edges(d: &[Vec<f64>], eps: f64) -> Vec<(usize, usize)> {
    pairs_where(d.len(), |i, j| d[i][j] < eps)
}

pub fn knn_edges(d: &[Vec<f64>], k: usize) -> Vec<(usize, usize)> {
    let n = d.len();
    let near = |i: usize, j: usize| {
        // rank of j among i's neighbours, ties broken by index
        let rank = (0..n)
            .filter(|&m| m != i && m != j)
            .filter(|&m| d[i][m] < d[i][j] || (d[i][m] == d[i][j] && m < j))
            .count();
        rank < k
    };
    pairs_where(n, |i, j| near(i, j) || near(j, i))
}

pub fn cknn_edges(d: &[Vec<f64>], k: usize, delta: f64) -> Vec<(usize, usize)> {
    let dk: Vec<f64> = (0..d.len()).map(|i| kth(d, i, k)).collect();
    pairs_where(d.len(), |i, j| d[i][j] < delta * (dk[i] * dk[j]).sqrt())
}

/// Minimax path distance over the complete graph (Floyd-Warshall), which
/// equals the largest edge on the MST path.
pub fn minimax(d: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = d.len();
    let mut m = d.to_vec();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = m[i][k].max(m[k][j]);
                if via < m[i][j] {
                    m[i][j] = via;
                }
            }
        }
    }
    m
}

pub fn rmst_edges(d: &[Vec<f64>], k: usize, gamma: f64) -> Vec<(usize, usize)> {
    let dk: Vec<f64> = (0..d.len()).map(|i| kth(d, i, k)).collect();
    let mm = minimax(d);
    pairs_where(d.len(), |i, j| d[i][j] < mm[i][j] + gamma * (dk[i] + dk[j]))
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    r
}

/// Tries every `(n-1)`-subset of the complete graph's edges.
pub fn exhaustive_mst(d: &[Vec<f64>]) -> (f64, Vec<(usize, usize)>) {
    let n = d.len();
    let all = pairs_where(n, |_, _| true);
    let m = all.len();
    let mut best = (f64::INFINITY, Vec::new());
    let mut pick: Vec<usize> = (0..n - 1).collect();
    loop {
        let mut parent: Vec<usize> = (0..n).collect();
        let mut acyclic = true;
        for &e in &pick {
            let (a, b) = all[e];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                acyclic = false;
                break;
            }
            parent[ra] = rb;
        }
        if acyclic {
            let mut ws: Vec<f64> = pick.iter().map(|&e| d[all[e].0][all[e].1]).collect();
            ws.sort_by(f64::total_cmp);
            let w: f64 = ws.iter().sum();
            if w < best.0 {
                let mut edges: Vec<(usize, usize)> = pick.iter().map(|&e| all[e]).collect();
                edges.sort();
                best = (w, edges);
            }
        }
        // next combination
        let r = pick.len();
        let mut i = r;
        while i > 0 && pick[i - 1] == m - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return best;
        }
        pick[i - 1] += 1;
        for j in i..r {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

/// A random spanning tree plus each remaining pair with probability `p`.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.random_range(0..i), i));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Two 4-cliques joined by a single edge.
pub fn two_cliques() -> Graph {
    let mut edges = pairs_where(4, |_, _| true);
    edges.extend(pairs_where(4, |_, _| true).into_iter().map(|(i, j)| (i + 4, j + 4)));
    edges.push((3, 4));
    Graph::from_edges(8, edges).unwrap()
}

pub fn edge_list(g: &Graph) -> Vec<(usize, usize)> {
    g.edges().collect()
}

pub fn labels_of(p: &Partition) -> Vec<usize> {
    p.assignment().to_vec()
}
