//! Continuous-time random walk on a graph.
//!
//! For `M = D^-1 A` the walk's transition matrix at time `t` is
//! `P(t) = exp(-t (I - M))` and its autocovariance is
//! `B(t) = Pi P(t) - pi^T pi`. `M` is similar to the symmetric matrix
//! `S = D^-1/2 A D^-1/2`, so one eigendecomposition of `S` serves every `t`:
//!
//! ```text
//! B(t) = 1/2m * D^1/2 [ sum_{k>=2} exp(-t (1 - l_k)) v_k v_k^T ] D^1/2
//! ```
//!
//! The stationary mode `l_1 = 1`, `v_1 = sqrt(d / 2m)` contributes exactly
//! `pi^T pi` and is left out, which keeps `B` accurate at large `t` where the
//! remaining modes are tiny.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Input(format!("{} values for a {n}x{n} matrix", data.len())));
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DenseMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    for (o, &b) in out.iter_mut().zip(other.row(k)) {
                        *o += a * b;
                    }
                }
            }
        });
        DenseMatrix { n, data }
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        DenseMatrix::from_fn(n, |i, j| m[(i, j)])
    }
}

/// One-step walk `M = D^-1 A`, stationary distribution `pi = d / 2m`, and the
/// spectrum of the symmetrised walk used to evaluate `P(t)` at any time.
#[derive(Debug, Clone)]
pub struct DiffusionOperators {
    n: usize,
    degrees: Vec<f64>,
    two_m: f64,
    pi: Vec<f64>,
    transition: DenseMatrix,
    eigenvalues: Vec<f64>,
    /// Column-major eigenvectors of `S`, as returned by nalgebra.
    eigenvectors: DMatrix<f64>,
    stationary_mode: usize,
}

impl DiffusionOperators {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Stationary distribution `pi`.
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// One-step transition matrix `M`.
    pub fn transition(&self) -> &DenseMatrix {
        &self.transition
    }

    /// Eigenvalues of `D^-1/2 A D^-1/2` (equivalently of `M`), ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The generator `M - I` as a dense nalgebra matrix.
    pub fn generator(&self) -> DMatrix<f64> {
        let mut g = self.transition.to_nalgebra();
        for i in 0..self.n {
            g[(i, i)] -= 1.0;
        }
        g
    }
}

/// Builds the random-walk operators of a connected graph without isolated nodes.
pub fn diffusion_operators(g: &Graph) -> Result<DiffusionOperators> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Size("graph has no nodes".into()));
    }
    if let Some(i) = (0..n).find(|&i| g.degree(i) == 0) {
        return Err(Error::IsolatedNode(i));
    }
    let comps = g.component_count();
    if comps > 1 {
        return Err(Error::Disconnected(comps));
    }
    let degrees: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    let two_m = 2.0 * g.edge_count() as f64;
    let pi: Vec<f64> = degrees.iter().map(|d| d / two_m).collect();

    let mut transition = DenseMatrix::zeros(n);
    let mut sym = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for &j in g.neighbors(i) {
            transition.data[i * n + j] = 1.0 / degrees[i];
            sym[(i, j)] = 1.0 / (degrees[i] * degrees[j]).sqrt();
        }
    }
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    let stationary_mode = n - 1;
    let top = eigenvalues[stationary_mode];
    if (top - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "leading eigenvalue of the walk is {top}, expected 1"
        )));
    }
    Ok(DiffusionOperators {
        n,
        degrees,
        two_m,
        pi,
        transition,
        eigenvalues,
        eigenvectors,
        stationary_mode,
    })
}

/// `B(t)` together with the transition matrix `P(t)` it was built from.
#[derive(Debug, Clone)]
pub struct Autocovariance {
    pub t: f64,
    pub b: DenseMatrix,
    pub p: DenseMatrix,
    pub pi: Vec<f64>,
}

impl Autocovariance {
    /// Wraps an arbitrary symmetric quality matrix. `P` is reconstructed as
    /// `P_ij = B_ij / pi_i + pi_j`.
    pub fn from_parts(t: f64, b: DenseMatrix, pi: Vec<f64>) -> Result<Self> {
        if pi.len() != b.dim() {
            return Err(Error::Input("stationary distribution length mismatch".into()));
        }
        let p = transition_from_autocovariance(&b, &pi)?;
        Ok(Autocovariance { t, b, p, pi })
    }

    pub fn len(&self) -> usize {
        self.b.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.b.dim() == 0
    }
}

/// Below this, a mode's weight `exp(-t (1 - l_k))` relative to the largest
/// non-stationary weight cannot change any entry of `B` in double precision.
const MODE_CUTOFF: f64 = 1e-18;

/// Negative entries of `P` smaller in magnitude than this are rounding noise.
const NEGATIVE_FLOOR: f64 = -1e-12;

/// Evaluates `P(t)` and `B(t)` from the stored spectrum.
pub fn transition_at_time(ops: &DiffusionOperators, t: f64) -> Result<Autocovariance> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Parameter(format!("Markov time {t} must be finite and non-negative")));
    }
    let n = ops.n;
    let weights: Vec<(usize, f64)> = (0..n)
        .filter(|&k| k != ops.stationary_mode)
        .map(|k| (k, (-t * (1.0 - ops.eigenvalues[k])).exp()))
        .collect();
    let w_max = weights.iter().map(|w| w.1).fold(0.0, f64::max);
    let kept: Vec<(usize, f64)> = weights
        .into_iter()
        .filter(|&(_, w)| w > MODE_CUTOFF * w_max)
        .collect();

    // U_ik = sqrt(d_i w_k / 2m) v_ik, so that B = U U^T.
    let r = kept.len();
    let u = DMatrix::from_fn(n, r, |i, c| {
        let (k, w) = kept[c];
        (ops.degrees[i] / ops.two_m).sqrt() * w.sqrt() * ops.eigenvectors[(i, k)]
    });
    let full = &u * u.transpose();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = full[(i, j)];
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    let b = DenseMatrix { n, data };
    let p = transition_from_autocovariance(&b, &ops.pi)?;
    Ok(Autocovariance {
        t,
        b,
        p,
        pi: ops.pi.clone(),
    })
}

fn transition_from_autocovariance(b: &DenseMatrix, pi: &[f64]) -> Result<DenseMatrix> {
    let n = b.dim();
    let mut p = DenseMatrix::from_fn(n, |i, j| b.get(i, j) / pi[i] + pi[j]);
    for i in 0..n {
        let row = &mut p.data[i * n..(i + 1) * n];
        let mut clipped = false;
        for v in row.iter_mut() {
            if *v < 0.0 {
                if *v < NEGATIVE_FLOOR {
                    return Err(Error::Numerical(format!(
                        "transition entry {v} in row {i} is negative"
                    )));
                }
                *v = 0.0;
                clipped = true;
            }
        }
        if clipped {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
    }
    Ok(p)
}

/// `P(t)` by scaling-and-squaring Pade approximation of `exp(-t (I - M))`,
/// independent of the spectral route.
pub fn transition_direct(ops: &DiffusionOperators, t: f64) -> Result<DenseMatrix> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Parameter(format!("Markov time {t} must be finite and non-negative")));
    }
    let g = ops.generator() * t;
    Ok(DenseMatrix::from_nalgebra(&g.exp()))
}

/// `B(t)` from [`transition_direct`].
pub fn autocovariance_direct(ops: &DiffusionOperators, t: f64) -> Result<DenseMatrix> {
    let p = transition_direct(ops, t)?;
    let pi = &ops.pi;
    Ok(DenseMatrix::from_fn(ops.n, |i, j| pi[i] * p.get(i, j) - pi[i] * pi[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_connected(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn triangle_operators() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let ops = diffusion_operators(&g).unwrap();
        for i in 0..3 {
            assert!((ops.pi()[i] - 1.0 / 3.0).abs() < 1e-15);
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 0.5 };
                assert_eq!(ops.transition().get(i, j), want);
            }
        }
    }

    #[test]
    fn star_stationary_distribution() {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let ops = diffusion_operators(&g).unwrap();
        assert_eq!(ops.pi(), &[0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);
    }

    #[test]
    fn pi_is_a_fixed_point() {
        let ops = diffusion_operators(&random_connected(15, 0.2, 3)).unwrap();
        let m = ops.transition();
        for j in 0..15 {
            let s: f64 = (0..15).map(|i| ops.pi()[i] * m.get(i, j)).sum();
            assert!((s - ops.pi()[j]).abs() < 1e-10);
        }
        for i in 0..15 {
            assert!((m.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_graphs_are_rejected() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(diffusion_operators(&g).unwrap_err(), Error::IsolatedNode(2));
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(diffusion_operators(&g).unwrap_err(), Error::Disconnected(2));
    }

    #[test]
    fn time_zero_is_identity() {
        let ops = diffusion_operators(&random_connected(10, 0.3, 4)).unwrap();
        let a = transition_at_time(&ops, 0.0).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((a.p.get(i, j) - want).abs() < 1e-12);
                let bw = if i == j { ops.pi()[i] } else { 0.0 } - ops.pi()[i] * ops.pi()[j];
                assert!((a.b.get(i, j) - bw).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn long_time_reaches_stationarity() {
        let ops = diffusion_operators(&random_connected(8, 0.3, 5)).unwrap();
        let a = transition_at_time(&ops, 1e6).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert!((a.p.get(i, j) - ops.pi()[j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn two_node_closed_form() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let ops = diffusion_operators(&g).unwrap();
        let a = transition_at_time(&ops, 1.0).unwrap();
        let e = (-2f64).exp();
        let want = [[(1.0 + e) / 2.0, (1.0 - e) / 2.0], [(1.0 - e) / 2.0, (1.0 + e) / 2.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.p.get(i, j) - want[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bad_times_are_rejected() {
        let ops = diffusion_operators(&random_connected(5, 0.5, 6)).unwrap();
        assert!(transition_at_time(&ops, f64::NAN).is_err());
        assert!(transition_at_time(&ops, f64::INFINITY).is_err());
        assert!(transition_at_time(&ops, -1.0).is_err());
    }

    #[test]
    fn spectral_and_pade_routes_agree() {
        for seed in 0..5 {
            let ops = diffusion_operators(&random_connected(12, 0.25, seed)).unwrap();
            for t in [0.1, 1.0, 7.5, 40.0] {
                let a = transition_at_time(&ops, t).unwrap();
                let direct = transition_direct(&ops, t).unwrap();
                assert!(a.p.max_abs_diff(&direct) < 1e-8, "t={t}");
                let bd = autocovariance_direct(&ops, t).unwrap();
                assert!(a.b.max_abs_diff(&bd) < 1e-8);
            }
        }
    }

    #[test]
    fn autocovariance_invariants() {
        let ops = diffusion_operators(&random_connected(20, 0.15, 8)).unwrap();
        let mut last_trace = f64::INFINITY;
        for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0] {
            let a = transition_at_time(&ops, t).unwrap();
            assert!(a.b.sum().abs() < 1e-9);
            for i in 0..20 {
                assert!((a.p.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-10);
                for j in 0..20 {
                    assert!(a.p.get(i, j) >= 0.0);
                    assert_eq!(a.b.get(i, j), a.b.get(j, i));
                }
            }
            let tr = a.b.trace();
            assert!(tr <= last_trace + 1e-12);
            last_trace = tr;
        }
    }

    #[test]
    fn semigroup() {
        let ops = diffusion_operators(&random_connected(10, 0.3, 9)).unwrap();
        let p1 = transition_at_time(&ops, 0.7).unwrap().p;
        let p2 = transition_at_time(&ops, 2.3).unwrap().p;
        let p3 = transition_at_time(&ops, 3.0).unwrap().p;
        assert!(p1.matmul(&p2).max_abs_diff(&p3) < 1e-8);
    }
}
