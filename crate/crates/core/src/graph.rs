//! Weighted undirected graphs, their Laplacians and spectra.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{sym_eigen, Matrix, Vector};
use crate::{Error, Result};

/// λ₂ above this declares a graph connected.
pub const CONNECTIVITY_TOL: f64 = 1e-7;
const MAX_GENERATION_ATTEMPTS: usize = 1000;

/// Undirected graph on nodes `0..n` with strictly positive edge weights.
///
/// Edges are stored once as `(i, j, w)` with `i < j`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    /// Validates and canonicalizes an edge list. Endpoint order is irrelevant.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("graph needs at least one node".into()));
        }
        let mut map = BTreeMap::new();
        for (a, b, w) in edges {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= n {
                return Err(Error::Domain(format!(
                    "edge ({a}, {b}) references a node >= {n}"
                )));
            }
            if i == j {
                return Err(Error::Domain(format!("self-loop at node {i}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Domain(format!(
                    "edge ({i}, {j}) has non-positive weight {w}"
                )));
            }
            if map.insert((i, j), w).is_some() {
                return Err(Error::Domain(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(Self {
            n,
            edges: map.into_iter().map(|((i, j), w)| (i, j, w)).collect(),
        })
    }

    pub fn unit(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(n, pairs.into_iter().map(|(i, j)| (i, j, 1.0)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n];
        for &(i, j, w) in &self.edges {
            deg[i] += w;
            deg[j] += w;
        }
        deg
    }

    pub fn max_weighted_degree(&self) -> f64 {
        self.weighted_degrees().into_iter().fold(0.0, f64::max)
    }

    /// `Some(d)` when every edge has unit weight and every node has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        if self.edges.iter().any(|&(_, _, w)| w != 1.0) {
            return None;
        }
        let mut deg = vec![0usize; self.n];
        for &(i, j, _) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        let d = deg[0];
        deg.iter().all(|&k| k == d).then_some(d)
    }

    /// `L = D − W`: symmetric with zero row sums.
    pub fn laplacian(&self) -> Matrix {
        let mut l = Matrix::zeros(self.n, self.n);
        for &(i, j, w) in &self.edges {
            l[(i, j)] -= w;
            l[(j, i)] -= w;
            l[(i, i)] += w;
            l[(j, j)] += w;
        }
        l
    }

    pub fn is_connected_bfs(&self) -> bool {
        is_connected(self.n, self.edges.iter().map(|&(i, j, _)| (i, j)))
    }
}

fn is_connected(n: usize, pairs: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut adj = vec![Vec::new(); n];
    for (i, j) in pairs {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == n
}

/// Laplacian spectrum with connectivity derived from λ₂.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// λ₁ ≤ … ≤ λ_N.
    pub eigenvalues: Vector,
    /// Algebraic connectivity; `None` for a single node.
    pub lambda2: Option<f64>,
    pub lambda_n: f64,
    pub is_connected: bool,
}

impl SpectralSummary {
    /// λ₂ … λ_N.
    pub fn nonzero_modes(&self) -> &[f64] {
        &self.eigenvalues[1..]
    }
}

pub fn spectral_summary(g: &Graph, tol: f64) -> Result<SpectralSummary> {
    let eig = sym_eigen(&g.laplacian(), 0.0)?;
    let values = eig.values;
    let lambda2 = values.get(1).copied();
    let lambda_n = values[values.dim() - 1];
    let is_connected = lambda2.is_none_or(|l2| l2 > tol);
    Ok(SpectralSummary {
        eigenvalues: values,
        lambda2,
        lambda_n,
        is_connected,
    })
}

/// Membership in the family of connected graphs whose nonzero Laplacian
/// eigenvalues all lie in `[beta, gamma]`, with slack `tol` on both ends.
pub fn in_family(g: &Graph, beta: f64, gamma: f64, tol: f64) -> Result<bool> {
    if beta > gamma {
        return Err(Error::Precondition(format!(
            "beta = {beta} exceeds gamma = {gamma}"
        )));
    }
    let summary = spectral_summary(g, CONNECTIVITY_TOL)?;
    Ok(summary.is_connected
        && summary
            .nonzero_modes()
            .iter()
            .all(|&l| l >= beta - tol && l <= gamma + tol))
}

/// `max over edges (i, j)` of `deg_w(i) + deg_w(j)`, an upper bound on λ_N.
pub fn anderson_morley_bound(g: &Graph) -> Result<f64> {
    if g.edges.is_empty() {
        return Err(Error::Domain(
            "Anderson-Morley bound needs at least one edge".into(),
        ));
    }
    let deg = g.weighted_degrees();
    Ok(g.edges
        .iter()
        .map(|&(i, j, _)| deg[i] + deg[j])
        .fold(0.0, f64::max))
}

pub fn gen_complete(n: usize) -> Result<Graph> {
    require_nodes(n, 2)?;
    Graph::unit(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

pub fn gen_path(n: usize) -> Result<Graph> {
    require_nodes(n, 2)?;
    Graph::unit(n, (0..n - 1).map(|i| (i, i + 1)))
}

/// Cycle `0 – 1 – … – (n−1) – 0`; needs three nodes to stay simple.
pub fn gen_cycle(n: usize) -> Result<Graph> {
    require_nodes(n, 3)?;
    Graph::unit(n, (0..n).map(|i| (i, (i + 1) % n)))
}

fn require_nodes(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Domain(format!(
            "generator needs n >= {min}, got {n}"
        )));
    }
    Ok(())
}

/// Connected simple `d`-regular graph with unit weights.
///
/// Stubs are shuffled and paired; pairs that would form a self-loop or a
/// repeated edge go back into the pool and are reshuffled. A pairing round
/// restarts from scratch when no admissible pair remains, and disconnected
/// results are rejected. Both kinds of restart count towards the limit of
/// 1000 attempts.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d == 0 || d >= n || (n * d) % 2 != 0 {
        return Err(Error::Domain(format!(
            "random regular graph needs 0 < d < n and n*d even, got n = {n}, d = {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let Some(edges) = try_regular_pairing(n, d, &mut rng) else {
            continue;
        };
        if is_connected(n, edges.iter().copied()) {
            return Graph::unit(n, edges);
        }
    }
    Err(Error::GenerationFailure {
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

fn try_regular_pairing(
    n: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Option<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, d)).collect();
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = if pair[0] < pair[1] {
                (pair[0], pair[1])
            } else {
                (pair[1], pair[0])
            };
            if u != v && edges.insert((u, v)) {
                continue;
            }
            *leftover.entry(u).or_default() += 1;
            *leftover.entry(v).or_default() += 1;
        }
        if !has_admissible_pair(&edges, &leftover) {
            return None;
        }
        stubs = leftover
            .into_iter()
            .flat_map(|(v, k)| core::iter::repeat_n(v, k))
            .collect();
    }
    Some(edges)
}

fn has_admissible_pair(edges: &BTreeSet<(usize, usize)>, pool: &BTreeMap<usize, usize>) -> bool {
    if pool.is_empty() {
        return true;
    }
    let nodes: Vec<usize> = pool.keys().copied().collect();
    nodes
        .iter()
        .enumerate()
        .any(|(k, &u)| nodes[k + 1..].iter().any(|&v| !edges.contains(&(u, v))))
}

/// G(n, p): every pair joins independently with probability `p_edge`.
pub fn gen_erdos_renyi(n: usize, p_edge: f64, seed: u64) -> Result<Graph> {
    if !(p_edge > 0.0 && p_edge <= 1.0) {
        return Err(Error::Domain(format!(
            "edge probability must lie in (0, 1], got {p_edge}"
        )));
    }
    require_nodes(n, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p_edge {
                pairs.push((i, j));
            }
        }
    }
    Graph::unit(n, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(got: &[f64], want: &[f64], tol: f64) -> bool {
        got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= tol)
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::unit(3, [(0, 0)]).is_err());
        assert!(Graph::unit(3, [(0, 3)]).is_err());
        assert!(Graph::unit(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 1, 0.0)]).is_err());
        assert!(Graph::new(3, [(0, 1, -1.0)]).is_err());
        assert!(Graph::unit(0, []).is_err());
    }

    #[test]
    fn canonical_edge_order() {
        let g = Graph::unit(3, [(2, 1), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 1.0), (1, 2, 1.0)]);
    }

    #[test]
    fn laplacian_fixtures() {
        let k2 = gen_complete(2).unwrap().laplacian();
        assert_eq!(k2, Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap());
        let p3 = gen_path(3).unwrap().laplacian();
        assert_eq!(
            p3,
            Matrix::from_rows(&[[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]).unwrap()
        );
        let weighted = Graph::new(3, [(0, 1, 0.5), (1, 2, 2.5)])
            .unwrap()
            .laplacian();
        for i in 0..3 {
            assert!(weighted.row(i).iter().sum::<f64>().abs() <= 1e-12);
        }
        assert_eq!(weighted[(1, 1)], 3.0);
    }

    #[test]
    fn spectra() {
        let k5 = spectral_summary(&gen_complete(5).unwrap(), CONNECTIVITY_TOL).unwrap();
        assert!(close(&k5.eigenvalues, &[0.0, 5.0, 5.0, 5.0, 5.0], 1e-10));
        assert!(k5.is_connected);

        let split = Graph::unit(4, [(0, 1), (2, 3)]).unwrap();
        let s = spectral_summary(&split, CONNECTIVITY_TOL).unwrap();
        assert!(s.lambda2.unwrap() <= CONNECTIVITY_TOL);
        assert!(!s.is_connected);
        assert!(!split.is_connected_bfs());

        // λ_k = 2 − 2cos(2πk/4) = {0, 2, 4, 2}
        let c4 = spectral_summary(&gen_cycle(4).unwrap(), CONNECTIVITY_TOL).unwrap();
        assert!(close(&c4.eigenvalues, &[0.0, 2.0, 2.0, 4.0], 1e-10));

        let single = spectral_summary(&Graph::unit(1, []).unwrap(), CONNECTIVITY_TOL).unwrap();
        assert_eq!(single.lambda2, None);
        assert!(single.is_connected);
    }

    #[test]
    fn family_membership() {
        let k4 = gen_complete(4).unwrap();
        assert!(in_family(&k4, 1.0, 4.0, 1e-9).unwrap());
        assert!(!in_family(&k4, 5.0, 9.0, 1e-9).unwrap());
        assert!(in_family(&k4, 2.0, 1.0, 1e-9).is_err());
        let split = Graph::unit(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!in_family(&split, 0.0, 10.0, 1e-9).unwrap());
    }

    #[test]
    fn anderson_morley() {
        let k2 = gen_complete(2).unwrap();
        assert_eq!(anderson_morley_bound(&k2).unwrap(), 2.0);
        let k4 = gen_complete(4).unwrap();
        assert_eq!(anderson_morley_bound(&k4).unwrap(), 6.0);
        let p3 = gen_path(3).unwrap();
        assert_eq!(anderson_morley_bound(&p3).unwrap(), 3.0);
        assert!(anderson_morley_bound(&Graph::unit(3, []).unwrap()).is_err());
    }

    #[test]
    fn generator_sizes() {
        assert_eq!(gen_complete(4).unwrap().num_edges(), 6);
        assert_eq!(gen_path(3).unwrap().num_edges(), 2);
        assert_eq!(gen_cycle(4).unwrap().num_edges(), 4);
        assert!(gen_complete(1).is_err());
        assert!(gen_path(1).is_err());
        assert!(gen_cycle(2).is_err());
    }

    #[test]
    fn regular_generator_edge_cases() {
        assert_eq!(
            gen_random_regular(4, 3, 9).unwrap(),
            gen_complete(4).unwrap()
        );
        assert!(gen_random_regular(5, 3, 0).is_err());
        assert!(gen_random_regular(4, 4, 0).is_err());
        assert!(gen_random_regular(4, 0, 0).is_err());
        for seed in 0..20 {
            let g = gen_random_regular(6, 2, seed).unwrap();
            assert_eq!(g.regular_degree(), Some(2));
            assert!(g.is_connected_bfs());
            assert_eq!(g.num_edges(), 6);
        }
    }

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(
            gen_erdos_renyi(6, 1.0, 3).unwrap(),
            gen_complete(6).unwrap()
        );
        assert_eq!(gen_erdos_renyi(5, 1e-12, 3).unwrap().num_edges(), 0);
        assert!(gen_erdos_renyi(5, 0.0, 3).is_err());
        assert!(gen_erdos_renyi(5, 1.5, 3).is_err());
    }
}
