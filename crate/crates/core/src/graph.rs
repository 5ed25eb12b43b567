//! d-regular base graphs, switch-chain randomization, and the second
//! eigenvalue λ = max{|λ₂(A)|, |λ_n(A)|} that controls every error bound.

use std::collections::HashSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Simple d-regular graph stored as a normalized edge list.
#[derive(Debug, Clone)]
pub struct RegularGraph {
    n: usize,
    degree: usize,
    /// Unordered pairs with u < v, kept sorted for deterministic iteration.
    edges: Vec<(u32, u32)>,
}

fn norm_edge(u: u32, v: u32) -> (u32, u32) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl RegularGraph {
    /// Validates regularity, simplicity, and the n·d parity constraint.
    pub fn new(n: usize, degree: usize, mut edges: Vec<(u32, u32)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "graph needs at least one vertex".into(),
            ));
        }
        if !(n * degree).is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "n·d must be even, got n={n} d={degree}"
            )));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut deg = vec![0usize; n];
        for e in edges.iter_mut() {
            *e = norm_edge(e.0, e.1);
            let (u, v) = *e;
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {u}")));
            }
            if v as usize >= n {
                return Err(Error::IndexOutOfRange(format!(
                    "vertex {v} out of range (n={n})"
                )));
            }
            if !seen.insert(*e) {
                return Err(Error::InvalidArgument(format!("duplicate edge {u}-{v}")));
            }
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        if let Some((i, &d)) = deg.iter().enumerate().find(|(_, &d)| d != degree) {
            return Err(Error::InvalidArgument(format!(
                "vertex {i} has degree {d}, expected {degree}"
            )));
        }
        edges.sort_unstable();
        Ok(Self { n, degree, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Sorted adjacency lists.
    pub fn adjacency_lists(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::with_capacity(self.degree); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.binary_search(&norm_edge(u, v)).is_ok()
    }

    /// Serializes as `n d` then one `u v` pair per line (0-based).
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.degree);
        for &(u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .ok_or_else(|| Error::Parse("missing n".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("n: {e}")))?;
        let d: usize = it
            .next()
            .ok_or_else(|| Error::Parse("missing d".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("d: {e}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let u: u32 = it
                .next()
                .ok_or_else(|| Error::Parse("missing edge endpoint".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("edge endpoint: {e}")))?;
            let v: u32 = it
                .next()
                .ok_or_else(|| Error::Parse("missing edge endpoint".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("edge endpoint: {e}")))?;
            edges.push((u, v));
        }
        Self::new(n, d, edges)
    }
}

/// d-connected ring: vertex i adjacent to i±1, …, i±d/2 modulo n.
/// Requires even d with 2 ≤ d < n.
pub fn ring_graph(n: usize, d: usize) -> Result<RegularGraph> {
    if !d.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "ring graph needs even degree, got d={d}"
        )));
    }
    if d < 2 || d >= n {
        return Err(Error::InvalidArgument(format!(
            "ring graph needs 2 ≤ d < n, got n={n} d={d}"
        )));
    }
    let mut edges = Vec::with_capacity(n * d / 2);
    for i in 0..n {
        for k in 1..=(d / 2) {
            let j = (i + k) % n;
            edges.push(norm_edge(i as u32, j as u32));
        }
    }
    // i ± n/2 with k = n/2 produces each edge twice when d = n-1 is ruled
    // out, but k ≤ d/2 < n/2 already guarantees distinct pairs
    edges.sort_unstable();
    edges.dedup();
    RegularGraph::new(n, d, edges)
}

/// Deterministic base graph for any degree: even d gives the d-connected
/// ring; odd d (which a ring cannot realize) gives the (d−1)-connected ring
/// plus the antipodal perfect matching i ↔ i + n/2, requiring even n.
pub fn base_graph(n: usize, d: usize) -> Result<RegularGraph> {
    if d.is_multiple_of(2) {
        return ring_graph(n, d);
    }
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "odd degree d={d} needs even n for the antipodal matching, got n={n}"
        )));
    }
    if d < 3 || d >= n {
        return Err(Error::InvalidArgument(format!(
            "base graph needs 3 ≤ d < n for odd d, got n={n} d={d}"
        )));
    }
    let ring = ring_graph(n, d - 1)?;
    let mut edges = ring.edges().to_vec();
    let half = n / 2;
    if d > half {
        return Err(Error::InvalidArgument(format!(
            "antipodal matching collides with the ring for d={d}, n={n}"
        )));
    }
    for i in 0..half {
        edges.push(norm_edge(i as u32, (i + half) as u32));
    }
    RegularGraph::new(n, d, edges)
}

/// Outcome of a switch-chain run: the mutated graph plus both the accepted
/// and proposed move counters.
#[derive(Debug, Clone)]
pub struct SwitchOutcome {
    pub graph: RegularGraph,
    pub accepted: u64,
    pub proposed: u64,
}

/// Runs the switch Markov chain until `swaps` proposals have been
/// *accepted*: two distinct edges {a,b},{c,d} are drawn uniformly, one of
/// the two rewirings {a,c},{b,d} / {a,d},{b,c} is chosen uniformly, and the
/// move is rejected if it would create a loop or duplicate edge. Degree
/// sequence is preserved; identical seeds produce identical edge sets.
pub fn switch_chain_counted(g: &RegularGraph, swaps: u64, seed: u64) -> SwitchOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = g.edges().to_vec();
    let mut present: HashSet<(u32, u32)> = edges.iter().copied().collect();
    let m = edges.len();
    let mut accepted = 0u64;
    let mut proposed = 0u64;
    // a 2-regular-ish graph with too few edges can wedge the chain; cap the
    // proposal count so pathological inputs still terminate
    let proposal_cap = swaps.saturating_mul(10_000).max(10_000);
    while accepted < swaps && proposed < proposal_cap {
        proposed += 1;
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m);
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (c, d) = edges[j];
        // orientation: swap to (a,c)(b,d) or (a,d)(b,c)
        let (e1, e2) = if rng.random_bool(0.5) {
            (norm_edge(a, c), norm_edge(b, d))
        } else {
            (norm_edge(a, d), norm_edge(b, c))
        };
        if e1.0 == e1.1 || e2.0 == e2.1 || e1 == e2 {
            continue;
        }
        if present.contains(&e1) || present.contains(&e2) {
            continue;
        }
        present.remove(&edges[i]);
        present.remove(&edges[j]);
        present.insert(e1);
        present.insert(e2);
        edges[i] = e1;
        edges[j] = e2;
        accepted += 1;
    }
    let graph = RegularGraph::new(g.n(), g.degree(), edges)
        .expect("switch moves preserve regularity and simplicity");
    SwitchOutcome {
        graph,
        accepted,
        proposed,
    }
}

/// Switch chain returning just the mutated graph.
pub fn switch_chain(g: &RegularGraph, swaps: u64, seed: u64) -> RegularGraph {
    switch_chain_counted(g, swaps, seed).graph
}

const POWER_ITER_CAP: usize = 20_000;
const POWER_ITER_TOL: f64 = 1e-9;

/// Second eigenvalue in absolute value: the largest-magnitude eigenvalue of
/// the deflated matrix `B = A − (d/n)·J`, which equals
/// `max{|λ₂(A)|, |λ_n(A)|}` for connected regular graphs. Power iteration
/// with the estimate `‖Bv‖/‖v‖`; the Perron direction of a regular graph is
/// deflated exactly, and near-ties |λ₂| ≈ |λ_n| still converge in magnitude.
pub fn second_eigenvalue(g: &RegularGraph) -> Result<f64> {
    let n = g.n();
    if n == 1 {
        return Ok(0.0);
    }
    let adj = g.adjacency_lists();
    let shift = g.degree() as f64 / n as f64;

    // B v = A v − shift·(Σv)·1
    let apply = |v: &[f64], out: &mut [f64]| {
        let total: f64 = v.iter().sum();
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for &j in &adj[i] {
                s += v[j as usize];
            }
            *o = s - shift * total;
        }
    };

    // fixed internal seed keeps graph-lambda runs reproducible
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1234_abcd_0001);
    let mut best: Option<f64> = None;
    for _restart in 0..2 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        let mut w = vec![0.0; n];
        let mut estimate = 0.0;
        let mut converged = false;
        for it in 0..POWER_ITER_CAP {
            apply(&v, &mut w);
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-300 {
                estimate = 0.0;
                converged = true;
                break;
            }
            let prev = estimate;
            estimate = norm;
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / norm;
            }
            // ‖Bv‖ is the square root of the Rayleigh quotient of B², which
            // is non-decreasing along power iterates
            if it > 0 && (estimate - prev).abs() < POWER_ITER_TOL * estimate.max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                iterations: POWER_ITER_CAP,
                last_estimate: estimate,
            });
        }
        best = Some(best.map_or(estimate, |b: f64| b.max(estimate)));
    }
    Ok(best.unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ring_c5_edges() {
        let g = ring_graph(5, 2).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn ring_rejects_odd_degree_and_d_ge_n() {
        assert!(ring_graph(100, 15).is_err());
        assert!(ring_graph(4, 4).is_err());
        assert!(ring_graph(5, 3).is_err());
    }

    #[test]
    fn ring_n6_d4_has_12_edges() {
        let g = ring_graph(6, 4).unwrap();
        assert_eq!(g.edges().len(), 12);
        let adj = g.adjacency_lists();
        assert!(adj.iter().all(|a| a.len() == 4));
    }

    #[test]
    fn base_graph_odd_degree_matching() {
        let g = base_graph(100, 15).unwrap();
        assert_eq!(g.degree(), 15);
        assert_eq!(g.edges().len(), 100 * 15 / 2);
        assert!(g.has_edge(0, 50));
        assert!(base_graph(99, 15).is_err());
    }

    #[test]
    fn switch_chain_zero_swaps_identity() {
        let g = ring_graph(10, 4).unwrap();
        let h = switch_chain(&g, 0, 1);
        assert_eq!(g.edges(), h.edges());
    }

    #[test]
    fn switch_chain_preserves_degrees_and_is_deterministic() {
        let g = ring_graph(30, 6).unwrap();
        let h1 = switch_chain(&g, 100, 7);
        let h2 = switch_chain(&g, 100, 7);
        assert_eq!(h1.edges(), h2.edges());
        let adj = h1.adjacency_lists();
        assert!(adj.iter().all(|a| a.len() == 6));
        let h3 = switch_chain(&g, 100, 8);
        assert_ne!(h1.edges(), h3.edges());
    }

    #[test]
    fn switch_chain_counts_proposals() {
        let g = ring_graph(20, 4).unwrap();
        let out = switch_chain_counted(&g, 50, 3);
        assert_eq!(out.accepted, 50);
        assert!(out.proposed >= 50);
    }

    #[test]
    fn complete_graph_second_eigenvalue_is_one() {
        for n in [4usize, 7, 12] {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    edges.push((u as u32, v as u32));
                }
            }
            let g = RegularGraph::new(n, n - 1, edges).unwrap();
            let lam = second_eigenvalue(&g).unwrap();
            assert_abs_diff_eq!(lam, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn cycle_second_eigenvalue_matches_circulant_spectrum() {
        // Cycle eigenvalues are 2cos(2πk/n); the max non-Perron magnitude is
        // 2cos(π/n) for odd n and 2 for even n.
        for n in [3usize, 5, 9] {
            let g = ring_graph(n, 2).unwrap();
            let lam = second_eigenvalue(&g).unwrap();
            let expect = 2.0 * (std::f64::consts::PI / n as f64).cos();
            assert_abs_diff_eq!(lam, expect, epsilon = 1e-6);
        }
        for n in [4usize, 8] {
            let g = ring_graph(n, 2).unwrap();
            let lam = second_eigenvalue(&g).unwrap();
            assert_abs_diff_eq!(lam, 2.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn ring_second_eigenvalue_near_d_minus_one() {
        let g = ring_graph(100, 14).unwrap();
        let lam = second_eigenvalue(&g).unwrap();
        let d = 14.0;
        assert!((lam - (d - 1.0)).abs() <= 0.10 * (d - 1.0), "λ = {lam}");
        assert!(lam < d);
    }

    #[test]
    fn eigenvalue_in_zero_d_range() {
        let g = ring_graph(24, 4).unwrap();
        let lam = second_eigenvalue(&g).unwrap();
        assert!((0.0..4.0).contains(&lam));
    }

    #[test]
    fn text_round_trip() {
        let g = ring_graph(8, 4).unwrap();
        let parsed = RegularGraph::parse_text(&g.to_text()).unwrap();
        assert_eq!(parsed.edges(), g.edges());
        assert!(RegularGraph::parse_text("3 2\n0 1\n").is_err());
    }
}
