//! Sampling-pattern construction and spectral diagnostics: graph lifting,
//! grid + shuffle masks, adjacency tensors, the rank-1 ALS estimate of
//! λ₂(H), and the discrepancy functional the error bounds control.

use std::collections::HashSet;

use rand::prelude::*;

use crate::error::{Error, Result};
use crate::graph::RegularGraph;
use crate::seed;
use crate::tensor::DenseTensor;

/// Memory budget for materializing dense adjacency tensors.
pub const MAX_DENSE_ENTRIES: usize = 1 << 24;

/// Set of revealed index tuples; doubles as the hypergraph H whose
/// adjacency tensor masks the completion problem. Tuples are stored flat
/// (|E|·t indices), sorted lexicographically for deterministic iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    dims: Vec<usize>,
    entries: Vec<usize>,
}

impl SamplingMask {
    pub fn new(dims: Vec<usize>, tuples: Vec<Vec<usize>>) -> Result<Self> {
        let t = dims.len();
        if t < 2 {
            return Err(Error::InvalidArgument(
                "mask order must be at least 2".into(),
            ));
        }
        if tuples.is_empty() {
            return Err(Error::InvalidArgument(
                "mask must reveal at least one entry".into(),
            ));
        }
        let mut entries = Vec::with_capacity(tuples.len() * t);
        for tuple in &tuples {
            if tuple.len() != t {
                return Err(Error::DimMismatch(format!(
                    "tuple {tuple:?} has arity {}, mask order is {t}",
                    tuple.len()
                )));
            }
            for (k, &i) in tuple.iter().enumerate() {
                if i >= dims[k] {
                    return Err(Error::IndexOutOfRange(format!(
                        "index {i} out of range for mode {k} (dim {})",
                        dims[k]
                    )));
                }
            }
            entries.extend_from_slice(tuple);
        }
        let mut mask = Self { dims, entries };
        mask.sort_entries();
        if mask.has_duplicates() {
            return Err(Error::InvalidArgument("duplicate tuples in mask".into()));
        }
        Ok(mask)
    }

    fn from_sorted_linear(dims: Vec<usize>, linear: &[usize]) -> Self {
        let t = dims.len();
        let mut entries = Vec::with_capacity(linear.len() * t);
        for &lin in linear {
            let mut rem = lin;
            let start = entries.len();
            entries.resize(start + t, 0);
            for k in (0..t).rev() {
                entries[start + k] = rem % dims[k];
                rem /= dims[k];
            }
        }
        Self { dims, entries }
    }

    fn sort_entries(&mut self) {
        let t = self.dims.len();
        let mut tuples: Vec<&[usize]> = self.entries.chunks_exact(t).collect();
        tuples.sort_unstable();
        let flat: Vec<usize> = tuples.into_iter().flatten().copied().collect();
        self.entries = flat;
    }

    fn has_duplicates(&self) -> bool {
        let t = self.dims.len();
        self.entries
            .chunks_exact(t)
            .zip(self.entries.chunks_exact(t).skip(1))
            .any(|(a, b)| a == b)
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of revealed entries |E|.
    pub fn len(&self) -> usize {
        self.entries.len() / self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of positions ∏ n_i.
    pub fn total_positions(&self) -> usize {
        self.dims.iter().product()
    }

    /// Iterates tuples in sorted order.
    pub fn tuples(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.entries.chunks_exact(self.dims.len())
    }

    /// The i-th tuple in sorted order.
    #[inline]
    pub fn tuple(&self, i: usize) -> &[usize] {
        let t = self.dims.len();
        &self.entries[i * t..(i + 1) * t]
    }

    pub fn linear_indices(&self) -> Vec<usize> {
        self.tuples()
            .map(|tuple| {
                let mut lin = 0;
                for (&i, &n) in tuple.iter().zip(&self.dims) {
                    lin = lin * n + i;
                }
                lin
            })
            .collect()
    }

    /// 0/1 indicator tensor with exactly |E| ones.
    pub fn adjacency_tensor(&self) -> Result<DenseTensor> {
        let total = self.total_positions();
        if total > MAX_DENSE_ENTRIES {
            return Err(Error::TooLarge(format!(
                "dense adjacency tensor would hold {total} entries (budget {MAX_DENSE_ENTRIES})"
            )));
        }
        let mut t = DenseTensor::zeros(self.dims.clone())?;
        for lin in self.linear_indices() {
            t.values_mut()[lin] = 1.0;
        }
        Ok(t)
    }

    /// Serializes as `t n_1 … n_t |E|` then one tuple per line (0-based).
    pub fn to_text(&self) -> String {
        let mut s = format!("{}", self.order());
        for n in &self.dims {
            s.push_str(&format!(" {n}"));
        }
        s.push_str(&format!(" {}\n", self.len()));
        for tuple in self.tuples() {
            let line: Vec<String> = tuple.iter().map(|i| i.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty mask file".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|tok| {
                tok.parse()
                    .map_err(|e| Error::Parse(format!("mask header: {e}")))
            })
            .collect::<Result<_>>()?;
        if nums.len() < 3 {
            return Err(Error::Parse("mask header needs t, dims, and |E|".into()));
        }
        let t = nums[0];
        if nums.len() != t + 2 {
            return Err(Error::Parse(format!(
                "mask header for order {t} needs {} fields, got {}",
                t + 2,
                nums.len()
            )));
        }
        let dims = nums[1..=t].to_vec();
        let count = nums[t + 1];
        let mut tuples = Vec::with_capacity(count);
        for line in lines {
            let tuple: Vec<usize> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse()
                        .map_err(|e| Error::Parse(format!("mask tuple: {e}")))
                })
                .collect::<Result<_>>()?;
            tuples.push(tuple);
        }
        if tuples.len() != count {
            return Err(Error::Parse(format!(
                "mask header promises {count} tuples, found {}",
                tuples.len()
            )));
        }
        Self::new(dims, tuples)
    }
}

/// Lifts a d-regular graph to the order-t mask whose tuples are the walks
/// of length t−1: `(i_1..i_t) ∈ E` iff every consecutive pair is an edge.
/// Produces |E| = n·d^{t−1} tuples; every mode-index has degree d^{t−1}.
pub fn lift_graph(g: &RegularGraph, t: usize) -> Result<SamplingMask> {
    if t < 2 {
        return Err(Error::InvalidArgument("lifting needs order t ≥ 2".into()));
    }
    let n = g.n();
    let d = g.degree();
    let count = n
        .checked_mul(
            d.checked_pow((t - 1) as u32)
                .ok_or_else(|| Error::TooLarge(format!("d^{} overflows", t - 1)))?,
        )
        .ok_or_else(|| Error::TooLarge("lifted mask size overflows".into()))?;
    let adj = g.adjacency_lists();
    let mut entries = Vec::with_capacity(count * t);
    // adjacency lists are sorted, so depth-first extension emits tuples in
    // lexicographic order
    let mut walk = vec![0usize; t];
    fn extend(
        adj: &[Vec<u32>],
        walk: &mut Vec<usize>,
        depth: usize,
        t: usize,
        entries: &mut Vec<usize>,
    ) {
        if depth == t {
            entries.extend_from_slice(walk);
            return;
        }
        let prev = walk[depth - 1];
        for &next in &adj[prev] {
            walk[depth] = next as usize;
            extend(adj, walk, depth + 1, t, entries);
        }
    }
    for v in 0..n {
        walk[0] = v;
        extend(&adj, &mut walk, 1, t, &mut entries);
    }
    debug_assert_eq!(entries.len(), count * t);
    Ok(SamplingMask {
        dims: vec![n; t],
        entries,
    })
}

/// Evenly spaced mask: m = round(fraction·∏dims) entries at row-major
/// linear positions ⌊k·∏dims/m⌋ for k = 0..m−1.
pub fn grid_mask(dims: &[usize], fraction: f64) -> Result<SamplingMask> {
    if dims.len() < 2 {
        return Err(Error::InvalidArgument(
            "mask order must be at least 2".into(),
        ));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let total: usize = dims.iter().product();
    let m = (fraction * total as f64).round() as usize;
    if m == 0 {
        return Err(Error::InvalidArgument(format!(
            "grid fraction {fraction} selects zero of {total} entries"
        )));
    }
    let m = m.min(total);
    let linear: Vec<usize> = (0..m).map(|k| k * total / m).collect();
    Ok(SamplingMask::from_sorted_linear(dims.to_vec(), &linear))
}

/// Moves ⌈fraction·|E|⌉ uniformly chosen entries to uniform draws from the
/// currently unobserved positions; |E| is preserved exactly and the result
/// is deterministic under the seed.
pub fn shuffle_mask(mask: &SamplingMask, fraction: f64, seed: u64) -> Result<SamplingMask> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "shuffle fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let e_count = mask.len();
    let k = (fraction * e_count as f64).ceil() as usize;
    if k == 0 {
        return Ok(mask.clone());
    }
    let k = k.min(e_count);
    let total = mask.total_positions();
    let mut rng = seed::rng_from(&[seed, 0x5f75_666c]);

    // choose k tuple positions to remove (partial Fisher-Yates)
    let mut order: Vec<usize> = (0..e_count).collect();
    for i in 0..k {
        let j = rng.random_range(i..e_count);
        order.swap(i, j);
    }
    let removed: HashSet<usize> = order[..k].iter().copied().collect();
    let all_linear = mask.linear_indices();
    let kept: Vec<usize> = all_linear
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, &lin)| lin)
        .collect();

    let kept_set: HashSet<usize> = kept.iter().copied().collect();
    let free = total - kept_set.len();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    if k * 2 > free {
        // dense path: enumerate the free slots and sample without replacement
        let mut slots: Vec<usize> = (0..total).filter(|p| !kept_set.contains(p)).collect();
        for i in 0..k {
            let j = rng.random_range(i..slots.len());
            slots.swap(i, j);
        }
        chosen.extend_from_slice(&slots[..k]);
    } else {
        let mut new_set: HashSet<usize> = HashSet::with_capacity(k);
        while chosen.len() < k {
            let p = rng.random_range(0..total);
            if !kept_set.contains(&p) && new_set.insert(p) {
                chosen.push(p);
            }
        }
    }

    let mut linear = kept;
    linear.extend_from_slice(&chosen);
    linear.sort_unstable();
    debug_assert_eq!(linear.len(), e_count);
    Ok(SamplingMask::from_sorted_linear(mask.dims.clone(), &linear))
}

/// Parameters for the rank-1 ALS estimate of λ₂(H).
#[derive(Debug, Clone, Copy)]
pub struct Lambda2Params {
    pub restarts: usize,
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for Lambda2Params {
    fn default() -> Self {
        Self {
            restarts: 8,
            sweeps: 200,
            seed: 0,
        }
    }
}

const ALS_FIT_TOL: f64 = 1e-9;

/// Estimates λ₂(H) = ‖T_H − (|E|/n^t)·J‖ by fitting a rank-1 tensor to the
/// centered adjacency tensor with alternating least squares; the Frobenius
/// norm of the fit (the max over restarts) is reported. The centered tensor
/// is never materialized: contractions stream over E with a closed-form
/// correction for the constant shift. A lower bound on the true spectral
/// norm; non-decreasing in the number of restarts; seed-deterministic.
pub fn estimate_lambda2(mask: &SamplingMask, params: Lambda2Params) -> f64 {
    let t = mask.order();
    let dims = mask.dims().to_vec();
    let total = mask.total_positions() as f64;
    let shift = mask.len() as f64 / total;

    let mut best = 0.0f64;
    for restart in 0..params.restarts {
        let mut rng = seed::rng_from(&[params.seed, 0x6c61_6d62, restart as u64]);
        let mut vectors: Vec<Vec<f64>> = dims
            .iter()
            .map(|&n| {
                let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in &mut v {
                    *x /= norm.max(1e-300);
                }
                v
            })
            .collect();

        let mut sigma = 0.0f64;
        for _sweep in 0..params.sweeps {
            let mut last_norm = 0.0;
            for mode in 0..t {
                // w[k] = Σ_{e: e_mode = k} ∏_{j≠mode} u_j[e_j]  −  shift·∏_{j≠mode} Σ u_j
                let mut w = vec![0.0f64; dims[mode]];
                for tuple in mask.tuples() {
                    let mut prod = 1.0;
                    for j in 0..t {
                        if j != mode {
                            prod *= vectors[j][tuple[j]];
                        }
                    }
                    w[tuple[mode]] += prod;
                }
                let mut sums = 1.0;
                for (j, v) in vectors.iter().enumerate() {
                    if j != mode {
                        sums *= v.iter().sum::<f64>();
                    }
                }
                for x in &mut w {
                    *x -= shift * sums;
                }
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm < 1e-300 {
                    // centered tensor annihilates this direction; fit is zero
                    last_norm = 0.0;
                    break;
                }
                for (u, x) in vectors[mode].iter_mut().zip(&w) {
                    *u = x / norm;
                }
                last_norm = norm;
            }
            let prev = sigma;
            sigma = last_norm;
            if sigma == 0.0 || (sigma - prev).abs() < ALS_FIT_TOL * sigma.max(1.0) {
                break;
            }
        }
        best = best.max(sigma);
    }
    best
}

/// |mean over all entries − mean over observed entries|.
pub fn discrepancy(t: &DenseTensor, mask: &SamplingMask) -> Result<f64> {
    if t.dims() != mask.dims() {
        return Err(Error::DimMismatch(format!(
            "tensor dims {:?} vs mask dims {:?}",
            t.dims(),
            mask.dims()
        )));
    }
    let mean_all: f64 = t.values().iter().sum::<f64>() / t.len() as f64;
    let sum_obs: f64 = mask
        .linear_indices()
        .iter()
        .map(|&lin| t.values()[lin])
        .sum();
    let mean_obs = sum_obs / mask.len() as f64;
    Ok((mean_all - mean_obs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ring_graph;
    use approx::assert_abs_diff_eq;

    fn c3() -> RegularGraph {
        ring_graph(3, 2).unwrap()
    }

    #[test]
    fn lift_c3_t3_has_12_hyperedges() {
        let mask = lift_graph(&c3(), 3).unwrap();
        assert_eq!(mask.len(), 12);
        assert_eq!(mask.dims(), &[3, 3, 3]);
        // every tuple is a walk
        for tuple in mask.tuples() {
            for w in tuple.windows(2) {
                assert!(c3().has_edge(w[0] as u32, w[1] as u32));
            }
        }
    }

    #[test]
    fn lift_t2_gives_ordered_edges() {
        let g = ring_graph(6, 2).unwrap();
        let mask = lift_graph(&g, 2).unwrap();
        assert_eq!(mask.len(), 6 * 2);
    }

    #[test]
    fn lift_regularity() {
        let g = ring_graph(8, 4).unwrap();
        for t in [2usize, 3] {
            let mask = lift_graph(&g, t).unwrap();
            let expect = 8 * 4usize.pow((t - 1) as u32);
            assert_eq!(mask.len(), expect);
            // every mode-index appears in exactly d^{t-1} tuples
            for mode in 0..t {
                let mut counts = [0usize; 8];
                for tuple in mask.tuples() {
                    counts[tuple[mode]] += 1;
                }
                assert!(counts.iter().all(|&c| c == 4usize.pow((t - 1) as u32)));
            }
        }
    }

    #[test]
    fn grid_mask_spacing() {
        // dims (2,2), fraction 0.5 → linear 0 and 2 → tuples (0,0), (1,0)
        let mask = grid_mask(&[2, 2], 0.5).unwrap();
        let tuples: Vec<Vec<usize>> = mask.tuples().map(|t| t.to_vec()).collect();
        assert_eq!(tuples, vec![vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn grid_mask_full_and_counts() {
        let mask = grid_mask(&[3, 3], 1.0).unwrap();
        assert_eq!(mask.len(), 9);
        let mask = grid_mask(&[20, 20, 20], 0.05).unwrap();
        assert_eq!(mask.len(), 400);
        let mask = grid_mask(&[100, 100, 100], 0.05).unwrap();
        assert_eq!(mask.len(), 50_000);
        assert!(grid_mask(&[4, 4], 0.001).is_err());
    }

    #[test]
    fn shuffle_decreases_lambda2_on_average() {
        let dims = vec![20, 20, 20];
        let grid = grid_mask(&dims, 0.05).unwrap();
        let p = |seed| Lambda2Params {
            restarts: 4,
            sweeps: 100,
            seed,
        };
        let grid_est = estimate_lambda2(&grid, p(0));
        let mut shuffled_sum = 0.0;
        for seed in 0..5 {
            let m = shuffle_mask(&grid, 0.6, seed).unwrap();
            shuffled_sum += estimate_lambda2(&m, p(seed));
        }
        assert!(grid_est > shuffled_sum / 5.0);
    }

    #[test]
    fn shuffle_preserves_count_and_is_seeded() {
        let mask = grid_mask(&[10, 10, 10], 0.05).unwrap();
        let s0 = shuffle_mask(&mask, 0.0, 9).unwrap();
        assert_eq!(s0, mask);
        let s1 = shuffle_mask(&mask, 0.5, 9).unwrap();
        let s2 = shuffle_mask(&mask, 0.5, 9).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), mask.len());
        assert_ne!(s1, mask);
        let s3 = shuffle_mask(&mask, 1.0, 11).unwrap();
        assert_eq!(s3.len(), mask.len());
    }

    #[test]
    fn shuffle_full_mask_stays_full() {
        let mask = grid_mask(&[3, 3], 1.0).unwrap();
        let s = shuffle_mask(&mask, 1.0, 5).unwrap();
        assert_eq!(s, mask);
    }

    #[test]
    fn adjacency_tensor_counts() {
        let mask = lift_graph(&c3(), 3).unwrap();
        let t = mask.adjacency_tensor().unwrap();
        let sum: f64 = t.values().iter().sum();
        assert_eq!(sum, 12.0);
        let full = grid_mask(&[2, 2], 1.0).unwrap();
        assert_eq!(
            full.adjacency_tensor().unwrap(),
            DenseTensor::ones(vec![2, 2]).unwrap()
        );
    }

    #[test]
    fn full_mask_lambda2_is_zero() {
        let mask = grid_mask(&[4, 4], 1.0).unwrap();
        let est = estimate_lambda2(&mask, Lambda2Params::default());
        assert_abs_diff_eq!(est, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn lambda2_matches_dense_svd_on_matrices() {
        use nalgebra::DMatrix;
        let g = ring_graph(10, 4).unwrap();
        let mask = lift_graph(&g, 2).unwrap();
        let est = estimate_lambda2(
            &mask,
            Lambda2Params {
                restarts: 8,
                sweeps: 500,
                seed: 1,
            },
        );

        let n = 10;
        let shift = mask.len() as f64 / (n * n) as f64;
        let mut m = DMatrix::from_element(n, n, -shift);
        for tuple in mask.tuples() {
            m[(tuple[0], tuple[1])] += 1.0;
        }
        let sigma_max = m.svd(false, false).singular_values[0];
        assert_abs_diff_eq!(est, sigma_max, epsilon = 1e-4);
    }

    #[test]
    fn lambda2_nondecreasing_in_restarts() {
        let mask = grid_mask(&[8, 8, 8], 0.1).unwrap();
        let mut prev = 0.0;
        for restarts in [1usize, 2, 4, 8] {
            let est = estimate_lambda2(
                &mask,
                Lambda2Params {
                    restarts,
                    sweeps: 100,
                    seed: 4,
                },
            );
            assert!(est >= prev - 1e-12);
            prev = est;
        }
    }

    #[test]
    fn discrepancy_basics() {
        let mask = grid_mask(&[3, 3], 0.5).unwrap();
        let constant = DenseTensor::new(vec![3, 3], vec![2.5; 9]).unwrap();
        assert_abs_diff_eq!(discrepancy(&constant, &mask).unwrap(), 0.0, epsilon = 1e-15);

        let full = grid_mask(&[3, 3], 1.0).unwrap();
        let t = DenseTensor::new(vec![3, 3], (0..9).map(|v| v as f64).collect()).unwrap();
        assert_abs_diff_eq!(discrepancy(&t, &full).unwrap(), 0.0, epsilon = 1e-15);

        let bad = DenseTensor::ones(vec![2, 2]).unwrap();
        assert!(discrepancy(&bad, &mask).is_err());
    }

    #[test]
    fn mask_text_round_trip() {
        let mask = lift_graph(&c3(), 3).unwrap();
        let parsed = SamplingMask::parse_text(&mask.to_text()).unwrap();
        assert_eq!(parsed, mask);
        assert!(SamplingMask::parse_text("3 3 3\n0 0 0\n").is_err());
    }

    #[test]
    fn mask_validation() {
        assert!(SamplingMask::new(vec![2, 2], vec![]).is_err());
        assert!(SamplingMask::new(vec![2, 2], vec![vec![0, 2]]).is_err());
        assert!(SamplingMask::new(vec![2, 2], vec![vec![0, 1], vec![0, 1]]).is_err());
    }
}
