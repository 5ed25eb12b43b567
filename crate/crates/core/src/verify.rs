//! Randomized property suites behind the `verify` command: the atomic-norm
//! inequalities, the discrepancy inequalities on lifted masks, and the
//! bound calculators. The acceptance tests drive the same suites at full
//! instance counts; `quick` trims them to fit an interactive budget.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::atomic::{atomic_norm, atomic_rank_bound, enumerate_atoms};
use crate::bounds::{check_discrepancy_bounds, discrepancy_rhs_hypergraph, discrepancy_rhs_lifted};
use crate::graph::{ring_graph, second_eigenvalue, switch_chain, RegularGraph};
use crate::mask::{
    discrepancy, estimate_lambda2, lift_graph, shuffle_mask, Lambda2Params, SamplingMask,
};
use crate::seed;
use crate::tensor::{CpFactors, DenseTensor, Mat};

const NORM_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub quick: bool,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: usize,
    pub violations: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn random_tensor(rng: &mut ChaCha8Rng, dims: &[usize]) -> DenseTensor {
    let total: usize = dims.iter().product();
    let values: Vec<f64> = (0..total).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseTensor::new(dims.to_vec(), values).expect("random tensor is valid")
}

fn random_rank_r(rng: &mut ChaCha8Rng, dims: &[usize], r: usize) -> DenseTensor {
    let factors: Vec<Mat> = dims
        .iter()
        .map(|&n| {
            Mat::new(
                n,
                r,
                (0..n * r).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
            .expect("shape matches")
        })
        .collect();
    CpFactors::new(factors)
        .expect("factors valid")
        .to_dense()
        .expect("expansion valid")
}

fn nonempty_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    loop {
        let set: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if !set.is_empty() {
            return set;
        }
    }
}

/// Atomic-norm properties: oracle exactness, the four product/subtensor
/// inequalities, the rank sandwich, the norm axioms, and the rank-1 bound.
pub fn verify_atomic(opts: VerifyOptions) -> SuiteReport {
    let cases = if opts.quick { 40 } else { 200 };
    let mut violations: Vec<String> = Vec::new();
    let mut checks = 0usize;

    // exactness anchors
    {
        let h = DenseTensor::new(vec![2, 2], vec![1.0, 1.0, 1.0, -1.0]).unwrap();
        let v = atomic_norm(&h).map(|d| d.value).unwrap_or(f64::NAN);
        checks += 1;
        if (v - 2.0).abs() > 1e-9 {
            violations.push(format!("[[1,1],[1,-1]] atomic norm {v}, expected 2"));
        }
        let z = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        let v = atomic_norm(&z).map(|d| d.value).unwrap_or(f64::NAN);
        checks += 1;
        if v.abs() > 1e-9 {
            violations.push(format!("zero tensor atomic norm {v}"));
        }
        let atoms = enumerate_atoms(&[2, 2, 2]).unwrap();
        let mut rng = seed::rng_from(&[opts.seed, 1]);
        for _ in 0..(if opts.quick { 10 } else { 50 }) {
            let atom = &atoms[rng.random_range(0..atoms.len())];
            let v = atomic_norm(&atom.to_dense())
                .map(|d| d.value)
                .unwrap_or(f64::NAN);
            checks += 1;
            if (v - 1.0).abs() > 1e-9 {
                violations.push(format!("sign tensor atomic norm {v}, expected 1"));
            }
        }
    }

    // subtensor monotonicity at dims (3,3)
    let restriction: Vec<String> = (0..cases)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = seed::rng_from(&[opts.seed, 2, i as u64]);
            let t = random_tensor(&mut rng, &[3, 3]);
            let sets = vec![nonempty_subset(&mut rng, 3), nonempty_subset(&mut rng, 3)];
            let sub = t.subtensor(&sets).ok()?;
            let vt = atomic_norm(&t).ok()?.value;
            let vs = atomic_norm(&sub).ok()?.value;
            (vs > vt + NORM_TOL).then(|| format!("subtensor monotonicity violated: {vs} > {vt}"))
        })
        .collect();
    checks += cases;
    violations.extend(restriction);

    // Kronecker/Hadamard inequalities on 2×2 matrices
    let products: Vec<String> = (0..cases)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = seed::rng_from(&[opts.seed, 3, i as u64]);
            let t = random_tensor(&mut rng, &[2, 2]);
            let s = random_tensor(&mut rng, &[2, 2]);
            let mut local = Vec::new();
            let (vt, vs) = match (atomic_norm(&t), atomic_norm(&s)) {
                (Ok(a), Ok(b)) => (a.value, b.value),
                _ => return vec!["product inequalities: oracle failure".to_string()].into_iter(),
            };
            if let Ok(kron) = t.kronecker(&s) {
                if let Ok(vk) = atomic_norm(&kron).map(|d| d.value) {
                    if vk > vt * vs + NORM_TOL {
                        local.push(format!(
                            "kronecker submultiplicativity violated: {vk} > {vt}·{vs}"
                        ));
                    }
                    if let Ok(had) = t.hadamard(&s) {
                        if let Ok(vh) = atomic_norm(&had).map(|d| d.value) {
                            if vh > vk + NORM_TOL {
                                local.push(format!("hadamard vs kronecker violated: {vh} > {vk}"));
                            }
                        }
                    }
                }
            }
            if let Ok(sq) = t.hadamard(&t) {
                if let Ok(vsq) = atomic_norm(&sq).map(|d| d.value) {
                    if vsq > vt * vt + NORM_TOL {
                        local.push(format!(
                            "hadamard square bound violated: {vsq} > {}",
                            vt * vt
                        ));
                    }
                }
            }
            local.into_iter()
        })
        .collect();
    checks += 3 * cases;
    violations.extend(products);

    // rank sandwich on rank-r tensors at (2,2,2)
    let sandwich: Vec<String> = (0..cases)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = seed::rng_from(&[opts.seed, 4, i as u64]);
            let r = rng.random_range(1..=3usize);
            let t = random_rank_r(&mut rng, &[2, 2, 2], r);
            let linf = t.max_abs();
            let mut local = Vec::new();
            match atomic_norm(&t) {
                Ok(d) => {
                    if d.value < linf - NORM_TOL {
                        local.push(format!("lower bound violated: {} < |T|∞ = {linf}", d.value));
                    }
                    let ub = atomic_rank_bound(r as u32, 3, linf).unwrap();
                    if d.value > ub + NORM_TOL {
                        local.push(format!("upper bound violated: {} > {ub} (r={r})", d.value));
                    }
                }
                Err(e) => local.push(format!("sandwich: oracle failure {e}")),
            }
            local.into_iter()
        })
        .collect();
    checks += 2 * cases;
    violations.extend(sandwich);

    // rank-1 tensors with unit-∞ factors have norm at most 1
    let rank1: Vec<String> = (0..cases.min(100))
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = seed::rng_from(&[opts.seed, 5, i as u64]);
            let t = random_rank_r(&mut rng, &[2, 2, 2], 1);
            let v = atomic_norm(&t).ok()?.value;
            (v > 1.0 + NORM_TOL).then(|| format!("rank-1 unit-factor bound violated: {v} > 1"))
        })
        .collect();
    checks += cases.min(100);
    violations.extend(rank1);

    // norm axioms: absolute homogeneity and the triangle inequality
    let axioms: Vec<String> = (0..cases.min(60))
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = seed::rng_from(&[opts.seed, 6, i as u64]);
            let t = random_tensor(&mut rng, &[2, 2]);
            let s = random_tensor(&mut rng, &[2, 2]);
            let c: f64 = rng.random_range(-3.0..3.0);
            let mut local = Vec::new();
            let scaled =
                DenseTensor::new(vec![2, 2], t.values().iter().map(|v| c * v).collect()).unwrap();
            let sum = DenseTensor::new(
                vec![2, 2],
                t.values()
                    .iter()
                    .zip(s.values())
                    .map(|(a, b)| a + b)
                    .collect(),
            )
            .unwrap();
            if let (Ok(vt), Ok(vs), Ok(vc), Ok(vsum)) = (
                atomic_norm(&t).map(|d| d.value),
                atomic_norm(&s).map(|d| d.value),
                atomic_norm(&scaled).map(|d| d.value),
                atomic_norm(&sum).map(|d| d.value),
            ) {
                if (vc - c.abs() * vt).abs() > NORM_TOL * (1.0 + vt) {
                    local.push(format!(
                        "homogeneity violated: ‖{c}T‖ = {vc}, |c|‖T‖ = {}",
                        c.abs() * vt
                    ));
                }
                if vsum > vt + vs + NORM_TOL {
                    local.push(format!(
                        "triangle inequality violated: {vsum} > {vt} + {vs}"
                    ));
                }
            }
            local.into_iter()
        })
        .collect();
    checks += 2 * cases.min(60);
    violations.extend(axioms);

    SuiteReport {
        name: "atomic",
        checks,
        violations,
    }
}

/// Random d-regular graph on 4 vertices: K₄ or a switch-chain variant of
/// the 4-cycle.
fn random_small_graph(rng: &mut ChaCha8Rng) -> RegularGraph {
    if rng.random_bool(0.5) {
        // K4 (3-regular)
        RegularGraph::new(4, 3, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    } else {
        let c4 = ring_graph(4, 2).unwrap();
        switch_chain(&c4, rng.random_range(0..4), rng.random())
    }
}

/// Mask properties: lifting regularity, both discrepancy inequalities, and
/// the λ₂ estimator contracts.
pub fn verify_mask(opts: VerifyOptions) -> SuiteReport {
    let cases = if opts.quick { 20 } else { 100 };
    let mut violations: Vec<String> = Vec::new();
    let mut checks = 0usize;

    // lifting regularity
    for (n, d, t) in [(3usize, 2usize, 3usize), (6, 2, 2), (6, 4, 3), (8, 4, 2)] {
        let g = ring_graph(n, d).unwrap();
        let mask = lift_graph(&g, t).unwrap();
        checks += 1;
        let expect = n * d.pow((t - 1) as u32);
        if mask.len() != expect {
            violations.push(format!("lift |E| = {} expected {expect}", mask.len()));
        }
        for mode in 0..t {
            let mut counts = vec![0usize; n];
            for tuple in mask.tuples() {
                counts[tuple[mode]] += 1;
            }
            checks += 1;
            if counts.iter().any(|&c| c != d.pow((t - 1) as u32)) {
                violations.push(format!(
                    "lift mode {mode} degrees not uniform for n={n} d={d} t={t}"
                ));
            }
        }
    }

    // lifted-mask discrepancy inequality at n=4, t=3
    let lifted: Vec<String> = (0..cases)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = seed::rng_from(&[opts.seed, 7, i as u64]);
            let g = random_small_graph(&mut rng);
            let mut local = Vec::new();
            match (lift_graph(&g, 3), second_eigenvalue(&g)) {
                (Ok(mask), Ok(lambda)) => {
                    let t = random_tensor(&mut rng, &[4, 4, 4]);
                    let lhs = discrepancy(&t, &mask).unwrap();
                    match atomic_norm(&t) {
                        Ok(d) => {
                            let rhs = discrepancy_rhs_lifted(3, lambda, g.degree() as f64, d.value);
                            if lhs > rhs + 1e-9 {
                                local.push(format!(
                                    "lifted discrepancy inequality violated: {lhs} > {rhs} (λ={lambda}, d={})",
                                    g.degree()
                                ));
                            }
                        }
                        Err(e) => local.push(format!("lifted discrepancy: oracle failure {e}")),
                    }
                }
                _ => local.push("lifted discrepancy: graph construction failed".into()),
            }
            local.into_iter()
        })
        .collect();
    checks += cases;
    violations.extend(lifted);

    // hypergraph discrepancy with the exhaustive ALS oracle (a lower bound
    // on λ₂(H), noted as a caveat)
    let hypergraph: Vec<String> = (0..cases.min(50))
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = seed::rng_from(&[opts.seed, 8, i as u64]);
            let n = 4usize;
            let dims = vec![n, n, n];
            let total = 64usize;
            let count = rng.random_range(8..=32usize);
            let mut linear: Vec<usize> = (0..total).collect();
            for k in 0..count {
                let j = rng.random_range(k..total);
                linear.swap(k, j);
            }
            let tuples: Vec<Vec<usize>> = linear[..count]
                .iter()
                .map(|&lin| vec![lin / 16, (lin / 4) % 4, lin % 4])
                .collect();
            let mask = SamplingMask::new(dims, tuples).ok()?;
            let t = random_tensor(&mut rng, &[4, 4, 4]);
            let lhs = discrepancy(&t, &mask).unwrap();
            let norm = atomic_norm(&t).ok()?.value;
            let l2h = estimate_lambda2(
                &mask,
                Lambda2Params {
                    restarts: 64,
                    sweeps: 500,
                    seed: seed::mix(&[opts.seed, 9, i as u64]),
                },
            );
            let rhs = discrepancy_rhs_hypergraph(3, n as f64, l2h, mask.len() as f64, norm);
            (lhs > rhs + 1e-9).then(|| {
                format!("hypergraph discrepancy inequality violated: {lhs} > {rhs} (λ₂ est {l2h})")
            })
        })
        .collect();
    checks += cases.min(50);
    violations.extend(hypergraph);

    // estimator and shuffle contracts
    {
        let g = ring_graph(8, 4).unwrap();
        let mask = lift_graph(&g, 3).unwrap();
        let p = Lambda2Params {
            restarts: 4,
            sweeps: 100,
            seed: 11,
        };
        let a = estimate_lambda2(&mask, p);
        let b = estimate_lambda2(&mask, p);
        checks += 1;
        if a != b {
            violations.push("λ₂ estimator is not seed-deterministic".into());
        }
        let mut prev = 0.0;
        for restarts in [1usize, 2, 4, 8] {
            let v = estimate_lambda2(
                &mask,
                Lambda2Params {
                    restarts,
                    sweeps: 100,
                    seed: 11,
                },
            );
            checks += 1;
            if v < prev - 1e-12 {
                violations.push(format!("λ₂ estimate decreased with restarts: {v} < {prev}"));
            }
            prev = v;
        }
        let shuffled = shuffle_mask(&mask, 0.5, 21).unwrap();
        checks += 1;
        if shuffled.len() != mask.len() {
            violations.push("shuffle changed |E|".into());
        }
    }

    SuiteReport {
        name: "mask",
        checks,
        violations,
    }
}

/// Bound-calculator properties: monotonicity in the gap statistics and in
/// the rank, plus the randomized and annealed discrepancy-bound checks.
pub fn verify_bounds(opts: VerifyOptions) -> SuiteReport {
    use crate::bounds::{evaluate_bound, BoundInputs, BoundKind};

    let mut violations: Vec<String> = Vec::new();
    let mut checks = 0usize;

    // monotonicity sweeps
    let base_thm3 = |l2h: f64| BoundInputs {
        n: Some(8.0),
        t: Some(3),
        lambda2_h: Some(l2h),
        e_count: Some(128.0),
        atomic_norm: Some(1.5),
        ..Default::default()
    };
    let mut prev = f64::NEG_INFINITY;
    for l2h in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let v = evaluate_bound(BoundKind::Thm3, &base_thm3(l2h))
            .unwrap()
            .value;
        checks += 1;
        if v < prev {
            violations.push(format!("thm3 not monotone in λ₂(H): {v} < {prev}"));
        }
        prev = v;
    }
    for kind in [BoundKind::Thm4, BoundKind::Thm4Rank] {
        let mut prev = f64::NEG_INFINITY;
        for lam in [0.0, 0.5, 1.0, 2.0] {
            let inputs = BoundInputs {
                t: Some(3),
                lambda: Some(lam),
                d: Some(8.0),
                atomic_norm: Some(1.0),
                r: Some(2.0),
                linf: Some(1.0),
                ..Default::default()
            };
            let v = evaluate_bound(kind, &inputs).unwrap().value;
            checks += 1;
            if v < prev {
                violations.push(format!("{kind:?} not monotone in λ"));
            }
            prev = v;
        }
    }
    for kind in [
        BoundKind::Thm4Rank,
        BoundKind::PoissonLifted,
        BoundKind::SampleComplexity,
    ] {
        let mut prev = f64::NEG_INFINITY;
        for r in [1.0, 2.0, 3.0, 4.0] {
            let inputs = BoundInputs {
                n: Some(16.0),
                t: Some(3),
                lambda: Some(1.0),
                d: Some(8.0),
                r: Some(r),
                linf: Some(1.0),
                alpha: Some(6.0),
                beta: Some(1.0),
                epsilon: Some(0.5),
                ..Default::default()
            };
            let v = evaluate_bound(kind, &inputs).unwrap().value;
            checks += 1;
            if v < prev {
                violations.push(format!("{kind:?} not monotone in r"));
            }
            prev = v;
        }
    }

    // randomized discrepancy-bound reports
    let cases = if opts.quick { 15 } else { 60 };
    let random_reports: Vec<String> = (0..cases)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = seed::rng_from(&[opts.seed, 10, i as u64]);
            let g = random_small_graph(&mut rng);
            let mask = lift_graph(&g, 3).ok()?;
            let t = random_tensor(&mut rng, &[4, 4, 4]);
            match check_discrepancy_bounds(&t, &mask, Some(&g)) {
                Ok(rep) => (!rep.pass)
                    .then(|| format!("discrepancy-bound check failed with margin {}", rep.margin)),
                Err(e) => Some(format!("discrepancy-bound check errored: {e}")),
            }
        })
        .collect();
    checks += cases;
    violations.extend(random_reports);

    // simulated-annealing falsification at n=3 over the C₃ lift
    let proposals = if opts.quick { 400 } else { 10_000 };
    let g = ring_graph(3, 2).unwrap();
    let mask = lift_graph(&g, 3).unwrap();
    let lambda = second_eigenvalue(&g).unwrap();
    let mut rng = seed::rng_from(&[opts.seed, 11]);
    let mut current = random_tensor(&mut rng, &[3, 3, 3]);
    let score = |t: &DenseTensor| -> f64 {
        let lhs = discrepancy(t, &mask).unwrap();
        let norm = atomic_norm(t).map(|d| d.value).unwrap_or(f64::INFINITY);
        lhs - discrepancy_rhs_lifted(3, lambda, 2.0, norm)
    };
    let mut cur_score = score(&current);
    let mut best_score = cur_score;
    let mut temp = 0.5f64;
    let cooling = (0.005f64 / 0.5).powf(1.0 / proposals as f64);
    for _ in 0..proposals {
        let mut proposal = current.clone();
        let idx = rng.random_range(0..proposal.len());
        let sigma = temp.max(0.02);
        proposal.values_mut()[idx] =
            (proposal.values()[idx] + rng.random_range(-sigma..sigma)).clamp(-1.0, 1.0);
        let s = score(&proposal);
        if s > cur_score || rng.random::<f64>() < ((s - cur_score) / temp).exp() {
            current = proposal;
            cur_score = s;
            best_score = best_score.max(s);
        }
        temp *= cooling;
    }
    checks += proposals;
    if best_score > 1e-9 {
        violations.push(format!(
            "annealing found a discrepancy-bound violation: {best_score}"
        ));
    }

    SuiteReport {
        name: "bounds",
        checks,
        violations,
    }
}

pub fn run_all(opts: VerifyOptions) -> Vec<SuiteReport> {
    vec![verify_atomic(opts), verify_mask(opts), verify_bounds(opts)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        let opts = VerifyOptions {
            quick: true,
            seed: 99,
        };
        for report in run_all(opts) {
            assert!(
                report.passed(),
                "suite {} reported violations: {:?}",
                report.name,
                report.violations
            );
        }
    }
}
