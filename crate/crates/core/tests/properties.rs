//! Property-based invariants across the crate.

use proptest::prelude::*;

use specgap_core::atomic::atomic_norm;
use specgap_core::graph::{ring_graph, switch_chain};
use specgap_core::mask::{grid_mask, shuffle_mask};
use specgap_core::tensor::{CpFactors, DenseTensor, Mat};

fn small_entry() -> impl Strategy<Value = f64> {
    (-100i32..=100).prop_map(|v| f64::from(v) / 50.0)
}

fn tensor_strategy(dims: Vec<usize>) -> impl Strategy<Value = DenseTensor> {
    let total: usize = dims.iter().product();
    proptest::collection::vec(small_entry(), total)
        .prop_map(move |values| DenseTensor::new(dims.clone(), values).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // entries of T*S appear in T⊗S at the diagonal index map
    #[test]
    fn hadamard_entries_sit_on_kronecker_diagonal(
        t in tensor_strategy(vec![3, 3]),
        s in tensor_strategy(vec![3, 3]),
    ) {
        let had = t.hadamard(&s).unwrap();
        let kron = t.kronecker(&s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let diag = [i + 3 * i, j + 3 * j];
                prop_assert_eq!(had.get(&[i, j]), kron.get(&diag));
            }
        }
    }

    #[test]
    fn frobenius_monotone_under_subtensor_and_dominates_linf(
        t in tensor_strategy(vec![4, 3]),
        row_mask in proptest::collection::vec(any::<bool>(), 4),
        col_mask in proptest::collection::vec(any::<bool>(), 3),
    ) {
        let rows: Vec<usize> = (0..4).filter(|&i| row_mask[i]).collect();
        let cols: Vec<usize> = (0..3).filter(|&i| col_mask[i]).collect();
        prop_assume!(!rows.is_empty() && !cols.is_empty());
        let sub = t.subtensor(&[rows, cols]).unwrap();
        prop_assert!(sub.frobenius_norm() <= t.frobenius_norm() + 1e-12);
        prop_assert!(t.max_abs() <= t.frobenius_norm() + 1e-12);
    }

    // cp_to_dense agrees with the brute-force nested summation
    #[test]
    fn cp_expansion_matches_brute_force(
        data in proptest::collection::vec(small_entry(), 36),
        r in 1usize..=3,
    ) {
        let dims = [4usize, 3, 3];
        let mut offset = 0;
        let factors: Vec<Mat> = dims
            .iter()
            .map(|&n| {
                let mut block: Vec<f64> = Vec::with_capacity(n * r);
                for k in 0..n * r {
                    block.push(data[(offset + k) % data.len()]);
                }
                offset += n * r;
                Mat::new(n, r, block).unwrap()
            })
            .collect();
        let cp = CpFactors::new(factors.clone()).unwrap();
        let dense = cp.to_dense().unwrap();
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let mut expect = 0.0;
                    for l in 0..r {
                        expect += factors[0].at(i, l) * factors[1].at(j, l) * factors[2].at(k, l);
                    }
                    let got = dense.get(&[i, j, k]);
                    prop_assert!(
                        (got - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                        "({i},{j},{k}): {got} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn tensor_text_round_trip(t in tensor_strategy(vec![2, 3, 2])) {
        let parsed = DenseTensor::parse_text(&t.to_text()).unwrap();
        prop_assert_eq!(parsed, t);
    }

    // switch chain is measure-preserving on degree sequences
    #[test]
    fn switch_chain_preserves_degrees(swaps in 0u64..150, seed in any::<u64>()) {
        let g = ring_graph(16, 4).unwrap();
        let h = switch_chain(&g, swaps, seed);
        let adj = h.adjacency_lists();
        prop_assert!(adj.iter().all(|a| a.len() == 4));
        prop_assert_eq!(h.edges().len(), g.edges().len());
    }

    #[test]
    fn shuffle_preserves_cardinality(fraction in 0.0f64..=1.0, seed in any::<u64>()) {
        let mask = grid_mask(&[6, 6, 6], 0.1).unwrap();
        let shuffled = shuffle_mask(&mask, fraction, seed).unwrap();
        prop_assert_eq!(shuffled.len(), mask.len());
        prop_assert_eq!(shuffled.dims(), mask.dims());
    }

    #[test]
    fn grid_mask_counts_follow_rounding(numer in 1usize..=16) {
        let dims = [4usize, 4];
        let fraction = numer as f64 / 16.0;
        let mask = grid_mask(&dims, fraction).unwrap();
        prop_assert_eq!(mask.len(), (fraction * 16.0).round() as usize);
    }
}

proptest! {
    // LP-backed checks are costlier; fewer cases
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn atomic_norm_absolutely_homogeneous(
        t in tensor_strategy(vec![2, 2]),
        c in (-30i32..=30).prop_map(|v| f64::from(v) / 10.0),
    ) {
        let base = atomic_norm(&t).unwrap().value;
        let scaled = DenseTensor::new(
            vec![2, 2],
            t.values().iter().map(|v| c * v).collect(),
        )
        .unwrap();
        let vs = atomic_norm(&scaled).unwrap().value;
        prop_assert!((vs - c.abs() * base).abs() <= 1e-7 * (1.0 + base));
    }
}
