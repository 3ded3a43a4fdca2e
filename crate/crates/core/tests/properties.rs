//! Property tests: invariants checked against independent oracles.

use masked_consensus::graph::WeightedDigraph;
use masked_consensus::masks::{MaskFamily, MaskSpec, ParamRanges};
use proptest::prelude::*;

/// Reachability closure by repeated squaring of the adjacency relation;
/// independent of the SCC-based path used by the library.
fn reachability_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        reach[i][i] = true;
    }
    for &(s, d) in edges {
        reach[s][d] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

fn strongly_connected_oracle(n: usize, edges: &[(usize, usize)]) -> bool {
    let reach = reachability_oracle(n, edges);
    (0..n).all(|i| (0..n).all(|j| reach[i][j]))
}

/// Closed-neighborhood containment by explicit bitmask subsets.
fn assumption1_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut closed = vec![0u64; n];
    for i in 0..n {
        closed[i] |= 1 << i;
    }
    for &(s, d) in edges {
        closed[d] |= 1 << s;
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && closed[i] & !closed[j] == 0 {
                out.push((i, j));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn generator_outputs_are_balanced_and_connected(
        seed in 0u64..10_000,
        n in 3usize..=12,
        extra in 0usize..=8,
    ) {
        let g = WeightedDigraph::random_balanced(n, extra, seed).unwrap();
        let lap = g.laplacian().expect("cycle superposition is balanced");
        prop_assert!(lap.is_irreducible());
        for i in 0..n {
            let row: f64 = lap.matrix().row(i).sum();
            let col: f64 = lap.matrix().column(i).sum();
            prop_assert!(row.abs() <= 1e-12);
            prop_assert!(col.abs() <= 1e-12);
        }
        let plain: Vec<(usize, usize)> = g.edges().iter().map(|&(s, d, _)| (s, d)).collect();
        prop_assert!(strongly_connected_oracle(n, &plain));
    }

    #[test]
    fn assumption1_matches_bitmask_oracle(
        n in 1usize..=6,
        bits in any::<u64>(),
    ) {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| (bits >> k) & 1 == 1)
            .map(|(_, p)| *p)
            .collect();
        let weighted: Vec<(usize, usize, f64)> =
            edges.iter().map(|&(s, d)| (s, d, 1.0)).collect();
        let g = WeightedDigraph::new(n, weighted).unwrap();
        prop_assert_eq!(g.assumption1_violations(), assumption1_oracle(n, &edges));
    }

    #[test]
    fn strong_connectivity_matches_reachability_oracle(
        n in 2usize..=6,
        bits in any::<u64>(),
    ) {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| (bits >> k) & 1 == 1)
            .map(|(_, p)| *p)
            .collect();
        let weighted: Vec<(usize, usize, f64)> =
            edges.iter().map(|&(s, d)| (s, d, 1.0)).collect();
        let g = WeightedDigraph::new(n, weighted).unwrap();
        prop_assert_eq!(g.is_strongly_connected(), strongly_connected_oracle(n, &edges));
    }

    #[test]
    fn masks_are_bijective_in_x(
        family_idx in 0usize..6,
        spec_seed in 0u64..500,
        t in 0.0f64..100.0,
        x in -100.0f64..100.0,
        node in 0usize..4,
    ) {
        let family = MaskFamily::ALL[family_idx];
        let spec = MaskSpec::sample(family, 4, &ParamRanges::default(), spec_seed);
        let y = spec.eval(node, t, x);
        let back = spec.invert(node, t, y);
        prop_assert!(
            (back - x).abs() <= 1e-12 * x.abs().max(1.0),
            "family {:?}: x={} back={}", family, x, back
        );
    }

    #[test]
    fn mask_evaluation_is_strictly_increasing(
        family_idx in 0usize..6,
        spec_seed in 0u64..500,
        t in 0.0f64..50.0,
        lo in -50.0f64..50.0,
        gap in 1e-6f64..10.0,
    ) {
        let family = MaskFamily::ALL[family_idx];
        let spec = MaskSpec::sample(family, 2, &ParamRanges::default(), spec_seed);
        prop_assert!(spec.eval(0, t, lo + gap) > spec.eval(0, t, lo));
    }
}
