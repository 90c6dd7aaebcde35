mod common;

use common::{dense_laplacian, dyadic_graph, graph_and_signal, unweighted_graph, weighted_graph};
use proptest::prelude::*;
use specgraph::graph::Graph;
use specgraph::laplacian::{apply_laplacian, incidence, laplacian, quadratic_form, LaplacianKind};

fn circulant(n: usize, offsets: &[usize]) -> Graph {
    let mut pairs = Vec::new();
    for i in 0..n {
        for &s in offsets {
            pairs.push((i, (i + s) % n));
        }
    }
    let triples: Vec<_> = pairs.into_iter().map(|(u, v)| (u, v, 1.0)).collect();
    common::graph_from_pairs(n, &triples)
}

proptest! {
    #[test]
    fn combinatorial_rows_sum_to_zero_exactly_for_dyadic_weights(g in dyadic_graph(1, 64)) {
        let l = laplacian(&g, LaplacianKind::Combinatorial);
        for i in 0..g.node_count() {
            prop_assert_eq!(l.matrix().row_sum(i), 0.0);
        }
    }

    #[test]
    fn combinatorial_rows_sum_to_zero_for_real_weights(g in weighted_graph(1, 64)) {
        let l = laplacian(&g, LaplacianKind::Combinatorial);
        for i in 0..g.node_count() {
            prop_assert!(l.matrix().row_sum(i).abs() <= 1e-12);
        }
    }

    #[test]
    fn quadratic_form_is_nonnegative((g, f) in graph_and_signal(weighted_graph(1, 64))) {
        let q = quadratic_form(&g, &f).unwrap();
        prop_assert!(q >= 0.0);
        let lf = apply_laplacian(&g, &f).unwrap();
        let via_matrix: f64 = f.iter().zip(&lf).map(|(a, b)| a * b).sum();
        prop_assert!((q - via_matrix).abs() <= 1e-9 * (1.0 + q.abs()));
    }

    #[test]
    fn coboundary_gram_is_the_laplacian(g in unweighted_graph(1, 32), seed in any::<u64>()) {
        let nabla = incidence(&g, seed).unwrap();
        prop_assert_eq!(nabla.gram(), laplacian(&g, LaplacianKind::Combinatorial).to_dense());
    }

    #[test]
    fn all_kinds_match_dense_algebra(g in weighted_graph(1, 24)) {
        for kind in LaplacianKind::ALL {
            let ours = laplacian(&g, kind).to_dense();
            let oracle = dense_laplacian(&g, kind);
            prop_assert!((ours - oracle).amax() <= 1e-12);
        }
    }

    #[test]
    fn signless_flips_off_diagonal_signs(g in dyadic_graph(1, 32)) {
        let l = laplacian(&g, LaplacianKind::Combinatorial).to_dense();
        let s = laplacian(&g, LaplacianKind::Signless).to_dense();
        prop_assert_eq!(&s, &s.transpose());
        let n = g.node_count();
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { l[(i, j)] } else { -l[(i, j)] };
                prop_assert_eq!(s[(i, j)], expected);
            }
        }
    }

    #[test]
    fn random_walk_rows_sum_to_zero(g in weighted_graph(1, 48)) {
        let rw = laplacian(&g, LaplacianKind::RandomWalk);
        let l = laplacian(&g, LaplacianKind::Combinatorial).to_dense();
        let dense = rw.to_dense();
        for i in 0..g.node_count() {
            let d = g.degrees()[i];
            if d > 0.0 {
                prop_assert!(rw.matrix().row_sum(i).abs() <= 1e-12);
                for j in 0..g.node_count() {
                    prop_assert!((dense[(i, j)] - l[(i, j)] / d).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn regular_graph_normalized_is_scaled_combinatorial(
        (n, offsets) in (5usize..24).prop_flat_map(|n| (Just(n), proptest::sample::subsequence((1..n.div_ceil(2)).collect::<Vec<_>>(), 1..=((n - 1) / 2))))
    ) {
        let g = circulant(n, &offsets);
        let k = g.degrees()[0];
        prop_assert!(g.degrees().iter().all(|&d| d == k));
        let sym = laplacian(&g, LaplacianKind::SymNormalized).to_dense();
        let comb = laplacian(&g, LaplacianKind::Combinatorial).to_dense();
        prop_assert!((sym - comb / k).amax() <= 1e-12);
    }
}
