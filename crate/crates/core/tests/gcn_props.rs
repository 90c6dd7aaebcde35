mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specgraph::filters::renormalized_adjacency;
use specgraph::gcn::{
    evaluate, generate_sbm, init_model, loss, propagation_matrix, sample_sbm_graph, softmax_rows,
    train, SbmParams,
};

fn smoke_params(seed: u64) -> SbmParams {
    SbmParams {
        blocks: 3,
        nodes_per_block: 20,
        p_in: 0.5,
        p_out: 0.05,
        feature_noise: 0.1,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn analytic_gradients_match_finite_differences(seed in any::<u64>()) {
        prop_assert!(common::gradient_check(seed, 1e-5) <= 1e-5);
    }
}

proptest! {
    #[test]
    fn softmax_ignores_row_shifts(
        rows in 1usize..8,
        cols in 1usize..6,
        seed in any::<u64>(),
        shift in -50.0f64..50.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let logits = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-5.0..5.0));
        let z = softmax_rows(&logits);
        for r in 0..rows {
            prop_assert!((z.row(r).sum() - 1.0).abs() <= 1e-12);
        }
        let mut shifted = logits.clone();
        shifted.row_mut(0).add_scalar_mut(shift);
        prop_assert!((softmax_rows(&shifted) - z).amax() <= 1e-12);
    }

    #[test]
    fn relabelling_nodes_permutes_outputs(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, n, 0.3, true);
        let x = DMatrix::from_fn(n, 3, |_, _| rng.random_range(-1.0..1.0));
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        // node i of the relabelled graph is node perm[i] of the original
        let p = DMatrix::from_fn(n, n, |i, j| if perm[i] == j { 1.0 } else { 0.0 });
        let a_hat = renormalized_adjacency(&g);
        let a_perm = &p * &a_hat * p.transpose();
        let x_perm = &p * &x;
        let model = init_model(3, 5, 2, a_hat, seed).unwrap();
        let permuted = init_model(3, 5, 2, a_perm, seed).unwrap();
        let (z, _) = model.forward(&x).unwrap();
        let (zp, _) = permuted.forward(&x_perm).unwrap();
        prop_assert!((zp - &p * z).amax() <= 1e-12);
    }
}

#[test]
fn first_epoch_lowers_the_loss_for_small_steps() {
    for seed in 0..5 {
        let (g, ds) = generate_sbm(&smoke_params(seed)).unwrap();
        let model = init_model(3, 8, 3, propagation_matrix(&g), seed).unwrap();
        let (_, history) = train(&model, &ds, 2, 0.01).unwrap();
        assert!(history[1].loss < history[0].loss, "seed {seed}");
    }
}

#[test]
fn training_is_reproducible_and_improves() {
    let (g, ds) = generate_sbm(&smoke_params(7)).unwrap();
    let model = init_model(3, 16, 3, propagation_matrix(&g), 7).unwrap();
    let (a, ha) = train(&model, &ds, 200, 0.2).unwrap();
    let (b, hb) = train(&model, &ds, 200, 0.2).unwrap();
    assert_eq!(ha, hb);
    assert_eq!(a, b);
    let (z, _) = a.forward(&ds.features).unwrap();
    assert!(loss(&z, &ds).unwrap() < ha[0].loss);
    let acc = evaluate(&a, &ds, &ds.test_mask).unwrap();
    assert_eq!(
        acc.to_bits(),
        evaluate(&b, &ds, &ds.test_mask).unwrap().to_bits()
    );
}

#[test]
fn sbm_is_reproducible() {
    let (g1, d1) = generate_sbm(&smoke_params(42)).unwrap();
    let (g2, d2) = generate_sbm(&smoke_params(42)).unwrap();
    assert_eq!(g1, g2);
    assert_eq!(d1, d2);
    assert_eq!(d1.train_mask.len(), 6);
    assert_eq!(d1.val_mask.len(), 6);
    assert_eq!(d1.test_mask.len(), 48);
}

#[test]
fn sbm_edge_densities_match_probabilities() {
    let params = smoke_params(0);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut intra, mut inter) = (0usize, 0usize);
    let trials = 40;
    for _ in 0..trials {
        let g = sample_sbm_graph(&params, &mut rng).unwrap();
        for e in g.edges() {
            if params.block_of(e.u) == params.block_of(e.v) {
                intra += 1;
            } else {
                inter += 1;
            }
        }
    }
    let b = params.nodes_per_block as f64;
    let intra_pairs = trials as f64 * params.blocks as f64 * b * (b - 1.0) / 2.0;
    let inter_pairs = trials as f64 * 3.0 * b * b;
    for (count, pairs, p) in [
        (intra, intra_pairs, params.p_in),
        (inter, inter_pairs, params.p_out),
    ] {
        let density = count as f64 / pairs;
        let se = (p * (1.0 - p) / pairs).sqrt();
        assert!(
            (density - p).abs() < 3.0 * se,
            "density {density} vs {p} (se {se})"
        );
    }
}

#[test]
fn generated_graph_density_on_one_draw() {
    let params = smoke_params(3);
    let (g, ds) = generate_sbm(&params).unwrap();
    assert_eq!(g.connected_components().component_count, 1);
    let intra = g
        .edges()
        .iter()
        .filter(|e| ds.labels[e.u] == ds.labels[e.v])
        .count() as f64;
    let pairs: f64 = 3.0 * 20.0 * 19.0 / 2.0;
    let se = (0.5 * 0.5 / pairs).sqrt();
    assert!((intra / pairs - 0.5).abs() < 3.0 * se);
}
