#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use specgraph::graph::Graph;
use specgraph::laplacian::LaplacianKind;

/// Builds a graph from arbitrary pairs, dropping self loops and repeats.
pub fn graph_from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Graph {
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for &(u, v, w) in pairs {
        if u == v || !seen.insert((u.min(v), u.max(v))) {
            continue;
        }
        edges.push((u, v, Some(w)));
    }
    Graph::new(n, &edges).unwrap()
}

/// Erdős–Rényi style graph; weights are uniform in `[0.1, 5]` when `weighted`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64, weighted: bool) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                let w = if weighted {
                    Some(rng.random_range(0.1..5.0))
                } else {
                    None
                };
                edges.push((i, j, w));
            }
        }
    }
    Graph::new(n, &edges).unwrap()
}

/// Random graph that contains a random spanning tree, so it is connected.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, p: f64, weighted: bool) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        pairs.push((order[k], parent));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                pairs.push((i, j));
            }
        }
    }
    let triples: Vec<_> = pairs
        .into_iter()
        .map(|(u, v)| {
            (
                u,
                v,
                if weighted {
                    rng.random_range(0.1..5.0)
                } else {
                    1.0
                },
            )
        })
        .collect();
    graph_from_pairs(n, &triples)
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Graphs with up to `max_n` nodes and weights that are multiples of 1/4,
/// so sums of weights are exact in floating point.
pub fn dyadic_graph(min_n: usize, max_n: usize) -> impl Strategy<Value = Graph> {
    (min_n..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n, 1u32..=20), 0..=(3 * n)).prop_map(move |pairs| {
            let triples: Vec<_> = pairs
                .into_iter()
                .map(|(u, v, w)| (u, v, w as f64 / 4.0))
                .collect();
            graph_from_pairs(n, &triples)
        })
    })
}

/// Unweighted graphs with up to `max_n` nodes.
pub fn unweighted_graph(min_n: usize, max_n: usize) -> impl Strategy<Value = Graph> {
    (min_n..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..=(3 * n)).prop_map(move |pairs| {
            let triples: Vec<_> = pairs.into_iter().map(|(u, v)| (u, v, 1.0)).collect();
            graph_from_pairs(n, &triples)
        })
    })
}

/// Real-weighted graphs with up to `max_n` nodes.
pub fn weighted_graph(min_n: usize, max_n: usize) -> impl Strategy<Value = Graph> {
    (min_n..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n, 0.1f64..5.0), 0..=(3 * n))
            .prop_map(move |triples| graph_from_pairs(n, &triples))
    })
}

/// Graph paired with a signal of matching length.
pub fn graph_and_signal(
    graphs: impl Strategy<Value = Graph>,
) -> impl Strategy<Value = (Graph, Vec<f64>)> {
    graphs.prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), proptest::collection::vec(-1.0f64..1.0, n))
    })
}

/// Dense adjacency built straight from the edge list.
pub fn dense_adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut a = DMatrix::zeros(n, n);
    for e in g.edges() {
        a[(e.u, e.v)] = e.w;
        a[(e.v, e.u)] = e.w;
    }
    a
}

/// Independent dense Laplacian built from matrix algebra.
pub fn dense_laplacian(g: &Graph, kind: LaplacianKind) -> DMatrix<f64> {
    let a = dense_adjacency(g);
    let n = a.nrows();
    let d: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let dm = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone()));
    let inv_sqrt = |x: f64| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 };
    let inv = |x: f64| if x > 0.0 { 1.0 / x } else { 0.0 };
    let nonisolated = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        d.iter().map(|&x| if x > 0.0 { 1.0 } else { 0.0 }),
    ));
    match kind {
        LaplacianKind::Combinatorial => &dm - &a,
        LaplacianKind::Signless => &dm + &a,
        LaplacianKind::SymNormalized => {
            let s = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                d.iter().map(|&x| inv_sqrt(x)),
            ));
            nonisolated - &s * &a * &s
        }
        LaplacianKind::RandomWalk => {
            let s = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                d.iter().map(|&x| inv(x)),
            ));
            nonisolated - &s * &a
        }
    }
}

/// All-pairs hop distances; `None` for unreachable pairs.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in g.edges() {
        d[e.u][e.v] = 1;
        d[e.v][e.u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.into_iter()
        .map(|row| row.into_iter().map(|x| (x < inf).then_some(x)).collect())
        .collect()
}

/// Eigenvalues, ascending, from nalgebra's solver.
pub fn oracle_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// `g(M)` for a symmetric matrix via nalgebra's eigendecomposition.
pub fn oracle_matrix_function(m: &DMatrix<f64>, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let gains = eig.eigenvalues.map(g);
    &eig.eigenvectors * DMatrix::from_diagonal(&gains) * eig.eigenvectors.transpose()
}

/// `Σ c_k M^k` by repeated multiplication.
pub fn matrix_polynomial(m: &DMatrix<f64>, coeffs: &[f64]) -> DMatrix<f64> {
    let n = m.nrows();
    let mut power = DMatrix::identity(n, n);
    let mut out = DMatrix::zeros(n, n);
    for &c in coeffs {
        out += &power * c;
        power = &power * m;
    }
    out
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * nalgebra::DVector::from_column_slice(v))
        .as_slice()
        .to_vec()
}

/// Largest entrywise relative gap between the analytic gradients and
/// central differences with step `h`, on a random `n=6, C=3, H=4, F=2`
/// instance. Entries where both are below `1e-7` in magnitude are compared
/// against that floor.
pub fn gradient_check(seed: u64, h: f64) -> f64 {
    use rand::SeedableRng;
    use specgraph::gcn::{loss_over, GcnModel};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (n, c, hidden, f) = (6, 3, 4, 2);
    let g = random_connected_graph(&mut rng, n, 0.3, true);
    let a_hat = specgraph::filters::renormalized_adjacency(&g);
    let x = DMatrix::from_fn(n, c, |_, _| rng.random_range(-1.0..1.0));
    let w0 = DMatrix::from_fn(c, hidden, |_, _| rng.random_range(-1.0..1.0));
    let w1 = DMatrix::from_fn(hidden, f, |_, _| rng.random_range(-1.0..1.0));
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..f)).collect();
    let nodes = vec![0, 2, 3, 5];

    let model = GcnModel::from_weights(w0.clone(), w1.clone(), a_hat.clone(), seed).unwrap();
    let (_, cache) = model.forward(&x).unwrap();
    let grads = model.backward_over(&labels, &nodes, &cache).unwrap();

    let loss_at = |w0: &DMatrix<f64>, w1: &DMatrix<f64>| {
        let m = GcnModel::from_weights(w0.clone(), w1.clone(), a_hat.clone(), seed).unwrap();
        let (z, _) = m.forward(&x).unwrap();
        loss_over(&z, &labels, &nodes).unwrap()
    };
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-7);

    let mut worst: f64 = 0.0;
    for idx in 0..w0.len() {
        let (mut up, mut down) = (w0.clone(), w0.clone());
        up[idx] += h;
        down[idx] -= h;
        let numeric = (loss_at(&up, &w1) - loss_at(&down, &w1)) / (2.0 * h);
        worst = worst.max(rel(grads.w0[idx], numeric));
    }
    for idx in 0..w1.len() {
        let (mut up, mut down) = (w1.clone(), w1.clone());
        up[idx] += h;
        down[idx] -= h;
        let numeric = (loss_at(&w0, &up) - loss_at(&w0, &down)) / (2.0 * h);
        worst = worst.max(rel(grads.w1[idx], numeric));
    }
    worst
}
