//! Two-layer GCN for semi-supervised node classification,
//! `Z = softmax(Â ReLU(Â X W0) W1)`, trained by full-batch gradient descent
//! on the cross-entropy summed over the labelled nodes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::renormalized_adjacency;
use crate::formats::{
    format_float, parse_dense_csv, parse_edge_list, parse_id_list, parse_labels, write_dense_csv,
    write_edge_list, write_id_list, write_labels,
};
use crate::graph::Graph;

/// Smallest probability fed to the logarithm in the loss.
pub const LOG_CLAMP: f64 = 1e-15;

/// Node features, labels and disjoint train/validation/test id sets.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDataset {
    pub features: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub train_mask: Vec<usize>,
    pub val_mask: Vec<usize>,
    pub test_mask: Vec<usize>,
}

impl NodeDataset {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        let bad = |msg: String| Err(Error::InvalidDataset(msg));
        if self.features.nrows() != n {
            return bad(format!(
                "{} feature rows for {n} labels",
                self.features.nrows()
            ));
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= self.num_classes) {
            return bad(format!("label {l} outside 0..{}", self.num_classes));
        }
        let mut owner = vec![None; n];
        for (name, mask) in [
            ("train", &self.train_mask),
            ("val", &self.val_mask),
            ("test", &self.test_mask),
        ] {
            for &id in mask {
                if id >= n {
                    return Err(Error::IdOutOfRange { id, n });
                }
                if let Some(prev) = owner[id].replace(name) {
                    return bad(format!("node {id} appears in both {prev} and {name} masks"));
                }
            }
        }
        let mut seen = vec![false; self.num_classes];
        for &id in &self.train_mask {
            seen[self.labels[id]] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return bad(format!("class {c} has no training node"));
        }
        Ok(())
    }
}

/// Weights of the two layers and the cached propagation matrix `Â`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    pub w0: DMatrix<f64>,
    pub w1: DMatrix<f64>,
    a_hat: DMatrix<f64>,
    seed: u64,
    version: u64,
}

/// Intermediate activations from [`GcnModel::forward`], consumed by
/// [`GcnModel::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    ax: DMatrix<f64>,
    hidden_pre: DMatrix<f64>,
    hidden: DMatrix<f64>,
    a_hidden: DMatrix<f64>,
    pub logits: DMatrix<f64>,
    pub z: DMatrix<f64>,
    version: u64,
}

impl ForwardCache {
    /// `Â X W0` before the ReLU.
    pub fn hidden_pre(&self) -> &DMatrix<f64> {
        &self.hidden_pre
    }

    pub fn hidden(&self) -> &DMatrix<f64> {
        &self.hidden
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w0: DMatrix<f64>,
    pub w1: DMatrix<f64>,
}

/// One row of the training history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub train_acc: f64,
    pub val_acc: Option<f64>,
}

/// Half-width of the Glorot uniform initialization.
pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Row-wise softmax, shifted by the row maximum.
pub fn softmax_rows(logits: &DMatrix<f64>) -> DMatrix<f64> {
    let mut z = logits.clone();
    for mut row in z.row_iter_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.iter_mut().for_each(|x| *x = (*x - max).exp());
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= sum);
    }
    z
}

/// Index of the largest entry of each row, ties to the lowest index.
pub fn argmax_rows(z: &DMatrix<f64>) -> Vec<usize> {
    z.row_iter()
        .map(|row| {
            let mut best = 0;
            for (k, &x) in row.iter().enumerate() {
                if x > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Sum over `nodes` of `-ln Z[l, y_l]`, with the probability clamped at
/// [`LOG_CLAMP`]. Repeated node ids count repeatedly.
pub fn loss_over(z: &DMatrix<f64>, labels: &[usize], nodes: &[usize]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptyTrainSet);
    }
    let mut total = 0.0;
    for &l in nodes {
        if l >= z.nrows() {
            return Err(Error::IdOutOfRange {
                id: l,
                n: z.nrows(),
            });
        }
        let y = labels[l];
        if y >= z.ncols() {
            return Err(Error::InvalidDataset(format!(
                "label {y} outside 0..{}",
                z.ncols()
            )));
        }
        total -= z[(l, y)].max(LOG_CLAMP).ln();
    }
    Ok(total)
}

/// Cross-entropy summed over the training nodes.
pub fn loss(z: &DMatrix<f64>, dataset: &NodeDataset) -> Result<f64> {
    loss_over(z, &dataset.labels, &dataset.train_mask)
}

/// Fraction of `mask` nodes whose argmax prediction equals the label.
pub fn accuracy(z: &DMatrix<f64>, labels: &[usize], mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let pred = argmax_rows(z);
    let mut correct = 0usize;
    for &i in mask {
        if i >= pred.len() {
            return Err(Error::IdOutOfRange {
                id: i,
                n: pred.len(),
            });
        }
        if pred[i] == labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / mask.len() as f64)
}

/// Builds a model with Glorot-uniform weights drawn from a seeded generator.
pub fn init_model(
    c: usize,
    h: usize,
    f: usize,
    a_hat: DMatrix<f64>,
    seed: u64,
) -> Result<GcnModel> {
    if c == 0 || h == 0 || f == 0 {
        return Err(Error::BadDimensions(format!(
            "C={c}, H={h}, F={f} must all be positive"
        )));
    }
    if a_hat.nrows() != a_hat.ncols() {
        return Err(Error::BadDimensions(
            "propagation matrix must be square".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s0 = glorot_bound(c, h);
    let w0 = DMatrix::from_fn(c, h, |_, _| rng.random_range(-s0..=s0));
    let s1 = glorot_bound(h, f);
    let w1 = DMatrix::from_fn(h, f, |_, _| rng.random_range(-s1..=s1));
    Ok(GcnModel {
        w0,
        w1,
        a_hat,
        seed,
        version: 0,
    })
}

impl GcnModel {
    /// Model with explicit weights.
    pub fn from_weights(
        w0: DMatrix<f64>,
        w1: DMatrix<f64>,
        a_hat: DMatrix<f64>,
        seed: u64,
    ) -> Result<Self> {
        if w0.ncols() != w1.nrows() {
            return Err(Error::BadDimensions(format!(
                "W0 is {}x{} but W1 is {}x{}",
                w0.nrows(),
                w0.ncols(),
                w1.nrows(),
                w1.ncols()
            )));
        }
        if a_hat.nrows() != a_hat.ncols() {
            return Err(Error::BadDimensions(
                "propagation matrix must be square".into(),
            ));
        }
        Ok(GcnModel {
            w0,
            w1,
            a_hat,
            seed,
            version: 0,
        })
    }

    pub fn a_hat(&self) -> &DMatrix<f64> {
        &self.a_hat
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `(C, H, F)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.w0.nrows(), self.w0.ncols(), self.w1.ncols())
    }

    pub fn forward(&self, x: &DMatrix<f64>) -> Result<(DMatrix<f64>, ForwardCache)> {
        let n = self.a_hat.nrows();
        if x.nrows() != n || x.ncols() != self.w0.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "features are {}x{}, model expects {n}x{}",
                x.nrows(),
                x.ncols(),
                self.w0.nrows()
            )));
        }
        let ax = &self.a_hat * x;
        let hidden_pre = &ax * &self.w0;
        let hidden = hidden_pre.map(|v| v.max(0.0));
        let a_hidden = &self.a_hat * &hidden;
        let logits = &a_hidden * &self.w1;
        let z = softmax_rows(&logits);
        let cache = ForwardCache {
            ax,
            hidden_pre,
            hidden,
            a_hidden,
            logits,
            z: z.clone(),
            version: self.version,
        };
        Ok((z, cache))
    }

    /// Analytic gradients of [`loss`] with respect to `W0` and `W1`.
    pub fn backward(
        &self,
        x: &DMatrix<f64>,
        dataset: &NodeDataset,
        cache: &ForwardCache,
    ) -> Result<Gradients> {
        if x.nrows() != cache.ax.nrows() || x.ncols() != self.w0.nrows() {
            return Err(Error::StaleCache);
        }
        self.backward_over(&dataset.labels, &dataset.train_mask, cache)
    }

    /// Gradients of [`loss_over`] for an explicit list of labelled nodes.
    pub fn backward_over(
        &self,
        labels: &[usize],
        nodes: &[usize],
        cache: &ForwardCache,
    ) -> Result<Gradients> {
        if cache.version != self.version {
            return Err(Error::StaleCache);
        }
        if nodes.is_empty() {
            return Err(Error::EmptyTrainSet);
        }
        let (n, f) = (cache.z.nrows(), cache.z.ncols());
        // d loss / d logits: (Z - Y) on labelled rows, zero elsewhere
        let mut d_logits = DMatrix::zeros(n, f);
        for &l in nodes {
            if l >= n {
                return Err(Error::IdOutOfRange { id: l, n });
            }
            for k in 0..f {
                d_logits[(l, k)] += cache.z[(l, k)];
            }
            d_logits[(l, labels[l])] -= 1.0;
        }
        let grad_w1 = cache.a_hidden.tr_mul(&d_logits);
        let d_hidden = self.a_hat.tr_mul(&(&d_logits * self.w1.transpose()));
        let d_pre = d_hidden.zip_map(&cache.hidden_pre, |g, p| if p > 0.0 { g } else { 0.0 });
        let grad_w0 = cache.ax.tr_mul(&d_pre);
        Ok(Gradients {
            w0: grad_w0,
            w1: grad_w1,
        })
    }

    /// `W ← W - lr · grad`.
    pub fn apply_gradients(&mut self, grads: &Gradients, learning_rate: f64) {
        self.w0 -= &grads.w0 * learning_rate;
        self.w1 -= &grads.w1 * learning_rate;
        self.version += 1;
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.forward(x)?.0))
    }
}

/// Full-batch gradient descent for `epochs` steps. Each history row holds the
/// loss and accuracies measured before that epoch's update.
pub fn train(
    model: &GcnModel,
    dataset: &NodeDataset,
    epochs: usize,
    learning_rate: f64,
) -> Result<(GcnModel, Vec<EpochRecord>)> {
    if epochs == 0 {
        return Err(Error::BadDimensions("epochs must be at least 1".into()));
    }
    if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
        return Err(Error::BadDimensions(format!(
            "learning rate {learning_rate} must be non-negative"
        )));
    }
    dataset.validate()?;
    let mut model = model.clone();
    let mut history = Vec::with_capacity(epochs);
    for epoch in 1..=epochs {
        let (z, cache) = model.forward(&dataset.features)?;
        let loss_value = loss(&z, dataset)?;
        let train_acc = accuracy(&z, &dataset.labels, &dataset.train_mask)?;
        let val_acc = if dataset.val_mask.is_empty() {
            None
        } else {
            Some(accuracy(&z, &dataset.labels, &dataset.val_mask)?)
        };
        history.push(EpochRecord {
            epoch,
            loss: loss_value,
            train_acc,
            val_acc,
        });
        let grads = model.backward(&dataset.features, dataset, &cache)?;
        model.apply_gradients(&grads, learning_rate);
    }
    Ok((model, history))
}

/// Accuracy of `model` on the nodes in `mask`.
pub fn evaluate(model: &GcnModel, dataset: &NodeDataset, mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (z, _) = model.forward(&dataset.features)?;
    accuracy(&z, &dataset.labels, mask)
}

/// `epoch,loss,train_acc,val_acc` with a header row; a missing validation
/// accuracy is left empty.
pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,loss,train_acc,val_acc\n");
    for r in history {
        let val = r.val_acc.map(format_float).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.epoch,
            format_float(r.loss),
            format_float(r.train_acc),
            val
        );
    }
    out
}

/// Stochastic block model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmParams {
    pub blocks: usize,
    pub nodes_per_block: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_noise: f64,
    pub seed: u64,
}

/// Attempts made before falling back to the largest component.
pub const SBM_MAX_ATTEMPTS: usize = 100;

impl SbmParams {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::DegenerateParameters(m));
        if self.blocks < 2 {
            return bad(format!("need at least 2 blocks, got {}", self.blocks));
        }
        if self.nodes_per_block == 0 {
            return bad("nodes_per_block must be positive".into());
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return bad(format!(
                "need 0 <= p_out < p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            ));
        }
        if !(self.feature_noise >= 0.0 && self.feature_noise.is_finite()) {
            return bad(format!(
                "feature noise {} must be non-negative",
                self.feature_noise
            ));
        }
        Ok(())
    }

    /// Block of node `i` before any component filtering.
    pub fn block_of(&self, i: usize) -> usize {
        i / self.nodes_per_block
    }
}

/// One SBM draw: node `i` belongs to block `i / nodes_per_block`; each pair
/// is joined with probability `p_in` inside a block and `p_out` across.
pub fn sample_sbm_graph<R: Rng>(params: &SbmParams, rng: &mut R) -> Result<Graph> {
    params.validate()?;
    let n = params.blocks * params.nodes_per_block;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if params.block_of(i) == params.block_of(j) {
                params.p_in
            } else {
                params.p_out
            };
            if rng.random_bool(p) {
                edges.push((i, j, None));
            }
        }
    }
    Graph::new(n, &edges)
}

/// Generates a connected SBM graph and a node-classification dataset on it.
///
/// Graphs are redrawn until connected, up to [`SBM_MAX_ATTEMPTS`] times;
/// after that the largest component of the last draw is kept, which fails
/// with `ConnectivityFailure` unless every block survives. Features are the
/// one-hot block id plus Gaussian noise, labels are block ids, and each
/// block is split 10% / 10% / 80% into train / val / test (at least one
/// training node per block).
pub fn generate_sbm(params: &SbmParams) -> Result<(Graph, NodeDataset)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut graph = sample_sbm_graph(params, &mut rng)?;
    let mut attempts = 1;
    while graph.connected_components().component_count > 1 && attempts < SBM_MAX_ATTEMPTS {
        graph = sample_sbm_graph(params, &mut rng)?;
        attempts += 1;
    }

    let n_full = graph.node_count();
    let partition = graph.connected_components();
    let (graph, original_ids): (Graph, Vec<usize>) = if partition.component_count > 1 {
        let members = partition.members();
        let largest = members
            .iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
            .expect("at least one component")
            .clone();
        let mut present = vec![false; params.blocks];
        for &i in &largest {
            present[params.block_of(i)] = true;
        }
        if present.iter().any(|p| !p) {
            return Err(Error::ConnectivityFailure(format!(
                "graph still disconnected after {SBM_MAX_ATTEMPTS} attempts and the largest component misses a block"
            )));
        }
        (graph.induced_subgraph(&largest)?, largest)
    } else {
        (graph, (0..n_full).collect())
    };

    let labels: Vec<usize> = original_ids.iter().map(|&i| params.block_of(i)).collect();
    let noise = Normal::new(0.0, params.feature_noise).expect("validated noise");
    let features = DMatrix::from_fn(labels.len(), params.blocks, |i, k| {
        let base = if labels[i] == k { 1.0 } else { 0.0 };
        base + noise.sample(&mut rng)
    });

    let (mut train_mask, mut val_mask, mut test_mask) = (Vec::new(), Vec::new(), Vec::new());
    for b in 0..params.blocks {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == b).collect();
        members.shuffle(&mut rng);
        let size = members.len();
        let n_train = ((0.1 * size as f64).round() as usize).max(1).min(size);
        let n_val = ((0.1 * size as f64).round() as usize).min(size - n_train);
        train_mask.extend_from_slice(&members[..n_train]);
        val_mask.extend_from_slice(&members[n_train..n_train + n_val]);
        test_mask.extend_from_slice(&members[n_train + n_val..]);
    }
    train_mask.sort_unstable();
    val_mask.sort_unstable();
    test_mask.sort_unstable();

    let dataset = NodeDataset {
        features,
        labels,
        num_classes: params.blocks,
        train_mask,
        val_mask,
        test_mask,
    };
    dataset.validate()?;
    Ok((graph, dataset))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointDims {
    pub c: usize,
    pub h: usize,
    pub f: usize,
}

/// JSON model checkpoint. `Â` is not stored; it is rebuilt from the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub dims: CheckpointDims,
    pub seed: u64,
    pub w0: Vec<Vec<f64>>,
    pub w1: Vec<Vec<f64>>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_from_rows(
    rows: &[Vec<f64>],
    nrows: usize,
    ncols: usize,
    name: &str,
) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::BadDimensions(format!(
            "{name} is not {nrows}x{ncols}"
        )));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::BadDimensions(format!(
            "{name} has non-finite entries"
        )));
    }
    Ok(DMatrix::from_row_iterator(
        nrows,
        ncols,
        rows.iter().flatten().copied(),
    ))
}

impl Checkpoint {
    pub fn from_model(model: &GcnModel) -> Self {
        let (c, h, f) = model.dims();
        Checkpoint {
            dims: CheckpointDims { c, h, f },
            seed: model.seed,
            w0: rows_of(&model.w0),
            w1: rows_of(&model.w1),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        ckpt.weights()?;
        Ok(ckpt)
    }

    fn weights(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let CheckpointDims { c, h, f } = self.dims;
        if c == 0 || h == 0 || f == 0 {
            return Err(Error::BadDimensions(
                "checkpoint dims must be positive".into(),
            ));
        }
        Ok((
            matrix_from_rows(&self.w0, c, h, "W0")?,
            matrix_from_rows(&self.w1, h, f, "W1")?,
        ))
    }

    pub fn into_model(self, a_hat: DMatrix<f64>) -> Result<GcnModel> {
        let (w0, w1) = self.weights()?;
        GcnModel::from_weights(w0, w1, a_hat, self.seed)
    }
}

/// File names inside a dataset directory.
pub mod dataset_files {
    pub const GRAPH: &str = "graph.tsv";
    pub const FEATURES: &str = "features.csv";
    pub const LABELS: &str = "labels.csv";
    pub const TRAIN: &str = "train_mask.txt";
    pub const VAL: &str = "val_mask.txt";
    pub const TEST: &str = "test_mask.txt";
}

/// Writes graph, features, labels and masks into `dir`.
pub fn save_dataset(dir: &Path, graph: &Graph, dataset: &NodeDataset) -> Result<()> {
    use dataset_files::*;
    fs::create_dir_all(dir)?;
    fs::write(dir.join(GRAPH), write_edge_list(graph))?;
    fs::write(dir.join(FEATURES), write_dense_csv(&dataset.features))?;
    fs::write(dir.join(LABELS), write_labels(&dataset.labels))?;
    fs::write(dir.join(TRAIN), write_id_list(&dataset.train_mask))?;
    fs::write(dir.join(VAL), write_id_list(&dataset.val_mask))?;
    fs::write(dir.join(TEST), write_id_list(&dataset.test_mask))?;
    Ok(())
}

/// Reads a dataset written by [`save_dataset`]. Missing mask files are
/// treated as empty; the class count is `max label + 1`.
pub fn load_dataset(dir: &Path) -> Result<(Graph, NodeDataset)> {
    use dataset_files::*;
    let read = |name: &str| {
        fs::read_to_string(dir.join(name))
            .map_err(|e| Error::Io(format!("{}: {e}", dir.join(name).display())))
    };
    let read_mask = |name: &str| -> Result<Vec<usize>> {
        let path = dir.join(name);
        if path.exists() {
            parse_id_list(&read(name)?)
        } else {
            Ok(Vec::new())
        }
    };
    let graph = parse_edge_list(&read(GRAPH)?)?.to_graph()?;
    let features = parse_dense_csv(&read(FEATURES)?)?;
    let labels = parse_labels(&read(LABELS)?)?;
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    let dataset = NodeDataset {
        features,
        labels,
        num_classes,
        train_mask: read_mask(TRAIN)?,
        val_mask: read_mask(VAL)?,
        test_mask: read_mask(TEST)?,
    };
    if dataset.node_count() != graph.node_count() {
        return Err(Error::InvalidDataset(format!(
            "{} labels for a {}-node graph",
            dataset.node_count(),
            graph.node_count()
        )));
    }
    dataset.validate()?;
    Ok((graph, dataset))
}

/// Renormalized adjacency of `graph`, ready for [`init_model`].
pub fn propagation_matrix(graph: &Graph) -> DMatrix<f64> {
    renormalized_adjacency(graph)
}
