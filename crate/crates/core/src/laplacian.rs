//! Laplacian variants, the oriented incidence (co-boundary) operator and the
//! Laplacian quadratic form.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LaplacianKind {
    /// `L = D - W`
    Combinatorial,
    /// `I - D^{-1/2} W D^{-1/2}`
    SymNormalized,
    /// `I - D^{-1} W`
    RandomWalk,
    /// `D + W`
    Signless,
}

impl LaplacianKind {
    pub const ALL: [LaplacianKind; 4] = [
        LaplacianKind::Combinatorial,
        LaplacianKind::SymNormalized,
        LaplacianKind::RandomWalk,
        LaplacianKind::Signless,
    ];

    pub fn is_symmetric(self) -> bool {
        !matches!(self, LaplacianKind::RandomWalk)
    }

    pub fn name(self) -> &'static str {
        match self {
            LaplacianKind::Combinatorial => "combinatorial",
            LaplacianKind::SymNormalized => "sym-normalized",
            LaplacianKind::RandomWalk => "random-walk",
            LaplacianKind::Signless => "signless",
        }
    }
}

impl fmt::Display for LaplacianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LaplacianKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "combinatorial" => Ok(LaplacianKind::Combinatorial),
            "sym-normalized" | "symmetric" | "sym" => Ok(LaplacianKind::SymNormalized),
            "random-walk" | "rw" => Ok(LaplacianKind::RandomWalk),
            "signless" => Ok(LaplacianKind::Signless),
            other => Err(format!(
                "unknown Laplacian kind `{other}` (expected combinatorial, sym-normalized, random-walk or signless)"
            )),
        }
    }
}

/// A realized Laplacian of a declared kind, stored sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    kind: LaplacianKind,
    mat: CsrMatrix,
}

impl LaplacianMatrix {
    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.mat
    }

    pub fn size(&self) -> usize {
        self.mat.nrows()
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), f.len())?;
        Ok(self.mat.mul_vec(f))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.mat.to_dense()
    }

    pub(crate) fn require_symmetric(&self) -> Result<()> {
        if self.kind.is_symmetric() {
            Ok(())
        } else {
            Err(Error::NonSymmetricKind(self.kind))
        }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Builds the Laplacian of `g` of the requested kind.
///
/// Isolated vertices (`d_i = 0`) get a zero normalization factor and a zero
/// diagonal in the normalized variants, so each contributes one zero
/// eigenvalue.
pub fn laplacian(g: &Graph, kind: LaplacianKind) -> LaplacianMatrix {
    let n = g.node_count();
    let d = g.degrees();
    let inv_sqrt: Vec<f64> = d
        .iter()
        .map(|&x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 })
        .collect();
    let mut triplets = Vec::with_capacity(n + g.adjacency().nnz());
    for i in 0..n {
        let diag = match kind {
            LaplacianKind::Combinatorial | LaplacianKind::Signless => d[i],
            LaplacianKind::SymNormalized | LaplacianKind::RandomWalk => {
                if d[i] > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        triplets.push((i, i, diag));
        for (j, w) in g.neighbors(i) {
            let v = match kind {
                LaplacianKind::Combinatorial => -w,
                LaplacianKind::Signless => w,
                LaplacianKind::SymNormalized => -w * inv_sqrt[i] * inv_sqrt[j],
                LaplacianKind::RandomWalk => -w / d[i],
            };
            triplets.push((i, j, v));
        }
    }
    LaplacianMatrix {
        kind,
        mat: CsrMatrix::from_triplets(n, n, &triplets),
    }
}

/// `(L f)_i = sum_j W_ij (f_i - f_j)` evaluated edge by edge without
/// materializing `L`.
pub fn apply_laplacian(g: &Graph, f: &[f64]) -> Result<Vec<f64>> {
    check_len(g.node_count(), f.len())?;
    let mut out = vec![0.0; f.len()];
    for e in g.edges() {
        let diff = e.w * (f[e.u] - f[e.v]);
        out[e.u] += diff;
        out[e.v] -= diff;
    }
    Ok(out)
}

/// `f^T L f = 1/2 sum_{i,j} W_ij (f_i - f_j)^2`, i.e. one term per undirected edge.
pub fn quadratic_form(g: &Graph, f: &[f64]) -> Result<f64> {
    check_len(g.node_count(), f.len())?;
    Ok(g.edges()
        .iter()
        .map(|e| {
            let diff = f[e.u] - f[e.v];
            e.w * diff * diff
        })
        .sum())
}

/// Oriented edge-by-node incidence matrix: `-1` at the tail, `+1` at the head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n: usize,
    orientation: Vec<(usize, usize)>,
}

impl IncidenceMatrix {
    /// Incidence matrix for an explicit list of oriented edges `(tail, head)`.
    /// Every edge of `g` must appear exactly once, in either direction.
    pub fn with_orientation(g: &Graph, oriented: &[(usize, usize)]) -> Result<Self> {
        if !g.is_unweighted() {
            return Err(Error::WeightedGraphUnsupported);
        }
        let n = g.node_count();
        let mut remaining: HashMap<(usize, usize), bool> = g
            .edges()
            .iter()
            .map(|e| ((e.u.min(e.v), e.u.max(e.v)), false))
            .collect();
        for &(t, h) in oriented {
            for id in [t, h] {
                if id >= n {
                    return Err(Error::IdOutOfRange { id, n });
                }
            }
            match remaining.get_mut(&(t.min(h), t.max(h))) {
                Some(used) if !*used => *used = true,
                Some(_) => return Err(Error::DuplicateEdge(t, h)),
                None => {
                    return Err(Error::ShapeMismatch(format!(
                        "({t}, {h}) is not an edge of the graph"
                    )))
                }
            }
        }
        if oriented.len() != g.edge_count() {
            return Err(Error::DimensionMismatch {
                expected: g.edge_count(),
                found: oriented.len(),
            });
        }
        Ok(IncidenceMatrix {
            n,
            orientation: oriented.to_vec(),
        })
    }

    pub fn orientation(&self) -> &[(usize, usize)] {
        &self.orientation
    }

    pub fn edge_count(&self) -> usize {
        self.orientation.len()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.orientation.len(), self.n);
        for (r, &(t, h)) in self.orientation.iter().enumerate() {
            m[(r, t)] = -1.0;
            m[(r, h)] = 1.0;
        }
        m
    }

    /// Co-boundary map: `(∇f)(e) = f_head - f_tail`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, f.len())?;
        Ok(self.orientation.iter().map(|&(t, h)| f[h] - f[t]).collect())
    }

    /// Adjoint map `∇^T y` from edge values back to nodes.
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.orientation.len(), y.len())?;
        let mut out = vec![0.0; self.n];
        for (&(t, h), &v) in self.orientation.iter().zip(y) {
            out[t] -= v;
            out[h] += v;
        }
        Ok(out)
    }

    /// `∇^T ∇`, computed from the dense incidence matrix.
    pub fn gram(&self) -> DMatrix<f64> {
        let m = self.to_dense();
        m.transpose() * m
    }
}

/// Incidence matrix with edges in sorted `(min, max)` order. Seed 0 orients
/// every edge from the smaller to the larger id; any other seed flips each
/// edge with probability 1/2 using a seeded generator.
pub fn incidence(g: &Graph, orientation_seed: u64) -> Result<IncidenceMatrix> {
    if !g.is_unweighted() {
        return Err(Error::WeightedGraphUnsupported);
    }
    let mut pairs: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|e| (e.u.min(e.v), e.u.max(e.v)))
        .collect();
    pairs.sort_unstable();
    if orientation_seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(orientation_seed);
        for p in pairs.iter_mut() {
            if rng.random_bool(0.5) {
                *p = (p.1, p.0);
            }
        }
    }
    Ok(IncidenceMatrix {
        n: g.node_count(),
        orientation: pairs,
    })
}
