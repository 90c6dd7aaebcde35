//! Laplacian eigenbasis, graph Fourier analysis/synthesis and the exact
//! spectral filter `U g(Λ) Uᵀ f`.

use nalgebra::{DMatrix, DVector};

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::laplacian::{check_len, LaplacianKind, LaplacianMatrix};

/// Absolute threshold below which an eigenvalue counts as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-8;

/// Which side of the graph Fourier transform a signal lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Vertex,
    Spectral,
}

impl Domain {
    fn name(self) -> &'static str {
        match self {
            Domain::Vertex => "vertex",
            Domain::Spectral => "spectral",
        }
    }
}

/// A real vector on the nodes of a graph (vertex domain) or on its
/// eigenvalues (spectral domain).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal {
    pub values: Vec<f64>,
    pub domain: Domain,
}

impl GraphSignal {
    pub fn vertex(values: Vec<f64>) -> Self {
        GraphSignal {
            values,
            domain: Domain::Vertex,
        }
    }

    pub fn spectral(values: Vec<f64>) -> Self {
        GraphSignal {
            values,
            domain: Domain::Spectral,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn expect(&self, domain: Domain, n: usize) -> Result<()> {
        if self.domain != domain {
            return Err(Error::DomainMismatch {
                expected: domain.name(),
                found: self.domain.name(),
            });
        }
        check_len(n, self.values.len())
    }
}

/// Orthonormal eigenvectors (columns of `u`) and ascending eigenvalues of a
/// symmetric Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    u: DMatrix<f64>,
    lambda: Vec<f64>,
    kind: LaplacianKind,
}

impl SpectralBasis {
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda.last().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues with `|λ| < ZERO_EIGENVALUE_TOL`.
    pub fn zero_multiplicity(&self) -> usize {
        self.lambda
            .iter()
            .filter(|l| l.abs() < ZERO_EIGENVALUE_TOL)
            .count()
    }

    /// `U diag(gains) Uᵀ`, the dense operator of a spectral filter.
    pub fn operator(&self, gains: &[f64]) -> Result<DMatrix<f64>> {
        check_len(self.size(), gains.len())?;
        let scaled = &self.u * DMatrix::from_diagonal(&DVector::from_column_slice(gains));
        Ok(scaled * self.u.transpose())
    }

    /// Applies per-eigenvalue gains: `U diag(gains) Uᵀ f`.
    pub fn apply_gains(&self, gains: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), gains.len())?;
        check_len(self.size(), f.len())?;
        let fhat = self.u.tr_mul(&DVector::from_column_slice(f));
        let scaled = fhat.component_mul(&DVector::from_column_slice(gains));
        Ok((&self.u * scaled).as_slice().to_vec())
    }
}

/// Full eigendecomposition of a symmetric Laplacian.
pub fn eigendecompose(l: &LaplacianMatrix) -> Result<SpectralBasis> {
    l.require_symmetric()?;
    let (lambda, u) = symmetric_eigen(&l.to_dense())?;
    Ok(SpectralBasis {
        u,
        lambda,
        kind: l.kind(),
    })
}

/// Analysis transform `f̂ = Uᵀ f`.
pub fn gft(basis: &SpectralBasis, f: &GraphSignal) -> Result<GraphSignal> {
    f.expect(Domain::Vertex, basis.size())?;
    let fhat = basis.u.tr_mul(&DVector::from_column_slice(&f.values));
    Ok(GraphSignal::spectral(fhat.as_slice().to_vec()))
}

/// Synthesis transform `f = U f̂`.
pub fn igft(basis: &SpectralBasis, fhat: &GraphSignal) -> Result<GraphSignal> {
    fhat.expect(Domain::Spectral, basis.size())?;
    let f = &basis.u * DVector::from_column_slice(&fhat.values);
    Ok(GraphSignal::vertex(f.as_slice().to_vec()))
}

/// `U g(Λ) Uᵀ f` for an arbitrary scalar response `g`.
pub fn exact_filter<G>(basis: &SpectralBasis, g: G, f: &GraphSignal) -> Result<GraphSignal>
where
    G: Fn(f64) -> f64,
{
    f.expect(Domain::Vertex, basis.size())?;
    let gains: Vec<f64> = basis.lambda.iter().map(|&l| g(l)).collect();
    Ok(GraphSignal::vertex(basis.apply_gains(&gains, &f.values)?))
}

/// Shift-invariant polynomial filter `h(W) f = (h₀ I + h₁ W + … + h_L W^L) f`
/// on the weighted adjacency shift, evaluated by Horner's rule. Degree may
/// not exceed the node count.
pub fn polynomial_shift_filter(g: &Graph, h: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let n = g.node_count();
    check_len(n, f.len())?;
    if h.len() > n + 1 {
        return Err(Error::TooManyCoefficients {
            given: h.len(),
            max: n + 1,
        });
    }
    let mut acc = vec![0.0; n];
    for &coef in h.iter().rev() {
        let mut next = g.adjacency().mul_vec(&acc);
        for (y, &x) in next.iter_mut().zip(f) {
            *y += coef * x;
        }
        acc = next;
    }
    Ok(acc)
}

/// Writes eigenvalues as one comma-separated line.
pub fn eigenvalues_csv_line(basis: &SpectralBasis) -> String {
    let mut s = basis
        .lambda
        .iter()
        .map(|&x| crate::formats::format_float(x))
        .collect::<Vec<_>>()
        .join(",");
    s.push('\n');
    s
}
