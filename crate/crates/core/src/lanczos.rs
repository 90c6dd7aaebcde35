//! Lanczos tridiagonalization and the Krylov approximation
//! `g(L) f ≈ ‖f‖₂ V_M g(H_M) e₁` of spectral filters.

use nalgebra::{DMatrix, DVector};

use crate::eigen::tridiagonal_eigen;
use crate::error::{Error, Result};
use crate::filters::chebyshev_t;
use crate::laplacian::{check_len, LaplacianMatrix};
use crate::spectral::{eigendecompose, exact_filter, GraphSignal};

/// Orthonormal Krylov basis and the tridiagonal projection `H = Vᵀ L V`.
#[derive(Debug, Clone, PartialEq)]
pub struct LanczosBasis {
    /// `n × M_effective`, orthonormal columns.
    pub v: DMatrix<f64>,
    /// Diagonal of `H`.
    pub alpha: Vec<f64>,
    /// Off-diagonal of `H`; `beta[k]` couples steps `k` and `k + 1`.
    pub beta: Vec<f64>,
}

impl LanczosBasis {
    /// Steps actually completed; smaller than requested after breakdown.
    pub fn steps(&self) -> usize {
        self.alpha.len()
    }

    /// Dense symmetric tridiagonal `H_M`.
    pub fn tridiagonal(&self) -> DMatrix<f64> {
        let m = self.steps();
        let mut h = DMatrix::zeros(m, m);
        for (k, &a) in self.alpha.iter().enumerate() {
            h[(k, k)] = a;
        }
        for (k, &b) in self.beta.iter().enumerate() {
            h[(k, k + 1)] = b;
            h[(k + 1, k)] = b;
        }
        h
    }
}

/// Runs up to `m` Lanczos steps on `L` starting from `f / ‖f‖₂`, with full
/// modified Gram-Schmidt reorthogonalization (two passes) at every step.
///
/// Stops early when the next coupling falls to `1e-12 ‖L‖_F` or below: the
/// Krylov space is then invariant and further steps add nothing.
pub fn lanczos_iterate(l: &LaplacianMatrix, f: &[f64], m: usize) -> Result<LanczosBasis> {
    l.require_symmetric()?;
    let n = l.size();
    check_len(n, f.len())?;
    if m == 0 || m > n {
        return Err(Error::BadDimensions(format!(
            "requested {m} Lanczos steps on a {n}-node graph"
        )));
    }
    let fnorm = norm(f);
    if fnorm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let breakdown = 1e-12 * l.matrix().frobenius_norm();

    let mut basis: Vec<Vec<f64>> = vec![f.iter().map(|x| x / fnorm).collect()];
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m.saturating_sub(1));
    let mut w = vec![0.0; n];
    for j in 0..m {
        l.matrix().mul_vec_into(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        if j + 1 == m {
            break;
        }
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= a * vi;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * vi;
            }
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = norm(&w);
        if b <= breakdown {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }

    let steps = alpha.len();
    let v = DMatrix::from_fn(n, steps, |i, k| basis[k][i]);
    Ok(LanczosBasis { v, alpha, beta })
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the symmetric
/// tridiagonal matrix with diagonal `alpha` and off-diagonal `beta`.
pub fn tridiag_eig(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    tridiagonal_eigen(alpha, beta)
}

/// `‖f‖₂ V S diag(g(μ)) Sᵀ e₁` where `H_M = S diag(μ) Sᵀ`.
pub fn lanczos_filter<G>(l: &LaplacianMatrix, g: G, f: &[f64], m: usize) -> Result<Vec<f64>>
where
    G: Fn(f64) -> f64,
{
    let basis = lanczos_iterate(l, f, m)?;
    filter_from_basis(&basis, g, norm(f))
}

fn filter_from_basis<G>(basis: &LanczosBasis, g: G, fnorm: f64) -> Result<Vec<f64>>
where
    G: Fn(f64) -> f64,
{
    let (mu, s) = tridiag_eig(&basis.alpha, &basis.beta)?;
    let coeffs = DVector::from_iterator(
        mu.len(),
        mu.iter().enumerate().map(|(k, &x)| g(x) * s[(0, k)]),
    );
    let y = &s * coeffs * fnorm;
    Ok((&basis.v * y).as_slice().to_vec())
}

/// Outcome of checking the Lanczos error against the polynomial
/// approximation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub steps: usize,
    /// `‖g(L) f - g_M‖₂`.
    pub error: f64,
    /// `2 ‖f‖₂ · max |g - p|` for the degree `M-1` Chebyshev interpolant `p`.
    pub bound: f64,
    pub satisfied: bool,
    /// Extreme eigenvalues of `H_M`.
    pub ritz_range: (f64, f64),
}

/// Grid resolution used to measure the interpolant's sup-norm error.
pub const BOUND_GRID_POINTS: usize = 1000;

/// Compares the Lanczos approximation after `m` steps against the exact
/// filter and against `2 ‖f‖₂ · sup |g - p|` on `[0, λ_max]`, where `p` is
/// the Chebyshev interpolant of degree `m - 1`. The interpolant is a valid
/// polynomial, so its error bounds the best approximation from above and
/// `satisfied` is a one-sided check.
pub fn theorem_bound_check<G>(l: &LaplacianMatrix, g: G, f: &[f64], m: usize) -> Result<BoundCheck>
where
    G: Fn(f64) -> f64,
{
    let spectrum = eigendecompose(l)?;
    let exact = exact_filter(&spectrum, &g, &GraphSignal::vertex(f.to_vec()))?;
    let basis = lanczos_iterate(l, f, m)?;
    let approx = filter_from_basis(&basis, &g, norm(f))?;
    let error = exact
        .values
        .iter()
        .zip(&approx)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();

    let lambda_max = spectrum.lambda_max().max(0.0);
    let interp = ChebyshevInterpolant::new(&g, m - 1, 0.0, lambda_max);
    let sup = interp.sup_error(&g, BOUND_GRID_POINTS);
    let bound = 2.0 * norm(f) * sup;

    let (mu, _) = tridiag_eig(&basis.alpha, &basis.beta)?;
    Ok(BoundCheck {
        steps: basis.steps(),
        error,
        bound,
        satisfied: error <= bound + 1e-12,
        ritz_range: (mu[0], mu[mu.len() - 1]),
    })
}

/// Interpolant of degree `d` at the `d + 1` Chebyshev points of the first
/// kind on `[a, b]`, stored in the Chebyshev basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevInterpolant {
    coeffs: Vec<f64>,
    a: f64,
    b: f64,
}

impl ChebyshevInterpolant {
    pub fn new<G: Fn(f64) -> f64>(g: G, degree: usize, a: f64, b: f64) -> Self {
        let npts = degree + 1;
        let nodes: Vec<f64> = (0..npts)
            .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / npts as f64).cos())
            .collect();
        let values: Vec<f64> = nodes.iter().map(|&x| g(map_to(x, a, b))).collect();
        let coeffs = (0..npts)
            .map(|j| {
                let s: f64 = nodes
                    .iter()
                    .zip(&values)
                    .map(|(&x, &v)| v * chebyshev_t(j, x))
                    .sum();
                let scale = if j == 0 { 1.0 } else { 2.0 };
                scale * s / npts as f64
            })
            .collect();
        ChebyshevInterpolant { coeffs, a, b }
    }

    pub fn eval(&self, z: f64) -> f64 {
        let x = if self.b > self.a {
            (2.0 * z - self.a - self.b) / (self.b - self.a)
        } else {
            0.0
        };
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            (b1, b2) = (2.0 * x * b1 - b2 + c, b1);
        }
        x * b1 - b2 + self.coeffs[0]
    }

    /// `max |g(z) - p(z)|` over `points` equispaced samples of `[a, b]`,
    /// endpoints included.
    pub fn sup_error<G: Fn(f64) -> f64>(&self, g: G, points: usize) -> f64 {
        let points = points.max(2);
        (0..points)
            .map(|k| {
                let z = self.a + (self.b - self.a) * k as f64 / (points - 1) as f64;
                (g(z) - self.eval(z)).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn map_to(x: f64, a: f64, b: f64) -> f64 {
    0.5 * (a + b) + 0.5 * (b - a) * x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}
