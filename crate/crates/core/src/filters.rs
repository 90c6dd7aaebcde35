//! Spectral filter families behind one application interface: per-eigenvalue
//! gains, Chebyshev expansions, Cayley rational filters and first-order GCN
//! propagation.
//!
//! Every family can also be evaluated through the eigenbasis with
//! [`Method::Exact`], which is how the direct routes are cross-checked.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::laplacian::{check_len, laplacian, LaplacianKind, LaplacianMatrix};
use crate::spectral::{eigendecompose, SpectralBasis};

/// A spectral filter and its coefficients.
///
/// Serialized as JSON with a `kind` tag; complex Cayley coefficients are
/// `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterSpec {
    /// One gain per eigenvalue, in ascending eigenvalue order.
    Exact { theta: Vec<f64> },
    /// `Σ θ_k T_k(2λ/λ_max - 1)`, `k = 0..K-1`.
    Chebyshev { theta: Vec<f64>, lambda_max: f64 },
    /// `c₀ + 2 Re Σ c_j C(hλ)^j` with `C(x) = (x - i)/(x + i)`.
    Cayley { c0: f64, c: Vec<Complex64>, h: f64 },
    /// `θ D̃^{-1/2} Ã D̃^{-1/2}` with `Ã = A + I`.
    FirstOrderGcn { theta: f64 },
}

/// How a filter is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// The family's own matrix-vector route (recurrences, linear solves).
    Direct,
    /// Through a full eigendecomposition, `U g(Λ) Uᵀ f`.
    Exact,
}

impl FilterSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: FilterSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidFilter(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("filter spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            FilterSpec::Exact { theta } => {
                if theta.is_empty() || !finite(theta) {
                    return Err(Error::InvalidFilter(
                        "exact gains must be finite and non-empty".into(),
                    ));
                }
            }
            FilterSpec::Chebyshev { theta, lambda_max } => {
                if theta.is_empty() || !finite(theta) {
                    return Err(Error::InvalidFilter(
                        "chebyshev needs K >= 1 finite coefficients".into(),
                    ));
                }
                if !(*lambda_max > 0.0 && lambda_max.is_finite()) {
                    return Err(Error::NonpositiveLambdaMax(*lambda_max));
                }
            }
            FilterSpec::Cayley { c0, c, h } => {
                if !(*h > 0.0 && h.is_finite()) {
                    return Err(Error::InvalidFilter(format!(
                        "zoom h must be positive, got {h}"
                    )));
                }
                if !c0.is_finite() || !c.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::InvalidFilter(
                        "cayley coefficients must be finite".into(),
                    ));
                }
            }
            FilterSpec::FirstOrderGcn { theta } => {
                if !theta.is_finite() {
                    return Err(Error::InvalidFilter("theta must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Number of free parameters.
    pub fn parameter_count(&self) -> usize {
        match self {
            FilterSpec::Exact { theta } => theta.len(),
            FilterSpec::Chebyshev { theta, .. } => theta.len(),
            FilterSpec::Cayley { c, .. } => 1 + 2 * c.len() + 1,
            FilterSpec::FirstOrderGcn { .. } => 1,
        }
    }

    /// Scalar frequency response, where one exists independently of the
    /// graph. `Exact` gains are indexed by eigenvalue position and
    /// `FirstOrderGcn` acts on a different operator, so both return `None`.
    pub fn response(&self) -> Option<Box<dyn Fn(f64) -> f64 + '_>> {
        match self {
            FilterSpec::Chebyshev { theta, lambda_max } => {
                Some(Box::new(move |l| chebyshev_response(theta, *lambda_max, l)))
            }
            FilterSpec::Cayley { c0, c, h } => {
                Some(Box::new(move |l| cayley_response(*c0, c, *h, l)))
            }
            FilterSpec::Exact { .. } | FilterSpec::FirstOrderGcn { .. } => None,
        }
    }
}

/// Applies `spec` to the vertex signal `f` on `g`. Chebyshev and Cayley
/// filters act on the Laplacian of the given kind; `FirstOrderGcn` always
/// uses the renormalized adjacency.
pub fn apply_filter(
    spec: &FilterSpec,
    g: &Graph,
    kind: LaplacianKind,
    f: &[f64],
    method: Method,
) -> Result<Vec<f64>> {
    spec.validate()?;
    check_len(g.node_count(), f.len())?;
    match (spec, method) {
        (FilterSpec::FirstOrderGcn { theta }, Method::Direct) => {
            let a_hat = renormalized_adjacency(g);
            Ok((a_hat * DVector::from_column_slice(f) * *theta)
                .as_slice()
                .to_vec())
        }
        (FilterSpec::FirstOrderGcn { theta }, Method::Exact) => {
            let (mu, u) = symmetric_eigen(&renormalized_adjacency(g))?;
            let fhat = u.tr_mul(&DVector::from_column_slice(f));
            let scaled =
                DVector::from_iterator(mu.len(), fhat.iter().zip(&mu).map(|(x, m)| theta * m * x));
            Ok((u * scaled).as_slice().to_vec())
        }
        (FilterSpec::Exact { theta }, _) => {
            let basis = eigendecompose(&laplacian(g, kind))?;
            basis.apply_gains(theta, f)
        }
        (FilterSpec::Chebyshev { theta, lambda_max }, Method::Direct) => {
            chebyshev_apply(&laplacian(g, kind), theta, *lambda_max, f)
        }
        (FilterSpec::Cayley { c0, c, h }, Method::Direct) => {
            cayley_apply(&laplacian(g, kind), *c0, c, *h, f)
        }
        (_, Method::Exact) => {
            let basis = eigendecompose(&laplacian(g, kind))?;
            let response = spec
                .response()
                .expect("chebyshev and cayley have responses");
            let gains: Vec<f64> = basis.eigenvalues().iter().map(|&l| response(l)).collect();
            basis.apply_gains(&gains, f)
        }
    }
}

/// One spectral CNN layer: output column `j` is
/// `σ(Σ_i U diag(θ_ij) Uᵀ F[:, i])`. `filters[i][j]` must be an `Exact`
/// spec with one gain per eigenvalue.
pub fn spectral_cnn_layer<S>(
    basis: &SpectralBasis,
    filters: &[Vec<FilterSpec>],
    f_in: &DMatrix<f64>,
    sigma: S,
) -> Result<DMatrix<f64>>
where
    S: Fn(f64) -> f64,
{
    let n = basis.size();
    let c_in = f_in.ncols();
    if f_in.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "input has {} rows, basis has {n} nodes",
            f_in.nrows()
        )));
    }
    if filters.len() != c_in {
        return Err(Error::ShapeMismatch(format!(
            "filter grid has {} input channels, signal has {c_in}",
            filters.len()
        )));
    }
    let c_out = filters.first().map_or(0, Vec::len);
    if filters.iter().any(|row| row.len() != c_out) {
        return Err(Error::ShapeMismatch("ragged filter grid".into()));
    }

    let u = basis.eigenvectors();
    let f_hat = u.tr_mul(f_in);
    let mut out_hat = DMatrix::zeros(n, c_out);
    for (i, row) in filters.iter().enumerate() {
        for (j, spec) in row.iter().enumerate() {
            let FilterSpec::Exact { theta } = spec else {
                return Err(Error::InvalidFilter(
                    "spectral CNN layers take exact gains".into(),
                ));
            };
            check_len(n, theta.len())?;
            for m in 0..n {
                out_hat[(m, j)] += theta[m] * f_hat[(m, i)];
            }
        }
    }
    Ok((u * out_hat).map(sigma))
}

/// `T_k` evaluated by the three-term recurrence.
pub fn chebyshev_t(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for _ in 1..k {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

/// Scalar response `Σ θ_k T_k(2λ/λ_max - 1)`.
pub fn chebyshev_response(theta: &[f64], lambda_max: f64, lambda: f64) -> f64 {
    let x = 2.0 * lambda / lambda_max - 1.0;
    theta
        .iter()
        .enumerate()
        .map(|(k, t)| t * chebyshev_t(k, x))
        .sum()
}

/// `Σ θ_k T_k(L̃) f` with `L̃ = 2L/λ_max - I`, using the recurrence
/// `T_{k+1}(L̃)f = 2 L̃ T_k(L̃)f - T_{k-1}(L̃)f` on vectors only.
pub fn chebyshev_apply(
    l: &LaplacianMatrix,
    theta: &[f64],
    lambda_max: f64,
    f: &[f64],
) -> Result<Vec<f64>> {
    l.require_symmetric()?;
    if lambda_max.is_nan() || lambda_max <= 0.0 {
        return Err(Error::NonpositiveLambdaMax(lambda_max));
    }
    if theta.is_empty() {
        return Err(Error::InvalidFilter("chebyshev needs K >= 1".into()));
    }
    check_len(l.size(), f.len())?;

    let scale = 2.0 / lambda_max;
    let mut buf = vec![0.0; f.len()];
    let mut scaled_apply = |x: &[f64], out: &mut Vec<f64>| {
        l.matrix().mul_vec_into(x, &mut buf);
        out.clear();
        out.extend(buf.iter().zip(x).map(|(lx, xi)| scale * lx - xi));
    };

    let mut out: Vec<f64> = f.iter().map(|x| theta[0] * x).collect();
    if theta.len() == 1 {
        return Ok(out);
    }
    let mut prev = f.to_vec();
    let mut cur = Vec::with_capacity(f.len());
    scaled_apply(&prev, &mut cur);
    for (o, c) in out.iter_mut().zip(&cur) {
        *o += theta[1] * c;
    }
    let mut next = Vec::with_capacity(f.len());
    for &t in &theta[2..] {
        scaled_apply(&cur, &mut next);
        for (nx, p) in next.iter_mut().zip(&prev) {
            *nx = 2.0 * *nx - p;
        }
        for (o, c) in out.iter_mut().zip(&next) {
            *o += t * c;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(out)
}

/// Dense matrix of the order-`k` filter `Σ_{j=0}^{k} T_j(L̃)`, built column by
/// column with [`chebyshev_apply`]. `λ_max` is replaced by the largest
/// absolute row sum of `L`, an upper bound. Entry `(i, j)` vanishes whenever
/// the hop distance between `i` and `j` exceeds `k`.
pub fn chebyshev_locality_matrix(l: &LaplacianMatrix, k: usize) -> Result<DMatrix<f64>> {
    let n = l.size();
    let bound = l.matrix().max_abs_row_sum();
    let lambda_max = if bound > 0.0 { bound } else { 1.0 };
    let theta = vec![1.0; k + 1];
    let mut out = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = chebyshev_apply(l, &theta, lambda_max, &e)?;
        out.set_column(j, &DVector::from_vec(col));
        e[j] = 0.0;
    }
    Ok(out)
}

/// Cayley transform `C(x) = (x - i)/(x + i)`.
pub fn cayley_transform(x: f64) -> Complex64 {
    let i = Complex64::i();
    (x - i) / (x + i)
}

/// Scalar response `c₀ + 2 Re Σ_j c_j C(hλ)^j`.
pub fn cayley_response(c0: f64, c: &[Complex64], h: f64, lambda: f64) -> f64 {
    let z = cayley_transform(h * lambda);
    let mut power = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for cj in c {
        power *= z;
        acc += cj * power;
    }
    c0 + 2.0 * acc.re
}

fn complexify(l: &LaplacianMatrix, h: f64, shift: Complex64) -> DMatrix<Complex64> {
    let n = l.size();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (i, j, v) in l.matrix().triplets() {
        m[(i, j)] = Complex64::new(h * v, 0.0);
    }
    for i in 0..n {
        m[(i, i)] += shift;
    }
    m
}

/// `(hL - iI)(hL + iI)^{-1}` as a dense complex matrix.
pub fn cayley_transform_matrix(l: &LaplacianMatrix, h: f64) -> Result<DMatrix<Complex64>> {
    let i = Complex64::i();
    let minus = complexify(l, h, -i);
    let plus = complexify(l, h, i);
    // X (hL + iI) = (hL - iI)  <=>  (hL + iI)ᵀ Xᵀ = (hL - iI)ᵀ
    let xt = plus
        .transpose()
        .lu()
        .solve(&minus.transpose())
        .ok_or_else(|| Error::SolveFailure("hL + iI is singular".into()))?;
    Ok(xt.transpose())
}

/// `(hL - iI) x` for a complex vector `x`.
fn shifted_apply(
    l: &LaplacianMatrix,
    h: f64,
    shift: Complex64,
    x: &DVector<Complex64>,
) -> DVector<Complex64> {
    let re: Vec<f64> = x.iter().map(|z| z.re).collect();
    let im: Vec<f64> = x.iter().map(|z| z.im).collect();
    let lre = l.matrix().mul_vec(&re);
    let lim = l.matrix().mul_vec(&im);
    DVector::from_iterator(
        x.len(),
        (0..x.len()).map(|k| Complex64::new(h * lre[k], h * lim[k]) + shift * x[k]),
    )
}

fn check_cayley(l: &LaplacianMatrix, h: f64, f: &[f64]) -> Result<()> {
    if !matches!(
        l.kind(),
        LaplacianKind::SymNormalized | LaplacianKind::Combinatorial
    ) {
        return Err(Error::InvalidFilter(format!(
            "cayley filters need a sym-normalized or combinatorial Laplacian, got {}",
            l.kind()
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidFilter(format!(
            "zoom h must be positive, got {h}"
        )));
    }
    check_len(l.size(), f.len())
}

/// Cayley filter `c₀ f + 2 Re Σ_j c_j y_j` with `y₀ = f` and
/// `y_j = (hL - iI)(hL + iI)^{-1} y_{j-1}`. The system matrix is factored
/// once with partial-pivoting LU.
pub fn cayley_apply(
    l: &LaplacianMatrix,
    c0: f64,
    c: &[Complex64],
    h: f64,
    f: &[f64],
) -> Result<Vec<f64>> {
    check_cayley(l, h, f)?;
    let mut out: Vec<f64> = f.iter().map(|x| c0 * x).collect();
    if c.is_empty() {
        return Ok(out);
    }
    let i = Complex64::i();
    let lu = complexify(l, h, i).lu();
    let mut y = DVector::from_iterator(f.len(), f.iter().map(|&x| Complex64::new(x, 0.0)));
    let mut acc = DVector::from_element(f.len(), Complex64::new(0.0, 0.0));
    for cj in c {
        let solved = lu
            .solve(&y)
            .ok_or_else(|| Error::SolveFailure("hL + iI is singular".into()))?;
        y = shifted_apply(l, h, -i, &solved);
        acc += y.map(|z| z * cj);
    }
    for (o, z) in out.iter_mut().zip(acc.iter()) {
        *o += 2.0 * z.re;
    }
    Ok(out)
}

/// The conjugate-even Laurent form `c₀ f + Σ_j (c_j C^j f + c̄_j C^{-j} f)`,
/// with negative powers computed from their own factorization. Mathematically
/// real; the imaginary part measures round-off.
pub fn cayley_laurent_apply(
    l: &LaplacianMatrix,
    c0: f64,
    c: &[Complex64],
    h: f64,
    f: &[f64],
) -> Result<Vec<Complex64>> {
    check_cayley(l, h, f)?;
    let i = Complex64::i();
    let n = f.len();
    let start = DVector::from_iterator(n, f.iter().map(|&x| Complex64::new(x, 0.0)));
    let mut acc = start.map(|z| z * c0);
    let plus_lu = complexify(l, h, i).lu();
    let minus_lu = complexify(l, h, -i).lu();
    let mut forward = start.clone();
    let mut backward = start;
    for cj in c {
        let solved = plus_lu
            .solve(&forward)
            .ok_or_else(|| Error::SolveFailure("hL + iI is singular".into()))?;
        forward = shifted_apply(l, h, -i, &solved);
        let solved = minus_lu
            .solve(&backward)
            .ok_or_else(|| Error::SolveFailure("hL - iI is singular".into()))?;
        backward = shifted_apply(l, h, i, &solved);
        acc += forward.map(|z| z * cj) + backward.map(|z| z * cj.conj());
    }
    Ok(acc.as_slice().to_vec())
}

/// `Â = D̃^{-1/2} Ã D̃^{-1/2}` with `Ã = A + I` and `D̃` its row sums.
pub fn renormalized_adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let d_tilde: Vec<f64> = g.degrees().iter().map(|d| d + 1.0).collect();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 1.0 / d_tilde[i];
        for (j, w) in g.neighbors(i) {
            m[(i, j)] = w / (d_tilde[i] * d_tilde[j]).sqrt();
        }
    }
    m
}

/// `I + D^{-1/2} A D^{-1/2}`, the first-order operator before
/// renormalization (isolated nodes get a zero normalization factor).
pub fn first_order_operator(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let inv_sqrt: Vec<f64> = g
        .degrees()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let mut m = DMatrix::identity(n, n);
    for i in 0..n {
        for (j, w) in g.neighbors(i) {
            m[(i, j)] += w * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    m
}

/// `Â F W`.
pub fn gcn_propagate(
    a_hat: &DMatrix<f64>,
    f: &DMatrix<f64>,
    w: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if a_hat.nrows() != a_hat.ncols() || a_hat.ncols() != f.nrows() || f.ncols() != w.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "cannot form {}x{} · {}x{} · {}x{}",
            a_hat.nrows(),
            a_hat.ncols(),
            f.nrows(),
            f.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    Ok(a_hat * (f * w))
}

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 10_000;

/// Largest eigenvalue of a symmetric (positive semi-definite) Laplacian by
/// power iteration from a fixed pseudo-random start.
///
/// Iteration stops when the residual `‖Lv - ρv‖` or the extrapolated
/// remaining change of the Rayleigh quotient drops below `1e-8 ρ`. A zero
/// matrix yields 0.
pub fn estimate_lambda_max(l: &LaplacianMatrix) -> Result<f64> {
    l.require_symmetric()?;
    let n = l.size();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a4b);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut v);
    let mut w = vec![0.0; n];
    let mut rho_prev: Option<f64> = None;
    let mut delta_prev: Option<f64> = None;
    for _ in 0..POWER_MAX_ITER {
        l.matrix().mul_vec_into(&v, &mut w);
        let rho: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(0.0);
        }
        let residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - rho * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        let tol = POWER_TOL * rho.abs();
        if residual <= tol {
            return Ok(rho);
        }
        if let Some(prev) = rho_prev {
            let delta = (rho - prev).abs();
            if delta <= tol {
                let tail = match delta_prev {
                    Some(dp) if dp > 0.0 && delta < dp => {
                        let q = delta / dp;
                        delta * q / (1.0 - q)
                    }
                    Some(_) => f64::INFINITY,
                    None => f64::INFINITY,
                };
                if delta == 0.0 || tail <= tol {
                    return Ok(rho);
                }
            }
            delta_prev = Some(delta);
        }
        rho_prev = Some(rho);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
    }
    Err(Error::ConvergenceFailure {
        context: "power iteration for lambda_max",
        iterations: POWER_MAX_ITER,
    })
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize(x: &mut [f64]) {
    let n = norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}
