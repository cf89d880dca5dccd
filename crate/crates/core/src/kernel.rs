//! Gaussian kernel, biased MMD² estimator and its gradient with respect to
//! the alignment matrix.
//!
//! All sums are accumulated in a fixed row-major order so results are
//! reproducible bit for bit.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::OrthogonalMatrix;

/// Gaussian kernel `k(x, y) = exp(−‖x − y‖² / (2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    sigma_sq: f64,
}

impl KernelConfig {
    pub fn new(sigma_sq: f64) -> Result<Self> {
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(Error::InvalidArgument("sigma_sq must be positive and finite"));
        }
        Ok(KernelConfig { sigma_sq })
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    #[inline]
    fn eval_sq_dist(&self, d2: f64) -> f64 {
        libm::exp(-d2 / (2.0 * self.sigma_sq))
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { sigma_sq: 2.0 }
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn gaussian_kernel(x: &[f64], y: &[f64], cfg: &KernelConfig) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(cfg.eval_sq_dist(sq_dist(x, y)))
}

/// Row-major copy of the instances so each one is a contiguous slice.
fn rows_of(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// `Σᵢⱼ k(xᵢ, xⱼ)` over all ordered pairs of one sample.
fn self_kernel_sum(rows: &[f64], dim: usize, cfg: &KernelConfig) -> f64 {
    let n = rows.len() / dim;
    let mut off = 0.0;
    for i in 0..n {
        let a = &rows[i * dim..(i + 1) * dim];
        for j in (i + 1)..n {
            off += cfg.eval_sq_dist(sq_dist(a, &rows[j * dim..(j + 1) * dim]));
        }
    }
    n as f64 + 2.0 * off
}

/// `Σᵢⱼ k(xᵢ, yⱼ)`.
fn cross_kernel_sum(x: &[f64], y: &[f64], dim: usize, cfg: &KernelConfig) -> f64 {
    let mut total = 0.0;
    for a in x.chunks_exact(dim) {
        for b in y.chunks_exact(dim) {
            total += cfg.eval_sq_dist(sq_dist(a, b));
        }
    }
    total
}

fn check_pair(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<()> {
    if x.nrows() == 0 || y.nrows() == 0 {
        return Err(Error::InsufficientInstances {
            needed: 1,
            got: 0,
        });
    }
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            found: y.ncols(),
        });
    }
    Ok(())
}

/// Biased MMD² between the row samples `x` (m rows) and `y` (n rows):
/// `(1/m²)Σk(xᵢ,xⱼ) + (1/n²)Σk(yᵢ,yⱼ) − (2/mn)Σk(xᵢ,yⱼ)`.
pub fn mmd2_biased(x: &DMatrix<f64>, y: &DMatrix<f64>, cfg: &KernelConfig) -> Result<f64> {
    check_pair(x, y)?;
    let dim = x.ncols();
    let (m, n) = (x.nrows() as f64, y.nrows() as f64);
    if dim == 0 {
        return Ok(0.0);
    }
    let (xr, yr) = (rows_of(x), rows_of(y));
    let kxx = self_kernel_sum(&xr, dim, cfg);
    let kyy = self_kernel_sum(&yr, dim, cfg);
    let kxy = cross_kernel_sum(&xr, &yr, dim, cfg);
    Ok(kxx / (m * m) + kyy / (n * n) - 2.0 * kxy / (m * n))
}

/// Gradient of `mmd2_biased(z_a, z_b·Q)` with respect to `Qᵀ`:
///
/// `G = −(2/mn) Σᵢⱼ exp(−‖z_aⁱ − Qᵀz_bʲ‖²/(2σ²)) · z_aⁱ z_bʲᵀ / σ²`.
///
/// The within-target term is constant for orthogonal `Q` and contributes
/// nothing along the manifold, so it is left out.
pub fn mmd_gradient_wrt_q(
    z_a: &DMatrix<f64>,
    z_b: &DMatrix<f64>,
    q: &OrthogonalMatrix,
    cfg: &KernelConfig,
) -> Result<DMatrix<f64>> {
    check_pair(z_a, z_b)?;
    if q.dim() != z_b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: z_b.ncols(),
            found: q.dim(),
        });
    }
    let rotated = z_b * q.as_matrix();
    let weights = cross_kernel_matrix(z_a, &rotated, cfg);
    let scale = -2.0 / (z_a.nrows() as f64 * z_b.nrows() as f64 * cfg.sigma_sq);
    Ok(z_a.tr_mul(&(weights * z_b)) * scale)
}

/// `K[i, j] = k(xᵢ, yⱼ)` (m × n).
pub fn cross_kernel_matrix(x: &DMatrix<f64>, y: &DMatrix<f64>, cfg: &KernelConfig) -> DMatrix<f64> {
    let dim = x.ncols();
    let (xr, yr) = (rows_of(x), rows_of(y));
    let n = y.nrows();
    let mut k = DMatrix::zeros(x.nrows(), n);
    if dim == 0 {
        k.fill(1.0);
        return k;
    }
    for (i, a) in xr.chunks_exact(dim).enumerate() {
        for (j, b) in yr.chunks_exact(dim).enumerate() {
            k[(i, j)] = cfg.eval_sq_dist(sq_dist(a, b));
        }
    }
    k
}

/// `F(Q) = mmd2_biased(z_a, z_b·Q)` restricted to orthogonal `Q`, with the
/// two within-sample terms cached (they do not depend on `Q`).
#[derive(Debug, Clone)]
pub struct AlignmentObjective {
    z_a: DMatrix<f64>,
    z_b: DMatrix<f64>,
    z_a_rows: Vec<f64>,
    cfg: KernelConfig,
    self_terms: f64,
}

impl AlignmentObjective {
    pub fn new(z_a: DMatrix<f64>, z_b: DMatrix<f64>, cfg: KernelConfig) -> Result<Self> {
        check_pair(&z_a, &z_b)?;
        let dim = z_a.ncols();
        if dim == 0 {
            return Err(Error::InvalidArgument("alignment needs at least one dimension"));
        }
        let (m, n) = (z_a.nrows() as f64, z_b.nrows() as f64);
        let z_a_rows = rows_of(&z_a);
        let self_terms = self_kernel_sum(&z_a_rows, dim, &cfg) / (m * m)
            + self_kernel_sum(&rows_of(&z_b), dim, &cfg) / (n * n);
        Ok(AlignmentObjective {
            z_a,
            z_b,
            z_a_rows,
            cfg,
            self_terms,
        })
    }

    pub fn dim(&self) -> usize {
        self.z_a.ncols()
    }

    pub fn source(&self) -> &DMatrix<f64> {
        &self.z_a
    }

    pub fn target(&self) -> &DMatrix<f64> {
        &self.z_b
    }

    fn check(&self, q: &DMatrix<f64>) -> Result<()> {
        if q.nrows() != self.dim() || q.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: q.nrows(),
            });
        }
        Ok(())
    }

    /// Objective at `Q`.
    pub fn value(&self, q: &DMatrix<f64>) -> Result<f64> {
        self.check(q)?;
        let rotated = rows_of(&(&self.z_b * q));
        let cross = cross_kernel_sum(&self.z_a_rows, &rotated, self.dim(), &self.cfg);
        let (m, n) = (self.z_a.nrows() as f64, self.z_b.nrows() as f64);
        Ok(self.self_terms - 2.0 * cross / (m * n))
    }

    /// Objective at `X = Qᵀ` together with the cross-kernel matrix
    /// `K[i, j] = k(z_aⁱ, Qᵀz_bʲ)`, which [`Self::gradient_from_weights`]
    /// reuses. The value is bit-identical to [`Self::value_at_transpose`].
    pub fn evaluate_at_transpose(&self, x: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
        self.check(x)?;
        let k = cross_kernel_matrix(&self.z_a, &(&self.z_b * x.transpose()), &self.cfg);
        let mut cross = 0.0;
        for i in 0..k.nrows() {
            for j in 0..k.ncols() {
                cross += k[(i, j)];
            }
        }
        let (m, n) = (self.z_a.nrows() as f64, self.z_b.nrows() as f64);
        Ok((self.self_terms - 2.0 * cross / (m * n), k))
    }

    /// Gradient with respect to `Qᵀ` from a cross-kernel matrix returned by
    /// [`Self::evaluate_at_transpose`].
    pub fn gradient_from_weights(&self, k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if k.shape() != (self.z_a.nrows(), self.z_b.nrows()) {
            return Err(Error::DimensionMismatch {
                expected: self.z_b.nrows(),
                found: k.ncols(),
            });
        }
        let scale = -2.0 / (self.z_a.nrows() as f64 * self.z_b.nrows() as f64 * self.cfg.sigma_sq);
        Ok(self.z_a.tr_mul(&(k * &self.z_b)) * scale)
    }

    /// Objective expressed in the optimizer's variable `X = Qᵀ`.
    pub fn value_at_transpose(&self, x: &DMatrix<f64>) -> Result<f64> {
        self.value(&x.transpose())
    }

    /// Gradient with respect to `Qᵀ`, evaluated at `X = Qᵀ`.
    pub fn gradient_at_transpose(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        let q = OrthogonalMatrix::new_unchecked(x.transpose());
        mmd_gradient_wrt_q(&self.z_a, &self.z_b, &q, &self.cfg)
    }
}
