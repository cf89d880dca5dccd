//! Empirical moments, rank-aware PSD eigendecomposition and orthogonal
//! matrix constructors.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Entrywise tolerance for `QᵀQ = I` accepted by [`OrthogonalMatrix::new`].
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-10;

/// Mean vector and population covariance of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// Column average and population covariance (divisor = row count).
pub fn empirical_moments(x: &Dataset) -> Result<Moments> {
    let (n, d) = (x.nrows(), x.ncols());
    if n < 2 {
        return Err(Error::InsufficientInstances { needed: 2, got: n });
    }
    let values = x.values();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite entry"));
    }
    let inv_n = 1.0 / n as f64;
    let mean = DVector::from_fn(d, |j, _| values.column(j).sum() * inv_n);
    let mut centered = values.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    let mut covariance = centered.tr_mul(&centered) * inv_n;
    // Exact symmetry; the product above is symmetric only up to rounding.
    for i in 0..d {
        for j in (i + 1)..d {
            let v = 0.5 * (covariance[(i, j)] + covariance[(j, i)]);
            covariance[(i, j)] = v;
            covariance[(j, i)] = v;
        }
    }
    Ok(Moments { mean, covariance })
}

/// Threshold below which an eigenvalue is treated as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankTolerance {
    Absolute(f64),
    /// Fraction of the largest eigenvalue.
    Relative(f64),
}

impl Default for RankTolerance {
    fn default() -> Self {
        RankTolerance::Relative(1e-8)
    }
}

impl RankTolerance {
    fn threshold(self, largest: f64) -> Result<f64> {
        let t = match self {
            RankTolerance::Absolute(t) => t,
            RankTolerance::Relative(r) => {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(Error::InvalidArgument("rank tolerance must be positive"));
                }
                r * largest.max(0.0)
            }
        };
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument("rank tolerance must be positive"));
        }
        Ok(t)
    }
}

/// Retained eigenpairs of a symmetric PSD matrix, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFactors {
    /// Column-orthonormal eigenvectors (features × p).
    pub vectors: DMatrix<f64>,
    /// Eigenvalues, non-increasing, all above the rank tolerance.
    pub values: DVector<f64>,
}

impl EigenFactors {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    /// Keeps the leading `p` pairs.
    pub fn truncated(&self, p: usize) -> EigenFactors {
        let p = p.min(self.rank());
        EigenFactors {
            vectors: self.vectors.columns(0, p).into_owned(),
            values: self.values.rows(0, p).into_owned(),
        }
    }
}

/// Eigenpairs of `sigma` with eigenvalue above `rank_tol`, sorted descending
/// (ties by original index), each eigenvector signed so that its
/// largest-magnitude entry is positive, truncated to `p_max`.
pub fn psd_eigendecomposition(
    sigma: &DMatrix<f64>,
    rank_tol: RankTolerance,
    p_max: Option<usize>,
) -> Result<EigenFactors> {
    let d = sigma.nrows();
    if sigma.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: sigma.ncols(),
        });
    }
    if d == 0 {
        return Err(Error::DegenerateCovariance);
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite entry"));
    }
    let scale = sigma.amax().max(1.0);
    let asym = (sigma - sigma.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::Asymmetric(asym));
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();

    let mut order: Vec<usize> = (0..d).collect();
    // Stable: equal eigenvalues keep their original relative order.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let largest = eig.eigenvalues[order[0]];
    let tol = rank_tol.threshold(largest)?;

    let mut keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i] > tol)
        .collect();
    if let Some(p) = p_max {
        keep.truncate(p);
    }
    if keep.is_empty() {
        return Err(Error::DegenerateCovariance);
    }

    let mut vectors = eig.eigenvectors.select_columns(keep.iter());
    for mut col in vectors.column_iter_mut() {
        let lead = col.iter().copied().fold(0.0f64, |acc, v| {
            if v.abs() > acc.abs() {
                v
            } else {
                acc
            }
        });
        if lead < 0.0 {
            col.neg_mut();
        }
    }
    let values = DVector::from_iterator(keep.len(), keep.iter().map(|&i| eig.eigenvalues[i]));
    Ok(EigenFactors { vectors, values })
}

/// A square matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix(DMatrix<f64>);

impl OrthogonalMatrix {
    /// Validates `QᵀQ = I` within [`ORTHOGONALITY_TOL`].
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::DimensionMismatch {
                expected: q.nrows(),
                found: q.ncols(),
            });
        }
        if q.nrows() == 0 {
            return Err(Error::InvalidArgument("orthogonal matrix must be at least 1x1"));
        }
        let dev = orthogonality_defect(&q);
        if !(dev < ORTHOGONALITY_TOL) {
            return Err(Error::NotOrthogonal(dev));
        }
        Ok(OrthogonalMatrix(q))
    }

    pub(crate) fn new_unchecked(q: DMatrix<f64>) -> Self {
        OrthogonalMatrix(q)
    }

    pub fn identity(dim: usize) -> Self {
        OrthogonalMatrix(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn transpose(&self) -> OrthogonalMatrix {
        OrthogonalMatrix(self.0.transpose())
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// `‖QᵀQ − I‖_max`.
    pub fn defect(&self) -> f64 {
        orthogonality_defect(&self.0)
    }
}

/// `‖QᵀQ − I‖_max` for any matrix.
pub fn orthogonality_defect(q: &DMatrix<f64>) -> f64 {
    let mut g = q.tr_mul(q);
    for i in 0..g.nrows().min(g.ncols()) {
        g[(i, i)] -= 1.0;
    }
    g.amax()
}

/// Haar-distributed orthogonal matrix: QR of a standard normal matrix with
/// the column signs fixed by the diagonal of R. Deterministic per seed.
pub fn random_orthogonal(dim: usize, seed: u64) -> Result<OrthogonalMatrix> {
    if dim < 1 {
        return Err(Error::InvalidArgument("dimension must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(OrthogonalMatrix(q))
}

/// `[[cos α, −sin α], [sin α, cos α]]`.
pub fn rotation_2d(alpha: f64) -> OrthogonalMatrix {
    let (s, c) = (libm::sin(alpha), libm::cos(alpha));
    OrthogonalMatrix(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
}

/// `[[−cos α, −sin α], [−sin α, cos α]]`, determinant −1.
pub fn reflection_2d(alpha: f64) -> OrthogonalMatrix {
    let (s, c) = (libm::sin(alpha), libm::cos(alpha));
    OrthogonalMatrix(DMatrix::from_row_slice(2, 2, &[-c, -s, -s, c]))
}
