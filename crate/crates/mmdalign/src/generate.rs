//! Seeded synthetic data: Gaussian mixtures in a latent space, random affine
//! observation maps, the mirrored two-blob scenario and two-domain embeddings.

use mmdalign_core::{AffineMap, Dataset};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{AppError, Result};

/// Smallest singular value a random observation map must exceed.
pub const MIN_SINGULAR_VALUE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    pub n: usize,
    pub seed: u64,
}

impl MixtureSpec {
    /// Two bivariate Gaussians with equal weights, μ₁ = (1, 1),
    /// μ₂ = (5, −5), Σ₁ = [[2, 0.7], [0.7, 1]], Σ₂ = [[2, 1], [1, 4]].
    pub fn two_component_benchmark(n: usize, seed: u64) -> Self {
        MixtureSpec {
            weights: vec![0.5, 0.5],
            means: vec![DVector::from_vec(vec![1.0, 1.0]), DVector::from_vec(vec![5.0, -5.0])],
            covariances: vec![
                DMatrix::from_row_slice(2, 2, &[2.0, 0.7, 0.7, 1.0]),
                DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 4.0]),
            ],
            n,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, |m| m.len())
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.weights.len();
        if k == 0 || self.means.len() != k || self.covariances.len() != k {
            return Err(AppError::Data("mixture needs matching weights, means and covariances".into()));
        }
        if self.weights.iter().any(|&w| !(w >= 0.0)) || (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(AppError::Data("mixture weights must be nonnegative and sum to 1".into()));
        }
        let d = self.dim();
        for (m, c) in self.means.iter().zip(&self.covariances) {
            if m.len() != d || c.shape() != (d, d) {
                return Err(AppError::Data("mixture component dimensions disagree".into()));
            }
            if (c - c.transpose()).amax() > 1e-12 {
                return Err(AppError::Data("mixture covariance is not symmetric".into()));
            }
            if c.clone().symmetric_eigenvalues().iter().any(|&e| e < -1e-12) {
                return Err(AppError::Data("mixture covariance is not positive semi-definite".into()));
            }
        }
        Ok(())
    }
}

/// Square root factor `L` with `L Lᵀ = Σ` for a PSD matrix.
fn psd_sqrt(c: &DMatrix<f64>) -> DMatrix<f64> {
    match c.clone().cholesky() {
        Some(ch) => ch.l(),
        None => {
            let e = c.clone().symmetric_eigen();
            let s = e.eigenvalues.map(|v| v.max(0.0).sqrt());
            e.eigenvectors * DMatrix::from_diagonal(&s)
        }
    }
}

/// Samples `spec.n` rows; each row's label is its component index.
pub fn simulate_shared_space(spec: &MixtureSpec) -> Result<Dataset> {
    spec.validate()?;
    let d = spec.dim();
    let factors: Vec<DMatrix<f64>> = spec.covariances.iter().map(psd_sqrt).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut values = DMatrix::zeros(spec.n, d);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut comp = spec.weights.len() - 1;
        for (k, &w) in spec.weights.iter().enumerate() {
            acc += w;
            if u < acc && w > 0.0 {
                comp = k;
                break;
            }
        }
        let eps = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        let x = &spec.means[comp] + &factors[comp] * eps;
        values.row_mut(i).copy_from(&x.transpose());
        labels.push(comp as i64);
    }
    Ok(Dataset::with_labels(values, labels)?)
}

/// Draws `θ` (obs_dim × p) and `μ` with standard normal entries, redrawing
/// `θ` until its smallest singular value exceeds [`MIN_SINGULAR_VALUE`],
/// and returns `X = Z θᵀ + μ` with the labels of `z`.
pub fn make_affine_domain(z: &Dataset, obs_dim: usize, seed: u64) -> Result<(Dataset, AffineMap)> {
    let p = z.ncols();
    if obs_dim < p || p == 0 {
        return Err(AppError::Data(format!(
            "observation dimension {obs_dim} must be at least the latent dimension {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = loop {
        let t = DMatrix::from_fn(obs_dim, p, |_, _| StandardNormal.sample(&mut rng));
        let smallest = t
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if smallest > MIN_SINGULAR_VALUE {
            break t;
        }
    };
    let mu = DVector::from_fn(obs_dim, |_, _| StandardNormal.sample(&mut rng));
    let map = AffineMap::new(theta, mu)?;
    Ok((apply_map(&map, z)?, map))
}

/// `X = Z θᵀ + μ` keeping the labels.
pub fn apply_map(map: &AffineMap, z: &Dataset) -> Result<Dataset> {
    let x = map.apply(z.values())?;
    Ok(match z.labels() {
        Some(l) => Dataset::with_labels(x, l.to_vec())?,
        None => Dataset::new(x)?,
    })
}

/// Seeded permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Splits rows into the first `k` and the rest of a seeded permutation.
pub fn random_split(ds: &Dataset, k: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let perm = permutation(ds.nrows(), seed);
    let k = k.min(perm.len());
    Ok((ds.select_rows(&perm[..k])?, ds.select_rows(&perm[k..])?))
}

/// `max(1, round(fraction·n))` distinct row indices, sorted, drawn with a
/// seeded permutation.
pub fn labeled_subset(n: usize, fraction: f64, seed: u64) -> Vec<usize> {
    let k = ((fraction * n as f64).round() as usize).clamp(1, n.max(1)).min(n);
    let mut idx: Vec<usize> = permutation(n, seed).into_iter().take(k).collect();
    idx.sort_unstable();
    idx
}

/// Mirrored two-blob latent sample: class 0 around `(−separation, 0)`,
/// class 1 around `(+separation, 0)`, unit isotropic spread, `per_class`
/// rows each. The distribution is invariant under the half-turn that swaps
/// the classes.
pub fn mirrored_blobs(per_class: usize, separation: f64, seed: u64) -> Result<Dataset> {
    let spec = MixtureSpec {
        weights: vec![0.5, 0.5],
        means: vec![
            DVector::from_vec(vec![-separation, 0.0]),
            DVector::from_vec(vec![separation, 0.0]),
        ],
        covariances: vec![DMatrix::identity(2, 2), DMatrix::identity(2, 2)],
        n: 2 * per_class,
        seed,
    };
    spec.validate()?;
    // exact class balance, unlike sampling component indices
    let factors = DMatrix::<f64>::identity(2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = DMatrix::zeros(2 * per_class, 2);
    let mut labels = Vec::with_capacity(2 * per_class);
    for i in 0..2 * per_class {
        let c = i % 2;
        let eps = DVector::from_fn(2, |_, _| StandardNormal.sample(&mut rng));
        let x = &spec.means[c] + &factors * eps;
        values.row_mut(i).copy_from(&x.transpose());
        labels.push(c as i64);
    }
    Ok(Dataset::with_labels(values, labels)?)
}

/// Two-domain synthetic embeddings sharing one latent space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingSpec {
    pub n_classes: usize,
    /// Instances per class in each domain.
    pub per_class: usize,
    pub latent_dim: usize,
    pub obs_dim: usize,
    /// Standard deviation of the class means around the origin.
    pub class_spread: f64,
    pub seed: u64,
}

impl Default for EmbeddingSpec {
    fn default() -> Self {
        EmbeddingSpec {
            n_classes: 5,
            per_class: 100,
            latent_dim: 5,
            obs_dim: 20,
            class_spread: 2.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticEmbeddings {
    pub source: Dataset,
    pub target: Dataset,
    pub latent_source: Dataset,
    pub latent_target: Dataset,
    pub map_source: AffineMap,
    pub map_target: AffineMap,
}

/// Class-conditional Gaussians in a `latent_dim` space (random means,
/// random anisotropic covariances), sampled independently for each domain
/// and pushed through two random affine maps into `obs_dim` dimensions.
pub fn synthetic_embeddings(spec: &EmbeddingSpec) -> Result<SyntheticEmbeddings> {
    if spec.n_classes < 2 || spec.per_class < 2 || spec.latent_dim < 1 {
        return Err(AppError::Data("embedding spec needs ≥2 classes, ≥2 instances per class".into()));
    }
    let d = spec.latent_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut means = Vec::with_capacity(spec.n_classes);
    let mut covs = Vec::with_capacity(spec.n_classes);
    for _ in 0..spec.n_classes {
        means.push(DVector::from_fn(d, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            spec.class_spread * g
        }));
        let a: DMatrix<f64> = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
        covs.push(&a * a.transpose() / d as f64 + DMatrix::identity(d, d) * 0.1);
    }
    let factors: Vec<DMatrix<f64>> = covs.iter().map(psd_sqrt).collect();
    let draw = |rng: &mut ChaCha8Rng| -> Result<Dataset> {
        let n = spec.n_classes * spec.per_class;
        let mut values = DMatrix::zeros(n, d);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let c = i % spec.n_classes;
            let eps = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
            let x = &means[c] + &factors[c] * eps;
            values.row_mut(i).copy_from(&x.transpose());
            labels.push(c as i64);
        }
        Ok(Dataset::with_labels(values, labels)?)
    };
    let latent_source = draw(&mut rng)?;
    let latent_target = draw(&mut rng)?;
    let map_seed_a: u64 = rng.random();
    let map_seed_b: u64 = rng.random();
    let (source, map_source) = make_affine_domain(&latent_source, spec.obs_dim, map_seed_a)?;
    let (target, map_target) = make_affine_domain(&latent_target, spec.obs_dim, map_seed_b)?;
    Ok(SyntheticEmbeddings {
        source,
        target,
        latent_source,
        latent_target,
        map_source,
        map_target,
    })
}
