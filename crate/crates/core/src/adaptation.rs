//! Domain-shift correction for affinely transformed domains.
//!
//! Each domain is whitened with its own covariance eigenvectors, which fixes
//! the shared latent space up to an orthogonal matrix. The source keeps the
//! identity; the target orthogonal matrix `Q_B` is chosen to minimize the
//! MMD² between the two whitened samples. With a few labeled target
//! instances, several seeded restarts are ranked by labeled-target error
//! instead.

use alloc::vec::Vec;
use core::cell::RefCell;

use nalgebra::{DMatrix, DVector};

use crate::classify::{evaluate, train_logistic, LinearClassifier, TrainConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{AlignmentObjective, KernelConfig};
use crate::linalg::{
    empirical_moments, psd_eigendecomposition, random_orthogonal, EigenFactors, Moments,
    OrthogonalMatrix, RankTolerance,
};
use crate::stiefel::{minimize_on_stiefel, OptTrace, OptimizerConfig};

/// Per-domain whitening: `z = S^{-1/2} Uᵀ (x − μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningModel {
    pub mu: DVector<f64>,
    /// Observation dim × p, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Square roots of the retained eigenvalues.
    pub s_sqrt: DVector<f64>,
}

impl WhiteningModel {
    fn from_factors(moments: &Moments, factors: &EigenFactors, p: usize) -> Self {
        let f = factors.truncated(p);
        WhiteningModel {
            mu: moments.mean.clone(),
            u: f.vectors,
            s_sqrt: f.values.map(libm::sqrt),
        }
    }

    /// Latent dimension.
    pub fn p(&self) -> usize {
        self.s_sqrt.len()
    }

    pub fn obs_dim(&self) -> usize {
        self.mu.len()
    }

    /// `θ = U S^{1/2} Q` (identity when `q` is `None`).
    pub fn theta(&self, q: Option<&OrthogonalMatrix>) -> Result<DMatrix<f64>> {
        let us = &self.u * DMatrix::from_diagonal(&self.s_sqrt);
        match q {
            None => Ok(us),
            Some(q) => {
                self.check_q(q)?;
                Ok(us * q.as_matrix())
            }
        }
    }

    pub fn affine_map(&self, q: Option<&OrthogonalMatrix>) -> Result<AffineMap> {
        AffineMap::new(self.theta(q)?, self.mu.clone())
    }

    fn check_q(&self, q: &OrthogonalMatrix) -> Result<()> {
        if q.dim() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: q.dim(),
            });
        }
        Ok(())
    }

    /// Whitens the rows of `x`, then applies `Q` on the right (rows
    /// `zᵀ = (x − μ)ᵀ U S^{-1/2} Q`, i.e. `z = Qᵀ S^{-1/2} Uᵀ (x − μ)`).
    pub fn project(&self, x: &DMatrix<f64>, q: Option<&OrthogonalMatrix>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.obs_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.obs_dim(),
                found: x.ncols(),
            });
        }
        let mut centered = x.clone();
        for (j, mut col) in centered.column_iter_mut().enumerate() {
            col.add_scalar_mut(-self.mu[j]);
        }
        let inv = self.s_sqrt.map(|s| 1.0 / s);
        let z = centered * &self.u * DMatrix::from_diagonal(&inv);
        match q {
            None => Ok(z),
            Some(q) => {
                self.check_q(q)?;
                Ok(z * q.as_matrix())
            }
        }
    }

    /// Maps latent rows back to observations: `x = θ z + μ`, `θ = U S^{1/2} Q`.
    pub fn lift(&self, z: &DMatrix<f64>, q: Option<&OrthogonalMatrix>) -> Result<DMatrix<f64>> {
        if z.ncols() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: z.ncols(),
            });
        }
        let theta = self.theta(q)?;
        let mut x = z * theta.transpose();
        for (j, mut col) in x.column_iter_mut().enumerate() {
            col.add_scalar_mut(self.mu[j]);
        }
        Ok(x)
    }
}

/// `x = θ z + μ` from a p-dimensional latent space to observations.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub theta: DMatrix<f64>,
    pub mu: DVector<f64>,
}

impl AffineMap {
    /// Requires `θ` to have full column rank.
    pub fn new(theta: DMatrix<f64>, mu: DVector<f64>) -> Result<Self> {
        if theta.nrows() != mu.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.nrows(),
                found: mu.len(),
            });
        }
        if theta.ncols() == 0 || theta.ncols() > theta.nrows() {
            return Err(Error::InvalidArgument("theta must be tall with at least one column"));
        }
        let sv = theta.clone().svd(false, false).singular_values;
        let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        if !(lo > 1e-12 * hi.max(1.0)) {
            return Err(Error::InvalidArgument("theta must have full column rank"));
        }
        Ok(AffineMap { theta, mu })
    }

    pub fn latent_dim(&self) -> usize {
        self.theta.ncols()
    }

    pub fn obs_dim(&self) -> usize {
        self.theta.nrows()
    }

    /// `X = Z θᵀ + μ` row-wise.
    pub fn apply(&self, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if z.ncols() != self.latent_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.latent_dim(),
                found: z.ncols(),
            });
        }
        let mut x = z * self.theta.transpose();
        for (j, mut col) in x.column_iter_mut().enumerate() {
            col.add_scalar_mut(self.mu[j]);
        }
        Ok(x)
    }

    /// Least-squares inverse `z = (θᵀθ)⁻¹ θᵀ (x − μ)` row-wise.
    pub fn invert(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.obs_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.obs_dim(),
                found: x.ncols(),
            });
        }
        let mut centered = x.clone();
        for (j, mut col) in centered.column_iter_mut().enumerate() {
            col.add_scalar_mut(-self.mu[j]);
        }
        let gram = self.theta.tr_mul(&self.theta);
        let rhs = self.theta.tr_mul(&centered.transpose());
        let z = gram
            .cholesky()
            .ok_or(Error::InvalidArgument("theta must have full column rank"))?
            .solve(&rhs);
        Ok(z.transpose())
    }
}

/// Fits a whitening model keeping `p` components (all positive ones when
/// `p` is `None`).
pub fn fit_whitening(x: &Dataset, p: Option<usize>, rank_tol: RankTolerance) -> Result<WhiteningModel> {
    if let Some(p) = p {
        if p == 0 {
            return Err(Error::InvalidArgument("p must be at least 1"));
        }
        if x.nrows() < p + 1 {
            return Err(Error::InsufficientInstances {
                needed: p + 1,
                got: x.nrows(),
            });
        }
    }
    let moments = empirical_moments(x)?;
    let factors = psd_eigendecomposition(&moments.covariance, rank_tol, None)?;
    let p = match p {
        Some(p) if p > factors.rank() => {
            return Err(Error::RankDeficient {
                requested: p,
                rank: factors.rank(),
            })
        }
        Some(p) => p,
        None => factors.rank(),
    };
    Ok(WhiteningModel::from_factors(&moments, &factors, p))
}

/// Whitens `x` with `model`; labels are carried over.
pub fn whiten(model: &WhiteningModel, x: &Dataset) -> Result<Dataset> {
    let z = model.project(x.values(), None)?;
    Ok(Dataset::from_parts_unchecked(z, x.labels().map(<[i64]>::to_vec)))
}

/// Inverse of [`whiten`] on the retained subspace, optionally undoing an
/// orthogonal alignment `q` first.
pub fn reconstruct(model: &WhiteningModel, z: &Dataset, q: Option<&OrthogonalMatrix>) -> Result<Dataset> {
    let x = model.lift(z.values(), q)?;
    Ok(Dataset::from_parts_unchecked(x, z.labels().map(<[i64]>::to_vec)))
}

#[derive(Debug, Clone)]
pub struct AdaptationResult {
    /// Whitened source, i × p.
    pub z_a: Dataset,
    /// Whitened and aligned target `Z'_B · Q_B`, j × p.
    pub z_b: Dataset,
    pub q_b: OrthogonalMatrix,
    /// Objective at the seed matrix.
    pub mmd_before: f64,
    pub mmd_after: f64,
    pub trace: OptTrace,
    pub model_a: WhiteningModel,
    pub model_b: WhiteningModel,
}

impl AdaptationResult {
    pub fn p(&self) -> usize {
        self.q_b.dim()
    }

    /// Maps further target-domain observations into the shared space.
    pub fn project_target(&self, x: &Dataset) -> Result<Dataset> {
        let z = self.model_b.project(x.values(), Some(&self.q_b))?;
        Ok(Dataset::from_parts_unchecked(z, x.labels().map(<[i64]>::to_vec)))
    }

    /// Maps further source-domain observations into the shared space.
    pub fn project_source(&self, x: &Dataset) -> Result<Dataset> {
        whiten(&self.model_a, x)
    }
}

/// Both domains whitened once; alignments can then be run from any seed.
#[derive(Debug, Clone)]
pub struct DomainPair {
    pub model_a: WhiteningModel,
    pub model_b: WhiteningModel,
    z_a: Dataset,
    z_b_prime: Dataset,
    objective: Option<(KernelConfig, AlignmentObjective)>,
}

impl DomainPair {
    /// Whitens both domains to the shared dimension
    /// `min(p, rank(Σ_A), rank(Σ_B))`.
    pub fn fit(x_a: &Dataset, x_b: &Dataset, p: usize, rank_tol: RankTolerance) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("p must be at least 1"));
        }
        let ma = empirical_moments(x_a)?;
        let mb = empirical_moments(x_b)?;
        let fa = psd_eigendecomposition(&ma.covariance, rank_tol, None)?;
        let fb = psd_eigendecomposition(&mb.covariance, rank_tol, None)?;
        let shared = p.min(fa.rank()).min(fb.rank());
        let model_a = WhiteningModel::from_factors(&ma, &fa, shared);
        let model_b = WhiteningModel::from_factors(&mb, &fb, shared);
        let z_a = whiten(&model_a, x_a)?;
        let z_b_prime = whiten(&model_b, x_b)?;
        Ok(DomainPair {
            model_a,
            model_b,
            z_a,
            z_b_prime,
            objective: None,
        })
    }

    pub fn p(&self) -> usize {
        self.model_a.p()
    }

    pub fn z_a(&self) -> &Dataset {
        &self.z_a
    }

    /// Whitened target before alignment.
    pub fn z_b_prime(&self) -> &Dataset {
        &self.z_b_prime
    }

    /// Alignment objective for `kcfg`, cached until the kernel changes.
    pub fn objective(&mut self, kcfg: &KernelConfig) -> Result<&AlignmentObjective> {
        let stale = !matches!(&self.objective, Some((k, _)) if k == kcfg);
        if stale {
            let obj = AlignmentObjective::new(
                self.z_a.values().clone(),
                self.z_b_prime.values().clone(),
                *kcfg,
            )?;
            self.objective = Some((*kcfg, obj));
        }
        Ok(&self.objective.as_ref().expect("objective just cached").1)
    }

    /// Minimizes `MMD²(Z_A, Z'_B·Q_B)` over orthogonal `Q_B` from `q0`.
    ///
    /// The optimizer works on `X = Q_Bᵀ`, the variable the gradient is
    /// taken with respect to.
    pub fn align(&mut self, kcfg: &KernelConfig, ocfg: &OptimizerConfig, q0: &OrthogonalMatrix) -> Result<AdaptationResult> {
        if q0.dim() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: q0.dim(),
            });
        }
        let objective = self.objective(kcfg)?.clone();
        let x0 = q0.transpose();
        // the gradient is requested at the last accepted trial point, whose
        // kernel matrix the objective call has just built
        let cache: RefCell<Option<(DMatrix<f64>, DMatrix<f64>)>> = RefCell::new(None);
        let sol = minimize_on_stiefel(
            |x| {
                let (v, k) = objective.evaluate_at_transpose(x)?;
                *cache.borrow_mut() = Some((x.clone(), k));
                Ok(v)
            },
            |x| match cache.borrow().as_ref() {
                Some((cx, k)) if cx == x => objective.gradient_from_weights(k),
                _ => objective.gradient_at_transpose(x),
            },
            &x0,
            ocfg,
        )?;
        let q_b = sol.x.transpose();
        let mmd_before = sol.trace.iterations[0].objective;
        let z_b = self.z_b_prime.values() * q_b.as_matrix();
        Ok(AdaptationResult {
            z_a: self.z_a.clone(),
            z_b: Dataset::from_parts_unchecked(z_b, self.z_b_prime.labels().map(<[i64]>::to_vec)),
            q_b,
            mmd_before,
            mmd_after: sol.objective,
            trace: sol.trace,
            model_a: self.model_a.clone(),
            model_b: self.model_b.clone(),
        })
    }

    /// Runs [`DomainPair::align`] from every seed of [`restart_seeds`].
    pub fn align_restarts(
        &mut self,
        kcfg: &KernelConfig,
        ocfg: &OptimizerConfig,
        n_restarts: usize,
        seed: u64,
    ) -> Result<Vec<RestartRun>> {
        let seeds = restart_seeds(self.p(), n_restarts, seed)?;
        Ok(seeds
            .into_iter()
            .enumerate()
            .map(|(index, (seed, q0))| RestartRun {
                index,
                seed,
                result: self.align(kcfg, ocfg, &q0),
            })
            .collect())
    }
}

/// Unsupervised adaptation from the seed `q0`.
pub fn adapt_unsupervised(
    x_a: &Dataset,
    x_b: &Dataset,
    p: usize,
    kcfg: &KernelConfig,
    ocfg: &OptimizerConfig,
    q0: &OrthogonalMatrix,
) -> Result<AdaptationResult> {
    DomainPair::fit(x_a, x_b, p, RankTolerance::default())?.align(kcfg, ocfg, q0)
}

/// Seed of restart `index` for a run seeded with `seed`.
pub fn restart_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Restart 0 is the identity; restart `k ≥ 1` is a random orthogonal matrix
/// drawn with [`restart_seed`]`(seed, k)`.
pub fn restart_seeds(p: usize, n_restarts: usize, seed: u64) -> Result<Vec<(Option<u64>, OrthogonalMatrix)>> {
    if n_restarts < 1 {
        return Err(Error::InvalidArgument("n_restarts must be at least 1"));
    }
    let mut out = Vec::with_capacity(n_restarts);
    out.push((None, OrthogonalMatrix::identity(p)));
    for k in 1..n_restarts {
        let s = restart_seed(seed, k);
        out.push((Some(s), random_orthogonal(p, s)?));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RestartRun {
    pub index: usize,
    /// `None` for the identity start.
    pub seed: Option<u64>,
    pub result: Result<AdaptationResult>,
}

/// Index of the successful restart with the lowest `mmd_after` (ties go to
/// the lower index).
pub fn select_by_mmd(runs: &[RestartRun]) -> Result<usize> {
    runs.iter()
        .filter_map(|r| r.result.as_ref().ok().map(|a| (r.index, a.mmd_after)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or(Error::AllRestartsFailed(runs.len()))
}

/// Per-restart row of the semi-supervised selection report.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartRecord {
    pub index: usize,
    pub seed: Option<u64>,
    pub outcome: core::result::Result<RestartMetrics, Error>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartMetrics {
    pub mmd_before: f64,
    pub mmd_after: f64,
    /// Error rate on the labeled target instances.
    pub labeled_error: f64,
    pub iterations: usize,
}

/// Scores every restart on the labeled target instances with `classifier`
/// and picks the lowest error; ties go to lower `mmd_after`, then lower
/// index.
pub fn select_by_labeled_error(
    runs: &[RestartRun],
    classifier: &LinearClassifier,
    labeled_b: &Dataset,
) -> Result<(usize, Vec<RestartRecord>)> {
    let records: Vec<RestartRecord> = runs
        .iter()
        .map(|run| {
            let outcome = run.result.clone().and_then(|res| {
                let projected = res.project_target(labeled_b)?;
                let acc = evaluate(classifier, &projected)?;
                Ok(RestartMetrics {
                    mmd_before: res.mmd_before,
                    mmd_after: res.mmd_after,
                    labeled_error: 1.0 - acc,
                    iterations: res.trace.iterations.len() - 1,
                })
            });
            RestartRecord {
                index: run.index,
                seed: run.seed,
                outcome,
            }
        })
        .collect();
    let best = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|m| (r.index, *m)))
        .min_by(|a, b| {
            a.1.labeled_error
                .total_cmp(&b.1.labeled_error)
                .then(a.1.mmd_after.total_cmp(&b.1.mmd_after))
                .then(a.0.cmp(&b.0))
        })
        .map(|(i, _)| i)
        .ok_or(Error::AllRestartsFailed(runs.len()))?;
    Ok((best, records))
}

#[derive(Debug, Clone)]
pub struct SemiSupervisedOutcome {
    pub result: AdaptationResult,
    /// Trained on the whitened source only.
    pub classifier: LinearClassifier,
    pub restarts: Vec<RestartRecord>,
    pub selected: usize,
}

/// Multi-restart alignment where the restart is chosen by the error of a
/// source-trained classifier on a few labeled target instances.
///
/// `labeled_b` is only transformed (with each candidate's target whitening
/// and `Q_B`); it never contributes to the moments.
#[allow(clippy::too_many_arguments)]
pub fn adapt_semisupervised(
    x_a: &Dataset,
    x_b: &Dataset,
    labeled_b: &Dataset,
    p: usize,
    kcfg: &KernelConfig,
    ocfg: &OptimizerConfig,
    tcfg: &TrainConfig,
    n_restarts: usize,
    seed: u64,
) -> Result<SemiSupervisedOutcome> {
    if n_restarts < 1 {
        return Err(Error::InvalidArgument("n_restarts must be at least 1"));
    }
    if x_a.labels().is_none() {
        return Err(Error::DegenerateLabels("source dataset has no labels"));
    }
    if labeled_b.is_empty() || labeled_b.labels().is_none() {
        return Err(Error::DegenerateLabels("labeled target set is empty"));
    }
    let mut pair = DomainPair::fit(x_a, x_b, p, RankTolerance::default())?;
    let classifier = train_logistic(pair.z_a(), tcfg)?;
    let runs = pair.align_restarts(kcfg, ocfg, n_restarts, seed)?;
    let (selected, restarts) = select_by_labeled_error(&runs, &classifier, labeled_b)?;
    let result = runs
        .into_iter()
        .nth(selected)
        .expect("selected index comes from runs")
        .result?;
    Ok(SemiSupervisedOutcome {
        result,
        classifier,
        restarts,
        selected,
    })
}
