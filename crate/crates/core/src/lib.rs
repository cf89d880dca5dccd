//! Correction of affine domain shift between a source and a target sample.
//!
//! Both domains are whitened through the eigendecomposition of their
//! empirical covariance, which identifies a shared latent space up to an
//! orthogonal matrix. That matrix is then found by minimizing the biased
//! Gaussian-kernel MMD² between the whitened samples with a Cayley-transform
//! descent that stays on the orthogonal group. A small labeled target subset
//! can be used to choose among restarts.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use mmdalign_core::{adapt_unsupervised, Dataset, KernelConfig, OptimizerConfig, OrthogonalMatrix};
//! use nalgebra::DMatrix;
//!
//! let x = DMatrix::from_fn(40, 3, |i, j| ((i * 7 + j * 3) % 11) as f64 - 0.3 * (i % 4) as f64);
//! let a = Dataset::new(x.clone()).unwrap();
//! let b = Dataset::new(&x * 2.0).unwrap();
//! let res = adapt_unsupervised(&a, &b, 3, &KernelConfig::default(),
//!     &OptimizerConfig::default(), &OrthogonalMatrix::identity(3)).unwrap();
//! assert!(res.mmd_after <= res.mmd_before);
//! ```
#![no_std]

extern crate alloc;

pub mod adaptation;
pub mod classify;
pub mod dataset;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod stiefel;

pub use adaptation::{
    adapt_semisupervised, adapt_unsupervised, fit_whitening, reconstruct, restart_seed,
    restart_seeds, select_by_labeled_error, select_by_mmd, whiten, AdaptationResult, AffineMap,
    DomainPair, RestartMetrics, RestartRecord, RestartRun, SemiSupervisedOutcome, WhiteningModel,
};
pub use classify::{
    accuracy, evaluate, predict, train_logistic, LinearClassifier, TrainConfig,
};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use kernel::{gaussian_kernel, mmd2_biased, mmd_gradient_wrt_q, AlignmentObjective, KernelConfig};
pub use linalg::{
    empirical_moments, psd_eigendecomposition, random_orthogonal, reflection_2d, rotation_2d,
    EigenFactors, Moments, OrthogonalMatrix, RankTolerance,
};
pub use stiefel::{
    cayley_step, minimize_on_stiefel, OptTrace, OptimizerConfig, StiefelSolution, StopReason,
    TraceRow,
};
