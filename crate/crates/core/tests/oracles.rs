//! Checks against independent closed forms: Procrustes, finite differences
//! and the SVD pseudoinverse.

use mmdalign_core::{
    fit_whitening, minimize_on_stiefel, mmd2_biased, mmd_gradient_wrt_q, random_orthogonal, Dataset, KernelConfig,
    OptimizerConfig, OrthogonalMatrix, RankTolerance, StopReason,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `(I + W/2)⁻¹(I − W/2)` for skew `W`, via an explicit inverse.
fn cayley(w: &DMatrix<f64>) -> DMatrix<f64> {
    let i = DMatrix::identity(w.nrows(), w.ncols());
    (&i + w * 0.5).try_inverse().unwrap() * (&i - w * 0.5)
}

#[test]
fn procrustes_minimizer_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..5 {
        let c = gaussian(3, 3, &mut rng);
        let svd = c.clone().svd(true, true);
        let oracle = svd.u.unwrap() * svd.v_t.unwrap();
        // the Cayley flow keeps det(X), so start on the oracle's component
        let x0 = (0..)
            .map(|s| random_orthogonal(3, 100 * trial + s).unwrap())
            .find(|q| q.determinant().signum() == oracle.determinant().signum())
            .unwrap();
        let cfg = OptimizerConfig {
            tau: 1.0,
            max_iters: 5000,
            f_tol: 1e-15,
            ..OptimizerConfig::default()
        };
        let sol = minimize_on_stiefel(|x| Ok(-c.dot(x)), |_| Ok(-c.clone()), &x0, &cfg).unwrap();
        assert!((sol.x.as_matrix() - &oracle).norm() < 1e-4, "trial {trial}");
        assert!(sol.trace.iterations.windows(2).all(|w| w[1].objective <= w[0].objective));
        assert_ne!(sol.trace.stop, StopReason::BacktrackingExhausted);
    }
}

#[test]
fn gradient_matches_central_differences_on_cayley_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = KernelConfig::default();
    for _ in 0..5 {
        let p = rng.random_range(2..5);
        let z_a = gaussian(30, p, &mut rng);
        let z_b = gaussian(25, p, &mut rng) * 1.3;
        let x0 = random_orthogonal(p, rng.random()).unwrap();
        let m = gaussian(p, p, &mut rng);
        let w = &m - m.transpose();
        // full objective, X = Qᵀ, so the target is rotated by Xᵀ
        let f = |x: &DMatrix<f64>| mmd2_biased(&z_a, &(&z_b * x.transpose()), &cfg).unwrap();
        let eps = 1e-6;
        let curve = |t: f64| cayley(&(&w * t)) * x0.as_matrix();
        let fd = (f(&curve(eps)) - f(&curve(-eps))) / (2.0 * eps);
        let q = x0.transpose();
        let g = mmd_gradient_wrt_q(&z_a, &z_b, &q, &cfg).unwrap();
        let velocity = -(&w * x0.as_matrix());
        let analytic = g.dot(&velocity);
        assert!((fd - analytic).abs() <= 1e-4 * analytic.abs(), "fd {fd} analytic {analytic}");
    }
}

#[test]
fn projection_equals_pseudoinverse_of_theta() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let latent = gaussian(200, 3, &mut rng);
        let mix = gaussian(7, 3, &mut rng);
        let x = Dataset::new(&latent * mix.transpose()).unwrap();
        let model = fit_whitening(&x, Some(3), RankTolerance::default()).unwrap();
        let q = random_orthogonal(3, rng.random()).unwrap();
        let theta = model.theta(Some(&q)).unwrap();
        let pinv = theta.clone().pseudo_inverse(1e-12).unwrap();
        let mut centered = x.values().clone();
        for (j, mut col) in centered.column_iter_mut().enumerate() {
            col.add_scalar_mut(-model.mu[j]);
        }
        let oracle = (pinv * centered.transpose()).transpose();
        let projected = model.project(x.values(), Some(&q)).unwrap();
        assert!((projected - oracle).amax() < 1e-10);
    }
}

#[test]
fn identity_start_is_kept_when_already_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let z = gaussian(20, 2, &mut rng);
    let g = mmd_gradient_wrt_q(&z, &z, &OrthogonalMatrix::identity(2), &KernelConfig::default()).unwrap();
    // G is symmetric at the optimum, so the skew direction vanishes
    assert!((&g - g.transpose()).amax() < 1e-15);
}
