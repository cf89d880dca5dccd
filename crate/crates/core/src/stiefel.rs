//! Feasible descent on the orthogonal group via the Cayley transform.
//!
//! Each step builds the skew-symmetric `A = G Xᵀ − X Gᵀ` from the Euclidean
//! gradient `G` and moves to `(I + τ/2·A)⁻¹ (I − τ/2·A) X`, which is again
//! orthogonal. Optional halving backtracking keeps the objective monotone.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::OrthogonalMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Initial step size τ of every iteration; halved on ascent when
    /// backtracking is on. MMD² gradients are small, hence the large default.
    pub tau: f64,
    pub max_iters: usize,
    /// Stop once an accepted step changes the objective by less than this.
    pub f_tol: f64,
    pub backtracking: bool,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    /// Armijo constant `c`: a trial step is accepted when it lowers the
    /// objective by at least `c·τ·‖A‖²/2`, the predicted first-order decrease
    /// scaled by `c`. Zero accepts any non-increasing step.
    pub sufficient_decrease: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            tau: 50.0,
            max_iters: 500,
            f_tol: 1e-9,
            backtracking: true,
            backtrack_factor: 0.5,
            max_backtracks: 30,
            sufficient_decrease: 1e-4,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument("tau must be positive"));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("max_iters must be at least 1"));
        }
        if !(self.f_tol >= 0.0) {
            return Err(Error::InvalidArgument("f_tol must be nonnegative"));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidArgument("backtrack_factor must lie in (0, 1)"));
        }
        if !(self.sufficient_decrease >= 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::InvalidArgument("sufficient_decrease must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    /// Frobenius norm of the skew direction `A` at the previous iterate.
    pub grad_norm: f64,
    /// Step size actually taken (0 for the starting point).
    pub step: f64,
}

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    ObjectiveTolerance,
    Stationary,
    /// No step size within the backtracking budget decreased the objective.
    BacktrackingExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptTrace {
    pub iterations: Vec<TraceRow>,
    pub stop: StopReason,
}

#[derive(Debug, Clone)]
pub struct StiefelSolution {
    /// Best iterate seen.
    pub x: OrthogonalMatrix,
    pub objective: f64,
    pub trace: OptTrace,
}

/// `A = G Xᵀ − X Gᵀ`.
pub fn skew_direction(x: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let gxt = g * x.transpose();
    &gxt - gxt.transpose()
}

/// One Cayley update `(I + τ/2·A)⁻¹ (I − τ/2·A) X`, solved by LU with partial
/// pivoting.
pub fn cayley_step(x: &OrthogonalMatrix, g: &DMatrix<f64>, tau: f64) -> Result<OrthogonalMatrix> {
    let xm = x.as_matrix();
    if g.shape() != xm.shape() {
        return Err(Error::DimensionMismatch {
            expected: xm.nrows(),
            found: g.nrows(),
        });
    }
    let a = skew_direction(xm, g);
    cayley_from_skew(xm, &a, tau)
}

fn cayley_from_skew(x: &DMatrix<f64>, a: &DMatrix<f64>, tau: f64) -> Result<OrthogonalMatrix> {
    let n = x.nrows();
    let half = a * (0.5 * tau);
    let lhs = DMatrix::<f64>::identity(n, n) + &half;
    let rhs = (DMatrix::<f64>::identity(n, n) - &half) * x;
    let next = lhs.lu().solve(&rhs).ok_or(Error::CayleySingular)?;
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::CayleySingular);
    }
    Ok(OrthogonalMatrix::new_unchecked(next))
}

/// Minimizes `objective` over orthogonal matrices starting from `x0`.
///
/// `gradient` must return the Euclidean gradient of `objective` (any term of
/// the form `X·S` with `S` symmetric may be dropped; it does not change `A`).
pub fn minimize_on_stiefel<F, G>(
    mut objective: F,
    mut gradient: G,
    x0: &OrthogonalMatrix,
    cfg: &OptimizerConfig,
) -> Result<StiefelSolution>
where
    F: FnMut(&DMatrix<f64>) -> Result<f64>,
    G: FnMut(&DMatrix<f64>) -> Result<DMatrix<f64>>,
{
    cfg.validate()?;
    let mut x = x0.clone();
    let mut f = finite(objective(x.as_matrix())?)?;
    let mut best = (x.clone(), f);
    let mut rows = Vec::with_capacity(cfg.max_iters.min(4096) + 1);
    rows.push(TraceRow {
        iteration: 0,
        objective: f,
        grad_norm: f64::NAN,
        step: 0.0,
    });
    let mut stop = StopReason::MaxIterations;

    for t in 0..cfg.max_iters {
        let g = gradient(x.as_matrix())?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::ObjectiveDiverged);
        }
        if g.shape() != x.as_matrix().shape() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: g.nrows(),
            });
        }
        let a = skew_direction(x.as_matrix(), &g);
        let grad_norm = a.norm();
        if t == 0 {
            rows[0].grad_norm = grad_norm;
        }
        if grad_norm == 0.0 {
            stop = StopReason::Stationary;
            break;
        }

        let mut step = cfg.tau;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            match cayley_from_skew(x.as_matrix(), &a, step) {
                Ok(candidate) => {
                    let fc = finite(objective(candidate.as_matrix())?)?;
                    let required = cfg.sufficient_decrease * step * 0.5 * grad_norm * grad_norm;
                    if !cfg.backtracking || fc <= f - required {
                        accepted = Some((candidate, fc));
                        break;
                    }
                }
                // the system only gets better conditioned as τ shrinks
                Err(Error::CayleySingular) if cfg.backtracking => {}
                Err(e) => return Err(e),
            }
            step *= cfg.backtrack_factor;
        }

        let Some((next, f_next)) = accepted else {
            stop = StopReason::BacktrackingExhausted;
            break;
        };
        let delta = f - f_next;
        x = next;
        f = f_next;
        rows.push(TraceRow {
            iteration: t + 1,
            objective: f,
            grad_norm,
            step,
        });
        if f < best.1 {
            best = (x.clone(), f);
        }
        if delta.abs() < cfg.f_tol {
            stop = StopReason::ObjectiveTolerance;
            break;
        }
    }

    Ok(StiefelSolution {
        x: best.0,
        objective: best.1,
        trace: OptTrace {
            iterations: rows,
            stop,
        },
    })
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::ObjectiveDiverged)
    }
}
