//! MMD² over the two one-parameter families of 2×2 orthogonal matrices.

use std::f64::consts::PI;
use std::fmt;

use mmdalign_core::{reflection_2d, rotation_2d, AlignmentObjective, Dataset, KernelConfig, OrthogonalMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const DEFAULT_GRID: usize = 360;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rotation,
    Reflection,
}

impl Family {
    pub fn matrix(self, alpha: f64) -> OrthogonalMatrix {
        match self {
            Family::Rotation => rotation_2d(alpha),
            Family::Reflection => reflection_2d(alpha),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Rotation => "rotation",
            Family::Reflection => "reflection",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: Family,
    pub alpha: f64,
    pub mmd2: f64,
}

/// `α_k = 2πk / grid` for `k < grid`.
pub fn alpha_grid(grid: usize) -> Vec<f64> {
    (0..grid).map(|k| 2.0 * PI * k as f64 / grid as f64).collect()
}

/// MMD²(Z_A, Z'_B·Q(α)) for every grid angle, rotations first.
pub fn angle_sweep(z_a: &Dataset, z_b_prime: &Dataset, grid: usize, kcfg: &KernelConfig) -> Result<Vec<SweepRow>> {
    if z_a.ncols() != 2 || z_b_prime.ncols() != 2 {
        return Err(AppError::Data(format!(
            "angle sweep needs 2-dimensional data, got {} and {}",
            z_a.ncols(),
            z_b_prime.ncols()
        )));
    }
    if grid == 0 {
        return Err(AppError::Usage("grid size must be positive".into()));
    }
    let obj = AlignmentObjective::new(z_a.values().clone(), z_b_prime.values().clone(), *kcfg)?;
    let alphas = alpha_grid(grid);
    let mut rows = Vec::with_capacity(2 * grid);
    for family in [Family::Rotation, Family::Reflection] {
        for &alpha in &alphas {
            let mmd2 = obj.value(family.matrix(alpha).as_matrix())?;
            rows.push(SweepRow { family, alpha, mmd2 });
        }
    }
    Ok(rows)
}

/// Grid points strictly below both cyclic neighbours within their family.
pub fn local_minima(rows: &[SweepRow]) -> Vec<SweepRow> {
    let mut out = Vec::new();
    for family in [Family::Rotation, Family::Reflection] {
        let f: Vec<&SweepRow> = rows.iter().filter(|r| r.family == family).collect();
        let n = f.len();
        if n < 3 {
            continue;
        }
        for i in 0..n {
            let prev = f[(i + n - 1) % n].mmd2;
            let next = f[(i + 1) % n].mmd2;
            if f[i].mmd2 < prev && f[i].mmd2 < next {
                out.push(*f[i]);
            }
        }
    }
    out
}

/// Lowest row over both families; ties go to the earlier row.
pub fn global_minimum(rows: &[SweepRow]) -> Option<SweepRow> {
    rows.iter().copied().reduce(|best, r| if r.mmd2 < best.mmd2 { r } else { best })
}
