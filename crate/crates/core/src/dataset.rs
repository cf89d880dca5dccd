use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A real-valued sample matrix, one instance per row, with optional
/// integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
    labels: Option<Vec<i64>>,
}

impl Dataset {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite entry"));
        }
        Ok(Dataset {
            values,
            labels: None,
        })
    }

    pub fn with_labels(values: DMatrix<f64>, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != values.nrows() {
            return Err(Error::DimensionMismatch {
                expected: values.nrows(),
                found: labels.len(),
            });
        }
        let mut ds = Dataset::new(values)?;
        ds.labels = Some(labels);
        Ok(ds)
    }

    /// Builds a dataset from row-major data.
    pub fn from_row_slice(nrows: usize, ncols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::DimensionMismatch {
                expected: nrows * ncols,
                found: data.len(),
            });
        }
        Dataset::new(DMatrix::from_row_slice(nrows, ncols, data))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    /// Returns a copy with the labels replaced (or removed).
    pub fn relabeled(&self, labels: Option<Vec<i64>>) -> Result<Self> {
        match labels {
            Some(l) => Dataset::with_labels(self.values.clone(), l),
            None => Ok(Dataset {
                values: self.values.clone(),
                labels: None,
            }),
        }
    }

    /// Rows at `indices`, in the given order, labels carried along.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let n = self.nrows();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad,
            });
        }
        let values = self.values.select_rows(indices.iter());
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Ok(Dataset { values, labels })
    }

    pub fn into_parts(self) -> (DMatrix<f64>, Option<Vec<i64>>) {
        (self.values, self.labels)
    }

    /// Wraps a matrix produced by a computation that preserves finiteness of
    /// finite inputs.
    pub(crate) fn from_parts_unchecked(values: DMatrix<f64>, labels: Option<Vec<i64>>) -> Self {
        debug_assert!(labels.as_ref().is_none_or(|l| l.len() == values.nrows()));
        Dataset { values, labels }
    }
}
