//! Plane-instance clustering: the pairwise objective and its gradient, a
//! per-scene soft-assignment optimizer, label extraction, normal estimation
//! and a sequential RANSAC baseline.

mod labels;
mod normals;
mod objective;
mod optimize;
mod ransac;

pub use labels::{extract_labels, remap_compact, split_components};
pub use normals::{estimate_normals, estimate_normals_from, OrientationHint};
pub use objective::{
    loss, loss_gradient, loss_gradient_with, loss_with, pair_term, LossTerms, PairMatrix,
    Regularizer,
};
pub use optimize::{optimize_assignment, optimize_with_pairs, Init};
pub use ransac::{ransac_fit, ransac_planes, RansacParams};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row-stochastic soft assignment over `k` plane instances plus a reject class
/// (the last column).
#[derive(Debug, Clone, PartialEq)]
pub struct SoftAssignment {
    k: usize,
    logits: DMatrix<f64>,
    probs: DMatrix<f64>,
}

impl SoftAssignment {
    pub fn from_logits(logits: DMatrix<f64>, k: usize) -> Result<Self> {
        if k == 0 || logits.ncols() != k + 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} logit columns, got {}",
                k + 1,
                logits.ncols()
            )));
        }
        let mut probs = logits.clone();
        for mut row in probs.row_iter_mut() {
            let m = row.max();
            row.apply(|z| *z = (*z - m).exp());
            let s = row.sum();
            row /= s;
        }
        Ok(Self { k, logits, probs })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.logits.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.nrows() == 0
    }

    pub fn logits(&self) -> &DMatrix<f64> {
        &self.logits
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }
}

/// Optimizer and label-extraction parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    pub k: usize,
    pub beta: f64,
    pub lr: f64,
    pub iters: usize,
    pub seed: u64,
    pub min_cluster_points: usize,
    pub regularizer: Regularizer,
    pub init: Init,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            k: 12,
            beta: 1.0,
            lr: 0.05,
            iters: 400,
            seed: 0,
            min_cluster_points: 20,
            regularizer: Regularizer::AnyPlane,
            init: Init::default(),
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidParameter("beta must be >= 0".into()));
        }
        if !(self.lr > 0.0) {
            return Err(Error::InvalidParameter("lr must be > 0".into()));
        }
        if self.iters < 1 {
            return Err(Error::InvalidParameter("iters must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_stochastic() {
        let z = DMatrix::from_row_slice(2, 3, &[1000.0, 0.0, -3.0, 0.1, 0.2, 0.3]);
        let a = SoftAssignment::from_logits(z, 2).unwrap();
        for row in a.probs().row_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
        assert!(SoftAssignment::from_logits(DMatrix::zeros(2, 3), 3).is_err());
    }
}
