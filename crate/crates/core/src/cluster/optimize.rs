use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::objective::{loss_gradient_with, PairMatrix};
use super::{ClusterParams, SoftAssignment};
use crate::error::{Error, Result};
use crate::types::PointCloud;

/// Logit initialization: a Gaussian bias per column shared by every point,
/// plus a small independent Gaussian per entry. The shared bias makes all
/// points start out preferring the same column, so a plane is only split
/// when the objective pushes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Init {
    pub column_sigma: f64,
    pub point_sigma: f64,
}

impl Default for Init {
    fn default() -> Self {
        Self {
            column_sigma: 0.1,
            point_sigma: 0.001,
        }
    }
}

const ADAM_B1: f64 = 0.9;
const ADAM_B2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

fn initial_logits(n: usize, k: usize, init: &Init, seed: u64) -> Result<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let col = Normal::new(0.0, init.column_sigma)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let pt = Normal::new(0.0, init.point_sigma)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let bias: Vec<f64> = (0..=k).map(|_| col.sample(&mut rng)).collect();
    // Row-major draw order: point 0 columns 0..=k, then point 1, ...
    let mut z = DMatrix::zeros(n, k + 1);
    for i in 0..n {
        for a in 0..=k {
            z[(i, a)] = bias[a] + pt.sample(&mut rng);
        }
    }
    Ok(z)
}

/// Minimizes the clustering objective over per-point logits with Adam.
pub fn optimize_assignment(cloud: &PointCloud, params: &ClusterParams) -> Result<SoftAssignment> {
    if cloud.normals.is_none() {
        return Err(Error::MissingNormals);
    }
    if cloud.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: cloud.len(),
        });
    }
    let pairs = PairMatrix::new(cloud)?;
    optimize_with_pairs(&pairs, params)
}

/// As [`optimize_assignment`] with a precomputed pair matrix.
pub fn optimize_with_pairs(pairs: &PairMatrix, params: &ClusterParams) -> Result<SoftAssignment> {
    params.validate()?;
    let (n, k) = (pairs.len(), params.k);
    let mut z = initial_logits(n, k, &params.init, params.seed)?;
    let mut m = DMatrix::<f64>::zeros(n, k + 1);
    let mut v = DMatrix::<f64>::zeros(n, k + 1);
    let (mut b1t, mut b2t) = (1.0, 1.0);
    for _ in 0..params.iters {
        let assign = SoftAssignment::from_logits(z.clone(), k)?;
        let g = loss_gradient_with(pairs, &assign, params.beta, params.regularizer)?;
        b1t *= ADAM_B1;
        b2t *= ADAM_B2;
        for ((zi, mi), (vi, gi)) in z
            .iter_mut()
            .zip(m.iter_mut())
            .zip(v.iter_mut().zip(g.iter()))
        {
            *mi = ADAM_B1 * *mi + (1.0 - ADAM_B1) * gi;
            *vi = ADAM_B2 * *vi + (1.0 - ADAM_B2) * gi * gi;
            let mhat = *mi / (1.0 - b1t);
            let vhat = *vi / (1.0 - b2t);
            *zi -= params.lr * mhat / (vhat.sqrt() + ADAM_EPS);
        }
    }
    SoftAssignment::from_logits(z, k)
}
