use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::{Label, PointCloud, Vec3, NOISE};

#[derive(Debug, Clone, PartialEq)]
pub struct RansacParams {
    pub inlier_tol: f64,
    pub min_inliers: usize,
    pub max_planes: usize,
    /// Hypotheses drawn per extracted plane.
    pub iterations: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            inlier_tol: 0.08,
            min_inliers: 40,
            max_planes: 12,
            iterations: 500,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy)]
struct Plane {
    normal: Vec3,
    offset: f64,
}

impl Plane {
    fn through(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<Self> {
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len < 1e-12 {
            return None;
        }
        let normal = n / len;
        Some(Self {
            normal,
            offset: normal.dot(a),
        })
    }

    fn fit(points: &[Vec3]) -> Option<Self> {
        let mean: Vec3 = points.iter().sum::<Vec3>() / points.len() as f64;
        let mut cov = Matrix3::zeros();
        for p in points {
            let d = p - mean;
            cov += d * d.transpose();
        }
        let eig = SymmetricEigen::new(cov);
        let (i, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))?;
        let normal: Vec3 = eig.eigenvectors.column(i).into_owned();
        Some(Self {
            offset: normal.dot(&mean),
            normal,
        })
    }

    fn residual(&self, p: &Vec3) -> f64 {
        (self.normal.dot(p) - self.offset).abs()
    }
}

/// Sequential RANSAC. Each round keeps the 3-point hypothesis with the most
/// inliers (first found on ties), refits it by least squares and claims the
/// refit's inliers. Stops when the best support drops below `min_inliers` or
/// after `max_planes` planes; the rest is [`NOISE`].
pub fn ransac_planes(cloud: &PointCloud, params: &RansacParams) -> Vec<Label> {
    ransac_fit(cloud, params).0
}

/// Labels plus each claimed plane as `(unit normal, offset)`.
pub fn ransac_fit(cloud: &PointCloud, params: &RansacParams) -> (Vec<Label>, Vec<(Vec3, f64)>) {
    let pts = &cloud.points;
    let mut labels = vec![NOISE; pts.len()];
    let mut planes = Vec::new();
    if pts.len() < 3 {
        return (labels, planes);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut remaining: Vec<usize> = (0..pts.len()).collect();
    for plane_id in 0..params.max_planes {
        if remaining.len() < params.min_inliers.max(3) {
            break;
        }
        let mut best: Option<(usize, Plane)> = None;
        for _ in 0..params.iterations {
            let i = remaining[rng.random_range(0..remaining.len())];
            let j = remaining[rng.random_range(0..remaining.len())];
            let k = remaining[rng.random_range(0..remaining.len())];
            let Some(plane) = Plane::through(&pts[i], &pts[j], &pts[k]) else {
                continue;
            };
            let count = remaining
                .iter()
                .filter(|&&r| plane.residual(&pts[r]) <= params.inlier_tol)
                .count();
            if best.as_ref().is_none_or(|(c, _)| count > *c) {
                best = Some((count, plane));
            }
        }
        let Some((count, plane)) = best else { break };
        if count < params.min_inliers {
            break;
        }
        let inliers: Vec<Vec3> = remaining
            .iter()
            .filter(|&&r| plane.residual(&pts[r]) <= params.inlier_tol)
            .map(|&r| pts[r])
            .collect();
        let refit = Plane::fit(&inliers).unwrap_or(plane);
        let mut claimed: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&r| refit.residual(&pts[r]) <= params.inlier_tol)
            .collect();
        let mut used = refit;
        if claimed.len() < params.min_inliers {
            // The refit drifted; fall back to the sampled plane's inliers.
            claimed = remaining
                .iter()
                .copied()
                .filter(|&r| plane.residual(&pts[r]) <= params.inlier_tol)
                .collect();
            used = plane;
        }
        planes.push((used.normal, used.offset));
        for &c in &claimed {
            labels[c] = plane_id as Label;
        }
        remaining.retain(|r| labels[*r] == NOISE);
    }
    (labels, planes)
}
