use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spatial::Grid3;
use crate::types::{PointCloud, UnitVec3, Vec3};

/// Where normals should point.
#[derive(Debug, Clone, PartialEq)]
pub enum OrientationHint {
    /// Toward the cloud centroid.
    Centroid,
    /// Toward a fixed viewpoint.
    Point(Vec3),
    /// Toward a per-point viewpoint.
    PerPoint(Vec<Vec3>),
}

/// PCA normals over the `k_nn` nearest neighbors (the point included),
/// flipped so that `normal · (hint − p) > 0`.
pub fn estimate_normals(cloud: &PointCloud, k_nn: usize, hint: &OrientationHint) -> Result<PointCloud> {
    estimate_normals_from(cloud, cloud, k_nn, hint)
}

/// Normals for `queries` with neighborhoods drawn from `reference`, e.g. a
/// subsample estimated against the dense cloud it came from. The centroid
/// hint uses the reference centroid.
pub fn estimate_normals_from(
    reference: &PointCloud,
    queries: &PointCloud,
    k_nn: usize,
    hint: &OrientationHint,
) -> Result<PointCloud> {
    let n = reference.len();
    if k_nn < 3 || n <= k_nn {
        return Err(Error::TooFewPoints { needed: k_nn + 1, got: n });
    }
    if let OrientationHint::PerPoint(h) = hint {
        if h.len() != queries.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} hints for {} points",
                h.len(),
                queries.len()
            )));
        }
    }
    let centroid = reference.centroid().ok_or(Error::EmptyCloud)?;
    let pts = &reference.points;
    let grid = Grid3::new(pts, Grid3::auto_cell(pts, k_nn as f64 / 2.0));
    let normals: Vec<UnitVec3> = queries
        .points
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let nb = grid.knn(q, k_nn);
            let mean: Vec3 = nb.iter().map(|&j| pts[j]).sum::<Vec3>() / nb.len() as f64;
            let mut cov = Matrix3::zeros();
            for &j in &nb {
                let d = pts[j] - mean;
                cov += d * d.transpose();
            }
            let eig = SymmetricEigen::new(cov);
            let (imin, _) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .unwrap();
            let mut normal: Vec3 = eig.eigenvectors.column(imin).into_owned();
            let target = match hint {
                OrientationHint::Centroid => centroid,
                OrientationHint::Point(p) => *p,
                OrientationHint::PerPoint(h) => h[i],
            };
            if normal.dot(&(target - q)) < 0.0 {
                normal = -normal;
            }
            UnitVec3::new_normalize(normal)
        })
        .collect();
    queries.clone().with_normals(normals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{generate_scene, ShapeClass, SynthConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn planar_cloud_normals_point_at_hint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<Vec3> = (0..100)
            .map(|_| Vec3::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), 0.0))
            .collect();
        let cloud = PointCloud::new(pts);
        let out = estimate_normals(&cloud, 8, &OrientationHint::Point(Vec3::new(0.5, 0.5, -3.0))).unwrap();
        for n in out.normals.unwrap() {
            assert!((n.into_inner() - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-9);
        }
        assert!(estimate_normals(&cloud.select(&[0, 1, 2]), 8, &OrientationHint::Centroid).is_err());
    }

    #[test]
    fn rectangle_normals_match_ground_truth() {
        let cfg = SynthConfig {
            noise_sigma: 0.01,
            hole_count_range: (0, 0),
            shape: Some(ShapeClass::Rectangle),
            seed: 4,
            ..SynthConfig::default()
        };
        let scene = generate_scene(&cfg).unwrap();
        let gt = scene.cloud.normals.clone().unwrap();
        let bare = PointCloud::new(scene.cloud.points.clone());
        let est = estimate_normals(&bare, 32, &OrientationHint::Centroid).unwrap();
        let ok: Vec<bool> = est
            .normals
            .unwrap()
            .iter()
            .zip(&gt)
            .map(|(a, b)| a.dot(b) > 5f64.to_radians().cos())
            .collect();
        // Neighborhoods within ~0.32 m of a corner straddle two walls; away
        // from corners the estimate must be near exact.
        let corners = &scene.skeleton.corners;
        let interior: Vec<bool> = scene
            .cloud
            .points
            .iter()
            .map(|p| corners.iter().all(|c| (p.xy() - c).norm() > 0.4))
            .collect();
        let n_int = interior.iter().filter(|&&b| b).count();
        let good_int = ok.iter().zip(&interior).filter(|(&o, &i)| o && i).count();
        assert!(good_int as f64 >= 0.99 * n_int as f64, "{good_int} of {n_int}");
        let good = ok.iter().filter(|&&o| o).count();
        assert!(good as f64 >= 0.85 * ok.len() as f64, "{good} of {}", ok.len());
    }

    #[test]
    fn opposing_walls_are_anti_parallel() {
        let mut pts = Vec::new();
        for i in 0..20 {
            for j in 0..5 {
                pts.push(Vec3::new(0.0, i as f64 * 0.1, j as f64 * 0.1));
                pts.push(Vec3::new(4.0, i as f64 * 0.1, j as f64 * 0.1));
            }
        }
        let est = estimate_normals(&PointCloud::new(pts), 8, &OrientationHint::Centroid).unwrap();
        let ns = est.normals.unwrap();
        for k in 0..100 {
            assert!(ns[2 * k].dot(&ns[2 * k + 1]) < -0.9);
        }
    }
}
