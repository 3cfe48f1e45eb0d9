//! Point-cloud conditioning: voxel fusion, XY Delaunay triangulation,
//! α-shape contours, distance-to-contour culling and fixed-size subsampling.

mod alpha;
mod triangulation;

pub use alpha::{alpha_contour, alpha_contour_with_step, surviving_triangles, Contour, CONTOUR_STEP};
pub use triangulation::{circumcenter, circumradius, delaunay, Triangulation};

use std::collections::HashMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom2d::point_segment_distance;
use crate::types::{PointCloud, Vec2, Vec3};

pub const DEFAULT_VOXEL: f64 = 0.02;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_D_CULL: f64 = 0.5;
pub const DEFAULT_N_POINTS: usize = 1280;

/// One centroid per occupied voxel, in order of first occupancy. Labels and
/// normals are dropped.
pub fn voxel_fuse(cloud: &PointCloud, voxel: f64) -> Result<PointCloud> {
    if !(voxel > 0.0) {
        return Err(Error::InvalidParameter("voxel must be positive".into()));
    }
    let mut slot: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut sums: Vec<(Vec3, usize)> = Vec::new();
    for p in &cloud.points {
        let key = (
            (p.x / voxel).floor() as i64,
            (p.y / voxel).floor() as i64,
            (p.z / voxel).floor() as i64,
        );
        let i = *slot.entry(key).or_insert_with(|| {
            sums.push((Vec3::zeros(), 0));
            sums.len() - 1
        });
        sums[i].0 += p;
        sums[i].1 += 1;
    }
    Ok(PointCloud::new(
        sums.into_iter().map(|(s, n)| s / n as f64).collect(),
    ))
}

/// Uniform-grid index over short contour segments.
pub struct ContourIndex {
    cell: f64,
    segments: Vec<(Vec2, Vec2)>,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl ContourIndex {
    pub fn new(contour: &Contour, cell: f64) -> Self {
        let mut segments = contour.segments.clone();
        if segments.is_empty() {
            segments = contour.densified.iter().map(|p| (*p, *p)).collect();
        }
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, (a, b)) in segments.iter().enumerate() {
            let lo = a.inf(b);
            let hi = a.sup(b);
            let (x0, y0) = ((lo.x / cell).floor() as i64, (lo.y / cell).floor() as i64);
            let (x1, y1) = ((hi.x / cell).floor() as i64, (hi.y / cell).floor() as i64);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    buckets.entry((x, y)).or_default().push(i);
                }
            }
        }
        Self {
            cell,
            segments,
            buckets,
        }
    }

    /// Distance to the nearest segment if it is at most `radius`.
    pub fn distance_within(&self, p: &Vec2, radius: f64) -> Option<f64> {
        let r = (radius / self.cell).ceil() as i64;
        let (cx, cy) = ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64);
        let mut best = f64::INFINITY;
        for dx in -r..=r {
            for dy in -r..=r {
                if let Some(b) = self.buckets.get(&(cx + dx, cy + dy)) {
                    for &i in b {
                        let (a, q) = &self.segments[i];
                        best = best.min(point_segment_distance(p, a, q));
                    }
                }
            }
        }
        (best <= radius).then_some(best)
    }
}

/// Brute-force distance to the contour; test oracle for [`ContourIndex`].
pub fn contour_distance_brute(contour: &Contour, p: &Vec2) -> f64 {
    if contour.segments.is_empty() {
        return contour
            .densified
            .iter()
            .map(|q| (q - p).norm())
            .fold(f64::INFINITY, f64::min);
    }
    contour
        .segments
        .iter()
        .map(|(a, b)| point_segment_distance(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Keeps points whose XY distance to the contour is at most `d_cull`.
pub fn cull_to_contour(cloud: &PointCloud, contour: &Contour, d_cull: f64) -> Result<PointCloud> {
    if !(d_cull > 0.0) {
        return Err(Error::InvalidParameter("d_cull must be positive".into()));
    }
    let index = ContourIndex::new(contour, (d_cull / 2.0).max(CONTOUR_STEP));
    let keep: Vec<bool> = cloud
        .points
        .par_iter()
        .map(|p| index.distance_within(&p.xy(), d_cull).is_some())
        .collect();
    Ok(cloud.retain_by(|i, _| keep[i]))
}

/// Exactly `n` points: without replacement when the cloud is large enough,
/// with replacement otherwise.
pub fn subsample(cloud: &PointCloud, n: usize, seed: u64) -> Result<PointCloud> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx: Vec<usize> = if cloud.len() >= n {
        index::sample(&mut rng, cloud.len(), n).into_vec()
    } else {
        (0..n).map(|_| rng.random_range(0..cloud.len())).collect()
    };
    Ok(cloud.select(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square_contour() -> Contour {
        let square = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 4.0),
            Vec2::new(4.0, 4.0),
            Vec2::new(4.0, 0.0),
        ];
        let mut c = Contour {
            polylines: vec![square.clone()],
            ..Contour::default()
        };
        for k in 0..4 {
            let (a, b) = (square[k], square[(k + 1) % 4]);
            for j in 0..80 {
                let p = a + (b - a) * (j as f64 / 80.0);
                let q = a + (b - a) * ((j + 1) as f64 / 80.0);
                c.densified.push(p);
                c.segments.push((p, q));
            }
        }
        c
    }

    #[test]
    fn voxel_examples() {
        let two = PointCloud::new(vec![Vec3::new(0.1, 0.1, 0.1); 2]);
        assert_eq!(voxel_fuse(&two, 0.02).unwrap().len(), 1);
        let pair = PointCloud::new(vec![Vec3::zeros(), Vec3::new(0.005, 0.0, 0.0)]);
        let f = voxel_fuse(&pair, 0.02).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f.points[0] - Vec3::new(0.0025, 0.0, 0.0)).norm() < 1e-15);
        assert!(voxel_fuse(&PointCloud::default(), 0.02).unwrap().is_empty());
    }

    #[test]
    fn cull_examples() {
        let c = square_contour();
        let cloud = PointCloud::new(vec![Vec3::new(0.0, 2.0, 1.0), Vec3::new(1.0, 2.0, 1.0)]);
        let out = cull_to_contour(&cloud, &c, 0.5).unwrap();
        assert_eq!(out.points, vec![Vec3::new(0.0, 2.0, 1.0)]);
    }

    #[test]
    fn index_matches_brute_force() {
        use rand::Rng;
        let c = square_contour();
        let idx = ContourIndex::new(&c, 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = Vec2::new(rng.random_range(-1.0..5.0), rng.random_range(-1.0..5.0));
            let brute = contour_distance_brute(&c, &p);
            match idx.distance_within(&p, 0.5) {
                Some(d) => assert!((d - brute).abs() < 1e-9),
                None => assert!(brute > 0.5),
            }
        }
    }

    #[test]
    fn subsample_examples() {
        let cloud = PointCloud::new((0..5000).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect());
        let s = subsample(&cloud, 1280, 7).unwrap();
        assert_eq!(s.len(), 1280);
        assert_eq!(s, subsample(&cloud, 1280, 7).unwrap());
        let mut xs: Vec<i64> = s.points.iter().map(|p| p.x as i64).collect();
        xs.sort_unstable();
        xs.dedup();
        assert_eq!(xs.len(), 1280);

        let small = PointCloud::new((0..10).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect());
        let perm = subsample(&small, 10, 3).unwrap();
        let mut xs: Vec<i64> = perm.points.iter().map(|p| p.x as i64).collect();
        xs.sort_unstable();
        assert_eq!(xs, (0..10).collect::<Vec<_>>());
        assert_eq!(subsample(&small, 25, 3).unwrap().len(), 25);
        assert_eq!(subsample(&PointCloud::default(), 5, 0), Err(Error::EmptyCloud));
    }

    proptest! {
        #[test]
        fn cull_is_idempotent(pts in prop::collection::vec((-1.0f64..5.0, -1.0f64..5.0), 1..200)) {
            let c = square_contour();
            let cloud = PointCloud::new(pts.iter().map(|&(x, y)| Vec3::new(x, y, 0.0)).collect());
            let once = cull_to_contour(&cloud, &c, 0.5).unwrap();
            let twice = cull_to_contour(&once, &c, 0.5).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn voxel_output_near_input(pts in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..100)) {
            let cloud = PointCloud::new(pts.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect());
            let f = voxel_fuse(&cloud, 0.1).unwrap();
            prop_assert!(f.len() <= cloud.len());
            for q in &f.points {
                let d = cloud.points.iter().map(|p| (p - q).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(d <= 0.1 * 3f64.sqrt() / 2.0 + 1e-12);
            }
        }
    }
}
