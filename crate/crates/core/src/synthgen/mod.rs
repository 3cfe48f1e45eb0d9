//! Synthetic labeled wall point clouds with known room perimeters.
//!
//! Rooms are extruded rectilinear skeletons (rectangle, L, T, U) under a
//! random global rotation. Walls are sampled uniformly at a fixed areal density,
//! perturbed by Gaussian noise and then punched with vertical cylindrical holes.
//!
//! Draw order from the scene RNG (ChaCha8 seeded with `SynthConfig::seed`):
//!
//! 1. per skeleton attempt: shape class (if not forced), the shape's edge
//!    lengths in the order they appear in `build_corners`, the global rotation,
//!    the room height, then corner jitter when `rectilinear` is off;
//! 2. per wall, in corner order: the point count (Poisson), then for each
//!    point `t`, `z` and three noise components;
//! 3. hole count, then per hole: wall pick (by area), position along the wall,
//!    radius.
//!
//! Ports that follow this order reproduce the same distributions; bit-exact
//! agreement additionally needs the same generator.

mod render;

pub use render::{camera_trajectory, render_frame, render_sequence, RenderOptions};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::geom2d::{is_simple_polygon, signed_area};
use crate::types::{Label, PointCloud, UnitVec3, Vec2, Vec3};

/// Room shape families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeClass {
    Rectangle,
    L,
    T,
    U,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 4] = [Self::Rectangle, Self::L, Self::T, Self::U];

    pub fn corner_count(self) -> usize {
        match self {
            Self::Rectangle => 4,
            Self::L => 6,
            Self::T | Self::U => 8,
        }
    }

    /// Number of independent edge lengths drawn for the shape.
    fn param_count(self) -> usize {
        match self {
            Self::Rectangle => 2,
            Self::L => 4,
            Self::T | Self::U => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Rectangle => "rectangle",
            Self::L => "l",
            Self::T => "t",
            Self::U => "u",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rectangle" | "rect" | "r" => Some(Self::Rectangle),
            "l" => Some(Self::L),
            "t" => Some(Self::T),
            "u" => Some(Self::U),
            _ => None,
        }
    }
}

/// Closed CCW room outline extruded to `height`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomSkeleton {
    pub shape_class: ShapeClass,
    pub corners: Vec<Vec2>,
    pub height: f64,
}

impl RoomSkeleton {
    pub fn wall_count(&self) -> usize {
        self.corners.len()
    }

    /// Wall `i` runs from corner `i` to corner `i + 1`.
    pub fn wall(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.corners.len();
        (self.corners[i], self.corners[(i + 1) % n])
    }

    /// Inward unit normal of wall `i` (left of the CCW edge direction).
    pub fn inward_normal(&self, i: usize) -> Vec2 {
        let (a, b) = self.wall(i);
        let d = (b - a).normalize();
        Vec2::new(-d.y, d.x)
    }

    pub fn perimeter_length(&self) -> f64 {
        (0..self.wall_count())
            .map(|i| {
                let (a, b) = self.wall(i);
                (b - a).norm()
            })
            .sum()
    }

    /// Checks simplicity, orientation and minimum edge length.
    pub fn validate(&self, min_edge: f64) -> Result<()> {
        if self.corners.len() < 3 {
            return Err(Error::GenerationFailure("fewer than 3 corners".into()));
        }
        if !is_simple_polygon(&self.corners) {
            return Err(Error::GenerationFailure("polygon is not simple".into()));
        }
        if signed_area(&self.corners) <= 0.0 {
            return Err(Error::GenerationFailure("polygon is not CCW".into()));
        }
        for i in 0..self.wall_count() {
            let (a, b) = self.wall(i);
            if (b - a).norm() <= min_edge {
                return Err(Error::GenerationFailure(format!("wall {i} too short")));
            }
        }
        Ok(())
    }

    /// Smallest perpendicular gap between two non-adjacent walls that are
    /// parallel within 1°. Infinite when no such pair exists.
    pub fn min_parallel_separation(&self) -> f64 {
        let n = self.wall_count();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let ni = self.inward_normal(i);
                let nj = self.inward_normal(j);
                let s = ni.x * nj.y - ni.y * nj.x;
                if s.abs() > crate::types::EPS_PARALLEL {
                    continue;
                }
                let (a, _) = self.wall(i);
                let (c, _) = self.wall(j);
                best = best.min(ni.dot(&(c - a)).abs());
            }
        }
        best
    }

    /// Shorter adjacent wall over all reflex corners. Infinite for convex
    /// rooms.
    pub fn min_reflex_leg(&self) -> f64 {
        let n = self.wall_count();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let prev = self.corners[(i + n - 1) % n];
            let cur = self.corners[i];
            let next = self.corners[(i + 1) % n];
            let (d0, d1) = (cur - prev, next - cur);
            if d0.x * d1.y - d0.y * d1.x < 0.0 {
                best = best.min(d0.norm()).min(d1.norm());
            }
        }
        best
    }

    /// Smallest gap between two parallel walls that face each other across
    /// the outside of the room, such as the slot of a U. Infinite when
    /// there is none.
    pub fn min_exterior_gap(&self) -> f64 {
        let n = self.wall_count();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = self.wall(i);
                let (c, d) = self.wall(j);
                let (ni, nj) = (self.inward_normal(i), self.inward_normal(j));
                if ni.x * nj.y - ni.y * nj.x > crate::types::EPS_PARALLEL || ni.dot(&nj) > 0.0 {
                    continue;
                }
                // Overlap of the two walls along their shared direction.
                let dir = (b - a).normalize();
                let (t0, t1): (f64, f64) = (0.0, dir.dot(&(b - a)));
                let (u0, u1) = (dir.dot(&(c - a)), dir.dot(&(d - a)));
                let lo = t0.min(t1).max(u0.min(u1));
                let hi = t0.max(t1).min(u0.max(u1));
                if hi <= lo {
                    continue;
                }
                let gap = ni.dot(&(c - a));
                // Facing across the outside: each wall lies behind the other.
                if gap >= 0.0 {
                    continue;
                }
                let mid = a + dir * (0.5 * (lo + hi)) + ni * (0.5 * gap);
                if !crate::geom2d::point_in_polygon(&mid, &self.corners) {
                    best = best.min(-gap);
                }
            }
        }
        best
    }

    /// Rotates all corners about the origin by `angle` radians.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            shape_class: self.shape_class,
            corners: self
                .corners
                .iter()
                .map(|p| Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y))
                .collect(),
            height: self.height,
        }
    }
}

/// Generator parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub edge_length_range: (f64, f64),
    pub height_range: (f64, f64),
    pub points_per_m2: f64,
    pub noise_sigma: f64,
    pub hole_count_range: (usize, usize),
    pub hole_radius_range: (f64, f64),
    pub seed: u64,
    /// Forces a shape class instead of drawing one uniformly.
    pub shape: Option<ShapeClass>,
    /// Apply a uniform global rotation in [0°, 90°).
    pub random_rotation: bool,
    /// When false, corners are jittered off the rectilinear grid.
    pub rectilinear: bool,
    /// Minimum gap between non-adjacent parallel walls, meters.
    pub min_wall_separation: f64,
    /// Minimum length of either wall at a reflex corner, meters. Shorter
    /// notches are bridged by the alpha contour at the default alpha.
    pub min_notch_leg: f64,
    /// Minimum width of a gap between walls facing across the outside.
    pub min_exterior_gap: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            edge_length_range: (2.0, 8.0),
            height_range: (2.3, 3.0),
            points_per_m2: 100.0,
            noise_sigma: 0.03,
            hole_count_range: (0, 4),
            hole_radius_range: (0.2, 0.6),
            seed: 0,
            shape: None,
            random_rotation: true,
            rectilinear: true,
            min_wall_separation: 1.0,
            min_notch_leg: 3.0,
            min_exterior_gap: 4.5,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("edge_length_range", self.edge_length_range),
            ("height_range", self.height_range),
            ("hole_radius_range", self.hole_radius_range),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter(format!("{name}: min must be <= max")));
            }
        }
        if self.hole_count_range.0 > self.hole_count_range.1 {
            return Err(Error::InvalidParameter("hole_count_range: min must be <= max".into()));
        }
        if self.edge_length_range.0 <= 0.5 {
            return Err(Error::InvalidParameter("edges must be longer than 0.5 m".into()));
        }
        if self.height_range.0 <= 0.0 {
            return Err(Error::InvalidParameter("height must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise_sigma must be >= 0".into()));
        }
        if !(self.points_per_m2 > 0.0) {
            return Err(Error::InvalidParameter("points_per_m2 must be > 0".into()));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        use rand::SeedableRng;
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Labeled cloud paired with the skeleton it was sampled from.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub cloud: PointCloud,
    pub skeleton: RoomSkeleton,
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Corner list for a shape from its edge-length parameters, CCW, unrotated.
pub fn build_corners(shape: ShapeClass, p: &[f64]) -> Vec<Vec2> {
    let v = Vec2::new;
    match shape {
        ShapeClass::Rectangle => {
            let (w, h) = (p[0], p[1]);
            vec![v(0.0, 0.0), v(w, 0.0), v(w, h), v(0.0, h)]
        }
        ShapeClass::L => {
            // Notch cut from the top-right corner.
            let (x1, x2, y1, y2) = (p[0], p[1], p[2], p[3]);
            let (w, h) = (x1 + x2, y1 + y2);
            vec![
                v(0.0, 0.0),
                v(w, 0.0),
                v(w, y1),
                v(x1, y1),
                v(x1, h),
                v(0.0, h),
            ]
        }
        ShapeClass::T => {
            // Stem of width `s` under a bar whose left/right undersides sit at
            // different heights so no two walls are coplanar.
            let (a, s, b, h_left, h_right, bar) = (p[0], p[1], p[2], p[3], p[4], p[5]);
            let top = h_left + bar;
            vec![
                v(a, 0.0),
                v(a + s, 0.0),
                v(a + s, h_right),
                v(a + s + b, h_right),
                v(a + s + b, top),
                v(0.0, top),
                v(0.0, h_left),
                v(a, h_left),
            ]
        }
        ShapeClass::U => {
            // Notch of width x2 opening upward; arms of unequal height.
            let (x1, x2, x3, depth, arm_left, arm_right) = (p[0], p[1], p[2], p[3], p[4], p[5]);
            let w = x1 + x2 + x3;
            vec![
                v(0.0, 0.0),
                v(w, 0.0),
                v(w, depth + arm_right),
                v(x1 + x2, depth + arm_right),
                v(x1 + x2, depth),
                v(x1, depth),
                v(x1, depth + arm_left),
                v(0.0, depth + arm_left),
            ]
        }
    }
}

/// Draws a room skeleton, resampling until it is simple, every wall is at
/// least the minimum edge length and parallel walls are well separated.
pub fn sample_skeleton(config: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<RoomSkeleton> {
    config.validate()?;
    let min_edge = config.edge_length_range.0.clamp(0.5, 2.0);
    for _ in 0..1000 {
        let shape = match config.shape {
            Some(s) => s,
            None => ShapeClass::ALL[rng.random_range(0..4)],
        };
        let params: Vec<f64> = (0..shape.param_count())
            .map(|_| uniform(rng, config.edge_length_range))
            .collect();
        let rotation = if config.random_rotation {
            rng.random_range(0.0..std::f64::consts::FRAC_PI_2)
        } else {
            0.0
        };
        let height = uniform(rng, config.height_range);
        let mut skeleton = RoomSkeleton {
            shape_class: shape,
            corners: build_corners(shape, &params),
            height,
        };
        if !config.rectilinear {
            let jitter = 0.15 * config.edge_length_range.0;
            for c in skeleton.corners.iter_mut() {
                c.x += rng.random_range(-jitter..=jitter);
                c.y += rng.random_range(-jitter..=jitter);
            }
        }
        let skeleton = skeleton.rotated(rotation);
        if skeleton.validate(min_edge).is_err() {
            continue;
        }
        if skeleton.min_parallel_separation() < config.min_wall_separation
            || skeleton.min_reflex_leg() < config.min_notch_leg
            || skeleton.min_exterior_gap() < config.min_exterior_gap
        {
            continue;
        }
        return Ok(skeleton);
    }
    Err(Error::GenerationFailure(
        "no valid skeleton after 1000 attempts".into(),
    ))
}

fn truncated_normal(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= 5.0 {
            return z * sigma;
        }
    }
}

/// Samples every wall rectangle at the configured density. Noise is
/// isotropic Gaussian truncated at 5σ; normals are the unperturbed inward
/// wall normals; labels are wall indices.
pub fn rasterize_walls(
    skeleton: &RoomSkeleton,
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SynthScene> {
    config.validate()?;
    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    for i in 0..skeleton.wall_count() {
        let (a, b) = skeleton.wall(i);
        let len = (b - a).norm();
        let mean = len * skeleton.height * config.points_per_m2;
        let count = if mean > 0.0 {
            Poisson::new(mean)
                .map_err(|e| Error::GenerationFailure(e.to_string()))?
                .sample(rng) as usize
        } else {
            0
        };
        let n2 = skeleton.inward_normal(i);
        let normal = UnitVec3::new_normalize(Vec3::new(n2.x, n2.y, 0.0));
        for _ in 0..count {
            let t: f64 = rng.random();
            let z = rng.random::<f64>() * skeleton.height;
            let xy = a + (b - a) * t;
            let noise = Vec3::new(
                truncated_normal(rng, config.noise_sigma),
                truncated_normal(rng, config.noise_sigma),
                truncated_normal(rng, config.noise_sigma),
            );
            points.push(Vec3::new(xy.x, xy.y, z) + noise);
            normals.push(normal);
            labels.push(i as Label);
        }
    }
    let cloud = PointCloud::new(points)
        .with_normals(normals)?
        .with_labels(labels)?;
    Ok(SynthScene {
        cloud,
        skeleton: skeleton.clone(),
    })
}

/// Vertical cylinder of infinite height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub center: Vec2,
    pub radius: f64,
}

/// Removes points whose XY distance to any cylinder axis is below its radius.
pub fn carve_cylinders(scene: &SynthScene, cylinders: &[Cylinder]) -> SynthScene {
    let cloud = scene.cloud.retain_by(|_, p| {
        let xy = p.xy();
        cylinders.iter().all(|c| (xy - c.center).norm() >= c.radius)
    });
    SynthScene {
        cloud,
        skeleton: scene.skeleton.clone(),
    }
}

/// Draws the hole cylinders: count uniform in the range, centers uniform over
/// the wall surface area, radii uniform.
pub fn sample_holes(
    skeleton: &RoomSkeleton,
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<Cylinder> {
    let (lo, hi) = config.hole_count_range;
    let count = rng.random_range(lo..=hi);
    let lengths: Vec<f64> = (0..skeleton.wall_count())
        .map(|i| {
            let (a, b) = skeleton.wall(i);
            (b - a).norm()
        })
        .collect();
    let total: f64 = lengths.iter().sum();
    (0..count)
        .map(|_| {
            // Walls share a height, so area is proportional to length.
            let mut pick = rng.random::<f64>() * total;
            let mut wall = lengths.len() - 1;
            for (i, l) in lengths.iter().enumerate() {
                if pick < *l {
                    wall = i;
                    break;
                }
                pick -= l;
            }
            let (a, b) = skeleton.wall(wall);
            let t: f64 = rng.random();
            let radius = uniform(rng, config.hole_radius_range);
            Cylinder {
                center: a + (b - a) * t,
                radius,
            }
        })
        .collect()
}

pub fn punch_holes(
    scene: &SynthScene,
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SynthScene> {
    if scene.cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let holes = sample_holes(&scene.skeleton, config, rng);
    Ok(carve_cylinders(scene, &holes))
}

/// Skeleton, walls and holes from one seeded stream.
pub fn generate_scene(config: &SynthConfig) -> Result<SynthScene> {
    let mut rng = config.rng();
    let skeleton = sample_skeleton(config, &mut rng)?;
    let scene = rasterize_walls(&skeleton, config, &mut rng)?;
    if config.hole_count_range.1 == 0 || scene.cloud.is_empty() {
        return Ok(scene);
    }
    punch_holes(&scene, config, &mut rng)
}

/// Adds a free-standing partition parallel to one of the walls, set back
/// `setback` meters into the room. Returns `None` if no wall admits a
/// partition with at least `clearance` meters to every other wall.
pub fn inject_internal_wall(
    scene: &SynthScene,
    config: &SynthConfig,
    setback: f64,
    clearance: f64,
    rng: &mut ChaCha8Rng,
) -> Option<SynthScene> {
    let sk = &scene.skeleton;
    let n = sk.wall_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let li = (sk.wall(i).1 - sk.wall(i).0).norm();
        let lj = (sk.wall(j).1 - sk.wall(j).0).norm();
        lj.total_cmp(&li).then(i.cmp(&j))
    });
    for wall in order {
        let (a, b) = sk.wall(wall);
        let inward = sk.inward_normal(wall);
        let mid = (a + b) * 0.5 + inward * setback;
        let half = 0.25 * (b - a);
        let (p, q) = (mid - half, mid + half);
        let clear = (0..n).all(|k| {
            let (c, d) = sk.wall(k);
            crate::geom2d::segment_distance(&p, &q, &c, &d) >= clearance
        });
        if !clear || !crate::geom2d::point_in_polygon(&mid, &sk.corners) {
            continue;
        }
        let len = (q - p).norm();
        let count = (len * sk.height * config.points_per_m2).round() as usize;
        let label = n as Label;
        let mut cloud = scene.cloud.clone();
        let mut extra = Vec::with_capacity(count);
        let mut normals = Vec::with_capacity(count);
        for _ in 0..count {
            let t: f64 = rng.random();
            let z = rng.random::<f64>() * sk.height;
            let xy = p + (q - p) * t;
            let noise = Vec3::new(
                truncated_normal(rng, config.noise_sigma),
                truncated_normal(rng, config.noise_sigma),
                truncated_normal(rng, config.noise_sigma),
            );
            extra.push(Vec3::new(xy.x, xy.y, z) + noise);
            let face = if rng.random::<bool>() { 1.0 } else { -1.0 };
            normals.push(UnitVec3::new_normalize(Vec3::new(
                face * inward.x,
                face * inward.y,
                0.0,
            )));
        }
        let add = PointCloud::new(extra)
            .with_normals(normals)
            .ok()?
            .with_labels(vec![label; count])
            .ok()?;
        cloud.extend(&add);
        return Some(SynthScene {
            cloud,
            skeleton: sk.clone(),
        });
    }
    None
}

/// Adds floor (z = 0) and ceiling (z = height) points at `points_per_m2`,
/// labeled [`NOISE`](crate::types::NOISE). Mimics a missing wall mask.
pub fn inject_floor_ceiling(
    scene: &SynthScene,
    config: &SynthConfig,
    points_per_m2: f64,
    rng: &mut ChaCha8Rng,
) -> SynthScene {
    let sk = &scene.skeleton;
    let (mut lo, mut hi) = (sk.corners[0], sk.corners[0]);
    for c in &sk.corners {
        lo = lo.inf(c);
        hi = hi.sup(c);
    }
    let area = signed_area(&sk.corners);
    let count = (area * points_per_m2).round() as usize;
    let mut points = Vec::with_capacity(2 * count);
    let mut normals = Vec::with_capacity(2 * count);
    for (z, nz) in [(0.0, 1.0), (sk.height, -1.0)] {
        let mut placed = 0;
        while placed < count {
            let xy = Vec2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
            if !crate::geom2d::point_in_polygon(&xy, &sk.corners) {
                continue;
            }
            let noise = truncated_normal(rng, config.noise_sigma);
            points.push(Vec3::new(xy.x, xy.y, z + noise));
            normals.push(UnitVec3::new_normalize(Vec3::new(0.0, 0.0, nz)));
            placed += 1;
        }
    }
    let n = points.len();
    let add = PointCloud {
        points,
        normals: Some(normals),
        labels: Some(vec![crate::types::NOISE; n]),
    };
    let mut cloud = scene.cloud.clone();
    cloud.extend(&add);
    SynthScene {
        cloud,
        skeleton: sk.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn clean(shape: ShapeClass, seed: u64) -> SynthConfig {
        SynthConfig {
            noise_sigma: 0.0,
            hole_count_range: (0, 0),
            shape: Some(shape),
            seed,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn rectangle_construction() {
        let c = build_corners(ShapeClass::Rectangle, &[4.0, 3.0]);
        let want = [(0.0, 0.0), (4.0, 0.0), (4.0, 3.0), (0.0, 3.0)];
        for (p, w) in c.iter().zip(want) {
            assert_eq!((p.x, p.y), w);
        }
    }

    fn interior_angles_deg(corners: &[Vec2]) -> Vec<f64> {
        let n = corners.len();
        (0..n)
            .map(|i| {
                let prev = corners[(i + n - 1) % n];
                let cur = corners[i];
                let next = corners[(i + 1) % n];
                let a = prev - cur;
                let b = next - cur;
                // CCW polygon: interior angle measured from next to prev.
                let ang = (a.y.atan2(a.x) - b.y.atan2(b.x)).to_degrees();
                ang.rem_euclid(360.0)
            })
            .collect()
    }

    #[test]
    fn shapes_are_rectilinear_with_expected_corner_counts() {
        for shape in ShapeClass::ALL {
            for seed in 0..10 {
                let cfg = clean(shape, seed);
                let sk = sample_skeleton(&cfg, &mut cfg.rng()).unwrap();
                assert_eq!(sk.corners.len(), shape.corner_count());
                assert!(is_simple_polygon(&sk.corners));
                assert!(signed_area(&sk.corners) > 0.0);
                for a in interior_angles_deg(&sk.corners) {
                    assert!(
                        (a - 90.0).abs() < 1e-9 || (a - 270.0).abs() < 1e-9,
                        "{shape:?} angle {a}"
                    );
                }
                assert!(sk.min_parallel_separation() >= cfg.min_wall_separation);
            }
        }
    }

    #[test]
    fn skeleton_is_deterministic() {
        let cfg = SynthConfig {
            seed: 42,
            ..SynthConfig::default()
        };
        let a = sample_skeleton(&cfg, &mut cfg.rng()).unwrap();
        let b = sample_skeleton(&cfg, &mut cfg.rng()).unwrap();
        assert_eq!(a, b);
        assert_eq!(generate_scene(&cfg).unwrap(), generate_scene(&cfg).unwrap());
    }

    #[test]
    fn zero_noise_points_lie_on_their_walls() {
        let cfg = clean(ShapeClass::L, 3);
        let scene = generate_scene(&cfg).unwrap();
        let labels = scene.cloud.labels.as_ref().unwrap();
        for (p, &l) in scene.cloud.points.iter().zip(labels) {
            let (a, _) = scene.skeleton.wall(l as usize);
            let n = scene.skeleton.inward_normal(l as usize);
            assert!(n.dot(&(p.xy() - a)).abs() < 1e-12);
            assert!((l as usize) < scene.skeleton.wall_count());
        }
    }

    #[test]
    fn noisy_points_within_five_sigma() {
        let cfg = SynthConfig {
            seed: 9,
            hole_count_range: (0, 0),
            ..SynthConfig::default()
        };
        let scene = generate_scene(&cfg).unwrap();
        let labels = scene.cloud.labels.as_ref().unwrap();
        for (p, &l) in scene.cloud.points.iter().zip(labels) {
            let (a, _) = scene.skeleton.wall(l as usize);
            let n = scene.skeleton.inward_normal(l as usize);
            assert!(n.dot(&(p.xy() - a)).abs() <= 5.0 * cfg.noise_sigma + 1e-12);
        }
    }

    #[test]
    fn rectangle_point_count_matches_area() {
        // 4x3 footprint, height 2.5, 100 pts/m^2: expected 3500 points.
        let sk = RoomSkeleton {
            shape_class: ShapeClass::Rectangle,
            corners: build_corners(ShapeClass::Rectangle, &[4.0, 3.0]),
            height: 2.5,
        };
        let cfg = clean(ShapeClass::Rectangle, 1);
        let scene = rasterize_walls(&sk, &cfg, &mut cfg.rng()).unwrap();
        let n = scene.cloud.len() as f64;
        // Sum of independent Poissons: sd = sqrt(3500) ~ 59; allow 5 sd.
        assert!((n - 3500.0).abs() < 5.0 * 3500f64.sqrt(), "count {n}");
    }

    #[test]
    fn opposing_walls_have_opposite_normals() {
        let sk = RoomSkeleton {
            shape_class: ShapeClass::Rectangle,
            corners: build_corners(ShapeClass::Rectangle, &[4.0, 3.0]),
            height: 2.5,
        };
        assert_eq!(sk.inward_normal(0), -sk.inward_normal(2));
        assert_eq!(sk.inward_normal(1), -sk.inward_normal(3));
        assert_eq!(sk.inward_normal(0), Vec2::new(0.0, 1.0));
    }

    #[test]
    fn no_holes_is_identity() {
        let cfg = clean(ShapeClass::U, 5);
        let scene = generate_scene(&cfg).unwrap();
        let out = punch_holes(&scene, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out, scene);
    }

    #[test]
    fn covering_cylinder_removes_a_wall() {
        let sk = RoomSkeleton {
            shape_class: ShapeClass::Rectangle,
            corners: build_corners(ShapeClass::Rectangle, &[6.0, 2.0]),
            height: 2.5,
        };
        let cfg = clean(ShapeClass::Rectangle, 2);
        let scene = rasterize_walls(&sk, &cfg, &mut cfg.rng()).unwrap();
        // Wall 1 runs (6,0)-(6,2); radius 1.5 around its midpoint covers it.
        let hole = Cylinder {
            center: Vec2::new(6.0, 1.0),
            radius: 1.5,
        };
        let out = carve_cylinders(&scene, &[hole]);
        let labels = out.cloud.labels.as_ref().unwrap();
        assert!(!labels.contains(&1));
        assert!(labels.contains(&3));
        assert!(out.cloud.len() < scene.cloud.len());
        out.cloud.validate().unwrap();
    }

    #[test]
    fn holes_only_delete() {
        for seed in 0..5 {
            let cfg = SynthConfig {
                seed,
                hole_count_range: (4, 4),
                ..SynthConfig::default()
            };
            let mut rng = cfg.rng();
            let sk = sample_skeleton(&cfg, &mut rng).unwrap();
            let scene = rasterize_walls(&sk, &cfg, &mut rng).unwrap();
            let out = punch_holes(&scene, &cfg, &mut rng).unwrap();
            assert!(out.cloud.len() <= scene.cloud.len());
            out.cloud.validate().unwrap();
        }
    }

    #[test]
    fn non_rectilinear_flag_breaks_right_angles() {
        let cfg = SynthConfig {
            rectilinear: false,
            shape: Some(ShapeClass::Rectangle),
            seed: 11,
            ..SynthConfig::default()
        };
        let sk = sample_skeleton(&cfg, &mut cfg.rng()).unwrap();
        let angles = interior_angles_deg(&sk.corners);
        assert!(angles.iter().any(|a| (a - 90.0).abs() > 0.5));
    }

    #[test]
    fn notch_measures() {
        let sk = |shape, p: &[f64]| RoomSkeleton {
            shape_class: shape,
            corners: build_corners(shape, p),
            height: 2.5,
        };
        let rect = sk(ShapeClass::Rectangle, &[4.0, 3.0]);
        assert_eq!(rect.min_reflex_leg(), f64::INFINITY);
        assert_eq!(rect.min_exterior_gap(), f64::INFINITY);
        // Notch legs are x2 = 2 and y2 = 2.5.
        let l = sk(ShapeClass::L, &[3.0, 2.0, 2.0, 2.5]);
        assert!((l.min_reflex_leg() - 2.0).abs() < 1e-12);
        assert_eq!(l.min_exterior_gap(), f64::INFINITY);
        let u = sk(ShapeClass::U, &[2.0, 3.5, 2.5, 2.0, 3.0, 4.0]);
        assert!((u.min_exterior_gap() - 3.5).abs() < 1e-12);
        assert!((u.min_reflex_leg() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn internal_wall_is_inside_the_room() {
        // Small rooms have no wall with enough clearance; take the first seed
        // that does.
        let (scene, out) = (0..20)
            .find_map(|seed| {
                let cfg = clean(ShapeClass::Rectangle, seed);
                let scene = generate_scene(&cfg).unwrap();
                let out = inject_internal_wall(&scene, &cfg, 1.5, 1.0, &mut cfg.rng())?;
                Some((scene, out))
            })
            .unwrap();
        assert!(out.cloud.len() > scene.cloud.len());
        let new_label = scene.skeleton.wall_count() as Label;
        let labels = out.cloud.labels.as_ref().unwrap();
        for (p, &l) in out.cloud.points.iter().zip(labels) {
            if l == new_label {
                assert!(crate::geom2d::point_in_polygon(&p.xy(), &scene.skeleton.corners));
            }
        }
    }
}
