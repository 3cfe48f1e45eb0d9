//! Analytic ray casting of an extruded room into posed camera frames.

use crate::error::{Error, Result};
use crate::projection::{CameraFrame, Image};
use crate::types::{Intrinsics, RigidPose, Vec2, Vec3};

use super::RoomSkeleton;

/// Camera rig and path parameters for rendering a room.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub intrinsics: Intrinsics,
    pub frame_count: usize,
    pub eye_height: f64,
    /// Distance of the camera path from the walls, meters.
    pub inset: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            intrinsics: Intrinsics {
                fx: 40.0,
                fy: 40.0,
                cx: 32.0,
                cy: 24.0,
                width: 64,
                height: 48,
            },
            frame_count: 512,
            eye_height: 1.4,
            inset: 0.45,
        }
    }
}

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Camera poses walking an inset copy of the outline. Yaw advances by the
/// golden angle every frame so any regular stride still sees all headings.
pub fn camera_trajectory(skeleton: &RoomSkeleton, opts: &RenderOptions) -> Result<Vec<RigidPose>> {
    if opts.frame_count == 0 {
        return Err(Error::InvalidParameter("frame_count must be >= 1".into()));
    }
    if !(opts.eye_height > 0.0 && opts.eye_height < skeleton.height) {
        return Err(Error::InvalidParameter("eye height outside the room".into()));
    }
    let n = skeleton.wall_count();
    // Offset vertex of a corner: its two walls' inward normals summed. Exact for
    // right angles, a fair approximation otherwise.
    let path: Vec<Vec2> = (0..n)
        .map(|i| {
            let prev = skeleton.inward_normal((i + n - 1) % n);
            let next = skeleton.inward_normal(i);
            skeleton.corners[i] + (prev + next) * opts.inset
        })
        .collect();
    let lengths: Vec<f64> = (0..n).map(|i| (path[(i + 1) % n] - path[i]).norm()).collect();
    let total: f64 = lengths.iter().sum();
    let mut poses = Vec::with_capacity(opts.frame_count);
    for f in 0..opts.frame_count {
        let mut s = total * f as f64 / opts.frame_count as f64;
        let mut seg = 0;
        while seg + 1 < n && s > lengths[seg] {
            s -= lengths[seg];
            seg += 1;
        }
        let a = path[seg];
        let b = path[(seg + 1) % n];
        let xy = a + (b - a) * (s / lengths[seg].max(1e-12));
        let yaw = GOLDEN_ANGLE * f as f64;
        let center = Vec3::new(xy.x, xy.y, opts.eye_height);
        let forward = Vec3::new(yaw.cos(), yaw.sin(), 0.0);
        poses.push(RigidPose::look_along(center, forward, -Vec3::z())?);
    }
    Ok(poses)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Surface {
    Wall,
    Floor,
    Ceiling,
}

fn texture(p: &Vec3, surface: Surface) -> f64 {
    let base = match surface {
        Surface::Wall => 0.5,
        Surface::Floor => 0.35,
        Surface::Ceiling => 0.7,
    };
    let t = 0.12 * (5.3 * p.x + 1.7 * p.z).sin()
        + 0.1 * (4.1 * p.y - 2.9 * p.z).cos()
        + 0.06 * (9.7 * (p.x + p.y) + 3.1 * p.z).sin();
    (base + t).clamp(0.0, 1.0)
}

/// Nearest surface hit along a unit-z-scaled ray; returns (t, surface).
fn cast(skeleton: &RoomSkeleton, origin: &Vec3, dir: &Vec3) -> Option<(f64, Surface)> {
    let mut best: Option<(f64, Surface)> = None;
    let mut consider = |t: f64, s: Surface| {
        if t > 1e-9 && best.is_none_or(|(bt, _)| t < bt) {
            best = Some((t, s));
        }
    };
    let h = skeleton.height;
    if dir.z < 0.0 {
        consider(-origin.z / dir.z, Surface::Floor);
    } else if dir.z > 0.0 {
        consider((h - origin.z) / dir.z, Surface::Ceiling);
    }
    let o = origin.xy();
    let d = dir.xy();
    for i in 0..skeleton.wall_count() {
        let (a, b) = skeleton.wall(i);
        let e = b - a;
        let den = d.x * e.y - d.y * e.x;
        if den.abs() < 1e-15 {
            continue;
        }
        let w = a - o;
        let t = (w.x * e.y - w.y * e.x) / den;
        let s = (w.x * d.y - w.y * d.x) / den;
        if !(0.0..=1.0).contains(&s) {
            continue;
        }
        let z = origin.z + t * dir.z;
        if z < 0.0 || z > h {
            continue;
        }
        consider(t, Surface::Wall);
    }
    best
}

/// Renders intensity, depth (camera z) and wall mask for one pose.
pub fn render_frame(
    skeleton: &RoomSkeleton,
    intrinsics: &Intrinsics,
    pose: &RigidPose,
) -> Result<CameraFrame> {
    intrinsics.validate()?;
    let (w, h) = (intrinsics.width, intrinsics.height);
    let mut image = Image::filled(w, h, 0.0);
    let mut depth = Image::filled(w, h, 0.0);
    let mut mask = Image::filled(w, h, false);
    let inv = pose.inverse();
    let origin = pose.center();
    let rot_t = inv.rotation();
    for v in 0..h {
        for u in 0..w {
            // Camera ray scaled so its camera z is 1: hit parameter t is depth.
            let ray_c = intrinsics.backproject(&Vec2::new(u as f64, v as f64), 1.0);
            let dir = rot_t * ray_c;
            if let Some((t, surface)) = cast(skeleton, &origin, &dir) {
                let p = origin + dir * t;
                image.set(u, v, texture(&p, surface));
                depth.set(u, v, t);
                mask.set(u, v, surface == Surface::Wall);
            }
        }
    }
    CameraFrame::new(*intrinsics, *pose, image)?
        .with_depth(depth)?
        .with_mask(mask)
}

/// Renders the full trajectory.
pub fn render_sequence(skeleton: &RoomSkeleton, opts: &RenderOptions) -> Result<Vec<CameraFrame>> {
    camera_trajectory(skeleton, opts)?
        .iter()
        .map(|pose| render_frame(skeleton, &opts.intrinsics, pose))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::masked_unproject_all;
    use crate::synthgen::{build_corners, ShapeClass};

    fn room() -> RoomSkeleton {
        RoomSkeleton {
            shape_class: ShapeClass::L,
            corners: build_corners(ShapeClass::L, &[3.0, 2.5, 2.0, 3.0]),
            height: 2.6,
        }
    }

    #[test]
    fn every_pixel_hits_a_surface() {
        let sk = room();
        let opts = RenderOptions {
            frame_count: 4,
            ..RenderOptions::default()
        };
        for f in render_sequence(&sk, &opts).unwrap() {
            assert!(f.depth.as_ref().unwrap().data.iter().all(|&z| z > 0.0));
            assert!(f.wall_mask.as_ref().unwrap().data.iter().any(|&m| m));
        }
    }

    #[test]
    fn wall_pixels_unproject_onto_walls() {
        let sk = room();
        let opts = RenderOptions {
            frame_count: 4,
            ..RenderOptions::default()
        };
        let frames = render_sequence(&sk, &opts).unwrap();
        let cloud = masked_unproject_all(&frames, 1).unwrap();
        assert!(cloud.len() > 1000);
        for p in &cloud.points {
            let d = (0..sk.wall_count())
                .map(|i| {
                    let (a, b) = sk.wall(i);
                    crate::geom2d::point_segment_distance(&p.xy(), &a, &b)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6, "point {p:?} is {d} m off the walls");
        }
    }

    #[test]
    fn trajectory_stays_inside() {
        let sk = room();
        let poses = camera_trajectory(&sk, &RenderOptions::default()).unwrap();
        assert_eq!(poses.len(), 512);
        for p in poses {
            assert!(crate::geom2d::point_in_polygon(&p.center().xy(), &sk.corners));
        }
    }
}
