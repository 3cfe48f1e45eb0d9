//! Depth unprojection, cross-frame reprojection, plane-sweep cost volumes and
//! neighbor-frame selection.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{Intrinsics, PointCloud, RigidPose, Vec2, Vec3};

/// Row-major H×W raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Copy> Image<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }
}

impl Image<f64> {
    /// Bilinear sample at continuous pixel coordinates where pixel centers sit
    /// at integer positions. `None` when the 2×2 support leaves the image.
    pub fn bilinear(&self, u: f64, v: f64) -> Option<f64> {
        // Coordinates within round-off of a pixel center sample it exactly.
        let snap = |x: f64| if (x - x.round()).abs() < 1e-9 { x.round() } else { x };
        let (u, v) = (snap(u), snap(v));
        if !(u >= 0.0 && v >= 0.0) {
            return None;
        }
        let x0 = u.floor() as usize;
        let y0 = v.floor() as usize;
        let (w, h) = (self.width, self.height);
        if x0 >= w || y0 >= h {
            return None;
        }
        let fx = u - x0 as f64;
        let fy = v - y0 as f64;
        let x1 = if fx > 0.0 { x0 + 1 } else { x0 };
        let y1 = if fy > 0.0 { y0 + 1 } else { y0 };
        if x1 >= w || y1 >= h {
            return None;
        }
        let a = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let b = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        Some(a * (1.0 - fy) + b * fy)
    }
}

/// A posed camera observation.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraFrame {
    pub intrinsics: Intrinsics,
    /// World to camera.
    pub pose: RigidPose,
    /// Grayscale intensities in [0, 1].
    pub image: Image<f64>,
    /// Meters; 0 marks an invalid pixel.
    pub depth: Option<Image<f64>>,
    pub wall_mask: Option<Image<bool>>,
}

impl CameraFrame {
    pub fn new(intrinsics: Intrinsics, pose: RigidPose, image: Image<f64>) -> Result<Self> {
        let f = Self {
            intrinsics,
            pose,
            image,
            depth: None,
            wall_mask: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn with_depth(mut self, depth: Image<f64>) -> Result<Self> {
        self.depth = Some(depth);
        self.validate()?;
        Ok(self)
    }

    pub fn with_mask(mut self, mask: Image<bool>) -> Result<Self> {
        self.wall_mask = Some(mask);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.intrinsics.validate()?;
        let (w, h) = (self.intrinsics.width, self.intrinsics.height);
        let check = |iw: usize, ih: usize| {
            if iw != w || ih != h {
                Err(Error::BufferSize {
                    expected: w * h,
                    got: iw * ih,
                })
            } else {
                Ok(())
            }
        };
        check(self.image.width, self.image.height)?;
        if let Some(d) = &self.depth {
            check(d.width, d.height)?;
            if d.data.iter().any(|z| !(*z >= 0.0)) {
                return Err(Error::InvalidParameter("negative or NaN depth".into()));
            }
        }
        if let Some(m) = &self.wall_mask {
            check(m.width, m.height)?;
        }
        Ok(())
    }

    fn in_bounds(&self, u: &Vec2) -> bool {
        u.x >= 0.0
            && u.y >= 0.0
            && u.x < self.intrinsics.width as f64
            && u.y < self.intrinsics.height as f64
    }
}

/// Depth-sweep volume `values[d][v * W + u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVolume {
    pub width: usize,
    pub height: usize,
    pub depth_samples: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl CostVolume {
    pub fn get(&self, d: usize, u: usize, v: usize) -> f64 {
        self.values[d][v * self.width + u]
    }

    /// Depth hypothesis with the lowest cost at each pixel (ties to the
    /// nearest depth). Test utility only.
    pub fn argmin_depth(&self) -> Image<f64> {
        let n = self.width * self.height;
        let data = (0..n)
            .map(|p| {
                let mut best = 0;
                for d in 1..self.depth_samples.len() {
                    if self.values[d][p] < self.values[best][p] {
                        best = d;
                    }
                }
                self.depth_samples[best]
            })
            .collect();
        Image {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Depths whose reciprocals are evenly spaced from `1/z_min` to `1/z_max`.
pub fn depth_samples(z_min: f64, z_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(z_min > 0.0 && z_min < z_max && z_max.is_finite()) {
        return Err(Error::InvalidRange(format!(
            "need 0 < z_min < z_max, got {z_min}, {z_max}"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidRange("need at least 2 depth samples".into()));
    }
    let (a, b) = (1.0 / z_min, 1.0 / z_max);
    let step = (a - b) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                z_min
            } else if i == count - 1 {
                z_max
            } else {
                1.0 / (a - step * i as f64)
            }
        })
        .collect())
}

/// World point seen at pixel `u` with camera depth `z`.
pub fn unproject(frame: &CameraFrame, u: &Vec2, z: f64) -> Result<Vec3> {
    if !frame.in_bounds(u) {
        return Err(Error::OutOfBounds { u: u.x, v: u.y });
    }
    if !(z > 0.0) {
        return Err(Error::InvalidParameter("depth must be positive".into()));
    }
    let pc = frame.intrinsics.backproject(u, z);
    Ok(frame.pose.inverse().transform_point(&pc))
}

/// Pixel in `dst` seen by `src` at pixel `u`, depth `z`. The result may fall
/// outside `dst`'s image.
pub fn reproject(src: &CameraFrame, dst: &CameraFrame, u: &Vec2, z: f64) -> Result<Vec2> {
    if !(z > 0.0) {
        return Err(Error::InvalidParameter("depth must be positive".into()));
    }
    let rel = dst.pose.compose(&src.pose.inverse());
    let pc = rel.transform_point(&src.intrinsics.backproject(u, z));
    dst.intrinsics.project(&pc).ok_or(Error::BehindCamera)
}

/// Plane-sweep photometric cost: mean absolute intensity difference against
/// each neighbor, sampled bilinearly. Out-of-image and behind-camera samples
/// are left out of the mean; a pixel with none left costs 1.0.
pub fn build_cost_volume(
    reference: &CameraFrame,
    neighbors: &[CameraFrame],
    depths: &[f64],
) -> Result<CostVolume> {
    if neighbors.is_empty() {
        return Err(Error::NoNeighbors);
    }
    if neighbors.iter().any(|n| n.intrinsics != reference.intrinsics) {
        return Err(Error::IntrinsicsMismatch);
    }
    if depths.iter().any(|z| !(*z > 0.0)) {
        return Err(Error::InvalidRange("depth samples must be positive".into()));
    }
    let k = &reference.intrinsics;
    let (w, h) = (k.width, k.height);
    let rels: Vec<RigidPose> = neighbors
        .iter()
        .map(|n| n.pose.compose(&reference.pose.inverse()))
        .collect();
    let values = depths
        .par_iter()
        .map(|&z| {
            let mut slice = vec![0.0; w * h];
            for v in 0..h {
                for u in 0..w {
                    let px = Vec2::new(u as f64, v as f64);
                    let pc = k.backproject(&px, z);
                    let iref = reference.image.get(u, v);
                    let mut sum = 0.0;
                    let mut count = 0usize;
                    for (nbr, rel) in neighbors.iter().zip(&rels) {
                        let Some(q) = k.project(&rel.transform_point(&pc)) else {
                            continue;
                        };
                        if let Some(s) = nbr.image.bilinear(q.x, q.y) {
                            sum += (iref - s).abs();
                            count += 1;
                        }
                    }
                    slice[v * w + u] = if count == 0 { 1.0 } else { sum / count as f64 };
                }
            }
            slice
        })
        .collect();
    Ok(CostVolume {
        width: w,
        height: h,
        depth_samples: depths.to_vec(),
        values,
    })
}

/// Neighbor-selection thresholds.
pub const NEIGHBOR_MAX_TRANSLATION: f64 = 0.3;
pub const NEIGHBOR_MAX_ROTATION_DEG: f64 = 15.0;

/// Indices of candidates whose pose relative to `reference` moves less than
/// 0.3 m and rotates less than 15°.
pub fn select_neighbors(reference: &CameraFrame, candidates: &[CameraFrame]) -> Vec<usize> {
    candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| is_neighbor(&reference.pose, &c.pose))
        .map(|(i, _)| i)
        .collect()
}

pub fn is_neighbor(reference: &RigidPose, candidate: &RigidPose) -> bool {
    let rel = candidate.compose(&reference.inverse());
    rel.translation().norm() < NEIGHBOR_MAX_TRANSLATION
        && rel.rotation_angle() < NEIGHBOR_MAX_ROTATION_DEG.to_radians()
}

/// Unprojects wall pixels with valid depth from every `stride`-th frame.
pub fn masked_unproject_all(frames: &[CameraFrame], stride: usize) -> Result<PointCloud> {
    masked_unproject_all_every(frames, stride, 1)
}

/// As [`masked_unproject_all`], additionally sampling every `pixel_step`-th
/// pixel in both image axes.
pub fn masked_unproject_all_every(
    frames: &[CameraFrame],
    stride: usize,
    pixel_step: usize,
) -> Result<PointCloud> {
    if stride == 0 || pixel_step == 0 {
        return Err(Error::InvalidParameter("stride must be >= 1".into()));
    }
    let mut points = Vec::new();
    for (i, frame) in frames.iter().enumerate().step_by(stride) {
        let depth = frame.depth.as_ref().ok_or(Error::MissingDepth(i))?;
        let inv = frame.pose.inverse();
        let k = &frame.intrinsics;
        for v in (0..k.height).step_by(pixel_step) {
            for u in (0..k.width).step_by(pixel_step) {
                let z = depth.get(u, v);
                if !(z > 0.0) {
                    continue;
                }
                if let Some(m) = &frame.wall_mask {
                    if !m.get(u, v) {
                        continue;
                    }
                }
                let pc = k.backproject(&Vec2::new(u as f64, v as f64), z);
                points.push(inv.transform_point(&pc));
            }
        }
    }
    Ok(PointCloud::new(points))
}
