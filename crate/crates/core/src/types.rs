//! Shared geometric types: poses, camera intrinsics, 2D lines and point clouds.

use nalgebra::{Matrix2, Matrix3, Rotation3, Unit, Vector2, Vector3};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;
pub type UnitVec2 = Unit<Vector2<f64>>;
pub type UnitVec3 = Unit<Vector3<f64>>;

/// Cluster / wall label. [`NOISE`] marks points not assigned to any wall.
pub type Label = u32;

/// Distinguished label for unassigned points (serialized as `-1`).
pub const NOISE: Label = u32::MAX;

/// Lines closer than this to parallel (sine of the angle between normals)
/// are treated as parallel: sin(1°).
pub const EPS_PARALLEL: f64 = 0.017_452_406_437_283_51;

const ORTHO_TOL: f64 = 1e-9;

/// Rigid transform mapping world coordinates into camera coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidPose {
    rotation: Matrix3<f64>,
    translation: Vec3,
}

impl RigidPose {
    /// Builds a pose, rejecting rotations that are not orthonormal with det +1.
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        if !rotation.iter().chain(translation.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidPose("non-finite component".into()));
        }
        let gram = rotation.transpose() * rotation;
        if (gram - Matrix3::identity()).abs().max() > ORTHO_TOL {
            return Err(Error::InvalidPose("rotation is not orthonormal".into()));
        }
        if (rotation.determinant() - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvalidPose("rotation determinant is not +1".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_rotation(rotation: Rotation3<f64>, translation: Vec3) -> Self {
        Self {
            rotation: *rotation.matrix(),
            translation,
        }
    }

    pub fn translation_only(translation: Vec3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Pose of a camera centered at `center` whose optical (+z) axis points
    /// along `forward`, with image +y pointing as close to `down` as possible.
    pub fn look_along(center: Vec3, forward: Vec3, down: Vec3) -> Result<Self> {
        let z = forward
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidPose("zero forward vector".into()))?;
        let x = down
            .cross(&z)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidPose("forward parallel to down".into()))?;
        let y = z.cross(&x);
        // Rows are the camera axes in world coordinates.
        let rotation = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        let translation = -(rotation * center);
        Self::new(rotation, translation)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidPose) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        transform_point(self, p)
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }

    /// Geodesic rotation angle in radians.
    pub fn rotation_angle(&self) -> f64 {
        let c = ((self.rotation.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }
}

pub fn transform_point(pose: &RigidPose, p: &Vec3) -> Vec3 {
    pose.rotation * p + pose.translation
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidIntrinsics("focal lengths must be positive".into()));
        }
        if !(self.cx > 0.0 && self.cx < self.width as f64) {
            return Err(Error::InvalidIntrinsics("cx outside (0, width)".into()));
        }
        if !(self.cy > 0.0 && self.cy < self.height as f64) {
            return Err(Error::InvalidIntrinsics("cy outside (0, height)".into()));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Projects a camera-frame point; `None` when it is not in front of the camera.
    pub fn project(&self, pc: &Vec3) -> Option<Vec2> {
        if pc.z <= 0.0 {
            return None;
        }
        Some(Vec2::new(
            self.fx * pc.x / pc.z + self.cx,
            self.fy * pc.y / pc.z + self.cy,
        ))
    }

    pub fn backproject(&self, u: &Vec2, z: f64) -> Vec3 {
        Vec3::new((u.x - self.cx) * z / self.fx, (u.y - self.cy) * z / self.fy, z)
    }
}

/// Infinite 2D line `{p : normal · p = offset}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2D {
    pub normal: UnitVec2,
    pub offset: f64,
}

impl Line2D {
    pub fn new(normal: UnitVec2, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// Normalizes `normal`; fails on a zero vector.
    pub fn from_normal(normal: Vec2, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 1e-12) || !offset.is_finite() {
            return Err(Error::Degenerate("line normal is zero".into()));
        }
        Ok(Self {
            normal: Unit::new_unchecked(normal / len),
            offset: offset / len,
        })
    }

    /// Line with the given normal passing through `point`.
    pub fn through(normal: UnitVec2, point: &Vec2) -> Self {
        Self {
            normal,
            offset: normal.dot(point),
        }
    }

    /// Unit direction, the normal rotated by +90°.
    pub fn direction(&self) -> Vec2 {
        Vec2::new(-self.normal.y, self.normal.x)
    }

    pub fn signed_distance(&self, p: &Vec2) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn distance(&self, p: &Vec2) -> f64 {
        self.signed_distance(p).abs()
    }

    /// Orthogonal projection of `p` onto the line.
    pub fn project(&self, p: &Vec2) -> Vec2 {
        p - self.normal.into_inner() * self.signed_distance(p)
    }

    /// Representative of `(n, d) ~ (-n, -d)` with the lexicographically larger normal.
    pub fn canonical(&self) -> Self {
        let n = self.normal;
        let keep = n.x > 0.0 || (n.x == 0.0 && n.y >= 0.0);
        if keep {
            *self
        } else {
            Self {
                normal: -n,
                offset: -self.offset,
            }
        }
    }

    /// Whether two parameterizations denote the same line within `tol`.
    pub fn same_line(&self, other: &Line2D, tol: f64) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        (a.normal.into_inner() - b.normal.into_inner()).norm() <= tol
            && (a.offset - b.offset).abs() <= tol
    }

    /// Angle of the normal in radians, in (-π, π].
    pub fn normal_angle(&self) -> f64 {
        self.normal.y.atan2(self.normal.x)
    }
}

/// Unique intersection point of two lines.
pub fn intersect_lines(a: &Line2D, b: &Line2D) -> Result<Vec2> {
    let det = a.normal.x * b.normal.y - a.normal.y * b.normal.x;
    if det.abs() <= EPS_PARALLEL {
        return Err(Error::ParallelLines);
    }
    let m = Matrix2::new(a.normal.x, a.normal.y, b.normal.x, b.normal.y);
    let rhs = Vec2::new(a.offset, b.offset);
    m.lu().solve(&rhs).ok_or(Error::ParallelLines)
}

/// N points with optional per-point normals and labels kept as parallel arrays.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<UnitVec3>>,
    pub labels: Option<Vec<Label>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self {
            points,
            normals: None,
            labels: None,
        }
    }

    pub fn with_normals(mut self, normals: Vec<UnitVec3>) -> Result<Self> {
        if normals.len() != self.points.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} normals for {} points",
                normals.len(),
                self.points.len()
            )));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} points",
                labels.len(),
                self.points.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks the parallel-array and unit-normal invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if let Some(normals) = &self.normals {
            if normals.len() != n {
                return Err(Error::DimensionMismatch("normals length".into()));
            }
            if normals.iter().any(|v| (v.norm() - 1.0).abs() > 1e-9) {
                return Err(Error::DimensionMismatch("normal is not unit length".into()));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(Error::DimensionMismatch("labels length".into()));
            }
        }
        if self.points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::DimensionMismatch("non-finite point".into()));
        }
        Ok(())
    }

    /// Subset (or multiset) of the cloud, keeping the arrays parallel.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|n| indices.iter().map(|&i| n[i]).collect()),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Keeps points whose predicate is true.
    pub fn retain_by(&self, mut keep: impl FnMut(usize, &Vec3) -> bool) -> Self {
        let idx: Vec<usize> = self
            .points
            .iter()
            .enumerate()
            .filter(|(i, p)| keep(*i, p))
            .map(|(i, _)| i)
            .collect();
        self.select(&idx)
    }

    /// Appends another cloud. Normals/labels survive only if both sides carry them.
    pub fn extend(&mut self, other: &PointCloud) {
        self.normals = match (self.normals.take(), &other.normals) {
            (Some(mut a), Some(b)) => {
                a.extend_from_slice(b);
                Some(a)
            }
            (None, Some(_)) if self.points.is_empty() => other.normals.clone(),
            _ => None,
        };
        self.labels = match (self.labels.take(), &other.labels) {
            (Some(mut a), Some(b)) => {
                a.extend_from_slice(b);
                Some(a)
            }
            (None, Some(_)) if self.points.is_empty() => other.labels.clone(),
            _ => None,
        };
        self.points.extend_from_slice(&other.points);
    }

    pub fn xy(&self) -> Vec<Vec2> {
        self.points.iter().map(|p| p.xy()).collect()
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.points.is_empty() {
            return None;
        }
        let sum: Vec3 = self.points.iter().sum();
        Some(sum / self.points.len() as f64)
    }

    /// Applies a rigid transform to points and rotates normals.
    pub fn transformed(&self, pose: &RigidPose) -> Self {
        Self {
            points: self.points.iter().map(|p| pose.transform_point(p)).collect(),
            normals: self.normals.as_ref().map(|ns| {
                ns.iter()
                    .map(|n| Unit::new_normalize(pose.rotation() * n.into_inner()))
                    .collect()
            }),
            labels: self.labels.clone(),
        }
    }
}
