//! Geometric core of a posed-image to room-perimeter pipeline: synthetic wall
//! clouds, projective depth math, α-shape culling, plane-instance clustering,
//! perimeter fitting and evaluation metrics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod error;
pub mod geom2d;
pub mod hull;
pub mod metrics;
pub mod perimeter;
pub mod projection;
pub mod spatial;
pub mod synthgen;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    intersect_lines, transform_point, Intrinsics, Label, Line2D, PointCloud, RigidPose, UnitVec2,
    UnitVec3, Vec2, Vec3, EPS_PARALLEL, NOISE,
};
