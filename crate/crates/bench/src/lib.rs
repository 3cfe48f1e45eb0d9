//! Shared fixtures for the benchmarks.

use nalgebra::DMatrix;
use perimkit::cluster::SoftAssignment;
use perimkit::synthgen::{generate_scene, ShapeClass, SynthConfig, SynthScene};
use perimkit::{PointCloud, Vec2};

pub fn scene(shape: ShapeClass, seed: u64) -> SynthScene {
    generate_scene(&SynthConfig {
        shape: Some(shape),
        seed,
        ..SynthConfig::default()
    })
    .expect("synthetic scene")
}

/// The first `n` points of a scene with a fixed, non-uniform assignment.
pub fn clustering_instance(n: usize, k: usize) -> (PointCloud, SoftAssignment) {
    let s = scene(ShapeClass::U, 1);
    let idx: Vec<usize> = (0..s.cloud.len()).step_by((s.cloud.len() / n).max(1)).take(n).collect();
    let cloud = s.cloud.select(&idx);
    let z = DMatrix::from_fn(idx.len(), k + 1, |i, j| ((i * 31 + j * 17) as f64).sin());
    (cloud, SoftAssignment::from_logits(z, k).expect("logits"))
}

/// Corner-like node layout: points on a jittered ellipse.
pub fn tour_nodes(n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|i| {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            let r = 1.0 + 0.15 * ((i * 7) as f64).sin();
            Vec2::new(5.0 * r * t.cos(), 3.0 * r * t.sin())
        })
        .collect()
}
