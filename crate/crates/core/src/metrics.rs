//! Perimeter evaluation (rasterized IoU, corner error, spurious corners) and
//! clustering pairwise agreement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom2d::is_simple_polygon;
use crate::perimeter::Perimeter;
use crate::types::{Label, Vec2, NOISE};

pub const DEFAULT_IOU_RESOLUTION: f64 = 0.01;
pub const DEFAULT_TAU_MATCH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub iou2d: f64,
    pub corner_error: f64,
    pub spurious_fraction: f64,
    pub matched_corners: usize,
}

/// Sorted x-crossings of a horizontal scanline with the polygon's edges.
fn crossings(poly: &[Vec2], y: f64, out: &mut Vec<f64>) {
    out.clear();
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.y > y) != (b.y > y) {
            out.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
    }
    out.sort_by(|p, q| p.total_cmp(q));
}

/// Rasterized IoU over the union bounding box, one scanline per row of
/// height `resolution` through the row center. Each scanline is measured
/// exactly along x (even-odd), so the only discretization is in y.
pub fn iou_2d(pred: &Perimeter, gt: &Perimeter, resolution: f64) -> Result<f64> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    for (name, p) in [("prediction", pred), ("ground truth", gt)] {
        if p.corners.len() < 3 || !is_simple_polygon(&p.corners) {
            return Err(Error::DegeneratePolygon(format!("{name} is not a simple polygon")));
        }
    }
    let (mut lo, mut hi) = (pred.corners[0], pred.corners[0]);
    for c in pred.corners.iter().chain(&gt.corners) {
        lo = lo.inf(c);
        hi = hi.sup(c);
    }
    let rows = ((hi.y - lo.y) / resolution).ceil() as usize;
    let (inter, union) = (0..rows)
        .into_par_iter()
        .map(|r| {
            let y = lo.y + (r as f64 + 0.5) * resolution;
            let mut ca = Vec::new();
            let mut cb = Vec::new();
            crossings(&pred.corners, y, &mut ca);
            crossings(&gt.corners, y, &mut cb);
            // Walk the merged crossing list tracking inside/outside of each.
            let mut events: Vec<(f64, u8)> = ca
                .iter()
                .map(|&x| (x, 0u8))
                .chain(cb.iter().map(|&x| (x, 1u8)))
                .collect();
            events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let (mut in_a, mut in_b) = (false, false);
            let mut last = lo.x;
            let (mut i, mut u) = (0.0, 0.0);
            for (x, which) in events {
                let span = x - last;
                if in_a && in_b {
                    i += span;
                }
                if in_a || in_b {
                    u += span;
                }
                last = x;
                if which == 0 {
                    in_a = !in_a;
                } else {
                    in_b = !in_b;
                }
            }
            (i, u)
        })
        .collect::<Vec<(f64, f64)>>()
        .into_iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    if union == 0.0 {
        return Ok(0.0);
    }
    Ok(inter / union)
}

/// Mean distance from each ground-truth corner to its nearest predicted corner.
pub fn corner_error(pred: &Perimeter, gt: &Perimeter) -> Result<f64> {
    if pred.corners.is_empty() || gt.corners.is_empty() {
        return Err(Error::EmptyPerimeter);
    }
    let total: f64 = gt
        .corners
        .iter()
        .map(|g| {
            pred.corners
                .iter()
                .map(|p| (p - g).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / gt.corners.len() as f64)
}

/// Greedy one-to-one matching by ascending distance within `tau`. Returns the
/// matched pairs `(pred index, gt index)`.
pub fn match_corners(pred: &Perimeter, gt: &Perimeter, tau: f64) -> Vec<(usize, usize)> {
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in pred.corners.iter().enumerate() {
        for (j, g) in gt.corners.iter().enumerate() {
            let d = (p - g).norm();
            if d <= tau && tau > 0.0 {
                cand.push((d, i, j));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_p = vec![false; pred.corners.len()];
    let mut used_g = vec![false; gt.corners.len()];
    let mut out = Vec::new();
    for (_, i, j) in cand {
        if !used_p[i] && !used_g[j] {
            used_p[i] = true;
            used_g[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Unmatched predicted corners as a fraction of the ground-truth count.
pub fn spurious_corners(pred: &Perimeter, gt: &Perimeter, tau: f64) -> Result<f64> {
    if gt.corners.is_empty() {
        return Err(Error::EmptyPerimeter);
    }
    let matched = match_corners(pred, gt, tau).len();
    Ok((pred.corners.len() - matched) as f64 / gt.corners.len() as f64)
}

pub fn evaluate(pred: &Perimeter, gt: &Perimeter, resolution: f64, tau: f64) -> Result<EvalReport> {
    Ok(EvalReport {
        iou2d: iou_2d(pred, gt, resolution)?,
        corner_error: corner_error(pred, gt)?,
        spurious_fraction: spurious_corners(pred, gt, tau)?,
        matched_corners: match_corners(pred, gt, tau).len(),
    })
}

/// Fraction of point pairs on which both labelings agree about "same cluster".
/// Points that are NOISE in either labeling are left out. Exhaustive when the
/// pair count fits in `sample_pairs`, otherwise `sample_pairs` random pairs.
pub fn pairwise_agreement(a: &[Label], b: &[Label], sample_pairs: usize, seed: u64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let idx: Vec<usize> = (0..a.len()).filter(|&i| a[i] != NOISE && b[i] != NOISE).collect();
    let n = idx.len();
    if n < 2 {
        return Ok(1.0);
    }
    let agree = |i: usize, j: usize| (a[i] == a[j]) == (b[i] == b[j]);
    let total = n * (n - 1) / 2;
    if total <= sample_pairs {
        let good: usize = (0..n)
            .into_par_iter()
            .map(|x| ((x + 1)..n).filter(|&y| agree(idx[x], idx[y])).count())
            .sum();
        return Ok(good as f64 / total as f64);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut good = 0usize;
    for _ in 0..sample_pairs {
        let x = rng.random_range(0..n);
        let mut y = rng.random_range(0..n - 1);
        if y >= x {
            y += 1;
        }
        if agree(idx[x], idx[y]) {
            good += 1;
        }
    }
    Ok(good as f64 / sample_pairs as f64)
}
