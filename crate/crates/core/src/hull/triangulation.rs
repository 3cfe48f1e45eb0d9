use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spade::{DelaunayTriangulation, HasPosition, HierarchyHintGenerator, Point2, Triangulation as _};

use crate::error::{Error, Result};
use crate::types::Vec2;

/// 2D Delaunay triangulation over de-duplicated input vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub vertices: Vec<Vec2>,
    /// Counter-clockwise vertex-index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Input index of each vertex (first occurrence when points repeat).
    pub source: Vec<usize>,
}

struct Site {
    pos: Point2<f64>,
    idx: usize,
}

impl HasPosition for Site {
    type Scalar = f64;

    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

impl Triangulation {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| ordered(t[k], t[(k + 1) % 3])))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// V − E + F, counting the outer face. 2 for any connected triangulation.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for t in &self.triangles {
            for &v in t {
                used[v] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        v - self.edges().len() as i64 + self.triangles.len() as i64 + 1
    }

    pub fn circumradius(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        circumradius(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    /// Brute-force count of (triangle, vertex) pairs with the vertex strictly
    /// inside the circumcircle by more than `tol`. O(F·V).
    pub fn empty_circle_violations(&self, tol: f64) -> usize {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                let Some(cc) = circumcenter(&a, &b, &c) else {
                    return 0;
                };
                let r = (a - cc).norm();
                self.vertices
                    .iter()
                    .enumerate()
                    .filter(|(i, p)| !t.contains(i) && (*p - cc).norm() < r - tol)
                    .count()
            })
            .sum()
    }
}

pub(crate) fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn circumradius(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    let ab = (b - a).norm();
    let bc = (c - b).norm();
    let ca = (a - c).norm();
    let area2 = ((b - a).perp(&(c - a))).abs();
    if area2 == 0.0 {
        return f64::INFINITY;
    }
    ab * bc * ca / (2.0 * area2)
}

pub fn circumcenter(a: &Vec2, b: &Vec2, c: &Vec2) -> Option<Vec2> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d == 0.0 {
        return None;
    }
    let (a2, b2, c2) = (a.norm_squared(), b.norm_squared(), c.norm_squared());
    Some(Vec2::new(
        (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
        (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d,
    ))
}

/// Delaunay triangulation of `points`. Repeated points collapse onto their
/// first occurrence. Cocircular configurations are resolved by the
/// triangulator's exact predicates, deterministically for a given input order.
pub fn delaunay(points: &[Vec2]) -> Result<Triangulation> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::Degenerate("non-finite point".into()));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i]
            .x
            .total_cmp(&points[j].x)
            .then(points[i].y.total_cmp(&points[j].y))
            .then(i.cmp(&j))
    });
    let mut source: Vec<usize> = Vec::with_capacity(points.len());
    for &i in &order {
        if let Some(&last) = source.last() {
            if points[last] == points[i] {
                continue;
            }
        }
        source.push(i);
    }
    source.sort_unstable();
    let vertices: Vec<Vec2> = source.iter().map(|&i| points[i]).collect();
    // Randomized incremental insertion under a fixed seed: spade's bulk loader
    // degrades to quadratic time on long runs of exactly collinear points,
    // which noise-free walls produce.
    let mut dt: DelaunayTriangulation<Site, (), (), (), HierarchyHintGenerator<f64>> =
        DelaunayTriangulation::new();
    let mut sweep: Vec<usize> = (0..vertices.len()).collect();
    sweep.shuffle(&mut ChaCha8Rng::seed_from_u64(0x51de));
    for idx in sweep {
        let p = vertices[idx];
        dt.insert(Site {
            pos: Point2::new(p.x, p.y),
            idx,
        })
        .map_err(|e| Error::Degenerate(format!("triangulation failed: {e:?}")))?;
    }
    let mut triangles: Vec<[usize; 3]> = dt
        .inner_faces()
        .map(|f| {
            let [a, b, c] = f.vertices().map(|v| v.data().idx);
            let ccw = (vertices[b] - vertices[a]).perp(&(vertices[c] - vertices[a])) > 0.0;
            if ccw {
                [a, b, c]
            } else {
                [a, c, b]
            }
        })
        .collect();
    if triangles.is_empty() {
        return Err(Error::Degenerate("all points are collinear".into()));
    }
    // Canonical order: rotate each triple to start at its smallest index.
    for t in triangles.iter_mut() {
        let m = (0..3).min_by_key(|&k| t[k]).unwrap();
        t.rotate_left(m);
    }
    triangles.sort_unstable();
    Ok(Triangulation {
        vertices,
        triangles,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_points_one_triangle() {
        let t = delaunay(&[Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap();
        assert_eq!(t.triangles.len(), 1);
        assert_eq!(t.euler_characteristic(), 2);
    }

    #[test]
    fn unit_square_two_triangles() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let t = delaunay(&pts).unwrap();
        assert_eq!(t.triangles.len(), 2);
        let diag = t.edges().len();
        assert_eq!(diag, 5);
        assert_eq!(t.euler_characteristic(), 2);
    }

    #[test]
    fn collinear_is_degenerate() {
        let pts: Vec<Vec2> = (0..5).map(|i| Vec2::new(i as f64, 2.0 * i as f64)).collect();
        assert!(matches!(delaunay(&pts), Err(Error::Degenerate(_))));
        assert!(delaunay(&pts[..2]).is_err());
    }

    #[test]
    fn duplicates_collapse() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        let t = delaunay(&pts).unwrap();
        assert_eq!(t.vertices.len(), 3);
        assert_eq!(t.source, vec![0, 1, 3]);
    }

    #[test]
    fn circumradius_right_triangle() {
        let r = circumradius(&Vec2::new(0.0, 0.0), &Vec2::new(2.0, 0.0), &Vec2::new(0.0, 2.0));
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let c = circumcenter(&Vec2::new(0.0, 0.0), &Vec2::new(2.0, 0.0), &Vec2::new(0.0, 2.0)).unwrap();
        assert!((c - Vec2::new(1.0, 1.0)).norm() < 1e-12);
    }
}
