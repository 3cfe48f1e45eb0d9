use std::collections::HashMap;
use std::f64::consts::TAU;

use super::triangulation::{ordered, Triangulation};
use crate::error::{Error, Result};
use crate::geom2d::point_in_polygon;
use crate::types::Vec2;

/// Densification spacing for contours, meters.
pub const CONTOUR_STEP: f64 = 0.05;

/// Outer boundary of an α-shape.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Contour {
    /// One closed walk per outer boundary, clockwise, first vertex not repeated.
    pub polylines: Vec<Vec<Vec2>>,
    /// Points along every boundary edge at spacing ≤ the contour step.
    pub densified: Vec<Vec2>,
    /// Boundary edges as pairs of densified points.
    pub segments: Vec<(Vec2, Vec2)>,
}

/// Indices of triangles with circumradius ≤ 1/α.
pub fn surviving_triangles(tri: &Triangulation, alpha: f64) -> Vec<usize> {
    let r_max = 1.0 / alpha;
    (0..tri.triangles.len())
        .filter(|&t| tri.circumradius(t) <= r_max)
        .collect()
}

/// α-shape contour. Triangles whose circumradius exceeds 1/α are dropped;
/// the boundary has every edge bounding exactly one surviving triangle plus
/// free-standing α-complex edges (no surviving triangle, empty diametral
/// circle of radius ≤ 1/α) so thin point chains are not lost. Components
/// nested inside another component's outer boundary are discarded, leaving
/// only outer walls.
pub fn alpha_contour(tri: &Triangulation, alpha: f64) -> Result<Contour> {
    alpha_contour_with_step(tri, alpha, CONTOUR_STEP)
}

pub fn alpha_contour_with_step(tri: &Triangulation, alpha: f64, step: f64) -> Result<Contour> {
    if !(alpha > 0.0) || !(step > 0.0) {
        return Err(Error::InvalidParameter("alpha and step must be positive".into()));
    }
    let r_max = 1.0 / alpha;
    let alive: Vec<bool> = (0..tri.triangles.len())
        .map(|t| tri.circumradius(t) <= r_max)
        .collect();
    if !alive.iter().any(|&a| a) {
        return Err(Error::EmptyShape);
    }
    // Edge -> (surviving count, opposite vertices).
    let mut edges: HashMap<(usize, usize), (usize, Vec<usize>)> = HashMap::new();
    for (t, tr) in tri.triangles.iter().enumerate() {
        for k in 0..3 {
            let e = ordered(tr[k], tr[(k + 1) % 3]);
            let entry = edges.entry(e).or_insert((0, Vec::new()));
            if alive[t] {
                entry.0 += 1;
            }
            entry.1.push(tr[(k + 2) % 3]);
        }
    }
    let v = &tri.vertices;
    let mut kept: Vec<(usize, usize)> = edges
        .iter()
        .filter(|((a, b), (count, opp))| match count {
            1 => true,
            0 => {
                let (p, q) = (v[*a], v[*b]);
                (p - q).norm() * 0.5 <= r_max
                    && opp.iter().all(|&r| (p - v[r]).dot(&(q - v[r])) > 0.0)
            }
            _ => false,
        })
        .map(|(e, _)| *e)
        .collect();
    kept.sort_unstable();
    if kept.is_empty() {
        return Err(Error::EmptyShape);
    }

    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, b) in &kept {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let comp = components(&adj);
    let mut walks: Vec<Vec<usize>> = comp.iter().map(|c| outer_walk(c, &adj, v)).collect();
    let polys: Vec<Vec<Vec2>> = walks.iter().map(|w| w.iter().map(|&i| v[i]).collect()).collect();
    let nested: Vec<bool> = (0..walks.len())
        .map(|i| {
            let probe = v[walks[i][0]];
            (0..walks.len()).any(|j| j != i && polys[j].len() >= 3 && point_in_polygon(&probe, &polys[j]))
        })
        .collect();
    let mut idx = 0;
    walks.retain(|_| {
        let keep = !nested[idx];
        idx += 1;
        keep
    });

    let mut contour = Contour::default();
    let mut seen = std::collections::HashSet::new();
    for walk in &walks {
        contour.polylines.push(walk.iter().map(|&i| v[i]).collect());
        for k in 0..walk.len() {
            let (a, b) = (walk[k], walk[(k + 1) % walk.len()]);
            if a == b || !seen.insert(ordered(a, b)) {
                continue;
            }
            let (p, q) = (v[a], v[b]);
            let n = ((q - p).norm() / step).ceil().max(1.0) as usize;
            let pts: Vec<Vec2> = (0..=n).map(|j| p + (q - p) * (j as f64 / n as f64)).collect();
            contour.densified.extend_from_slice(&pts[..n]);
            contour.segments.extend(pts.windows(2).map(|w| (w[0], w[1])));
        }
    }
    Ok(contour)
}

fn components(adj: &HashMap<usize, Vec<usize>>) -> Vec<Vec<usize>> {
    let mut keys: Vec<usize> = adj.keys().copied().collect();
    keys.sort_unstable();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for &s in &keys {
        if !seen.insert(s) {
            continue;
        }
        let mut stack = vec![s];
        let mut comp = Vec::new();
        while let Some(u) = stack.pop() {
            comp.push(u);
            for &w in &adj[&u] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Traces the unbounded face of one connected planar edge graph, clockwise.
/// Dangling edges are walked out and back.
fn outer_walk(comp: &[usize], adj: &HashMap<usize, Vec<usize>>, v: &[Vec2]) -> Vec<usize> {
    let angle = |from: usize, to: usize| {
        let d = v[to] - v[from];
        d.y.atan2(d.x)
    };
    let start = *comp
        .iter()
        .min_by(|&&a, &&b| v[a].y.total_cmp(&v[b].y).then(v[a].x.total_cmp(&v[b].x)))
        .unwrap();
    let first = *adj[&start]
        .iter()
        .max_by(|&&a, &&b| angle(start, a).total_cmp(&angle(start, b)).then(b.cmp(&a)))
        .unwrap();
    let mut walk = vec![start];
    let (mut prev, mut cur) = (start, first);
    // Each directed edge is used at most once.
    let limit = 2 * comp.iter().map(|u| adj[u].len()).sum::<usize>() + 2;
    for _ in 0..limit {
        if cur == start && next_cw(prev, cur, adj, &angle) == first {
            break;
        }
        walk.push(cur);
        let nxt = next_cw(prev, cur, adj, &angle);
        prev = cur;
        cur = nxt;
    }
    walk
}

fn next_cw(
    prev: usize,
    cur: usize,
    adj: &HashMap<usize, Vec<usize>>,
    angle: &impl Fn(usize, usize) -> f64,
) -> usize {
    let back = angle(cur, prev);
    let nbrs = &adj[&cur];
    if nbrs.len() == 1 {
        return prev;
    }
    *nbrs
        .iter()
        .filter(|&&w| w != prev)
        .min_by(|&&a, &&b| {
            let da = (back - angle(cur, a)).rem_euclid(TAU);
            let db = (back - angle(cur, b)).rem_euclid(TAU);
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::delaunay;

    fn square_ring(side: f64, spacing: f64) -> Vec<Vec2> {
        let n = (side / spacing).round() as usize;
        let mut pts = Vec::new();
        for i in 0..n {
            let t = i as f64 * spacing;
            pts.push(Vec2::new(t, 0.0));
            pts.push(Vec2::new(side, t));
            pts.push(Vec2::new(side - t, side));
            pts.push(Vec2::new(0.0, side - t));
        }
        pts
    }

    #[test]
    fn walk_square_with_diagonal() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)] {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        assert_eq!(outer_walk(&[0, 1, 2, 3], &adj, &v), vec![0, 3, 2, 1]);
    }

    #[test]
    fn walk_with_dangling_edge() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(2.0, 0.0),
        ];
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for (a, b) in [(0, 1), (1, 2), (2, 0), (1, 3)] {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        assert_eq!(outer_walk(&[0, 1, 2, 3], &adj, &v), vec![0, 2, 1, 3, 1]);
    }

    #[test]
    fn alpha_threshold_matches_radius() {
        // Right triangle with circumradius sqrt(2) ≈ 1.414 < 2.
        let t = delaunay(&[Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0)]).unwrap();
        assert_eq!(surviving_triangles(&t, 0.5).len(), 1);
        assert_eq!(surviving_triangles(&t, 1.0).len(), 0);
        assert_eq!(alpha_contour(&t, 1.0), Err(Error::EmptyShape));
    }

    #[test]
    fn dense_square_with_sparse_interior() {
        let mut pts = square_ring(10.0, 0.05);
        for i in 1..4 {
            for j in 1..4 {
                pts.push(Vec2::new(i as f64 * 3.0 - 1.0, j as f64 * 3.0 - 1.0));
            }
        }
        let t = delaunay(&pts).unwrap();
        let c = alpha_contour(&t, 0.5).unwrap();
        // Every contour point is on the square boundary and vice versa.
        let on_square = |p: &Vec2| {
            p.x.abs().min((p.x - 10.0).abs()).min(p.y.abs()).min((p.y - 10.0).abs())
        };
        for p in &c.densified {
            assert!(on_square(p) <= 0.05, "{p:?}");
        }
        for q in square_ring(10.0, 0.05) {
            let d = c.densified.iter().map(|p| (p - q).norm()).fold(f64::INFINITY, f64::min);
            assert!(d <= 0.05);
        }
        assert_eq!(c.polylines.len(), 1);
    }

    #[test]
    fn small_alpha_gives_convex_hull() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(4.0, 3.0),
            Vec2::new(0.0, 3.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 2.0),
        ];
        let t = delaunay(&pts).unwrap();
        let c = alpha_contour(&t, 1e-6).unwrap();
        assert_eq!(c.polylines.len(), 1);
        assert_eq!(c.polylines[0].len(), 4);
        for p in &c.densified {
            let d = p.x.abs().min((p.x - 4.0).abs()).min(p.y.abs()).min((p.y - 3.0).abs());
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn nested_component_is_dropped() {
        // Large square ring with a short wall in the middle, far from every side.
        let mut pts = square_ring(12.0, 0.05);
        for i in 0..40 {
            pts.push(Vec2::new(5.0 + i as f64 * 0.05, 6.0));
        }
        let t = delaunay(&pts).unwrap();
        let c = alpha_contour(&t, 0.5).unwrap();
        assert!(c.densified.iter().all(|p| (p.y - 6.0).abs() > 1.0 || p.x < 1.0 || p.x > 11.0));
    }
}
