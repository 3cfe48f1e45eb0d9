//! Small 2D polygon and segment helpers shared by the hull, perimeter and
//! metrics modules.

use crate::types::Vec2;

fn cross(o: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Shoelace signed area; positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: &Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (&poly[i], &poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Euclidean distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Closest distance between segments `[a, b]` and `[c, d]`.
pub fn segment_distance(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

fn on_segment(p: &Vec2, a: &Vec2, b: &Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

/// Whether a closed polygon is simple: no two non-adjacent edges touch and
/// adjacent edges do not fold back onto each other.
pub fn is_simple_polygon(poly: &[Vec2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        if (b - a).norm() == 0.0 {
            return false;
        }
        for j in (i + 1)..n {
            let c = &poly[j];
            let d = &poly[(j + 1) % n];
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Shared vertex is fine; overlapping collinear edges are not.
                let (shared, other_a, other_b) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                let u = other_a - shared;
                let v = other_b - shared;
                let c = u.x * v.y - u.y * v.x;
                if c.abs() <= 1e-12 * u.norm() * v.norm() && u.dot(&v) > 0.0 {
                    return false;
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Component-wise median (upper median for even counts averaged with the lower).
pub fn component_median(points: &[Vec2]) -> Vec2 {
    let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let mut ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    Vec2::new(median_in_place(&mut xs), median_in_place(&mut ys))
}

pub(crate) fn median_in_place(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn area_and_orientation() {
        let sq = square();
        assert_eq!(signed_area(&sq), 1.0);
        let rev: Vec<_> = sq.iter().rev().cloned().collect();
        assert_eq!(signed_area(&rev), -1.0);
    }

    #[test]
    fn inside_outside() {
        let sq = square();
        assert!(point_in_polygon(&Vec2::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(&Vec2::new(1.5, 0.5), &sq));
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bow = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(!is_simple_polygon(&bow));
        assert!(is_simple_polygon(&square()));
    }

    #[test]
    fn folded_back_edge_is_not_simple() {
        let spike = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
        ];
        assert!(!is_simple_polygon(&spike));
    }

    #[test]
    fn segment_distances() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(2.0, 0.0);
        assert_eq!(point_segment_distance(&Vec2::new(1.0, 1.0), &a, &b), 1.0);
        assert_eq!(point_segment_distance(&Vec2::new(3.0, 0.0), &a, &b), 1.0);
        let c = Vec2::new(1.0, -1.0);
        let d = Vec2::new(1.0, 1.0);
        assert_eq!(segment_distance(&a, &b, &c, &d), 0.0);
        let e = Vec2::new(0.0, 3.0);
        let f = Vec2::new(2.0, 3.0);
        assert_eq!(segment_distance(&a, &b, &e, &f), 3.0);
    }

    #[test]
    fn medians() {
        let pts = vec![Vec2::new(3.0, 1.0), Vec2::new(1.0, 5.0), Vec2::new(2.0, 2.0)];
        assert_eq!(component_median(&pts), Vec2::new(2.0, 2.0));
    }
}
