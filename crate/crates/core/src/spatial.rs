//! Uniform-grid spatial indices for radius, nearest and k-nearest queries.

use std::collections::HashMap;

use crate::types::{Vec2, Vec3};

type Cell2 = (i64, i64);
type Cell3 = (i64, i64, i64);

/// Bucketed 2D point index.
#[derive(Debug, Clone)]
pub struct Grid2 {
    cell: f64,
    points: Vec<Vec2>,
    buckets: HashMap<Cell2, Vec<usize>>,
}

impl Grid2 {
    pub fn new(points: &[Vec2], cell: f64) -> Self {
        assert!(cell > 0.0, "grid cell size must be positive");
        let mut buckets: HashMap<Cell2, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(cell_of2(p, cell)).or_default().push(i);
        }
        Self {
            cell,
            points: points.to_vec(),
            buckets,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of points within `radius` of `q`, ascending.
    pub fn within(&self, q: &Vec2, radius: f64) -> Vec<usize> {
        let r = (radius / self.cell).ceil() as i64;
        let (cx, cy) = cell_of2(q, self.cell);
        let r2 = radius * radius;
        let mut out = Vec::new();
        for dx in -r..=r {
            for dy in -r..=r {
                if let Some(b) = self.buckets.get(&(cx + dx, cy + dy)) {
                    out.extend(
                        b.iter()
                            .copied()
                            .filter(|&i| (self.points[i] - q).norm_squared() <= r2),
                    );
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Nearest point and its distance. `None` on an empty index.
    pub fn nearest(&self, q: &Vec2) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let (cx, cy) = cell_of2(q, self.cell);
        let mut best: Option<(usize, f64)> = None;
        let mut ring = 0i64;
        loop {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    if let Some(b) = self.buckets.get(&(cx + dx, cy + dy)) {
                        for &i in b {
                            let d = (self.points[i] - q).norm_squared();
                            if best.is_none_or(|(bi, bd)| d < bd || (d == bd && i < bi)) {
                                best = Some((i, d));
                            }
                        }
                    }
                }
            }
            if let Some((_, bd)) = best {
                // Anything in ring+1 or beyond is at least ring*cell away.
                let reach = ring as f64 * self.cell;
                if bd.sqrt() <= reach {
                    break;
                }
            }
            ring += 1;
        }
        best.map(|(i, d)| (i, d.sqrt()))
    }
}

fn cell_of2(p: &Vec2, cell: f64) -> Cell2 {
    ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
}

fn cell_of3(p: &Vec3, cell: f64) -> Cell3 {
    (
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    )
}

/// Bucketed 3D point index.
#[derive(Debug, Clone)]
pub struct Grid3 {
    cell: f64,
    points: Vec<Vec3>,
    buckets: HashMap<Cell3, Vec<usize>>,
}

impl Grid3 {
    pub fn new(points: &[Vec3], cell: f64) -> Self {
        assert!(cell > 0.0, "grid cell size must be positive");
        let mut buckets: HashMap<Cell3, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(cell_of3(p, cell)).or_default().push(i);
        }
        Self {
            cell,
            points: points.to_vec(),
            buckets,
        }
    }

    /// Cell size giving roughly `per_cell` points per occupied cell for a
    /// cloud spread over `points`' bounding box.
    pub fn auto_cell(points: &[Vec3], per_cell: f64) -> f64 {
        if points.len() < 2 {
            return 1.0;
        }
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let ext = hi - lo;
        // Surface-like clouds: treat the two largest extents as the area.
        let mut e = [ext.x, ext.y, ext.z];
        e.sort_by(|a, b| b.total_cmp(a));
        let area = (e[0].max(1e-6)) * (e[1].max(e[0] * 1e-3).max(1e-6));
        (area * per_cell / points.len() as f64).sqrt().max(1e-6)
    }

    /// The `k` nearest indices to point `q`, nearest first (ties by index).
    pub fn knn(&self, q: &Vec3, k: usize) -> Vec<usize> {
        let k = k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        let (cx, cy, cz) = cell_of3(q, self.cell);
        let mut cand: Vec<(f64, usize)> = Vec::new();
        let mut ring = 0i64;
        loop {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    for dz in -ring..=ring {
                        if dx.abs() != ring && dy.abs() != ring && dz.abs() != ring {
                            continue;
                        }
                        if let Some(b) = self.buckets.get(&(cx + dx, cy + dy, cz + dz)) {
                            cand.extend(
                                b.iter().map(|&i| ((self.points[i] - q).norm_squared(), i)),
                            );
                        }
                    }
                }
            }
            if cand.len() >= k {
                cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let kth = cand[k - 1].0.sqrt();
                if kth <= ring as f64 * self.cell {
                    break;
                }
            }
            ring += 1;
        }
        cand.truncate(k);
        cand.into_iter().map(|(_, i)| i).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nearest_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec2> = (0..300)
            .map(|_| Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect();
        let grid = Grid2::new(&pts, 0.37);
        for _ in 0..200 {
            let q = Vec2::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0));
            let (_, d) = grid.nearest(&q).unwrap();
            let brute = pts.iter().map(|p| (p - q).norm()).fold(f64::INFINITY, f64::min);
            assert_eq!(d, brute);
        }
    }

    #[test]
    fn within_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Vec2> = (0..200)
            .map(|_| Vec2::new(rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)))
            .collect();
        let grid = Grid2::new(&pts, 0.2);
        let q = Vec2::new(1.5, 1.5);
        let got = grid.within(&q, 0.5);
        let want: Vec<usize> = (0..pts.len()).filter(|&i| (pts[i] - q).norm() <= 0.5).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn knn_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Vec3> = (0..400)
            .map(|_| {
                Vec3::new(
                    rng.random_range(0.0..4.0),
                    rng.random_range(0.0..4.0),
                    rng.random_range(0.0..1.0),
                )
            })
            .collect();
        let grid = Grid3::new(&pts, Grid3::auto_cell(&pts, 4.0));
        for q in pts.iter().take(50) {
            let got = grid.knn(q, 10);
            let mut all: Vec<(f64, usize)> = pts
                .iter()
                .enumerate()
                .map(|(i, p)| ((p - q).norm_squared(), i))
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let want: Vec<usize> = all.iter().take(10).map(|x| x.1).collect();
            assert_eq!(got, want);
        }
    }
}
