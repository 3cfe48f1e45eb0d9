//! Closed tours over a distance matrix: nearest-neighbor construction refined
//! by 2-opt.

use crate::types::Vec2;

pub fn tour_length(dist: &[Vec<f64>], tour: &[usize]) -> f64 {
    let n = tour.len();
    (0..n).map(|i| dist[tour[i]][tour[(i + 1) % n]]).sum()
}

pub fn euclidean_matrix(points: &[Vec2]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| points.iter().map(|b| (a - b).norm()).collect())
        .collect()
}

/// Greedy tour from node 0, always moving to the nearest unvisited node
/// (ties to the lower index).
pub fn nearest_neighbor_tour(dist: &[Vec<f64>]) -> Vec<usize> {
    let n = dist.len();
    if n == 0 {
        return Vec::new();
    }
    let mut visited = vec![false; n];
    let mut tour = vec![0];
    visited[0] = true;
    for _ in 1..n {
        let cur = *tour.last().unwrap();
        let next = (0..n)
            .filter(|&j| !visited[j])
            .min_by(|&a, &b| dist[cur][a].total_cmp(&dist[cur][b]).then(a.cmp(&b)))
            .unwrap();
        visited[next] = true;
        tour.push(next);
    }
    tour
}

/// 2-opt until no segment reversal shortens the tour. Node `tour[0]` stays
/// first.
pub fn two_opt(dist: &[Vec<f64>], tour: &mut [usize]) {
    let n = tour.len();
    if n < 4 {
        return;
    }
    loop {
        let mut improved = false;
        for i in 0..n - 1 {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (tour[i], tour[i + 1]);
                let (c, d) = (tour[j], tour[(j + 1) % n]);
                let delta = dist[a][c] + dist[b][d] - dist[a][b] - dist[c][d];
                if delta < -1e-12 {
                    tour[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

pub fn solve_tour(dist: &[Vec<f64>]) -> Vec<usize> {
    let mut tour = nearest_neighbor_tour(dist);
    two_opt(dist, &mut tour);
    tour
}

/// Shortest closed tour by enumeration with node 0 fixed; test oracle.
pub fn exhaustive_tour(dist: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = dist.len();
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = (Vec::new(), f64::INFINITY);
    permute(&mut rest, 0, &mut |perm| {
        let mut t = vec![0];
        t.extend_from_slice(perm);
        let len = tour_length(dist, &t);
        if len < best.1 {
            best = (t, len);
        }
    });
    best
}

fn permute(v: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}
