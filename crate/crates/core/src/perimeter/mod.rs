//! From labeled wall points to a closed room outline: per-cluster line
//! fitting, duplicate merging, tour ordering, Manhattan snapping and corner
//! extraction.

mod fit;
pub mod tour;

pub use fit::{fit_line, fit_line_robust, WallCluster};

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::geom2d::{is_simple_polygon, point_segment_distance, segment_distance, signed_area};
use crate::types::{intersect_lines, Label, Line2D, UnitVec2, Vec2, NOISE};

pub const DEFAULT_THETA_MERGE_DEG: f64 = 30.0;
pub const DEFAULT_E_MERGE: f64 = 0.3;
pub const DEFAULT_MIN_WALL_LENGTH: f64 = 0.75;

/// Closed CCW room outline.
#[derive(Debug, Clone, PartialEq)]
pub struct Perimeter {
    pub corners: Vec<Vec2>,
}

impl Perimeter {
    /// Validates ≥3 corners and non-degenerate walls; keeps the given order.
    pub fn new(corners: Vec<Vec2>) -> Result<Self> {
        if corners.len() < 3 {
            return Err(Error::DegeneratePolygon(format!("{} corners", corners.len())));
        }
        let n = corners.len();
        for i in 0..n {
            if (corners[(i + 1) % n] - corners[i]).norm() <= 1e-6 {
                return Err(Error::DegeneratePolygon(format!("wall {i} has zero length")));
            }
        }
        Ok(Self { corners })
    }

    pub fn walls(&self) -> Vec<(Vec2, Vec2)> {
        let n = self.corners.len();
        (0..n)
            .map(|i| (self.corners[i], self.corners[(i + 1) % n]))
            .collect()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.corners).abs()
    }

    pub fn is_simple(&self) -> bool {
        is_simple_polygon(&self.corners)
    }
}

/// Node distance used for tour ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TourMetric {
    /// Gap between the clusters' inlier extents along their lines.
    #[default]
    ExtentGap,
    /// Distance between cluster medians.
    Median,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerimeterParams {
    pub theta_merge_deg: f64,
    pub e_merge: f64,
    pub snap: bool,
    pub tour_metric: TourMetric,
    /// Merged clusters whose inlier extent is shorter than this are dropped
    /// (corner blobs with mixed normals).
    pub min_wall_length: f64,
}

impl Default for PerimeterParams {
    fn default() -> Self {
        Self {
            theta_merge_deg: DEFAULT_THETA_MERGE_DEG,
            e_merge: DEFAULT_E_MERGE,
            snap: true,
            tour_metric: TourMetric::default(),
            min_wall_length: DEFAULT_MIN_WALL_LENGTH,
        }
    }
}

/// Undirected angle between line normals, radians in [0, π/2].
fn normal_angle_between(a: &Line2D, b: &Line2D) -> f64 {
    a.normal.dot(&b.normal).abs().min(1.0).acos()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Unites clusters whose normals differ by less than `theta_merge_deg` and
/// whose larger mean cross point-to-line distance is below `e_merge` (the
/// relation is closed transitively), then refits each group. Groups come out
/// ordered by their lowest member index.
pub fn merge_clusters(
    clusters: &[WallCluster],
    theta_merge_deg: f64,
    e_merge: f64,
) -> Result<Vec<WallCluster>> {
    merge_groups(clusters, theta_merge_deg, e_merge)
        .iter()
        .map(|members| merge_members(clusters, members))
        .collect()
}

/// Member indices of each merged group, ordered by lowest member.
pub fn merge_groups(clusters: &[WallCluster], theta_merge_deg: f64, e_merge: f64) -> Vec<Vec<usize>> {
    let n = clusters.len();
    let theta = theta_merge_deg.to_radians();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&clusters[i], &clusters[j]);
            if normal_angle_between(&a.line, &b.line) >= theta {
                continue;
            }
            let err = a.mean_distance_to(&b.line).max(b.mean_distance_to(&a.line));
            if err < e_merge {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn merge_members(clusters: &[WallCluster], members: &[usize]) -> Result<WallCluster> {
    if members.len() == 1 {
        return Ok(clusters[members[0]].clone());
    }
    let pts: Vec<Vec2> = members
        .iter()
        .flat_map(|&m| clusters[m].points2d.iter().copied())
        .collect();
    WallCluster::new(pts)
}

/// Length of a cluster's inlier extent.
pub fn extent_length(c: &WallCluster) -> f64 {
    let (a, b) = c.extent();
    (b - a).norm()
}

pub fn cluster_distance_matrix(clusters: &[WallCluster], metric: TourMetric) -> Vec<Vec<f64>> {
    match metric {
        TourMetric::Median => {
            let m: Vec<Vec2> = clusters.iter().map(|c| c.median).collect();
            tour::euclidean_matrix(&m)
        }
        TourMetric::ExtentGap => {
            let ext: Vec<(Vec2, Vec2)> = clusters.iter().map(|c| c.extent()).collect();
            ext.iter()
                .map(|a| ext.iter().map(|b| segment_distance(&a.0, &a.1, &b.0, &b.1)).collect())
                .collect()
        }
    }
}

/// Tour over clusters starting at cluster 0.
pub fn order_clusters(clusters: &[WallCluster], metric: TourMetric) -> Result<Vec<usize>> {
    if clusters.len() < 3 {
        return Err(Error::TooFewClusters(clusters.len()));
    }
    Ok(tour::solve_tour(&cluster_distance_matrix(clusters, metric)))
}

/// Size-weighted axial mean of the cluster orientations, modulo 90°, radians
/// in (−π/4, π/4].
pub fn dominant_angle(clusters: &[WallCluster]) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for cl in clusters {
        let phi = cl.line.normal_angle();
        let w = cl.len() as f64;
        s += w * (4.0 * phi).sin();
        c += w * (4.0 * phi).cos();
    }
    s.atan2(c) / 4.0
}

/// `phi` moved to the nearest of `theta + m·90°`.
pub fn snap_angle(phi: f64, theta: f64) -> f64 {
    theta + FRAC_PI_2 * ((phi - theta) / FRAC_PI_2).round()
}

/// Snaps every cluster normal to the axis pair at `theta`; offsets are refit
/// over each cluster's inliers.
pub fn snap_to(clusters: &[WallCluster], theta: f64) -> Vec<WallCluster> {
    clusters
        .iter()
        .map(|c| {
            let phi = snap_angle(c.line.normal_angle(), theta);
            c.with_normal(UnitVec2::new_normalize(Vec2::new(phi.cos(), phi.sin())))
        })
        .collect()
}

/// Manhattan snap around the estimated dominant angle. Disabled passes
/// clusters through.
pub fn snap_manhattan(clusters: &[WallCluster], enabled: bool) -> Vec<WallCluster> {
    if !enabled || clusters.is_empty() {
        return clusters.to_vec();
    }
    snap_to(clusters, dominant_angle(clusters))
}

/// Corners of consecutive tour clusters. Parallel neighbors are joined by a
/// perpendicular connector through the end of the first cluster's extent
/// nearest the second, contributing two corners.
pub fn close_perimeter(clusters: &[WallCluster]) -> Result<Perimeter> {
    let n = clusters.len();
    if n < 3 {
        return Err(Error::TooFewClusters(n));
    }
    let mut corners = Vec::with_capacity(n + 2);
    for i in 0..n {
        let a = &clusters[i];
        let b = &clusters[(i + 1) % n];
        match intersect_lines(&a.line, &b.line) {
            Ok(p) => corners.push(p),
            Err(_) => {
                let (e0, e1) = a.extent();
                let (f0, f1) = b.extent();
                let d0 = segment_distance(&e0, &e0, &f0, &f1);
                let d1 = segment_distance(&e1, &e1, &f0, &f1);
                let end = if (d0 - d1).abs() > 1e-9 {
                    if d1 < d0 {
                        e1
                    } else {
                        e0
                    }
                } else {
                    // Tie: the end away from the previous wall is the free one.
                    let (g0, g1) = clusters[(i + n - 1) % n].extent();
                    let p0 = segment_distance(&e0, &e0, &g0, &g1);
                    let p1 = segment_distance(&e1, &e1, &g0, &g1);
                    if p1 > p0 {
                        e1
                    } else {
                        e0
                    }
                };
                let connector = Line2D::through(UnitVec2::new_normalize(a.line.direction()), &end);
                corners.push(intersect_lines(&a.line, &connector)?);
                corners.push(intersect_lines(&connector, &b.line)?);
            }
        }
    }
    let corners = simplify(corners);
    if corners.len() < 3 {
        return Err(Error::DegenerateLayout(format!("only {} corners", corners.len())));
    }
    if !is_simple_polygon(&corners) {
        return Err(Error::DegenerateLayout("perimeter self-intersects".into()));
    }
    let mut corners = corners;
    if signed_area(&corners) < 0.0 {
        corners.reverse();
    }
    Perimeter::new(corners).map_err(|e| Error::DegenerateLayout(e.to_string()))
}

/// Drops repeated corners and corners where the outline goes straight on.
fn simplify(mut corners: Vec<Vec2>) -> Vec<Vec2> {
    loop {
        let n = corners.len();
        if n < 3 {
            return corners;
        }
        let drop = (0..n).find(|&i| {
            let prev = corners[(i + n - 1) % n];
            let cur = corners[i];
            let next = corners[(i + 1) % n];
            if (cur - prev).norm() <= 1e-9 {
                return true;
            }
            let u = cur - prev;
            let v = next - cur;
            u.perp(&v).abs() <= 1e-12 * u.norm() * v.norm() && u.dot(&v) > 0.0
        });
        match drop {
            Some(i) => {
                corners.remove(i);
            }
            None => return corners,
        }
    }
}

/// Groups XY points by label (NOISE skipped) into clusters, ascending label.
pub fn clusters_from_labels(xy: &[Vec2], labels: &[Label]) -> Result<Vec<WallCluster>> {
    if xy.len() != labels.len() {
        return Err(Error::LengthMismatch(xy.len(), labels.len()));
    }
    let mut groups: BTreeMap<Label, Vec<Vec2>> = BTreeMap::new();
    for (p, &l) in xy.iter().zip(labels) {
        if l != NOISE {
            groups.entry(l).or_default().push(*p);
        }
    }
    Ok(groups
        .into_values()
        .filter_map(|pts| WallCluster::new(pts).ok())
        .collect())
}

/// Merged groups that survive the wall filters, as (member indices, cluster),
/// in merge order. A group is dropped when its extent is shorter than
/// `min_wall_length`, or when at least half of its points lie within
/// `e_merge` of a larger kept wall's extent (corner blobs whose mixed normals
/// kept them apart from both walls).
fn merged_walls(clusters: &[WallCluster], params: &PerimeterParams) -> Result<Vec<(Vec<usize>, WallCluster)>> {
    let mut cand = Vec::new();
    for members in merge_groups(clusters, params.theta_merge_deg, params.e_merge) {
        let c = merge_members(clusters, &members)?;
        if extent_length(&c) >= params.min_wall_length {
            cand.push((members, c));
        }
    }
    let mut by_size: Vec<usize> = (0..cand.len()).collect();
    by_size.sort_by(|&a, &b| cand[b].1.len().cmp(&cand[a].1.len()).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in by_size {
        let c = &cand[i].1;
        let covered = c
            .points2d
            .iter()
            .filter(|p| {
                kept.iter().any(|&j| {
                    let (a, b) = cand[j].1.extent();
                    point_segment_distance(p, &a, &b) < params.e_merge
                })
            })
            .count();
        if 2 * covered < c.len() {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    Ok(kept.into_iter().map(|i| cand[i].clone()).collect())
}

/// Merge, drop short walls, order, snap and close.
pub fn fit_perimeter(clusters: &[WallCluster], params: &PerimeterParams) -> Result<Perimeter> {
    let merged: Vec<WallCluster> = merged_walls(clusters, params)?.into_iter().map(|(_, c)| c).collect();
    let order = order_clusters(&merged, params.tour_metric)?;
    let ordered: Vec<WallCluster> = order.iter().map(|&i| merged[i].clone()).collect();
    close_perimeter(&snap_manhattan(&ordered, params.snap))
}

/// Merged wall index for every point (NOISE where unassigned or dropped);
/// follows the same merge and filter as [`fit_perimeter`] on clusters built
/// by [`clusters_from_labels`]. Used to compare labelings after merging.
pub fn merged_labels(xy: &[Vec2], labels: &[Label], params: &PerimeterParams) -> Result<Vec<Label>> {
    if xy.len() != labels.len() {
        return Err(Error::LengthMismatch(xy.len(), labels.len()));
    }
    let mut groups: BTreeMap<Label, Vec<Vec2>> = BTreeMap::new();
    for (p, &l) in xy.iter().zip(labels) {
        if l != NOISE {
            groups.entry(l).or_default().push(*p);
        }
    }
    let mut clusters = Vec::new();
    let mut ids = Vec::new();
    for (id, pts) in groups {
        if let Ok(c) = WallCluster::new(pts) {
            clusters.push(c);
            ids.push(id);
        }
    }
    let mut wall_of: BTreeMap<Label, Label> = BTreeMap::new();
    for (w, (members, _)) in merged_walls(&clusters, params)?.iter().enumerate() {
        for &m in members {
            wall_of.insert(ids[m], w as Label);
        }
    }
    Ok(labels
        .iter()
        .map(|l| wall_of.get(l).copied().unwrap_or(NOISE))
        .collect())
}
