use crate::error::{Error, Result};
use crate::geom2d::{component_median, median_in_place};
use crate::types::{Line2D, UnitVec2, Vec2};

/// Total-least-squares line: the normal is the minor axis of the 2D
/// covariance and the line passes through the centroid.
pub fn fit_line(points: &[Vec2]) -> Result<Line2D> {
    if points.len() < 2 {
        return Err(Error::Degenerate("need at least 2 points".into()));
    }
    let c: Vec2 = points.iter().sum::<Vec2>() / points.len() as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    if sxx + syy <= 0.0 {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    // Major-axis angle of the scatter; the normal is perpendicular to it.
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let normal = UnitVec2::new_normalize(Vec2::new(-theta.sin(), theta.cos()));
    Ok(Line2D::through(normal, &c).canonical())
}

/// Iteratively trimmed TLS fit. Points farther than three robust standard
/// deviations (1.4826·MAD of the residuals) are dropped and the line refit
/// until the inlier set stops changing. Returns the line and inlier mask.
pub fn fit_line_robust(points: &[Vec2]) -> Result<(Line2D, Vec<bool>)> {
    let mut line = fit_line(points)?;
    let mut inliers = vec![true; points.len()];
    for _ in 0..20 {
        let res: Vec<f64> = points.iter().map(|p| line.distance(p)).collect();
        let thresh = (3.0 * 1.4826 * median_in_place(&mut res.clone())).max(1e-9);
        let next: Vec<bool> = res.iter().map(|&r| r <= thresh).collect();
        if next == inliers {
            break;
        }
        let subset: Vec<Vec2> = points
            .iter()
            .zip(&next)
            .filter(|(_, &k)| k)
            .map(|(p, _)| *p)
            .collect();
        match fit_line(&subset) {
            Ok(l) => {
                line = l;
                inliers = next;
            }
            Err(_) => break,
        }
    }
    Ok((line, inliers))
}

/// One wall hypothesis: its XY points and fitted line.
#[derive(Debug, Clone, PartialEq)]
pub struct WallCluster {
    pub points2d: Vec<Vec2>,
    pub line: Line2D,
    pub median: Vec2,
    /// Points used by the robust fit.
    pub inliers: Vec<bool>,
}

impl WallCluster {
    pub fn new(points2d: Vec<Vec2>) -> Result<Self> {
        let (line, inliers) = fit_line_robust(&points2d)?;
        let median = component_median(&points2d);
        Ok(Self {
            points2d,
            line,
            median,
            inliers,
        })
    }

    pub fn len(&self) -> usize {
        self.points2d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points2d.is_empty()
    }

    pub fn inlier_points(&self) -> impl Iterator<Item = &Vec2> {
        self.points2d
            .iter()
            .zip(&self.inliers)
            .filter(|(_, &k)| k)
            .map(|(p, _)| p)
    }

    /// Segment spanned by the inliers projected onto the line.
    pub fn extent(&self) -> (Vec2, Vec2) {
        let dir = self.line.direction();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in self.inlier_points() {
            let t = dir.dot(p);
            lo = lo.min(t);
            hi = hi.max(t);
        }
        let base = self.line.normal.into_inner() * self.line.offset;
        (base + dir * lo, base + dir * hi)
    }

    /// Mean perpendicular distance of this cluster's points to `line`.
    pub fn mean_distance_to(&self, line: &Line2D) -> f64 {
        self.points2d.iter().map(|p| line.distance(p)).sum::<f64>() / self.points2d.len() as f64
    }

    /// Replaces the line's normal, refitting the offset to the inlier mean.
    pub fn with_normal(&self, normal: UnitVec2) -> Self {
        let (sum, n) = self
            .inlier_points()
            .fold((0.0, 0usize), |(s, n), p| (s + normal.dot(p), n + 1));
        let mut out = self.clone();
        out.line = Line2D::new(normal, sum / n.max(1) as f64);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn exact_horizontal_line() {
        let pts: Vec<Vec2> = (0..10).map(|i| Vec2::new(i as f64, 3.0)).collect();
        let l = fit_line(&pts).unwrap();
        assert!((l.normal.into_inner() - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        assert!((l.offset - 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_points_define_the_line() {
        let a = Vec2::new(1.0, 2.0);
        let b = Vec2::new(4.0, -1.0);
        let l = fit_line(&[a, b]).unwrap();
        assert!(l.distance(&a) < 1e-12 && l.distance(&b) < 1e-12);
        assert!(fit_line(&[a, a]).is_err());
        assert!(fit_line(&[a]).is_err());
    }

    #[test]
    fn noisy_offset_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let pts: Vec<Vec2> = (0..1000)
            .map(|i| Vec2::new(i as f64 * 0.01, noise.sample(&mut rng)))
            .collect();
        let l = fit_line(&pts).unwrap();
        assert!(l.offset.abs() < 3.0 * 0.05 / 1000f64.sqrt());
    }

    #[test]
    fn robust_fit_ignores_a_perpendicular_stub() {
        let mut pts: Vec<Vec2> = (0..100).map(|i| Vec2::new(i as f64 * 0.05, 1.0)).collect();
        pts.extend((0..8).map(|i| Vec2::new(0.0, 1.0 + 0.05 * (i + 1) as f64)));
        let (l, inl) = fit_line_robust(&pts).unwrap();
        assert!((l.offset - 1.0).abs() < 1e-12);
        assert!(l.normal.x.abs() < 1e-12);
        assert_eq!(inl.iter().filter(|&&k| k).count(), 100);
    }
}
