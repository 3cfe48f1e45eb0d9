use nalgebra::DMatrix;
use rayon::prelude::*;

use super::SoftAssignment;
use crate::error::{Error, Result};
use crate::types::{PointCloud, UnitVec3, Vec3};

/// Pairwise plane-compatibility term:
/// `(xi − xj)·ni + (xj − xi)·nj`. Zero for two points on a common plane with
/// that plane's normal; large across distinct walls.
pub fn pair_term(xi: &Vec3, ni: &UnitVec3, xj: &Vec3, nj: &UnitVec3) -> f64 {
    (xi - xj).dot(ni) + (xj - xi).dot(nj)
}

/// Form of the reject-class regularizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regularizer {
    /// `mean_i Σ_{a<k} −ln p_ia`, the objective as written.
    #[default]
    PerClass,
    /// `mean_i −ln Σ_{a<k} p_ia`: penalizes only the reject-class mass.
    AnyPlane,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    pub cluster: f64,
    pub reg: f64,
    pub total: f64,
}

/// Dense `|D|` over all point pairs with a zero diagonal.
#[derive(Debug, Clone)]
pub struct PairMatrix {
    s: DMatrix<f64>,
}

impl PairMatrix {
    pub fn new(cloud: &PointCloud) -> Result<Self> {
        let normals = cloud.normals.as_ref().ok_or(Error::MissingNormals)?;
        let pts = &cloud.points;
        let n = pts.len();
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                (0..n)
                    .map(|i| {
                        if i == j {
                            0.0
                        } else {
                            pair_term(&pts[i], &normals[i], &pts[j], &normals[j]).abs()
                        }
                    })
                    .collect()
            })
            .collect();
        let s = DMatrix::from_iterator(n, n, cols.into_iter().flatten());
        Ok(Self { s })
    }

    pub fn len(&self) -> usize {
        self.s.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.s.nrows() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    fn pair_count(&self) -> f64 {
        let n = self.len() as f64;
        (n * (n - 1.0) / 2.0).max(1.0)
    }
}

fn check_dims(pairs: &PairMatrix, assign: &SoftAssignment) -> Result<()> {
    if pairs.len() != assign.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} points vs {} assignment rows",
            pairs.len(),
            assign.len()
        )));
    }
    Ok(())
}

fn logsumexp(row: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = row.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + row.map(|z| (z - m).exp()).sum::<f64>().ln()
}

fn reg_value(assign: &SoftAssignment, reg: Regularizer) -> f64 {
    let k = assign.k();
    let n = assign.len();
    let z = assign.logits();
    let mut total = 0.0;
    for i in 0..n {
        let row = z.row(i);
        let lse_all = logsumexp(row.iter().copied());
        total += match reg {
            Regularizer::PerClass => (0..k).map(|a| lse_all - row[a]).sum::<f64>(),
            Regularizer::AnyPlane => lse_all - logsumexp(row.iter().take(k).copied()),
        };
    }
    total / n as f64
}

/// Cluster term, regularizer and total. `L_cluster` is the mean over unordered
/// pairs of `Σ_{a<k} p_ia p_ja · |D_ij|`.
pub fn loss_with(
    pairs: &PairMatrix,
    assign: &SoftAssignment,
    beta: f64,
    reg: Regularizer,
) -> Result<LossTerms> {
    check_dims(pairs, assign)?;
    let k = assign.k();
    let q = assign.probs().columns(0, k).into_owned();
    let sq = pairs.matrix() * &q;
    let cluster = q.component_mul(&sq).sum() / (2.0 * pairs.pair_count());
    let reg = reg_value(assign, reg);
    Ok(LossTerms {
        cluster,
        reg,
        total: cluster + beta * reg,
    })
}

/// The objective with the regularizer as written.
pub fn loss(cloud: &PointCloud, assign: &SoftAssignment, beta: f64) -> Result<LossTerms> {
    loss_with(&PairMatrix::new(cloud)?, assign, beta, Regularizer::PerClass)
}

/// Analytic gradient of [`loss_with`]'s total with respect to the logits.
pub fn loss_gradient_with(
    pairs: &PairMatrix,
    assign: &SoftAssignment,
    beta: f64,
    reg: Regularizer,
) -> Result<DMatrix<f64>> {
    check_dims(pairs, assign)?;
    let k = assign.k();
    let n = assign.len();
    let p = assign.probs();
    let q = p.columns(0, k).into_owned();
    // dL/dq = S Q / M; the reject column gets no cluster gradient.
    let sq = pairs.matrix() * &q / pairs.pair_count();
    let z = assign.logits();
    let mut grad = DMatrix::zeros(n, k + 1);
    let inv_n = 1.0 / n as f64;
    for i in 0..n {
        let dot: f64 = (0..k).map(|a| p[(i, a)] * sq[(i, a)]).sum();
        for a in 0..k {
            grad[(i, a)] = p[(i, a)] * (sq[(i, a)] - dot);
        }
        grad[(i, k)] = -p[(i, k)] * dot;
        if beta == 0.0 {
            continue;
        }
        match reg {
            Regularizer::PerClass => {
                for b in 0..=k {
                    let direct = if b < k { -1.0 } else { 0.0 };
                    grad[(i, b)] += beta * inv_n * (direct + k as f64 * p[(i, b)]);
                }
            }
            Regularizer::AnyPlane => {
                // p_ib / s_i with s_i = Σ_{a<k} p_ia, via log-space for stability.
                let row = z.row(i);
                let lse_k = logsumexp(row.iter().take(k).copied());
                for b in 0..k {
                    let ratio = (row[b] - lse_k).exp();
                    grad[(i, b)] += beta * inv_n * (p[(i, b)] - ratio);
                }
                grad[(i, k)] += beta * inv_n * p[(i, k)];
            }
        }
    }
    Ok(grad)
}

pub fn loss_gradient(cloud: &PointCloud, assign: &SoftAssignment, beta: f64) -> Result<DMatrix<f64>> {
    loss_gradient_with(&PairMatrix::new(cloud)?, assign, beta, Regularizer::PerClass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(x: f64, y: f64, z: f64) -> UnitVec3 {
        UnitVec3::new_normalize(Vec3::new(x, y, z))
    }

    #[test]
    fn pair_term_examples() {
        let x = Vec3::new(1.0, 2.0, 3.0);
        let n = unit(0.3, 0.4, 0.5);
        assert_eq!(pair_term(&x, &n, &x, &n), 0.0);
        let up = unit(0.0, 0.0, 1.0);
        let d = pair_term(&Vec3::new(0.0, 0.0, 0.0), &up, &Vec3::new(3.0, -2.0, 0.0), &up);
        assert_eq!(d, 0.0);
        // Opposing walls 4 m apart with inward normals.
        let ni = unit(1.0, 0.0, 0.0);
        let nj = unit(-1.0, 0.0, 0.0);
        let xi = Vec3::new(0.0, 1.0, 1.0);
        let xj = Vec3::new(4.0, 1.0, 1.0);
        // xi − xj = −4·ni, so D = −2d; the loss uses |D| = 8.
        assert_eq!(pair_term(&xi, &ni, &xj, &nj), -8.0);
    }

    #[test]
    fn uniform_literal_regularizer() {
        let k = 8;
        let cloud = PointCloud::new(vec![Vec3::zeros(), Vec3::x()])
            .with_normals(vec![Vec3::z_axis(); 2])
            .unwrap();
        let a = SoftAssignment::from_logits(DMatrix::zeros(2, k + 1), k).unwrap();
        let l = loss(&cloud, &a, 1.0).unwrap();
        assert!((l.reg - 8.0 * 9f64.ln()).abs() < 1e-12);
        assert!((l.reg - 17.5778).abs() < 1e-4);
        assert_eq!(l.cluster, 0.0);
    }

    #[test]
    fn separated_one_hot_rows_have_tiny_cluster_loss() {
        let cloud = PointCloud::new(vec![Vec3::zeros(), Vec3::new(4.0, 0.0, 0.0)])
            .with_normals(vec![Vec3::x_axis(), -Vec3::x_axis()])
            .unwrap();
        let mut z = DMatrix::zeros(2, 3);
        z[(0, 0)] = 20.0;
        z[(1, 1)] = 20.0;
        let a = SoftAssignment::from_logits(z, 2).unwrap();
        let l = loss(&cloud, &a, 0.0).unwrap();
        assert!(l.cluster < 1e-6 * 8.0);
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (PointCloud, SoftAssignment) {
        let pts: Vec<Vec3> = (0..n)
            .map(|_| Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(0.0..2.0)))
            .collect();
        let normals: Vec<UnitVec3> = (0..n)
            .map(|_| unit(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let z = DMatrix::from_fn(n, k + 1, |_, _| rng.random_range(-2.0..2.0));
        let cloud = PointCloud::new(pts).with_normals(normals).unwrap();
        (cloud, SoftAssignment::from_logits(z, k).unwrap())
    }

    fn fd_error(cloud: &PointCloud, a: &SoftAssignment, beta: f64, reg: Regularizer) -> f64 {
        let pairs = PairMatrix::new(cloud).unwrap();
        let g = loss_gradient_with(&pairs, a, beta, reg).unwrap();
        let h = 1e-5;
        let mut num = DMatrix::zeros(g.nrows(), g.ncols());
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let mut zp = a.logits().clone();
                zp[(i, j)] += h;
                let mut zm = a.logits().clone();
                zm[(i, j)] -= h;
                let lp = loss_with(&pairs, &SoftAssignment::from_logits(zp, a.k()).unwrap(), beta, reg).unwrap();
                let lm = loss_with(&pairs, &SoftAssignment::from_logits(zm, a.k()).unwrap(), beta, reg).unwrap();
                num[(i, j)] = (lp.total - lm.total) / (2.0 * h);
            }
        }
        (&g - &num).amax() / num.amax().max(1e-300)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for reg in [Regularizer::PerClass, Regularizer::AnyPlane] {
            let (cloud, a) = random_instance(&mut rng, 12, 3);
            let err = fd_error(&cloud, &a, 1.0, reg);
            assert!(err < 1e-5, "{reg:?}: {err}");
        }
    }

    #[test]
    fn single_plane_without_regularizer_has_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<Vec3> = (0..10).map(|_| Vec3::new(rng.random(), rng.random(), 0.0)).collect();
        let cloud = PointCloud::new(pts).with_normals(vec![Vec3::z_axis(); 10]).unwrap();
        let z = DMatrix::from_fn(10, 4, |_, _| rng.random_range(-1.0..1.0));
        let a = SoftAssignment::from_logits(z, 3).unwrap();
        let g = loss_gradient(&cloud, &a, 0.0).unwrap();
        assert!(g.amax() == 0.0);
    }

    #[test]
    fn mirror_points_get_mirror_gradients() {
        // Two opposing walls x = ±2, points mirrored through x = 0.
        let mut pts = Vec::new();
        let mut normals = Vec::new();
        for i in 0..4 {
            let y = i as f64 * 0.5;
            pts.push(Vec3::new(-2.0, y, 1.0));
            normals.push(Vec3::x_axis());
            pts.push(Vec3::new(2.0, y, 1.0));
            normals.push(-Vec3::x_axis());
        }
        let cloud = PointCloud::new(pts).with_normals(normals).unwrap();
        let a = SoftAssignment::from_logits(DMatrix::zeros(8, 3), 2).unwrap();
        let g = loss_gradient(&cloud, &a, 1.0).unwrap();
        for i in 0..4 {
            for c in 0..3 {
                assert!((g[(2 * i, c)] - g[(2 * i + 1, c)]).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn pair_term_is_symmetric(a in prop::array::uniform3(-5.0f64..5.0), b in prop::array::uniform3(-5.0f64..5.0),
                                  na in prop::array::uniform3(-1.0f64..1.0), nb in prop::array::uniform3(-1.0f64..1.0)) {
            prop_assume!(Vec3::from(na).norm() > 0.1 && Vec3::from(nb).norm() > 0.1);
            let (xa, xb) = (Vec3::from(a), Vec3::from(b));
            let (ua, ub) = (UnitVec3::new_normalize(na.into()), UnitVec3::new_normalize(nb.into()));
            prop_assert_eq!(pair_term(&xa, &ua, &xb, &ub), pair_term(&xb, &ub, &xa, &ua));
        }

        #[test]
        fn pair_term_vanishes_in_plane(theta in 0.0f64..std::f64::consts::TAU, phi in 0.1f64..3.0, d in -5.0f64..5.0,
                                       u in prop::array::uniform4(-5.0f64..5.0)) {
            let n = Vec3::new(phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos());
            let nu = UnitVec3::new_normalize(n);
            let t1 = nu.cross(&Vec3::new(0.3, 0.5, 0.7)).normalize();
            let t2 = nu.cross(&t1);
            let xi = nu.into_inner() * d + t1 * u[0] + t2 * u[1];
            let xj = nu.into_inner() * d + t1 * u[2] + t2 * u[3];
            prop_assert!(pair_term(&xi, &nu, &xj, &nu).abs() < 1e-12);
        }

        #[test]
        fn loss_invariant_under_cluster_column_permutation(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (cloud, a) = random_instance(&mut rng, 8, 3);
            let z = a.logits();
            let perm = [2usize, 0, 1];
            let zp = DMatrix::from_fn(8, 4, |i, j| if j < 3 { z[(i, perm[j])] } else { z[(i, 3)] });
            let b = SoftAssignment::from_logits(zp, 3).unwrap();
            for reg in [Regularizer::PerClass, Regularizer::AnyPlane] {
                let pairs = PairMatrix::new(&cloud).unwrap();
                let la = loss_with(&pairs, &a, 1.0, reg).unwrap();
                let lb = loss_with(&pairs, &b, 1.0, reg).unwrap();
                prop_assert!((la.total - lb.total).abs() < 1e-12);
            }
        }
    }
}
