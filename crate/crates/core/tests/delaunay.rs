use perimkit::hull::{alpha_contour, delaunay, surviving_triangles};
use perimkit::Vec2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|_| Vec2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
        .collect()
}

#[test]
fn random_clouds_are_delaunay_and_planar() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..100 {
        let n = rng.random_range(3..=200);
        let pts = random_cloud(&mut rng, n);
        let tri = delaunay(&pts).unwrap();
        assert_eq!(tri.empty_circle_violations(1e-9), 0, "case {case}");
        assert_eq!(tri.euler_characteristic(), 2, "case {case}");
        for t in &tri.triangles {
            let [a, b, c] = t.map(|i| tri.vertices[i]);
            assert!((b - a).perp(&(c - a)) > 0.0, "case {case}: triangle not CCW");
        }
    }
}

#[test]
fn integer_grid_is_handled() {
    // Cocircular everywhere; any diagonal choice is valid.
    let pts: Vec<Vec2> = (0..15)
        .flat_map(|i| (0..15).map(move |j| Vec2::new(i as f64, j as f64)))
        .collect();
    let tri = delaunay(&pts).unwrap();
    assert_eq!(tri.triangles.len(), 2 * 14 * 14);
    assert_eq!(tri.empty_circle_violations(1e-9), 0);
    assert_eq!(tri.euler_characteristic(), 2);
}

#[test]
fn long_collinear_runs_are_fast() {
    // Noise-free walls: thousands of exactly collinear points per side.
    let mut pts = Vec::new();
    for i in 0..20_000 {
        let t = i as f64 * 0.001;
        pts.extend([
            Vec2::new(t, 0.0),
            Vec2::new(t, 5.0),
            Vec2::new(0.0, t * 0.25),
            Vec2::new(20.0, t * 0.25),
        ]);
    }
    let start = std::time::Instant::now();
    let tri = delaunay(&pts).unwrap();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(tri.euler_characteristic(), 2);
}

#[test]
fn input_order_only_changes_indices() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts = random_cloud(&mut rng, 120);
    let rev: Vec<Vec2> = pts.iter().rev().copied().collect();
    let (a, b) = (delaunay(&pts).unwrap(), delaunay(&rev).unwrap());
    assert_eq!(a.triangles.len(), b.triangles.len());
    assert_eq!(a.edges().len(), b.edges().len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn alpha_survivors_are_monotone(
        pts in prop::collection::vec((0.0f64..8.0, 0.0f64..8.0), 3..120),
        a1 in 0.05f64..3.0,
        a2 in 0.05f64..3.0,
    ) {
        let pts: Vec<Vec2> = pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
        let Ok(tri) = delaunay(&pts) else { return Ok(()); };
        let (hi, lo) = if a1 >= a2 { (a1, a2) } else { (a2, a1) };
        let strict = surviving_triangles(&tri, hi);
        let loose = surviving_triangles(&tri, lo);
        prop_assert!(strict.iter().all(|t| loose.binary_search(t).is_ok()));
    }

    #[test]
    fn contour_vertices_come_from_the_input(
        pts in prop::collection::vec((0.0f64..8.0, 0.0f64..8.0), 3..80),
    ) {
        let pts: Vec<Vec2> = pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
        let Ok(tri) = delaunay(&pts) else { return Ok(()); };
        if let Ok(c) = alpha_contour(&tri, 0.5) {
            for line in &c.polylines {
                prop_assert!(line.iter().all(|p| pts.contains(p)));
            }
        }
    }
}
