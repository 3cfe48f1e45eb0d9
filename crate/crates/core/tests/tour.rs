use perimkit::geom2d::segments_intersect;
use perimkit::perimeter::tour::{euclidean_matrix, exhaustive_tour, solve_tour, tour_length};
use perimkit::Vec2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn crossing_free(points: &[Vec2], tour: &[usize]) -> bool {
    let n = tour.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = (points[tour[i]], points[tour[(i + 1) % n]]);
            let (c, d) = (points[tour[j]], points[tour[(j + 1) % n]]);
            if segments_intersect(&a, &b, &c, &d) {
                return false;
            }
        }
    }
    true
}

fn is_permutation(tour: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    tour.len() == n && tour.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

fn convex_instance(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|_| {
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            let r = 3.0;
            Vec2::new(r * t.cos() * 1.4, r * t.sin())
        })
        .collect()
}

#[test]
fn convex_position_is_solved_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..100 {
        let n = 3 + case % 6;
        let pts = convex_instance(&mut rng, n);
        let d = euclidean_matrix(&pts);
        let t = solve_tour(&d);
        assert!(is_permutation(&t, n));
        let opt = exhaustive_tour(&d).1;
        assert!((tour_length(&d, &t) - opt).abs() < 1e-9, "case {case}: {} vs {opt}", tour_length(&d, &t));
        assert!(crossing_free(&pts, &t));
    }
}

#[test]
fn random_instances_within_five_percent() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 1.0;
    for case in 0..100 {
        let n = rng.random_range(4..=9);
        let pts: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
            .collect();
        let d = euclidean_matrix(&pts);
        let t = solve_tour(&d);
        let ratio = tour_length(&d, &t) / exhaustive_tour(&d).1;
        worst = worst.max(ratio);
        assert!(ratio <= 1.05, "case {case}: ratio {ratio}");
        assert!(crossing_free(&pts, &t), "case {case}: tour crosses itself");
    }
    eprintln!("worst 2-opt / optimum ratio: {worst:.4}");
}

#[test]
fn collinear_nodes_visit_in_order() {
    let pts: Vec<Vec2> = [0.0, 3.0, 1.0, 2.0].iter().map(|&x| Vec2::new(x, 0.0)).collect();
    let d = euclidean_matrix(&pts);
    let t = solve_tour(&d);
    assert!((tour_length(&d, &t) - 6.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn never_worse_than_nearest_neighbor(
        pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 2..30)
    ) {
        let pts: Vec<Vec2> = pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
        let d = euclidean_matrix(&pts);
        let nn = perimkit::perimeter::tour::nearest_neighbor_tour(&d);
        let t = solve_tour(&d);
        prop_assert!(is_permutation(&t, pts.len()));
        prop_assert!(tour_length(&d, &t) <= tour_length(&d, &nn) + 1e-9);
        prop_assert_eq!(t[0], 0);
    }
}
