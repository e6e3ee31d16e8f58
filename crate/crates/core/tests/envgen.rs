mod common;

use common::*;
use ecsbench_core::envgen::{
    crop, filter_feasible, generate_obstacle_map, maze_layout, sample_start_goal, Family, MazeSpec,
    ObstacleSpec, Provenance, Range, ScenarioCase,
};
use ecsbench_core::world::{planning_grid, Bounds, PointCloud, QuadrotorSpec, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec(p: f64, seed: u64) -> MazeSpec {
    MazeSpec {
        p,
        cells_x: 5,
        cells_y: 5,
        seed,
        ..MazeSpec::default()
    }
}

#[test]
fn deleted_fraction_tracks_p() {
    let mut frac = 0.0;
    for seed in 0..1000 {
        let l = maze_layout(&spec(0.3, seed)).unwrap();
        frac += l.deleted_by_p as f64 / l.after_kruskal as f64;
    }
    frac /= 1000.0;
    assert!((frac - 0.3).abs() <= 0.03, "{frac}");
}

#[test]
fn expected_wall_count_decreases_with_p() {
    let mean = |p: f64| {
        (0..300)
            .map(|s| maze_layout(&spec(p, s)).unwrap().interior_wall_count() as f64)
            .sum::<f64>()
            / 300.0
    };
    let (a, b, c) = (mean(0.0), mean(0.5), mean(1.0));
    assert_eq!(a, 16.0);
    assert_eq!(c, 0.0);
    // Affine in p: the midpoint sits halfway, up to Monte-Carlo noise.
    assert!((b - 8.0).abs() < 0.5, "{b}");
}

#[test]
fn crop_matches_membership_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let pts: Vec<Vec3> = (0..500)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-5.0..5.0),
                )
            })
            .collect();
        let lo = Vec3::new(
            rng.random_range(-5.0..0.0),
            rng.random_range(-5.0..0.0),
            rng.random_range(-5.0..0.0),
        );
        let b = Bounds::new(lo, lo + Vec3::new(3.0, 4.0, 2.0)).unwrap();
        let expect: Vec<Vec3> = pts
            .iter()
            .filter(|p| (0..3).all(|k| p[k] >= b.min()[k] && p[k] < b.max()[k]))
            .map(|p| p - lo)
            .collect();
        assert_eq!(
            crop(&PointCloud::new(pts).unwrap(), &b).points(),
            &expect[..]
        );
    }
}

#[test]
fn thousand_start_goal_draws_hold_postconditions() {
    let b = Bounds::default();
    let map = generate_obstacle_map(
        &ObstacleSpec {
            seed: 4,
            ..ObstacleSpec::default()
        },
        &b,
    )
    .unwrap();
    let g = planning_grid(&map.cloud, b, &QuadrotorSpec::default(), 0.3).unwrap();
    for seed in 0..1000 {
        let (s, t) = sample_start_goal(&g, 10.0, seed).unwrap();
        assert!((t - s).norm() >= 10.0);
        for p in [s, t] {
            let c = g.cell_of(&p).unwrap();
            assert!(!g.is_occupied(c));
            assert!((g.center(c) - p).norm() < 1e-12);
        }
    }
}

fn small_map(rng: &mut ChaCha8Rng, b: &Bounds) -> ObstacleSpec {
    let mut s = ObstacleSpec::empty();
    s.seed = rng.random();
    s.boxes.count = rng.random_range(2..10);
    s.boxes.edge = Range::new(0.3, 0.95);
    s.cylinders.count = rng.random_range(0..4);
    s.cylinders.radius = Range::new(0.1, 0.4);
    s.cylinders.height = Range::new(0.5, b.extent().z);
    s.fill_interior = true;
    s
}

#[test]
fn filter_agrees_with_flood_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let b = Bounds::from_extent(4.0, 2.0, 1.0).unwrap();
    let quad = QuadrotorSpec::default();
    let (mut yes, mut no) = (0, 0);
    for i in 0..100 {
        let spec = small_map(&mut rng, &b);
        let cloud = generate_obstacle_map(&spec, &b).unwrap().cloud;
        let g = planning_grid(&cloud, b, &quad, 0.3).unwrap();
        let Ok((s, t)) = sample_start_goal(&g, 1.5, i) else {
            continue;
        };
        let case = ScenarioCase {
            cloud,
            bounds: b,
            start: s,
            goal: t,
            provenance: Provenance {
                family: Family::Obstacle,
                spec_hash: String::new(),
                seed: i,
            },
        };
        let cell = |p: &Vec3| g.cell_of(p).unwrap().map(|v| v as i64);
        let oracle = connected(&g, cell(&s), cell(&t));
        assert_eq!(filter_feasible(&case, &quad, 0.3), oracle, "map {i}");
        if oracle {
            yes += 1;
        } else {
            no += 1;
        }
    }
    assert!(
        yes > 10 && no > 5,
        "degenerate sample: {yes} feasible, {no} infeasible"
    );
}
