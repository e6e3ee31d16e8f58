mod common;

use common::*;
use ecsbench_core::corridor::{build_corridor, simplify_path, verify_corridor};
use ecsbench_core::frontend::{plan_jps, polyline_length, segment_free, JpsConfig, Path};
use ecsbench_core::{PlannerBudget, VoxelGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn budget() -> PlannerBudget {
    PlannerBudget {
        timeout: 30.0,
        goal_threshold: 0.5,
    }
}

/// Random solvable (grid, path) pairs on unit cells.
fn cases(seed: u64, n: usize) -> Vec<(VoxelGrid, Path)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let dims = [
            rng.random_range(4..16),
            rng.random_range(4..16),
            rng.random_range(1..8),
        ];
        let fill = rng.random_range(0.05..0.35);
        let g = random_grid(&mut rng, dims, fill);
        let (Some(s), Some(t)) = (random_free(&mut rng, &g), random_free(&mut rng, &g)) else {
            continue;
        };
        if s == t || !connected(&g, s, t) {
            continue;
        }
        let p = plan_jps(
            &g,
            center(&g, s),
            center(&g, t),
            &budget(),
            &JpsConfig::default(),
        )
        .unwrap();
        out.push((g, p));
    }
    out
}

#[test]
fn corridors_verify_and_boxes_are_maximal() {
    for (i, (g, p)) in cases(1, 150).into_iter().enumerate() {
        let c = build_corridor(&p, &g).unwrap();
        let rep = verify_corridor(&c, &g, &p);
        assert!(rep.passed(), "case {i}: {rep:?}");
        assert_eq!(c.witnesses.len() + 1, c.len());
        for poly in &c.polytopes {
            let (lo, hi) = poly.as_box().unwrap();
            let (a, b) = box_cells(&g, lo, hi);
            assert!(
                box_is_maximal(&g, a, b),
                "case {i}: box {a:?}..{b:?} is not maximal"
            );
        }
        for (k, w) in c.witnesses.iter().enumerate() {
            assert!(c.polytopes[k].contains(w, 1e-9) && c.polytopes[k + 1].contains(w, 1e-9));
        }
    }
}

#[test]
fn simplification_keeps_endpoints_and_freedom() {
    for (g, p) in cases(2, 150) {
        let s = simplify_path(&p, &g);
        assert_eq!(s.start(), p.start());
        assert_eq!(s.end(), p.end());
        assert!(s.waypoints.len() <= p.waypoints.len());
        assert!(s.waypoints.iter().all(|w| p.waypoints.contains(w)));
        assert!(s
            .waypoints
            .windows(2)
            .all(|w| segment_free(&g, &w[0], &w[1])));
        assert!(polyline_length(&s.waypoints) <= polyline_length(&p.waypoints) + 1e-9);
        assert!(verify_corridor(&build_corridor(&s, &g).unwrap(), &g, &s).passed());
    }
}
