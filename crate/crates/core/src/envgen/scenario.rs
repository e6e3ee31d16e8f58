use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EnvError, ObstacleSpec};
use crate::frontend::{plan_jps, JpsConfig, PlannerBudget};
use crate::world::{planning_grid, Bounds, PointCloud, QuadrotorSpec, Vec3, VoxelGrid};

pub const DEFAULT_SAMPLE_ATTEMPTS: usize = 10_000;

/// Search budget used when filtering; generous so only true disconnection fails.
const FILTER_TIMEOUT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Maze,
    Obstacle,
    Real,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Maze => "maze",
            Family::Obstacle => "obstacle",
            Family::Real => "real",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub family: Family,
    pub spec_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioCase {
    pub cloud: PointCloud,
    pub bounds: Bounds,
    pub start: Vec3,
    pub goal: Vec3,
    pub provenance: Provenance,
}

/// JSON sidecar written next to each generated cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMeta {
    pub family: Family,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape_spec: Option<ObstacleSpec>,
    pub bounds: Bounds,
    pub start: Vec3,
    pub goal: Vec3,
    #[serde(default)]
    pub spec_hash: String,
}

/// Short stable digest of a spec's JSON form.
pub fn spec_hash<T: Serialize>(spec: &T) -> String {
    let bytes = serde_json::to_vec(spec).expect("specs serialize");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

/// Keeps points inside the half-open bounds, shifted so `bounds.min` is the origin.
pub fn crop(cloud: &PointCloud, bounds: &Bounds) -> PointCloud {
    let o = bounds.min();
    let pts = cloud
        .points()
        .iter()
        .filter(|p| bounds.contains_half_open(p))
        .map(|p| p - o)
        .collect();
    PointCloud::new(pts).expect("cropped points stay finite")
}

/// Rejection-samples two free cell centers at least `min_separation` apart.
pub fn sample_start_goal(
    grid: &VoxelGrid,
    min_separation: f64,
    seed: u64,
) -> Result<(Vec3, Vec3), EnvError> {
    sample_start_goal_with(grid, min_separation, seed, DEFAULT_SAMPLE_ATTEMPTS)
}

pub fn sample_start_goal_with(
    grid: &VoxelGrid,
    min_separation: f64,
    seed: u64,
    attempts: usize,
) -> Result<(Vec3, Vec3), EnvError> {
    let free: Vec<usize> = (0..grid.len()).filter(|&i| !grid.occupancy()[i]).collect();
    if free.len() < 2 {
        return Err(EnvError::InfeasibleSampling { attempts: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let a = free[rng.random_range(0..free.len())];
        let b = free[rng.random_range(0..free.len())];
        if a == b {
            continue;
        }
        let s = grid.center(grid.cell_of_linear(a));
        let g = grid.center(grid.cell_of_linear(b));
        if (g - s).norm() >= min_separation {
            return Ok((s, g));
        }
    }
    Err(EnvError::InfeasibleSampling { attempts })
}

/// True iff jump point search connects start and goal on the inflated planning grid.
pub fn filter_feasible(case: &ScenarioCase, quad: &QuadrotorSpec, inflation: f64) -> bool {
    let Ok(grid) = planning_grid(&case.cloud, case.bounds, quad, inflation) else {
        return false;
    };
    grid_feasible(&grid, case.start, case.goal)
}

pub fn grid_feasible(grid: &VoxelGrid, start: Vec3, goal: Vec3) -> bool {
    let budget = PlannerBudget {
        timeout: FILTER_TIMEOUT,
        ..PlannerBudget::default()
    };
    plan_jps(grid, start, goal, &budget, &JpsConfig::default()).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_translates_and_filters() {
        let cloud = PointCloud::new(vec![
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(2.0, 1.0, 1.0),
            Vec3::new(5.0, 5.0, 5.0),
        ])
        .unwrap();
        let b = Bounds::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 2.0, 2.0)).unwrap();
        let c = crop(&cloud, &b);
        assert_eq!(c.points(), &[Vec3::new(0.0, 1.0, 1.0)]);
        let far = Bounds::new(Vec3::new(10.0, 10.0, 10.0), Vec3::new(11.0, 11.0, 11.0)).unwrap();
        assert!(crop(&cloud, &far).is_empty());
    }

    #[test]
    fn forced_pair_is_found() {
        let b = Bounds::from_extent(16.0, 1.0, 1.0).unwrap();
        let mut g = VoxelGrid::new(b, 1.0).unwrap();
        for i in 1..15 {
            g.set_occupied([i, 0, 0], true);
        }
        let (s, t) = sample_start_goal(&g, 10.0, 4).unwrap();
        let mut pair = [s.x, t.x];
        pair.sort_by(f64::total_cmp);
        assert_eq!(pair, [0.5, 15.5]);
        assert!(matches!(
            sample_start_goal(&g, 20.0, 4),
            Err(EnvError::InfeasibleSampling { .. })
        ));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ObstacleSpec::default();
        let mut b = ObstacleSpec::default();
        assert_eq!(spec_hash(&a), spec_hash(&b));
        b.seed += 1;
        assert_ne!(spec_hash(&a), spec_hash(&b));
        assert_eq!(spec_hash(&a).len(), 16);
    }

    #[test]
    fn meta_round_trip() {
        let m = CaseMeta {
            family: Family::Maze,
            seed: 9,
            p: Some(0.1),
            shape_spec: None,
            bounds: Bounds::default(),
            start: Vec3::new(1.0, 1.0, 2.5),
            goal: Vec3::new(19.0, 9.0, 2.5),
            spec_hash: "ab".into(),
        };
        let j = serde_json::to_string(&m).unwrap();
        assert!(j.contains("\"family\":\"maze\"") && !j.contains("shape_spec"));
        assert_eq!(serde_json::from_str::<CaseMeta>(&j).unwrap(), m);
    }

    #[test]
    fn empty_map_is_feasible_and_wall_is_not() {
        let quad = QuadrotorSpec::default();
        let mut case = ScenarioCase {
            cloud: PointCloud::empty(),
            bounds: Bounds::from_extent(6.0, 3.0, 2.0).unwrap(),
            start: Vec3::new(0.55, 1.55, 1.05),
            goal: Vec3::new(5.45, 1.55, 1.05),
            provenance: Provenance {
                family: Family::Obstacle,
                spec_hash: String::new(),
                seed: 0,
            },
        };
        assert!(filter_feasible(&case, &quad, 0.3));
        let mut wall = Vec::new();
        for j in 0..=60 {
            for k in 0..=40 {
                wall.push(Vec3::new(3.0, j as f64 * 0.05, k as f64 * 0.05));
            }
        }
        case.cloud = PointCloud::new(wall).unwrap();
        assert!(!filter_feasible(&case, &quad, 0.3));
    }
}
