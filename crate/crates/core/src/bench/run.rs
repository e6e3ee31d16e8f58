use std::time::Instant;

use rayon::prelude::*;

use super::stats::Summary;
use super::{BenchError, CaseResult, FamilyConfig, Status, SuiteConfig};
use crate::backend::{
    check_dynamic_feasibility, optimize_trajectory, BackendId, BoundaryState, Trajectory,
};
use crate::corridor::{build_corridor, simplify_path};
use crate::ecs::{ecs, EcsSignature};
use crate::envgen::{
    generate_maze, generate_obstacle_map, grid_feasible, maze_start_goal, sample_start_goal,
    spec_hash, EnvError, Family, ObstacleSpec, Provenance, ScenarioCase,
};
use crate::frontend::{plan, validate_path, FrontendId, PlanError};
use crate::world::{planning_grid, VoxelGrid};

/// Spacing of the final trajectory check (s).
const CHECK_DT: f64 = 0.01;
const CONTINUITY_TOL: f64 = 1e-6;

/// A case with its planning grid and signature, ready for the planner matrix.
#[derive(Debug, Clone)]
pub struct PreparedCase {
    pub id: String,
    pub case: ScenarioCase,
    pub grid: VoxelGrid,
    pub ecs: Option<EcsSignature>,
}

pub fn prepare_case(
    id: String,
    case: ScenarioCase,
    config: &SuiteConfig,
) -> Result<PreparedCase, BenchError> {
    let grid = planning_grid(&case.cloud, case.bounds, &config.quad, config.inflation)
        .map_err(EnvError::from)?;
    let ecs = ecs(&case.cloud, case.bounds, &config.quad).ok();
    Ok(PreparedCase {
        id,
        case,
        grid,
        ecs,
    })
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub config: SuiteConfig,
    /// Sorted by case id, then front-end, then back-end.
    pub results: Vec<CaseResult>,
    /// Successful trajectories keyed by [`CaseResult::key`].
    pub trajectories: Vec<(String, Trajectory)>,
    pub summary: Summary,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs one planner pair on an already prepared case.
pub fn run_case_on_grid(
    prep: &PreparedCase,
    fe: FrontendId,
    be: BackendId,
    config: &SuiteConfig,
) -> (CaseResult, Option<Trajectory>) {
    let case = &prep.case;
    let grid = &prep.grid;
    let mut r = CaseResult {
        case_id: prep.id.clone(),
        family: case.provenance.family,
        seed: case.provenance.seed,
        density: prep.ecs.map(|e| e.density),
        clutter: prep.ecs.map(|e| e.clutter),
        structure: prep.ecs.map(|e| e.structure),
        frontend: fe,
        fe_status: Status::Success,
        fe_time_ms: 0.0,
        path_cost: None,
        polytopes: None,
        backend: be,
        be_status: None,
        be_time_ms: None,
        traj_duration: None,
        mean_sq_jerk: None,
        collision: false,
        status: Status::Success,
        total_time_ms: 0.0,
    };

    let t0 = Instant::now();
    let planned = plan(
        fe,
        grid,
        case.start,
        case.goal,
        &config.quad,
        &config.budget,
        &config.planner,
        case.provenance.seed,
    );
    r.fe_time_ms = ms(t0);
    r.total_time_ms = r.fe_time_ms;
    let path = match planned {
        Ok(p) if (p.end() - case.goal).norm() <= config.budget.goal_threshold + 1e-9 => p,
        Ok(_) | Err(PlanError::Infeasible) | Err(PlanError::InvalidQuery(_)) => {
            r.fe_status = Status::Infeasible;
            r.status = Status::Infeasible;
            return (r, None);
        }
        Err(PlanError::BudgetExceeded { .. }) => {
            r.fe_status = Status::Timeout;
            r.status = Status::Timeout;
            return (r, None);
        }
    };
    r.path_cost = Some(path.cost);

    if be == BackendId::None {
        if !validate_path(grid, &path.waypoints).ok {
            r.collision = true;
            r.status = Status::Collision;
        }
        return (r, None);
    }

    let t1 = Instant::now();
    let path = if config.simplify {
        simplify_path(&path, grid)
    } else {
        path
    };
    let traj = build_corridor(&path, grid).ok().and_then(|c| {
        r.polytopes = Some(c.len());
        optimize_trajectory(
            &c,
            &BoundaryState::rest(path.start()),
            &BoundaryState::rest(path.end()),
            &config.quad,
            &config.optimizer,
        )
        .ok()
    });
    let be_time = ms(t1);
    r.be_time_ms = Some(be_time);
    r.total_time_ms = r.fe_time_ms + be_time;

    let Some(traj) = traj else {
        r.be_status = Some(Status::OptFailure);
        r.status = Status::OptFailure;
        return (r, None);
    };
    let report = check_dynamic_feasibility(&traj, Some(grid), CHECK_DT);
    let status = if report.collision() {
        r.collision = true;
        Status::Collision
    } else if !report.within_limits(&config.quad) || report.continuity_error > CONTINUITY_TOL {
        Status::OptFailure
    } else {
        Status::Success
    };
    r.be_status = Some(status);
    r.status = status;
    if status != Status::Success {
        return (r, None);
    }
    r.traj_duration = Some(report.duration);
    r.mean_sq_jerk = Some(report.mean_squared_jerk);
    (r, Some(traj))
}

/// Standalone pipeline for a single case: builds the grid (untimed), then runs
/// the pair. The case id is derived from its provenance.
pub fn run_case(
    case: &ScenarioCase,
    fe: FrontendId,
    be: BackendId,
    config: &SuiteConfig,
) -> Result<CaseResult, BenchError> {
    let id = format!("{}-{}", case.provenance.family, case.provenance.seed);
    let prep = prepare_case(id, case.clone(), config)?;
    Ok(run_case_on_grid(&prep, fe, be, config).0)
}

fn case_seed(base: u64, family: usize, index: usize) -> u64 {
    base.wrapping_add((family as u64) << 32)
        .wrapping_add(index as u64)
}

fn scaled_obstacles(spec: &ObstacleSpec, k: f64) -> ObstacleSpec {
    let mut s = spec.clone();
    let n = |c: usize| (c as f64 * k).round() as usize;
    s.cylinders.count = n(s.cylinders.count);
    s.ellipsoids.count = n(s.ellipsoids.count);
    s.boxes.count = n(s.boxes.count);
    s.gates.count = n(s.gates.count);
    s
}

/// Builds the case for attempt `index` of family `fi`; `None` when it fails
/// start/goal sampling or the feasibility filter.
fn generate_case(
    config: &SuiteConfig,
    fi: usize,
    index: usize,
) -> Result<Option<PreparedCase>, BenchError> {
    let fam: &FamilyConfig = &config.families[fi];
    let seed = case_seed(config.seed_base, fi, index);
    let id = format!("{}-{:02}-{:05}", fam.family, fi, index);
    let bounds = config.bounds;
    let (cloud, fixed, hash) = match fam.family {
        Family::Maze => {
            let spec = crate::envgen::MazeSpec {
                seed,
                ..fam.maze.clone()
            };
            let cloud = generate_maze(&spec, &bounds)?;
            (
                cloud,
                Some(maze_start_goal(&spec, &bounds)),
                spec_hash(&spec),
            )
        }
        Family::Obstacle => {
            let scale = match fam.density_scales.len() {
                0 => 1.0,
                n => fam.density_scales[index % n],
            };
            let spec = ObstacleSpec {
                seed,
                ..scaled_obstacles(&fam.obstacle, scale)
            };
            (
                generate_obstacle_map(&spec, &bounds)?.cloud,
                None,
                spec_hash(&spec),
            )
        }
        Family::Real => return Err(BenchError::Config("real maps cannot be generated".into())),
    };
    let grid =
        planning_grid(&cloud, bounds, &config.quad, config.inflation).map_err(EnvError::from)?;
    let (start, goal) = match fixed {
        Some(sg) => sg,
        None => match sample_start_goal(&grid, config.min_separation, seed ^ 0x9e37_79b9_7f4a_7c15)
        {
            Ok(sg) => sg,
            Err(EnvError::InfeasibleSampling { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        },
    };
    if !grid_feasible(&grid, start, goal) {
        return Ok(None);
    }
    let ecs = ecs(&cloud, bounds, &config.quad).ok();
    Ok(Some(PreparedCase {
        id,
        case: ScenarioCase {
            cloud,
            bounds,
            start,
            goal,
            provenance: Provenance {
                family: fam.family,
                spec_hash: hash,
                seed,
            },
        },
        grid,
        ecs,
    }))
}

type Rows = Vec<(CaseResult, Option<Trajectory>)>;

/// Generates and filters every family, runs the planner matrix on each
/// surviving map and aggregates the results.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteResult, BenchError> {
    config.validate()?;
    let pairs = config.pairs();
    let attempts: Vec<(usize, usize)> = config
        .families
        .iter()
        .enumerate()
        .flat_map(|(fi, f)| (0..f.count).map(move |j| (fi, j)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| BenchError::Config(format!("cannot build worker pool: {e}")))?;

    let outputs: Vec<Result<Option<Rows>, BenchError>> = pool.install(|| {
        attempts
            .par_iter()
            .map(|&(fi, j)| {
                let Some(prep) = generate_case(config, fi, j)? else {
                    log::debug!("family {fi} map {j} filtered out");
                    return Ok(None);
                };
                Ok(Some(
                    pairs
                        .iter()
                        .map(|&(fe, be)| run_case_on_grid(&prep, fe, be, config))
                        .collect(),
                ))
            })
            .collect()
    });

    let generated = attempts.len();
    let mut rows = Vec::new();
    let mut feasible = 0;
    for o in outputs {
        if let Some(r) = o? {
            feasible += 1;
            rows.extend(r);
        }
    }
    rows.sort_by(|a, b| {
        (&a.0.case_id, a.0.frontend, a.0.backend).cmp(&(&b.0.case_id, b.0.frontend, b.0.backend))
    });
    let mut results = Vec::with_capacity(rows.len());
    let mut trajectories = Vec::new();
    for (r, t) in rows {
        if let Some(t) = t {
            trajectories.push((r.key(), t));
        }
        results.push(r);
    }
    let summary = Summary::new(&results, generated, feasible);
    Ok(SuiteResult {
        config: config.clone(),
        results,
        trajectories,
        summary,
    })
}
