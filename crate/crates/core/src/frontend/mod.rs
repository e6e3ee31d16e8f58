//! Front-end planners on the inflated planning grid: jump point search,
//! RRT* and a double-integrator motion-primitive lattice.

mod collision;
mod jps;
mod mpl;
mod rrt;
mod validate;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use collision::{for_each_touched_cell, point_clear, segment_free, touched_box};
pub use jps::{plan_jps, plan_jps_detailed, JpsConfig, JpsOutcome};
pub use mpl::{plan_mpl, LatticeState, MplConfig, PrimitiveTrajectory};
pub use rrt::{plan_rrt_star, plan_rrt_star_detailed, RrtConfig, RrtOutcome};
pub use validate::{point_in_collision, validate_path, PathValidation};

use crate::world::{QuadrotorSpec, Vec3, VoxelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrontendId {
    #[serde(rename = "jps")]
    Jps,
    #[serde(rename = "rrtstar")]
    RrtStar,
    #[serde(rename = "mpl")]
    Mpl,
}

impl FrontendId {
    pub const ALL: [FrontendId; 3] = [FrontendId::Jps, FrontendId::RrtStar, FrontendId::Mpl];

    pub fn as_str(self) -> &'static str {
        match self {
            FrontendId::Jps => "jps",
            FrontendId::RrtStar => "rrtstar",
            FrontendId::Mpl => "mpl",
        }
    }
}

impl fmt::Display for FrontendId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrontendId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_', '*'], "").as_str() {
            "jps" => Ok(FrontendId::Jps),
            "rrtstar" | "rrt" => Ok(FrontendId::RrtStar),
            "mpl" => Ok(FrontendId::Mpl),
            _ => Err(format!(
                "unknown front-end {s:?} (expected jps, rrtstar or mpl)"
            )),
        }
    }
}

/// Polyline returned by every front-end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Vec3>,
    /// Polyline length in meters.
    pub cost: f64,
    pub planner: FrontendId,
    /// Seconds.
    pub compute_time: f64,
}

impl Path {
    /// Drops consecutive duplicates and computes the length.
    pub fn new(mut waypoints: Vec<Vec3>, planner: FrontendId, compute_time: f64) -> Self {
        waypoints.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
        let cost = polyline_length(&waypoints);
        Path {
            waypoints,
            cost,
            planner,
            compute_time,
        }
    }

    pub fn start(&self) -> Vec3 {
        self.waypoints[0]
    }

    pub fn end(&self) -> Vec3 {
        *self.waypoints.last().expect("path has waypoints")
    }
}

pub fn polyline_length(pts: &[Vec3]) -> f64 {
    pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Shared wall-clock budget and goal tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerBudget {
    /// Seconds.
    pub timeout: f64,
    /// Meters.
    pub goal_threshold: f64,
}

impl Default for PlannerBudget {
    fn default() -> Self {
        PlannerBudget {
            timeout: 0.2,
            goal_threshold: 1.0,
        }
    }
}

impl PlannerBudget {
    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.timeout > 0.0 && self.timeout.is_finite()) {
            return Err(PlanError::InvalidQuery(format!(
                "timeout must be positive, got {}",
                self.timeout
            )));
        }
        if !(self.goal_threshold > 0.0 && self.goal_threshold.is_finite()) {
            return Err(PlanError::InvalidQuery(format!(
                "goal threshold must be positive, got {}",
                self.goal_threshold
            )));
        }
        Ok(())
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum PlanError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("no path exists")]
    Infeasible,
    #[error("budget exceeded after {elapsed:.3} s")]
    BudgetExceeded { elapsed: f64 },
}

/// Knobs for all three planners; the budget is passed separately.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub jps: JpsConfig,
    pub rrt: RrtConfig,
    pub mpl: MplConfig,
}

/// Runs the named front-end from rest at `start`. MPL's primitive seed is dropped.
pub fn plan(
    id: FrontendId,
    grid: &VoxelGrid,
    start: Vec3,
    goal: Vec3,
    quad: &QuadrotorSpec,
    budget: &PlannerBudget,
    config: &PlannerConfig,
    seed: u64,
) -> Result<Path, PlanError> {
    match id {
        FrontendId::Jps => plan_jps(grid, start, goal, budget, &config.jps),
        FrontendId::RrtStar => plan_rrt_star(grid, start, goal, budget, &config.rrt, seed),
        FrontendId::Mpl => {
            let s = LatticeState {
                position: start,
                velocity: Vec3::zeros(),
            };
            plan_mpl(grid, s, goal, quad, budget, &config.mpl).map(|(p, _)| p)
        }
    }
}

pub(crate) struct Clock {
    start: Instant,
    timeout: f64,
}

impl Clock {
    pub(crate) fn new(timeout: f64) -> Self {
        Clock {
            start: Instant::now(),
            timeout,
        }
    }

    pub(crate) fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub(crate) fn expired(&self) -> bool {
        self.elapsed() >= self.timeout
    }

    pub(crate) fn exceeded(&self) -> PlanError {
        PlanError::BudgetExceeded {
            elapsed: self.elapsed(),
        }
    }
}

pub(crate) fn check_endpoints(
    grid: &VoxelGrid,
    start: &Vec3,
    goal: &Vec3,
) -> Result<(), PlanError> {
    for (name, p) in [("start", start), ("goal", goal)] {
        if !p.iter().all(|v| v.is_finite()) || !point_clear(grid, p) {
            return Err(PlanError::InvalidQuery(format!(
                "{name} ({:.3}, {:.3}, {:.3}) is not in free space",
                p.x, p.y, p.z
            )));
        }
    }
    Ok(())
}
