//! Flatness-style back-end: minimum-jerk quintics through a corridor, with
//! penalty-enforced corridor and limit constraints and refined durations.

mod fit;
mod optimize;
mod trajectory;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fit::{allocate_times, min_jerk_fit};
pub use optimize::{
    corridor_violation, optimize_trajectory, optimize_trajectory_detailed, LimitNorm,
    OptimizationOutcome, OptimizerConfig,
};
pub use trajectory::{BoundaryState, Segment, Trajectory};

use crate::frontend::point_in_collision;
use crate::world::{QuadrotorSpec, VoxelGrid};

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum BackendError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("optimization failed: {0}")]
    OptimizationFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendId {
    /// Corridor-constrained minimum-jerk optimizer.
    Flatness,
    /// Front-end path only.
    None,
}

impl BackendId {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendId::Flatness => "flatness",
            BackendId::None => "none",
        }
    }
}

impl fmt::Display for BackendId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "flatness" | "gcopter" => Ok(BackendId::Flatness),
            "none" => Ok(BackendId::None),
            _ => Err(format!(
                "unknown back-end {s:?} (expected flatness or none)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub duration: f64,
    pub max_speed: f64,
    pub max_acceleration: f64,
    /// Exact `(1/T) integral |jerk|^2 dt`.
    pub mean_squared_jerk: f64,
    pub samples: usize,
    pub collision_samples: usize,
    /// Time of the first colliding sample.
    pub first_collision: Option<f64>,
    pub continuity_error: f64,
}

impl FeasibilityReport {
    pub fn collision(&self) -> bool {
        self.collision_samples > 0
    }

    pub fn within_limits(&self, quad: &QuadrotorSpec) -> bool {
        self.max_speed <= quad.v_max && self.max_acceleration <= quad.a_max
    }
}

/// Samples the trajectory every `dt` seconds (plus the end) for speed,
/// acceleration and, when a grid is given, collisions.
pub fn check_dynamic_feasibility(
    traj: &Trajectory,
    grid: Option<&VoxelGrid>,
    dt: f64,
) -> FeasibilityReport {
    let mut r = FeasibilityReport {
        duration: traj.duration(),
        max_speed: 0.0,
        max_acceleration: 0.0,
        mean_squared_jerk: traj.mean_squared_jerk(),
        samples: 0,
        collision_samples: 0,
        first_collision: None,
        continuity_error: traj.continuity_error(),
    };
    for t in traj.sample_times(dt) {
        let (i, tl) = traj.locate(t);
        let s = &traj.segments[i];
        r.samples += 1;
        r.max_speed = r.max_speed.max(s.eval(tl, 1).norm());
        r.max_acceleration = r.max_acceleration.max(s.eval(tl, 2).norm());
        if let Some(g) = grid {
            if point_in_collision(g, &s.eval(tl, 0)) {
                r.collision_samples += 1;
                r.first_collision.get_or_insert(t);
            }
        }
    }
    r
}
