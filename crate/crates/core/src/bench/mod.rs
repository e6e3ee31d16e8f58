//! Benchmark harness: scenario generation, the planner matrix, aggregation
//! and report files.

mod report;
mod run;
mod stats;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use report::{
    read_results_csv, results_csv_string, write_report, RESULTS_CSV, SCATTER_CSV, SUMMARY_JSON,
    TRAJECTORY_DIR,
};
pub use run::{prepare_case, run_case, run_case_on_grid, run_suite, PreparedCase, SuiteResult};
pub use stats::{
    correlate_ecs, spearman, summarize, CorrelationReport, GroupSummary, MapScatter, Summary,
};

use crate::backend::{BackendId, OptimizerConfig};
use crate::envgen::{EnvError, Family, MazeSpec, ObstacleSpec};
use crate::frontend::{FrontendId, PlannerBudget, PlannerConfig};
use crate::world::{Bounds, QuadrotorSpec};

#[derive(thiserror::Error, Debug)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed results file: {0}")]
    Format(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

impl BenchError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Outcome label shared by front-end, back-end and the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "success")]
    Success,
    #[serde(rename = "infeasible")]
    Infeasible,
    #[serde(rename = "timeout")]
    Timeout,
    #[serde(rename = "opt-failure")]
    OptFailure,
    #[serde(rename = "collision")]
    Collision,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Success => "success",
            Status::Infeasible => "infeasible",
            Status::Timeout => "timeout",
            Status::OptFailure => "opt-failure",
            Status::Collision => "collision",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: String,
    pub family: Family,
    pub seed: u64,
    pub density: Option<f64>,
    pub clutter: Option<f64>,
    pub structure: Option<f64>,
    pub frontend: FrontendId,
    pub fe_status: Status,
    pub fe_time_ms: f64,
    /// Front-end path length (m).
    pub path_cost: Option<f64>,
    pub polytopes: Option<usize>,
    pub backend: BackendId,
    /// Absent when the front-end failed or no optimizer ran.
    pub be_status: Option<Status>,
    pub be_time_ms: Option<f64>,
    pub traj_duration: Option<f64>,
    pub mean_sq_jerk: Option<f64>,
    /// Set by the independent validator only.
    pub collision: bool,
    pub status: Status,
    pub total_time_ms: f64,
}

impl CaseResult {
    /// Columns that depend on wall-clock time.
    pub const TIMING_COLUMNS: [&'static str; 3] = ["fe_time_ms", "be_time_ms", "total_time_ms"];

    pub fn success(&self) -> bool {
        self.status == Status::Success
    }

    /// Output was handed over for validation (path or trajectory).
    pub fn returned(&self) -> bool {
        match self.backend {
            BackendId::None => self.fe_status == Status::Success,
            BackendId::Flatness => {
                matches!(self.be_status, Some(Status::Success | Status::Collision))
            }
        }
    }

    pub fn key(&self) -> String {
        format!("{}_{}_{}", self.case_id, self.frontend, self.backend)
    }
}

/// One environment family in a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub family: Family,
    /// Generated maps; infeasible ones are dropped by the filter.
    pub count: usize,
    #[serde(default)]
    pub maze: MazeSpec,
    #[serde(default)]
    pub obstacle: ObstacleSpec,
    /// Obstacle-count multipliers cycled over the maps (density sweep).
    #[serde(default)]
    pub density_scales: Vec<f64>,
}

impl FamilyConfig {
    pub fn maze(count: usize, spec: MazeSpec) -> Self {
        FamilyConfig {
            family: Family::Maze,
            count,
            maze: spec,
            obstacle: ObstacleSpec::default(),
            density_scales: Vec::new(),
        }
    }

    pub fn obstacle(count: usize, spec: ObstacleSpec) -> Self {
        FamilyConfig {
            family: Family::Obstacle,
            count,
            maze: MazeSpec::default(),
            obstacle: spec,
            density_scales: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub families: Vec<FamilyConfig>,
    pub seed_base: u64,
    pub frontends: Vec<FrontendId>,
    pub backends: Vec<BackendId>,
    pub quad: QuadrotorSpec,
    pub budget: PlannerBudget,
    /// Obstacle inflation (m).
    pub inflation: f64,
    pub parallelism: usize,
    pub bounds: Bounds,
    /// Minimum start/goal separation for randomized families (m).
    pub min_separation: f64,
    /// Shortcut the front-end path before building the corridor.
    pub simplify: bool,
    pub planner: PlannerConfig,
    pub optimizer: OptimizerConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            families: Vec::new(),
            seed_base: 0,
            frontends: FrontendId::ALL.to_vec(),
            backends: vec![BackendId::Flatness],
            quad: QuadrotorSpec::default(),
            budget: PlannerBudget::default(),
            inflation: 0.3,
            parallelism: 1,
            bounds: Bounds::default(),
            min_separation: 10.0,
            simplify: true,
            planner: PlannerConfig::default(),
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.families.iter().map(|f| f.count).sum::<usize>() == 0 {
            return bad("suite needs at least one case".into());
        }
        if self.frontends.is_empty() || self.backends.is_empty() {
            return bad("suite needs at least one planner pair".into());
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if !(self.inflation >= 0.0 && self.inflation.is_finite()) {
            return bad(format!(
                "inflation must be non-negative, got {}",
                self.inflation
            ));
        }
        if !(self.min_separation >= 0.0) {
            return bad("min_separation must be non-negative".into());
        }
        self.quad
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        self.budget
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        self.optimizer
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        for f in &self.families {
            match f.family {
                Family::Maze => f.maze.validate()?,
                Family::Obstacle => f.obstacle.validate()?,
                Family::Real => {
                    return bad("real maps are loaded from files, not generated in a suite".into())
                }
            }
            if f.density_scales
                .iter()
                .any(|s| !(*s >= 0.0 && s.is_finite()))
            {
                return bad("density scales must be non-negative".into());
            }
        }
        Ok(())
    }

    /// Planner matrix in canonical order.
    pub fn pairs(&self) -> Vec<(FrontendId, BackendId)> {
        let mut v: Vec<_> = self
            .frontends
            .iter()
            .flat_map(|f| self.backends.iter().map(move |b| (*f, *b)))
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_protocol() {
        let c = SuiteConfig::default();
        assert_eq!(c.bounds.extent(), crate::world::Vec3::new(20.0, 10.0, 5.0));
        assert_eq!(c.quad.radius, 0.2);
        assert_eq!(c.inflation, 0.3);
        assert_eq!(c.budget.goal_threshold, 1.0);
        assert_eq!(c.budget.timeout, 0.2);
        assert_eq!((c.quad.v_max, c.quad.a_max), (3.0, 2.0));
    }

    #[test]
    fn config_round_trips_and_rejects_empty() {
        let mut c = SuiteConfig::default();
        assert!(c.validate().is_err());
        c.families.push(FamilyConfig::maze(3, MazeSpec::default()));
        c.validate().unwrap();
        let j = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SuiteConfig>(&j).unwrap(), c);
        c.backends.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn status_names() {
        assert_eq!(
            serde_json::to_string(&Status::OptFailure).unwrap(),
            "\"opt-failure\""
        );
        assert_eq!(Status::Collision.to_string(), "collision");
    }
}
