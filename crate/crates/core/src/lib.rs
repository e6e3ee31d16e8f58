//! Environment generation, complexity scoring and two-stage quadrotor
//! planning, plus the harness that benchmarks them together.

pub mod backend;
pub mod bench;
pub mod corridor;
pub mod ecs;
pub mod envgen;
pub mod frontend;
pub mod world;

pub use backend::{BackendId, Trajectory};
pub use bench::{CaseResult, Status, SuiteConfig};
pub use corridor::{Corridor, Polytope};
pub use ecs::{ecs, ecs_grid, ecs_of_grid, Clutter, EcsSignature};
pub use envgen::{Family, ScenarioCase};
pub use frontend::{FrontendId, Path, PlannerBudget};
pub use world::{Bounds, PointCloud, QuadrotorSpec, Vec3, VoxelGrid};
