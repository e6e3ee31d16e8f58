//! Shared fixtures for the criterion benchmarks.

use ecsbench_core::envgen::{
    generate_maze, generate_obstacle_map, maze_start_goal, sample_start_goal, MazeSpec,
    ObstacleSpec,
};
use ecsbench_core::world::planning_grid;
use ecsbench_core::{Bounds, PointCloud, QuadrotorSpec, Vec3, VoxelGrid};

/// A default obstacle map: cloud, inflated planning grid and a query.
pub fn obstacle_fixture(seed: u64) -> (PointCloud, VoxelGrid, Vec3, Vec3) {
    let b = Bounds::default();
    let cloud = generate_obstacle_map(
        &ObstacleSpec {
            seed,
            ..ObstacleSpec::default()
        },
        &b,
    )
    .expect("default spec is valid")
    .cloud;
    let grid = planning_grid(&cloud, b, &QuadrotorSpec::default(), 0.3).expect("valid grid");
    let (s, g) = sample_start_goal(&grid, 10.0, seed).expect("default maps leave room for a query");
    (cloud, grid, s, g)
}

/// A default maze with its corner-to-corner query.
pub fn maze_fixture(seed: u64) -> (PointCloud, VoxelGrid, Vec3, Vec3) {
    let b = Bounds::default();
    let spec = MazeSpec {
        seed,
        ..MazeSpec::default()
    };
    let cloud = generate_maze(&spec, &b).expect("default spec is valid");
    let grid = planning_grid(&cloud, b, &QuadrotorSpec::default(), 0.3).expect("valid grid");
    let (s, g) = maze_start_goal(&spec, &b);
    (cloud, grid, s, g)
}
