//! Environment families: Kruskal mazes, random obstacle fields and cropped
//! real scans, plus start/goal sampling and the feasibility filter.

mod io;
mod maze;
mod obstacles;
mod scenario;

pub use io::{load_point_cloud, save_point_cloud, PointFormat};
pub use maze::{
    generate_maze, maze_layout, maze_start_goal, maze_wall_boxes, MazeLayout, MazeSpec,
};
pub use obstacles::{
    generate_obstacle_map, BoxSpec, CylinderSpec, EllipsoidSpec, GateSpec, ObstacleMap,
    ObstacleSpec, PlacedShape, Range,
};
pub use scenario::{
    crop, filter_feasible, grid_feasible, sample_start_goal, sample_start_goal_with, spec_hash,
    CaseMeta, Family, Provenance, ScenarioCase, DEFAULT_SAMPLE_ATTEMPTS,
};

use crate::world::{Vec3, WorldError};

#[derive(thiserror::Error, Debug)]
pub enum EnvError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("no start/goal pair found after {attempts} attempts")]
    InfeasibleSampling { attempts: usize },
}

/// Samples the six faces of an axis-aligned box on a regular lattice whose
/// step never exceeds `spacing`. Edges are shared between faces.
pub(crate) fn sample_box_surface(lo: Vec3, hi: Vec3, spacing: f64, out: &mut Vec<Vec3>) {
    let ext = hi - lo;
    let n: [usize; 3] = std::array::from_fn(|k| ((ext[k] / spacing).ceil() as usize).max(1));
    let coord = |k: usize, i: usize| lo[k] + ext[k] * i as f64 / n[k] as f64;
    for axis in 0..3 {
        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [lo[axis], hi[axis]] {
            for i in 0..=n[a] {
                for j in 0..=n[b] {
                    let mut p = Vec3::zeros();
                    p[axis] = side;
                    p[a] = coord(a, i);
                    p[b] = coord(b, j);
                    out.push(p);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_surface_points_are_on_faces() {
        let lo = Vec3::new(1.0, 2.0, 0.0);
        let hi = Vec3::new(1.3, 4.0, 1.0);
        let mut pts = Vec::new();
        sample_box_surface(lo, hi, 0.1, &mut pts);
        for p in &pts {
            let on_face = (0..3).any(|k| p[k] == lo[k] || p[k] == hi[k]);
            let inside = (0..3).all(|k| p[k] >= lo[k] && p[k] <= hi[k]);
            assert!(on_face && inside);
        }
        // Neighboring samples never exceed the spacing.
        assert!(pts.len() >= 2 * (4 * 21 + 4 * 11 + 21 * 11));
    }
}
