//! Sampling validator, kept separate from the planners' own segment checks.

use crate::world::{Vec3, VoxelGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct PathValidation {
    pub ok: bool,
    pub samples: usize,
    pub first_collision: Option<Vec3>,
}

/// True when `p` is outside the grid or inside an occupied cell.
/// Points on a shared face belong to the lower cell.
pub fn point_in_collision(grid: &VoxelGrid, p: &Vec3) -> bool {
    let dims = grid.dims();
    let lo = grid.bounds().min();
    let mut lin = 0usize;
    let mut stride = 1usize;
    for k in 0..3 {
        let u = (p[k] - lo[k]) / grid.resolution();
        if !(u >= -1e-9 && u <= dims[k] as f64 + 1e-9) {
            return true;
        }
        let i = if u <= 0.0 {
            0
        } else {
            (u.ceil() as usize).saturating_sub(1).min(dims[k] - 1)
        };
        lin += i * stride;
        stride *= dims[k];
    }
    grid.occupancy()[lin]
}

/// Samples every segment at spacing at most half the resolution.
pub fn validate_path(grid: &VoxelGrid, waypoints: &[Vec3]) -> PathValidation {
    let step = grid.resolution() / 2.0;
    let mut samples = 0;
    let mut check = |p: Vec3| -> Option<Vec3> {
        samples += 1;
        point_in_collision(grid, &p).then_some(p)
    };
    let mut first = None;
    if let [only] = waypoints {
        first = check(*only);
    }
    'outer: for w in waypoints.windows(2) {
        let d = w[1] - w[0];
        let n = ((d.norm() / step).ceil() as usize).max(1);
        for i in 0..=n {
            if let Some(hit) = check(w[0] + d * (i as f64 / n as f64)) {
                first = Some(hit);
                break 'outer;
            }
        }
    }
    PathValidation {
        ok: first.is_none(),
        samples,
        first_collision: first,
    }
}
