//! Conservative segment checks shared by all planners.
//!
//! A segment is free when every cell whose *closed* box it touches is free and
//! inside the grid. This is stricter than any point sampling: whichever way a
//! sample on a shared face is binned, its cell is one of the touched cells.

use crate::world::{Vec3, VoxelGrid};

const FACE_EPS: f64 = 1e-9;

/// Calls `visit` with every signed cell index whose closed box the segment
/// `a -> b` touches; stops early when `visit` returns `false`. Returns `false`
/// iff stopped early.
pub fn for_each_touched_cell(
    grid: &VoxelGrid,
    a: &Vec3,
    b: &Vec3,
    mut visit: impl FnMut([i64; 3]) -> bool,
) -> bool {
    let res = grid.resolution();
    let min = grid.bounds().min();
    let ua = (a - min) / res;
    let ub = (b - min) / res;
    let d = ub - ua;

    let mut ts: Vec<f64> = Vec::with_capacity(8);
    ts.push(0.0);
    ts.push(1.0);
    for k in 0..3 {
        if d[k].abs() < 1e-15 {
            continue;
        }
        let (lo, hi) = if d[k] > 0.0 {
            (ua[k], ub[k])
        } else {
            (ub[k], ua[k])
        };
        let mut m = lo.floor() + 1.0;
        while m < hi {
            ts.push((m - ua[k]) / d[k]);
            m += 1.0;
        }
    }

    for t in ts {
        let q = ua + d * t;
        let mut ranges = [[0i64; 2]; 3];
        for k in 0..3 {
            let r = q[k].round();
            if (q[k] - r).abs() <= FACE_EPS {
                ranges[k] = [r as i64 - 1, r as i64];
            } else {
                let f = q[k].floor() as i64;
                ranges[k] = [f, f];
            }
        }
        for i in ranges[0][0]..=ranges[0][1] {
            for j in ranges[1][0]..=ranges[1][1] {
                for k in ranges[2][0]..=ranges[2][1] {
                    if !visit([i, j, k]) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Inclusive index box covering every cell the closed polyline can touch.
pub fn touched_box(grid: &VoxelGrid, pts: &[Vec3]) -> ([i64; 3], [i64; 3]) {
    let min = grid.bounds().min();
    let res = grid.resolution();
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for p in pts {
        for k in 0..3 {
            let u = (p[k] - min[k]) / res;
            lo[k] = lo[k].min((u - FACE_EPS).floor() as i64);
            hi[k] = hi[k].max((u + FACE_EPS).floor() as i64);
        }
    }
    (lo, hi)
}

/// True when the closed segment touches only free, in-grid cells.
pub fn segment_free(grid: &VoxelGrid, a: &Vec3, b: &Vec3) -> bool {
    for_each_touched_cell(grid, a, b, |c| !grid.is_blocked(c))
}

/// True when the point touches only free, in-grid cells.
pub fn point_clear(grid: &VoxelGrid, p: &Vec3) -> bool {
    segment_free(grid, p, p)
}
