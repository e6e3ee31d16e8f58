//! Safe flight corridors: ordered, overlapping free-space boxes around a path.

use serde::{Deserialize, Serialize};

use crate::frontend::{for_each_touched_cell, segment_free, touched_box, Path};
use crate::world::{OccupancySum, Vec3, VoxelGrid};

/// Convex polytope `{x : n_i . x <= b_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub normals: Vec<Vec3>,
    pub offsets: Vec<f64>,
    /// Index of the path segment this polytope was grown from.
    pub segment: usize,
}

impl Polytope {
    pub fn from_box(lo: Vec3, hi: Vec3, segment: usize) -> Self {
        let mut normals = Vec::with_capacity(6);
        let mut offsets = Vec::with_capacity(6);
        for k in 0..3 {
            let mut n = Vec3::zeros();
            n[k] = -1.0;
            normals.push(n);
            offsets.push(-lo[k]);
            n[k] = 1.0;
            normals.push(n);
            offsets.push(hi[k]);
        }
        Polytope {
            normals,
            offsets,
            segment,
        }
    }

    /// Largest signed halfspace violation; negative means strictly inside.
    pub fn violation(&self, p: &Vec3) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, b)| n.dot(p) - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.violation(p) <= tol
    }

    /// Corner form when the polytope is an axis-aligned box in canonical order.
    pub fn as_box(&self) -> Option<(Vec3, Vec3)> {
        if self.normals.len() != 6 {
            return None;
        }
        let mut lo = Vec3::zeros();
        let mut hi = Vec3::zeros();
        for k in 0..3 {
            let (a, b) = (self.normals[2 * k], self.normals[2 * k + 1]);
            if a[k] != -1.0 || b[k] != 1.0 || a.norm() != 1.0 || b.norm() != 1.0 {
                return None;
            }
            lo[k] = -self.offsets[2 * k];
            hi[k] = self.offsets[2 * k + 1];
        }
        Some((lo, hi))
    }

    /// Same halfspaces pulled inward by `margin`.
    pub fn shrunk(&self, margin: f64) -> Polytope {
        Polytope {
            normals: self.normals.clone(),
            offsets: self.offsets.iter().map(|b| b - margin).collect(),
            segment: self.segment,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub polytopes: Vec<Polytope>,
    /// `witnesses[i]` lies strictly inside polytopes `i` and `i + 1`.
    pub witnesses: Vec<Vec3>,
}

impl Corridor {
    pub fn len(&self) -> usize {
        self.polytopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polytopes.is_empty()
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.polytopes.iter().any(|q| q.contains(p, tol))
    }
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum CorridorError {
    #[error("path needs at least two waypoints")]
    EmptyPath,
    #[error("path segment {index} is not collision-free")]
    CollidingSegment { index: usize },
}

/// Inclusive cell-index box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellBox {
    pub lo: [i64; 3],
    pub hi: [i64; 3],
}

impl CellBox {
    pub fn contains(&self, o: &CellBox) -> bool {
        (0..3).all(|k| self.lo[k] <= o.lo[k] && o.hi[k] <= self.hi[k])
    }

    pub fn to_polytope(&self, grid: &VoxelGrid, segment: usize) -> Polytope {
        let min = grid.bounds().min();
        let r = grid.resolution();
        let lo = Vec3::from_fn(|k, _| min[k] + self.lo[k] as f64 * r);
        let hi = Vec3::from_fn(|k, _| min[k] + (self.hi[k] + 1) as f64 * r);
        Polytope::from_box(lo, hi, segment)
    }
}

/// Grows a free box face by face (-x, +x, -y, +y, -z, +z), one cell layer at a
/// time, until no face can move without covering an occupied or outside cell.
pub fn expand_box(sum: &OccupancySum, seed: CellBox) -> CellBox {
    let mut b = seed;
    let mut open = [true; 6];
    while open.iter().any(|o| *o) {
        for face in 0..6 {
            if !open[face] {
                continue;
            }
            let k = face / 2;
            let mut slab = b;
            if face % 2 == 0 {
                slab.lo[k] -= 1;
                slab.hi[k] = slab.lo[k];
            } else {
                slab.hi[k] += 1;
                slab.lo[k] = slab.hi[k];
            }
            if sum.box_free(slab.lo, slab.hi) {
                if face % 2 == 0 {
                    b.lo[k] -= 1;
                } else {
                    b.hi[k] += 1;
                }
            } else {
                open[face] = false;
            }
        }
    }
    b
}

fn piece_box(grid: &VoxelGrid, a: &Vec3, b: &Vec3) -> CellBox {
    let (lo, hi) = touched_box(grid, &[*a, *b]);
    CellBox { lo, hi }
}

/// Splits a free segment into pieces whose touched-cell boxes are entirely free.
fn split_free(
    grid: &VoxelGrid,
    sum: &OccupancySum,
    a: Vec3,
    b: Vec3,
    depth: u32,
    out: &mut Vec<Vec3>,
) {
    let bx = piece_box(grid, &a, &b);
    if sum.box_free(bx.lo, bx.hi) {
        out.push(b);
        return;
    }
    if depth < 8 && (b - a).norm() > grid.resolution() {
        let m = (a + b) * 0.5;
        split_free(grid, sum, a, m, depth + 1, out);
        split_free(grid, sum, m, b, depth + 1, out);
        return;
    }
    // Cut at every cell-plane crossing so each sub-piece stays inside one
    // closed cell, then halve each sub-piece: the touched cells of a half are
    // exactly its index box, and the segment check already cleared them.
    let min = grid.bounds().min();
    let r = grid.resolution();
    let (ua, ub) = ((a - min) / r, (b - min) / r);
    let d = ub - ua;
    let mut ts = vec![1.0];
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
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let mut prev = 0.0;
    for t in ts {
        if t > prev + 1e-12 {
            out.push(a + (b - a) * (0.5 * (prev + t)));
            out.push(a + (b - a) * t);
            prev = t;
        }
    }
}

/// Covers the path with ordered, overlapping, maximal free boxes.
pub fn build_corridor(path: &Path, grid: &VoxelGrid) -> Result<Corridor, CorridorError> {
    let sum = OccupancySum::new(grid);
    build_corridor_with(path, grid, &sum)
}

pub fn build_corridor_with(
    path: &Path,
    grid: &VoxelGrid,
    sum: &OccupancySum,
) -> Result<Corridor, CorridorError> {
    let w = &path.waypoints;
    if w.len() < 2 {
        return Err(CorridorError::EmptyPath);
    }
    // Pieces as (start, end, originating segment).
    let mut pieces: Vec<(Vec3, Vec3, usize)> = Vec::new();
    for (i, seg) in w.windows(2).enumerate() {
        if !segment_free(grid, &seg[0], &seg[1]) {
            return Err(CorridorError::CollidingSegment { index: i });
        }
        let mut ends = Vec::new();
        split_free(grid, sum, seg[0], seg[1], 0, &mut ends);
        let mut prev = seg[0];
        for e in ends {
            pieces.push((prev, e, i));
            prev = e;
        }
    }

    let mut boxes: Vec<(CellBox, usize)> = Vec::new();
    let mut witnesses = Vec::new();
    for (a, b, seg) in pieces {
        let seed = piece_box(grid, &a, &b);
        if !sum.box_free(seed.lo, seed.hi) {
            return Err(CorridorError::CollidingSegment { index: seg });
        }
        if let Some((last, _)) = boxes.last() {
            if last.contains(&seed) {
                continue;
            }
            witnesses.push(a);
        }
        boxes.push((expand_box(sum, seed), seg));
    }
    Ok(Corridor {
        polytopes: boxes.iter().map(|(b, s)| b.to_polytope(grid, *s)).collect(),
        witnesses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorridorReport {
    pub no_occupied_inside: bool,
    pub path_covered: bool,
    pub overlaps_nonempty: bool,
}

impl CorridorReport {
    pub fn passed(&self) -> bool {
        self.no_occupied_inside && self.path_covered && self.overlaps_nonempty
    }
}

/// Independent checks: occupied centers, path coverage at half resolution,
/// and non-empty consecutive overlaps.
pub fn verify_corridor(corridor: &Corridor, grid: &VoxelGrid, path: &Path) -> CorridorReport {
    let no_occupied_inside = grid.occupied_cells().all(|c| {
        let p = grid.center(c);
        corridor.polytopes.iter().all(|q| !q.contains(&p, 0.0))
    });

    let step = grid.resolution() / 2.0;
    let mut path_covered = !corridor.is_empty();
    for w in path.waypoints.windows(2) {
        let d = w[1] - w[0];
        let n = ((d.norm() / step).ceil() as usize).max(1);
        for i in 0..=n {
            path_covered &= corridor.contains(&(w[0] + d * (i as f64 / n as f64)), 1e-9);
        }
    }

    let overlaps_nonempty = corridor.polytopes.windows(2).enumerate().all(|(i, pair)| {
        match (pair[0].as_box(), pair[1].as_box()) {
            (Some((alo, ahi)), Some((blo, bhi))) => {
                (0..3).all(|k| alo[k].max(blo[k]) < ahi[k].min(bhi[k]))
            }
            _ => corridor
                .witnesses
                .get(i)
                .is_some_and(|p| pair[0].violation(p) < 0.0 && pair[1].violation(p) < 0.0),
        }
    });

    CorridorReport {
        no_occupied_inside,
        path_covered,
        overlaps_nonempty,
    }
}

/// Greedy forward shortcutting: from each kept waypoint jump to the farthest
/// later waypoint reachable by a free straight segment.
pub fn simplify_path(path: &Path, grid: &VoxelGrid) -> Path {
    let w = &path.waypoints;
    if w.len() <= 2 {
        return path.clone();
    }
    let mut out = vec![w[0]];
    let mut i = 0;
    while i + 1 < w.len() {
        let mut j = w.len() - 1;
        while j > i + 1 && !segment_free(grid, &w[i], &w[j]) {
            j -= 1;
        }
        out.push(w[j]);
        i = j;
    }
    Path::new(out, path.planner, path.compute_time)
}

/// Cells touched by the closed segment, in-grid only.
pub fn touched_cells(grid: &VoxelGrid, a: &Vec3, b: &Vec3) -> Vec<[i64; 3]> {
    let mut v = Vec::new();
    for_each_touched_cell(grid, a, b, |c| {
        v.push(c);
        true
    });
    v.sort_unstable();
    v.dedup();
    v
}
