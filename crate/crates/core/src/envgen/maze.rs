use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sample_box_surface, EnvError};
use crate::world::{Bounds, PointCloud, Vec3};

/// Parameters of a Kruskal maze extruded to full height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MazeSpec {
    /// Probability that each wall left by Kruskal is deleted afterwards.
    pub p: f64,
    pub cells_x: usize,
    pub cells_y: usize,
    pub cell_size: f64,
    pub wall_thickness: f64,
    /// `None` extrudes to the full z extent of the bounds.
    pub wall_height: Option<f64>,
    pub point_spacing: f64,
    pub seed: u64,
}

impl Default for MazeSpec {
    fn default() -> Self {
        Self {
            p: 0.1,
            cells_x: 10,
            cells_y: 5,
            cell_size: 2.0,
            wall_thickness: 0.2,
            wall_height: None,
            point_spacing: 0.05,
            seed: 0,
        }
    }
}

impl MazeSpec {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(EnvError::Config(format!(
                "maze p must be in [0, 1], got {}",
                self.p
            )));
        }
        if self.cells_x < 2 || self.cells_y < 2 {
            return Err(EnvError::Config(
                "maze needs at least 2 cells per axis".into(),
            ));
        }
        if !(self.cell_size > 0.0
            && self.wall_thickness > 0.0
            && self.wall_thickness < self.cell_size)
        {
            return Err(EnvError::Config(
                "maze wall thickness must be positive and below the cell size".into(),
            ));
        }
        if !(self.point_spacing > 0.0) {
            return Err(EnvError::Config("point spacing must be positive".into()));
        }
        if let Some(h) = self.wall_height {
            if !(h > 0.0) {
                return Err(EnvError::Config("wall height must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Which interior walls survive. `vertical[j * (cells_x - 1) + i]` separates
/// cell `(i, j)` from `(i + 1, j)`; `horizontal[j * cells_x + i]` separates
/// `(i, j)` from `(i, j + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeLayout {
    pub cells_x: usize,
    pub cells_y: usize,
    pub vertical: Vec<bool>,
    pub horizontal: Vec<bool>,
    /// Walls removed by the spanning-tree pass.
    pub removed_by_kruskal: usize,
    /// Walls present after Kruskal, before random deletion.
    pub after_kruskal: usize,
    /// Walls deleted with probability `p`.
    pub deleted_by_p: usize,
}

impl MazeLayout {
    pub fn interior_wall_count(&self) -> usize {
        self.vertical
            .iter()
            .chain(&self.horizontal)
            .filter(|&&w| w)
            .count()
    }

    /// Cell-adjacency edges that are open (no wall in between).
    pub fn open_edges(&self) -> Vec<(usize, usize)> {
        let (nx, ny) = (self.cells_x, self.cells_y);
        let mut edges = Vec::new();
        for j in 0..ny {
            for i in 0..nx - 1 {
                if !self.vertical[j * (nx - 1) + i] {
                    edges.push((j * nx + i, j * nx + i + 1));
                }
            }
        }
        for j in 0..ny - 1 {
            for i in 0..nx {
                if !self.horizontal[j * nx + i] {
                    edges.push((j * nx + i, (j + 1) * nx + i));
                }
            }
        }
        edges
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

#[derive(Clone, Copy)]
enum Wall {
    Vertical(usize),
    Horizontal(usize),
}

/// Randomized Kruskal followed by independent deletion with probability `p`.
pub fn maze_layout(spec: &MazeSpec) -> Result<MazeLayout, EnvError> {
    spec.validate()?;
    let (nx, ny) = (spec.cells_x, spec.cells_y);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut vertical = vec![true; (nx - 1) * ny];
    let mut horizontal = vec![true; nx * (ny - 1)];

    let mut walls: Vec<Wall> = (0..vertical.len())
        .map(Wall::Vertical)
        .chain((0..horizontal.len()).map(Wall::Horizontal))
        .collect();
    walls.shuffle(&mut rng);

    let mut sets = DisjointSet::new(nx * ny);
    let mut removed = 0;
    for wall in &walls {
        let (a, b) = match *wall {
            Wall::Vertical(w) => {
                let (i, j) = (w % (nx - 1), w / (nx - 1));
                (j * nx + i, j * nx + i + 1)
            }
            Wall::Horizontal(w) => {
                let (i, j) = (w % nx, w / nx);
                (j * nx + i, (j + 1) * nx + i)
            }
        };
        if sets.union(a, b) {
            match *wall {
                Wall::Vertical(w) => vertical[w] = false,
                Wall::Horizontal(w) => horizontal[w] = false,
            }
            removed += 1;
        }
    }

    let after_kruskal = vertical.iter().chain(&horizontal).filter(|&&w| w).count();
    let mut deleted = 0;
    // Fixed iteration order keeps the random stream independent of the shuffle outcome.
    for w in vertical.iter_mut().chain(horizontal.iter_mut()) {
        let draw: f64 = rng.random();
        if *w && draw < spec.p {
            *w = false;
            deleted += 1;
        }
    }

    Ok(MazeLayout {
        cells_x: nx,
        cells_y: ny,
        vertical,
        horizontal,
        removed_by_kruskal: removed,
        after_kruskal,
        deleted_by_p: deleted,
    })
}

/// Axis-aligned wall boxes (lower, upper corners) of a layout, boundary included.
pub fn maze_wall_boxes(spec: &MazeSpec, layout: &MazeLayout, bounds: &Bounds) -> Vec<(Vec3, Vec3)> {
    let o = bounds.min();
    let cs = spec.cell_size;
    let half = spec.wall_thickness * 0.5;
    let (nx, ny) = (layout.cells_x, layout.cells_y);
    let width = nx as f64 * cs;
    let depth = ny as f64 * cs;
    let height = spec.wall_height.unwrap_or(bounds.extent().z);
    let (z0, z1) = (o.z, o.z + height);
    let clip_x = |v: f64| v.clamp(o.x, o.x + width);
    let clip_y = |v: f64| v.clamp(o.y, o.y + depth);

    let mut boxes = Vec::new();
    // Outer boundary, kept inside the footprint.
    boxes.push((
        Vec3::new(o.x, o.y, z0),
        Vec3::new(o.x + half, o.y + depth, z1),
    ));
    boxes.push((
        Vec3::new(o.x + width - half, o.y, z0),
        Vec3::new(o.x + width, o.y + depth, z1),
    ));
    boxes.push((
        Vec3::new(o.x, o.y, z0),
        Vec3::new(o.x + width, o.y + half, z1),
    ));
    boxes.push((
        Vec3::new(o.x, o.y + depth - half, z0),
        Vec3::new(o.x + width, o.y + depth, z1),
    ));

    for j in 0..ny {
        for i in 0..nx - 1 {
            if layout.vertical[j * (nx - 1) + i] {
                let x = o.x + (i + 1) as f64 * cs;
                let y0 = o.y + j as f64 * cs;
                boxes.push((
                    Vec3::new(x - half, clip_y(y0 - half), z0),
                    Vec3::new(x + half, clip_y(y0 + cs + half), z1),
                ));
            }
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            if layout.horizontal[j * nx + i] {
                let y = o.y + (j + 1) as f64 * cs;
                let x0 = o.x + i as f64 * cs;
                boxes.push((
                    Vec3::new(clip_x(x0 - half), y - half, z0),
                    Vec3::new(clip_x(x0 + cs + half), y + half, z1),
                ));
            }
        }
    }
    boxes
}

/// Surface point cloud of a maze.
pub fn generate_maze(spec: &MazeSpec, bounds: &Bounds) -> Result<PointCloud, EnvError> {
    spec.validate()?;
    let ext = bounds.extent();
    let height = spec.wall_height.unwrap_or(ext.z);
    if spec.cells_x as f64 * spec.cell_size > ext.x + 1e-9
        || spec.cells_y as f64 * spec.cell_size > ext.y + 1e-9
        || height > ext.z + 1e-9
    {
        return Err(EnvError::Config(format!(
            "maze footprint {}x{} cells of {} m (height {height} m) exceeds bounds {:?}",
            spec.cells_x, spec.cells_y, spec.cell_size, ext
        )));
    }
    let layout = maze_layout(spec)?;
    let mut points = Vec::new();
    for (lo, hi) in maze_wall_boxes(spec, &layout, bounds) {
        sample_box_surface(lo, hi, spec.point_spacing, &mut points);
    }
    Ok(PointCloud::new(points)?)
}

/// Start and goal at the centers of opposite corner cells, mid-height.
pub fn maze_start_goal(spec: &MazeSpec, bounds: &Bounds) -> (Vec3, Vec3) {
    let o = bounds.min();
    let height = spec.wall_height.unwrap_or(bounds.extent().z);
    let z = o.z + height * 0.5;
    let cs = spec.cell_size;
    let start = Vec3::new(o.x + 0.5 * cs, o.y + 0.5 * cs, z);
    let goal = Vec3::new(
        o.x + (spec.cells_x as f64 - 0.5) * cs,
        o.y + (spec.cells_y as f64 - 0.5) * cs,
        z,
    );
    (start, goal)
}
