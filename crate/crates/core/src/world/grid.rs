use super::{distance_transform, Bounds, PointCloud, Vec3, WorldError};

/// Integer cell index `(i, j, k)`.
pub type Cell = [usize; 3];

/// Dense boolean occupancy over a bounded box.
///
/// `dims[k] = ceil(extent[k] / resolution)` and the center of cell `(i, j, k)`
/// is `min + (index + 0.5) * resolution`. Cells are closed on their upper face:
/// a point lying exactly on a face shared by two cells belongs to the
/// lower-index one. Storage is x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    bounds: Bounds,
    resolution: f64,
    dims: [usize; 3],
    occupancy: Vec<bool>,
}

impl VoxelGrid {
    /// All-free grid.
    pub fn new(bounds: Bounds, resolution: f64) -> Result<Self, WorldError> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(WorldError::InvalidResolution(resolution));
        }
        let ext = bounds.extent();
        let mut dims = [0usize; 3];
        for k in 0..3 {
            let ratio = ext[k] / resolution;
            // Absorb rounding noise so that 20 / 0.2 yields 100, not 101.
            let rounded = ratio.round();
            let n = if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
                rounded
            } else {
                ratio.ceil()
            };
            dims[k] = (n as usize).max(1);
        }
        let total = dims[0] * dims[1] * dims[2];
        Ok(Self {
            bounds,
            resolution,
            dims,
            occupancy: vec![false; total],
        })
    }

    pub fn from_occupancy(
        bounds: Bounds,
        resolution: f64,
        occupancy: Vec<bool>,
    ) -> Result<Self, WorldError> {
        let mut grid = Self::new(bounds, resolution)?;
        if occupancy.len() != grid.occupancy.len() {
            return Err(WorldError::OccupancyLength {
                expected: grid.occupancy.len(),
                got: occupancy.len(),
            });
        }
        grid.occupancy = occupancy;
        Ok(grid)
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    #[inline]
    pub fn linear(&self, c: Cell) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    #[inline]
    pub fn cell_of_linear(&self, idx: usize) -> Cell {
        let i = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn in_grid(&self, c: [i64; 3]) -> Option<Cell> {
        if (0..3).all(|k| c[k] >= 0 && (c[k] as usize) < self.dims[k]) {
            Some([c[0] as usize, c[1] as usize, c[2] as usize])
        } else {
            None
        }
    }

    #[inline]
    pub fn is_occupied(&self, c: Cell) -> bool {
        self.occupancy[self.linear(c)]
    }

    /// Occupancy of a possibly out-of-range signed index; outside counts as occupied.
    #[inline]
    pub fn is_blocked(&self, c: [i64; 3]) -> bool {
        match self.in_grid(c) {
            Some(c) => self.is_occupied(c),
            None => true,
        }
    }

    pub fn set_occupied(&mut self, c: Cell, value: bool) {
        let idx = self.linear(c);
        self.occupancy[idx] = value;
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    pub fn free_count(&self) -> usize {
        self.len() - self.occupied_count()
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(i, _)| self.cell_of_linear(i))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(_, &o)| !o)
            .map(|(i, _)| self.cell_of_linear(i))
    }

    pub fn center(&self, c: Cell) -> Vec3 {
        let min = self.bounds.min();
        Vec3::new(
            min.x + (c[0] as f64 + 0.5) * self.resolution,
            min.y + (c[1] as f64 + 0.5) * self.resolution,
            min.z + (c[2] as f64 + 0.5) * self.resolution,
        )
    }

    /// Lower corner of a (possibly out-of-range) cell.
    pub fn corner(&self, c: [i64; 3]) -> Vec3 {
        let min = self.bounds.min();
        Vec3::new(
            min.x + c[0] as f64 * self.resolution,
            min.y + c[1] as f64 * self.resolution,
            min.z + c[2] as f64 * self.resolution,
        )
    }

    /// Cell containing `p`, or `None` outside the closed bounds.
    pub fn cell_of(&self, p: &Vec3) -> Option<Cell> {
        if !self.bounds.contains(p) {
            return None;
        }
        let min = self.bounds.min();
        let mut c = [0usize; 3];
        for k in 0..3 {
            let f = (p[k] - min[k]) / self.resolution;
            let idx = if f <= 0.0 { 0 } else { f.ceil() as usize - 1 };
            c[k] = idx.min(self.dims[k] - 1);
        }
        Some(c)
    }

    /// True when `p` lies inside the bounds in a free cell.
    pub fn is_free_point(&self, p: &Vec3) -> bool {
        self.cell_of(p).is_some_and(|c| !self.is_occupied(c))
    }
}

/// Bins a cloud into a grid; see [`discretize_counted`] for the dropped-point count.
pub fn discretize(
    cloud: &PointCloud,
    bounds: Bounds,
    resolution: f64,
) -> Result<VoxelGrid, WorldError> {
    discretize_counted(cloud, bounds, resolution).map(|(g, _)| g)
}

/// Bins a cloud and reports how many points fell outside the bounds.
pub fn discretize_counted(
    cloud: &PointCloud,
    bounds: Bounds,
    resolution: f64,
) -> Result<(VoxelGrid, usize), WorldError> {
    let mut grid = VoxelGrid::new(bounds, resolution)?;
    let mut dropped = 0usize;
    for p in cloud.points() {
        match grid.cell_of(p) {
            Some(c) => grid.set_occupied(c, true),
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        log::warn!("discretize: dropped {dropped} points outside bounds");
    }
    Ok((grid, dropped))
}

/// Marks every cell whose center lies within `margin` of an occupied center.
pub fn inflate(grid: &VoxelGrid, margin: f64) -> Result<VoxelGrid, WorldError> {
    if !(margin.is_finite() && margin >= 0.0) {
        return Err(WorldError::InvalidMargin(margin));
    }
    if margin == 0.0 {
        return Ok(grid.clone());
    }
    let field = match distance_transform(grid) {
        Ok(f) => f,
        Err(WorldError::NoObstacles) => return Ok(grid.clone()),
        Err(e) => return Err(e),
    };
    let limit = (margin / grid.resolution).powi(2) + 1e-9;
    let occupancy = field
        .squared_cells()
        .iter()
        .map(|&d2| d2 <= limit)
        .collect();
    Ok(VoxelGrid {
        bounds: grid.bounds,
        resolution: grid.resolution,
        dims: grid.dims,
        occupancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: f64) -> Bounds {
        Bounds::from_extent(n, n, n).unwrap()
    }

    #[test]
    fn dims_use_ceiling() {
        let g = VoxelGrid::new(Bounds::default(), 0.2).unwrap();
        assert_eq!(g.dims(), [100, 50, 25]);
        let g = VoxelGrid::new(Bounds::default(), 0.1).unwrap();
        assert_eq!(g.dims(), [200, 100, 50]);
        let g = VoxelGrid::new(Bounds::from_extent(1.05, 1.0, 1.0).unwrap(), 0.1).unwrap();
        assert_eq!(g.dims(), [11, 10, 10]);
    }

    #[test]
    fn empty_cloud_has_no_occupancy() {
        let g = discretize(&PointCloud::empty(), Bounds::default(), 0.2).unwrap();
        assert_eq!(g.occupied_count(), 0);
    }

    #[test]
    fn single_center_point() {
        let b = Bounds::default();
        let cloud = PointCloud::new(vec![b.center()]).unwrap();
        let g = discretize(&cloud, b, 0.2).unwrap();
        assert_eq!(g.occupied_count(), 1);
    }

    #[test]
    fn shared_face_goes_to_lower_index() {
        let g = VoxelGrid::new(cube(1.0), 0.25).unwrap();
        assert_eq!(g.cell_of(&Vec3::new(0.5, 0.0, 1.0)), Some([1, 0, 3]));
        assert_eq!(
            g.cell_of(&Vec3::new(0.5000001, 0.25, 0.75)),
            Some([2, 0, 2])
        );
        assert_eq!(g.cell_of(&Vec3::new(1.0000001, 0.5, 0.5)), None);
    }

    #[test]
    fn out_of_bounds_points_are_counted() {
        let cloud = PointCloud::new(vec![
            Vec3::new(0.5, 0.5, 0.5),
            Vec3::new(-0.1, 0.5, 0.5),
            Vec3::new(0.5, 0.5, 7.0),
        ])
        .unwrap();
        let (g, dropped) = discretize_counted(&cloud, cube(1.0), 0.1).unwrap();
        assert_eq!(g.occupied_count(), 1);
        assert_eq!(dropped, 2);
    }

    #[test]
    fn rejects_non_finite_points() {
        let err = PointCloud::new(vec![Vec3::zeros(), Vec3::new(f64::NAN, 0.0, 0.0)]);
        assert_eq!(err, Err(WorldError::NonFinitePoint { index: 1 }));
    }

    #[test]
    fn rejects_bad_resolution() {
        assert!(VoxelGrid::new(cube(1.0), 0.0).is_err());
        assert!(VoxelGrid::new(cube(1.0), f64::NAN).is_err());
    }

    /// Brute force: a cell is occupied iff some point satisfies the per-axis
    /// membership `i < f <= i + 1` (or `f == 0` for the first cell).
    fn brute_force_binning(points: &[Vec3], bounds: &Bounds, res: f64, dims: [usize; 3]) -> usize {
        let mut count = 0;
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let idx = [i, j, k];
                    let hit = points.iter().any(|p| {
                        (0..3).all(|a| {
                            if p[a] < bounds.min()[a] || p[a] > bounds.max()[a] {
                                return false;
                            }
                            let f = (p[a] - bounds.min()[a]) / res;
                            let lo = idx[a] as f64;
                            (f > lo && f <= lo + 1.0) || (idx[a] == 0 && f == 0.0)
                        })
                    });
                    if hit {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn lattice_matches_brute_force() {
        let res = 0.2;
        let b = Bounds::from_extent(2.4, 2.4, 2.4).unwrap();
        let mut pts = Vec::new();
        for k in 0..10 {
            for j in 0..10 {
                for i in 0..10 {
                    pts.push(Vec3::new(
                        (i as f64 + 1.5) * res,
                        (j as f64 + 1.5) * res,
                        (k as f64 + 1.5) * res,
                    ));
                }
            }
        }
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let g = discretize(&cloud, b, res).unwrap();
        assert_eq!(g.occupied_count(), 1000);
        assert_eq!(brute_force_binning(&pts, &b, res, g.dims()), 1000);
    }

    #[test]
    fn inflate_zero_is_identity() {
        let mut g = VoxelGrid::new(cube(1.0), 0.1).unwrap();
        g.set_occupied([3, 4, 5], true);
        g.set_occupied([9, 9, 9], true);
        assert_eq!(inflate(&g, 0.0).unwrap(), g);
    }

    #[test]
    fn inflate_single_cell_matches_ball() {
        let res = 0.1;
        let mut g = VoxelGrid::new(cube(1.5), res).unwrap();
        let seed = [7, 7, 7];
        g.set_occupied(seed, true);
        let out = inflate(&g, 0.3).unwrap();
        let c0 = g.center(seed);
        let expected = (0..g.len())
            .filter(|&i| (g.center(g.cell_of_linear(i)) - c0).norm() <= 0.3 + 1e-9)
            .count();
        // Lattice points within radius 3: 123.
        assert_eq!(expected, 123);
        assert_eq!(out.occupied_count(), expected);
    }

    #[test]
    fn inflate_empty_grid_stays_empty() {
        let g = VoxelGrid::new(cube(1.0), 0.1).unwrap();
        assert_eq!(inflate(&g, 0.3).unwrap().occupied_count(), 0);
    }

    #[test]
    fn inflate_rejects_negative_margin() {
        let g = VoxelGrid::new(cube(1.0), 0.1).unwrap();
        assert_eq!(inflate(&g, -0.1), Err(WorldError::InvalidMargin(-0.1)));
    }
}
