//! Environmental complexity signature: density, clutter and structure of a
//! map for a quadrotor of a given radius.
//!
//! All three indices are evaluated on a grid whose resolution equals the
//! quadrotor radius, built from the raw (un-inflated) cloud.

use serde::{Deserialize, Serialize};

use crate::world::{
    discretize, distance_transform, Bounds, PointCloud, QuadrotorSpec, VoxelGrid, WorldError,
};

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum EcsError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("grid resolution {grid} does not match quadrotor radius {radius}")]
    ResolutionMismatch { grid: f64, radius: f64 },
    #[error("{0} index is undefined: grid has no occupied cells")]
    NoObstacles(&'static str),
    #[error("clutter index is undefined: grid has no free cells")]
    NoFreeSpace,
}

/// The (density, clutter, structure) triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcsSignature {
    pub density: f64,
    pub clutter: f64,
    pub structure: f64,
}

/// Clutter index together with its unclamped value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clutter {
    /// `r / D` before clamping.
    pub raw: f64,
    /// Radius of the largest empty ball centered on a free cell, in meters.
    pub dispersion: f64,
}

impl Clutter {
    pub fn value(&self) -> f64 {
        self.raw.min(1.0)
    }

    /// False when the quadrotor cannot fit anywhere in the map.
    pub fn feasible(&self) -> bool {
        self.raw <= 1.0
    }
}

/// Neighborhood used by the structure index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    #[default]
    Face6,
    Full26,
}

pub fn ecs_grid(
    cloud: &PointCloud,
    bounds: Bounds,
    quad: &QuadrotorSpec,
) -> Result<VoxelGrid, EcsError> {
    quad.validate()?;
    Ok(discretize(cloud, bounds, quad.radius)?)
}

fn check_resolution(grid: &VoxelGrid, quad: &QuadrotorSpec) -> Result<(), EcsError> {
    if (grid.resolution() - quad.radius).abs() > 1e-12 * quad.radius {
        return Err(EcsError::ResolutionMismatch {
            grid: grid.resolution(),
            radius: quad.radius,
        });
    }
    Ok(())
}

/// `r^3 N / (s_x s_y s_z)`.
pub fn density_index(grid: &VoxelGrid, quad: &QuadrotorSpec) -> Result<f64, EcsError> {
    check_resolution(grid, quad)?;
    let n = grid.occupied_count() as f64;
    // r^3 N / V, with V measured in radius-sized cells.
    let e = grid.bounds().extent();
    let r = quad.radius;
    Ok(n / ((e.x / r) * (e.y / r) * (e.z / r)))
}

/// `r / D` with `D` the largest distance from a free cell center to the
/// nearest occupied center.
pub fn clutter_index(grid: &VoxelGrid, quad: &QuadrotorSpec) -> Result<Clutter, EcsError> {
    check_resolution(grid, quad)?;
    let field = match distance_transform(grid) {
        Ok(f) => f,
        Err(WorldError::NoObstacles) => return Err(EcsError::NoObstacles("clutter")),
        Err(e) => return Err(e.into()),
    };
    let dispersion = grid
        .occupancy()
        .iter()
        .enumerate()
        .filter(|(_, &o)| !o)
        .map(|(i, _)| field.distance_linear(i))
        .fold(None, |acc: Option<f64>, d| {
            Some(acc.map_or(d, |a| a.max(d)))
        })
        .ok_or(EcsError::NoFreeSpace)?;
    Ok(Clutter {
        raw: quad.radius / dispersion,
        dispersion,
    })
}

pub fn structure_index(grid: &VoxelGrid) -> Result<f64, EcsError> {
    structure_index_with(grid, Connectivity::Face6)
}

/// Fraction of occupied cells with at least one in-bounds free neighbor.
pub fn structure_index_with(grid: &VoxelGrid, conn: Connectivity) -> Result<f64, EcsError> {
    let offsets: Vec<[i64; 3]> = match conn {
        Connectivity::Face6 => vec![
            [-1, 0, 0],
            [1, 0, 0],
            [0, -1, 0],
            [0, 1, 0],
            [0, 0, -1],
            [0, 0, 1],
        ],
        Connectivity::Full26 => {
            let mut v = Vec::with_capacity(26);
            for dz in -1..=1 {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if (dx, dy, dz) != (0, 0, 0) {
                            v.push([dx, dy, dz]);
                        }
                    }
                }
            }
            v
        }
    };
    let mut n = 0usize;
    let mut exposed = 0usize;
    for c in grid.occupied_cells() {
        n += 1;
        let base = [c[0] as i64, c[1] as i64, c[2] as i64];
        let touches_free = offsets.iter().any(|o| {
            grid.in_grid([base[0] + o[0], base[1] + o[1], base[2] + o[2]])
                .is_some_and(|nb| !grid.is_occupied(nb))
        });
        if touches_free {
            exposed += 1;
        }
    }
    if n == 0 {
        return Err(EcsError::NoObstacles("structure"));
    }
    Ok(exposed as f64 / n as f64)
}

pub fn ecs(
    cloud: &PointCloud,
    bounds: Bounds,
    quad: &QuadrotorSpec,
) -> Result<EcsSignature, EcsError> {
    let grid = ecs_grid(cloud, bounds, quad)?;
    ecs_of_grid(&grid, quad)
}

/// Signature of an already discretized grid (resolution must equal the radius).
pub fn ecs_of_grid(grid: &VoxelGrid, quad: &QuadrotorSpec) -> Result<EcsSignature, EcsError> {
    let density = density_index(grid, quad)?;
    let clutter = clutter_index(grid, quad)?.value();
    let structure = structure_index(grid)?;
    Ok(EcsSignature {
        density,
        clutter,
        structure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Vec3;

    fn quad(r: f64) -> QuadrotorSpec {
        QuadrotorSpec {
            radius: r,
            ..Default::default()
        }
    }

    #[test]
    fn ecs_grid_dims_at_radius() {
        let g = ecs_grid(&PointCloud::empty(), Bounds::default(), &quad(0.2)).unwrap();
        assert_eq!(g.dims(), [100, 50, 25]);
        assert_eq!(g.len(), 125_000);
    }

    #[test]
    fn single_point_is_one_cell_at_any_radius() {
        for r in [0.1, 0.2, 0.35] {
            let cloud = PointCloud::new(vec![Vec3::new(3.3, 4.1, 2.2)]).unwrap();
            let g = ecs_grid(&cloud, Bounds::default(), &quad(r)).unwrap();
            assert_eq!(g.occupied_count(), 1);
        }
    }

    #[test]
    fn density_anchors() {
        let q = quad(0.2);
        let mut g = VoxelGrid::new(Bounds::default(), 0.2).unwrap();
        assert_eq!(density_index(&g, &q).unwrap(), 0.0);
        for i in 0..12_500 {
            let c = g.cell_of_linear(i * 10);
            g.set_occupied(c, true);
        }
        assert!((density_index(&g, &q).unwrap() - 0.1).abs() < 1e-12);
        let full = VoxelGrid::from_occupancy(Bounds::default(), 0.2, vec![true; 125_000]).unwrap();
        assert!((density_index(&full, &q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_rejects_resolution_mismatch() {
        let g = VoxelGrid::new(Bounds::default(), 0.1).unwrap();
        assert!(matches!(
            density_index(&g, &quad(0.2)),
            Err(EcsError::ResolutionMismatch { .. })
        ));
    }

    #[test]
    fn clutter_anchors() {
        // Alternate occupied/free cells along one row: every free cell touches an obstacle at D = r.
        let b = Bounds::from_extent(1.0, 0.2, 0.2).unwrap();
        let mut g = VoxelGrid::new(b, 0.2).unwrap();
        for i in (0..5).step_by(2) {
            g.set_occupied([i, 0, 0], true);
        }
        let c = clutter_index(&g, &quad(0.2)).unwrap();
        assert!((c.raw - 1.0).abs() < 1e-12);
        assert!(c.feasible());

        // D = 2.0 m with r = 0.2 along a line of 11 cells with one obstacle at the end.
        let b = Bounds::from_extent(2.2, 0.2, 0.2).unwrap();
        let mut g = VoxelGrid::new(b, 0.2).unwrap();
        g.set_occupied([0, 0, 0], true);
        let c = clutter_index(&g, &quad(0.2)).unwrap();
        assert!((c.dispersion - 2.0).abs() < 1e-12);
        assert!((c.value() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn clutter_undefined_cases() {
        let q = quad(1.0);
        let b = Bounds::from_extent(3.0, 3.0, 3.0).unwrap();
        let empty = VoxelGrid::new(b, 1.0).unwrap();
        assert_eq!(
            clutter_index(&empty, &q),
            Err(EcsError::NoObstacles("clutter"))
        );
        let full = VoxelGrid::from_occupancy(b, 1.0, vec![true; 27]).unwrap();
        assert_eq!(clutter_index(&full, &q), Err(EcsError::NoFreeSpace));
    }

    #[test]
    fn structure_anchors() {
        let b = Bounds::from_extent(9.0, 9.0, 9.0).unwrap();
        let mut g = VoxelGrid::new(b, 1.0).unwrap();
        g.set_occupied([4, 4, 4], true);
        assert_eq!(structure_index(&g).unwrap(), 1.0);

        let full = VoxelGrid::from_occupancy(b, 1.0, vec![true; 729]).unwrap();
        assert_eq!(structure_index(&full).unwrap(), 0.0);

        let b = Bounds::from_extent(20.0, 20.0, 20.0).unwrap();
        let mut g = VoxelGrid::new(b, 1.0).unwrap();
        for k in 5..15 {
            for j in 5..15 {
                for i in 5..15 {
                    g.set_occupied([i, j, k], true);
                }
            }
        }
        assert!((structure_index(&g).unwrap() - 0.488).abs() < 1e-12);
        assert_eq!(
            structure_index(&VoxelGrid::new(b, 1.0).unwrap()),
            Err(EcsError::NoObstacles("structure"))
        );
    }

    #[test]
    fn structure_26_connectivity_sees_edge_neighbors() {
        // A cell whose face neighbors are all occupied but a diagonal is free.
        let b = Bounds::from_extent(3.0, 3.0, 3.0).unwrap();
        let mut occ = vec![true; 27];
        occ[0] = false;
        let g = VoxelGrid::from_occupancy(b, 1.0, occ).unwrap();
        let s6 = structure_index_with(&g, Connectivity::Face6).unwrap();
        let s26 = structure_index_with(&g, Connectivity::Full26).unwrap();
        assert!(s26 > s6);
    }

    #[test]
    fn empty_cloud_signature_is_an_error() {
        assert!(ecs(&PointCloud::empty(), Bounds::default(), &quad(0.2)).is_err());
    }
}
