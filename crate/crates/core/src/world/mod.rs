//! Canonical spatial types shared by every stage of the workbench.
//!
//! Point clouds are the common currency of all environment sources. They are
//! binned into a [`VoxelGrid`] at two resolutions: the quadrotor radius for
//! complexity scoring and half of it for planning.

mod edt;
mod grid;
mod sum;

pub use edt::{distance_transform, DistanceField};
pub use grid::{discretize, discretize_counted, inflate, Cell, VoxelGrid};
pub use sum::OccupancySum;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// 3-D position or vector in meters.
pub type Vec3 = Vector3<f64>;

/// Inflated grid at the planning resolution (half the quadrotor radius).
pub fn planning_grid(
    cloud: &PointCloud,
    bounds: Bounds,
    quad: &QuadrotorSpec,
    inflation: f64,
) -> Result<VoxelGrid, WorldError> {
    quad.validate()?;
    let raw = discretize(cloud, bounds, quad.planning_resolution())?;
    inflate(&raw, inflation)
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum WorldError {
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("invalid bounds: min {min:?} must be strictly below max {max:?} on every axis")]
    InvalidBounds { min: [f64; 3], max: [f64; 3] },
    #[error("resolution must be finite and positive, got {0}")]
    InvalidResolution(f64),
    #[error("inflation margin must be finite and non-negative, got {0}")]
    InvalidMargin(f64),
    #[error("grid has no occupied cells")]
    NoObstacles,
    #[error("occupancy length {got} does not match grid size {expected}")]
    OccupancyLength { expected: usize, got: usize },
    #[error("invalid quadrotor parameter {name}: {value}")]
    InvalidQuadrotor { name: &'static str, value: f64 },
}

/// Raw obstacle points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self, WorldError> {
        if let Some(index) = points
            .iter()
            .position(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
        {
            return Err(WorldError::NonFinitePoint { index });
        }
        Ok(Self { points })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    /// Appends another cloud. Both are already validated, so no checks are needed.
    pub fn extend(&mut self, other: PointCloud) {
        self.points.extend(other.points);
    }
}

/// Axis-aligned workspace box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds", into = "RawBounds")]
pub struct Bounds {
    min: Vec3,
    max: Vec3,
}

#[derive(Serialize, Deserialize)]
struct RawBounds {
    min: [f64; 3],
    max: [f64; 3],
}

impl TryFrom<RawBounds> for Bounds {
    type Error = WorldError;

    fn try_from(raw: RawBounds) -> Result<Self, Self::Error> {
        Bounds::new(Vec3::from(raw.min), Vec3::from(raw.max))
    }
}

impl From<Bounds> for RawBounds {
    fn from(b: Bounds) -> Self {
        RawBounds {
            min: b.min.into(),
            max: b.max.into(),
        }
    }
}

impl Bounds {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self, WorldError> {
        let ok = (0..3).all(|k| min[k].is_finite() && max[k].is_finite() && max[k] > min[k]);
        if !ok {
            return Err(WorldError::InvalidBounds {
                min: min.into(),
                max: max.into(),
            });
        }
        Ok(Self { min, max })
    }

    /// Box anchored at the origin with the given extents.
    pub fn from_extent(sx: f64, sy: f64, sz: f64) -> Result<Self, WorldError> {
        Self::new(Vec3::zeros(), Vec3::new(sx, sy, sz))
    }

    pub fn min(&self) -> Vec3 {
        self.min
    }

    pub fn max(&self) -> Vec3 {
        self.max
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x * e.y * e.z
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Closed containment test.
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    /// Half-open containment test: `min <= p < max`.
    pub fn contains_half_open(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] < self.max[k])
    }
}

impl Default for Bounds {
    /// The 20 m x 10 m x 5 m benchmark workspace.
    fn default() -> Self {
        Self {
            min: Vec3::zeros(),
            max: Vec3::new(20.0, 10.0, 5.0),
        }
    }
}

/// Physical limits of the vehicle, modeled as a sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrotorSpec {
    pub radius: f64,
    pub v_max: f64,
    pub a_max: f64,
    pub mass: f64,
    pub max_thrust: f64,
}

impl Default for QuadrotorSpec {
    fn default() -> Self {
        Self {
            radius: 0.2,
            v_max: 3.0,
            a_max: 2.0,
            mass: 1.5,
            max_thrust: 31.0,
        }
    }
}

impl QuadrotorSpec {
    pub fn validate(&self) -> Result<(), WorldError> {
        for (name, value) in [
            ("radius", self.radius),
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("mass", self.mass),
            ("max_thrust", self.max_thrust),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(WorldError::InvalidQuadrotor { name, value });
            }
        }
        Ok(())
    }

    /// Resolution of the planning grid: half the radius.
    pub fn planning_resolution(&self) -> f64 {
        self.radius * 0.5
    }
}
