use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sample_box_surface, EnvError};
use crate::world::{Bounds, PointCloud, Vec3};

/// Closed sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn validate(&self, what: &str) -> Result<(), EnvError> {
        if self.min > 0.0 && self.min <= self.max && self.max.is_finite() {
            Ok(())
        } else {
            Err(EnvError::Config(format!(
                "{what}: range must satisfy 0 < min <= max"
            )))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.min * k, self.max * k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub count: usize,
    pub radius: Range,
    pub height: Range,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidSpec {
    pub count: usize,
    pub semi_axis: Range,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub count: usize,
    pub edge: Range,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub count: usize,
    pub inner_radius: Range,
    pub tube_radius: Range,
}

/// Per-shape counts and size ranges for an obstacle map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObstacleSpec {
    pub cylinders: CylinderSpec,
    pub ellipsoids: EllipsoidSpec,
    pub boxes: BoxSpec,
    pub gates: GateSpec,
    pub point_spacing: f64,
    /// Minimum clearance between a shape's bounding box and the bounds.
    pub placement_margin: f64,
    pub fill_interior: bool,
    pub seed: u64,
}

impl Default for ObstacleSpec {
    fn default() -> Self {
        Self {
            cylinders: CylinderSpec {
                count: 12,
                radius: Range::new(0.2, 0.6),
                height: Range::new(2.0, 5.0),
            },
            ellipsoids: EllipsoidSpec {
                count: 6,
                semi_axis: Range::new(0.3, 1.0),
            },
            boxes: BoxSpec {
                count: 6,
                edge: Range::new(0.4, 1.5),
            },
            gates: GateSpec {
                count: 2,
                inner_radius: Range::new(0.6, 1.0),
                tube_radius: Range::new(0.1, 0.2),
            },
            point_spacing: 0.05,
            placement_margin: 0.0,
            fill_interior: false,
            seed: 0,
        }
    }
}

impl ObstacleSpec {
    /// A spec with every count set to zero.
    pub fn empty() -> Self {
        let mut s = Self::default();
        s.cylinders.count = 0;
        s.ellipsoids.count = 0;
        s.boxes.count = 0;
        s.gates.count = 0;
        s
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        self.cylinders.radius.validate("cylinder radius")?;
        self.cylinders.height.validate("cylinder height")?;
        self.ellipsoids.semi_axis.validate("ellipsoid semi-axis")?;
        self.boxes.edge.validate("box edge")?;
        self.gates.inner_radius.validate("gate inner radius")?;
        self.gates.tube_radius.validate("gate tube radius")?;
        if !(self.point_spacing > 0.0) {
            return Err(EnvError::Config("point spacing must be positive".into()));
        }
        if !(self.placement_margin >= 0.0) {
            return Err(EnvError::Config(
                "placement margin must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// A shape placed in the world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum PlacedShape {
    /// Vertical cylinder standing on the floor of the bounds.
    Cylinder {
        base: [f64; 3],
        radius: f64,
        height: f64,
    },
    Ellipsoid {
        center: [f64; 3],
        semi_axes: [f64; 3],
    },
    /// Box rotated by `yaw` about the vertical axis through its center.
    Box {
        center: [f64; 3],
        edges: [f64; 3],
        yaw: f64,
    },
    /// Vertical torus; `yaw` rotates the ring plane about the vertical axis.
    Gate {
        center: [f64; 3],
        inner_radius: f64,
        tube_radius: f64,
        yaw: f64,
    },
}

impl PlacedShape {
    /// Distance from `p` to the analytic surface (exact for cylinder, box and
    /// gate; an algebraic approximation for ellipsoids).
    pub fn surface_distance(&self, p: &Vec3) -> f64 {
        match *self {
            PlacedShape::Cylinder {
                base,
                radius,
                height,
            } => {
                let q = p - Vec3::from(base);
                let radial = (q.x * q.x + q.y * q.y).sqrt() - radius;
                let vertical = q.z.abs().min((q.z - height).abs());
                if q.z >= 0.0 && q.z <= height {
                    let lateral = radial.abs();
                    if radial <= 0.0 {
                        lateral.min(vertical)
                    } else {
                        lateral
                    }
                } else {
                    let dz = if q.z < 0.0 { -q.z } else { q.z - height };
                    (radial.max(0.0).powi(2) + dz * dz).sqrt()
                }
            }
            PlacedShape::Ellipsoid { center, semi_axes } => {
                let q = p - Vec3::from(center);
                let s = Vec3::from(semi_axes);
                let k = (q.x / s.x).powi(2) + (q.y / s.y).powi(2) + (q.z / s.z).powi(2);
                // First-order distance |f| / |grad f| with f = sqrt(k) - 1.
                let grad = Vec3::new(q.x / (s.x * s.x), q.y / (s.y * s.y), q.z / (s.z * s.z));
                let r = k.sqrt();
                if r == 0.0 {
                    return s.min();
                }
                (r - 1.0).abs() * r / grad.norm()
            }
            PlacedShape::Box { center, edges, yaw } => {
                let q = p - Vec3::from(center);
                let (s, c) = yaw.sin_cos();
                let local = Vec3::new(c * q.x + s * q.y, -s * q.x + c * q.y, q.z);
                let h = Vec3::from(edges) * 0.5;
                let d = local.abs() - h;
                let outside = Vec3::new(d.x.max(0.0), d.y.max(0.0), d.z.max(0.0)).norm();
                let inside = d.x.max(d.y).max(d.z).min(0.0);
                (outside + inside).abs()
            }
            PlacedShape::Gate {
                center,
                inner_radius,
                tube_radius,
                yaw,
            } => {
                let ring = gate_ring_distance(center, inner_radius, tube_radius, yaw, p);
                (ring - tube_radius).abs()
            }
        }
    }

    fn half_extent(&self) -> Vec3 {
        match *self {
            PlacedShape::Cylinder { radius, height, .. } => Vec3::new(radius, radius, height * 0.5),
            PlacedShape::Ellipsoid { semi_axes, .. } => Vec3::from(semi_axes),
            PlacedShape::Box { edges, yaw, .. } => {
                let (s, c) = yaw.sin_cos();
                let (s, c) = (s.abs(), c.abs());
                let h = Vec3::from(edges) * 0.5;
                Vec3::new(c * h.x + s * h.y, s * h.x + c * h.y, h.z)
            }
            PlacedShape::Gate {
                inner_radius,
                tube_radius,
                yaw,
                ..
            } => {
                let outer = inner_radius + 2.0 * tube_radius;
                let (s, c) = yaw.sin_cos();
                Vec3::new(
                    c.abs() * outer + s.abs() * tube_radius,
                    s.abs() * outer + c.abs() * tube_radius,
                    outer,
                )
            }
        }
    }

    fn contains(&self, p: &Vec3) -> bool {
        match *self {
            PlacedShape::Cylinder {
                base,
                radius,
                height,
            } => {
                let q = p - Vec3::from(base);
                q.x * q.x + q.y * q.y <= radius * radius && q.z >= 0.0 && q.z <= height
            }
            PlacedShape::Ellipsoid { center, semi_axes } => {
                let q = p - Vec3::from(center);
                (q.x / semi_axes[0]).powi(2)
                    + (q.y / semi_axes[1]).powi(2)
                    + (q.z / semi_axes[2]).powi(2)
                    <= 1.0
            }
            PlacedShape::Box { center, edges, yaw } => {
                let q = p - Vec3::from(center);
                let (s, c) = yaw.sin_cos();
                let local = Vec3::new(c * q.x + s * q.y, -s * q.x + c * q.y, q.z);
                (0..3).all(|k| local[k].abs() <= edges[k] * 0.5)
            }
            PlacedShape::Gate {
                center,
                inner_radius,
                tube_radius,
                yaw,
            } => gate_ring_distance(center, inner_radius, tube_radius, yaw, p) <= tube_radius,
        }
    }

    fn sample_surface(&self, spacing: f64, top: f64, out: &mut Vec<Vec3>) {
        match *self {
            PlacedShape::Cylinder {
                base,
                radius,
                height,
            } => {
                let b = Vec3::from(base);
                let n_theta = ((2.0 * PI * radius / spacing).ceil() as usize).max(3);
                let n_z = (height / spacing).ceil() as usize;
                for iz in 0..=n_z {
                    let z = height * iz as f64 / n_z as f64;
                    for it in 0..n_theta {
                        let t = 2.0 * PI * it as f64 / n_theta as f64;
                        out.push(b + Vec3::new(radius * t.cos(), radius * t.sin(), z));
                    }
                }
                // Cap only when the top is below the ceiling.
                if b.z + height < top - 1e-9 {
                    let n_r = (radius / spacing).ceil() as usize;
                    for ir in 0..n_r {
                        let r = radius * ir as f64 / n_r as f64;
                        let n_t = ((2.0 * PI * r / spacing).ceil() as usize).max(1);
                        for it in 0..n_t {
                            let t = 2.0 * PI * it as f64 / n_t as f64;
                            out.push(b + Vec3::new(r * t.cos(), r * t.sin(), height));
                        }
                    }
                }
            }
            PlacedShape::Ellipsoid { center, semi_axes } => {
                let c = Vec3::from(center);
                let a = Vec3::from(semi_axes);
                let big = a.max();
                let n_phi = ((PI * big / spacing).ceil() as usize).max(2);
                for ip in 0..=n_phi {
                    let phi = PI * ip as f64 / n_phi as f64;
                    let ring = big * phi.sin();
                    let n_t = ((2.0 * PI * ring / spacing).ceil() as usize).max(1);
                    for it in 0..n_t {
                        let t = 2.0 * PI * it as f64 / n_t as f64;
                        out.push(
                            c + Vec3::new(
                                a.x * phi.sin() * t.cos(),
                                a.y * phi.sin() * t.sin(),
                                a.z * phi.cos(),
                            ),
                        );
                    }
                }
            }
            PlacedShape::Box { center, edges, yaw } => {
                let h = Vec3::from(edges) * 0.5;
                let mut local = Vec::new();
                sample_box_surface(-h, h, spacing, &mut local);
                let c = Vec3::from(center);
                let (s, co) = yaw.sin_cos();
                out.extend(
                    local
                        .into_iter()
                        .map(|q| c + Vec3::new(co * q.x - s * q.y, s * q.x + co * q.y, q.z)),
                );
            }
            PlacedShape::Gate {
                center,
                inner_radius,
                tube_radius,
                yaw,
            } => {
                let c = Vec3::from(center);
                let (s, co) = yaw.sin_cos();
                let axis_h = Vec3::new(co, s, 0.0);
                let normal = Vec3::new(-s, co, 0.0);
                let up = Vec3::z();
                let major = inner_radius + tube_radius;
                let n_u = ((2.0 * PI * (major + tube_radius) / spacing).ceil() as usize).max(8);
                let n_v = ((2.0 * PI * tube_radius / spacing).ceil() as usize).max(4);
                for iu in 0..n_u {
                    let u = 2.0 * PI * iu as f64 / n_u as f64;
                    let radial = axis_h * u.cos() + up * u.sin();
                    for iv in 0..n_v {
                        let v = 2.0 * PI * iv as f64 / n_v as f64;
                        out.push(
                            c + radial * (major + tube_radius * v.cos())
                                + normal * (tube_radius * v.sin()),
                        );
                    }
                }
            }
        }
    }
}

/// Distance from `p` to the center circle of a vertical torus.
fn gate_ring_distance(
    center: [f64; 3],
    inner_radius: f64,
    tube_radius: f64,
    yaw: f64,
    p: &Vec3,
) -> f64 {
    let q = p - Vec3::from(center);
    let (s, c) = yaw.sin_cos();
    let u = q.dot(&Vec3::new(c, s, 0.0));
    let n = q.dot(&Vec3::new(-s, c, 0.0));
    let major = inner_radius + tube_radius;
    ((u * u + q.z * q.z).sqrt() - major).hypot(n)
}

/// Generated obstacle map together with the shapes that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleMap {
    pub cloud: PointCloud,
    pub shapes: Vec<PlacedShape>,
}

fn sample_center(
    rng: &mut ChaCha8Rng,
    bounds: &Bounds,
    half: Vec3,
    margin: f64,
    what: &str,
) -> Result<Vec3, EnvError> {
    let (lo, hi) = (bounds.min(), bounds.max());
    let mut c = Vec3::zeros();
    for k in 0..3 {
        let a = lo[k] + half[k] + margin;
        let b = hi[k] - half[k] - margin;
        if a > b {
            return Err(EnvError::Config(format!(
                "{what} does not fit inside the bounds"
            )));
        }
        c[k] = if a == b { a } else { rng.random_range(a..=b) };
    }
    Ok(c)
}

/// Places the requested shapes uniformly at random and samples their surfaces.
pub fn generate_obstacle_map(
    spec: &ObstacleSpec,
    bounds: &Bounds,
) -> Result<ObstacleMap, EnvError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut shapes = Vec::new();
    let floor = bounds.min().z;

    for _ in 0..spec.cylinders.count {
        let radius = spec.cylinders.radius.sample(&mut rng);
        let height = spec
            .cylinders
            .height
            .sample(&mut rng)
            .min(bounds.extent().z);
        let probe = PlacedShape::Cylinder {
            base: [0.0; 3],
            radius,
            height,
        };
        let mut c = sample_center(
            &mut rng,
            bounds,
            probe.half_extent(),
            spec.placement_margin,
            "cylinder",
        )?;
        c.z = floor;
        shapes.push(PlacedShape::Cylinder {
            base: c.into(),
            radius,
            height,
        });
    }
    for _ in 0..spec.ellipsoids.count {
        let semi_axes = [
            spec.ellipsoids.semi_axis.sample(&mut rng),
            spec.ellipsoids.semi_axis.sample(&mut rng),
            spec.ellipsoids.semi_axis.sample(&mut rng),
        ];
        let probe = PlacedShape::Ellipsoid {
            center: [0.0; 3],
            semi_axes,
        };
        let c = sample_center(
            &mut rng,
            bounds,
            probe.half_extent(),
            spec.placement_margin,
            "ellipsoid",
        )?;
        shapes.push(PlacedShape::Ellipsoid {
            center: c.into(),
            semi_axes,
        });
    }
    for _ in 0..spec.boxes.count {
        let edges = [
            spec.boxes.edge.sample(&mut rng),
            spec.boxes.edge.sample(&mut rng),
            spec.boxes.edge.sample(&mut rng),
        ];
        let yaw = rng.random_range(0.0..PI);
        let probe = PlacedShape::Box {
            center: [0.0; 3],
            edges,
            yaw,
        };
        let c = sample_center(
            &mut rng,
            bounds,
            probe.half_extent(),
            spec.placement_margin,
            "box",
        )?;
        shapes.push(PlacedShape::Box {
            center: c.into(),
            edges,
            yaw,
        });
    }
    for _ in 0..spec.gates.count {
        let inner_radius = spec.gates.inner_radius.sample(&mut rng);
        let tube_radius = spec.gates.tube_radius.sample(&mut rng);
        let yaw = rng.random_range(0.0..PI);
        let probe = PlacedShape::Gate {
            center: [0.0; 3],
            inner_radius,
            tube_radius,
            yaw,
        };
        let c = sample_center(
            &mut rng,
            bounds,
            probe.half_extent(),
            spec.placement_margin,
            "gate",
        )?;
        shapes.push(PlacedShape::Gate {
            center: c.into(),
            inner_radius,
            tube_radius,
            yaw,
        });
    }

    let top = bounds.max().z;
    let mut points = Vec::new();
    for shape in &shapes {
        shape.sample_surface(spec.point_spacing, top, &mut points);
        if spec.fill_interior {
            fill_interior(shape, spec.point_spacing, &mut points);
        }
    }
    Ok(ObstacleMap {
        cloud: PointCloud::new(points)?,
        shapes,
    })
}

fn fill_interior(shape: &PlacedShape, spacing: f64, out: &mut Vec<Vec3>) {
    let half = shape.half_extent();
    let center = match *shape {
        PlacedShape::Cylinder { base, height, .. } => {
            Vec3::from(base) + Vec3::new(0.0, 0.0, height * 0.5)
        }
        PlacedShape::Ellipsoid { center, .. }
        | PlacedShape::Box { center, .. }
        | PlacedShape::Gate { center, .. } => Vec3::from(center),
    };
    let lo = center - half;
    let n: Vec<usize> = (0..3)
        .map(|k| (2.0 * half[k] / spacing).ceil() as usize)
        .collect();
    for k in 0..=n[2] {
        for j in 0..=n[1] {
            for i in 0..=n[0] {
                let p = lo + Vec3::new(i as f64, j as f64, k as f64) * spacing;
                if shape.contains(&p) {
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
    fn zero_counts_give_empty_cloud() {
        let m = generate_obstacle_map(&ObstacleSpec::empty(), &Bounds::default()).unwrap();
        assert!(m.cloud.is_empty());
        assert!(m.shapes.is_empty());
    }

    #[test]
    fn single_cylinder_lies_on_its_lateral_surface() {
        let mut spec = ObstacleSpec::empty();
        spec.cylinders = CylinderSpec {
            count: 1,
            radius: Range::new(0.5, 0.5),
            height: Range::new(5.0, 5.0),
        };
        spec.seed = 17;
        let m = generate_obstacle_map(&spec, &Bounds::default()).unwrap();
        let PlacedShape::Cylinder { base, .. } = m.shapes[0] else {
            panic!("expected a cylinder")
        };
        assert!(!m.cloud.is_empty());
        for p in m.cloud.points() {
            let r2 = (p.x - base[0]).powi(2) + (p.y - base[1]).powi(2);
            assert!((r2 - 0.25).abs() < 1e-9, "r^2 = {r2}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = ObstacleSpec {
            point_spacing: 0.2,
            seed: 5,
            ..Default::default()
        };
        let a = generate_obstacle_map(&spec, &Bounds::default()).unwrap();
        let b = generate_obstacle_map(&spec, &Bounds::default()).unwrap();
        assert_eq!(a, b);
        let bits = |m: &ObstacleMap| -> Vec<u64> {
            m.cloud
                .points()
                .iter()
                .flat_map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()])
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn surface_points_within_half_spacing() {
        let spec = ObstacleSpec {
            point_spacing: 0.1,
            seed: 8,
            ..Default::default()
        };
        let m = generate_obstacle_map(&spec, &Bounds::default()).unwrap();
        // Every point must be near at least one generating surface.
        for p in m.cloud.points() {
            let d = m
                .shapes
                .iter()
                .map(|s| s.surface_distance(p))
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 0.05 + 1e-9, "point {p:?} is {d} from every surface");
        }
    }

    #[test]
    fn too_large_shape_is_a_config_error() {
        let mut spec = ObstacleSpec::empty();
        spec.ellipsoids = EllipsoidSpec {
            count: 1,
            semi_axis: Range::new(30.0, 30.0),
        };
        assert!(matches!(
            generate_obstacle_map(&spec, &Bounds::default()),
            Err(EnvError::Config(_))
        ));
    }

    #[test]
    fn fill_interior_adds_points_inside() {
        let mut spec = ObstacleSpec::empty();
        spec.boxes = BoxSpec {
            count: 1,
            edge: Range::new(1.0, 1.0),
        };
        spec.point_spacing = 0.2;
        let hollow = generate_obstacle_map(&spec, &Bounds::default()).unwrap();
        spec.fill_interior = true;
        let solid = generate_obstacle_map(&spec, &Bounds::default()).unwrap();
        assert!(solid.cloud.len() > hollow.cloud.len());
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut spec = ObstacleSpec::default();
        spec.boxes.edge = Range::new(2.0, 1.0);
        assert!(spec.validate().is_err());
    }
}
