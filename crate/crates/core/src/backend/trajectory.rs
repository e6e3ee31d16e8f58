//! Piecewise quintic trajectories.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::world::Vec3;

/// One polynomial piece in local time `t in [0, duration]`; coefficients are
/// in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub coeffs_x: [f64; 6],
    pub coeffs_y: [f64; 6],
    pub coeffs_z: [f64; 6],
}

impl Segment {
    pub fn axis(&self, k: usize) -> &[f64; 6] {
        match k {
            0 => &self.coeffs_x,
            1 => &self.coeffs_y,
            _ => &self.coeffs_z,
        }
    }

    pub fn axis_mut(&mut self, k: usize) -> &mut [f64; 6] {
        match k {
            0 => &mut self.coeffs_x,
            1 => &mut self.coeffs_y,
            _ => &mut self.coeffs_z,
        }
    }

    /// `deriv`-th derivative at local time `t`.
    pub fn eval(&self, t: f64, deriv: usize) -> Vec3 {
        Vec3::new(
            poly_eval(&self.coeffs_x, t, deriv),
            poly_eval(&self.coeffs_y, t, deriv),
            poly_eval(&self.coeffs_z, t, deriv),
        )
    }

    /// Exact integral of the squared jerk norm over the segment.
    pub fn jerk_energy(&self) -> f64 {
        (0..3)
            .map(|k| axis_jerk_energy(self.axis(k), self.duration))
            .sum()
    }
}

pub(crate) fn poly_eval(c: &[f64; 6], t: f64, deriv: usize) -> f64 {
    // Falling-factorial weights for derivatives 0..=3.
    const W: [[f64; 6]; 4] = [
        [1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        [0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        [0.0, 0.0, 2.0, 6.0, 12.0, 20.0],
        [0.0, 0.0, 0.0, 6.0, 24.0, 60.0],
    ];
    let w = &W[deriv];
    let mut acc = 0.0;
    for i in (deriv..6).rev() {
        acc = acc * t + w[i] * c[i];
    }
    acc
}

/// `integral_0^T (6 c3 + 24 c4 t + 60 c5 t^2)^2 dt`.
pub(crate) fn axis_jerk_energy(c: &[f64; 6], t: f64) -> f64 {
    let (c3, c4, c5) = (c[3], c[4], c[5]);
    let t2 = t * t;
    let t3 = t2 * t;
    36.0 * t * c3 * c3
        + 144.0 * t2 * c3 * c4
        + 240.0 * t3 * c3 * c5
        + 192.0 * t3 * c4 * c4
        + 720.0 * t3 * t * c4 * c5
        + 720.0 * t3 * t2 * c5 * c5
}

/// Position, velocity and acceleration at a knot or endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

impl BoundaryState {
    pub fn rest(position: Vec3) -> Self {
        BoundaryState {
            position,
            velocity: Vec3::zeros(),
            acceleration: Vec3::zeros(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub segments: Vec<Segment>,
    /// Total duration in seconds.
    #[serde(rename = "T")]
    pub total_duration: f64,
}

impl Trajectory {
    pub fn new(segments: Vec<Segment>) -> Self {
        let total_duration = segments.iter().map(|s| s.duration).sum();
        Trajectory {
            segments,
            total_duration,
        }
    }

    pub fn duration(&self) -> f64 {
        self.total_duration
    }

    /// Segment index and local time for global time `t` (clamped to `[0, T]`).
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let mut t = t.clamp(0.0, self.total_duration);
        let last = self.segments.len() - 1;
        for (i, s) in self.segments.iter().enumerate() {
            if t <= s.duration || i == last {
                return (i, t.min(s.duration));
            }
            t -= s.duration;
        }
        unreachable!("trajectory has segments")
    }

    pub fn eval(&self, t: f64, deriv: usize) -> Vec3 {
        let (i, tl) = self.locate(t);
        self.segments[i].eval(tl, deriv)
    }

    pub fn position(&self, t: f64) -> Vec3 {
        self.eval(t, 0)
    }

    pub fn velocity(&self, t: f64) -> Vec3 {
        self.eval(t, 1)
    }

    pub fn acceleration(&self, t: f64) -> Vec3 {
        self.eval(t, 2)
    }

    pub fn jerk(&self, t: f64) -> Vec3 {
        self.eval(t, 3)
    }

    pub fn start_state(&self) -> BoundaryState {
        let s = &self.segments[0];
        BoundaryState {
            position: s.eval(0.0, 0),
            velocity: s.eval(0.0, 1),
            acceleration: s.eval(0.0, 2),
        }
    }

    pub fn end_state(&self) -> BoundaryState {
        let s = self.segments.last().expect("trajectory has segments");
        BoundaryState {
            position: s.eval(s.duration, 0),
            velocity: s.eval(s.duration, 1),
            acceleration: s.eval(s.duration, 2),
        }
    }

    /// Knot positions, including both ends.
    pub fn knots(&self) -> Vec<Vec3> {
        let mut v = vec![self.segments[0].eval(0.0, 0)];
        v.extend(self.segments.iter().map(|s| s.eval(s.duration, 0)));
        v
    }

    /// Largest jump in position, velocity or acceleration across interior knots.
    pub fn continuity_error(&self) -> f64 {
        self.segments
            .windows(2)
            .flat_map(|w| {
                (0..3).map(move |d| (w[0].eval(w[0].duration, d) - w[1].eval(0.0, d)).amax())
            })
            .fold(0.0, f64::max)
    }

    /// `integral_0^T |jerk|^2 dt`, exact.
    pub fn jerk_energy(&self) -> f64 {
        self.segments.iter().map(Segment::jerk_energy).sum()
    }

    /// `(1/T) integral_0^T |jerk|^2 dt`, exact.
    pub fn mean_squared_jerk(&self) -> f64 {
        self.jerk_energy() / self.total_duration
    }

    /// Sample times `0, dt, 2 dt, ...` plus `T`.
    pub fn sample_times(&self, dt: f64) -> Vec<f64> {
        let n = (self.total_duration / dt).floor() as usize;
        let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        if self.total_duration - ts[n] > 1e-12 {
            ts.push(self.total_duration);
        }
        ts
    }

    /// CSV with columns `t,px,py,pz,vx,vy,vz,ax,ay,az,jx,jy,jz`.
    pub fn sampled_csv(&self, dt: f64) -> String {
        let mut s = String::from("t,px,py,pz,vx,vy,vz,ax,ay,az,jx,jy,jz\n");
        for t in self.sample_times(dt) {
            let (i, tl) = self.locate(t);
            let seg = &self.segments[i];
            write!(s, "{t:.6}").unwrap();
            for d in 0..4 {
                let v = seg.eval(tl, d);
                write!(s, ",{:.9},{:.9},{:.9}", v.x, v.y, v.z).unwrap();
            }
            s.push('\n');
        }
        s
    }
}
