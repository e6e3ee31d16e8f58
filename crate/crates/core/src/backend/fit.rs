//! Closed-form minimum-jerk fitting through fixed knots.

use super::trajectory::{BoundaryState, Segment, Trajectory};
use super::BackendError;
use crate::world::Vec3;

/// Rest-free trapezoidal duration per segment.
pub fn allocate_times(
    waypoints: &[Vec3],
    v_max: f64,
    a_max: f64,
) -> Result<Vec<f64>, BackendError> {
    if waypoints.len() < 2 {
        return Err(BackendError::Contract("need at least two waypoints".into()));
    }
    if !(v_max > 0.0 && a_max > 0.0 && v_max.is_finite() && a_max.is_finite()) {
        return Err(BackendError::Contract(format!(
            "limits must be positive, got v={v_max}, a={a_max}"
        )));
    }
    waypoints
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let l = (w[1] - w[0]).norm();
            if !(l > 1e-12) {
                return Err(BackendError::Contract(format!(
                    "segment {i} has zero length"
                )));
            }
            Ok(if l >= v_max * v_max / a_max {
                l / v_max + v_max / a_max
            } else {
                2.0 * (l / a_max).sqrt()
            })
        })
        .collect()
}

/// Hermite map from `[p0, v0, a0, p1, v1, a1]` to `[c3, c4, c5]`.
fn hermite(t: f64) -> [[f64; 6]; 3] {
    let (t2, t3) = (t * t, t * t * t);
    let (k3, k4, k5) = (0.5 / t3, 0.5 / (t3 * t), 0.5 / (t3 * t2));
    [
        [
            -20.0 * k3,
            -12.0 * t * k3,
            -3.0 * t2 * k3,
            20.0 * k3,
            -8.0 * t * k3,
            t2 * k3,
        ],
        [
            30.0 * k4,
            16.0 * t * k4,
            3.0 * t2 * k4,
            -30.0 * k4,
            14.0 * t * k4,
            -2.0 * t2 * k4,
        ],
        [
            -12.0 * k5,
            -6.0 * t * k5,
            -t2 * k5,
            12.0 * k5,
            -6.0 * t * k5,
            t2 * k5,
        ],
    ]
}

/// Jerk energy of one quintic as a quadratic form in its endpoint states.
fn segment_form(t: f64) -> [[f64; 6]; 6] {
    let (t2, t3) = (t * t, t * t * t);
    let h = [
        [36.0 * t, 72.0 * t2, 120.0 * t3],
        [72.0 * t2, 192.0 * t3, 360.0 * t3 * t],
        [120.0 * t3, 360.0 * t3 * t, 720.0 * t3 * t2],
    ];
    let m = hermite(t);
    let mut q = [[0.0; 6]; 6];
    for a in 0..6 {
        for b in 0..6 {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += m[i][a] * h[i][j] * m[j][b];
                }
            }
            q[a][b] = s;
        }
    }
    q
}

/// Symmetric positive-definite banded matrix, lower band stored row-wise.
pub(crate) struct BandedSpd {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSpd {
    pub(crate) fn zeros(n: usize, bw: usize) -> Self {
        BandedSpd {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        debug_assert!(j <= i && i - j <= self.bw);
        &mut self.data[i * (self.bw + 1) + (i - j)]
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.bw + 1) + (i - j)]
    }

    /// Adds to entry `(i, j)` of the symmetric matrix.
    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        if j <= i {
            *self.at(i, j) += v;
        }
    }

    /// In-place Cholesky; `None` when not positive definite.
    pub(crate) fn factor(mut self) -> Option<Self> {
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bw);
            for j in j0..=i {
                let mut s = self.get(i, j);
                for k in j0.max(j.saturating_sub(self.bw))..j {
                    s -= self.get(i, k) * self.get(j, k);
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    *self.at(i, i) = s.sqrt();
                } else {
                    *self.at(i, j) = s / self.get(j, j);
                }
            }
        }
        Some(self)
    }

    /// Solves with a factored matrix.
    pub(crate) fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.get(i, k) * b[k];
            }
            b[i] = s / self.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n.min(i + self.bw + 1) {
                s -= self.get(k, i) * b[k];
            }
            b[i] = s / self.get(i, i);
        }
    }
}

/// Minimum-jerk piecewise quintic through `waypoints` with C2 knots. Boundary
/// positions come from the first and last waypoint; `start` and `end` supply
/// the velocities and accelerations.
pub fn min_jerk_fit(
    waypoints: &[Vec3],
    durations: &[f64],
    start: &BoundaryState,
    end: &BoundaryState,
) -> Result<Trajectory, BackendError> {
    let n = durations.len();
    if n == 0 || waypoints.len() != n + 1 {
        return Err(BackendError::Contract(format!(
            "{} waypoints do not match {} durations",
            waypoints.len(),
            n
        )));
    }
    if let Some(i) = durations.iter().position(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(BackendError::Contract(format!(
            "duration {i} is not positive: {}",
            durations[i]
        )));
    }

    // Knot states [p, v, a] per axis; interior v and a are unknown.
    let mut states = vec![[[0.0f64; 3]; 3]; n + 1];
    for (i, w) in waypoints.iter().enumerate() {
        for k in 0..3 {
            states[i][k][0] = w[k];
        }
    }
    for k in 0..3 {
        states[0][k][1] = start.velocity[k];
        states[0][k][2] = start.acceleration[k];
        states[n][k][1] = end.velocity[k];
        states[n][k][2] = end.acceleration[k];
    }

    if n > 1 {
        let nf = 2 * (n - 1);
        let free = |knot: usize, comp: usize| -> Option<usize> {
            (comp > 0 && knot > 0 && knot < n).then(|| 2 * (knot - 1) + comp - 1)
        };
        let mut a = BandedSpd::zeros(nf, 3);
        let mut rhs = vec![[0.0f64; 3]; nf];
        for (s, &t) in durations.iter().enumerate() {
            let q = segment_form(t);
            let idx = |l: usize| (s + l / 3, l % 3);
            for la in 0..6 {
                let (ka, ca) = idx(la);
                let Some(fa) = free(ka, ca) else { continue };
                for lb in 0..6 {
                    let (kb, cb) = idx(lb);
                    match free(kb, cb) {
                        Some(fb) => a.add(fa, fb, q[la][lb]),
                        None => {
                            for k in 0..3 {
                                rhs[fa][k] -= q[la][lb] * states[kb][k][cb];
                            }
                        }
                    }
                }
            }
        }
        let a = a
            .factor()
            .ok_or_else(|| BackendError::Contract("singular minimum-jerk system".into()))?;
        let mut b = vec![0.0; nf];
        for k in 0..3 {
            for (i, r) in rhs.iter().enumerate() {
                b[i] = r[k];
            }
            a.solve(&mut b);
            for knot in 1..n {
                states[knot][k][1] = b[2 * (knot - 1)];
                states[knot][k][2] = b[2 * (knot - 1) + 1];
            }
        }
    }

    let segments = durations
        .iter()
        .enumerate()
        .map(|(s, &t)| {
            let m = hermite(t);
            let mut seg = Segment {
                duration: t,
                coeffs_x: [0.0; 6],
                coeffs_y: [0.0; 6],
                coeffs_z: [0.0; 6],
            };
            for k in 0..3 {
                let x = [
                    states[s][k][0],
                    states[s][k][1],
                    states[s][k][2],
                    states[s + 1][k][0],
                    states[s + 1][k][1],
                    states[s + 1][k][2],
                ];
                let c = seg.axis_mut(k);
                c[0] = x[0];
                c[1] = x[1];
                c[2] = 0.5 * x[2];
                for r in 0..3 {
                    c[3 + r] = (0..6).map(|j| m[r][j] * x[j]).sum();
                }
            }
            seg
        })
        .collect();
    Ok(Trajectory::new(segments))
}
