//! Penalty-based corridor trajectory optimization over knots and durations.

use serde::{Deserialize, Serialize};

use super::fit::min_jerk_fit;
use super::trajectory::{BoundaryState, Trajectory};
use super::BackendError;
use crate::corridor::{Corridor, Polytope};
use crate::world::{QuadrotorSpec, Vec3};

/// Norm used for velocity and acceleration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitNorm {
    Euclidean,
    Infinity,
}

impl LimitNorm {
    pub fn of(self, v: &Vec3) -> f64 {
        match self {
            LimitNorm::Euclidean => v.norm(),
            LimitNorm::Infinity => v.amax(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub corridor_weight: f64,
    pub velocity_weight: f64,
    pub acceleration_weight: f64,
    /// Weight on total duration.
    pub time_weight: f64,
    /// Penalty samples per segment.
    pub samples_per_segment: usize,
    pub max_iterations: usize,
    /// Relative merit decrease below which the descent stops.
    pub tolerance: f64,
    /// Duration factor of the feasibility pass.
    pub time_scale: f64,
    pub max_scalings: usize,
    /// Penalty rounds, each with ten times the previous corridor weight.
    pub corridor_rounds: usize,
    /// Polytopes are shrunk by this much (m) inside the penalty.
    pub corridor_margin: f64,
    /// Fraction of the limits targeted by the penalties.
    pub limit_slack: f64,
    pub limit_norm: LimitNorm,
    /// Final check spacing (s).
    pub check_dt: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            corridor_weight: 1e4,
            velocity_weight: 1e2,
            acceleration_weight: 1e2,
            time_weight: 1.0,
            samples_per_segment: 16,
            max_iterations: 100,
            tolerance: 1e-6,
            time_scale: 1.2,
            max_scalings: 20,
            corridor_rounds: 3,
            corridor_margin: 0.02,
            limit_slack: 0.95,
            limit_norm: LimitNorm::Euclidean,
            check_dt: 0.01,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        let bad = |what: &str| {
            Err(BackendError::Contract(format!(
                "invalid optimizer config: {what}"
            )))
        };
        for (name, w) in [
            ("corridor_weight", self.corridor_weight),
            ("velocity_weight", self.velocity_weight),
            ("acceleration_weight", self.acceleration_weight),
            ("time_weight", self.time_weight),
            ("corridor_margin", self.corridor_margin),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return bad(name);
            }
        }
        if self.samples_per_segment < 4 {
            return bad("samples_per_segment must be at least 4");
        }
        if !(self.time_scale > 1.0 && self.time_scale.is_finite()) {
            return bad("time_scale must exceed 1");
        }
        if !(self.limit_slack > 0.0 && self.limit_slack <= 1.0) {
            return bad("limit_slack must be in (0, 1]");
        }
        if !(self.check_dt > 0.0 && self.tolerance >= 0.0) {
            return bad("check_dt must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationOutcome {
    pub trajectory: Trajectory,
    /// Merit after each accepted descent step, per round.
    pub history: Vec<Vec<f64>>,
    pub iterations: usize,
    pub scalings: usize,
}

struct Problem<'a> {
    polys: Vec<Polytope>,
    start: &'a BoundaryState,
    goal: &'a BoundaryState,
    config: &'a OptimizerConfig,
    v_lim: f64,
    a_lim: f64,
}

impl Problem<'_> {
    fn m(&self) -> usize {
        self.polys.len()
    }

    fn unpack(&self, z: &[f64]) -> (Vec<Vec3>, Vec<f64>) {
        let m = self.m();
        let mut w = Vec::with_capacity(m + 1);
        w.push(self.start.position);
        for i in 0..m - 1 {
            w.push(Vec3::new(z[3 * i], z[3 * i + 1], z[3 * i + 2]));
        }
        w.push(self.goal.position);
        let d = z[3 * (m - 1)..].iter().map(|l| l.exp()).collect();
        (w, d)
    }

    fn fit(&self, z: &[f64]) -> Option<Trajectory> {
        let (w, d) = self.unpack(z);
        min_jerk_fit(&w, &d, self.start, self.goal).ok()
    }

    fn merit(&self, z: &[f64], corridor_weight: f64) -> f64 {
        let Some(tr) = self.fit(z) else {
            return f64::INFINITY;
        };
        let c = self.config;
        let k = c.samples_per_segment;
        let (v2, a2) = (self.v_lim * self.v_lim, self.a_lim * self.a_lim);
        let mut pen_c = 0.0;
        let mut pen_v = 0.0;
        let mut pen_a = 0.0;
        for (seg, poly) in tr.segments.iter().zip(&self.polys) {
            for j in 0..=k {
                let t = seg.duration * j as f64 / k as f64;
                let p = seg.eval(t, 0);
                for (n, b) in poly.normals.iter().zip(&poly.offsets) {
                    let e = n.dot(&p) - (b - c.corridor_margin);
                    if e > 0.0 {
                        pen_c += e * e;
                    }
                }
                let v = seg.eval(t, 1);
                let a = seg.eval(t, 2);
                match c.limit_norm {
                    LimitNorm::Euclidean => {
                        pen_v += hinge2(v.norm_squared() - v2);
                        pen_a += hinge2(a.norm_squared() - a2);
                    }
                    LimitNorm::Infinity => {
                        for i in 0..3 {
                            pen_v += hinge2(v[i] * v[i] - v2);
                            pen_a += hinge2(a[i] * a[i] - a2);
                        }
                    }
                }
            }
        }
        tr.jerk_energy()
            + c.time_weight * tr.duration()
            + corridor_weight * pen_c
            + c.velocity_weight * pen_v
            + c.acceleration_weight * pen_a
    }
}

fn hinge2(e: f64) -> f64 {
    if e > 0.0 {
        e * e
    } else {
        0.0
    }
}

/// Largest sampled halfspace violation of each segment against its own polytope.
pub fn corridor_violation(traj: &Trajectory, corridor: &Corridor, dt: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for t in traj.sample_times(dt) {
        let (i, tl) = traj.locate(t);
        let p = traj.segments[i].eval(tl, 0);
        worst = worst.max(corridor.polytopes[i.min(corridor.len() - 1)].violation(&p));
    }
    worst
}

fn limits_hold(traj: &Trajectory, quad: &QuadrotorSpec, norm: LimitNorm, dt: f64) -> bool {
    traj.sample_times(dt).into_iter().all(|t| {
        let (i, tl) = traj.locate(t);
        let s = &traj.segments[i];
        norm.of(&s.eval(tl, 1)) <= quad.v_max && norm.of(&s.eval(tl, 2)) <= quad.a_max
    })
}

/// Fits a trajectory that stays in the corridor (segment `i` in polytope `i`)
/// and respects the vehicle limits at every `check_dt` sample.
pub fn optimize_trajectory(
    corridor: &Corridor,
    start: &BoundaryState,
    goal: &BoundaryState,
    quad: &QuadrotorSpec,
    config: &OptimizerConfig,
) -> Result<Trajectory, BackendError> {
    optimize_trajectory_detailed(corridor, start, goal, quad, config).map(|o| o.trajectory)
}

pub fn optimize_trajectory_detailed(
    corridor: &Corridor,
    start: &BoundaryState,
    goal: &BoundaryState,
    quad: &QuadrotorSpec,
    config: &OptimizerConfig,
) -> Result<OptimizationOutcome, BackendError> {
    config.validate()?;
    quad.validate()
        .map_err(|e| BackendError::Contract(e.to_string()))?;
    let m = corridor.len();
    if m == 0 || corridor.witnesses.len() + 1 != m {
        return Err(BackendError::Contract(format!(
            "corridor has {m} polytopes and {} witnesses",
            corridor.witnesses.len()
        )));
    }
    if corridor.polytopes[0].violation(&start.position) > 1e-9 {
        return Err(BackendError::Contract(
            "start is outside the first polytope".into(),
        ));
    }
    if corridor.polytopes[m - 1].violation(&goal.position) > 1e-9 {
        return Err(BackendError::Contract(
            "goal is outside the last polytope".into(),
        ));
    }

    let prob = Problem {
        polys: corridor.polytopes.clone(),
        start,
        goal,
        config,
        v_lim: quad.v_max * config.limit_slack,
        a_lim: quad.a_max * config.limit_slack,
    };

    let mut knots = vec![start.position];
    knots.extend(corridor.witnesses.iter().copied());
    knots.push(goal.position);
    let mut z: Vec<f64> = corridor
        .witnesses
        .iter()
        .flat_map(|w| [w.x, w.y, w.z])
        .collect();
    for w in knots.windows(2) {
        let l = (w[1] - w[0]).norm().max(1e-3);
        let t = if l >= quad.v_max * quad.v_max / quad.a_max {
            l / quad.v_max + quad.v_max / quad.a_max
        } else {
            2.0 * (l / quad.a_max).sqrt()
        };
        z.push(t.ln());
    }

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut weight = config.corridor_weight;
    let mut traj = None;
    for _ in 0..config.corridor_rounds.max(1) {
        let (zn, hist) = lbfgs(
            |x| prob.merit(x, weight),
            z,
            config.max_iterations,
            config.tolerance,
        );
        z = zn;
        iterations += hist.len().saturating_sub(1);
        history.push(hist);
        let tr = prob.fit(&z).ok_or_else(|| {
            BackendError::OptimizationFailure("minimum-jerk system became singular".into())
        })?;
        if corridor_violation(&tr, corridor, config.check_dt) <= -1e-6 {
            traj = Some(tr);
            break;
        }
        weight *= 10.0;
    }
    let Some(mut traj) = traj else {
        return Err(BackendError::OptimizationFailure(
            "corridor constraints remain violated".into(),
        ));
    };

    let (knots, mut durations) = prob.unpack(&z);
    let mut scalings = 0;
    while !limits_hold(&traj, quad, config.limit_norm, config.check_dt) {
        if scalings == config.max_scalings {
            return Err(BackendError::OptimizationFailure(
                "limits violated after time scaling".into(),
            ));
        }
        durations.iter_mut().for_each(|d| *d *= config.time_scale);
        traj = min_jerk_fit(&knots, &durations, start, goal)?;
        scalings += 1;
        if corridor_violation(&traj, corridor, config.check_dt) > -1e-6 {
            return Err(BackendError::OptimizationFailure(
                "time scaling left the corridor".into(),
            ));
        }
    }
    Ok(OptimizationOutcome {
        trajectory: traj,
        history,
        iterations,
        scalings,
    })
}

fn gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], g: &mut [f64]) {
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS with Armijo backtracking. Returns the final point and
/// the merit after each accepted step (starting with the initial merit).
fn lbfgs(
    mut f: impl FnMut(&[f64]) -> f64,
    mut x: Vec<f64>,
    max_iters: usize,
    tol: f64,
) -> (Vec<f64>, Vec<f64>) {
    const MEM: usize = 8;
    let n = x.len();
    let mut fx = f(&x);
    let mut hist = vec![fx];
    if !fx.is_finite() {
        return (x, hist);
    }
    let mut g = vec![0.0; n];
    gradient(&mut f, &x, &mut g);
    let mut mem: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];

    for _ in 0..max_iters {
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(gmax > 1e-10) {
            break;
        }
        // Two-loop recursion.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        match mem.last() {
            Some((s, y, _)) => {
                let gamma = dot(s, y) / dot(y, y);
                d.iter_mut().for_each(|v| *v *= gamma);
            }
            None => {
                let scale = 0.1 / gmax;
                d.iter_mut().for_each(|v| *v *= scale);
            }
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            mem.clear();
            let scale = 0.1 / gmax;
            d = g.iter().map(|v| -v * scale).collect();
            slope = dot(&g, &d);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            xn.iter_mut()
                .zip(x.iter().zip(&d))
                .for_each(|(o, (xi, di))| *o = xi + step * di);
            let f_new = f(&xn);
            if f_new <= fx + 1e-4 * step * slope {
                accepted = Some(f_new);
                break;
            }
            step *= 0.5;
        }
        let Some(f_new) = accepted else {
            if mem.is_empty() {
                break;
            }
            mem.clear();
            continue;
        };
        gradient(&mut f, &xn, &mut gn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if mem.len() == MEM {
                mem.remove(0);
            }
            mem.push((s, y, 1.0 / sy));
        }
        let decrease = fx - f_new;
        std::mem::swap(&mut x, &mut xn);
        std::mem::swap(&mut g, &mut gn);
        fx = f_new;
        hist.push(fx);
        if decrease <= tol * fx.abs().max(1.0) {
            break;
        }
    }
    (x, hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lbfgs_minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let (x, h) = lbfgs(f, vec![-1.2, 1.0], 500, 0.0);
        assert!(
            (x[0] - 1.0).abs() < 1e-4 && (x[1] - 1.0).abs() < 1e-4,
            "{x:?}"
        );
        assert!(h.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn open_box_reduces_to_straight_quintic() {
        let poly = Polytope::from_box(Vec3::zeros(), Vec3::new(20.0, 10.0, 5.0), 0);
        let c = Corridor {
            polytopes: vec![poly],
            witnesses: vec![],
        };
        let a = BoundaryState::rest(Vec3::new(2.0, 5.0, 2.5));
        let b = BoundaryState::rest(Vec3::new(16.0, 5.0, 2.5));
        let o = optimize_trajectory_detailed(
            &c,
            &a,
            &b,
            &QuadrotorSpec::default(),
            &OptimizerConfig::default(),
        )
        .unwrap();
        let tr = &o.trajectory;
        for i in 0..=50 {
            let p = tr.position(tr.duration() * i as f64 / 50.0);
            assert!((p.y - 5.0).abs() < 1e-9 && (p.z - 2.5).abs() < 1e-9);
        }
        // Stationary in the single log-duration: d/dT (720 L^2 / T^5 + T) = 0.
        let t_opt = (3600.0f64 * 14.0 * 14.0).powf(1.0 / 6.0);
        assert!(
            o.scalings > 0 || (tr.duration() - t_opt).abs() < 1e-3,
            "{}",
            tr.duration()
        );
    }
}
