//! A* over double-integrator motion primitives with constant accelerations.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::{
    check_endpoints, segment_free, touched_box, Clock, FrontendId, Path, PlanError, PlannerBudget,
};
use crate::world::{OccupancySum, QuadrotorSpec, Vec3, VoxelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    pub position: Vec3,
    pub velocity: Vec3,
}

impl LatticeState {
    /// Closed-form propagation under constant acceleration.
    pub fn propagate(&self, accel: &Vec3, t: f64) -> LatticeState {
        LatticeState {
            position: self.position + self.velocity * t + accel * (0.5 * t * t),
            velocity: self.velocity + accel * t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MplConfig {
    /// Acceleration values per axis, spread uniformly over [-a_max, a_max].
    pub accel_levels: usize,
    /// Primitive duration (s).
    pub dt: f64,
    /// Weight of the squared-acceleration tie-breaker.
    pub effort_weight: f64,
    /// Velocity bins per v_max for duplicate detection.
    pub velocity_bins: f64,
    /// Expansion cap; keeps runs reproducible when it binds before the timeout.
    pub max_expansions: usize,
}

impl Default for MplConfig {
    fn default() -> Self {
        MplConfig {
            accel_levels: 3,
            dt: 0.5,
            effort_weight: 0.01,
            velocity_bins: 8.0,
            max_expansions: 6000,
        }
    }
}

/// Piecewise-constant-acceleration state trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveTrajectory {
    pub start: LatticeState,
    /// (acceleration, duration) per primitive.
    pub pieces: Vec<(Vec3, f64)>,
}

impl PrimitiveTrajectory {
    pub fn duration(&self) -> f64 {
        self.pieces.iter().map(|p| p.1).sum()
    }

    pub fn state_at(&self, t: f64) -> LatticeState {
        let mut s = self.start;
        let mut rest = t.max(0.0);
        for (a, dt) in &self.pieces {
            if rest <= *dt {
                return s.propagate(a, rest);
            }
            s = s.propagate(a, *dt);
            rest -= dt;
        }
        s
    }

    pub fn end_state(&self) -> LatticeState {
        self.pieces
            .iter()
            .fold(self.start, |s, (a, dt)| s.propagate(a, *dt))
    }
}

struct Node {
    state: LatticeState,
    g: f64,
    parent: usize,
    accel: Vec3,
    closed: bool,
}

#[derive(PartialEq)]
struct Entry {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f)
            .then(self.g.total_cmp(&o.g))
            .then(o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Chord vertices of one primitive, excluding its start.
fn primitive_polyline(s: &LatticeState, a: &Vec3, dt: f64, res: f64) -> Vec<Vec3> {
    let end = s.propagate(a, dt);
    let reach = s.velocity.norm().max(end.velocity.norm()) * dt;
    let n = ((reach / res).ceil() as usize).max(1);
    (1..=n)
        .map(|i| s.propagate(a, dt * i as f64 / n as f64).position)
        .collect()
}

pub fn plan_mpl(
    grid: &VoxelGrid,
    start: LatticeState,
    goal: Vec3,
    quad: &QuadrotorSpec,
    budget: &PlannerBudget,
    config: &MplConfig,
) -> Result<(Path, PrimitiveTrajectory), PlanError> {
    budget.validate()?;
    let clock = Clock::new(budget.timeout);
    check_endpoints(grid, &start.position, &goal)?;
    if start.velocity.amax() > quad.v_max + 1e-9 {
        return Err(PlanError::InvalidQuery(
            "start velocity exceeds v_max".into(),
        ));
    }
    if config.accel_levels < 2 || !(config.dt > 0.0) || !(config.velocity_bins > 0.0) {
        return Err(PlanError::InvalidQuery("bad MPL configuration".into()));
    }

    let levels: Vec<f64> = (0..config.accel_levels)
        .map(|i| -quad.a_max + 2.0 * quad.a_max * i as f64 / (config.accel_levels - 1) as f64)
        .collect();
    let mut inputs = Vec::with_capacity(levels.len().pow(3));
    for &az in &levels {
        for &ay in &levels {
            for &ax in &levels {
                inputs.push(Vec3::new(ax, ay, az));
            }
        }
    }

    let res = grid.resolution();
    let vbin = quad.v_max / config.velocity_bins;
    let key = |s: &LatticeState| -> [i64; 6] {
        let p = (s.position - grid.bounds().min()) / res;
        let v = s.velocity / vbin;
        [p.x, p.y, p.z, v.x, v.y, v.z].map(|x| x.round() as i64)
    };
    // Lower bound on the remaining time: the slowest axis must cover its gap
    // to the goal ball under its own input bound, and arrivals only happen at
    // primitive boundaries.
    let h = |s: &LatticeState| {
        let mut t: f64 = 0.0;
        for k in 0..3 {
            let gap = goal[k] - s.position[k];
            let d = (gap.abs() - budget.goal_threshold).max(0.0);
            let u = if gap >= 0.0 {
                s.velocity[k]
            } else {
                -s.velocity[k]
            };
            t = t.max(min_time_1d(d, u, quad.a_max, quad.v_max));
        }
        t = t.max(((goal - s.position).norm() - budget.goal_threshold).max(0.0) / quad.v_max);
        (t / config.dt - 1e-9).ceil().max(0.0) * config.dt
    };
    let sum = OccupancySum::new(grid);
    let mut nodes = vec![Node {
        state: start,
        g: 0.0,
        parent: usize::MAX,
        accel: Vec3::zeros(),
        closed: false,
    }];
    let mut index: HashMap<[i64; 6], usize> = HashMap::new();
    index.insert(key(&start), 0);
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        f: h(&start),
        g: 0.0,
        idx: 0,
    });
    let mut expansions = 0usize;

    while let Some(Entry { idx, .. }) = heap.pop() {
        if nodes[idx].closed {
            continue;
        }
        let s = nodes[idx].state;
        if (goal - s.position).norm() <= budget.goal_threshold {
            return Ok(finish(grid, &nodes, idx, start, &clock, config.dt));
        }
        if clock.expired() || expansions >= config.max_expansions {
            return Err(clock.exceeded());
        }
        nodes[idx].closed = true;
        expansions += 1;
        let g = nodes[idx].g;
        for a in &inputs {
            let next = s.propagate(a, config.dt);
            if next.velocity.norm() > quad.v_max + 1e-9 {
                continue;
            }
            let k = key(&next);
            let cost = g + config.dt + config.effort_weight * a.norm_squared() * config.dt;
            if let Some(&other) = index.get(&k) {
                if nodes[other].closed || nodes[other].g <= cost {
                    continue;
                }
            }
            let mut chord = vec![s.position];
            chord.extend(primitive_polyline(&s, a, config.dt, res));
            let (lo, hi) = touched_box(grid, &chord);
            let clear = sum.box_free(lo, hi)
                || chord.windows(2).all(|w| {
                    let (lo, hi) = touched_box(grid, w);
                    sum.box_free(lo, hi) || segment_free(grid, &w[0], &w[1])
                });
            if !clear {
                continue;
            }
            let id = match index.get(&k) {
                Some(&other) => {
                    nodes[other] = Node {
                        state: next,
                        g: cost,
                        parent: idx,
                        accel: *a,
                        closed: false,
                    };
                    other
                }
                None => {
                    nodes.push(Node {
                        state: next,
                        g: cost,
                        parent: idx,
                        accel: *a,
                        closed: false,
                    });
                    index.insert(k, nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            heap.push(Entry {
                f: cost + h(&next),
                g: cost,
                idx: id,
            });
        }
    }
    Err(PlanError::Infeasible)
}

/// Minimum time to advance `d` along one axis from signed speed `u`.
fn min_time_1d(d: f64, u: f64, a: f64, v: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    if u < 0.0 {
        // Stop first, then cover the extra ground lost while braking.
        return -u / a + min_time_1d(d + u * u / (2.0 * a), 0.0, a, v);
    }
    let u = u.min(v);
    let ramp = (v * v - u * u) / (2.0 * a);
    if d <= ramp {
        ((u * u + 2.0 * a * d).sqrt() - u) / a
    } else {
        (v - u) / a + (d - ramp) / v
    }
}

fn finish(
    grid: &VoxelGrid,
    nodes: &[Node],
    end: usize,
    start: LatticeState,
    clock: &Clock,
    dt: f64,
) -> (Path, PrimitiveTrajectory) {
    let mut chain = Vec::new();
    let mut cur = end;
    while nodes[cur].parent != usize::MAX {
        chain.push(cur);
        cur = nodes[cur].parent;
    }
    chain.reverse();
    let mut waypoints = vec![start.position];
    let mut pieces = Vec::with_capacity(chain.len());
    for &id in &chain {
        let from = nodes[nodes[id].parent].state;
        waypoints.extend(primitive_polyline(
            &from,
            &nodes[id].accel,
            dt,
            grid.resolution(),
        ));
        pieces.push((nodes[id].accel, dt));
    }
    if waypoints.len() == 1 {
        waypoints.push(start.position);
    }
    (
        Path::new(waypoints, FrontendId::Mpl, clock.elapsed()),
        PrimitiveTrajectory { start, pieces },
    )
}
