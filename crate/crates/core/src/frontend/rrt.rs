//! Anytime RRT* with goal bias and shrinking rewiring radius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_endpoints, segment_free, Clock, FrontendId, Path, PlanError, PlannerBudget};
use crate::world::{Vec3, VoxelGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RrtConfig {
    pub goal_bias: f64,
    /// Steer step, also the upper cap on the rewiring radius (m).
    pub step: f64,
    /// Multiplier on the asymptotic-optimality radius constant.
    pub gamma_scale: f64,
    /// Sample cap; keeps runs reproducible when it binds before the timeout.
    pub max_samples: usize,
}

impl Default for RrtConfig {
    fn default() -> Self {
        RrtConfig {
            goal_bias: 0.1,
            step: 1.5,
            gamma_scale: 1.0,
            max_samples: 6000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RrtOutcome {
    pub path: Path,
    /// (sample index, best cost) each time the best solution improved.
    pub history: Vec<(usize, f64)>,
    pub samples: usize,
    pub tree_size: usize,
}

struct Node {
    pos: Vec3,
    parent: usize,
    cost: f64,
    children: Vec<usize>,
}

/// Dense bucket grid over the bounds for nearest/near queries.
struct Buckets {
    lo: Vec3,
    size: f64,
    dims: [i64; 3],
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(lo: Vec3, extent: Vec3, size: f64) -> Self {
        let dims = [0, 1, 2].map(|k| ((extent[k] / size).ceil() as i64).max(1));
        Buckets {
            lo,
            size,
            dims,
            cells: vec![Vec::new(); (dims[0] * dims[1] * dims[2]) as usize],
        }
    }

    fn key(&self, p: &Vec3) -> [i64; 3] {
        [0, 1, 2]
            .map(|k| (((p[k] - self.lo[k]) / self.size).floor() as i64).clamp(0, self.dims[k] - 1))
    }

    fn slot(&self, c: [i64; 3]) -> Option<usize> {
        (0..3)
            .all(|k| c[k] >= 0 && c[k] < self.dims[k])
            .then(|| (c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])) as usize)
    }

    fn insert(&mut self, p: &Vec3, id: usize) {
        let s = self.slot(self.key(p)).expect("key is clamped");
        self.cells[s].push(id);
    }

    fn visit_shell(&self, c: [i64; 3], r: i64, mut f: impl FnMut(usize)) {
        for i in -r..=r {
            for j in -r..=r {
                for k in -r..=r {
                    if i.abs().max(j.abs()).max(k.abs()) != r {
                        continue;
                    }
                    if let Some(s) = self.slot([c[0] + i, c[1] + j, c[2] + k]) {
                        self.cells[s].iter().for_each(|&id| f(id));
                    }
                }
            }
        }
    }

    fn nearest(&self, nodes: &[Node], q: &Vec3) -> usize {
        let c = self.key(q);
        let max_r = self.dims.iter().copied().max().unwrap();
        let mut best = (f64::INFINITY, usize::MAX);
        for r in 0..=max_r {
            self.visit_shell(c, r, |id| {
                let d = (nodes[id].pos - q).norm_squared();
                if d < best.0 || (d == best.0 && id < best.1) {
                    best = (d, id);
                }
            });
            // Anything in later shells is at least r bucket widths away.
            if best.1 != usize::MAX && best.0.sqrt() <= r as f64 * self.size {
                break;
            }
        }
        best.1
    }

    fn near(&self, nodes: &[Node], q: &Vec3, radius: f64) -> Vec<usize> {
        let c = self.key(q);
        let reach = (radius / self.size).ceil() as i64;
        let mut out = Vec::new();
        for r in 0..=reach {
            self.visit_shell(c, r, |id| {
                if (nodes[id].pos - q).norm() <= radius {
                    out.push(id);
                }
            });
        }
        out.sort_unstable();
        out
    }
}

pub fn plan_rrt_star(
    grid: &VoxelGrid,
    start: Vec3,
    goal: Vec3,
    budget: &PlannerBudget,
    config: &RrtConfig,
    seed: u64,
) -> Result<Path, PlanError> {
    plan_rrt_star_detailed(grid, start, goal, budget, config, seed).map(|o| o.path)
}

pub fn plan_rrt_star_detailed(
    grid: &VoxelGrid,
    start: Vec3,
    goal: Vec3,
    budget: &PlannerBudget,
    config: &RrtConfig,
    seed: u64,
) -> Result<RrtOutcome, PlanError> {
    budget.validate()?;
    let clock = Clock::new(budget.timeout);
    check_endpoints(grid, &start, &goal)?;
    if !(config.step > 0.0) || !(0.0..=1.0).contains(&config.goal_bias) {
        return Err(PlanError::InvalidQuery("bad RRT* configuration".into()));
    }

    let bounds = grid.bounds();
    let (lo, ext) = (bounds.min(), bounds.extent());
    let gamma = config.gamma_scale
        * 2.0
        * (1.0 + 1.0 / 3.0f64).powf(1.0 / 3.0)
        * (bounds.volume() / (4.0 / 3.0 * std::f64::consts::PI)).powf(1.0 / 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buckets = Buckets::new(lo, ext, config.step);
    let mut nodes = vec![Node {
        pos: start,
        parent: usize::MAX,
        cost: 0.0,
        children: Vec::new(),
    }];
    buckets.insert(&start, 0);

    // (node, whether the straight link to the goal is free)
    let mut goal_nodes: Vec<(usize, bool)> = Vec::new();
    let total = |nodes: &[Node], (id, link): (usize, bool)| {
        nodes[id].cost
            + if link {
                (goal - nodes[id].pos).norm()
            } else {
                0.0
            }
    };
    let mut best = f64::INFINITY;
    let mut history = Vec::new();
    let mut consider = |nodes: &[Node], goal_nodes: &[(usize, bool)], i: usize, best: &mut f64| {
        let b = goal_nodes
            .iter()
            .map(|g| total(nodes, *g))
            .fold(f64::INFINITY, f64::min);
        if b < *best - 1e-12 {
            *best = b;
            history.push((i, b));
        }
    };
    if (goal - start).norm() <= budget.goal_threshold {
        goal_nodes.push((0, segment_free(grid, &start, &goal)));
        consider(&nodes, &goal_nodes, 0, &mut best);
    }

    let mut samples = 0;
    let mut timed_out = false;
    while samples < config.max_samples {
        if clock.expired() {
            timed_out = true;
            break;
        }
        samples += 1;
        let q = if rng.random::<f64>() < config.goal_bias {
            goal
        } else {
            Vec3::new(
                lo.x + rng.random::<f64>() * ext.x,
                lo.y + rng.random::<f64>() * ext.y,
                lo.z + rng.random::<f64>() * ext.z,
            )
        };
        let near_id = buckets.nearest(&nodes, &q);
        let from = nodes[near_id].pos;
        let d = (q - from).norm();
        if d < 1e-9 {
            continue;
        }
        let new = if d > config.step {
            from + (q - from) * (config.step / d)
        } else {
            q
        };
        if !segment_free(grid, &from, &new) {
            continue;
        }

        let n = nodes.len() as f64 + 1.0;
        let radius = (gamma * (n.ln() / n).powf(1.0 / 3.0)).min(config.step);
        let mut cand = buckets.near(&nodes, &new, radius);
        if !cand.contains(&near_id) {
            cand.push(near_id);
        }
        let mut ranked: Vec<(f64, usize)> = cand
            .iter()
            .map(|&c| (nodes[c].cost + (nodes[c].pos - new).norm(), c))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let Some(&(cost, parent)) = ranked
            .iter()
            .find(|(_, c)| *c == near_id || segment_free(grid, &nodes[*c].pos, &new))
        else {
            continue;
        };
        let id = nodes.len();
        nodes.push(Node {
            pos: new,
            parent,
            cost,
            children: Vec::new(),
        });
        nodes[parent].children.push(id);
        buckets.insert(&new, id);

        for &(_, c) in &ranked {
            if c == parent {
                continue;
            }
            let through = cost + (nodes[c].pos - new).norm();
            if through < nodes[c].cost - 1e-12 && segment_free(grid, &new, &nodes[c].pos) {
                let old = nodes[c].parent;
                nodes[old].children.retain(|&k| k != c);
                nodes[id].children.push(c);
                nodes[c].parent = id;
                let delta = through - nodes[c].cost;
                let mut stack = vec![c];
                while let Some(k) = stack.pop() {
                    nodes[k].cost += delta;
                    stack.extend(nodes[k].children.iter().copied());
                }
            }
        }

        if (goal - new).norm() <= budget.goal_threshold {
            goal_nodes.push((id, segment_free(grid, &new, &goal)));
        }
        if !goal_nodes.is_empty() {
            consider(&nodes, &goal_nodes, samples, &mut best);
        }
    }

    let Some(&winner) = goal_nodes.iter().min_by(|a, b| {
        total(&nodes, **a)
            .total_cmp(&total(&nodes, **b))
            .then(a.0.cmp(&b.0))
    }) else {
        return Err(if timed_out {
            clock.exceeded()
        } else {
            PlanError::Infeasible
        });
    };
    let mut waypoints = Vec::new();
    if winner.1 {
        waypoints.push(goal);
    }
    let mut cur = winner.0;
    while cur != usize::MAX {
        waypoints.push(nodes[cur].pos);
        cur = nodes[cur].parent;
    }
    waypoints.reverse();
    Ok(RrtOutcome {
        path: Path::new(waypoints, FrontendId::RrtStar, clock.elapsed()),
        history,
        samples,
        tree_size: nodes.len(),
    })
}
