//! 3-D jump point search over the 26-connected grid.
//!
//! Moves may not cut corners: every cell in the move's sub-box must be free,
//! so a move never clips an occupied cell. Pruning is derived generically from
//! a tiny Dijkstra inside the 3x3x3 neighborhood instead of hand-written
//! forced-neighbor tables; results are memoized per (direction, free mask).

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{check_endpoints, Clock, FrontendId, Path, PlanError, PlannerBudget};
use crate::world::{Vec3, VoxelGrid};

const SQRT2: f64 = std::f64::consts::SQRT_2;
const SQRT3: f64 = 1.732_050_807_568_877_2;
const CENTER: usize = 13;
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JpsConfig {
    /// Pruning-table entries kept per thread before the cache is reset.
    pub cache_limit: usize,
}

impl Default for JpsConfig {
    fn default() -> Self {
        JpsConfig {
            cache_limit: 1 << 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JpsOutcome {
    pub path: Path,
    /// Number of straight, planar-diagonal and cubic-diagonal unit moves.
    pub moves: [u32; 3],
    /// Distinct jump points expanded.
    pub expanded: usize,
}

impl JpsOutcome {
    /// Grid cost in cell units, computed from the move counts.
    pub fn grid_cost(&self) -> f64 {
        move_cost(self.moves)
    }
}

pub fn move_cost(m: [u32; 3]) -> f64 {
    m[0] as f64 + m[1] as f64 * SQRT2 + m[2] as f64 * SQRT3
}

struct Tables {
    offs: [[i64; 3]; 27],
    /// Nonzero sub-offsets of each direction (the cells a move sweeps).
    subsets: Vec<Vec<[i64; 3]>>,
    /// Strict lower-order components, highest order first.
    components: Vec<Vec<usize>>,
    natural: [u32; 27],
    norm: [f64; 27],
    order: [usize; 27],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let offs: [[i64; 3]; 27] = std::array::from_fn(|i| {
            [
                (i % 3) as i64 - 1,
                (i / 3 % 3) as i64 - 1,
                (i / 9) as i64 - 1,
            ]
        });
        let order: [usize; 27] =
            std::array::from_fn(|i| offs[i].iter().filter(|v| **v != 0).count());
        let norm: [f64; 27] = std::array::from_fn(|i| [0.0, 1.0, SQRT2, SQRT3][order[i]]);
        let is_component = |e: usize, d: usize| {
            e != CENTER && (0..3).all(|k| offs[e][k] == 0 || offs[e][k] == offs[d][k])
        };
        let mut subsets = Vec::with_capacity(27);
        let mut components = Vec::with_capacity(27);
        let mut natural = [0u32; 27];
        for d in 0..27 {
            let comps: Vec<usize> = (0..27)
                .filter(|&e| d != CENTER && is_component(e, d))
                .collect();
            subsets.push(comps.iter().map(|&e| offs[e]).collect());
            for &e in &comps {
                natural[d] |= 1 << e;
            }
            let mut strict: Vec<usize> = comps.into_iter().filter(|&e| e != d).collect();
            strict.sort_by_key(|&e| std::cmp::Reverse(order[e]));
            components.push(strict);
        }
        Tables {
            offs,
            subsets,
            components,
            natural,
            norm,
            order,
        }
    })
}

fn block_index(o: [i64; 3]) -> Option<usize> {
    if o.iter().all(|v| (-1..=1).contains(v)) {
        Some((o[0] + 1) as usize + 3 * (o[1] + 1) as usize + 9 * (o[2] + 1) as usize)
    } else {
        None
    }
}

fn add(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn block_move_valid(t: &Tables, from: [i64; 3], d: usize, mask: u32) -> bool {
    t.subsets[d]
        .iter()
        .all(|s| block_index(add(from, *s)).is_some_and(|b| mask & (1 << b) != 0))
}

/// Successor directions of a node reached by `d` (or `CENTER` for the start)
/// whose neighborhood free mask is `mask`.
fn compute_successors(d: usize, mask: u32) -> u32 {
    let t = tables();
    let center = [0i64; 3];
    let mut out = 0u32;
    if d == CENTER {
        for e in (0..27).filter(|&e| e != CENTER) {
            if block_move_valid(t, center, e, mask) {
                out |= 1 << e;
            }
        }
        return out;
    }

    // Shortest paths from the parent inside the block, avoiding the node itself.
    let parent = t.offs[26 - d];
    let p = block_index(parent).expect("parent lies in block");
    let mut dist = [f64::INFINITY; 27];
    let mut done = [false; 27];
    dist[p] = 0.0;
    loop {
        let mut u = usize::MAX;
        for i in 0..27 {
            if !done[i] && dist[i].is_finite() && (u == usize::MAX || dist[i] < dist[u]) {
                u = i;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        for e in (0..27).filter(|&e| e != CENTER) {
            let Some(v) = block_index(add(t.offs[u], t.offs[e])) else {
                continue;
            };
            if v == CENTER || mask & (1 << v) == 0 || !block_move_valid(t, t.offs[u], e, mask) {
                continue;
            }
            let nd = dist[u] + t.norm[e];
            if nd < dist[v] {
                dist[v] = nd;
            }
        }
    }

    for e in (0..27).filter(|&e| e != CENTER) {
        if !block_move_valid(t, center, e, mask) {
            continue;
        }
        if t.natural[d] & (1 << e) != 0 {
            out |= 1 << e;
            continue;
        }
        let n = e;
        let via = t.norm[d] + t.norm[e];
        let alt = dist[n];
        if alt < via - EPS {
            continue;
        }
        if (alt - via).abs() <= EPS {
            // Equal-cost tie: prune only if the canonical ordering (higher-order
            // move first, then one of its components) is available without
            // passing through this node.
            let v: [i64; 3] = std::array::from_fn(|k| t.offs[e][k] + t.offs[d][k]);
            let c1: [i64; 3] = std::array::from_fn(|k| v[k].signum());
            let c2: [i64; 3] = std::array::from_fn(|k| v[k] - c1[k]);
            if c2 != [0, 0, 0] {
                let c1i = block_index(c1).unwrap();
                let c2i = block_index(c2).unwrap();
                let mid = add(parent, c1);
                if c1i != d
                    && block_index(mid) != Some(CENTER)
                    && block_move_valid(t, parent, c1i, mask)
                    && block_move_valid(t, mid, c2i, mask)
                {
                    continue;
                }
            }
        }
        out |= 1 << e;
    }
    out
}

thread_local! {
    static PRUNE_CACHE: RefCell<HashMap<u64, u32>> = RefCell::new(HashMap::new());
}

fn successors(d: usize, mask: u32, cache_limit: usize) -> u32 {
    let key = ((d as u64) << 27) | mask as u64;
    PRUNE_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if let Some(&v) = c.get(&key) {
            return v;
        }
        if c.len() >= cache_limit {
            c.clear();
        }
        let v = compute_successors(d, mask);
        c.insert(key, v);
        v
    })
}

struct Search<'a> {
    occ: &'a [bool],
    dims: [i64; 3],
    /// Whole 3x3x3 neighborhood free and in the grid.
    open: Vec<bool>,
    goal: [i64; 3],
    clock: &'a Clock,
    ticks: u64,
    cache_limit: usize,
    memo: Vec<Option<Vec<u32>>>,
}

struct TimedOut;

impl<'a> Search<'a> {
    fn lin(&self, c: [i64; 3]) -> usize {
        (c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])) as usize
    }

    fn free(&self, c: [i64; 3]) -> bool {
        (0..3).all(|k| c[k] >= 0 && c[k] < self.dims[k]) && !self.occ[self.lin(c)]
    }

    fn mask(&self, c: [i64; 3]) -> u32 {
        if self.open[self.lin(c)] {
            return (1 << 27) - 1;
        }
        let t = tables();
        let mut m = 0u32;
        for (b, o) in t.offs.iter().enumerate() {
            if self.free(add(c, *o)) {
                m |= 1 << b;
            }
        }
        m
    }

    fn move_valid(&self, c: [i64; 3], d: usize) -> bool {
        self.open[self.lin(c)] || tables().subsets[d].iter().all(|s| self.free(add(c, *s)))
    }

    fn tick(&mut self) -> Result<(), TimedOut> {
        self.ticks += 1;
        if self.ticks % 1024 == 0 && self.clock.expired() {
            return Err(TimedOut);
        }
        Ok(())
    }

    fn memo_get(&self, c: [i64; 3], d: usize) -> u32 {
        self.memo[d].as_ref().map_or(0, |m| m[self.lin(c)])
    }

    fn memo_set(&mut self, c: [i64; 3], d: usize, v: u32) {
        let i = self.lin(c);
        let n = self.occ.len();
        self.memo[d].get_or_insert_with(|| vec![0; n])[i] = v;
    }

    /// True when a scan along `d` must stop at `c`.
    fn is_jump_point(&mut self, c: [i64; 3], d: usize) -> Result<bool, TimedOut> {
        let t = tables();
        if c == self.goal {
            return Ok(true);
        }
        if !self.open[self.lin(c)] {
            let succ = successors(d, self.mask(c), self.cache_limit);
            if succ & !t.natural[d] != 0 {
                return Ok(true);
            }
        }
        for &k in &t.components[d] {
            if self.jump(c, k)?.is_some() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Scans from `x` along `d`; returns the step count to the first jump point.
    /// Results are memoized for every cell on the scanned run, so each run is
    /// walked at most once per direction and search.
    fn jump(&mut self, x: [i64; 3], d: usize) -> Result<Option<u32>, TimedOut> {
        // Memo encoding: 0 unknown, 1 no jump point, k + 2 jump point after k steps.
        let decode = |v: u32| if v == 1 { None } else { Some(v - 2) };
        let known = self.memo_get(x, d);
        if known != 0 {
            return Ok(decode(known));
        }
        let step = tables().offs[d];
        let mut trail = vec![x];
        let mut cur = x;
        let result = loop {
            if !self.move_valid(cur, d) {
                break None;
            }
            cur = add(cur, step);
            self.tick()?;
            let steps = trail.len() as u32;
            if self.is_jump_point(cur, d)? {
                break Some(steps);
            }
            let known = self.memo_get(cur, d);
            if known != 0 {
                break decode(known).map(|k| k + steps);
            }
            trail.push(cur);
        };
        for (i, c) in trail.into_iter().enumerate() {
            let v = match result {
                Some(k) => k - i as u32 + 2,
                None => 1,
            };
            self.memo_set(c, d, v);
        }
        Ok(result)
    }
}

fn erode(grid: &VoxelGrid) -> Vec<bool> {
    let [nx, ny, nz] = grid.dims();
    let mut a: Vec<bool> = grid.occupancy().iter().map(|o| !o).collect();
    let strides = [1, nx, nx * ny];
    let n = [nx, ny, nz];
    for k in 0..3 {
        let mut b = vec![false; a.len()];
        for (idx, out) in b.iter_mut().enumerate() {
            let i = (idx / strides[k]) % n[k];
            *out = a[idx] && i > 0 && i + 1 < n[k] && a[idx - strides[k]] && a[idx + strides[k]];
        }
        a = b;
    }
    a
}

fn octile(a: [i64; 3], b: [i64; 3]) -> f64 {
    let mut d = [
        (a[0] - b[0]).abs(),
        (a[1] - b[1]).abs(),
        (a[2] - b[2]).abs(),
    ];
    d.sort_unstable();
    let [lo, mid, hi] = d.map(|v| v as f64);
    SQRT3 * lo + SQRT2 * (mid - lo) + (hi - mid)
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

struct Rec {
    moves: [u32; 3],
    parent: usize,
    arrived: u32,
    expanded: u32,
}

pub fn plan_jps(
    grid: &VoxelGrid,
    start: Vec3,
    goal: Vec3,
    budget: &PlannerBudget,
    config: &JpsConfig,
) -> Result<Path, PlanError> {
    plan_jps_detailed(grid, start, goal, budget, config).map(|o| o.path)
}

pub fn plan_jps_detailed(
    grid: &VoxelGrid,
    start: Vec3,
    goal: Vec3,
    budget: &PlannerBudget,
    config: &JpsConfig,
) -> Result<JpsOutcome, PlanError> {
    budget.validate()?;
    let clock = Clock::new(budget.timeout);
    check_endpoints(grid, &start, &goal)?;
    let to_i = |c: [usize; 3]| c.map(|v| v as i64);
    let s = to_i(grid.cell_of(&start).ok_or(PlanError::Infeasible)?);
    let g = to_i(grid.cell_of(&goal).ok_or(PlanError::Infeasible)?);
    let t = tables();

    let [nx, ny, nz] = grid.dims();
    let mut search = Search {
        occ: grid.occupancy(),
        dims: [nx as i64, ny as i64, nz as i64],
        open: erode(grid),
        goal: g,
        clock: &clock,
        ticks: 0,
        cache_limit: config.cache_limit.max(1),
        memo: vec![None; 27],
    };
    let cell_of = |idx: usize| -> [i64; 3] {
        let c = grid.cell_of_linear(idx);
        [c[0] as i64, c[1] as i64, c[2] as i64]
    };

    let mut recs: HashMap<usize, Rec> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let si = search.lin(s);
    recs.insert(
        si,
        Rec {
            moves: [0; 3],
            parent: usize::MAX,
            arrived: 1 << CENTER,
            expanded: 0,
        },
    );
    heap.push(Entry {
        f: octile(s, g),
        g: 0.0,
        idx: si,
    });
    let gi = search.lin(g);
    let mut expanded = 0usize;

    while let Some(e) = heap.pop() {
        if clock.expired() {
            return Err(clock.exceeded());
        }
        let rec = recs.get_mut(&e.idx).expect("queued nodes have records");
        if e.g > move_cost(rec.moves) + EPS {
            continue;
        }
        if e.idx == gi {
            return Ok(finish(grid, &recs, gi, start, goal, &clock, expanded));
        }
        let pending = rec.arrived & !rec.expanded;
        if pending == 0 {
            continue;
        }
        if rec.expanded == 0 {
            expanded += 1;
        }
        rec.expanded |= pending;
        let moves = rec.moves;
        let x = cell_of(e.idx);
        let m = search.mask(x);
        let mut succ = 0u32;
        for d in (0..27).filter(|d| pending & (1 << d) != 0) {
            succ |= successors(d, m, search.cache_limit);
        }
        for dir in (0..27).filter(|d| succ & (1 << d) != 0) {
            let hit = search.jump(x, dir).map_err(|_| clock.exceeded())?;
            let Some(steps) = hit else { continue };
            let y = add(x, t.offs[dir].map(|v| v * steps as i64));
            let mut nm = moves;
            nm[t.order[dir] - 1] += steps;
            let ng = move_cost(nm);
            let yi = search.lin(y);
            let f = ng + octile(y, g);
            match recs.get_mut(&yi) {
                Some(r) if r.moves == nm => {
                    if r.arrived & (1 << dir) == 0 {
                        r.arrived |= 1 << dir;
                        heap.push(Entry { f, g: ng, idx: yi });
                    }
                }
                Some(r) if ng >= move_cost(r.moves) => {}
                _ => {
                    recs.insert(
                        yi,
                        Rec {
                            moves: nm,
                            parent: e.idx,
                            arrived: 1 << dir,
                            expanded: 0,
                        },
                    );
                    heap.push(Entry { f, g: ng, idx: yi });
                }
            }
        }
    }
    Err(PlanError::Infeasible)
}

fn finish(
    grid: &VoxelGrid,
    recs: &HashMap<usize, Rec>,
    goal_idx: usize,
    start: Vec3,
    goal: Vec3,
    clock: &Clock,
    expanded: usize,
) -> JpsOutcome {
    let mut chain = Vec::new();
    let mut cur = goal_idx;
    while cur != usize::MAX {
        chain.push(grid.center(grid.cell_of_linear(cur)));
        cur = recs[&cur].parent;
    }
    chain.reverse();
    let mut waypoints = Vec::with_capacity(chain.len() + 2);
    waypoints.push(start);
    waypoints.extend(chain);
    waypoints.push(goal);
    // Drop jump points that are collinear with their neighbors.
    let mut pruned: Vec<Vec3> = Vec::with_capacity(waypoints.len());
    for p in waypoints {
        pruned.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
        if pruned.len() >= 2 {
            let a = pruned[pruned.len() - 2];
            let b = pruned[pruned.len() - 1];
            let u = b - a;
            let v = p - b;
            if u.cross(&v).norm() <= 1e-9 * u.norm() * v.norm() && u.dot(&v) > 0.0 {
                pruned.pop();
            }
        }
        pruned.push(p);
    }
    JpsOutcome {
        path: Path::new(pruned, FrontendId::Jps, clock.elapsed()),
        moves: recs[&goal_idx].moves,
        expanded,
    }
}
