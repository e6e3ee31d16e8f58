//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use ecsbench_core::world::{Bounds, Vec3, VoxelGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const S2: f64 = std::f64::consts::SQRT_2;
pub const S3: f64 = 1.732_050_807_568_877_2;

pub fn random_grid(rng: &mut ChaCha8Rng, dims: [usize; 3], fill: f64) -> VoxelGrid {
    let b = Bounds::from_extent(dims[0] as f64, dims[1] as f64, dims[2] as f64).unwrap();
    let mut g = VoxelGrid::new(b, 1.0).unwrap();
    for i in 0..g.len() {
        if rng.random::<f64>() < fill {
            g.set_occupied(g.cell_of_linear(i), true);
        }
    }
    g
}

pub fn free(g: &VoxelGrid, c: [i64; 3]) -> bool {
    !g.is_blocked(c)
}

/// 26 moves that never clip an occupied cell.
pub fn moves(g: &VoxelGrid, c: [i64; 3]) -> Vec<([i64; 3], usize)> {
    let mut out = Vec::new();
    for dx in -1..=1i64 {
        for dy in -1..=1i64 {
            for dz in -1..=1i64 {
                if (dx, dy, dz) == (0, 0, 0) {
                    continue;
                }
                let mut ok = true;
                for sx in [0, dx] {
                    for sy in [0, dy] {
                        for sz in [0, dz] {
                            if (sx, sy, sz) != (0, 0, 0)
                                && !free(g, [c[0] + sx, c[1] + sy, c[2] + sz])
                            {
                                ok = false;
                            }
                        }
                    }
                }
                if ok {
                    let order = [dx, dy, dz].iter().filter(|v| **v != 0).count();
                    out.push(([c[0] + dx, c[1] + dy, c[2] + dz], order));
                }
            }
        }
    }
    out
}

pub fn cost(t: [u32; 3]) -> f64 {
    t[0] as f64 + t[1] as f64 * S2 + t[2] as f64 * S3
}

pub fn lin(g: &VoxelGrid, c: [i64; 3]) -> usize {
    g.linear([c[0] as usize, c[1] as usize, c[2] as usize])
}

pub struct Item(f64, usize);
impl PartialEq for Item {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Item {}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Returns the optimal move-count triple and the number of closed nodes.
/// With `heuristic` this is A*, otherwise plain Dijkstra.
pub fn best_first(
    g: &VoxelGrid,
    s: [i64; 3],
    t: [i64; 3],
    heuristic: bool,
) -> (Option<[u32; 3]>, usize) {
    let h = |c: [i64; 3]| {
        if !heuristic {
            return 0.0;
        }
        let mut d = [
            (c[0] - t[0]).abs(),
            (c[1] - t[1]).abs(),
            (c[2] - t[2]).abs(),
        ];
        d.sort();
        let [a, b, c] = d.map(|v| v as f64);
        S3 * a + S2 * (b - a) + (c - b)
    };
    let mut best: Vec<Option<[u32; 3]>> = vec![None; g.len()];
    let mut closed = vec![false; g.len()];
    let mut heap = BinaryHeap::new();
    best[lin(g, s)] = Some([0; 3]);
    heap.push(Item(h(s), lin(g, s)));
    let mut expanded = 0;
    while let Some(Item(_, u)) = heap.pop() {
        if closed[u] {
            continue;
        }
        closed[u] = true;
        expanded += 1;
        let c = g.cell_of_linear(u).map(|v| v as i64);
        if c == t {
            return (best[u], expanded);
        }
        let bu = best[u].unwrap();
        for (n, order) in moves(g, c) {
            let v = lin(g, n);
            let mut nt = bu;
            nt[order - 1] += 1;
            if best[v].is_none_or(|b| cost(nt) < cost(b)) {
                best[v] = Some(nt);
                heap.push(Item(cost(nt) + h(n), v));
            }
        }
    }
    (None, expanded)
}

pub fn connected(g: &VoxelGrid, s: [i64; 3], t: [i64; 3]) -> bool {
    let mut seen = vec![false; g.len()];
    let mut q = VecDeque::from([s]);
    seen[lin(g, s)] = true;
    while let Some(c) = q.pop_front() {
        if c == t {
            return true;
        }
        for (n, _) in moves(g, c) {
            let v = lin(g, n);
            if !seen[v] {
                seen[v] = true;
                q.push_back(n);
            }
        }
    }
    false
}

pub fn random_free(rng: &mut ChaCha8Rng, g: &VoxelGrid) -> Option<[i64; 3]> {
    let free: Vec<usize> = (0..g.len()).filter(|&i| !g.occupancy()[i]).collect();
    (!free.is_empty()).then(|| {
        g.cell_of_linear(free[rng.random_range(0..free.len())])
            .map(|v| v as i64)
    })
}

pub fn center(g: &VoxelGrid, c: [i64; 3]) -> Vec3 {
    g.center([c[0] as usize, c[1] as usize, c[2] as usize])
}

/// `r^3 N / V`.
pub fn brute_density(g: &VoxelGrid, r: f64) -> f64 {
    r.powi(3) * g.occupied_count() as f64 / g.bounds().volume()
}

/// Largest distance from a free center to its nearest occupied center, by
/// exhaustive pairwise search.
pub fn brute_dispersion(g: &VoxelGrid) -> f64 {
    let occ: Vec<Vec3> = g.occupied_cells().map(|c| g.center(c)).collect();
    g.free_cells()
        .map(|c| {
            let p = g.center(c);
            occ.iter()
                .map(|o| (p - o).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Share of occupied cells with an in-grid free face neighbor.
pub fn brute_structure(g: &VoxelGrid) -> f64 {
    let mut exposed = 0;
    let mut n = 0;
    for c in g.occupied_cells() {
        n += 1;
        let c = c.map(|v| v as i64);
        let hit = [
            [1, 0, 0],
            [-1, 0, 0],
            [0, 1, 0],
            [0, -1, 0],
            [0, 0, 1],
            [0, 0, -1],
        ]
        .iter()
        .any(|d| {
            let m = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
            g.in_grid(m).is_some_and(|m| !g.is_occupied(m))
        });
        exposed += hit as usize;
    }
    exposed as f64 / n as f64
}

/// Cell-index box `[lo, hi]` covered by an axis-aligned box in meters.
pub fn box_cells(g: &VoxelGrid, lo: Vec3, hi: Vec3) -> ([i64; 3], [i64; 3]) {
    let o = g.bounds().min();
    let r = g.resolution();
    let a = std::array::from_fn(|k| ((lo[k] - o[k]) / r).round() as i64);
    let b = std::array::from_fn(|k| ((hi[k] - o[k]) / r).round() as i64 - 1);
    (a, b)
}

/// True when every cell of the box is free and each of the six one-cell
/// slabs just outside it holds an occupied or out-of-grid cell.
pub fn box_is_maximal(g: &VoxelGrid, lo: [i64; 3], hi: [i64; 3]) -> bool {
    let any_blocked = |a: [i64; 3], b: [i64; 3]| {
        for i in a[0]..=b[0] {
            for j in a[1]..=b[1] {
                for k in a[2]..=b[2] {
                    if g.is_blocked([i, j, k]) {
                        return true;
                    }
                }
            }
        }
        false
    };
    if any_blocked(lo, hi) {
        return false;
    }
    (0..6).all(|face| {
        let k = face / 2;
        let (mut a, mut b) = (lo, hi);
        if face % 2 == 0 {
            a[k] -= 1;
            b[k] = a[k];
        } else {
            b[k] += 1;
            a[k] = b[k];
        }
        any_blocked(a, b)
    })
}
