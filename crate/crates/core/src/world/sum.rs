use super::VoxelGrid;

/// Summed-volume table of occupancy for O(1) box counts.
#[derive(Debug, Clone)]
pub struct OccupancySum {
    dims: [i64; 3],
    /// (nx+1)(ny+1)(nz+1) prefix counts; entry (i,j,k) covers cells < (i,j,k).
    table: Vec<u32>,
}

impl OccupancySum {
    pub fn new(grid: &VoxelGrid) -> Self {
        let [nx, ny, nz] = grid.dims();
        let (sx, sy) = (nx + 1, (nx + 1) * (ny + 1));
        let mut table = vec![0u32; sy * (nz + 1)];
        let occ = grid.occupancy();
        for k in 0..nz {
            for j in 0..ny {
                let mut row = 0u32;
                for i in 0..nx {
                    row += occ[i + nx * (j + ny * k)] as u32;
                    let at = (i + 1) + sx * (j + 1) + sy * (k + 1);
                    table[at] = row + table[at - sx] + table[at - sy] - table[at - sx - sy];
                }
            }
        }
        OccupancySum {
            dims: [nx as i64, ny as i64, nz as i64],
            table,
        }
    }

    fn at(&self, i: i64, j: i64, k: i64) -> i64 {
        let sx = self.dims[0] + 1;
        let sy = sx * (self.dims[1] + 1);
        self.table[(i + sx * j + sy * k) as usize] as i64
    }

    /// Occupied cells in the inclusive index box `lo..=hi`.
    pub fn count(&self, lo: [i64; 3], hi: [i64; 3]) -> u64 {
        let (a, b) = (lo, [hi[0] + 1, hi[1] + 1, hi[2] + 1]);
        let v = self.at(b[0], b[1], b[2])
            - self.at(a[0], b[1], b[2])
            - self.at(b[0], a[1], b[2])
            - self.at(b[0], b[1], a[2])
            + self.at(a[0], a[1], b[2])
            + self.at(a[0], b[1], a[2])
            + self.at(b[0], a[1], a[2])
            - self.at(a[0], a[1], a[2]);
        v as u64
    }

    /// True when the inclusive box lies inside the grid and holds no occupied cell.
    pub fn box_free(&self, lo: [i64; 3], hi: [i64; 3]) -> bool {
        (0..3).all(|k| lo[k] >= 0 && hi[k] < self.dims[k] && lo[k] <= hi[k])
            && self.count(lo, hi) == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Bounds;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut g = VoxelGrid::new(Bounds::from_extent(7.0, 5.0, 4.0).unwrap(), 1.0).unwrap();
        for i in 0..g.len() {
            if rng.random::<f64>() < 0.3 {
                g.set_occupied(g.cell_of_linear(i), true);
            }
        }
        let s = OccupancySum::new(&g);
        for _ in 0..500 {
            let mut lo = [0i64; 3];
            let mut hi = [0i64; 3];
            for k in 0..3 {
                let n = g.dims()[k] as i64;
                let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
                lo[k] = a.min(b);
                hi[k] = a.max(b);
            }
            let mut brute = 0;
            for c in g.occupied_cells() {
                if (0..3).all(|k| (c[k] as i64) >= lo[k] && (c[k] as i64) <= hi[k]) {
                    brute += 1;
                }
            }
            assert_eq!(s.count(lo, hi), brute);
        }
        assert!(!s.box_free([-1, 0, 0], [0, 0, 0]));
    }
}
