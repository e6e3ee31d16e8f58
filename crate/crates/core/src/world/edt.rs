use super::{Bounds, Cell, VoxelGrid, WorldError};

/// Exact Euclidean distance from every cell center to the nearest occupied
/// cell center.
///
/// Values are kept as squared distances in cell units, which are exact
/// integers; [`DistanceField::distance`] converts to meters.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    bounds: Bounds,
    resolution: f64,
    dims: [usize; 3],
    squared_cells: Vec<f64>,
}

impl DistanceField {
    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn squared_cells(&self) -> &[f64] {
        &self.squared_cells
    }

    fn linear(&self, c: Cell) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    /// Distance in meters.
    pub fn distance(&self, c: Cell) -> f64 {
        self.squared_cells[self.linear(c)].sqrt() * self.resolution
    }

    /// Distance in meters by linear index.
    pub fn distance_linear(&self, idx: usize) -> f64 {
        self.squared_cells[idx].sqrt() * self.resolution
    }

    /// Largest value over the whole field, in meters.
    pub fn max_distance(&self) -> f64 {
        let m = self.squared_cells.iter().copied().fold(0.0, f64::max);
        m.sqrt() * self.resolution
    }
}

/// Felzenszwalb–Huttenlocher separable transform: three 1-D lower-envelope
/// passes of squared distance.
pub fn distance_transform(grid: &VoxelGrid) -> Result<DistanceField, WorldError> {
    if !grid.occupancy().iter().any(|&o| o) {
        return Err(WorldError::NoObstacles);
    }
    let dims = grid.dims();
    let mut values: Vec<f64> = grid
        .occupancy()
        .iter()
        .map(|&o| if o { 0.0 } else { f64::INFINITY })
        .collect();

    let longest = dims.iter().copied().max().unwrap_or(1);
    let mut scratch = Envelope::new(longest);
    let mut line = vec![0.0; longest];
    let mut out = vec![0.0; longest];

    let strides = [1, dims[0], dims[0] * dims[1]];
    for axis in 0..3 {
        let n = dims[axis];
        let stride = strides[axis];
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for u in 0..dims[a] {
            for w in 0..dims[b] {
                let base = u * strides[a] + w * strides[b];
                for q in 0..n {
                    line[q] = values[base + q * stride];
                }
                scratch.transform(&line[..n], &mut out[..n]);
                for q in 0..n {
                    values[base + q * stride] = out[q];
                }
            }
        }
    }

    Ok(DistanceField {
        bounds: *grid.bounds(),
        resolution: grid.resolution(),
        dims,
        squared_cells: values,
    })
}

struct Envelope {
    v: Vec<usize>,
    z: Vec<f64>,
}

impl Envelope {
    fn new(n: usize) -> Self {
        Self {
            v: vec![0; n],
            z: vec![0.0; n + 1],
        }
    }

    /// `out[q] = min_p (q - p)^2 + f[p]`, skipping infinite samples.
    fn transform(&mut self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        let mut k: isize = -1;
        for q in 0..n {
            if !f[q].is_finite() {
                continue;
            }
            if k < 0 {
                k = 0;
                self.v[0] = q;
                self.z[0] = f64::NEG_INFINITY;
                self.z[1] = f64::INFINITY;
                continue;
            }
            let qf = q as f64;
            loop {
                let p = self.v[k as usize];
                let pf = p as f64;
                let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf);
                if s <= self.z[k as usize] {
                    k -= 1;
                    if k < 0 {
                        k = 0;
                        self.v[0] = q;
                        self.z[0] = f64::NEG_INFINITY;
                        self.z[1] = f64::INFINITY;
                        break;
                    }
                } else {
                    k += 1;
                    self.v[k as usize] = q;
                    self.z[k as usize] = s;
                    self.z[k as usize + 1] = f64::INFINITY;
                    break;
                }
            }
        }
        if k < 0 {
            out.iter_mut().for_each(|o| *o = f64::INFINITY);
            return;
        }
        let mut j = 0usize;
        for (q, o) in out.iter_mut().enumerate() {
            let qf = q as f64;
            while self.z[j + 1] < qf {
                j += 1;
            }
            let p = self.v[j];
            let d = qf - p as f64;
            *o = d * d + f[p];
        }
    }
}
