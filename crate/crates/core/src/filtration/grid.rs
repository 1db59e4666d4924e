//! Periodic cubical grid in doubled coordinates.
//!
//! A cell of the `m`-per-axis periodic grid on `T^d` is addressed by a vector
//! `c` in `[0, 2m)^d`: an even coordinate `2a` pins the cell to the grid plane
//! `a * h`, an odd coordinate `2a + 1` spans the interval `[a h, (a + 1) h]`.
//! The cell dimension is the number of odd coordinates. Shifting every
//! coordinate by one maps a `k`-cell to the dual `(d - k)`-cell on the
//! half-cell-shifted grid, and reverses the face relation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{TorusSpec, MAX_DIM};

/// Resolution of the cubical approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    m: usize,
}

impl GridSpec {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::param(format!("grid needs m >= 4 cells per axis, got {m}")));
        }
        Ok(Self { m })
    }

    /// `max(64, 4 * ceil(1 / r_min))`.
    pub fn for_min_radius(r_min: f64) -> Result<Self> {
        if !(r_min > 0.0) || !r_min.is_finite() {
            return Err(Error::param(format!("minimum radius must be positive, got {r_min}")));
        }
        let m = (4.0 * (1.0 / r_min).ceil()).max(64.0);
        if m > 1e9 {
            return Err(Error::Resource(format!("grid rule asks for m = {m}")));
        }
        Self::new(m as usize)
    }

    pub fn cells_per_axis(&self) -> usize {
        self.m
    }

    pub fn cell_side(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn vertex_count(&self, d: usize) -> u128 {
        (self.m as u128).pow(d as u32)
    }

    /// Cells of every dimension, `(2m)^d`.
    pub fn total_cells(&self, d: usize) -> u128 {
        (2 * self.m as u128).pow(d as u32)
    }
}

/// Index arithmetic for the periodic cubical complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicGrid {
    d: usize,
    m: usize,
}

impl PeriodicGrid {
    pub fn new(torus: TorusSpec, grid: GridSpec) -> Result<Self> {
        let d = torus.dim();
        if grid.total_cells(d) >= u32::MAX as u128 {
            return Err(Error::Resource(format!(
                "periodic grid with m={} in d={d} has {} cells, more than 32-bit indexing allows",
                grid.cells_per_axis(),
                grid.total_cells(d)
            )));
        }
        Ok(Self {
            d,
            m: grid.cells_per_axis(),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { m: self.m }
    }

    pub fn torus(&self) -> TorusSpec {
        TorusSpec::new(self.d).expect("grid dimension validated")
    }

    #[inline]
    fn side(&self) -> usize {
        2 * self.m
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.side().pow(axis as u32)
    }

    pub fn n_cells(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn n_vertices(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    #[inline]
    pub fn coords(&self, cell: usize) -> [usize; MAX_DIM] {
        let mut c = [0; MAX_DIM];
        let mut rest = cell;
        let s = self.side();
        for ci in c.iter_mut().take(self.d) {
            *ci = rest % s;
            rest /= s;
        }
        c
    }

    #[inline]
    pub fn index(&self, coords: &[usize]) -> usize {
        let s = self.side();
        coords
            .iter()
            .take(self.d)
            .rev()
            .fold(0, |acc, &c| acc * s + (c % s))
    }

    #[inline]
    pub fn cell_dim(&self, cell: usize) -> usize {
        let s = self.side();
        let mut rest = cell;
        let mut k = 0;
        for _ in 0..self.d {
            k += (rest % s) & 1;
            rest /= s;
        }
        k
    }

    /// Neighbor of `cell` one step along `axis` (+1 or -1), wrapping.
    #[inline]
    pub fn step(&self, cell: usize, axis: usize, up: bool) -> usize {
        let s = self.side();
        let stride = self.stride(axis);
        let c = (cell / stride) % s;
        if up {
            if c + 1 == s {
                cell - c * stride
            } else {
                cell + stride
            }
        } else if c == 0 {
            cell + (s - 1) * stride
        } else {
            cell - stride
        }
    }

    /// Codimension-one faces: step both ways along every odd axis.
    pub fn faces(&self, cell: usize, out: &mut Vec<usize>) {
        out.clear();
        let c = self.coords(cell);
        for axis in 0..self.d {
            if c[axis] & 1 == 1 {
                out.push(self.step(cell, axis, false));
                out.push(self.step(cell, axis, true));
            }
        }
    }

    /// Codimension-one cofaces: step both ways along every even axis.
    pub fn cofaces(&self, cell: usize, out: &mut Vec<usize>) {
        out.clear();
        let c = self.coords(cell);
        for axis in 0..self.d {
            if c[axis] & 1 == 0 {
                out.push(self.step(cell, axis, false));
                out.push(self.step(cell, axis, true));
            }
        }
    }

    /// The dual cell on the half-cell-shifted grid.
    #[inline]
    pub fn dual(&self, cell: usize) -> usize {
        let mut c = self.coords(cell);
        for ci in c.iter_mut().take(self.d) {
            *ci += 1;
        }
        self.index(&c[..self.d])
    }

    /// Ordinal of a vertex cell among the `m^d` vertices.
    #[inline]
    pub fn vertex_ordinal(&self, cell: usize) -> usize {
        let c = self.coords(cell);
        (0..self.d).rev().fold(0, |acc, i| acc * self.m + c[i] / 2)
    }

    /// Cell id of the vertex with the given ordinal.
    pub fn vertex_cell(&self, ordinal: usize) -> usize {
        let mut c = [0; MAX_DIM];
        let mut rest = ordinal;
        for ci in c.iter_mut().take(self.d) {
            *ci = 2 * (rest % self.m);
            rest /= self.m;
        }
        self.index(&c[..self.d])
    }

    /// Geometric position of a vertex (primal grid) in `[0,1)^d`.
    pub fn vertex_position(&self, ordinal: usize, out: &mut [f64]) {
        let h = 1.0 / self.m as f64;
        let mut rest = ordinal;
        for x in out.iter_mut().take(self.d) {
            *x = (rest % self.m) as f64 * h;
            rest /= self.m;
        }
    }

    /// Center of a cell in `[0,1)^d`, for geometric diagnostics.
    pub fn cell_center(&self, cell: usize, out: &mut [f64]) {
        let h = 1.0 / self.m as f64;
        let c = self.coords(cell);
        for i in 0..self.d {
            out[i] = c[i] as f64 * h / 2.0;
        }
    }

    /// Number of cells of each dimension: `C(d,k) m^d`.
    pub fn cells_of_dim(&self, k: usize) -> usize {
        binomial(self.d, k) * self.n_vertices()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
