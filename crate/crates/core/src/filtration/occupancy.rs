//! Occupancy and vacancy filtrations on the periodic cubical grid.
//!
//! Occupancy: every grid vertex is born at its exact toroidal distance to the
//! nearest cloud point; higher cells take the maximum over their vertices
//! (lower-star). The sublevel complex at `r` approximates `O_r`.
//!
//! Vacancy: the dual cell of a primal cell `σ` lives on the half-cell-shifted
//! grid and belongs to the vacancy complex at `r` iff `birth(σ) > r`. This is
//! the combinatorial complement of the occupancy complex, which deformation
//! retracts onto the torus minus the occupancy complex. The vacancy
//! filtration stores `-birth(σ)` so that it grows as `r` decreases.

use rayon::prelude::*;

use super::grid::{GridSpec, PeriodicGrid};
use super::{Complex, Filtration, FiltrationKind, Provenance, TerminalShape};
use crate::error::{Error, Result};
use crate::torus::{toroidal_distance_sq, PointCloud, MAX_DIM};

/// Bucket grid for exact nearest-neighbor queries under the toroidal metric.
#[derive(Debug, Clone)]
pub struct NearestNeighbors {
    d: usize,
    buckets: usize,
    start: Vec<u32>,
    coords: Vec<f64>,
}

impl NearestNeighbors {
    pub fn new(cloud: &PointCloud) -> Self {
        let d = cloud.dim();
        let n = cloud.len();
        let buckets = ((n as f64).powf(1.0 / d as f64).floor() as usize).clamp(1, 256);
        let total = buckets.pow(d as u32);
        let bucket_of = |p: &[f64]| {
            p.iter().rev().fold(0usize, |acc, &x| {
                acc * buckets + ((x * buckets as f64) as usize).min(buckets - 1)
            })
        };
        let mut counts = vec![0u32; total + 1];
        for p in cloud.points() {
            counts[bucket_of(p) + 1] += 1;
        }
        for i in 0..total {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut coords = vec![0.0; n * d];
        for p in cloud.points() {
            let b = bucket_of(p);
            let slot = fill[b] as usize;
            coords[slot * d..(slot + 1) * d].copy_from_slice(p);
            fill[b] += 1;
        }
        Self {
            d,
            buckets,
            start: counts,
            coords,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    fn scan_bucket(&self, bucket: usize, q: &[f64], best: &mut f64) {
        let d = self.d;
        let (a, b) = (self.start[bucket] as usize, self.start[bucket + 1] as usize);
        for i in a..b {
            let dist = toroidal_distance_sq(q, &self.coords[i * d..(i + 1) * d]);
            if dist < *best {
                *best = dist;
            }
        }
    }

    /// Squared toroidal distance from `q` to the nearest point, `+inf` when empty.
    pub fn nearest_sq(&self, q: &[f64]) -> f64 {
        if self.coords.is_empty() {
            return f64::INFINITY;
        }
        let d = self.d;
        let nb = self.buckets as i64;
        let side = 1.0 / self.buckets as f64;
        let mut home = [0i64; MAX_DIM];
        for i in 0..d {
            home[i] = ((q[i] * self.buckets as f64) as i64).min(nb - 1);
        }
        let mut best = f64::INFINITY;
        let mut ring: i64 = 0;
        loop {
            if 2 * ring + 1 >= nb {
                // the ring wraps onto itself: finish with every bucket
                for b in 0..self.start.len() - 1 {
                    self.scan_bucket(b, q, &mut best);
                }
                return best;
            }
            // all offsets with Chebyshev norm exactly `ring`
            let width = (2 * ring + 1) as usize;
            let count = width.pow(d as u32);
            for code in 0..count {
                let mut rest = code;
                let mut off = [0i64; MAX_DIM];
                let mut on_shell = false;
                for o in off.iter_mut().take(d) {
                    *o = (rest % width) as i64 - ring;
                    rest /= width;
                    on_shell |= o.abs() == ring;
                }
                if !on_shell {
                    continue;
                }
                let mut b = 0usize;
                for i in (0..d).rev() {
                    b = b * self.buckets + (home[i] + off[i]).rem_euclid(nb) as usize;
                }
                self.scan_bucket(b, q, &mut best);
            }
            let reach = ring as f64 * side;
            if best <= reach * reach {
                return best;
            }
            ring += 1;
        }
    }
}

/// Exact distance from every grid vertex (indexed by vertex ordinal) to the cloud.
pub fn distance_transform(cloud: &PointCloud, grid: &PeriodicGrid) -> Vec<f64> {
    let nn = NearestNeighbors::new(cloud);
    let d = grid.dim();
    (0..grid.n_vertices())
        .into_par_iter()
        .with_min_len(1024)
        .map(|v| {
            let mut q = [0.0; MAX_DIM];
            grid.vertex_position(v, &mut q[..d]);
            nn.nearest_sq(&q[..d]).sqrt()
        })
        .collect()
}

/// Lower-star extension of vertex values to every cell of the grid.
pub(crate) fn lower_star(grid: &PeriodicGrid, vertex_values: &[f64]) -> Vec<f64> {
    let d = grid.dim();
    let n = grid.n_cells();
    let mut births = vec![f64::NAN; n];
    for (v, &val) in vertex_values.iter().enumerate() {
        births[grid.vertex_cell(v)] = val;
    }
    // After pass `axis`, every cell whose odd coordinates lie in 0..=axis is set.
    for axis in 0..d {
        for cell in 0..n {
            let c = grid.coords(cell);
            if c[axis] & 1 == 0 || (axis + 1..d).any(|j| c[j] & 1 == 1) {
                continue;
            }
            let lo = births[grid.step(cell, axis, false)];
            let hi = births[grid.step(cell, axis, true)];
            births[cell] = lo.max(hi);
        }
    }
    births
}

fn grid_for(cloud: &PointCloud, grid: GridSpec) -> Result<PeriodicGrid> {
    PeriodicGrid::new(cloud.torus(), grid)
}

/// Sublevel filtration of the distance to the cloud. An empty cloud yields
/// the `+inf` sentinel at every cell.
pub fn build_occupancy_filtration(cloud: &PointCloud, grid: GridSpec) -> Result<Filtration> {
    let g = grid_for(cloud, grid)?;
    let dist = distance_transform(cloud, &g);
    let births = lower_star(&g, &dist);
    Filtration::new(
        Complex::Cubical(g),
        births,
        TerminalShape::Torus { d: g.dim() },
        Provenance {
            kind: FiltrationKind::Occupancy,
            seed: cloud.seed(),
            fingerprint: cloud.fingerprint(),
            grid: Some(g.m()),
        },
    )
}

/// Vacancy filtration on the dual grid, derived from an occupancy filtration.
/// Stored values are negated occupancy births.
pub fn build_vacancy_filtration(occupancy: &Filtration) -> Result<Filtration> {
    let g = match occupancy.complex() {
        Complex::Cubical(g) => *g,
        Complex::Simplicial(_) => {
            return Err(Error::contract("vacancy filtration needs a cubical occupancy filtration"))
        }
    };
    if occupancy.provenance().kind != FiltrationKind::Occupancy {
        return Err(Error::contract("vacancy filtration must be derived from an occupancy filtration"));
    }
    let occ = occupancy.births();
    let mut values = vec![0.0; occ.len()];
    for (cell, &b) in occ.iter().enumerate() {
        values[g.dual(cell)] = -b;
    }
    let mut provenance = occupancy.provenance();
    provenance.kind = FiltrationKind::Vacancy;
    Filtration::new(Complex::Cubical(g), values, TerminalShape::Torus { d: g.dim() }, provenance)
}

/// The vacancy complex at a single radius.
#[derive(Debug, Clone)]
pub struct VacancyComplex {
    pub r: f64,
    grid: PeriodicGrid,
    /// Dual-grid cell ids whose primal cell is born after `r`.
    pub cells: Vec<u32>,
    /// The cell set is closed under faces on the dual grid.
    pub closed: bool,
}

impl VacancyComplex {
    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    /// Betti numbers `β_0..β_d` of the vacancy complex.
    pub fn betti_numbers(&self) -> Result<Vec<usize>> {
        let n = self.grid.n_cells();
        let mut births = vec![1.0; n];
        for &c in &self.cells {
            births[c as usize] = 0.0;
        }
        let f = Filtration::new(
            Complex::Cubical(self.grid),
            births,
            TerminalShape::Torus { d: self.grid.dim() },
            Provenance::custom(),
        )?;
        let diag = crate::persistence::reduce(&f)?;
        Ok((0..=self.grid.dim()).map(|k| diag.betti_at(0.0, k)).collect())
    }
}

pub fn build_vacancy_complex(cloud: &PointCloud, grid: GridSpec, r: f64) -> Result<VacancyComplex> {
    if !(r >= 0.0) {
        return Err(Error::param(format!("radius must be nonnegative, got {r}")));
    }
    let g = grid_for(cloud, grid)?;
    let dist = distance_transform(cloud, &g);
    let births = lower_star(&g, &dist);
    let mut cells: Vec<u32> = births
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b > r)
        .map(|(c, _)| g.dual(c) as u32)
        .collect();
    cells.sort_unstable();
    let vc = VacancyComplex {
        r,
        grid: g,
        cells,
        closed: true,
    };
    Ok(vc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{sample_poisson, TorusSpec};

    fn t(d: usize) -> TorusSpec {
        TorusSpec::new(d).unwrap()
    }

    #[test]
    fn nearest_neighbor_matches_brute_force() {
        for (d, rate, seed) in [(2, 50.0, 1), (2, 3.0, 2), (3, 200.0, 3), (4, 40.0, 4), (2, 1.0, 5)] {
            let cloud = sample_poisson(t(d), rate, seed).unwrap();
            let nn = NearestNeighbors::new(&cloud);
            let queries = sample_poisson(t(d), 300.0, seed + 100).unwrap();
            for q in queries.points() {
                let brute = cloud
                    .points()
                    .map(|p| toroidal_distance_sq(p, q))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(nn.nearest_sq(q), brute);
            }
        }
    }

    #[test]
    fn point_on_vertex_has_zero_birth() {
        let cloud = PointCloud::from_points(t(2), &[vec![0.25, 0.5]], 1.0, 0).unwrap();
        let f = build_occupancy_filtration(&cloud, GridSpec::new(8).unwrap()).unwrap();
        let g = PeriodicGrid::new(t(2), GridSpec::new(8).unwrap()).unwrap();
        let v = g.index(&[4, 8]);
        assert_eq!(f.birth_of(v), 0.0);
        f.check_monotone().unwrap();
    }

    #[test]
    fn coverage_radius_includes_every_cell() {
        let cloud = sample_poisson(t(2), 5.0, 11).unwrap();
        let f = build_occupancy_filtration(&cloud, GridSpec::new(16).unwrap()).unwrap();
        let diam = t(2).diameter();
        assert!(f.births().iter().all(|&b| b <= diam));
    }

    #[test]
    fn empty_cloud_sentinel() {
        let cloud = PointCloud::empty(t(2), 0.0, 0);
        let f = build_occupancy_filtration(&cloud, GridSpec::new(8).unwrap()).unwrap();
        assert!(f.births().iter().all(|b| *b == f64::INFINITY));
        let v = build_vacancy_complex(&cloud, GridSpec::new(8).unwrap(), 0.3).unwrap();
        assert_eq!(v.cells.len(), 256);
    }

    #[test]
    fn vacancy_is_closed_and_complementary() {
        let cloud = sample_poisson(t(2), 10.0, 7).unwrap();
        let gs = GridSpec::new(16).unwrap();
        let occ = build_occupancy_filtration(&cloud, gs).unwrap();
        let vac = build_vacancy_filtration(&occ).unwrap();
        vac.check_monotone().unwrap();
        let r = 0.12;
        let vc = build_vacancy_complex(&cloud, gs, r).unwrap();
        let g = PeriodicGrid::new(t(2), gs).unwrap();
        let in_vac: std::collections::HashSet<u32> = vc.cells.iter().copied().collect();
        let mut faces = Vec::new();
        for &c in &vc.cells {
            g.faces(c as usize, &mut faces);
            assert!(faces.iter().all(|f| in_vac.contains(&(*f as u32))));
        }
        for cell in 0..g.n_cells() {
            let occupied = occ.birth_of(cell) <= r;
            assert_ne!(occupied, in_vac.contains(&(g.dual(cell) as u32)));
        }
        let full = build_vacancy_complex(&cloud, gs, 1.0).unwrap();
        assert!(full.cells.is_empty());
    }
}
