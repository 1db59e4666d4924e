//! Filtered cell complexes.
//!
//! Two complex families are supported: the periodic cubical grid (occupancy
//! and vacancy filtrations) and explicit simplicial complexes (the Čech
//! oracle and hand-built test complexes). A [`Filtration`] assigns a birth
//! value to every cell and fixes the total order `(birth, dim, index)`.

mod cech;
mod grid;
mod occupancy;
mod simplicial;

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::slice::ParallelSliceMut;
use serde::{Deserialize, Serialize};

pub use cech::{build_cech_filtration, build_cech_filtration_with, minimal_enclosing_radius, CechOptions, CECH_CAP, CECH_POINT_LIMIT};
pub use grid::{binomial, GridSpec, PeriodicGrid};
pub use occupancy::{
    build_occupancy_filtration, build_vacancy_complex, build_vacancy_filtration,
    distance_transform, NearestNeighbors, VacancyComplex,
};
pub use simplicial::SimplicialComplex;

use crate::error::{Error, Result};

/// What a filtration was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiltrationKind {
    /// Sublevel sets of the distance to the cloud on the primal grid.
    Occupancy,
    /// Superlevel sets on the dual grid; stored values are negated radii.
    Vacancy,
    Cech,
    Custom,
}

impl FiltrationKind {
    fn as_str(self) -> &'static str {
        match self {
            FiltrationKind::Occupancy => "occupancy",
            FiltrationKind::Vacancy => "vacancy",
            FiltrationKind::Cech => "cech",
            FiltrationKind::Custom => "custom",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "occupancy" => FiltrationKind::Occupancy,
            "vacancy" => FiltrationKind::Vacancy,
            "cech" => FiltrationKind::Cech,
            "custom" => FiltrationKind::Custom,
            _ => return None,
        })
    }
}

/// Ties a filtration (and every diagram computed from it) to its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: FiltrationKind,
    pub seed: u64,
    /// Digest of the point cloud coordinates.
    pub fingerprint: u64,
    /// Grid resolution `m` for cubical filtrations.
    pub grid: Option<usize>,
}

impl Provenance {
    pub fn custom() -> Self {
        Self {
            kind: FiltrationKind::Custom,
            seed: 0,
            fingerprint: 0,
            grid: None,
        }
    }
}

/// The complex reached at the end of the filtration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum TerminalShape {
    /// The full periodic grid, homeomorphic to `T^d`.
    Torus { d: usize },
    /// A Čech complex truncated at `cap`.
    CechCap { cap: f64 },
    Other,
}

/// The underlying unfiltered complex.
#[derive(Debug, Clone, PartialEq)]
pub enum Complex {
    Cubical(PeriodicGrid),
    Simplicial(SimplicialComplex),
}

impl Complex {
    pub fn n_cells(&self) -> usize {
        match self {
            Complex::Cubical(g) => g.n_cells(),
            Complex::Simplicial(s) => s.len(),
        }
    }

    pub fn cell_dim(&self, cell: usize) -> usize {
        match self {
            Complex::Cubical(g) => g.cell_dim(cell),
            Complex::Simplicial(s) => s.dim_of(cell),
        }
    }

    /// Canonical integer id, stable across runs and used in exports.
    pub fn canonical_index(&self, cell: usize) -> u64 {
        match self {
            Complex::Cubical(_) => cell as u64,
            Complex::Simplicial(s) => s.key_of(cell),
        }
    }

    pub fn faces(&self, cell: usize, out: &mut Vec<usize>) {
        match self {
            Complex::Cubical(g) => g.faces(cell, out),
            Complex::Simplicial(s) => s.faces(cell, out),
        }
    }

    pub fn max_dim(&self) -> usize {
        match self {
            Complex::Cubical(g) => g.dim(),
            Complex::Simplicial(s) => s.max_dim(),
        }
    }
}

/// One cell of a filtration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilteredCell {
    pub dim: usize,
    pub index: u64,
    pub birth: f64,
}

/// A complex with a monotone birth function and its filtration order.
#[derive(Debug, Clone)]
pub struct Filtration {
    complex: Complex,
    births: Vec<f64>,
    dims: Vec<u8>,
    order: Vec<u32>,
    terminal: TerminalShape,
    provenance: Provenance,
}

/// Order-preserving map from `f64` (total order) to `u64`.
#[inline]
pub(crate) fn f64_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

impl Filtration {
    /// Sort the cells into filtration order. Births are indexed by cell id.
    /// Monotonicity is not checked here; see [`Filtration::check_monotone`].
    pub fn new(
        complex: Complex,
        births: Vec<f64>,
        terminal: TerminalShape,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = complex.n_cells();
        if births.len() != n {
            return Err(Error::param(format!(
                "{} birth values for a complex with {n} cells",
                births.len()
            )));
        }
        if n >= u32::MAX as usize {
            return Err(Error::Resource(format!("{n} cells exceed 32-bit positions")));
        }
        if let Some(i) = births.iter().position(|b| b.is_nan()) {
            return Err(Error::param(format!("cell {i} has a NaN birth")));
        }
        let dims: Vec<u8> = (0..n).map(|c| complex.cell_dim(c) as u8).collect();
        if let Complex::Simplicial(s) = &complex {
            if (0..n).any(|c| s.key_of(c) >= 1 << 59) {
                return Err(Error::Resource("simplex ids exceed the 59-bit key space".into()));
            }
        }
        let mut keyed: Vec<(u64, u64)> = (0..n)
            .map(|c| {
                let idx = complex.canonical_index(c);
                (f64_key(births[c]), ((dims[c] as u64) << 59) | idx)
            })
            .collect();
        keyed.par_sort_unstable();
        let order = match &complex {
            Complex::Cubical(_) => keyed.iter().map(|&(_, k)| (k & ((1 << 59) - 1)) as u32).collect(),
            Complex::Simplicial(s) => keyed
                .iter()
                .map(|&(_, k)| {
                    let dim = (k >> 59) as usize;
                    s.cell_by_key(dim, k & ((1 << 59) - 1)).expect("key of a present simplex") as u32
                })
                .collect(),
        };
        Ok(Self {
            complex,
            births,
            dims,
            order,
            terminal,
            provenance,
        })
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn terminal(&self) -> TerminalShape {
        self.terminal
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Birth by cell id.
    pub fn births(&self) -> &[f64] {
        &self.births
    }

    pub fn birth_of(&self, cell: usize) -> f64 {
        self.births[cell]
    }

    pub fn dim_of(&self, cell: usize) -> usize {
        self.dims[cell] as usize
    }

    pub fn dims(&self) -> &[u8] {
        &self.dims
    }

    /// Cell ids in filtration order.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// Inverse of [`Filtration::order`]: position of every cell id.
    pub fn positions(&self) -> Vec<u32> {
        let mut pos = vec![0u32; self.order.len()];
        for (p, &c) in self.order.iter().enumerate() {
            pos[c as usize] = p as u32;
        }
        pos
    }

    pub fn max_dim(&self) -> usize {
        self.complex.max_dim()
    }

    pub fn cells(&self) -> impl Iterator<Item = FilteredCell> + '_ {
        self.order.iter().map(move |&c| {
            let c = c as usize;
            FilteredCell {
                dim: self.dims[c] as usize,
                index: self.complex.canonical_index(c),
                birth: self.births[c],
            }
        })
    }

    /// Every face must be born no later than its coface.
    pub fn check_monotone(&self) -> Result<()> {
        let mut faces = Vec::new();
        for cell in 0..self.births.len() {
            self.complex.faces(cell, &mut faces);
            for &f in &faces {
                if self.births[f].total_cmp(&self.births[cell]) == Ordering::Greater {
                    return Err(Error::contract(format!(
                        "non-monotone filtration: face (dim {}, index {}, birth {}) enters after cell (dim {}, index {}, birth {})",
                        self.dims[f],
                        self.complex.canonical_index(f),
                        self.births[f],
                        self.dims[cell],
                        self.complex.canonical_index(cell),
                        self.births[cell]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of cells of each dimension with birth `<= t`.
    pub fn cell_counts_at(&self, t: f64) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim() + 1];
        for (c, &b) in self.births.iter().enumerate() {
            if b <= t {
                counts[self.dims[c] as usize] += 1;
            }
        }
        counts
    }

    fn header(&self) -> String {
        let p = &self.provenance;
        let mut h = match &self.complex {
            Complex::Cubical(g) => format!("# cubical d={} m={}", g.dim(), g.m()),
            Complex::Simplicial(_) => "# simplicial".to_string(),
        };
        let _ = write!(h, " kind={} seed={} fingerprint={}", p.kind.as_str(), p.seed, p.fingerprint);
        match self.terminal {
            TerminalShape::Torus { d } => {
                let _ = write!(h, " terminal=torus:{d}");
            }
            TerminalShape::CechCap { cap } => {
                let _ = write!(h, " terminal=cech:{cap}");
            }
            TerminalShape::Other => h.push_str(" terminal=other"),
        }
        h
    }

    /// Text export: a header line, then `dim index birth` per cell in
    /// filtration order.
    pub fn to_text(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for cell in self.cells() {
            let _ = writeln!(out, "{} {} {}", cell.dim, cell.index, cell.birth);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty filtration file"))?;
        let mut tokens = header
            .strip_prefix('#')
            .ok_or_else(|| Error::parse(hline, "missing '#' header"))?
            .split_whitespace();
        let family = tokens.next().ok_or_else(|| Error::parse(hline, "missing complex family"))?;
        let mut d = None;
        let mut m = None;
        let mut provenance = Provenance::custom();
        let mut terminal = TerminalShape::Other;
        for tok in tokens {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::parse(hline, format!("bad header token {tok:?}")))?;
            let bad = || Error::parse(hline, format!("bad header value {tok:?}"));
            match k {
                "d" => d = Some(v.parse::<usize>().map_err(|_| bad())?),
                "m" => m = Some(v.parse::<usize>().map_err(|_| bad())?),
                "kind" => provenance.kind = FiltrationKind::parse(v).ok_or_else(bad)?,
                "seed" => provenance.seed = v.parse().map_err(|_| bad())?,
                "fingerprint" => provenance.fingerprint = v.parse().map_err(|_| bad())?,
                "terminal" => {
                    terminal = match v.split_once(':') {
                        Some(("torus", x)) => TerminalShape::Torus {
                            d: x.parse().map_err(|_| bad())?,
                        },
                        Some(("cech", x)) => TerminalShape::CechCap {
                            cap: x.parse().map_err(|_| bad())?,
                        },
                        None if v == "other" => TerminalShape::Other,
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(Error::parse(hline, format!("unknown header key {k:?}"))),
            }
        }

        let mut rows: Vec<(usize, usize, u64, f64)> = Vec::new();
        for (lineno, line) in lines {
            if line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut field = |name: &str| {
                it.next()
                    .ok_or_else(|| Error::parse(lineno, format!("missing {name}")))
            };
            let dim: usize = field("dim")?
                .parse()
                .map_err(|_| Error::parse(lineno, "bad dim"))?;
            let index: u64 = field("index")?
                .parse()
                .map_err(|_| Error::parse(lineno, "bad index"))?;
            let birth: f64 = field("birth")?
                .parse()
                .map_err(|_| Error::parse(lineno, "bad birth"))?;
            if birth.is_nan() {
                return Err(Error::parse(lineno, "NaN birth"));
            }
            if it.next().is_some() {
                return Err(Error::parse(lineno, "trailing fields"));
            }
            rows.push((lineno, dim, index, birth));
        }
        for w in rows.windows(2) {
            let (_, d0, i0, b0) = w[0];
            let (l1, d1, i1, b1) = w[1];
            if (f64_key(b0), d0, i0) >= (f64_key(b1), d1, i1) {
                return Err(Error::parse(l1, "cells not in filtration order"));
            }
        }

        let (complex, births) = match family {
            "cubical" => {
                let d = d.ok_or_else(|| Error::parse(hline, "cubical header needs d"))?;
                let m = m.ok_or_else(|| Error::parse(hline, "cubical header needs m"))?;
                let torus = crate::torus::TorusSpec::new(d).map_err(|e| Error::parse(hline, e.to_string()))?;
                let gs = GridSpec::new(m).map_err(|e| Error::parse(hline, e.to_string()))?;
                if gs.total_cells(d) > 1 << 28 {
                    return Err(Error::Resource(format!("grid m={m} d={d} too large to load")));
                }
                let g = PeriodicGrid::new(torus, gs)?;
                let n = g.n_cells();
                if rows.len() != n {
                    return Err(Error::parse(hline, format!("expected {n} cells, found {}", rows.len())));
                }
                let mut births = vec![f64::NAN; n];
                for &(lineno, dim, index, birth) in &rows {
                    let idx = index as usize;
                    if idx >= n || g.cell_dim(idx) != dim {
                        return Err(Error::parse(lineno, "cell index/dimension mismatch"));
                    }
                    if !births[idx].is_nan() {
                        return Err(Error::parse(lineno, "duplicate cell"));
                    }
                    births[idx] = birth;
                }
                (Complex::Cubical(g), births)
            }
            "simplicial" => {
                if rows.len() > 1 << 24 {
                    return Err(Error::Resource("simplicial file too large".into()));
                }
                let mut simplices = Vec::with_capacity(rows.len());
                for &(lineno, dim, index, _) in &rows {
                    if dim > 8 {
                        return Err(Error::parse(lineno, "simplex dimension too large"));
                    }
                    let verts = simplicial::decode_key(dim, index)
                        .ok_or_else(|| Error::parse(lineno, "index out of range"))?;
                    simplices.push(verts);
                }
                let complex = SimplicialComplex::new(simplices).map_err(|e| Error::parse(hline, e.to_string()))?;
                if complex.len() != rows.len() {
                    return Err(Error::parse(hline, "duplicate simplices"));
                }
                let mut births = vec![0.0; rows.len()];
                for &(_, dim, index, birth) in &rows {
                    births[complex.cell_by_key(dim, index).expect("just inserted")] = birth;
                }
                (Complex::Simplicial(complex), births)
            }
            other => return Err(Error::parse(hline, format!("unknown complex family {other:?}"))),
        };
        Filtration::new(complex, births, terminal, provenance)
    }
}
