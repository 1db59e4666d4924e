//! Boundary-matrix column reduction over the two-element field.
//!
//! Columns are sorted `u32` position lists; the pivot is the last entry.

use super::Pairing;
use crate::filtration::Filtration;

pub(crate) const NONE: u32 = u32::MAX;

/// Symmetric difference of two ascending lists, written back into `work`.
#[inline]
pub(crate) fn add_column(work: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    scratch.reserve(work.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < work.len() && j < other.len() {
        let (a, b) = (work[i], other[j]);
        if a < b {
            scratch.push(a);
            i += 1;
        } else if b < a {
            scratch.push(b);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    scratch.extend_from_slice(&work[i..]);
    scratch.extend_from_slice(&other[j..]);
    std::mem::swap(work, scratch);
}

/// Reduced columns keyed by their pivot, stored in one flat arena.
pub(crate) struct PivotStore {
    owner: Vec<u32>,
    span: Vec<(u32, u32)>,
    data: Vec<u32>,
}

impl PivotStore {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            owner: vec![NONE; n],
            span: Vec::new(),
            data: Vec::new(),
        }
    }

    #[inline]
    pub(crate) fn column_with_pivot(&self, pivot: u32) -> Option<&[u32]> {
        let slot = self.owner[pivot as usize];
        if slot == NONE {
            return None;
        }
        let (a, len) = self.span[slot as usize];
        Some(&self.data[a as usize..(a + len) as usize])
    }

    pub(crate) fn insert(&mut self, column: &[u32]) {
        let pivot = *column.last().expect("nonempty column");
        let start = self.data.len() as u32;
        self.data.extend_from_slice(column);
        self.owner[pivot as usize] = self.span.len() as u32;
        self.span.push((start, column.len() as u32));
    }

    /// Reduce `work` in place; returns the pivot or `None` for a zero column.
    #[inline]
    pub(crate) fn reduce(&self, work: &mut Vec<u32>, scratch: &mut Vec<u32>) -> Option<u32> {
        while let Some(&low) = work.last() {
            match self.column_with_pivot(low) {
                Some(col) => add_column(work, col, scratch),
                None => return Some(low),
            }
        }
        None
    }
}

fn boundary_positions(f: &Filtration, positions: &[u32], cell: usize, faces: &mut Vec<usize>, out: &mut Vec<u32>) {
    f.complex().faces(cell, faces);
    out.clear();
    out.extend(faces.iter().map(|&c| positions[c]));
    out.sort_unstable();
    // a face listed twice cancels over the two-element field
    let mut w = 0;
    let mut i = 0;
    while i < out.len() {
        if i + 1 < out.len() && out[i] == out[i + 1] {
            i += 2;
        } else {
            out[w] = out[i];
            w += 1;
            i += 1;
        }
    }
    out.truncate(w);
}

/// The boundary matrix in filtration order: column `j` lists the positions
/// of the faces of the `j`-th cell, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<u32>>,
    dims: Vec<u8>,
}

impl BoundaryMatrix {
    pub fn from_filtration(f: &Filtration) -> Self {
        let positions = f.positions();
        let (mut faces, mut col) = (Vec::new(), Vec::new());
        let mut columns = Vec::with_capacity(f.len());
        let mut dims = Vec::with_capacity(f.len());
        for &cell in f.order() {
            boundary_positions(f, &positions, cell as usize, &mut faces, &mut col);
            columns.push(col.clone());
            dims.push(f.dim_of(cell as usize) as u8);
        }
        Self { columns, dims }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn dim(&self, j: usize) -> usize {
        self.dims[j] as usize
    }

    /// `∂(∂ e_j)` computed symbolically; empty for a valid complex.
    pub fn boundary_of_boundary(&self, j: usize) -> Vec<u32> {
        let (mut acc, mut scratch) = (Vec::new(), Vec::new());
        for &i in &self.columns[j] {
            add_column(&mut acc, &self.columns[i as usize], &mut scratch);
        }
        acc
    }
}

/// Left-to-right reduction without any optimization. This is the oracle
/// every faster route is compared against.
pub fn naive_pairing(f: &Filtration) -> Pairing {
    let m = BoundaryMatrix::from_filtration(f);
    let mut store = PivotStore::new(m.len());
    let mut pairs = Vec::new();
    let (mut work, mut scratch) = (Vec::new(), Vec::new());
    for pos in 0..m.len() {
        work.clear();
        work.extend_from_slice(m.column(pos));
        if let Some(low) = store.reduce(&mut work, &mut scratch) {
            pairs.push((low, pos as u32));
            store.insert(&work);
        }
    }
    Pairing::from_pairs(m.len(), pairs)
}

/// Reduction with clearing ("twist"): dimensions are processed from the top
/// down and every pivot found zeroes the column of the paired lower cell
/// before it is ever touched.
pub fn twist_pairing(f: &Filtration) -> Pairing {
    let n = f.len();
    let positions = f.positions();
    let mut store = PivotStore::new(n);
    let mut cleared = vec![false; n];
    let mut pairs = Vec::new();
    let (mut faces, mut work, mut scratch) = (Vec::new(), Vec::new(), Vec::new());
    for dim in (1..=f.max_dim()).rev() {
        for (pos, &cell) in f.order().iter().enumerate() {
            if f.dim_of(cell as usize) != dim || cleared[pos] {
                continue;
            }
            boundary_positions(f, &positions, cell as usize, &mut faces, &mut work);
            if let Some(low) = store.reduce(&mut work, &mut scratch) {
                pairs.push((low, pos as u32));
                cleared[low as usize] = true;
                store.insert(&work);
            }
        }
    }
    Pairing::from_pairs(n, pairs)
}
