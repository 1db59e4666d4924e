use std::collections::HashMap;

use crate::error::{Error, Result};

const MAX_KEY_VERTEX: u64 = 1 << 20;

fn choose(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Combinatorial-number-system id of a sorted vertex set:
/// `sum_i C(v_i, i + 1)`.
pub(crate) fn encode_key(sorted: &[u32]) -> u64 {
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| choose(v as u64, i as u64 + 1))
        .sum()
}

/// Inverse of [`encode_key`] for a simplex of dimension `dim`.
pub(crate) fn decode_key(dim: usize, mut key: u64) -> Option<Vec<u32>> {
    let mut verts = vec![0u32; dim + 1];
    let mut upper = MAX_KEY_VERTEX;
    for i in (0..=dim).rev() {
        let k = i as u64 + 1;
        // largest v < upper with C(v, k) <= key
        let (mut lo, mut hi) = (i as u64, upper);
        if lo >= hi || choose(lo, k) > key {
            return None;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if choose(mid, k) <= key {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        key -= choose(lo, k);
        verts[i] = lo as u32;
        upper = lo;
    }
    (key == 0).then_some(verts)
}

/// A finite simplicial complex closed under taking faces. Cell ids follow
/// the `(dim, key)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<u32>>,
    keys: Vec<u64>,
    lookup: HashMap<(usize, u64), usize>,
    max_dim: usize,
}

impl SimplicialComplex {
    pub fn new(mut simplices: Vec<Vec<u32>>) -> Result<Self> {
        for s in &mut simplices {
            if s.is_empty() {
                return Err(Error::param("empty simplex"));
            }
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("repeated vertex in simplex {s:?}")));
            }
            if s.last().is_some_and(|&v| v as u64 >= MAX_KEY_VERTEX) {
                return Err(Error::param("vertex label too large"));
            }
        }
        simplices.sort_unstable_by_key(|s| (s.len(), encode_key(s)));
        simplices.dedup();
        let keys: Vec<u64> = simplices.iter().map(|s| encode_key(s)).collect();
        let lookup: HashMap<(usize, u64), usize> = simplices
            .iter()
            .zip(&keys)
            .enumerate()
            .map(|(i, (s, &k))| ((s.len() - 1, k), i))
            .collect();
        let max_dim = simplices.iter().map(|s| s.len() - 1).max().unwrap_or(0);
        let complex = Self {
            simplices,
            keys,
            lookup,
            max_dim,
        };
        let mut faces = Vec::new();
        for (i, s) in complex.simplices.iter().enumerate() {
            if s.len() > 1 && !complex.try_faces(i, &mut faces) {
                return Err(Error::param(format!("simplex {s:?} is missing a face")));
            }
        }
        Ok(complex)
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn dim_of(&self, cell: usize) -> usize {
        self.simplices[cell].len() - 1
    }

    pub fn key_of(&self, cell: usize) -> u64 {
        self.keys[cell]
    }

    pub fn vertices(&self, cell: usize) -> &[u32] {
        &self.simplices[cell]
    }

    pub fn cell_by_key(&self, dim: usize, key: u64) -> Option<usize> {
        self.lookup.get(&(dim, key)).copied()
    }

    pub fn cell_of(&self, vertices: &[u32]) -> Option<usize> {
        let mut v = vertices.to_vec();
        v.sort_unstable();
        self.cell_by_key(v.len() - 1, encode_key(&v))
    }

    fn try_faces(&self, cell: usize, out: &mut Vec<usize>) -> bool {
        out.clear();
        let s = &self.simplices[cell];
        if s.len() == 1 {
            return true;
        }
        let mut buf = Vec::with_capacity(s.len() - 1);
        for skip in 0..s.len() {
            buf.clear();
            buf.extend(s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
            match self.cell_by_key(buf.len() - 1, encode_key(&buf)) {
                Some(f) => out.push(f),
                None => return false,
            }
        }
        true
    }

    pub fn faces(&self, cell: usize, out: &mut Vec<usize>) {
        let ok = self.try_faces(cell, out);
        debug_assert!(ok, "complex validated as closed");
    }
}
