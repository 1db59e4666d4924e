//! Pairing for filtrations of the full periodic cubical grid.
//!
//! Dimension 0 pairs come from a union-find over edges with the elder rule.
//! Pairs between `(d-1)`- and `d`-cells come from the same procedure on the
//! dual graph (top cells joined across shared facets) run backwards through
//! the filtration. Remaining middle dimensions are reduced with clearing,
//! and the edge rows that the first pass found to be negative are dropped
//! from the 2-cell columns.

use super::matrix::PivotStore;
use super::unionfind::UnionFind;
use super::Pairing;
use crate::filtration::{Filtration, PeriodicGrid};

pub fn cubical_pairing(f: &Filtration, g: &PeriodicGrid) -> Pairing {
    let n = f.len();
    let d = g.dim();
    let order = f.order();
    let dims = f.dims();
    let positions = f.positions();
    let nv = g.n_vertices();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    // by position: 1 = birth of a pair already found, 2 = negative edge
    let mut role = vec![0u8; n];
    let mut faces = Vec::with_capacity(2 * d);

    let mut uf = UnionFind::with_tags(nv, |o| positions[g.vertex_cell(o)]);
    for (pos, &cell) in order.iter().enumerate() {
        if dims[cell as usize] != 1 {
            continue;
        }
        g.faces(cell as usize, &mut faces);
        let a = uf.find(g.vertex_ordinal(faces[0]) as u32);
        let b = uf.find(g.vertex_ordinal(faces[1]) as u32);
        if a == b {
            continue;
        }
        let (ta, tb) = (uf.tag(a), uf.tag(b));
        pairs.push((ta.max(tb), pos as u32));
        role[pos] = 2;
        uf.union_roots(a, b, ta.min(tb));
    }
    drop(uf);

    // top cells share the ordinal of their lower corner vertex
    let mut tuf = UnionFind::with_tags(nv, |o| positions[g.dual(g.vertex_cell(o))]);
    for pos in (0..n).rev() {
        let cell = order[pos] as usize;
        if dims[cell] as usize != d - 1 {
            continue;
        }
        g.cofaces(cell, &mut faces);
        let a = tuf.find(g.vertex_ordinal(faces[0]) as u32);
        let b = tuf.find(g.vertex_ordinal(faces[1]) as u32);
        if a == b {
            continue;
        }
        let (ta, tb) = (tuf.tag(a), tuf.tag(b));
        debug_assert_ne!(role[pos], 2, "facet cannot be both negative and positive");
        pairs.push((pos as u32, ta.min(tb)));
        role[pos] = 1;
        tuf.union_roots(a, b, ta.max(tb));
    }
    drop(tuf);

    let mut store = PivotStore::new(n);
    let (mut work, mut scratch) = (Vec::new(), Vec::new());
    for j in (2..d).rev() {
        for (pos, &cell) in order.iter().enumerate() {
            if dims[cell as usize] as usize != j || role[pos] == 1 {
                continue;
            }
            g.faces(cell as usize, &mut faces);
            work.clear();
            work.extend(
                faces
                    .iter()
                    .map(|&c| positions[c])
                    .filter(|&p| role[p as usize] != 2),
            );
            work.sort_unstable();
            if let Some(low) = store.reduce(&mut work, &mut scratch) {
                pairs.push((low, pos as u32));
                role[low as usize] = 1;
                store.insert(&work);
            }
        }
    }
    Pairing::from_pairs(n, pairs)
}
