//! Exact Čech filtration on small clouds, used as an oracle for the cubical
//! pipeline.
//!
//! A simplex is born at the radius of the smallest ball containing its
//! vertices. Below the cap of 1/4 every such ball lifts isometrically to
//! `R^d`, so the lift of each vertex nearest to the first vertex determines
//! the ball; larger candidates are pruned.

use super::simplicial::SimplicialComplex;
use super::{Complex, Filtration, FiltrationKind, Provenance, TerminalShape};
use crate::error::{Error, Result};
use crate::torus::{toroidal_distance_sq, wrapped_delta, PointCloud, MAX_DIM};

/// Largest admissible truncation radius.
pub const CECH_CAP: f64 = 0.25;

/// Default bound on the number of cloud points.
pub const CECH_POINT_LIMIT: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CechOptions {
    pub cap: f64,
    /// Highest simplex dimension; defaults to `d + 1` so that every
    /// homology group up to `H_d` is exact below the cap.
    pub max_dim: Option<usize>,
    pub point_limit: usize,
    pub simplex_limit: usize,
}

impl Default for CechOptions {
    fn default() -> Self {
        Self {
            cap: CECH_CAP,
            max_dim: None,
            point_limit: CECH_POINT_LIMIT,
            simplex_limit: 20_000_000,
        }
    }
}

impl CechOptions {
    pub fn with_cap(cap: f64) -> Self {
        Self {
            cap,
            ..Self::default()
        }
    }
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Circumcenter of `pts` within their affine hull.
fn circumcenter(pts: &[&[f64]], d: usize) -> Option<[f64; MAX_DIM]> {
    let q0 = pts[0];
    let s = pts.len() - 1;
    let mut c = [0.0; MAX_DIM];
    c[..d].copy_from_slice(&q0[..d]);
    if s == 0 {
        return Some(c);
    }
    let diffs: Vec<Vec<f64>> = pts[1..].iter().map(|p| (0..d).map(|i| p[i] - q0[i]).collect()).collect();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
    let g: Vec<Vec<f64>> = diffs
        .iter()
        .map(|u| diffs.iter().map(|v| 2.0 * dot(u, v)).collect())
        .collect();
    let rhs: Vec<f64> = diffs.iter().map(|u| dot(u, u)).collect();
    let coef = solve(g, rhs)?;
    for (a, u) in coef.iter().zip(&diffs) {
        for i in 0..d {
            c[i] += a * u[i];
        }
    }
    Some(c)
}

/// Radius of the smallest Euclidean ball containing `pts` (each of length `d`).
pub fn minimal_enclosing_radius(pts: &[&[f64]], d: usize) -> f64 {
    let k = pts.len();
    if k <= 1 {
        return 0.0;
    }
    let max_support = k.min(d + 1);
    let mut best = f64::INFINITY;
    let mut subset: Vec<&[f64]> = Vec::with_capacity(max_support);
    for mask in 1u32..(1 << k) {
        let size = mask.count_ones() as usize;
        if size > max_support {
            continue;
        }
        subset.clear();
        subset.extend((0..k).filter(|i| mask >> i & 1 == 1).map(|i| pts[i]));
        let Some(c) = circumcenter(&subset, d) else {
            continue;
        };
        let r2 = (0..d).map(|i| (subset[0][i] - c[i]).powi(2)).sum::<f64>();
        if r2.sqrt() >= best {
            continue;
        }
        let tol = r2 * 1e-12 + 1e-24;
        let encloses = pts
            .iter()
            .all(|p| (0..d).map(|i| (p[i] - c[i]).powi(2)).sum::<f64>() <= r2 + tol);
        if encloses {
            best = r2.sqrt();
        }
    }
    best
}

/// Čech filtration truncated at `cap`, with default options.
pub fn build_cech_filtration(cloud: &PointCloud, cap: f64) -> Result<Filtration> {
    build_cech_filtration_with(cloud, &CechOptions::with_cap(cap))
}

pub fn build_cech_filtration_with(cloud: &PointCloud, opts: &CechOptions) -> Result<Filtration> {
    let cap = opts.cap;
    if !(cap > 0.0) || cap > CECH_CAP {
        return Err(Error::param(format!(
            "nerve validity cap exceeded: cap must lie in (0, {CECH_CAP}], got {cap}"
        )));
    }
    let n = cloud.len();
    if n > opts.point_limit {
        return Err(Error::Resource(format!(
            "oracle limit: {n} points exceed the Čech limit of {}",
            opts.point_limit
        )));
    }
    let d = cloud.dim();
    let max_dim = opts.max_dim.unwrap_or(d + 1);

    let reach_sq = (2.0 * cap) * (2.0 * cap);
    let neighbors: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            (i + 1..n)
                .filter(|&j| toroidal_distance_sq(cloud.point(i), cloud.point(j)) <= reach_sq)
                .map(|j| j as u32)
                .collect()
        })
        .collect();

    let mut simplices: Vec<Vec<u32>> = Vec::new();
    let mut births: Vec<f64> = Vec::new();
    for v in 0..n {
        simplices.push(vec![v as u32]);
        births.push(0.0);
    }

    struct Ctx<'a> {
        cloud: &'a PointCloud,
        neighbors: &'a [Vec<u32>],
        cap: f64,
        d: usize,
        max_dim: usize,
        limit: usize,
    }

    fn lifted(ctx: &Ctx, verts: &[u32]) -> Vec<[f64; MAX_DIM]> {
        let p0 = ctx.cloud.point(verts[0] as usize);
        verts
            .iter()
            .map(|&v| {
                let p = ctx.cloud.point(v as usize);
                let mut q = [0.0; MAX_DIM];
                for i in 0..ctx.d {
                    q[i] = p0[i] + wrapped_delta(p[i], p0[i]);
                }
                q
            })
            .collect()
    }

    fn extend(
        ctx: &Ctx,
        verts: &mut Vec<u32>,
        candidates: &[u32],
        simplices: &mut Vec<Vec<u32>>,
        births: &mut Vec<f64>,
    ) -> Result<()> {
        for (ci, &c) in candidates.iter().enumerate() {
            verts.push(c);
            let pts = lifted(ctx, verts);
            let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..ctx.d]).collect();
            let radius = minimal_enclosing_radius(&refs, ctx.d);
            if radius <= ctx.cap {
                if simplices.len() >= ctx.limit {
                    return Err(Error::Resource(format!(
                        "Čech complex exceeds {} simplices",
                        ctx.limit
                    )));
                }
                simplices.push(verts.clone());
                births.push(radius);
                if verts.len() <= ctx.max_dim {
                    let nbrs = &ctx.neighbors[c as usize];
                    let next: Vec<u32> = candidates[ci + 1..]
                        .iter()
                        .copied()
                        .filter(|x| nbrs.binary_search(x).is_ok())
                        .collect();
                    if !next.is_empty() {
                        extend(ctx, verts, &next, simplices, births)?;
                    }
                }
            }
            verts.pop();
        }
        Ok(())
    }

    let ctx = Ctx {
        cloud,
        neighbors: &neighbors,
        cap,
        d,
        max_dim,
        limit: opts.simplex_limit,
    };
    if max_dim >= 1 {
        for v in 0..n {
            let mut verts = vec![v as u32];
            extend(&ctx, &mut verts, &neighbors[v], &mut simplices, &mut births)?;
        }
    }

    let complex = SimplicialComplex::new(simplices.clone())?;
    let mut by_cell = vec![0.0; complex.len()];
    for (s, b) in simplices.iter().zip(&births) {
        by_cell[complex.cell_of(s).expect("simplex present")] = *b;
    }
    // Faces lifted from different base vertices can differ in the last ulp.
    let mut faces = Vec::new();
    for cell in 0..complex.len() {
        complex.faces(cell, &mut faces);
        let top = faces.iter().map(|&f| by_cell[f]).fold(by_cell[cell], f64::max);
        by_cell[cell] = top;
    }
    Filtration::new(
        Complex::Simplicial(complex),
        by_cell,
        TerminalShape::CechCap { cap },
        Provenance {
            kind: FiltrationKind::Cech,
            seed: cloud.seed(),
            fingerprint: cloud.fingerprint(),
            grid: None,
        },
    )
}
