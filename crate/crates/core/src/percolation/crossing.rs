//! Box-crossing probe on the unit cube without periodic identification.
//!
//! Two balls with centers in the cube overlap inside the cube whenever they
//! overlap at all (the midpoint of the centers lies in both), so the
//! components of `O_r ∩ [0,1]^d` are exactly the components of the graph
//! joining centers at distance at most `2r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spatial::{LocalIndex, Point};
use crate::error::{Error, Result};
use crate::persistence::UnionFind;
use crate::torus::{radius_from_lambda, sample_poisson, trial_seed, TorusSpec, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingOutcome {
    pub lambda: f64,
    pub n: f64,
    pub r: f64,
    pub seed: u64,
    /// Always true: the cube is not wrapped.
    pub box_mode: bool,
    pub points: usize,
    /// Components touching both faces in every direction.
    pub crossing_components: usize,
    pub exists_all_direction_crossing: bool,
    pub unique_crossing: bool,
    /// Largest Euclidean diameter of a component of the ball union other
    /// than the (largest) all-directions crossing one; 0 if there is none.
    pub second_component_diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingStats {
    pub d: usize,
    pub lambda: f64,
    pub n: f64,
    pub trials: usize,
    pub crossing_freq: f64,
    pub unique_freq: f64,
    pub median_second_diameter: f64,
    pub max_second_diameter: f64,
    pub outcomes: Vec<CrossingOutcome>,
}

pub fn crossing_trial(d: usize, lambda: f64, n: f64, seed: u64) -> Result<CrossingOutcome> {
    let torus = TorusSpec::new(d)?;
    let r = radius_from_lambda(n, lambda, d)?;
    let cloud = sample_poisson(torus, n, seed)?;
    let pts: Vec<Point> = cloud
        .points()
        .map(|p| {
            let mut q = [0.0; MAX_DIM];
            q[..d].copy_from_slice(p);
            q
        })
        .collect();
    let count = pts.len();
    let mut uf = UnionFind::new(count);
    if r > 0.0 {
        let mut hi = [0.0; MAX_DIM];
        hi[..d].fill(1.0);
        let index = LocalIndex::new(&pts, d, [0.0; MAX_DIM], hi, 2.0 * r);
        for (i, p) in pts.iter().enumerate() {
            index.visit_within(p, 2.0 * r, |j, _| {
                if (j as usize) > i {
                    uf.union(i as u32, j);
                }
                true
            });
        }
    }

    let full_mask = (1u32 << (2 * d)) - 1;
    let mut mask = vec![0u32; count];
    let mut size = vec![0usize; count];
    let roots: Vec<u32> = (0..count as u32).map(|i| uf.find(i)).collect();
    for (p, &root) in pts.iter().zip(&roots) {
        let root = root as usize;
        size[root] += 1;
        for i in 0..d {
            if p[i] <= r {
                mask[root] |= 1 << (2 * i);
            }
            if p[i] >= 1.0 - r {
                mask[root] |= 1 << (2 * i + 1);
            }
        }
    }
    let crossing: Vec<usize> = (0..count)
        .filter(|&c| size[c] > 0 && mask[c] == full_mask)
        .collect();
    let main = crossing.iter().copied().max_by_key(|&c| (size[c], std::cmp::Reverse(c)));

    let mut members: Vec<Vec<u32>> = vec![Vec::new(); count];
    for (i, &root) in roots.iter().enumerate() {
        if Some(root as usize) != main {
            members[root as usize].push(i as u32);
        }
    }
    let second = members
        .iter()
        .filter(|m| !m.is_empty())
        .map(|m| diameter(&pts, m, d) + 2.0 * r)
        .fold(0.0, f64::max);

    Ok(CrossingOutcome {
        lambda,
        n,
        r,
        seed,
        box_mode: true,
        points: count,
        crossing_components: crossing.len(),
        exists_all_direction_crossing: !crossing.is_empty(),
        unique_crossing: crossing.len() == 1,
        second_component_diameter: second,
    })
}

fn diameter(pts: &[Point], members: &[u32], d: usize) -> f64 {
    let mut best = 0.0f64;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            let (p, q) = (&pts[i as usize], &pts[j as usize]);
            best = best.max((0..d).map(|k| (p[k] - q[k]).powi(2)).sum::<f64>());
        }
    }
    best.sqrt()
}

pub fn crossing_probe(d: usize, lambda: f64, n: f64, trials: usize, seed: u64) -> Result<CrossingStats> {
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    let outcomes: Vec<CrossingOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|i| crossing_trial(d, lambda, n, trial_seed(seed, i)))
        .collect::<Result<_>>()?;
    let t = trials as f64;
    let mut diam: Vec<f64> = outcomes.iter().map(|o| o.second_component_diameter).collect();
    diam.sort_by(f64::total_cmp);
    let median = if trials % 2 == 1 {
        diam[trials / 2]
    } else {
        0.5 * (diam[trials / 2 - 1] + diam[trials / 2])
    };
    Ok(CrossingStats {
        d,
        lambda,
        n,
        trials,
        crossing_freq: outcomes.iter().filter(|o| o.exists_all_direction_crossing).count() as f64 / t,
        unique_freq: outcomes.iter().filter(|o| o.unique_crossing).count() as f64 / t,
        median_second_diameter: median,
        max_second_diameter: diam[trials - 1],
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_balls_no_crossing() {
        let s = crossing_probe(2, 0.0, 500.0, 10, 1).unwrap();
        assert_eq!(s.crossing_freq, 0.0);
        assert!(s.outcomes.iter().all(|o| !o.unique_crossing));
    }

    #[test]
    fn near_coverage_crosses() {
        // filling factor pi * 2 = 6.3, uncovered fraction under 0.2%
        let s = crossing_probe(2, 2.0, 2000.0, 20, 4).unwrap();
        assert_eq!(s.crossing_freq, 1.0);
        assert_eq!(s.unique_freq, 1.0);
        assert!(s.outcomes.iter().all(|o| !o.unique_crossing || o.exists_all_direction_crossing));
    }

    #[test]
    fn diameter_of_pair() {
        let pts = [[0.0, 0.0, 0.0, 0.0], [0.3, 0.4, 0.0, 0.0], [0.1, 0.1, 0.0, 0.0]];
        assert!((diameter(&pts, &[0, 1, 2], 2) - 0.5).abs() < 1e-12);
    }
}
