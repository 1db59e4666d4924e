//! One-arm probe: does the component of a fixed center reach the sphere of
//! radius `R` around it?
//!
//! The ball `B_R(c)` embeds in the torus for `R < 1/2`, so the event is
//! decided in a local chart holding every image of every point within
//! `R + r` of the center. A path from `c` to `∂B_R` can be cut at its first
//! exit, so exploration never needs to leave the ball: it only expands
//! through pieces lying strictly inside and succeeds on touching the sphere.
//! All radii of a profile are evaluated on the same realizations.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spatial::{LocalIndex, Point};
use crate::error::{Error, Result};
use crate::experiments::stats::{linear_fit, LinearFit};
use crate::torus::{radius_from_lambda, sample_poisson, trial_seed, wrapped_delta, TorusSpec, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Occupancy,
    Vacancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OneArmMode {
    /// Face-adjacent cells of a local grid of side about `r/4`; a cell is
    /// occupied when its center is covered.
    Grid,
    /// Exact connectivity of the union of balls.
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneArmParams {
    pub d: usize,
    pub lambda: f64,
    pub n: f64,
    pub trials: usize,
    pub seed: u64,
    pub phase: Phase,
    pub mode: OneArmMode,
    /// Grid cells per ball radius.
    pub refine: f64,
}

impl OneArmParams {
    pub fn new(d: usize, lambda: f64, n: f64, trials: usize, seed: u64) -> Self {
        Self {
            d,
            lambda,
            n,
            trials,
            seed,
            phase: Phase::Occupancy,
            mode: OneArmMode::Grid,
            refine: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneArmEstimate {
    pub lambda: f64,
    pub n: f64,
    pub r: f64,
    /// Probe radius `R`.
    pub radius: f64,
    pub trials: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub std_err: f64,
    pub phase: Phase,
    pub mode: OneArmMode,
}

pub fn one_arm_probe(params: &OneArmParams, radius: f64) -> Result<OneArmEstimate> {
    Ok(one_arm_profile(params, &[radius])?[0])
}

pub fn one_arm_profile(params: &OneArmParams, radii: &[f64]) -> Result<Vec<OneArmEstimate>> {
    let torus = TorusSpec::new(params.d)?;
    if radii.is_empty() {
        return Err(Error::param("no probe radii given"));
    }
    for &rad in radii {
        if !(rad > 0.0 && rad < 0.5) {
            return Err(Error::param(format!(
                "probe radius must lie in (0, 1/2) so the ball embeds in the torus, got {rad}"
            )));
        }
    }
    if params.trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    if params.mode == OneArmMode::Ball && params.phase == Phase::Vacancy {
        return Err(Error::param("the ball-graph mode only models the occupancy phase"));
    }
    if !(params.refine >= 1.0) {
        return Err(Error::param(format!("grid refinement must be >= 1, got {}", params.refine)));
    }
    let r = radius_from_lambda(params.n, params.lambda, params.d)?;
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    if params.mode == OneArmMode::Grid && r > 0.0 {
        let per_axis = 2.0 * (r_max * params.refine / r).ceil() + 3.0;
        let cells = per_axis.powi(params.d as i32);
        if cells > 2e8 {
            return Err(Error::Resource(format!(
                "one-arm grid would need {cells:.3e} cells; lower the refinement or the probe radius"
            )));
        }
    }

    let hits: Vec<Vec<bool>> = (0..params.trials as u64)
        .into_par_iter()
        .map(|i| {
            let cloud = sample_poisson(torus, params.n, trial_seed(params.seed, i))?;
            let local = LocalChart::new(&cloud, r, r_max);
            Ok(match params.mode {
                OneArmMode::Ball => radii.iter().map(|&rad| local.ball_reaches(rad)).collect(),
                OneArmMode::Grid => {
                    let mut grid = LocalGrid::new(&local, r / params.refine, r_max, params.phase);
                    radii.iter().map(|&rad| grid.reaches(&local, rad)).collect()
                }
            })
        })
        .collect::<Result<_>>()?;

    Ok(radii
        .iter()
        .enumerate()
        .map(|(j, &rad)| {
            let count = hits.iter().filter(|h| h[j]).count();
            let p = count as f64 / params.trials as f64;
            OneArmEstimate {
                lambda: params.lambda,
                n: params.n,
                r,
                radius: rad,
                trials: params.trials,
                hits: count,
                p_hat: p,
                std_err: (p * (1.0 - p) / params.trials as f64).sqrt(),
                phase: params.phase,
                mode: params.mode,
            }
        })
        .collect())
}

/// Least-squares fit of `log p_hat` against `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `None` when fewer than two radii have a positive estimate.
    pub fit: Option<LinearFit>,
    /// Radii whose estimate is zero; `log p_hat` is undefined there and they
    /// are left out of the fit.
    pub zero_radii: Vec<f64>,
}

impl DecayFit {
    /// Every radius entered the fit.
    pub fn complete(&self) -> bool {
        self.fit.is_some() && self.zero_radii.is_empty()
    }
}

pub fn decay_fit(estimates: &[OneArmEstimate]) -> DecayFit {
    let (pos, zero): (Vec<&OneArmEstimate>, Vec<&OneArmEstimate>) = estimates.iter().partition(|e| e.p_hat > 0.0);
    let x: Vec<f64> = pos.iter().map(|e| e.radius).collect();
    let y: Vec<f64> = pos.iter().map(|e| e.p_hat.ln()).collect();
    DecayFit {
        fit: linear_fit(&x, &y),
        zero_radii: zero.iter().map(|e| e.radius).collect(),
    }
}

/// Points lifted around the center `(1/2, ..., 1/2)`, which sits at the origin.
struct LocalChart {
    d: usize,
    r: f64,
    pts: Vec<Point>,
    index: LocalIndex,
}

impl LocalChart {
    fn new(cloud: &crate::torus::PointCloud, r: f64, r_max: f64) -> Self {
        let d = cloud.dim();
        let reach = r_max + r;
        let mut pts = Vec::new();
        let shifts = 3usize.pow(d as u32);
        for p in cloud.points() {
            let mut base = [0.0; MAX_DIM];
            for i in 0..d {
                base[i] = wrapped_delta(p[i], 0.5);
            }
            for s in 0..shifts {
                let mut q = base;
                let mut code = s;
                let mut inside = true;
                for qi in q.iter_mut().take(d) {
                    *qi += (code % 3) as f64 - 1.0;
                    code /= 3;
                    inside &= qi.abs() <= reach;
                }
                if inside {
                    pts.push(q);
                }
            }
        }
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        for i in 0..d {
            lo[i] = -reach;
            hi[i] = reach;
        }
        let index = LocalIndex::new(&pts, d, lo, hi, (2.0 * r).max(reach / 64.0));
        Self { d, r, pts, index }
    }

    fn norm(&self, q: &Point) -> f64 {
        q[..self.d].iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn ball_reaches(&self, rad: f64) -> bool {
        if self.r == 0.0 {
            return false;
        }
        let mut seen = vec![false; self.pts.len()];
        let mut queue = VecDeque::new();
        let origin = [0.0; MAX_DIM];
        let mut found = false;
        self.index.visit_within(&origin, self.r, |i, _| {
            seen[i as usize] = true;
            queue.push_back(i);
            true
        });
        while let Some(i) = queue.pop_front() {
            let p = self.pts[i as usize];
            if self.norm(&p) + self.r >= rad {
                found = true;
                break;
            }
            self.index.visit_within(&p, 2.0 * self.r, |j, _| {
                if !seen[j as usize] {
                    seen[j as usize] = true;
                    queue.push_back(j);
                }
                true
            });
        }
        found
    }
}

/// Lazily evaluated cubical grid centered on the origin.
struct LocalGrid {
    d: usize,
    h: f64,
    half: i64,
    side: usize,
    phase: Phase,
    /// 0 unknown, 1 in phase, 2 not in phase
    state: Vec<u8>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl LocalGrid {
    fn new(local: &LocalChart, h: f64, r_max: f64, phase: Phase) -> Self {
        let d = local.d;
        let h = if h > 0.0 { h } else { r_max / 64.0 };
        let half = (r_max / h).ceil() as i64 + 1;
        let side = (2 * half + 1) as usize;
        let total = side.pow(d as u32);
        Self {
            d,
            h,
            half,
            side,
            phase,
            state: vec![0; total],
            stamp: vec![0; total],
            epoch: 0,
        }
    }

    fn center(&self, cell: usize) -> Point {
        let mut c = [0.0; MAX_DIM];
        let mut rest = cell;
        for ci in c.iter_mut().take(self.d) {
            *ci = ((rest % self.side) as i64 - self.half) as f64 * self.h;
            rest /= self.side;
        }
        c
    }

    fn in_phase(&mut self, local: &LocalChart, cell: usize) -> bool {
        if self.state[cell] == 0 {
            let covered = local.r > 0.0 && local.index.any_within(&self.center(cell), local.r);
            let wanted = covered == (self.phase == Phase::Occupancy);
            self.state[cell] = if wanted { 1 } else { 2 };
        }
        self.state[cell] == 1
    }

    /// Largest distance from the origin to a point of the cell.
    fn far(&self, cell: usize) -> f64 {
        let c = self.center(cell);
        c[..self.d]
            .iter()
            .map(|x| (x.abs() + self.h / 2.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn reaches(&mut self, local: &LocalChart, rad: f64) -> bool {
        self.epoch += 1;
        let origin = (0..self.d).fold(0, |acc, _| acc * self.side + self.half as usize);
        if !self.in_phase(local, origin) {
            return false;
        }
        let mut queue = VecDeque::from([origin]);
        self.stamp[origin] = self.epoch;
        while let Some(cell) = queue.pop_front() {
            if self.far(cell) >= rad {
                return true;
            }
            let mut stride = 1;
            let mut rest = cell;
            for _ in 0..self.d {
                let c = rest % self.side;
                rest /= self.side;
                for (ok, next) in [(c > 0, cell.wrapping_sub(stride)), (c + 1 < self.side, cell + stride)] {
                    if ok && self.stamp[next] != self.epoch && self.in_phase(local, next) {
                        self.stamp[next] = self.epoch;
                        queue.push_back(next);
                    }
                }
                stride *= self.side;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_process_never_reaches() {
        let p = OneArmParams::new(2, 0.0, 4000.0, 20, 1);
        let e = one_arm_probe(&p, 0.1).unwrap();
        assert_eq!(e.p_hat, 0.0);
        let vac = OneArmParams {
            phase: Phase::Vacancy,
            ..OneArmParams::new(2, 0.0, 100.0, 5, 1)
        };
        assert_eq!(one_arm_probe(&vac, 0.1).unwrap().p_hat, 1.0);
    }

    #[test]
    fn radius_bounds() {
        let p = OneArmParams::new(2, 0.2, 1000.0, 5, 1);
        assert!(matches!(one_arm_probe(&p, 0.5), Err(Error::Parameter(_))));
        assert!(matches!(one_arm_probe(&p, 0.0), Err(Error::Parameter(_))));
        let ball_vac = OneArmParams {
            mode: OneArmMode::Ball,
            phase: Phase::Vacancy,
            ..p
        };
        assert!(one_arm_probe(&ball_vac, 0.1).is_err());
    }

    #[test]
    fn profile_is_monotone_per_realization() {
        for mode in [OneArmMode::Grid, OneArmMode::Ball] {
            let p = OneArmParams {
                mode,
                ..OneArmParams::new(2, 0.3, 2000.0, 40, 9)
            };
            let est = one_arm_profile(&p, &[0.01, 0.03, 0.06, 0.1]).unwrap();
            assert!(est.windows(2).all(|w| w[0].hits >= w[1].hits), "{mode:?}");
        }
    }
}
