//! Homological percolation events read off persistence diagrams, plus the
//! one-arm and box-crossing probes.
//!
//! At radius `r` the rank of `H_k(O_r) -> H_k(T^d)` is the number of
//! essential occupancy `k`-bars born at or before `r`. The vacancy filtration
//! stores negated radii, so its essential `k`-bars count toward the vacancy
//! rank when their radius `-birth` exceeds `r`.

mod crossing;
mod onearm;
mod spatial;

use serde::{Deserialize, Serialize};

pub use crossing::{crossing_probe, crossing_trial, CrossingOutcome, CrossingStats};
pub use onearm::{decay_fit, one_arm_profile, one_arm_probe, DecayFit, OneArmEstimate, OneArmMode, OneArmParams, Phase};

use crate::error::{Error, Result};
use crate::filtration::{
    binomial, build_occupancy_filtration, build_vacancy_filtration, FiltrationKind, GridSpec, Provenance,
};
use crate::persistence::{reduce, Diagram};
use crate::torus::{lambda_from_radius, PointCloud};

/// Ranks and events of one realization at one radius. Vectors are indexed
/// by `k` in `0..=d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercolationOutcome {
    pub d: usize,
    pub n: f64,
    pub lambda: f64,
    pub r: f64,
    pub m: Option<usize>,
    pub seed: u64,
    pub rank_occ: Vec<usize>,
    pub rank_vac: Vec<usize>,
    pub e_occ: Vec<bool>,
    pub a_occ: Vec<bool>,
    pub e_vac: Vec<bool>,
    pub a_vac: Vec<bool>,
    /// Essential occupancy birth radii per `k`.
    #[serde(with = "crate::floatrepr::nested")]
    pub births_occ: Vec<Vec<f64>>,
    /// Radii at which the essential vacancy classes appear, per `k`.
    #[serde(with = "crate::floatrepr::nested")]
    pub births_vac: Vec<Vec<f64>>,
}

fn same_cloud(a: &Provenance, b: &Provenance) -> bool {
    a.seed == b.seed && a.fingerprint == b.fingerprint && a.grid == b.grid
}

/// Ranks of the inclusion maps at radius `r` for a cloud of rate `n`.
pub fn giant_ranks(diag_occ: &Diagram, diag_vac: &Diagram, r: f64, n: f64) -> Result<PercolationOutcome> {
    let (po, pv) = (diag_occ.provenance, diag_vac.provenance);
    if po.kind != FiltrationKind::Occupancy || pv.kind != FiltrationKind::Vacancy {
        return Err(Error::contract(format!(
            "expected an occupancy and a vacancy diagram, got {:?} and {:?}",
            po.kind, pv.kind
        )));
    }
    if !same_cloud(&po, &pv) {
        return Err(Error::contract(format!(
            "diagrams come from different clouds: seed {} / {}, fingerprint {:x} / {:x}, grid {:?} / {:?}",
            po.seed, pv.seed, po.fingerprint, pv.fingerprint, po.grid, pv.grid
        )));
    }
    if diag_occ.max_dim != diag_vac.max_dim {
        return Err(Error::contract("diagrams differ in dimension"));
    }
    if !(r >= 0.0) {
        return Err(Error::param(format!("radius must be nonnegative, got {r}")));
    }
    let d = diag_occ.max_dim;
    let mut occ = Vec::with_capacity(d + 1);
    let mut vac = Vec::with_capacity(d + 1);
    for k in 0..=d {
        occ.push(diag_occ.essential_births(k)?);
        vac.push(diag_vac.essential_births(k)?.iter().rev().map(|b| -b).collect());
    }
    Ok(outcome_from_births(d, n, r, po.grid, po.seed, occ, vac))
}

/// Ranks at `r` from ascending essential birth radii per `k`: occupancy
/// classes count once born, vacancy classes while their radius exceeds `r`.
pub(crate) fn outcome_from_births(
    d: usize,
    n: f64,
    r: f64,
    m: Option<usize>,
    seed: u64,
    births_occ: Vec<Vec<f64>>,
    births_vac: Vec<Vec<f64>>,
) -> PercolationOutcome {
    let mut out = PercolationOutcome {
        d,
        n,
        lambda: lambda_from_radius(n, r, d),
        r,
        m,
        seed,
        rank_occ: Vec::new(),
        rank_vac: Vec::new(),
        e_occ: Vec::new(),
        a_occ: Vec::new(),
        e_vac: Vec::new(),
        a_vac: Vec::new(),
        births_occ,
        births_vac,
    };
    for k in 0..=d {
        let full = binomial(d, k);
        let ro = out.births_occ[k].iter().filter(|&&b| b <= r).count();
        let rv = out.births_vac[k].iter().filter(|&&b| b > r).count();
        out.rank_occ.push(ro);
        out.rank_vac.push(rv);
        out.e_occ.push(ro > 0);
        out.a_occ.push(ro == full);
        out.e_vac.push(rv > 0);
        out.a_vac.push(rv == full);
    }
    out
}

/// Build both filtrations of `cloud` on the given grid, reduce, and read off
/// the ranks at `r`.
pub fn percolate(cloud: &PointCloud, r: f64, grid: GridSpec) -> Result<PercolationOutcome> {
    let occ = build_occupancy_filtration(cloud, grid)?;
    let vac = build_vacancy_filtration(&occ)?;
    let (d_occ, d_vac) = (reduce(&occ)?, reduce(&vac)?);
    giant_ranks(&d_occ, &d_vac, r, cloud.rate())
}

/// Result of the duality audit on one outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// `rank_occ(k) + rank_vac(d-k) == C(d,k)`, indexed by `k`.
    pub pass: Vec<bool>,
    /// `A_k == !Ē_{d-k}` for `1 <= k <= d-1`, indexed by `k` (entries 0 and `d` are `true`).
    pub complement: Vec<bool>,
    /// Distance from `r` to the nearest essential birth of either kind; small
    /// values flag radius-tie artifacts.
    pub tie_gap: f64,
}

impl DualityReport {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }

    pub fn complement_holds(&self) -> bool {
        self.complement.iter().all(|&p| p)
    }
}

pub fn duality_check(o: &PercolationOutcome) -> DualityReport {
    let d = o.d;
    let pass = (0..=d)
        .map(|k| o.rank_occ[k] + o.rank_vac[d - k] == binomial(d, k))
        .collect();
    let complement = (0..=d)
        .map(|k| k == 0 || k == d || o.a_occ[k] == !o.e_vac[d - k])
        .collect();
    let tie_gap = o
        .births_occ
        .iter()
        .chain(&o.births_vac)
        .flatten()
        .map(|b| (b - o.r).abs())
        .fold(f64::INFINITY, f64::min);
    DualityReport {
        pass,
        complement,
        tie_gap,
    }
}

/// `E_{k+1} => E_k` and `A_{k+1} => A_k` for `1 <= k <= d-2`. Returns the
/// list of violated `k`, empty on success.
pub fn monotonicity_check(o: &PercolationOutcome) -> Vec<usize> {
    (1..o.d.saturating_sub(1))
        .filter(|&k| (o.e_occ[k + 1] && !o.e_occ[k]) || (o.a_occ[k + 1] && !o.a_occ[k]))
        .collect()
}

/// One JSON object per line.
pub fn outcomes_to_jsonl(outcomes: &[PercolationOutcome]) -> Result<String> {
    let mut s = String::new();
    for o in outcomes {
        s.push_str(&serde_json::to_string(o)?);
        s.push('\n');
    }
    Ok(s)
}

/// Flat CSV: one row per outcome with per-`k` ranks, events and duality flags.
pub fn outcomes_to_csv(outcomes: &[PercolationOutcome]) -> String {
    let d = outcomes.first().map_or(0, |o| o.d);
    let mut s = String::from("d,n,lambda,r,m,seed");
    for k in 0..=d {
        for col in ["rank_occ", "rank_vac", "E", "A", "Ebar", "Abar", "duality"] {
            s.push_str(&format!(",{col}_{k}"));
        }
    }
    s.push_str(",inclusions\n");
    let b = |x: bool| if x { "1" } else { "0" };
    for o in outcomes {
        let rep = duality_check(o);
        s.push_str(&format!(
            "{},{},{},{},{},{}",
            o.d,
            o.n,
            o.lambda,
            o.r,
            o.m.map_or(String::new(), |m| m.to_string()),
            o.seed
        ));
        for k in 0..=o.d {
            s.push_str(&format!(
                ",{},{},{},{},{},{},{}",
                o.rank_occ[k],
                o.rank_vac[k],
                b(o.e_occ[k]),
                b(o.a_occ[k]),
                b(o.e_vac[k]),
                b(o.a_vac[k]),
                b(rep.pass[k])
            ));
        }
        s.push_str(&format!(",{}\n", b(monotonicity_check(o).is_empty())));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusSpec;

    fn outcome_at(cloud: &PointCloud, r: f64, m: usize) -> PercolationOutcome {
        percolate(cloud, r, GridSpec::new(m).unwrap()).unwrap()
    }

    #[test]
    fn empty_cloud() {
        for d in [2, 3] {
            let cloud = PointCloud::empty(TorusSpec::new(d).unwrap(), 0.0, 0);
            let o = outcome_at(&cloud, 0.3, 8);
            for k in 0..=d {
                assert_eq!(o.rank_occ[k], 0);
                assert_eq!(o.rank_vac[k], binomial(d, k));
            }
            assert!(duality_check(&o).all_pass());
            assert!(duality_check(&o).complement_holds());
            assert!(monotonicity_check(&o).is_empty());
        }
    }

    #[test]
    fn coverage_radius() {
        let t = TorusSpec::new(3).unwrap();
        let cloud = PointCloud::from_points(t, &[vec![0.1, 0.2, 0.3]], 1.0, 0).unwrap();
        let o = outcome_at(&cloud, 1.0, 8);
        for k in 0..=3 {
            assert_eq!(o.rank_occ[k], binomial(3, k));
            assert!(o.a_occ[k]);
        }
        assert!(duality_check(&o).all_pass());
    }

    #[test]
    fn single_point_leaves_two_vacancy_loops() {
        let t = TorusSpec::new(2).unwrap();
        let cloud = PointCloud::from_points(t, &[vec![0.5, 0.5]], 1.0, 0).unwrap();
        let o = outcome_at(&cloud, 0.2, 64);
        assert_eq!(o.rank_occ[1], 0);
        assert_eq!(o.rank_vac[1], 2);
        assert!(duality_check(&o).all_pass());
    }

    #[test]
    fn mismatched_clouds_are_rejected() {
        let t = TorusSpec::new(2).unwrap();
        let a = crate::torus::sample_poisson(t, 20.0, 1).unwrap();
        let b = crate::torus::sample_poisson(t, 20.0, 2).unwrap();
        let g = GridSpec::new(8).unwrap();
        let oa = build_occupancy_filtration(&a, g).unwrap();
        let ob = build_occupancy_filtration(&b, g).unwrap();
        let da = reduce(&oa).unwrap();
        let vb = reduce(&build_vacancy_filtration(&ob).unwrap()).unwrap();
        assert!(matches!(giant_ranks(&da, &vb, 0.1, 20.0), Err(Error::Contract(_))));
        assert!(matches!(giant_ranks(&da, &da, 0.1, 20.0), Err(Error::Contract(_))));
    }

    #[test]
    fn all_false_and_all_true_pass_inclusions() {
        let t = TorusSpec::new(3).unwrap();
        let cloud = PointCloud::empty(t, 0.0, 0);
        assert!(monotonicity_check(&outcome_at(&cloud, 0.1, 8)).is_empty());
        let mut o = outcome_at(&cloud, 0.1, 8);
        o.e_occ[2] = true;
        assert_eq!(monotonicity_check(&o), vec![1]);
    }

    #[test]
    fn csv_has_one_row_per_outcome() {
        let t = TorusSpec::new(2).unwrap();
        let cloud = crate::torus::sample_poisson(t, 30.0, 3).unwrap();
        let o = outcome_at(&cloud, 0.1, 16);
        let csv = outcomes_to_csv(&[o.clone(), o.clone()]);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("d,n,lambda,r,m,seed,rank_occ_0"));
        assert_eq!(outcomes_to_jsonl(&[o]).unwrap().lines().count(), 1);
    }
}
