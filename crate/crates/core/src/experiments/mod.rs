//! Monte Carlo campaigns over many Poisson realizations.
//!
//! Each trial runs the full pipeline once and stores the essential birth
//! radii as intensities `lambda = n r^d`. Every event curve in `lambda` then
//! follows from the stored births without re-simulation.

mod analysis;
pub mod stats;

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analysis::{
    estimate_threshold, event_statistic, level_crossing, persistence_separation, prob_curves, scaling_fit,
    summary_csv, summary_rows, Curve, Event, ScalingFit, SeparationRow, SummaryRow, ThresholdEstimate,
    ThresholdOptions,
    SIGNAL_CAP,
};

use crate::error::{Error, Result};
use crate::filtration::{binomial, build_occupancy_filtration, build_vacancy_filtration, GridSpec};
use crate::percolation::{outcome_from_births, PercolationOutcome};
use crate::persistence::reduce;
use crate::torus::{lambda_from_radius, mix64, radius_from_lambda, sample_poisson, trial_seed, TorusSpec};

/// How the grid resolution is chosen for each rate `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase", deny_unknown_fields)]
pub enum GridRule {
    Fixed { m: usize },
    /// Resolve the radius belonging to `lambda_min`: `m = max(64, 4 ceil(1/r))`.
    Auto { lambda_min: f64 },
}

impl GridRule {
    pub fn grid_for(&self, n: f64, d: usize) -> Result<GridSpec> {
        match *self {
            GridRule::Fixed { m } => GridSpec::new(m),
            GridRule::Auto { lambda_min } => {
                if !(lambda_min > 0.0) {
                    return Err(Error::param(format!("lambda_min must be positive, got {lambda_min}")));
                }
                GridSpec::for_min_radius(radius_from_lambda(n, lambda_min, d)?)
            }
        }
    }
}

fn default_lambdas() -> Vec<f64> {
    (0..=200).map(|i| i as f64 / 200.0).collect()
}

fn default_budget() -> u64 {
    8192
}

/// A campaign. Also the schema of the TOML manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub d: usize,
    pub n: Vec<f64>,
    pub trials: usize,
    pub grid: GridRule,
    /// Reporting grid; thresholds outside its range are reported as missing.
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    pub seed: u64,
    /// Also reduce the vacancy filtration and store its essential births.
    #[serde(default)]
    pub vacancy: bool,
    #[serde(default = "default_budget")]
    pub memory_budget_mb: u64,
    /// JSON-lines results file; records are appended as trials finish.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(d: usize, n: Vec<f64>, trials: usize, grid: GridRule, seed: u64) -> Self {
        Self {
            d,
            n,
            trials,
            grid,
            lambdas: default_lambdas(),
            seed,
            vacancy: false,
            memory_budget_mb: default_budget(),
            output: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map_or(1, |s| text[..s.start.min(text.len())].lines().count().max(1));
            Error::parse(line, e.message().to_string())
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        TorusSpec::new(self.d)?;
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.n.is_empty() {
            return Err(Error::param("at least one rate n is required"));
        }
        if let Some(n) = self.n.iter().find(|&&n| !(n > 0.0 && n.is_finite())) {
            return Err(Error::param(format!("rates must be positive and finite, got {n}")));
        }
        if self.lambdas.is_empty() || self.lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param("lambda grid must be nonempty and strictly ascending"));
        }
        for &n in &self.n {
            self.grid.grid_for(n, self.d)?;
        }
        Ok(())
    }

    /// Rough peak memory of the concurrent trials, in bytes.
    pub fn memory_estimate(&self) -> Result<u128> {
        let mut worst = 0u128;
        for &n in &self.n {
            let g = self.grid.grid_for(n, self.d)?;
            worst = worst.max(g.total_cells(self.d));
        }
        let per_cell = if self.vacancy { 96 } else { 64 };
        let workers = rayon::current_num_threads().min(self.trials * self.n.len()) as u128;
        Ok(worst * per_cell * workers)
    }

    /// Seed of trial `index` at rate `n`.
    pub fn trial_seed(&self, n: f64, index: usize) -> u64 {
        trial_seed(self.seed ^ mix64(n.to_bits()), index as u64)
    }
}

/// Essential births of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub d: usize,
    pub n: f64,
    pub index: usize,
    pub seed: u64,
    pub m: usize,
    /// Per `k` in `0..=d`: the `C(d,k)` essential birth intensities, ascending.
    #[serde(with = "crate::floatrepr::nested")]
    pub births: Vec<Vec<f64>>,
    /// Per `k`: largest death/birth ratio among finite bars, 1 if there is none.
    pub noise: Vec<f64>,
    /// Per `k`: intensities at which the essential vacancy classes appear.
    #[serde(with = "crate::floatrepr::nested", default, skip_serializing_if = "Vec::is_empty")]
    pub vacancy_births: Vec<Vec<f64>>,
}

impl TrialRecord {
    /// Essential birth radii of degree `k`.
    pub fn birth_radii(&self, k: usize) -> Vec<f64> {
        self.births[k]
            .iter()
            .map(|&l| (l / self.n).powf(1.0 / self.d as f64))
            .collect()
    }

    /// Ranks and events at intensity `lambda`. Needs the vacancy births.
    pub fn outcome_at(&self, lambda: f64) -> Result<PercolationOutcome> {
        if self.vacancy_births.len() != self.d + 1 {
            return Err(Error::param(format!(
                "record {} was run without the vacancy filtration",
                self.index
            )));
        }
        let radii = |b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            b.iter()
                .map(|v| v.iter().map(|&l| (l / self.n).powf(1.0 / self.d as f64)).collect())
                .collect()
        };
        let r = radius_from_lambda(self.n, lambda, self.d)?;
        Ok(outcome_from_births(
            self.d,
            self.n,
            r,
            Some(self.m),
            self.seed,
            radii(&self.births),
            radii(&self.vacancy_births),
        ))
    }

    /// Count contract and positivity of the stored intensities.
    pub fn validate(&self) -> Result<()> {
        if self.births.len() != self.d + 1 || self.noise.len() != self.d + 1 {
            return Err(Error::contract(format!("record {} has the wrong number of degrees", self.index)));
        }
        for (k, b) in self.births.iter().enumerate() {
            if b.len() != binomial(self.d, k) {
                return Err(Error::contract(format!(
                    "record {} has {} essential {k}-births, expected {}",
                    self.index,
                    b.len(),
                    binomial(self.d, k)
                )));
            }
            if b.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::contract(format!(
                    "record {} has a non-positive or infinite {k}-birth",
                    self.index
                )));
            }
        }
        Ok(())
    }
}

/// Run one pipeline: sample, filter, reduce, record.
pub fn run_trial(d: usize, n: f64, grid: GridSpec, seed: u64, index: usize, vacancy: bool) -> Result<TrialRecord> {
    let cloud = sample_poisson(TorusSpec::new(d)?, n, seed)?;
    let occ = build_occupancy_filtration(&cloud, grid)?;
    let diag = reduce(&occ)?;
    let intensity = |r: f64| lambda_from_radius(n, r, d);
    let mut births = Vec::with_capacity(d + 1);
    let mut noise = Vec::with_capacity(d + 1);
    for k in 0..=d {
        births.push(diag.essential_births(k)?.into_iter().map(intensity).collect());
        noise.push(diag.max_finite_ratio(k).unwrap_or(1.0));
    }
    let mut vacancy_births = Vec::new();
    if vacancy {
        let vd = reduce(&build_vacancy_filtration(&occ)?)?;
        for k in 0..=d {
            let mut v: Vec<f64> = vd.essential_births(k)?.into_iter().map(|b| intensity(-b)).collect();
            v.sort_by(f64::total_cmp);
            vacancy_births.push(v);
        }
    }
    Ok(TrialRecord {
        d,
        n,
        index,
        seed,
        m: grid.cells_per_axis(),
        births,
        noise,
        vacancy_births,
    })
}

/// Parse a JSON-lines results file. Any unreadable line aborts with its
/// line number.
pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = std::fs::read_to_string(path)?;
    parse_records(&text)
}

pub fn parse_records(text: &str) -> Result<Vec<TrialRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<TrialRecord>(l)
                .map_err(|e| Error::parse(i + 1, format!("corrupt trial record: {e}")))
        })
        .collect()
}

pub fn records_to_jsonl(records: &[TrialRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

type Key = (u64, usize);

fn key(n: f64, index: usize) -> Key {
    (n.to_bits(), index)
}

/// Run every trial of the campaign and return the records sorted by
/// `(n, index)`. With an output file, finished records are appended as they
/// complete and a rerun only computes what is missing.
pub fn run_trials(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let need = spec.memory_estimate()?;
    let budget = spec.memory_budget_mb as u128 * (1 << 20);
    if need > budget {
        return Err(Error::Resource(format!(
            "campaign needs about {} MiB of grid memory, budget is {} MiB",
            need >> 20,
            spec.memory_budget_mb
        )));
    }

    let mut done: BTreeMap<Key, TrialRecord> = BTreeMap::new();
    if let Some(path) = &spec.output {
        if path.exists() {
            for rec in read_records(path)? {
                check_belongs(spec, &rec)?;
                done.insert(key(rec.n, rec.index), rec);
            }
        }
    }

    let mut todo = Vec::new();
    for &n in &spec.n {
        let grid = spec.grid.grid_for(n, spec.d)?;
        for index in 0..spec.trials {
            if !done.contains_key(&key(n, index)) {
                todo.push((n, index, grid));
            }
        }
    }

    let sink: Option<Mutex<BufWriter<File>>> = match &spec.output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let f = OpenOptions::new().create(true).append(true).open(path)?;
            Some(Mutex::new(BufWriter::new(f)))
        }
        None => None,
    };

    let fresh: Vec<TrialRecord> = todo
        .into_par_iter()
        .map(|(n, index, grid)| {
            let rec = run_trial(spec.d, n, grid, spec.trial_seed(n, index), index, spec.vacancy)?;
            if let Some(sink) = &sink {
                let line = serde_json::to_string(&rec)?;
                let mut w = sink.lock().expect("results writer poisoned");
                writeln!(w, "{line}")?;
                w.flush()?;
            }
            log::debug!("trial n={n} index={index} done");
            Ok(rec)
        })
        .collect::<Result<_>>()?;

    for rec in fresh {
        done.insert(key(rec.n, rec.index), rec);
    }
    let mut records: Vec<TrialRecord> = done.into_values().collect();
    records.sort_by(|a, b| a.n.total_cmp(&b.n).then(a.index.cmp(&b.index)));
    Ok(records)
}

fn check_belongs(spec: &ExperimentSpec, rec: &TrialRecord) -> Result<()> {
    let known_n = spec.n.iter().any(|&n| n.to_bits() == rec.n.to_bits());
    if rec.d != spec.d || !known_n || rec.index >= spec.trials || rec.seed != spec.trial_seed(rec.n, rec.index) {
        return Err(Error::contract(format!(
            "results file holds a record (n={}, index={}, seed={}) that does not belong to this campaign",
            rec.n, rec.index, rec.seed
        )));
    }
    Ok(())
}

/// Records grouped by rate, ascending in `n`.
pub fn group_by_n(records: &[TrialRecord]) -> Vec<(f64, Vec<&TrialRecord>)> {
    let mut groups: BTreeMap<u64, (f64, Vec<&TrialRecord>)> = BTreeMap::new();
    for r in records {
        groups.entry(r.n.to_bits()).or_insert_with(|| (r.n, Vec::new())).1.push(r);
    }
    let mut out: Vec<_> = groups.into_values().collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}
