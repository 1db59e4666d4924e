//! Event curves, threshold estimates, scaling and signal/noise summaries.
//!
//! For a record, `E_k` holds at intensity `lambda` iff its smallest
//! essential `k`-birth is at most `lambda`, and `A_k` iff its largest is.
//! The empirical curve `P(E_k)(lambda)` is therefore the empirical CDF of the
//! per-record minima, and the level crossing is a sample quantile of them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{bootstrap_interval, linear_fit, median, quantile_sorted};
use super::{group_by_n, TrialRecord};
use crate::error::{Error, Result};
use crate::torus::mix64;

/// Radius standing in for the death of an essential class in ratio
/// statistics; it matches the Čech validity cap.
pub const SIGNAL_CAP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Event {
    /// At least one giant cycle.
    E,
    /// All giant cycles.
    A,
}

impl std::fmt::Display for Event {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Event::E => "E",
            Event::A => "A",
        })
    }
}

/// Intensity at which `event` at degree `k` starts to hold for this record.
pub fn event_statistic(r: &TrialRecord, k: usize, event: Event) -> f64 {
    let b = &r.births[k];
    match event {
        Event::E => b.iter().copied().fold(f64::INFINITY, f64::min),
        Event::A => b.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub k: usize,
    pub event: Event,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
}

/// `P(E_k)` and `P(A_k)` on the grid `lambdas`.
pub fn prob_curves(records: &[TrialRecord], lambdas: &[f64], k: usize) -> Result<(Curve, Curve)> {
    if records.is_empty() {
        return Err(Error::param("no records"));
    }
    if let Some(r) = records.iter().find(|r| k >= r.births.len()) {
        return Err(Error::param(format!("degree {k} exceeds the dimension of record {}", r.index)));
    }
    let total = records.len() as f64;
    let curve = |event| {
        let stats: Vec<f64> = records.iter().map(|r| event_statistic(r, k, event)).collect();
        Curve {
            k,
            event,
            lambdas: lambdas.to_vec(),
            values: lambdas
                .iter()
                .map(|&l| stats.iter().filter(|&&s| s <= l).count() as f64 / total)
                .collect(),
        }
    };
    Ok((curve(Event::E), curve(Event::A)))
}

/// First crossing of `level` by a tabulated nondecreasing curve, linearly
/// interpolated between the bracketing grid points.
pub fn level_crossing(lambdas: &[f64], values: &[f64], level: f64) -> Result<f64> {
    for i in 0..lambdas.len() {
        if values[i] >= level {
            if i == 0 {
                return if values[0] == level {
                    Ok(lambdas[0])
                } else {
                    Err(Error::NoCrossing(format!(
                        "curve starts at {} above level {level}",
                        values[0]
                    )))
                };
            }
            let (x0, x1, y0, y1) = (lambdas[i - 1], lambdas[i], values[i - 1], values[i]);
            return Ok(x0 + (level - y0) / (y1 - y0) * (x1 - x0));
        }
    }
    Err(Error::NoCrossing(format!(
        "curve never reaches level {level} on [{}, {}]",
        lambdas.first().copied().unwrap_or(f64::NAN),
        lambdas.last().copied().unwrap_or(f64::NAN)
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub level: f64,
    pub bootstrap: usize,
    pub confidence: f64,
    pub seed: u64,
    /// Estimates outside this intensity range are rejected.
    pub range: (f64, f64),
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            level: 0.5,
            bootstrap: 1000,
            confidence: 0.95,
            seed: 0,
            range: (0.0, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub n: f64,
    pub k: usize,
    pub event: Event,
    pub level: f64,
    pub lambda_hat: f64,
    /// Bootstrap interval; `None` with a single record.
    pub ci: Option<(f64, f64)>,
    /// `lambda` at level 0.75 minus `lambda` at level 0.25.
    pub width: f64,
    pub trials: usize,
}

/// Level crossing of the empirical curve of `records` (all of one rate `n`).
/// The crossing interpolates linearly between the curve's jump points
/// (sample quantile, type 7).
pub fn estimate_threshold(
    records: &[TrialRecord],
    k: usize,
    event: Event,
    opts: &ThresholdOptions,
) -> Result<ThresholdEstimate> {
    let Some(first) = records.first() else {
        return Err(Error::param("no records"));
    };
    if records.iter().any(|r| r.n.to_bits() != first.n.to_bits()) {
        return Err(Error::param("threshold estimation needs records of a single rate n"));
    }
    if k >= first.births.len() {
        return Err(Error::param(format!("degree {k} exceeds the record dimension")));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::param(format!("level must lie in (0, 1), got {}", opts.level)));
    }
    let mut stats: Vec<f64> = records.iter().map(|r| event_statistic(r, k, event)).collect();
    stats.sort_by(f64::total_cmp);
    let lambda_hat = quantile_sorted(&stats, opts.level);
    let (lo, hi) = opts.range;
    if !(lambda_hat >= lo && lambda_hat <= hi) {
        return Err(Error::NoCrossing(format!(
            "{event}_{k} at n={}: level {} reached at {lambda_hat}, outside [{lo}, {hi}]",
            first.n, opts.level
        )));
    }
    let width = quantile_sorted(&stats, 0.75) - quantile_sorted(&stats, 0.25);
    let ci = if records.len() < 2 || opts.bootstrap == 0 {
        None
    } else {
        let salt = mix64(opts.seed ^ mix64(k as u64 * 2 + (event == Event::A) as u64) ^ first.n.to_bits());
        let mut rng = ChaCha8Rng::seed_from_u64(salt);
        let (a, b) = bootstrap_interval(&stats, opts.bootstrap, opts.confidence, &mut rng, |s| {
            s.sort_by(f64::total_cmp);
            quantile_sorted(s, opts.level)
        });
        Some((a.min(lambda_hat), b.max(lambda_hat)))
    };
    Ok(ThresholdEstimate {
        n: first.n,
        k,
        event,
        level: opts.level,
        lambda_hat,
        ci,
        width,
        trials: records.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub k: usize,
    pub slope: f64,
    pub std_err: f64,
    /// `(n, median essential k-birth radius)`.
    pub points: Vec<(f64, f64)>,
}

/// Slope of `log(median birth radius)` against `log n`; the pooled median
/// runs over every essential `k`-class of every record at that `n`.
pub fn scaling_fit(records: &[TrialRecord], k: usize) -> Result<ScalingFit> {
    let groups = group_by_n(records);
    if groups.len() < 3 {
        return Err(Error::param(format!(
            "scaling fit needs at least 3 distinct n values, got {}",
            groups.len()
        )));
    }
    let points: Vec<(f64, f64)> = groups
        .iter()
        .map(|(n, recs)| {
            let radii: Vec<f64> = recs.iter().flat_map(|r| r.birth_radii(k)).collect();
            (*n, median(&radii))
        })
        .collect();
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let fit = linear_fit(&x, &y).ok_or_else(|| Error::param("degenerate scaling data"))?;
    Ok(ScalingFit {
        k,
        slope: fit.slope,
        std_err: fit.slope_std_err,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub n: f64,
    pub median_signal: f64,
    pub median_noise: f64,
    pub factor: f64,
    /// Records without any finite bar (noise ratio taken as 1).
    pub no_noise: usize,
}

/// Signal ratio `SIGNAL_CAP / birth radius` over every essential class
/// against the per-record maximal noise ratio.
pub fn persistence_separation(records: &[TrialRecord], k: usize) -> Vec<SeparationRow> {
    group_by_n(records)
        .into_iter()
        .map(|(n, recs)| {
            let signal: Vec<f64> = recs
                .iter()
                .flat_map(|r| r.birth_radii(k))
                .map(|b| SIGNAL_CAP / b)
                .collect();
            let noise: Vec<f64> = recs.iter().map(|r| r.noise[k]).collect();
            let no_noise = noise.iter().filter(|&&x| x == 1.0).count();
            if no_noise > 0 {
                log::info!("n={n}: {no_noise} records without finite {k}-bars, noise ratio set to 1");
            }
            let (ms, mn) = (median(&signal), median(&noise));
            SeparationRow {
                n,
                median_signal: ms,
                median_noise: mn,
                factor: ms / mn,
                no_noise,
            }
        })
        .collect()
}

/// One row of the campaign summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: f64,
    pub k: usize,
    pub event: Event,
    pub estimate: Option<ThresholdEstimate>,
    pub note: String,
}

/// Threshold rows for every `(n, k, event)` with `1 <= k <= d-1`.
pub fn summary_rows(records: &[TrialRecord], opts: &ThresholdOptions) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for (n, recs) in group_by_n(records) {
        let owned: Vec<TrialRecord> = recs.into_iter().cloned().collect();
        let d = owned[0].d;
        for k in 1..d {
            for event in [Event::E, Event::A] {
                let (estimate, note) = match estimate_threshold(&owned, k, event, opts) {
                    Ok(e) if e.ci.is_none() => (Some(e), "insufficient for CI".to_string()),
                    Ok(e) => (Some(e), String::new()),
                    Err(Error::NoCrossing(msg)) => (None, msg),
                    Err(e) => return Err(e),
                };
                rows.push(SummaryRow {
                    n,
                    k,
                    event,
                    estimate,
                    note,
                });
            }
        }
    }
    Ok(rows)
}

/// CSV with header `n,k,event,lambda_hat,ci_low,ci_high,width,trials,note`.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("n,k,event,lambda_hat,ci_low,ci_high,width,trials,note\n");
    for row in rows {
        let (lh, lo, hi, w, t) = match &row.estimate {
            Some(e) => (
                e.lambda_hat.to_string(),
                e.ci.map_or(String::new(), |c| c.0.to_string()),
                e.ci.map_or(String::new(), |c| c.1.to_string()),
                e.width.to_string(),
                e.trials.to_string(),
            ),
            None => Default::default(),
        };
        let note = row.note.replace([',', '\n'], ";");
        s.push_str(&format!("{},{},{},{lh},{lo},{hi},{w},{t},{note}\n", row.n, row.k, row.event));
    }
    s
}
