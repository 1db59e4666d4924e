//! Acceptance run over the twelve release criteria, one verdict line each.
//!
//! Runs as a plain binary (no test harness) so the verdicts always reach the
//! terminal. Set `HOMPERC_ACCEPT=2,7` to run a subset.

use std::cell::OnceCell;
use std::io::Write;
use std::time::Instant;

use homperc::experiments::{
    estimate_threshold, event_statistic, persistence_separation, run_trials, scaling_fit, Event,
    ExperimentSpec, GridRule, ThresholdEstimate, ThresholdOptions, TrialRecord,
};
use homperc::filtration::{
    binomial, build_cech_filtration, build_occupancy_filtration, build_vacancy_filtration, Complex, GridSpec,
};
use homperc::percolation::{
    crossing_probe, decay_fit, duality_check, giant_ranks, one_arm_profile, OneArmParams, PercolationOutcome,
};
use homperc::persistence::{reduce, Diagram};
use homperc::torus::{radius_from_lambda, sample_poisson, trial_seed, wrapped_delta, PointCloud, TorusSpec};

const SEED: u64 = 7;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Campaigns shared between criteria, run on first use.
#[derive(Default)]
struct Shared {
    /// d=3, n=2000, m=96, 200 trials with vacancy births.
    d3: OnceCell<Vec<TrialRecord>>,
    /// d=2, n in {500, ..., 8000}, 200 trials each, grid resolving lambda=0.2.
    d2_scan: OnceCell<Vec<TrialRecord>>,
    /// Duality and complement verdicts are computed together.
    duality: OnceCell<(Verdict, Verdict)>,
}

impl Shared {
    fn d3(&self) -> &[TrialRecord] {
        self.d3.get_or_init(|| {
            let mut spec = ExperimentSpec::new(3, vec![2000.0], 200, GridRule::Fixed { m: 96 }, SEED);
            spec.vacancy = true;
            run_trials(&spec).expect("d=3 campaign")
        })
    }

    fn d2_scan(&self) -> &[TrialRecord] {
        self.d2_scan.get_or_init(|| {
            let n = vec![500.0, 1000.0, 2000.0, 4000.0, 8000.0];
            let spec = ExperimentSpec::new(2, n, 200, GridRule::Auto { lambda_min: 0.2 }, SEED);
            run_trials(&spec).expect("d=2 scaling campaign")
        })
    }

    fn duality(&self) -> &(Verdict, Verdict) {
        self.duality.get_or_init(|| duality_and_complement(self))
    }
}

fn at_rate(records: &[TrialRecord], n: f64) -> Vec<TrialRecord> {
    records.iter().filter(|r| r.n == n).cloned().collect()
}

fn threshold(records: &[TrialRecord], k: usize, event: Event) -> Result<ThresholdEstimate, homperc::Error> {
    let opts = ThresholdOptions {
        seed: SEED,
        ..ThresholdOptions::default()
    };
    estimate_threshold(records, k, event, &opts)
}

fn fmt_est(e: &ThresholdEstimate) -> String {
    match e.ci {
        Some((lo, hi)) => format!("{:.4} [{lo:.4}, {hi:.4}]", e.lambda_hat),
        None => format!("{:.4}", e.lambda_hat),
    }
}

fn torus_homology() -> Verdict {
    let mut failures = Vec::new();
    for (d, n) in [(2, 500.0), (3, 200.0)] {
        let torus = TorusSpec::new(d).unwrap();
        for i in 0..100 {
            let seed = trial_seed(SEED ^ 1, i);
            let cloud = sample_poisson(torus, n, seed).unwrap();
            let diag = reduce(&build_occupancy_filtration(&cloud, GridSpec::new(64).unwrap()).unwrap()).unwrap();
            let counts: Vec<usize> = (0..=d).map(|k| diag.essential_count(k)).collect();
            if (0..=d).any(|k| counts[k] != binomial(d, k)) {
                failures.push(format!("d={d} seed={seed} counts={counts:?}"));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!("{} failures over 200 clouds (d=2,3, m=64) {}", failures.len(), failures.join("; ")),
    )
}

struct DualityTally {
    realizations: usize,
    passing: usize,
    complement_failures: usize,
    log: Vec<String>,
}

impl DualityTally {
    fn new() -> Self {
        Self {
            realizations: 0,
            passing: 0,
            complement_failures: 0,
            log: Vec::new(),
        }
    }

    fn add(&mut self, label: &str, outcomes: &[PercolationOutcome]) {
        self.realizations += 1;
        let mut all = true;
        for o in outcomes {
            let rep = duality_check(o);
            if rep.all_pass() {
                if !rep.complement_holds() {
                    self.complement_failures += 1;
                    self.log.push(format!("{label} lambda={:.3}: A_k != not Ebar_(d-k)", o.lambda));
                }
            } else {
                all = false;
                self.log.push(format!(
                    "{label} lambda={:.3}: occ {:?} vac {:?}, nearest birth {:.3e} from r",
                    o.lambda, o.rank_occ, o.rank_vac, rep.tie_gap
                ));
            }
        }
        self.passing += all as usize;
    }

    fn fraction(&self) -> f64 {
        self.passing as f64 / self.realizations as f64
    }
}

fn duality_and_complement(shared: &Shared) -> (Verdict, Verdict) {
    let mut d2 = DualityTally::new();
    let (n, torus, grid) = (4000.0, TorusSpec::new(2).unwrap(), GridSpec::new(512).unwrap());
    for i in 0..200 {
        let seed = trial_seed(SEED ^ 2, i);
        let cloud = sample_poisson(torus, n, seed).unwrap();
        let occ = build_occupancy_filtration(&cloud, grid).unwrap();
        let vac = build_vacancy_filtration(&occ).unwrap();
        let (dg_occ, dg_vac) = (reduce(&occ).unwrap(), reduce(&vac).unwrap());
        let outcomes: Vec<PercolationOutcome> = [0.2, 0.36, 0.6]
            .iter()
            .map(|&l| giant_ranks(&dg_occ, &dg_vac, radius_from_lambda(n, l, 2).unwrap(), n).unwrap())
            .collect();
        d2.add(&format!("d=2 seed={seed}"), &outcomes);
    }

    let mut d3 = DualityTally::new();
    for rec in shared.d3() {
        let outcomes: Vec<PercolationOutcome> =
            [0.05, 0.1, 0.15].iter().map(|&l| rec.outcome_at(l).unwrap()).collect();
        d3.add(&format!("d=3 seed={}", rec.seed), &outcomes);
    }

    for line in d2.log.iter().chain(&d3.log) {
        eprintln!("  {line}");
    }
    let dual = verdict(
        d2.fraction() >= 0.99 && d3.fraction() >= 0.99,
        format!(
            "rank identity on {}/{} d=2 (m=512) and {}/{} d=3 (m=96) realizations",
            d2.passing, d2.realizations, d3.passing, d3.realizations
        ),
    );
    let comp_fail = d2.complement_failures + d3.complement_failures;
    let comp = verdict(
        comp_fail == 0,
        format!("{comp_fail} complement violations on realizations passing the rank identity"),
    );
    (dual, comp)
}

fn event_inclusions() -> Verdict {
    let spec = ExperimentSpec::new(3, vec![200.0], 500, GridRule::Fixed { m: 64 }, SEED ^ 4);
    let records = run_trials(&spec).unwrap();
    let lambdas: Vec<f64> = (0..=30).map(|i| 0.05 + 0.005 * i as f64).collect();
    let mut violations = 0;
    let mut active = [0usize; 2];
    for rec in &records {
        let stat = |k, ev| event_statistic(rec, k, ev);
        for &l in &lambdas {
            let holds = |k, ev| stat(k, ev) <= l;
            violations += (holds(2, Event::E) && !holds(1, Event::E)) as usize;
            violations += (holds(2, Event::A) && !holds(1, Event::A)) as usize;
            active[0] += holds(1, Event::E) as usize;
            active[1] += holds(2, Event::E) as usize;
        }
    }
    verdict(
        violations == 0,
        format!(
            "{violations} violations over 500 realizations x 31 intensities in [0.05, 0.2] (E_1 held {} times, E_2 {})",
            active[0], active[1]
        ),
    )
}

fn threshold_d2() -> Verdict {
    let spec = ExperimentSpec::new(2, vec![4000.0], 400, GridRule::Fixed { m: 512 }, SEED ^ 5);
    let records = run_trials(&spec).unwrap();
    match (threshold(&records, 1, Event::E), threshold(&records, 1, Event::A)) {
        (Ok(e), Ok(a)) => verdict(
            (0.33..=0.39).contains(&e.lambda_hat),
            format!("lambda_hat(E_1) = {} (target [0.33, 0.39]); A_1 at {}", fmt_est(&e), fmt_est(&a)),
        ),
        (e, a) => verdict(false, format!("no estimate: {e:?} {a:?}")),
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn sharpness(shared: &Shared) -> Verdict {
    let mut widths = Vec::new();
    let mut gaps = Vec::new();
    for n in [500.0, 1000.0, 2000.0, 4000.0] {
        let recs = at_rate(shared.d2_scan(), n);
        let (e, a) = (threshold(&recs, 1, Event::E).unwrap(), threshold(&recs, 1, Event::A).unwrap());
        widths.push(e.width);
        gaps.push((a.lambda_hat - e.lambda_hat).abs());
    }
    let show = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" > ");
    verdict(
        strictly_decreasing(&widths) && strictly_decreasing(&gaps),
        format!("E_1 width {}; |A_1 - E_1| {} (n = 500..4000)", show(&widths), show(&gaps)),
    )
}

/// `a` sits below `b`: disjoint intervals, or both endpoints ordered.
fn ordered(a: &ThresholdEstimate, b: &ThresholdEstimate) -> bool {
    match (a.ci, b.ci) {
        (Some((alo, ahi)), Some((blo, bhi))) => ahi < blo || (alo <= blo && ahi <= bhi),
        _ => false,
    }
}

fn ordering_d3(shared: &Shared) -> Verdict {
    let recs = shared.d3();
    let est = |k, ev| threshold(recs, k, ev).unwrap();
    let (e1, e2, a1, a2) = (est(1, Event::E), est(2, Event::E), est(1, Event::A), est(2, Event::A));
    let order = e1.lambda_hat <= e2.lambda_hat && a1.lambda_hat <= a2.lambda_hat && ordered(&e1, &e2) && ordered(&a1, &a2);
    let located = (0.07..=0.09).contains(&e1.lambda_hat);
    verdict(
        order && located,
        format!(
            "E_1 {} E_2 {} A_1 {} A_2 {}; ordering {}, E_1 in [0.07, 0.09] {}",
            fmt_est(&e1),
            fmt_est(&e2),
            fmt_est(&a1),
            fmt_est(&a2),
            if order { "holds" } else { "fails" },
            if located { "yes" } else { "no" }
        ),
    )
}

fn scaling(shared: &Shared) -> Verdict {
    let recs: Vec<TrialRecord> = shared.d2_scan().iter().filter(|r| r.n <= 4000.0).cloned().collect();
    let fit = scaling_fit(&recs, 1).unwrap();
    verdict(
        (fit.slope + 0.5).abs() <= 0.05,
        format!("slope {:.4} +- {:.4} (target -0.5 +- 0.05)", fit.slope, fit.std_err),
    )
}

fn one_arm() -> Verdict {
    let params = OneArmParams::new(2, 0.18, 4000.0, 2000, SEED ^ 9);
    let radii = [0.05, 0.1, 0.15, 0.2, 0.25];
    let est = one_arm_profile(&params, &radii).unwrap();
    let hits: Vec<String> = est.iter().map(|e| format!("{}:{}", e.radius, e.hits)).collect();
    let fit = decay_fit(&est);
    let shape = match &fit.fit {
        Some(f) => format!("slope {:.2}, R^2 {:.3}", f.slope, f.r_squared),
        None => "no fit".to_string(),
    };
    let pass = fit.complete() && fit.fit.as_ref().is_some_and(|f| f.slope < 0.0 && f.r_squared >= 0.9);
    verdict(
        pass,
        format!(
            "hits per R {}; {shape}; p_hat = 0 at R = {:?}",
            hits.join(" "),
            fit.zero_radii
        ),
    )
}

fn crossing() -> Verdict {
    let s = crossing_probe(2, 0.45, 4000.0, 500, SEED ^ 10).unwrap();
    verdict(
        s.unique_freq >= 0.95,
        format!(
            "crossing {:.3}, unique {:.3} (target 0.95); second component diameter median {:.3}",
            s.crossing_freq, s.unique_freq, s.median_second_diameter
        ),
    )
}

/// Radii at which the image of `H_1` of the Čech complex in `H_1(T^2)` gains
/// rank, from the winding of the graph cycles closed by its edges.
fn cech_giant_births(cloud: &PointCloud, cap: f64) -> Vec<f64> {
    let f = build_cech_filtration(cloud, cap).unwrap();
    let Complex::Simplicial(cx) = f.complex() else { unreachable!() };
    let n = cloud.len();
    let mut parent: Vec<usize> = (0..n).collect();
    // lift offset of each vertex relative to its parent
    let mut offset = vec![[0.0f64; 2]; n];
    fn find(x: usize, parent: &mut [usize], offset: &mut [[f64; 2]]) -> (usize, [f64; 2]) {
        if parent[x] == x {
            return (x, [0.0; 2]);
        }
        let (root, up) = find(parent[x], parent, offset);
        offset[x] = [offset[x][0] + up[0], offset[x][1] + up[1]];
        parent[x] = root;
        (root, offset[x])
    }
    let mut span: Vec<u8> = Vec::new();
    let mut births = Vec::new();
    for &cell in f.order() {
        let cell = cell as usize;
        if f.dim_of(cell) != 1 {
            continue;
        }
        let v = cx.vertices(cell);
        let (i, j) = (v[0] as usize, v[1] as usize);
        let (pi, pj) = (cloud.point(i), cloud.point(j));
        let delta = [wrapped_delta(pj[0], pi[0]), wrapped_delta(pj[1], pi[1])];
        let (ri, oi) = find(i, &mut parent, &mut offset);
        let (rj, oj) = find(j, &mut parent, &mut offset);
        if ri != rj {
            parent[rj] = ri;
            offset[rj] = [oi[0] + delta[0] - oj[0], oi[1] + delta[1] - oj[1]];
            continue;
        }
        let winding = [oi[0] + delta[0] - oj[0], oi[1] + delta[1] - oj[1]];
        let mut bits = 0u8;
        for (a, w) in winding.iter().enumerate() {
            if (w.round() as i64).rem_euclid(2) == 1 {
                bits |= 1 << a;
            }
        }
        for &b in &span {
            if bits ^ b < bits {
                bits ^= b;
            }
        }
        if bits != 0 {
            span.push(bits);
            span.sort_unstable_by(|a, b| b.cmp(a));
            births.push(f.birth_of(cell));
        }
    }
    births
}

fn endpoints(diag: &Diagram) -> Vec<f64> {
    diag.all_bars()
        .iter()
        .filter(|b| !b.is_trivial())
        .flat_map(|b| [b.birth, b.death])
        .filter(|x| x.is_finite())
        .collect()
}

/// Parts of `(0, cap)` farther than `gap` from every mark.
fn admissible(marks: &[f64], gap: f64, cap: f64) -> Vec<(f64, f64)> {
    let mut sorted = marks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut free = Vec::new();
    let mut lo = 0.0;
    for x in sorted {
        if x - gap > lo {
            free.push((lo, (x - gap).min(cap)));
        }
        lo = f64::max(lo, x + gap);
        if lo >= cap {
            break;
        }
    }
    if lo < cap {
        free.push((lo, cap));
    }
    free.retain(|(a, b)| b > a);
    free
}

fn oracle_equivalence() -> Verdict {
    use rand::{Rng, SeedableRng};
    let cap = 0.25;
    let grid = GridSpec::new(256).unwrap();
    let h = grid.cell_side();
    let torus = TorusSpec::new(2).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SEED ^ 11);
    let (mut birth_fail, mut betti_fail, mut radii_checked) = (Vec::new(), Vec::new(), 0);
    let mut worst = 0.0f64;
    let (mut index, mut trials, mut skipped) = (0, 0, 0);
    while trials < 50 {
        let cloud = loop {
            let c = sample_poisson(torus, 30.0, trial_seed(SEED ^ 11, index)).unwrap();
            index += 1;
            if (1..=50).contains(&c.len()) {
                break c;
            }
        };
        let cech = cech_giant_births(&cloud, cap);
        let cube_diag = reduce(&build_occupancy_filtration(&cloud, grid).unwrap()).unwrap();
        let cube = cube_diag.essential_births(1).unwrap();
        for (i, &b) in cube.iter().enumerate() {
            match cech.get(i) {
                Some(&c) => {
                    worst = worst.max((b - c).abs());
                    if (b - c).abs() > 2.0 * h {
                        birth_fail.push(format!("seed {}: cech {c:.5} cubical {b:.5}", cloud.seed()));
                    }
                }
                None if b < cap - 2.0 * h => {
                    birth_fail.push(format!("seed {}: cubical {b:.5}, no Čech class below the cap", cloud.seed()));
                }
                None => {}
            }
        }

        let cech_diag = reduce(&build_cech_filtration(&cloud, cap).unwrap()).unwrap();
        let marks: Vec<f64> = endpoints(&cech_diag).into_iter().chain(endpoints(&cube_diag)).collect();
        let free = admissible(&marks, h * 2f64.sqrt(), cap);
        let total: f64 = free.iter().map(|(a, b)| b - a).sum();
        if total <= 0.0 {
            skipped += 1;
            continue;
        }
        for _ in 0..20 {
            let mut u = rng.random_range(0.0..total);
            let mut r = free[free.len() - 1].1;
            for &(a, b) in &free {
                if u < b - a {
                    r = a + u;
                    break;
                }
                u -= b - a;
            }
            let a: Vec<usize> = (0..=2).map(|k| cech_diag.betti_at(r, k)).collect();
            let b: Vec<usize> = (0..=2).map(|k| cube_diag.betti_at(r, k)).collect();
            if a != b {
                betti_fail.push(format!("seed {} r={r:.4}: cech {a:?} cubical {b:?}", cloud.seed()));
            }
        }
        radii_checked += 20;
        trials += 1;
    }
    for line in birth_fail.iter().chain(&betti_fail) {
        eprintln!("  {line}");
    }
    verdict(
        birth_fail.is_empty() && betti_fail.is_empty() && radii_checked == 50 * 20,
        format!(
            "{trials} clouds ({skipped} redrawn, no admissible radius): {} giant births beyond 2h (worst gap {worst:.5}, 2h = {:.5}); Betti mismatches {}/{radii_checked} radii",
            birth_fail.len(),
            2.0 * h,
            betti_fail.len()
        ),
    )
}

fn separation(shared: &Shared) -> Verdict {
    let recs: Vec<TrialRecord> = shared
        .d2_scan()
        .iter()
        .filter(|r| [500.0, 2000.0, 8000.0].contains(&r.n))
        .cloned()
        .collect();
    let rows = persistence_separation(&recs, 1);
    let factors: Vec<f64> = rows.iter().map(|r| r.factor).collect();
    let detail = rows
        .iter()
        .map(|r| format!("n={}: {:.3}/{:.3} = {:.3}", r.n, r.median_signal, r.median_noise, r.factor))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(factors.windows(2).all(|w| w[1] > w[0]) && factors.len() == 3, detail)
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("HOMPERC_ACCEPT")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let shared = Shared::default();
    let copy = |v: &Verdict| verdict(v.pass, v.detail.clone());
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (1, "torus homology", Box::new(torus_homology)),
        (2, "duality", Box::new(|| copy(&shared.duality().0))),
        (3, "complementarity", Box::new(|| copy(&shared.duality().1))),
        (4, "event inclusions", Box::new(event_inclusions)),
        (5, "d=2 threshold", Box::new(threshold_d2)),
        (6, "sharpness", Box::new(|| sharpness(&shared))),
        (7, "d=3 ordering", Box::new(|| ordering_d3(&shared))),
        (8, "scaling", Box::new(|| scaling(&shared))),
        (9, "one-arm decay", Box::new(one_arm)),
        (10, "crossing uniqueness", Box::new(crossing)),
        (11, "oracle equivalence", Box::new(oracle_equivalence)),
        (12, "signal/noise separation", Box::new(|| separation(&shared))),
    ];

    let mut failed = Vec::new();
    let mut ran = 0;
    for (id, name, run) in &criteria {
        if only.as_ref().is_some_and(|o| !o.contains(id)) {
            continue;
        }
        let t = Instant::now();
        let v = run();
        ran += 1;
        if !v.pass {
            failed.push(*id);
        }
        println!(
            "criterion {id:>2} {:<4} {name}: {} ({:.0}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
        std::io::stdout().flush().ok();
    }
    println!("{}/{ran} criteria passed", ran - failed.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}

