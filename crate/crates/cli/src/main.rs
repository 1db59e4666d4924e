//! `homperc`: command-line front end for the sampling, persistence and
//! percolation pipeline. Every run writes `effective_config.toml` next to
//! its outputs; feeding that file back reproduces the run.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use homperc::experiments::{
    group_by_n, persistence_separation, prob_curves, read_records, records_to_jsonl, run_trials, scaling_fit,
    summary_csv, summary_rows, ExperimentSpec, GridRule, ThresholdOptions, TrialRecord,
};
use homperc::filtration::GridSpec;
use homperc::percolation::{
    crossing_probe, decay_fit, duality_check, monotonicity_check, one_arm_profile, outcomes_to_csv, percolate,
    DualityReport, OneArmMode, OneArmParams, PercolationOutcome, Phase,
};
use homperc::torus::{radius_from_lambda, sample_poisson, PointCloud, TorusSpec};
use homperc::{Error, Result};

#[derive(Parser)]
#[command(name = "homperc", version, about = "Giant cycles and homological percolation on the flat torus")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a Poisson point cloud on the torus.
    Sample(SampleArgs),
    /// Giant-cycle ranks and events of one realization at one intensity.
    Percolate(PercolateArgs),
    /// Monte Carlo campaign over many realizations, with summary tables.
    Sweep(SweepArgs),
    /// Tables for an existing results file.
    Report(ReportArgs),
    /// One-arm probabilities over a range of probe radii.
    Onearm(OneArmArgs),
    /// Box-crossing frequencies.
    Crossing(CrossingArgs),
}

#[derive(Args)]
struct OutArg {
    /// Output directory.
    #[arg(long, env = "HOMPERC_OUT", default_value = "homperc-out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CloudFormat {
    Csv,
    Json,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Poisson rate (expected point count).
    #[arg(long)]
    n: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: CloudFormat,
    #[command(flatten)]
    #[serde(skip)]
    out: OutArg,
}

#[derive(Args, Serialize)]
struct PercolateArgs {
    /// Point cloud file (.csv or .json); otherwise a cloud is drawn from
    /// --d, --n and --seed.
    #[arg(long)]
    cloud: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Rate; required without --cloud, and used as the rate of a CSV cloud.
    #[arg(long)]
    n: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Intensity `n r^d` at which the events are read off.
    #[arg(long)]
    lambda: f64,
    /// Grid cells per axis.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long, default_value_t = 8192)]
    memory_budget_mb: u64,
    #[command(flatten)]
    #[serde(skip)]
    out: OutArg,
}

/// `512` for a fixed grid, `auto:0.25` to resolve the radius at that
/// intensity (`auto` alone means `auto:0.25`).
#[derive(Clone, Copy)]
struct GridArg(GridRule);

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(rest) = s.strip_prefix("auto") {
            let lambda_min = match rest.strip_prefix(':') {
                Some(v) => v.parse::<f64>().map_err(|e| format!("bad lambda_min {v:?}: {e}"))?,
                None if rest.is_empty() => 0.25,
                None => return Err(format!("bad grid rule {s:?}")),
            };
            return Ok(GridArg(GridRule::Auto { lambda_min }));
        }
        s.parse::<usize>()
            .map(|m| GridArg(GridRule::Fixed { m }))
            .map_err(|_| format!("grid must be a cell count or auto[:lambda_min], got {s:?}"))
    }
}

#[derive(Args)]
struct SweepArgs {
    /// TOML campaign manifest; flags override its values.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    /// Rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    grid: Option<GridArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also reduce the vacancy filtration.
    #[arg(long)]
    vacancy: bool,
    #[arg(long)]
    memory_budget_mb: Option<u64>,
    /// Bootstrap resamples for the threshold intervals.
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    /// Output directory; without it a manifest `output` path is honoured.
    #[arg(long, env = "HOMPERC_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ReportArgs {
    /// JSON-lines results file; defaults to records.jsonl in the output directory.
    #[arg(long)]
    records: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    level: f64,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PhaseArg {
    Occupancy,
    Vacancy,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Grid,
    Ball,
}

#[derive(Args, Serialize)]
struct OneArmArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    n: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probe radii, comma separated, each in (0, 1/2).
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15,0.2,0.25")]
    radii: Vec<f64>,
    #[arg(long, value_enum, default_value = "occupancy")]
    phase: PhaseArg,
    #[arg(long, value_enum, default_value = "grid")]
    mode: ModeArg,
    /// Grid cells per ball radius in grid mode.
    #[arg(long, default_value_t = 4.0)]
    refine: f64,
    #[command(flatten)]
    #[serde(skip)]
    out: OutArg,
}

#[derive(Args, Serialize)]
struct CrossingArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    n: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    out: OutArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("homperc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let workers = match cli.workers {
        Some(0) => return Err(Error::Parameter("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;

    match cli.command {
        Command::Sample(a) => sample(&a, workers),
        Command::Percolate(a) => percolate_cmd(&a, workers),
        Command::Sweep(a) => sweep(&a, workers),
        Command::Report(a) => report_cmd(&a, workers),
        Command::Onearm(a) => onearm(&a, workers),
        Command::Crossing(a) => crossing(&a, workers),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|()| fs::write(&path, contents))
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn echo_config<T: Serialize>(dir: &Path, command: &str, workers: usize, params: &T) -> Result<()> {
    let body = toml::to_string(params).map_err(|e| Error::Contract(format!("config echo: {e}")))?;
    write_file(
        dir,
        "effective_config.toml",
        &format!("command = \"{command}\"\nworkers = {workers}\n{body}"),
    )?;
    Ok(())
}

fn sample(a: &SampleArgs, workers: usize) -> Result<()> {
    let cloud = sample_poisson(TorusSpec::new(a.d)?, a.n, a.seed)?;
    echo_config(&a.out.out, "sample", workers, a)?;
    match a.format {
        CloudFormat::Csv => write_file(&a.out.out, "cloud.csv", &cloud.to_csv())?,
        CloudFormat::Json => write_file(&a.out.out, "cloud.json", &cloud.to_json())?,
    };
    println!("{} points", cloud.len());
    Ok(())
}

fn load_cloud(path: &Path, rate: Option<f64>, seed: u64) -> Result<PointCloud> {
    let text = fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        PointCloud::from_json(&text)
    } else {
        PointCloud::from_csv(&text, rate, seed)
    }
}

#[derive(Serialize)]
struct PercolateReport {
    #[serde(flatten)]
    outcome: PercolationOutcome,
    duality: DualityReport,
    inclusion_violations: Vec<usize>,
}

fn percolate_cmd(a: &PercolateArgs, workers: usize) -> Result<()> {
    let cloud = match &a.cloud {
        Some(path) => load_cloud(path, a.n, a.seed)?,
        None => {
            let n = a
                .n
                .ok_or_else(|| Error::Parameter("--n is required without --cloud".into()))?;
            sample_poisson(TorusSpec::new(a.d)?, n, a.seed)?
        }
    };
    let d = cloud.dim();
    let grid = GridSpec::new(a.grid)?;
    let need = grid.total_cells(d) * 96;
    let budget = a.memory_budget_mb as u128 * (1 << 20);
    if need > budget {
        return Err(Error::Resource(format!(
            "grid {}^{d} needs about {} MiB, budget is {} MiB",
            a.grid,
            need >> 20,
            a.memory_budget_mb
        )));
    }
    let r = radius_from_lambda(cloud.rate(), a.lambda, d)?;
    let outcome = percolate(&cloud, r, grid)?;
    let report = PercolateReport {
        duality: duality_check(&outcome),
        inclusion_violations: monotonicity_check(&outcome),
        outcome,
    };
    if !report.duality.all_pass() {
        log::warn!("duality check failed, nearest birth is {} from r", report.duality.tie_gap);
    }
    echo_config(&a.out.out, "percolate", workers, a)?;
    write_file(&a.out.out, "outcome.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
    write_file(&a.out.out, "outcome.csv", &outcomes_to_csv(std::slice::from_ref(&report.outcome)))?;
    let o = &report.outcome;
    println!(
        "r={} rank_occ={:?} rank_vac={:?} duality={}",
        o.r,
        o.rank_occ,
        o.rank_vac,
        if report.duality.all_pass() { "pass" } else { "FAIL" }
    );
    Ok(())
}

fn sweep(a: &SweepArgs, workers: usize) -> Result<()> {
    let mut spec = match &a.manifest {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            ExperimentSpec::from_toml(&text)?
        }
        None => {
            let missing = |flag: &str| Error::Parameter(format!("{flag} is required without --manifest"));
            ExperimentSpec::new(
                a.d.ok_or_else(|| missing("--d"))?,
                a.n.clone().ok_or_else(|| missing("--n"))?,
                a.trials.ok_or_else(|| missing("--trials"))?,
                a.grid.ok_or_else(|| missing("--grid"))?.0,
                a.seed.unwrap_or(0),
            )
        }
    };
    if let Some(d) = a.d {
        spec.d = d;
    }
    if let Some(n) = &a.n {
        spec.n = n.clone();
    }
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if let Some(g) = a.grid {
        spec.grid = g.0;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if a.vacancy {
        spec.vacancy = true;
    }
    if let Some(b) = a.memory_budget_mb {
        spec.memory_budget_mb = b;
    }
    let dir = match (&a.out, &spec.output) {
        (Some(dir), _) => {
            spec.output = Some(dir.join("records.jsonl"));
            dir.clone()
        }
        (None, Some(path)) => path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
        (None, None) => {
            let dir = PathBuf::from("homperc-out");
            spec.output = Some(dir.join("records.jsonl"));
            dir
        }
    };
    spec.validate()?;
    write_file(&dir, "effective_config.toml", &spec.to_toml())?;

    let records = run_trials(&spec)?;
    let lo = spec.lambdas.first().copied().unwrap_or(0.0);
    let hi = spec.lambdas.last().copied().unwrap_or(f64::INFINITY);
    let opts = ThresholdOptions {
        bootstrap: a.bootstrap,
        seed: spec.seed,
        range: (lo, hi),
        ..ThresholdOptions::default()
    };
    log::info!("{} records, {} workers", records.len(), workers);
    write_tables(&dir, &records, &spec.lambdas, &opts)
}

fn report_cmd(a: &ReportArgs, workers: usize) -> Result<()> {
    let path = a.records.clone().unwrap_or_else(|| a.out.out.join("records.jsonl"));
    let records = read_records(&path)?;
    if records.is_empty() {
        return Err(Error::Parameter(format!("{} holds no records", path.display())));
    }
    echo_config(&a.out.out, "report", workers, a)?;
    let opts = ThresholdOptions {
        level: a.level,
        bootstrap: a.bootstrap,
        confidence: a.confidence,
        seed: a.seed,
        ..ThresholdOptions::default()
    };
    let lambdas: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    write_tables(&a.out.out, &records, &lambdas, &opts)
}

/// summary.csv, curves.csv, separation.csv and, with three or more rates,
/// scaling.json.
fn write_tables(dir: &Path, records: &[TrialRecord], lambdas: &[f64], opts: &ThresholdOptions) -> Result<()> {
    let d = records.first().map_or(0, |r| r.d);
    let rows = summary_rows(records, opts)?;
    let summary = summary_csv(&rows);
    write_file(dir, "summary.csv", &summary)?;
    print!("{summary}");

    let mut curves = String::from("n,k,lambda,p_e,p_a\n");
    for (n, recs) in group_by_n(records) {
        let owned: Vec<TrialRecord> = recs.into_iter().cloned().collect();
        for k in 1..d {
            let (e, a) = prob_curves(&owned, lambdas, k)?;
            for (i, l) in lambdas.iter().enumerate() {
                curves.push_str(&format!("{n},{k},{l},{},{}\n", e.values[i], a.values[i]));
            }
        }
    }
    write_file(dir, "curves.csv", &curves)?;

    let mut sep = String::from("n,k,median_signal,median_noise,factor,no_noise\n");
    for k in 1..d {
        for row in persistence_separation(records, k) {
            sep.push_str(&format!(
                "{},{k},{},{},{},{}\n",
                row.n, row.median_signal, row.median_noise, row.factor, row.no_noise
            ));
        }
    }
    write_file(dir, "separation.csv", &sep)?;

    if group_by_n(records).len() >= 3 {
        let fits = (1..d).map(|k| scaling_fit(records, k)).collect::<Result<Vec<_>>>()?;
        write_file(dir, "scaling.json", &(serde_json::to_string_pretty(&fits)? + "\n"))?;
    }
    // Sorted copy of the records next to the tables, for a self-contained directory.
    if !dir.join("records.jsonl").exists() {
        write_file(dir, "records.jsonl", &records_to_jsonl(records))?;
    }
    Ok(())
}

fn onearm(a: &OneArmArgs, workers: usize) -> Result<()> {
    let mut params = OneArmParams::new(a.d, a.lambda, a.n, a.trials, a.seed);
    params.phase = match a.phase {
        PhaseArg::Occupancy => Phase::Occupancy,
        PhaseArg::Vacancy => Phase::Vacancy,
    };
    params.mode = match a.mode {
        ModeArg::Grid => OneArmMode::Grid,
        ModeArg::Ball => OneArmMode::Ball,
    };
    params.refine = a.refine;
    let estimates = one_arm_profile(&params, &a.radii)?;
    echo_config(&a.out.out, "onearm", workers, a)?;
    let mut csv = String::from("radius,trials,hits,p_hat,std_err\n");
    for e in &estimates {
        csv.push_str(&format!("{},{},{},{},{}\n", e.radius, e.trials, e.hits, e.p_hat, e.std_err));
    }
    write_file(&a.out.out, "onearm.csv", &csv)?;
    let fit = decay_fit(&estimates);
    write_file(&a.out.out, "onearm_fit.json", &(serde_json::to_string_pretty(&fit)? + "\n"))?;
    print!("{csv}");
    match &fit.fit {
        Some(f) => println!("log p_hat slope {} r^2 {}", f.slope, f.r_squared),
        None => println!("log p_hat fit undefined"),
    }
    if !fit.zero_radii.is_empty() {
        println!("p_hat = 0 at R = {:?}", fit.zero_radii);
    }
    Ok(())
}

#[derive(Serialize)]
struct CrossingSummary {
    d: usize,
    lambda: f64,
    n: f64,
    trials: usize,
    crossing_freq: f64,
    unique_freq: f64,
    median_second_diameter: f64,
    max_second_diameter: f64,
}

fn crossing(a: &CrossingArgs, workers: usize) -> Result<()> {
    let stats = crossing_probe(a.d, a.lambda, a.n, a.trials, a.seed)?;
    echo_config(&a.out.out, "crossing", workers, a)?;
    let mut csv = String::from("seed,r,points,crossing_components,crossing,unique,second_diameter\n");
    for o in &stats.outcomes {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            o.seed,
            o.r,
            o.points,
            o.crossing_components,
            o.exists_all_direction_crossing as u8,
            o.unique_crossing as u8,
            o.second_component_diameter
        ));
    }
    write_file(&a.out.out, "crossing.csv", &csv)?;
    let summary = CrossingSummary {
        d: stats.d,
        lambda: stats.lambda,
        n: stats.n,
        trials: stats.trials,
        crossing_freq: stats.crossing_freq,
        unique_freq: stats.unique_freq,
        median_second_diameter: stats.median_second_diameter,
        max_second_diameter: stats.max_second_diameter,
    };
    let json = serde_json::to_string_pretty(&summary)? + "\n";
    write_file(&a.out.out, "crossing_summary.json", &json)?;
    print!("{json}");
    Ok(())
}
