//! Small campaigns printing threshold estimates: `pilot d n trials m`.

use homperc::experiments::{estimate_threshold, run_trials, Event, ExperimentSpec, GridRule, ThresholdOptions};

fn main() -> homperc::Result<()> {
    let a: Vec<String> = std::env::args().skip(1).collect();
    let d: usize = a[0].parse().unwrap();
    let n: f64 = a[1].parse().unwrap();
    let trials: usize = a[2].parse().unwrap();
    let m: usize = a[3].parse().unwrap();
    let t = std::time::Instant::now();
    let spec = ExperimentSpec::new(d, vec![n], trials, GridRule::Fixed { m }, 11);
    let recs = run_trials(&spec)?;
    println!("{:?} for {trials} trials", t.elapsed());
    for k in 1..d {
        for ev in [Event::E, Event::A] {
            let e = estimate_threshold(&recs, k, ev, &ThresholdOptions::default())?;
            println!("{ev}_{k}: {:.4} ci {:?} width {:.4}", e.lambda_hat, e.ci, e.width);
        }
    }
    Ok(())
}
