//! Times one occupancy + vacancy reduction: `cargo run --release --example timing -- 3 96 500`.

use std::time::Instant;

use homperc::filtration::{build_occupancy_filtration, build_vacancy_filtration, GridSpec};
use homperc::persistence::reduce;
use homperc::torus::{sample_poisson, TorusSpec};

fn main() -> homperc::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("number")).collect();
    let (d, m, n) = (args[0] as usize, args[1] as usize, args[2]);
    let cloud = sample_poisson(TorusSpec::new(d)?, n, 1)?;
    let t = Instant::now();
    let occ = build_occupancy_filtration(&cloud, GridSpec::new(m)?)?;
    let built = t.elapsed();
    let do_ = reduce(&occ)?;
    let reduced = t.elapsed();
    let vac = build_vacancy_filtration(&occ)?;
    let dv = reduce(&vac)?;
    println!(
        "cells {}  build {:?}  reduce occ {:?}  total {:?}  bars {} {}",
        occ.len(),
        built,
        reduced - built,
        t.elapsed(),
        do_.all_bars().len(),
        dv.all_bars().len()
    );
    Ok(())
}
