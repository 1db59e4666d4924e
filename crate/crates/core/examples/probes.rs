//! One-arm and crossing probes at the reference parameters.

use homperc::percolation::{crossing_probe, one_arm_profile, OneArmMode, OneArmParams};

fn main() -> homperc::Result<()> {
    let radii = [0.005, 0.05, 0.1, 0.15, 0.2, 0.25];
    for mode in [OneArmMode::Grid, OneArmMode::Ball] {
        let p = OneArmParams { mode, ..OneArmParams::new(2, 0.18, 4000.0, 2000, 7) };
        let t = std::time::Instant::now();
        for e in one_arm_profile(&p, &radii)? {
            println!("{mode:?} R={} hits={} p={:.5}", e.radius, e.hits, e.p_hat);
        }
        println!("{:?}", t.elapsed());
    }
    let t = std::time::Instant::now();
    let s = crossing_probe(2, 0.45, 4000.0, 500, 3)?;
    println!(
        "crossing {} unique {} median diam {} max {} ({:?})",
        s.crossing_freq, s.unique_freq, s.median_second_diameter, s.max_second_diameter, t.elapsed()
    );
    Ok(())
}
