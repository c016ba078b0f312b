//! Orbits converging in attracting petals, and the empirical petal check.

use fibred_flower::dynamics::{iterate_orbit, verify_petal, OrbitOptions, PetalOptions};
use fibred_flower::models;
use fibred_flower::reduction::{classify, ClassifyOptions};
use fibred_flower::rotation::RotationNumber;
use num_complex::Complex64;

fn main() -> fibred_flower::Result<()> {
    let f = models::sine_quadratic(RotationNumber::golden_mean(), 8)?;
    let c = classify(&f, &ClassifyOptions::default())?;
    let opts = OrbitOptions { max_steps: 20_000, record_every: 5000, ..OrbitOptions::default() };
    let trace = iterate_orbit(&f, 0.3, Complex64::new(-0.02, 0.0), &opts)?;
    for (j, theta, z) in &trace.iterates {
        println!("j = {j:>6}  theta = {theta:.4}  |z| = {:.3e}", z.norm());
    }

    let report = verify_petal(&f, &c, &PetalOptions { seeds_per_sector: 40, max_steps: 20_000, ..PetalOptions::default() })?;
    for s in &report.attracting {
        println!("sector {:.3}: worst |z_N| {:.2e}, |z_N| N^(1/n) {:.3}", s.direction.arg(), s.worst_final, s.median_rate_constant);
    }
    println!("membership {}/{}, exterior deviation {:.2e}", report.membership_held, report.membership_samples, report.exterior_deviation);
    Ok(())
}
