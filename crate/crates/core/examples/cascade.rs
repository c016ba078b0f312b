//! The cylindrical cascade `Z -> Z + a(theta)` with `a = sin`.

use fibred_flower::dynamics::{cascade_simulate, CascadeOptions};
use fibred_flower::rotation::RotationNumber;
use fibred_flower::TrigPoly;
use num_complex::Complex64;

fn main() -> fibred_flower::Result<()> {
    let r = cascade_simulate(&TrigPoly::sin(), &RotationNumber::golden_mean(), 0.1, Complex64::new(0.0, 0.0), &CascadeOptions::default())?;
    println!("verdict {:?} after {} steps", r.verdict, r.steps);
    println!("sup |Z_j - Z_0| = {:.6}, bound {:.6}", r.sup_deviation, r.bound);
    println!("sup |W_j - W_0| = {:?}", r.conjugate_drift);
    println!("Birkhoff slope {:.3}, returns {}", r.birkhoff_slope, r.returns);
    Ok(())
}
