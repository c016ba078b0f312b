//! Rotation numbers, small divisors and the twisted cohomological equation.

use fibred_flower::cohomology::{birkhoff_diagnostic, residual, solve_exact};
use fibred_flower::rotation::{diophantine_check, DiophantineParams, RotationNumber};
use fibred_flower::TrigPoly;

fn main() -> fibred_flower::Result<()> {
    let alpha = RotationNumber::golden_mean();
    println!("alpha = {:.16}", alpha.value());
    println!("convergents: {:?}", alpha.convergents(100));
    for n in [1, 2, 3, 5, 8, 13] {
        println!("|e^(2 pi i {n} alpha) - 1| = {:.6}", alpha.small_divisor(n)?.norm());
    }
    let dio = diophantine_check(&alpha, &DiophantineParams::new(0.3, 0.0)?, 1000)?;
    println!("empirical Diophantine constant {:.4} (worst n = {})", dio.empirical_constant, dio.worst_n);

    let g = &TrigPoly::sin() + &TrigPoly::cos().powi(2);
    let sol = solve_exact(&g, &alpha)?;
    println!("mean of g = {:.6}, ||c|| = {:.6}", sol.k.re, sol.c.strip_norm(0.0));
    println!("residual of c(theta + alpha) - c(theta) = -(g - mean g): {:.2e}", residual(&sol, &g, &alpha, 256));

    let b = birkhoff_diagnostic(&g, &alpha, 0.1, 100_000)?;
    println!("Birkhoff sums: max {:.4}, growth exponent {:.3}", b.max_abs_sum, b.growth_exponent);
    Ok(())
}
