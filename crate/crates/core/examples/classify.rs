//! Reduction of the two worked examples and a root-of-unity map.

use fibred_flower::models;
use fibred_flower::reduction::{classify, ClassifyOptions};
use fibred_flower::rotation::{RootOfUnity, RotationNumber};
use fibred_flower::{FibredJet, TrigPoly};

fn main() -> fibred_flower::Result<()> {
    let alpha = RotationNumber::golden_mean();
    let maps = [
        ("z + sin z^2 + ...", models::sine_quadratic(alpha.clone(), 8)?),
        ("z + sin z^2 + sin^2 z^3 + ...", models::three_petal(alpha.clone(), 8)?),
        ("twist", models::twisted_quadratic(alpha.clone(), 8)?),
    ];
    for (name, f) in &maps {
        let c = classify(f, &ClassifyOptions::default())?;
        println!("{name}: {:?}", c.verdict);
        for r in &c.trace.records {
            println!("  k = {}: mean {:.3e}, ||h|| {:?}", r.k, r.rhs_mean.norm(), r.h_norm);
        }
    }
    let minus = FibredJet::new(alpha, RootOfUnity::new(1, 2)?, 8, [(2, TrigPoly::constant(1.0))])?;
    let c = classify(&minus, &ClassifyOptions::default())?;
    println!("-z + z^2: F^2 gives {:?}, {:?}", c.verdict, c.root_of_unity);
    Ok(())
}
