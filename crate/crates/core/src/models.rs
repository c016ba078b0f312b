//! Reference maps used throughout the examples, tests and CLI.

use num_complex::Complex64;

use crate::cohomology::solve_exact;
use crate::error::Result;
use crate::fibredjet::FibredJet;
use crate::rotation::{RootOfUnity, RotationNumber};
use crate::trigpoly::TrigPoly;

/// `z + sin(2 pi theta) z^2`: two petals after the order-2 reduction.
pub fn sine_quadratic(alpha: RotationNumber, truncation: usize) -> Result<FibredJet> {
    FibredJet::new(alpha, RootOfUnity::ONE, truncation, [(2, TrigPoly::sin())])
}

/// `z + sin z^2 + sin^2 z^3 + cos^2 z^4`: three petals.
pub fn three_petal(alpha: RotationNumber, truncation: usize) -> Result<FibredJet> {
    let s = TrigPoly::sin();
    let c = TrigPoly::cos();
    FibredJet::new(
        alpha,
        RootOfUnity::ONE,
        truncation,
        [(2, s.clone()), (3, s.mul(&s)), (4, c.mul(&c))],
    )
}

/// `z + e^{2 pi i (theta - alpha)} z^2`, the twisted quadratic polynomial. Every mean vanishes.
pub fn twisted_quadratic(alpha: RotationNumber, truncation: usize) -> Result<FibredJet> {
    let a2 = TrigPoly::mode(1).scale(alpha.phase(-1));
    FibredJet::new(alpha, RootOfUnity::ONE, truncation, [(2, a2)])
}

/// Quadratic leading term `a_2 = sin(2 pi theta) + sin(4 pi theta)` used by [`rotation_dependent`].
pub fn rotation_dependent_a2() -> TrigPoly {
    TrigPoly::sin() + TrigPoly::sin_k(2)
}

/// Degree-5 map whose petal count depends on the base rotation.
///
/// `a_2` has zero mean and `a_3 = mean(a_2^2)`, so the order-2 and order-3 reductions go through
/// for every `alpha`. The constant `a_4` makes the `z^4` mean vanish at `alpha_star` (four petals
/// there, with `z^5` mean equal to `target5`); at a generic rotation the `z^4` mean is nonzero and
/// the map has three petals.
pub fn rotation_dependent(
    alpha: RotationNumber,
    alpha_star: &RotationNumber,
    target5: Complex64,
    truncation: usize,
) -> Result<FibredJet> {
    let (a4, a5) = rotation_dependent_constants(alpha_star, target5)?;
    let a2 = rotation_dependent_a2();
    let a3 = TrigPoly::constant(a2.mul(&a2).mean());
    FibredJet::new(
        alpha,
        RootOfUnity::ONE,
        truncation.max(5),
        [
            (2, a2),
            (3, a3),
            (4, TrigPoly::constant(a4)),
            (5, TrigPoly::constant(a5)),
        ],
    )
}

/// Constants `(a_4, a_5)` of [`rotation_dependent`], from the closed-form order-2 and order-3
/// reduction tables evaluated at `alpha_star`.
pub fn rotation_dependent_constants(alpha_star: &RotationNumber, target5: Complex64) -> Result<(Complex64, Complex64)> {
    let a2 = rotation_dependent_a2();
    let a3 = TrigPoly::constant(a2.mul(&a2).mean());
    let c2 = solve_exact(&a2, alpha_star)?.c;
    let b1 = &a2.mul(&a2) - &a3;
    // b_2 and b_3 with a_4 = a_5 = 0
    let b2 = &a2.powi(3) - &a2.mul(&a3).scale(2.0);
    let b3 = &(&a3.mul(&a3) - &a2.mul(&a2).mul(&a3).scale(3.0)) + &a2.powi(4);
    let a4 = -(&b1.mul(&c2) + &b2).mean();
    let b2 = &b2 + &TrigPoly::constant(a4);
    let b3 = &b3 + &a2.scale(2.0 * a4);
    let d1 = b1.clone();
    let d3 = &(&b1.mul(&c2).mul(&c2) + &b2.mul(&c2).scale(2.0)) + &b3;
    let h3 = solve_exact(&d1, alpha_star)?.c;
    // z^5 coefficient -3 d_1 h_3 + d_1^2 - d_3, where d_3 carries -a_5
    let rest = &(&d1.mul(&d1) - &d1.mul(&h3).scale(3.0)) - &d3;
    let a5 = target5 - rest.mean();
    Ok((a4, a5))
}

/// Parabolic scalar germ `z + z^2` viewed as a fibred map.
pub fn scalar_quadratic(alpha: RotationNumber, truncation: usize) -> Result<FibredJet> {
    FibredJet::new(alpha, RootOfUnity::ONE, truncation, [(2, TrigPoly::constant(1.0))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{classify, ClassifyOptions};

    #[test]
    fn rotation_dependent_petal_counts() {
        let star = RotationNumber::golden_mean();
        let f = rotation_dependent(star.clone(), &star, Complex64::new(1.0, 0.0), 8).unwrap();
        let c = classify(&f, &ClassifyOptions::default()).unwrap();
        assert_eq!(c.verdict.petals(), Some(4));
        let other = RotationNumber::from_continued_fraction(&[0, 2], Some(1)).unwrap();
        let g = rotation_dependent(other, &star, Complex64::new(1.0, 0.0), 8).unwrap();
        let c = classify(&g, &ClassifyOptions::default()).unwrap();
        assert_eq!(c.verdict.petals(), Some(3));
    }
}
