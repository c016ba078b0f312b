//! Laurent jets at infinity: `G(theta, Z) = Z + k + drift(theta) + sum_j b_j(theta) Z^{-j}`.

use num_complex::Complex64;
use serde::Serialize;

use super::{series, FibredJet};
use crate::error::{Error, Result};
use crate::rotation::{RootOfUnity, RotationNumber};
use crate::trigpoly::{ModeRecord, TrigPoly};

#[derive(Debug, Clone, PartialEq)]
pub struct InfinityJet {
    alpha: RotationNumber,
    k: Complex64,
    drift: TrigPoly,
    /// `tail[j - 1] = b_j`, `j = 1..=N-2`.
    tail: Vec<TrigPoly>,
    history: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfinityRecord {
    pub k_re: f64,
    pub k_im: f64,
    pub drift: Vec<ModeRecord>,
    pub tail: Vec<Vec<ModeRecord>>,
    pub history: Vec<String>,
}

impl InfinityJet {
    pub fn new(alpha: RotationNumber, k: Complex64, drift: TrigPoly, tail: Vec<TrigPoly>) -> Self {
        Self {
            alpha,
            k: k + drift.mean(),
            drift: drift.without_mean(),
            tail,
            history: vec!["input".into()],
        }
    }

    pub(crate) fn from_fibred(f: &FibredJet) -> Result<Self> {
        if !f.multiplier().is_one() {
            return Err(Error::precondition(
                "fibredjet",
                "to_infinity needs multiplier 1; iterate the map first",
            ));
        }
        let n = f.truncation();
        // u(-x) = sum_j a_j (-1)^{j-1} x^{j-1}
        let mut w = series::zeros(n - 1);
        for j in 2..=n {
            let a = f.coeff(j);
            w[j - 1] = if j % 2 == 0 { -a } else { a };
        }
        let v = series::reciprocal_one_plus(&w, n - 1);
        let z0 = &v[1];
        let mut history = f.history().to_vec();
        history.push("to infinity".into());
        Ok(Self {
            alpha: f.alpha().clone(),
            k: z0.mean(),
            drift: z0.without_mean(),
            tail: v[2..].to_vec(),
            history,
        })
    }

    pub fn alpha(&self) -> &RotationNumber {
        &self.alpha
    }

    /// Mean translation `k`.
    pub fn k(&self) -> Complex64 {
        self.k
    }

    pub fn drift(&self) -> &TrigPoly {
        &self.drift
    }

    /// Full `Z^0` coefficient `k + drift(theta)`.
    pub fn translation_term(&self) -> TrigPoly {
        &self.drift + &TrigPoly::constant(self.k)
    }

    /// `b_j` for `j >= 1`; zero beyond the stored tail.
    pub fn b(&self, j: usize) -> TrigPoly {
        if j == 0 {
            return TrigPoly::zero();
        }
        self.tail.get(j - 1).cloned().unwrap_or_default()
    }

    pub fn tail(&self) -> &[TrigPoly] {
        &self.tail
    }

    /// Fibred jet order `N` this Laurent jet is compatible with.
    pub fn truncation(&self) -> usize {
        self.tail.len() + 2
    }

    pub fn history(&self) -> &[String] {
        &self.history
    }

    fn derived(&self, k: Complex64, drift: TrigPoly, tail: Vec<TrigPoly>, step: String) -> Self {
        let mut history = self.history.clone();
        history.push(step);
        Self {
            alpha: self.alpha.clone(),
            k,
            drift,
            tail,
            history,
        }
    }

    pub fn eval(&self, theta: f64, z: Complex64) -> Complex64 {
        let x = z.inv();
        let mut acc = Complex64::new(0.0, 0.0);
        for b in self.tail.iter().rev() {
            acc = (acc + b.eval(theta)) * x;
        }
        z + self.k + self.drift.eval(theta) + acc
    }

    pub fn apply(&self, theta: f64, z: Complex64) -> (f64, Complex64) {
        (self.alpha.orbit_point(theta, 1), self.eval(theta, z))
    }

    /// Back to the fibred jet `f(z) = z / v(-z)` with `v(x) = 1 + (k + drift) x + sum b_j x^{j+1}`.
    pub fn to_fibred(&self) -> Result<FibredJet> {
        let n = self.truncation();
        let mut s = series::zeros(n - 1);
        s[1] = -self.translation_term();
        for (j, b) in self.tail.iter().enumerate() {
            let p = j + 2;
            s[p] = if p % 2 == 1 { -b } else { b.clone() };
        }
        let r = series::reciprocal_one_plus(&s, n - 1);
        let mut out = FibredJet::new(
            self.alpha.clone(),
            RootOfUnity::ONE,
            n,
            (2..=n).map(|j| (j, r[j - 1].clone())),
        )?;
        out.history = self.history.clone();
        out.history.push("from infinity".into());
        Ok(out)
    }

    /// `T_c o G o T_c^{-1}` with `T_c(theta, Z) = (theta, Z + c(theta))`.
    pub fn conjugate_translation(&self, c: &TrigPoly) -> Self {
        let z0 = &(&self.translation_term() + &c.rotate(&self.alpha)) - c;
        let mut powers = vec![TrigPoly::constant(1.0)];
        for m in 1..self.tail.len() {
            powers.push(powers[m - 1].mul(c));
        }
        let tail = (1..=self.tail.len())
            .map(|l| {
                let mut acc = TrigPoly::zero();
                for j in 1..=l {
                    let m = l - j;
                    acc += &self.tail[j - 1].mul(&powers[m]).scale(binomial(l - 1, m));
                }
                acc
            })
            .collect();
        self.derived(z0.mean(), z0.without_mean(), tail, "conjugate translation".into())
    }

    /// `A o G o A^{-1}` with `A(theta, Z) = (theta, Z / s)`.
    ///
    /// The constant term scales as `s^{-1}` and `b_j` as `s^{-(j+1)}`; with `s = k` the translation
    /// constant becomes 1.
    pub fn conjugate_homothety(&self, s: Complex64) -> Result<Self> {
        if s.norm() == 0.0 || !s.is_finite() {
            return Err(Error::precondition("fibredjet", "homothety needs a finite nonzero scale"));
        }
        let inv = s.inv();
        let mut f = inv;
        let tail = self
            .tail
            .iter()
            .map(|b| {
                f *= inv;
                b.scale(f)
            })
            .collect();
        Ok(self.derived(self.k * inv, self.drift.scale(inv), tail, format!("homothety by {s}")))
    }

    pub fn record(&self) -> InfinityRecord {
        InfinityRecord {
            k_re: self.k.re,
            k_im: self.k.im,
            drift: self.drift.to_records(),
            tail: self.tail.iter().map(|b| b.to_records()).collect(),
            history: self.history.clone(),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::solve_exact;
    use crate::fibredjet::ChangeShape;
    use std::f64::consts::TAU;

    fn golden() -> RotationNumber {
        RotationNumber::golden_mean()
    }

    fn c(x: f64) -> TrigPoly {
        TrigPoly::constant(x)
    }

    fn samples() -> Vec<(f64, Complex64)> {
        (0..64)
            .map(|i| {
                let theta = (i as f64 * 0.618_034) % 1.0;
                (theta, Complex64::from_polar(40.0 + i as f64, TAU * i as f64 / 17.0))
            })
            .collect()
    }

    #[test]
    fn two_term_expansion() {
        let a2 = TrigPoly::sin() + c(0.25);
        let a3 = TrigPoly::cos_k(2);
        let f = FibredJet::new(golden(), RootOfUnity::ONE, 5, [(2, a2.clone()), (3, a3.clone())]).unwrap();
        let g = f.to_infinity().unwrap();
        assert!(g.translation_term().max_mode_diff(&a2) < 1e-15);
        assert!(g.b(1).max_mode_diff(&(&a2.mul(&a2) - &a3)) < 1e-14);
        assert_eq!(g.tail().len(), 3);
    }

    #[test]
    fn identity_goes_to_translation_free() {
        let g = FibredJet::identity(golden(), 6).unwrap().to_infinity().unwrap();
        assert_eq!(g.k(), Complex64::new(0.0, 0.0));
        assert!(g.tail().iter().all(|b| b.is_zero()));
    }

    #[test]
    fn scalar_z_plus_z2() {
        // -1/(z + z^2) at z = -1/Z equals Z + 1 + 1/Z + 1/Z^2 + ... (Z^2 / (Z - 1))
        let f = FibredJet::new(golden(), RootOfUnity::ONE, 5, [(2, c(1.0))]).unwrap();
        let g = f.to_infinity().unwrap();
        assert!((g.k() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for j in 1..=3 {
            assert!((g.b(j).mean() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip() {
        let f = FibredJet::new(
            golden(),
            RootOfUnity::ONE,
            7,
            [(2, TrigPoly::sin()), (4, c(0.3) + TrigPoly::mode(3)), (7, TrigPoly::cos())],
        )
        .unwrap();
        let back = f.to_infinity().unwrap().to_fibred().unwrap();
        for j in 0..=7 {
            assert!(back.coeff(j).max_mode_diff(&f.coeff(j)) < 1e-13, "j = {j}");
        }
    }

    #[test]
    fn rejects_nontrivial_multiplier() {
        let f = FibredJet::new(golden(), RootOfUnity::new(1, 2).unwrap(), 4, []).unwrap();
        assert!(f.to_infinity().is_err());
    }

    #[test]
    fn translation_kills_drift() {
        let f = FibredJet::new(golden(), RootOfUnity::ONE, 6, [(2, TrigPoly::sin())]).unwrap();
        let g = f.to_infinity().unwrap();
        let sol = solve_exact(&TrigPoly::sin(), &golden()).unwrap();
        let t = g.conjugate_translation(&sol.c);
        assert!(t.drift().max_abs_mode() < 1e-14);
        assert!(t.k().norm() < 1e-15);
        let zero = g.conjugate_translation(&TrigPoly::zero());
        assert_eq!(zero.tail(), g.tail());
    }

    #[test]
    fn translation_pointwise_oracle() {
        let g = InfinityJet::new(
            golden(),
            Complex64::new(0.7, 0.1),
            TrigPoly::sin(),
            vec![TrigPoly::cos(), c(0.5), TrigPoly::mode(2)],
        );
        let cc = TrigPoly::cos_k(2).scale(0.4) + c(0.1);
        let t = g.conjugate_translation(&cc);
        for (theta, z) in samples() {
            let lhs = t.eval(theta, z + cc.eval(theta));
            let rhs = g.eval(theta, z) + cc.eval(g.alpha().orbit_point(theta, 1));
            // exact up to the discarded Z^{-4} terms
            assert!((lhs - rhs).norm() < 10.0 * z.norm().powi(-4), "{}", (lhs - rhs).norm());
        }
    }

    #[test]
    fn homothety_pointwise_oracle() {
        let k = Complex64::new(2.0, 0.0);
        let g = InfinityJet::new(golden(), k, TrigPoly::zero(), vec![TrigPoly::sin(), c(0.3)]);
        let h = g.conjugate_homothety(k).unwrap();
        assert!((h.k() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for (theta, z) in samples() {
            let lhs = h.eval(theta, z / k);
            let rhs = g.eval(theta, z) / k;
            assert!((lhs - rhs).norm() < 1e-13);
        }
        let same = g.conjugate_homothety(Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(same.tail(), g.tail());
        assert!(g.conjugate_homothety(Complex64::new(0.0, 0.0)).is_err());
        let bare = InfinityJet::new(golden(), k, TrigPoly::zero(), vec![]);
        assert!((bare.conjugate_homothety(k).unwrap().k() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn translation_route_agrees_with_fatou_change() {
        let a2 = TrigPoly::sin() + TrigPoly::cos_k(2).scale(0.5);
        let f = FibredJet::new(
            golden(),
            RootOfUnity::ONE,
            7,
            [(2, a2.clone()), (3, c(0.4)), (5, TrigPoly::mode(-1))],
        )
        .unwrap();
        let cc = solve_exact(&a2, &golden()).unwrap().c;
        let via_infinity = f.to_infinity().unwrap().conjugate_translation(&cc).to_fibred().unwrap();
        let direct = f
            .elementary_conjugate_with(&-cc, 2, ChangeShape::FatouTranslation)
            .unwrap();
        for j in 0..=7 {
            assert!(via_infinity.coeff(j).max_mode_diff(&direct.coeff(j)) < 1e-11, "j = {j}");
        }
    }
}
