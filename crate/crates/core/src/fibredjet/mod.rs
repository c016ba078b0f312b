//! Truncated fibred power series `F(theta, z) = (theta + alpha, lambda z + sum_j a_j(theta) z^j)`
//! and the coordinate changes acting on them.
//!
//! Every conjugacy goes through the truncated series engine in [`series`]: composition by
//! Horner's rule and order-by-order reversion. Nothing is hard-coded per order.

mod fold;
mod infinity;
pub(crate) mod series;

pub use fold::FoldedJet;
pub use infinity::InfinityJet;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rotation::{RootOfUnity, RotationNumber};
use crate::trigpoly::{ModeRecord, TrigPoly};

/// Relative threshold below which a coefficient counts as numerically zero.
pub const DUST: f64 = 1e-13;

/// Shape of the elementary change of variables `H(theta, z)` used by
/// [`FibredJet::elementary_conjugate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeShape {
    /// `H(z) = z + h z^m`.
    Polynomial,
    /// `H(z) = z (1 - (m-1) h z^{m-1})^{-1/(m-1)}`, a translation `Z -> Z + h` in the
    /// coordinate `Z = -1/((m-1) z^{m-1})`. For `m = 2` this is `z / (1 - h z)`.
    FatouTranslation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FibredJet {
    alpha: RotationNumber,
    multiplier: RootOfUnity,
    /// `coeffs[j]` is the coefficient of `z^j`, `j = 0..=N`; `coeffs[0] = 0`, `coeffs[1] = lambda`.
    coeffs: Vec<TrigPoly>,
    history: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRecord {
    pub order: usize,
    pub modes: Vec<ModeRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct JetRecord {
    pub alpha: f64,
    pub multiplier: RootOfUnity,
    pub truncation: usize,
    pub coefficients: Vec<CoefficientRecord>,
    pub history: Vec<String>,
}

impl FibredJet {
    /// Builds `z + sum a_j z^j` (or `lambda z + ...`) from `(order, coefficient)` pairs.
    pub fn new(
        alpha: RotationNumber,
        multiplier: RootOfUnity,
        truncation: usize,
        coefficients: impl IntoIterator<Item = (usize, TrigPoly)>,
    ) -> Result<Self> {
        if truncation < 2 {
            return Err(Error::precondition("fibredjet", "truncation order must be >= 2"));
        }
        let mut coeffs = series::zeros(truncation);
        coeffs[1] = TrigPoly::constant(multiplier.value());
        for (j, p) in coefficients {
            if j < 2 || j > truncation {
                return Err(Error::precondition(
                    "fibredjet",
                    format!("coefficient order {j} outside 2..={truncation}"),
                ));
            }
            coeffs[j] += &p;
        }
        Ok(Self {
            alpha,
            multiplier,
            coeffs,
            history: vec!["input".into()],
        })
    }

    pub fn identity(alpha: RotationNumber, truncation: usize) -> Result<Self> {
        Self::new(alpha, RootOfUnity::ONE, truncation, [])
    }

    fn derived(&self, alpha: RotationNumber, multiplier: RootOfUnity, coeffs: Vec<TrigPoly>, step: String) -> Self {
        let mut history = self.history.clone();
        history.push(step);
        let mut coeffs = coeffs;
        coeffs[0] = TrigPoly::zero();
        coeffs[1] = TrigPoly::constant(multiplier.value());
        Self {
            alpha,
            multiplier,
            coeffs,
            history,
        }
    }

    pub fn alpha(&self) -> &RotationNumber {
        &self.alpha
    }

    pub fn multiplier(&self) -> RootOfUnity {
        self.multiplier
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `z^j`; zero beyond the truncation order.
    pub fn coeff(&self, j: usize) -> TrigPoly {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[TrigPoly] {
        &self.coeffs
    }

    /// Record of the operations that produced this jet.
    pub fn history(&self) -> &[String] {
        &self.history
    }

    pub fn annotate(&mut self, note: impl Into<String>) {
        self.history.push(note.into());
    }

    /// Scale used for dust thresholds: the largest `strip_norm(a_j, 0)` over `j >= 2`.
    pub fn scale(&self) -> f64 {
        self.coeffs[2..]
            .iter()
            .map(|p| p.strip_norm(0.0))
            .fold(1.0, f64::max)
    }

    /// First order `j >= 2` whose coefficient exceeds `tol` in `strip_norm(., 0)`.
    pub fn leading_order(&self, tol: f64) -> Option<usize> {
        (2..self.coeffs.len()).find(|&j| self.coeffs[j].strip_norm(0.0) > tol)
    }

    pub fn with_alpha(&self, alpha: RotationNumber) -> Self {
        let mut out = self.clone();
        out.alpha = alpha;
        out
    }

    /// Lowers the truncation order to `order` (no-op when already lower).
    pub fn truncate(&self, order: usize) -> Self {
        let n = order.max(2).min(self.truncation());
        let mut out = self.clone();
        out.coeffs.truncate(n + 1);
        out
    }

    /// Fibre map `f_theta(z)`.
    pub fn eval(&self, theta: f64, z: Complex64) -> Complex64 {
        series::eval(&self.coeffs, theta, z)
    }

    /// `(theta + alpha, f_theta(z))`.
    pub fn apply(&self, theta: f64, z: Complex64) -> (f64, Complex64) {
        (self.alpha.orbit_point(theta, 1), self.eval(theta, z))
    }

    pub fn evaluator(&self) -> JetEvaluator {
        JetEvaluator::new(&self.coeffs)
    }

    /// `H^{-1} o F o H` for a fibre-preserving change `H(theta, z) = (theta, change_theta(z))`
    /// tangent to the identity.
    pub fn conjugate_by(&self, change: &[TrigPoly], label: impl Into<String>) -> Self {
        let n = self.truncation();
        let inner = series::compose(&self.coeffs, change, n);
        let inv = series::reversion(change, Complex64::new(1.0, 0.0), n);
        let outer = series::rotate(&inv, &self.alpha);
        let coeffs = series::compose(&outer, &inner, n);
        self.derived(self.alpha.clone(), self.multiplier, coeffs, label.into())
    }

    /// `H^{-1} o F o H` with `H(theta, z) = (theta, z + h(theta) z^m)`.
    pub fn elementary_conjugate(&self, h: &TrigPoly, m: usize) -> Result<Self> {
        self.elementary_conjugate_with(h, m, ChangeShape::Polynomial)
    }

    pub fn elementary_conjugate_with(&self, h: &TrigPoly, m: usize, shape: ChangeShape) -> Result<Self> {
        let n = self.truncation();
        if m < 2 || m > n {
            return Err(Error::precondition(
                "fibredjet",
                format!("elementary conjugacy order m = {m} outside 2..={n}"),
            ));
        }
        let change = change_series(h, m, shape, n);
        let label = match shape {
            ChangeShape::Polynomial => format!("conjugate z + h z^{m}"),
            ChangeShape::FatouTranslation => format!("conjugate Fatou translation at order {m}"),
        };
        Ok(self.conjugate_by(&change, label))
    }

    /// The `n`-th iterate, with base rotation `n alpha` and multiplier `lambda^n`.
    pub fn iterate(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::precondition("fibredjet", "iterate needs n >= 1"));
        }
        let order = self.truncation();
        let mut acc = self.coeffs.clone();
        for i in 1..n {
            let outer = series::rotate(&self.coeffs, &self.alpha.times(i as i64));
            acc = series::compose(&outer, &acc, order);
        }
        Ok(self.derived(
            self.alpha.times(n as i64),
            self.multiplier.pow(n as i64),
            acc,
            format!("iterate {n}"),
        ))
    }

    /// Truncated inverse `F^{-1}(theta, z) = (theta - alpha, g_{theta - alpha}(z))`.
    pub fn inverse(&self) -> Self {
        let order = self.truncation();
        let g = series::reversion(&self.coeffs, self.multiplier.value(), order);
        let minus = self.alpha.negated();
        let coeffs = series::rotate(&g, &minus);
        self.derived(minus, self.multiplier.pow(-1), coeffs, "inverse".into())
    }

    /// Laurent expansion of `I o F o I^{-1}` with `I(theta, z) = (theta, -1/z)`.
    pub fn to_infinity(&self) -> Result<InfinityJet> {
        InfinityJet::from_fibred(self)
    }

    /// The map in the coordinate `w = z^n`, valid when `a_2 = ... = a_n = 0`.
    pub fn power_fold(&self, n: usize) -> Result<FoldedJet> {
        FoldedJet::new(self, n)
    }

    pub fn record(&self) -> JetRecord {
        JetRecord {
            alpha: self.alpha.value(),
            multiplier: self.multiplier,
            truncation: self.truncation(),
            coefficients: (2..self.coeffs.len())
                .filter(|&j| !self.coeffs[j].is_zero())
                .map(|j| CoefficientRecord {
                    order: j,
                    modes: self.coeffs[j].to_records(),
                })
                .collect(),
            history: self.history.clone(),
        }
    }
}

/// Series of the change `H_theta(z)` for the given shape, truncated at `order`.
pub fn change_series(h: &TrigPoly, m: usize, shape: ChangeShape, order: usize) -> Vec<TrigPoly> {
    let mut s = series::zeros(order);
    s[1] = TrigPoly::constant(1.0);
    match shape {
        ChangeShape::Polynomial => {
            if m <= order {
                s[m] += h;
            }
        }
        ChangeShape::FatouTranslation => {
            // (1 - p x)^{-1/p} = sum_i c_i p^i x^i with c_i = c_{i-1} (i - 1 + 1/p) / i, x = h z^p
            let p = (m - 1) as f64;
            let mut c = 1.0;
            let mut hp = TrigPoly::constant(1.0);
            let mut i = 1;
            while 1 + (m - 1) * i <= order {
                c *= (i as f64 - 1.0 + 1.0 / p) / i as f64;
                hp = hp.mul(h);
                s[1 + (m - 1) * i] += &hp.scale(c * p.powi(i as i32));
                i += 1;
            }
        }
    }
    s
}

/// Fast pointwise evaluation of a jet: powers of `e^{2 pi i theta}` are shared by all coefficients.
#[derive(Debug, Clone)]
pub struct JetEvaluator {
    coeffs: Vec<Vec<(i64, Complex64)>>,
    max_freq: usize,
}

impl JetEvaluator {
    fn new(coeffs: &[TrigPoly]) -> Self {
        let coeffs: Vec<Vec<(i64, Complex64)>> = coeffs.iter().map(|p| p.modes().collect()).collect();
        let max_freq = coeffs
            .iter()
            .flat_map(|c| c.iter().map(|(n, _)| n.unsigned_abs() as usize))
            .max()
            .unwrap_or(0);
        Self { coeffs, max_freq }
    }

    /// Fibre coefficients `a_j(theta)` for `j = 0..=N`.
    pub fn coefficients_at(&self, theta: f64) -> Vec<Complex64> {
        let base = Complex64::from_polar(1.0, TAU * theta.rem_euclid(1.0));
        let mut pos = Vec::with_capacity(self.max_freq + 1);
        let mut w = Complex64::new(1.0, 0.0);
        for _ in 0..=self.max_freq {
            pos.push(w);
            w *= base;
        }
        self.coeffs
            .iter()
            .map(|modes| {
                modes
                    .iter()
                    .map(|(n, c)| {
                        let e = pos[n.unsigned_abs() as usize];
                        c * if *n < 0 { e.conj() } else { e }
                    })
                    .sum()
            })
            .collect()
    }

    pub fn eval(&self, theta: f64, z: Complex64) -> Complex64 {
        horner(&self.coefficients_at(theta), z)
    }
}

pub(crate) fn horner(a: &[Complex64], z: Complex64) -> Complex64 {
    a.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::solve_exact;

    fn golden() -> RotationNumber {
        RotationNumber::golden_mean()
    }

    fn c(x: f64) -> TrigPoly {
        TrigPoly::constant(x)
    }

    fn sine_quadratic_jet(n: usize) -> FibredJet {
        FibredJet::new(golden(), RootOfUnity::ONE, n, [(2, TrigPoly::sin())]).unwrap()
    }

    fn sample_points() -> Vec<(f64, Complex64)> {
        let mut out = Vec::new();
        for i in 0..16 {
            for j in 0..16 {
                let theta = i as f64 / 16.0 + 0.013;
                let z = Complex64::from_polar(0.004 + 0.0004 * j as f64, TAU * j as f64 / 16.0);
                out.push((theta, z));
            }
        }
        out
    }

    fn generic_jet(n: usize) -> FibredJet {
        FibredJet::new(
            golden(),
            RootOfUnity::ONE,
            n,
            [
                (2, TrigPoly::sin() + TrigPoly::cos_k(2)),
                (3, c(0.5) + TrigPoly::sin_k(3).scale(0.3)),
                (4, TrigPoly::cos().scale(Complex64::new(0.2, 0.1))),
                (5, c(-0.4) + TrigPoly::mode(2).scale(0.1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_jet_has_no_higher_terms() {
        let id = FibredJet::identity(golden(), 6).unwrap();
        assert_eq!(id.leading_order(1e-14), None);
        assert_eq!(id.eval(0.3, Complex64::new(0.1, 0.2)), Complex64::new(0.1, 0.2));
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(FibredJet::new(golden(), RootOfUnity::ONE, 1, []).is_err());
        assert!(FibredJet::new(golden(), RootOfUnity::ONE, 4, [(5, c(1.0))]).is_err());
        let f = sine_quadratic_jet(5);
        assert!(f.elementary_conjugate(&c(1.0), 6).is_err());
        assert!(f.elementary_conjugate(&c(1.0), 1).is_err());
    }

    #[test]
    fn zero_change_is_identity() {
        let f = generic_jet(7);
        let g = f.elementary_conjugate(&TrigPoly::zero(), 3).unwrap();
        for j in 0..=7 {
            assert!(g.coeff(j).max_mode_diff(&f.coeff(j)) < 1e-15);
        }
    }

    #[test]
    fn fatou_change_reproduces_minus_sin_squared() {
        let f = sine_quadratic_jet(6);
        let h = solve_exact(&-TrigPoly::sin(), f.alpha()).unwrap().c;
        let g = f
            .elementary_conjugate_with(&h, 2, ChangeShape::FatouTranslation)
            .unwrap();
        assert!(g.coeff(2).max_abs_mode() < 1e-14);
        let target = -TrigPoly::sin().powi(2);
        assert!(g.coeff(3).max_mode_diff(&target) < 1e-12);
    }

    #[test]
    fn order_two_reduction_table() {
        let mut f = generic_jet(6);
        f.coeffs[2] = TrigPoly::sin() + TrigPoly::cos_k(2);
        let alpha = f.alpha().clone();
        let (a2, a3, a4, a5) = (f.coeff(2), f.coeff(3), f.coeff(4), f.coeff(5));
        let h = solve_exact(&-a2.clone(), &alpha).unwrap().c;
        let g = f
            .elementary_conjugate_with(&h, 2, ChangeShape::FatouTranslation)
            .unwrap();
        let c2 = -h;
        let b1 = &a2.mul(&a2) - &a3;
        let b2 = &(&a4 - &a2.mul(&a3).scale(2.0)) + &a2.powi(3);
        let b3 = &(&(&(&a3.mul(&a3) - &a5) + &a2.mul(&a4).scale(2.0)) - &a2.mul(&a2).mul(&a3).scale(3.0))
            + &a2.powi(4);
        let d1 = b1.clone();
        let d2 = &b1.mul(&c2) + &b2;
        let d3 = &(&b1.mul(&c2).mul(&c2) + &b2.mul(&c2).scale(2.0)) + &b3;
        assert!(g.coeff(2).max_abs_mode() < 1e-12);
        assert!(g.coeff(3).max_mode_diff(&-d1.clone()) < 1e-10);
        assert!(g.coeff(4).max_mode_diff(&d2) < 1e-10);
        assert!(g.coeff(5).max_mode_diff(&(&d1.mul(&d1) - &d3)) < 1e-10);
    }

    #[test]
    fn order_three_polynomial_step() {
        let f = FibredJet::new(
            golden(),
            RootOfUnity::ONE,
            6,
            [
                (3, TrigPoly::sin() + TrigPoly::cos_k(3).scale(0.5)),
                (4, c(0.3) + TrigPoly::mode(-1)),
                (5, c(0.7) + TrigPoly::sin_k(2)),
            ],
        )
        .unwrap();
        let (a3, a4, a5) = (f.coeff(3), f.coeff(4), f.coeff(5));
        let h3 = solve_exact(&-a3.clone(), f.alpha()).unwrap().c;
        let g = f.elementary_conjugate(&h3, 3).unwrap();
        assert!(g.coeff(3).max_abs_mode() < 1e-12);
        assert!(g.coeff(4).max_mode_diff(&a4) < 1e-12);
        assert!(g.coeff(5).max_mode_diff(&(&a3.mul(&h3).scale(3.0) + &a5)) < 1e-10);
    }

    #[test]
    fn conjugacy_pointwise_oracle() {
        let f = generic_jet(8);
        let h = TrigPoly::sin().scale(0.7) + c(0.2);
        for shape in [ChangeShape::Polynomial, ChangeShape::FatouTranslation] {
            for m in 2..=4 {
                let g = f.elementary_conjugate_with(&h, m, shape).unwrap();
                let change = change_series(&h, m, shape, 8);
                for (theta, z) in sample_points() {
                    // H o G = F o H up to O(z^9)
                    let lhs = series::eval(&change, f.alpha().orbit_point(theta, 1), g.eval(theta, z));
                    let rhs = f.eval(theta, series::eval(&change, theta, z));
                    let err = (lhs - rhs).norm();
                    assert!(err <= 1e-8 * rhs.norm(), "shape {shape:?} m {m} err {err}");
                }
            }
        }
    }

    #[test]
    fn iterate_matches_numeric_composition() {
        let f = generic_jet(10);
        for n in 1..=4 {
            let fn_ = f.iterate(n).unwrap();
            for (theta, z) in sample_points().into_iter().step_by(7) {
                let z = z * 2.0;
                let (mut t, mut w) = (theta, z);
                for _ in 0..n {
                    (t, w) = f.apply(t, w);
                }
                let (t2, w2) = fn_.apply(theta, z);
                assert!((t - t2).abs().min(1.0 - (t - t2).abs()) < 1e-12);
                assert!((w - w2).norm() < 1e-9, "n = {n}: {}", (w - w2).norm());
            }
        }
    }

    #[test]
    fn iterate_of_minus_identity() {
        let minus = RootOfUnity::new(1, 2).unwrap();
        let f = FibredJet::new(golden(), minus, 5, []).unwrap();
        let g = f.iterate(2).unwrap();
        assert!(g.multiplier().is_one());
        assert_eq!(g.leading_order(1e-15), None);
    }

    #[test]
    fn iterate_of_minus_z_plus_z2() {
        let minus = RootOfUnity::new(1, 2).unwrap();
        let f = FibredJet::new(golden(), minus, 6, [(2, c(1.0))]).unwrap();
        let g = f.iterate(2).unwrap();
        // (-w + w^2) o (-z + z^2) = z - 2 z^3 + z^4
        assert!(g.coeff(2).max_abs_mode() < 1e-15);
        assert!((g.coeff(3).mean() - Complex64::new(-2.0, 0.0)).norm() < 1e-14);
        assert!((g.coeff(4).mean() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((g.alpha().value() - golden().times(2).value()).abs() < 1e-15);
        for (theta, z) in sample_points().into_iter().step_by(4) {
            let once = f.apply(theta, z);
            let twice = f.apply(once.0, once.1);
            assert!((g.eval(theta, z) - twice.1).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        let f = generic_jet(8);
        let g = f.inverse();
        for (theta, z) in sample_points().into_iter().step_by(5) {
            let (t1, w1) = f.apply(theta, z);
            let (t2, w2) = g.apply(t1, w1);
            assert!((t2 - theta).abs().min(1.0 - (t2 - theta).abs()) < 1e-12);
            assert!((w2 - z).norm() < 1e-9 * z.norm());
        }
    }

    #[test]
    fn evaluator_matches_slow_path() {
        let f = generic_jet(6);
        let ev = f.evaluator();
        for (theta, z) in sample_points().into_iter().step_by(11) {
            assert!((ev.eval(theta, z) - f.eval(theta, z)).norm() < 1e-15);
        }
    }
}
