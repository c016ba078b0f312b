//! Finite Fourier series on the circle `T = R/Z`.
//!
//! A [`TrigPoly`] stores its modes `g(n)` in the basis `e_n(theta) = exp(2 pi i n theta)`,
//! so rotating by `alpha` multiplies mode `n` by `exp(2 pi i n alpha)` exactly.
//! Products are computed by direct convolution of the mode maps; no sampling is involved.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::rotation::RotationNumber;

/// Modes below this fraction of the largest mode are dropped after a product.
pub const DUST_RELATIVE: f64 = 1e-15;

/// Serialized form of a single Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRecord {
    pub freq: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<ModeRecord>", into = "Vec<ModeRecord>")]
pub struct TrigPoly {
    modes: BTreeMap<i64, Complex64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        Self::from_modes([(0, c.into())])
    }

    /// The single mode `e_n(theta) = exp(2 pi i n theta)`.
    pub fn mode(n: i64) -> Self {
        Self::from_modes([(n, Complex64::new(1.0, 0.0))])
    }

    /// `sin(2 pi theta)`.
    pub fn sin() -> Self {
        Self::from_modes([(1, Complex64::new(0.0, -0.5)), (-1, Complex64::new(0.0, 0.5))])
    }

    /// `cos(2 pi theta)`.
    pub fn cos() -> Self {
        Self::from_modes([(1, Complex64::new(0.5, 0.0)), (-1, Complex64::new(0.5, 0.0))])
    }

    /// `sin(2 pi m theta)`.
    pub fn sin_k(m: i64) -> Self {
        Self::from_modes([(m, Complex64::new(0.0, -0.5)), (-m, Complex64::new(0.0, 0.5))])
    }

    /// `cos(2 pi m theta)`.
    pub fn cos_k(m: i64) -> Self {
        Self::from_modes([(m, Complex64::new(0.5, 0.0)), (-m, Complex64::new(0.5, 0.0))])
    }

    pub fn from_modes<I>(modes: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut out = BTreeMap::new();
        for (n, c) in modes {
            *out.entry(n).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        out.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Self { modes: out }
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.modes.keys().map(|n| n.unsigned_abs()).max().unwrap_or(0)
    }

    /// Fourier coefficient at frequency `n` (zero when absent).
    pub fn coeff(&self, n: i64) -> Complex64 {
        self.modes.get(&n).copied().unwrap_or_default()
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.modes.iter().map(|(n, c)| (*n, *c))
    }

    pub fn mean(&self) -> Complex64 {
        self.coeff(0)
    }

    /// Copy with the mean removed.
    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.modes.remove(&0);
        out
    }

    pub fn max_abs_mode(&self) -> f64 {
        self.modes.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        Self::from_modes(self.modes.iter().map(|(n, c)| (*n, c * s)))
    }

    pub fn conj(&self) -> Self {
        Self::from_modes(self.modes.iter().map(|(n, c)| (-n, c.conj())))
    }

    /// Pointwise product, with modes below `DUST_RELATIVE` of the largest mode dropped.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (n, a) in &self.modes {
            for (m, b) in &other.modes {
                *out.entry(n + m).or_insert(Complex64::new(0.0, 0.0)) += a * b;
            }
        }
        let largest = out.values().map(|c| c.norm()).fold(0.0, f64::max);
        let floor = DUST_RELATIVE * largest;
        out.retain(|_, c| c.norm() >= floor && *c != Complex64::new(0.0, 0.0));
        Self { modes: out }
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// `theta -> p(theta + alpha)`.
    pub fn rotate(&self, alpha: &RotationNumber) -> Self {
        Self::from_modes(
            self.modes
                .iter()
                .map(|(n, c)| (*n, c * alpha.phase(*n))),
        )
    }

    /// Rotation by a plain real shift (no extended-precision bookkeeping).
    pub fn rotate_by(&self, shift: f64) -> Self {
        Self::from_modes(self.modes.iter().map(|(n, c)| {
            let x = (*n as f64 * shift).rem_euclid(1.0);
            (*n, c * Complex64::from_polar(1.0, TAU * x))
        }))
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let t = theta.rem_euclid(1.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, c) in &self.modes {
            let x = (*n as f64 * t).rem_euclid(1.0);
            acc += c * Complex64::from_polar(1.0, TAU * x);
        }
        acc
    }

    /// Evaluation at a complex angle `theta` in the strip `|Im theta| < delta`.
    pub fn eval_complex(&self, theta: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, c) in &self.modes {
            acc += c * (Complex64::new(0.0, 2.0 * PI * *n as f64) * theta).exp();
        }
        acc
    }

    /// Certified majorant `sum |g(n)| e^{2 pi |n| delta}` of the sup norm on the strip `B_delta`.
    ///
    /// This is an upper bound; it equals the true sup only in special cases.
    pub fn strip_norm(&self, delta: f64) -> f64 {
        self.modes
            .iter()
            .map(|(n, c)| c.norm() * (TAU * n.unsigned_abs() as f64 * delta).exp())
            .sum()
    }

    /// Drop modes with `|coefficient| < tol`.
    pub fn chop(&self, tol: f64) -> Self {
        Self::from_modes(self.modes.iter().filter(|(_, c)| c.norm() >= tol).map(|(n, c)| (*n, *c)))
    }

    /// Largest mode-wise difference `max_n |p(n) - q(n)|`.
    pub fn max_mode_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs_mode()
    }

    pub fn to_records(&self) -> Vec<ModeRecord> {
        self.modes
            .iter()
            .map(|(n, c)| ModeRecord {
                freq: *n,
                re: c.re,
                im: c.im,
            })
            .collect()
    }
}

impl From<Vec<ModeRecord>> for TrigPoly {
    fn from(records: Vec<ModeRecord>) -> Self {
        Self::from_modes(records.into_iter().map(|r| (r.freq, Complex64::new(r.re, r.im))))
    }
}

impl From<TrigPoly> for Vec<ModeRecord> {
    fn from(p: TrigPoly) -> Self {
        p.to_records()
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(mut self, rhs: TrigPoly) -> TrigPoly {
        self += &rhs;
        self
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(mut self, rhs: TrigPoly) -> TrigPoly {
        self -= &rhs;
        self
    }
}

impl AddAssign<&TrigPoly> for TrigPoly {
    fn add_assign(&mut self, rhs: &TrigPoly) {
        for (n, c) in &rhs.modes {
            let e = self.modes.entry(*n).or_insert(Complex64::new(0.0, 0.0));
            *e += c;
            if *e == Complex64::new(0.0, 0.0) {
                self.modes.remove(n);
            }
        }
    }
}

impl SubAssign<&TrigPoly> for TrigPoly {
    fn sub_assign(&mut self, rhs: &TrigPoly) {
        for (n, c) in &rhs.modes {
            let e = self.modes.entry(*n).or_insert(Complex64::new(0.0, 0.0));
            *e -= c;
            if *e == Complex64::new(0.0, 0.0) {
                self.modes.remove(n);
            }
        }
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::mul(self, rhs)
    }
}
