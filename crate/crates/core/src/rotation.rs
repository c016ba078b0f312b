//! Base rotation numbers, roots of unity and small-divisor bookkeeping.
//!
//! A [`RotationNumber`] is kept reduced mod 1 as an unevaluated double-double
//! `hi + lo`. Fractional parts of `n * alpha` are formed from the exact product
//! `n * hi` (via fused multiply-add), so frequencies up to 10^6 keep their phase.
//!
//! The Diophantine check here uses the inequality in the direction the
//! solver actually needs, `1/|e^{2 pi i n alpha} - 1| <= C |n|^sigma`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Float inputs within this distance of `p/q` (some `q <= RATIONAL_MAX_Q`) count as rational.
pub const RATIONAL_TOLERANCE: f64 = 1e-12;
pub const RATIONAL_MAX_Q: u64 = 10_000;

/// Continued fractions are expanded until the convergent denominator exceeds this.
const CF_DENOMINATOR_LIMIT: u128 = 1 << 53;
const CF_MAX_TERMS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

impl Precision {
    /// Reads `FIBRED_FLOWER_PRECISION` (`double` or `extended`).
    pub fn from_env() -> Result<Self> {
        match std::env::var("FIBRED_FLOWER_PRECISION") {
            Err(_) => Ok(Precision::Double),
            Ok(v) => match v.trim() {
                "" | "double" => Ok(Precision::Double),
                "extended" => Ok(Precision::Extended),
                other => Err(Error::InvalidRotation(format!(
                    "FIBRED_FLOWER_PRECISION must be 'double' or 'extended', got '{other}'"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Float(f64),
    ContinuedFraction {
        quotients: Vec<u64>,
        /// The last `k` partial quotients repeat forever.
        periodic_tail: Option<usize>,
    },
    /// Integer multiple of another rotation number, reduced mod 1.
    Derived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationNumber {
    repr: Representation,
    hi: f64,
    lo: f64,
    /// Denominator when the number is known to be rational.
    denominator: Option<u64>,
    precision: Precision,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn normalize_unit(hi: f64, lo: f64) -> (f64, f64) {
    let (mut s, mut e) = two_sum(hi, lo);
    let f = s.floor();
    s -= f;
    let (s2, e2) = two_sum(s, e);
    s = s2;
    e = e2;
    if s >= 1.0 {
        s -= 1.0;
    }
    if s < 0.0 {
        s += 1.0;
    }
    (s, e)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl RotationNumber {
    pub fn from_float(x: f64) -> Self {
        let v = x.rem_euclid(1.0);
        let v = if v >= 1.0 { 0.0 } else { v };
        let denominator = (1..=RATIONAL_MAX_Q).find(|&q| {
            let t = q as f64 * v;
            (t - t.round()).abs() <= RATIONAL_TOLERANCE
        });
        Self {
            repr: Representation::Float(x),
            hi: v,
            lo: 0.0,
            denominator,
            precision: Precision::Double,
        }
    }

    /// `[a0; a1, a2, ...]`; with `periodic_tail = Some(k)` the last `k` quotients repeat.
    pub fn from_continued_fraction(quotients: &[u64], periodic_tail: Option<usize>) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::InvalidRotation("continued fraction needs at least a0".into()));
        }
        if let Some(i) = quotients.iter().skip(1).position(|&a| a == 0) {
            return Err(Error::InvalidRotation(format!(
                "partial quotient a{} must be >= 1",
                i + 1
            )));
        }
        if let Some(k) = periodic_tail {
            if k == 0 || k > quotients.len() - 1 {
                return Err(Error::InvalidRotation(format!(
                    "periodic tail {k} must be in 1..={}",
                    quotients.len() - 1
                )));
            }
        }
        let expanded = expand_quotients(quotients, periodic_tail);
        let (p, q, exact) = fractional_convergent(&expanded, periodic_tail.is_none());
        let pf = p as f64;
        let qf = q as f64;
        let hi = pf / qf;
        let lo = if q <= CF_DENOMINATOR_LIMIT && p <= CF_DENOMINATOR_LIMIT {
            (-hi).mul_add(qf, pf) / qf
        } else {
            0.0
        };
        let (hi, lo) = normalize_unit(hi, lo);
        let denominator = if exact { u64::try_from(q).ok() } else { None };
        Ok(Self {
            repr: Representation::ContinuedFraction {
                quotients: quotients.to_vec(),
                periodic_tail,
            },
            hi,
            lo,
            denominator,
            precision: Precision::Double,
        })
    }

    /// `(sqrt 5 - 1)/2 = [0; 1, 1, 1, ...]`.
    pub fn golden_mean() -> Self {
        Self::from_continued_fraction(&[0, 1], Some(1)).expect("valid continued fraction")
    }

    /// Exactly rational `p/q`, for diagnostics only.
    pub fn rational(p: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidRotation("zero denominator".into()));
        }
        let g = gcd(p.unsigned_abs(), q).max(1);
        let q = q / g;
        let p = (p / g as i64).rem_euclid(q as i64) as u64;
        let hi = p as f64 / q as f64;
        let lo = (-hi).mul_add(q as f64, p as f64) / q as f64;
        let (hi, lo) = normalize_unit(hi, lo);
        Ok(Self {
            repr: Representation::Float(p as f64 / q as f64),
            hi,
            lo,
            denominator: Some(q),
            precision: Precision::Double,
        })
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    /// Value in `[0, 1)`.
    pub fn value(&self) -> f64 {
        self.hi
    }

    pub fn is_rational(&self) -> bool {
        self.denominator.is_some()
    }

    pub fn denominator(&self) -> Option<u64> {
        self.denominator
    }

    /// Error unless the number is irrational (solver entry points call this).
    pub fn require_irrational(&self) -> Result<()> {
        match self.denominator {
            Some(q) => Err(Error::Resonance { n: q as i64 }),
            None => Ok(()),
        }
    }

    /// `n * alpha mod 1`, centred in `[-1/2, 1/2]`.
    pub fn centered_frac_mul(&self, n: i64) -> f64 {
        let nf = n as f64;
        let p = nf * self.hi;
        let e = nf.mul_add(self.hi, -p);
        let mut r = p - p.round();
        r += e;
        if self.precision == Precision::Extended {
            r += nf * self.lo;
        }
        r - r.round()
    }

    /// `n * alpha mod 1` in `[0, 1)`.
    pub fn frac_mul(&self, n: i64) -> f64 {
        let r = self.centered_frac_mul(n);
        let f = if r < 0.0 { r + 1.0 } else { r };
        if f >= 1.0 {
            0.0
        } else {
            f
        }
    }

    /// `exp(2 pi i n alpha)`.
    pub fn phase(&self, n: i64) -> Complex64 {
        if n == 0 {
            return Complex64::new(1.0, 0.0);
        }
        if let Some(q) = self.denominator {
            if n.unsigned_abs() % q == 0 {
                return Complex64::new(1.0, 0.0);
            }
        }
        Complex64::from_polar(1.0, TAU * self.centered_frac_mul(n))
    }

    /// `theta + j * alpha mod 1` without accumulated drift.
    pub fn orbit_point(&self, theta0: f64, j: i64) -> f64 {
        let t = theta0.rem_euclid(1.0) + self.frac_mul(j);
        let t = t - t.floor();
        if t >= 1.0 {
            0.0
        } else {
            t
        }
    }

    /// `n * alpha mod 1` as a new rotation number.
    pub fn times(&self, n: i64) -> Self {
        let nf = n as f64;
        let p = nf * self.hi;
        let e = nf.mul_add(self.hi, -p);
        let (hi, lo) = normalize_unit(p - p.floor(), e + nf * self.lo);
        let denominator = self.denominator.map(|q| q / gcd(n.unsigned_abs(), q).max(1));
        Self {
            repr: Representation::Derived,
            hi,
            lo,
            denominator,
            precision: self.precision,
        }
    }

    pub fn negated(&self) -> Self {
        self.times(-1)
    }

    /// Convergents `p_k/q_k` of the fractional part, up to `q_k <= limit`.
    pub fn convergents(&self, limit: u64) -> Vec<(u64, u64)> {
        let quotients = match &self.repr {
            Representation::ContinuedFraction {
                quotients,
                periodic_tail,
            } => expand_quotients(quotients, *periodic_tail),
            _ => float_quotients(self.hi, self.lo),
        };
        let mut out = Vec::new();
        let (mut p_prev, mut q_prev): (u128, u128) = (1, 0);
        let (mut p, mut q): (u128, u128) = (0, 1);
        for &a in quotients.iter().skip(1) {
            let a = a as u128;
            let pn = a * p + p_prev;
            let qn = a * q + q_prev;
            if qn > limit as u128 {
                break;
            }
            p_prev = p;
            q_prev = q;
            p = pn;
            q = qn;
            out.push((p as u64, q as u64));
        }
        out
    }

    /// `e^{2 pi i n alpha} - 1`, computed from the reduced fractional part of `n alpha`.
    pub fn small_divisor(&self, n: i64) -> Result<Complex64> {
        if n == 0 {
            return Err(Error::ZeroFrequency);
        }
        if let Some(q) = self.denominator {
            if n.unsigned_abs() % q == 0 {
                return Err(Error::Resonance { n });
            }
        }
        let x = self.centered_frac_mul(n);
        // e^{2 pi i x} - 1 = 2 i sin(pi x) e^{i pi x}
        Ok(Complex64::new(0.0, 2.0 * (PI * x).sin()) * Complex64::from_polar(1.0, PI * x))
    }
}

fn expand_quotients(quotients: &[u64], periodic_tail: Option<usize>) -> Vec<u64> {
    let mut out = quotients.to_vec();
    if let Some(k) = periodic_tail {
        let tail: Vec<u64> = quotients[quotients.len() - k..].to_vec();
        let (mut q_prev, mut q): (u128, u128) = (0, 1);
        for &a in out.iter().skip(1) {
            let qn = a as u128 * q + q_prev;
            q_prev = q;
            q = qn;
        }
        let mut i = 0;
        while q <= CF_DENOMINATOR_LIMIT * 4 && out.len() < CF_MAX_TERMS {
            let a = tail[i % k];
            let qn = a as u128 * q + q_prev;
            q_prev = q;
            q = qn;
            out.push(a);
            i += 1;
        }
    }
    out
}

/// Last convergent of the fractional part with denominator under the limit.
/// Returns `(p, q, exact)` where `exact` means the fraction equals the number.
fn fractional_convergent(quotients: &[u64], finite: bool) -> (u128, u128, bool) {
    let (mut p_prev, mut q_prev): (u128, u128) = (1, 0);
    let (mut p, mut q): (u128, u128) = (0, 1);
    let mut exact = finite;
    for &a in quotients.iter().skip(1) {
        let a = a as u128;
        let pn = a.saturating_mul(p).saturating_add(p_prev);
        let qn = a.saturating_mul(q).saturating_add(q_prev);
        if q > 1 && qn > CF_DENOMINATOR_LIMIT {
            exact = false;
            break;
        }
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
    }
    (p, q, exact)
}

fn float_quotients(hi: f64, lo: f64) -> Vec<u64> {
    let mut out = vec![0];
    let mut x = hi + lo;
    for _ in 0..40 {
        if x.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / x;
        let a = inv.floor();
        if !a.is_finite() || a > 1e15 {
            break;
        }
        out.push(a as u64);
        x = inv - a;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiophantineParams {
    pub c: f64,
    pub tau: f64,
    /// Small-divisor exponent; defaults to `2 + tau`.
    pub sigma: Option<f64>,
}

impl DiophantineParams {
    pub fn new(c: f64, tau: f64) -> Result<Self> {
        if !(c > 0.0) || !(tau >= 0.0) {
            return Err(Error::precondition(
                "rotation",
                format!("Diophantine parameters need c > 0 and tau >= 0 (got c = {c}, tau = {tau})"),
            ));
        }
        Ok(Self { c, tau, sigma: None })
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(2.0 + self.tau)
    }

    /// `1/(4c)`: the constant implied by `||n alpha|| >= c/|n|^{1+tau}` and `|e^{2 pi i x} - 1| >= 4||x||`.
    pub fn implied_constant(&self) -> f64 {
        1.0 / (4.0 * self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub worst_n: i64,
    /// Smallest `C` with `1/|e^{2 pi i n alpha} - 1| <= C |n|^sigma` for all scanned `n`.
    pub empirical_constant: f64,
    pub implied_constant: f64,
    pub sigma: f64,
    pub n_max: u64,
    pub pass: bool,
}

/// Scans `0 < |n| <= n_max` (positive `n` suffice by conjugate symmetry).
pub fn diophantine_check(
    alpha: &RotationNumber,
    params: &DiophantineParams,
    n_max: u64,
) -> Result<DiophantineReport> {
    if n_max < 1 {
        return Err(Error::precondition("rotation", "n_max must be >= 1"));
    }
    alpha.require_irrational()?;
    let sigma = params.sigma();
    let mut worst_n = 1;
    let mut worst = 0.0f64;
    for n in 1..=n_max as i64 {
        let d = alpha.small_divisor(n)?.norm();
        if d == 0.0 {
            return Err(Error::Resonance { n });
        }
        let ratio = 1.0 / (d * (n as f64).powf(sigma));
        if ratio > worst {
            worst = ratio;
            worst_n = n;
        }
    }
    let implied = params.implied_constant();
    Ok(DiophantineReport {
        worst_n,
        empirical_constant: worst,
        implied_constant: implied,
        sigma,
        n_max,
        pass: worst.is_finite() && worst <= implied,
    })
}

/// `lambda = e^{2 pi i p/q}` with `gcd(p, q) = 1`; `q = 1` is the parabolic multiplier 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootOfUnity {
    pub p: i64,
    pub q: u64,
}

impl RootOfUnity {
    pub const ONE: RootOfUnity = RootOfUnity { p: 0, q: 1 };

    pub fn new(p: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::precondition("rotation", "root of unity needs q >= 1"));
        }
        let p = p.rem_euclid(q as i64);
        if gcd(p.unsigned_abs(), q) != 1 && q != 1 {
            return Err(Error::precondition(
                "rotation",
                format!("root of unity needs gcd(p, q) = 1 (p = {p}, q = {q})"),
            ));
        }
        Ok(Self { p: if q == 1 { 0 } else { p }, q })
    }

    pub fn is_one(&self) -> bool {
        self.q == 1
    }

    pub fn value(&self) -> Complex64 {
        if self.q == 1 {
            return Complex64::new(1.0, 0.0);
        }
        if 2 * self.p == self.q as i64 {
            return Complex64::new(-1.0, 0.0);
        }
        Complex64::from_polar(1.0, TAU * self.p as f64 / self.q as f64)
    }

    pub fn pow(&self, n: i64) -> Self {
        let q = self.q as i64;
        let num = (self.p * n).rem_euclid(q);
        let g = gcd(num.unsigned_abs(), self.q).max(1);
        let q2 = self.q / g;
        if q2 == 1 {
            Self::ONE
        } else {
            Self { p: num / g as i64, q: q2 }
        }
    }
}

impl Default for RootOfUnity {
    fn default() -> Self {
        Self::ONE
    }
}
