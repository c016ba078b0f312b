//! Truncated power series in one variable with [`TrigPoly`] coefficients.
//!
//! Index `j` of a slice holds the coefficient of `z^j`. Every routine takes the
//! truncation order explicitly and returns exactly `order + 1` coefficients.

use num_complex::Complex64;

use crate::rotation::RotationNumber;
use crate::trigpoly::TrigPoly;

pub(crate) fn zeros(order: usize) -> Vec<TrigPoly> {
    vec![TrigPoly::zero(); order + 1]
}

fn get(s: &[TrigPoly], j: usize) -> Option<&TrigPoly> {
    s.get(j).filter(|p| !p.is_zero())
}

pub(crate) fn mul(a: &[TrigPoly], b: &[TrigPoly], order: usize) -> Vec<TrigPoly> {
    let mut out = zeros(order);
    for (i, x) in a.iter().enumerate().take(order + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            if y.is_zero() {
                continue;
            }
            out[i + j] += &x.mul(y);
        }
    }
    out
}

/// `outer(inner(z))`; `inner` must have no constant term.
pub(crate) fn compose(outer: &[TrigPoly], inner: &[TrigPoly], order: usize) -> Vec<TrigPoly> {
    debug_assert!(inner.first().is_none_or(|p| p.is_zero()));
    let top = outer.len().min(order + 1);
    let mut acc = zeros(order);
    for j in (0..top).rev() {
        acc = mul(&acc, inner, order);
        if let Some(c) = get(outer, j) {
            acc[0] += c;
        }
    }
    acc
}

/// Compositional inverse of `f = lambda z + ...` with constant `lambda != 0`.
pub(crate) fn reversion(f: &[TrigPoly], lambda: Complex64, order: usize) -> Vec<TrigPoly> {
    let mut g = zeros(order);
    if order >= 1 {
        g[1] = TrigPoly::constant(1.0 / lambda);
    }
    for m in 2..=order {
        let comp = compose(f, &g, m);
        let err = &comp[m];
        if !err.is_zero() {
            g[m] = err.scale(-1.0 / lambda);
        }
    }
    g
}

/// `1 / (1 + w)` for `w` with no constant term.
pub(crate) fn reciprocal_one_plus(w: &[TrigPoly], order: usize) -> Vec<TrigPoly> {
    let mut v = zeros(order);
    v[0] = TrigPoly::constant(1.0);
    for m in 1..=order {
        let mut acc = TrigPoly::zero();
        for i in 1..=m {
            if let (Some(wi), Some(vm)) = (get(w, i), get(&v, m - i)) {
                acc += &wi.mul(vm);
            }
        }
        v[m] = -acc;
    }
    v
}

pub(crate) fn pow(s: &[TrigPoly], k: u32, order: usize) -> Vec<TrigPoly> {
    let mut out = zeros(order);
    out[0] = TrigPoly::constant(1.0);
    for _ in 0..k {
        out = mul(&out, s, order);
    }
    out
}

/// Coefficient-wise `theta -> p(theta + alpha)`.
pub(crate) fn rotate(s: &[TrigPoly], alpha: &RotationNumber) -> Vec<TrigPoly> {
    s.iter().map(|p| p.rotate(alpha)).collect()
}

/// Numeric evaluation `sum_j s_j(theta) z^j`.
pub(crate) fn eval(s: &[TrigPoly], theta: f64, z: Complex64) -> Complex64 {
    s.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, p| acc * z + p.eval(theta))
}
