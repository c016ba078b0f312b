//! The map in the folded coordinate `w = z^n`.
//!
//! For `f(z) = z (1 + a_{n+1} z^n + ...)` one gets `w -> w E(theta, z)` with
//! `E = (f(z)/z)^n = 1 + n a_{n+1} z^n + ...`. Terms `z^i` with `n` not dividing `i` are fractional
//! powers of `w`; they are kept and the jet is a genuine power series in `w` only when they vanish.

use num_complex::Complex64;

use super::{series, FibredJet, DUST};
use crate::error::{Error, Result};
use crate::rotation::{RootOfUnity, RotationNumber};
use crate::trigpoly::TrigPoly;

#[derive(Debug, Clone, PartialEq)]
pub struct FoldedJet {
    alpha: RotationNumber,
    n: usize,
    /// `e[i]` is the coefficient of `z^i` in `E`, `i = 0..=N-1`.
    e: Vec<TrigPoly>,
}

impl FoldedJet {
    pub(crate) fn new(f: &FibredJet, n: usize) -> Result<Self> {
        let order = f.truncation();
        if n == 0 || n >= order {
            return Err(Error::precondition(
                "fibredjet",
                format!("power fold needs 1 <= n < N (n = {n}, N = {order})"),
            ));
        }
        if !f.multiplier().is_one() {
            return Err(Error::precondition("fibredjet", "power fold needs multiplier 1"));
        }
        let tol = DUST * f.scale();
        for j in 2..=n {
            let size = f.coeff(j).strip_norm(0.0);
            if size > tol {
                return Err(Error::precondition(
                    "fibredjet",
                    format!("power fold with n = {n} needs a_{j} = 0 (strip norm {size:.3e})"),
                ));
            }
        }
        let mut u = series::zeros(order - 1);
        u[0] = TrigPoly::constant(1.0);
        for j in (n + 1)..=order {
            u[j - 1] = f.coeff(j);
        }
        let e = series::pow(&u, n as u32, order - 1);
        Ok(Self {
            alpha: f.alpha().clone(),
            n,
            e,
        })
    }

    pub fn alpha(&self) -> &RotationNumber {
        &self.alpha
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of `z^i` in `E = g(w)/w`.
    pub fn e(&self, i: usize) -> TrigPoly {
        self.e.get(i).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> &[TrigPoly] {
        &self.e
    }

    /// Coefficient `n a_{n+1}` of `w^2`.
    pub fn leading(&self) -> TrigPoly {
        self.e(self.n)
    }

    /// `g(w)` with `w = z^n`, evaluated from the `z` coordinate.
    pub fn eval_from_z(&self, theta: f64, z: Complex64) -> Complex64 {
        z.powu(self.n as u32) * series::eval(&self.e, theta, z)
    }

    /// True when every fractional-power term is below `tol`.
    pub fn is_integral(&self, tol: f64) -> bool {
        self.e
            .iter()
            .enumerate()
            .all(|(i, p)| i % self.n == 0 || p.strip_norm(0.0) <= tol)
    }

    /// The integral part as a jet in `w`: coefficient of `w^{1+m}` is `e_{mn}`.
    pub fn to_fibred(&self) -> Result<FibredJet> {
        let top = (self.e.len() - 1) / self.n;
        let order = (top + 1).max(2);
        let mut out = FibredJet::new(
            self.alpha.clone(),
            RootOfUnity::ONE,
            order,
            (1..=top).map(|m| (m + 1, self.e[m * self.n].clone())),
        )?;
        out.history.push(format!("power fold n = {}", self.n));
        Ok(out)
    }
}
