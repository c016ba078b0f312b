//! The cohomological equation `c(theta + alpha) - c(theta) = -g(theta) + mean(g)`.
//!
//! For trigonometric-polynomial `g` and irrational `alpha` the solution is again a
//! trigonometric polynomial of the same degree, with modes
//! `c(n) = -g(n) / (e^{2 pi i n alpha} - 1)` and `c(0) = 0`.
//!
//! The reversed orientation `c(theta) - c(theta + alpha) = a(theta)` is the same
//! equation with `g = a`; callers negate or not, there is only one solver.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::rotation::RotationNumber;
use crate::trigpoly::TrigPoly;

/// Divisors smaller than this attach an ill-conditioning warning to the solution.
pub const DEFAULT_DIVISOR_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstDivisor {
    pub n: i64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohomSolution {
    /// Mean-zero solution.
    pub c: TrigPoly,
    /// The transported mean `mean(g)`.
    pub k: Complex64,
    pub worst_divisor: Option<WorstDivisor>,
    pub warnings: Vec<String>,
}

impl CohomSolution {
    pub fn is_well_conditioned(&self) -> bool {
        self.warnings.is_empty()
    }
}

pub fn solve_exact(g: &TrigPoly, alpha: &RotationNumber) -> Result<CohomSolution> {
    solve_exact_with_floor(g, alpha, DEFAULT_DIVISOR_FLOOR)
}

pub fn solve_exact_with_floor(
    g: &TrigPoly,
    alpha: &RotationNumber,
    divisor_floor: f64,
) -> Result<CohomSolution> {
    alpha.require_irrational()?;
    let mut worst: Option<WorstDivisor> = None;
    let mut warnings = Vec::new();
    let mut modes = Vec::new();
    for (n, gn) in g.modes() {
        if n == 0 {
            continue;
        }
        let d = alpha.small_divisor(n)?;
        let mag = d.norm();
        if worst.is_none_or(|w| mag < w.magnitude) {
            worst = Some(WorstDivisor { n, magnitude: mag });
        }
        if mag < divisor_floor {
            warnings.push(format!(
                "ill-conditioned divisor |e^(2 pi i n alpha) - 1| = {mag:e} at n = {n} (floor {divisor_floor:e})"
            ));
        }
        modes.push((n, -gn / d));
    }
    Ok(CohomSolution {
        c: TrigPoly::from_modes(modes),
        k: g.mean(),
        worst_divisor: worst,
        warnings,
    })
}

/// `sup_theta |c(theta + alpha) - c(theta) + g(theta) - k|` over `samples` equally spaced angles.
pub fn residual(sol: &CohomSolution, g: &TrigPoly, alpha: &RotationNumber, samples: usize) -> f64 {
    (0..samples)
        .map(|i| {
            let t = i as f64 / samples as f64;
            let lhs = sol.c.eval(t + alpha.value()) - sol.c.eval(t);
            (lhs + g.eval(t) - sol.k).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffReport {
    pub steps: u64,
    /// `max_{n <= N} |sum_{j<n} (g - mean g)(theta0 + j alpha)|`.
    pub max_abs_sum: f64,
    /// Log-log slope of the running maximum against `n`; near 0 for bounded sums.
    pub growth_exponent: f64,
}

/// Birkhoff sums of `g - mean(g)` along the orbit of `theta0`.
pub fn birkhoff_diagnostic(
    g: &TrigPoly,
    alpha: &RotationNumber,
    theta0: f64,
    steps: u64,
) -> Result<BirkhoffReport> {
    if steps < 1 {
        return Err(Error::precondition("cohomology", "need at least one Birkhoff step"));
    }
    let centred = g.without_mean();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut running_max = 0.0f64;
    let mut checkpoints = Vec::new();
    let mut next_checkpoint = 10u64;
    for j in 0..steps {
        sum += centred.eval(alpha.orbit_point(theta0, j as i64));
        running_max = running_max.max(sum.norm());
        let n = j + 1;
        if n == next_checkpoint || n == steps {
            checkpoints.push((n as f64, running_max));
            next_checkpoint = ((next_checkpoint as f64) * 1.5).ceil() as u64;
        }
    }
    Ok(BirkhoffReport {
        steps,
        max_abs_sum: running_max,
        growth_exponent: loglog_slope(&checkpoints),
    })
}

/// Least-squares slope of `ln y` against `ln x` (ignores non-positive values).
pub(crate) fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// `Gamma(s + 1)`: constant with `sum_{n>=0} x^n n^s <= C(s)/(1-x)^{s+1}` for `x` in `(0,1)`.
///
/// Follows from `n^s <= Gamma(n+1+s)/Gamma(n+1)` and the binomial series.
pub fn power_sum_constant(s: f64) -> f64 {
    gamma(s + 1.0)
}

/// Certified constant `C` in `||c||_{delta-d} <= C ||g||_delta / d^{1+sigma}` for `0 < d <= delta`.
///
/// Built from the empirical Diophantine constant `dio` (with exponent `sigma`) and the
/// power-sum constant; `kappa` lower-bounds `(1 - e^{-2 pi d})/d` on `(0, delta]`.
pub fn strip_loss_constant(dio: f64, sigma: f64, delta: f64) -> f64 {
    let kappa = (1.0 - (-std::f64::consts::TAU * delta).exp()) / delta;
    2.0 * dio * power_sum_constant(sigma) / kappa.powf(sigma + 1.0)
}
