//! Siegel majorants for the formal linearization: the sequences `eps, mu, theta, tau, gamma`,
//! the bounds relating them, the strip-loss schedule `d_k, delta_k` and the certificate
//! `||h_k||_{delta_k} <= gamma_k` for a concrete reduction run.
//!
//! `theta_k` and `gamma_k` overflow `f64` quickly, so every sequence is stored as a natural log.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::cohomology::{power_sum_constant, strip_loss_constant};
use crate::error::{Error, Result};
use crate::fibredjet::FibredJet;
use crate::reduction::{classify, ClassifyOptions, ReductionTrace, Scheme, Tolerances, Verdict};
use crate::rotation::{diophantine_check, DiophantineParams, RootOfUnity};

/// `3 - 2 sqrt 2`, the radius of convergence of `sum tau_k z^k`.
pub const TAU_RADIUS: f64 = 0.171_572_875_253_809_9;

/// Relative slack for comparing quantities that are equal in exact arithmetic.
const ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiegelSequences {
    pub nu: f64,
    /// `eps[n - 1] = eps_n`, `n = 1..K-1`.
    pub eps: Vec<f64>,
    /// `ln mu_k`, `ln theta_k`, `ln tau_k`, `ln gamma_k` at index `k - 1`; `mu_1` is 0 by convention.
    pub ln_mu: Vec<f64>,
    pub ln_theta: Vec<f64>,
    pub ln_tau: Vec<f64>,
    pub ln_gamma: Vec<f64>,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln of sum over compositions r_1 + ... + r_j = k, j >= 2` of `prod x_{r_i}`, for every `k`,
/// given `ln x_k = ln weight_{k} + that sum` (`x_1 = 1`).
///
/// With `U = G/(1 - G)`, `U_k = x_k + S_k` and `S_k = sum_{r<k} x_r U_{k-r}`.
fn composition_sums(k_max: usize, ln_weight: impl Fn(usize) -> f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; k_max];
    let mut u = vec![0.0; k_max];
    let mut s = vec![f64::NEG_INFINITY; k_max];
    for k in 2..=k_max {
        let mut acc = f64::NEG_INFINITY;
        for r in 1..k {
            acc = log_add(acc, x[r - 1] + u[k - r - 1]);
        }
        s[k - 1] = acc;
        x[k - 1] = ln_weight(k) + acc;
        u[k - 1] = log_add(x[k - 1], acc);
    }
    (x, s)
}

/// `eps_n = (2n)^nu` for `n = 1..k_max-1`, the largest admissible sequence.
pub fn critical_epsilon(nu: f64, k_max: usize) -> Vec<f64> {
    (1..k_max).map(|n| (2.0 * n as f64).powf(nu)).collect()
}

/// Builds the sequences up to `K = k_max` from `eps_n`, `n = 1..K-1`.
///
/// The condition is checked as `eps_n <= (2n)^nu`: the schedule produces equality.
pub fn build_sequences(nu: f64, eps: &[f64], k_max: usize) -> Result<SiegelSequences> {
    if !(nu > 0.0) {
        return Err(Error::precondition("siegel", format!("nu must be positive (got {nu})")));
    }
    if k_max == 0 {
        return Err(Error::precondition("siegel", "K must be >= 1"));
    }
    if eps.len() + 1 < k_max {
        return Err(Error::precondition(
            "siegel",
            format!("need eps_1..eps_{} (got {})", k_max - 1, eps.len()),
        ));
    }
    for (i, e) in eps.iter().take(k_max - 1).enumerate() {
        let n = i + 1;
        let cap = (2.0 * n as f64).powf(nu);
        if !(*e > 0.0) || *e > cap * (1.0 + ROUNDING) {
            return Err(Error::EpsilonCondition { n, value: *e });
        }
    }
    let eps: Vec<f64> = eps[..k_max - 1].to_vec();
    let ln_eps = |k: usize| eps[k - 2].ln();

    // mu_k: best product over partitions into >= 2 parts, via best[m] over all partitions of m
    let mut ln_theta = vec![0.0; k_max];
    let mut ln_mu = vec![0.0; k_max];
    let mut best = vec![0.0; k_max];
    for k in 2..=k_max {
        let mu = (1..k)
            .map(|r| ln_theta[r - 1] + best[k - r - 1])
            .fold(f64::NEG_INFINITY, f64::max);
        ln_mu[k - 1] = mu;
        ln_theta[k - 1] = ln_eps(k) + mu;
        best[k - 1] = ln_theta[k - 1].max(mu);
    }

    let (ln_tau, _) = composition_sums(k_max, |_| 0.0);
    let (ln_gamma, _) = composition_sums(k_max, ln_eps);
    Ok(SiegelSequences {
        nu,
        eps,
        ln_mu,
        ln_theta,
        ln_tau,
        ln_gamma,
    })
}

impl SiegelSequences {
    pub fn len(&self) -> usize {
        self.ln_tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_tau.is_empty()
    }

    pub fn theta(&self, k: usize) -> f64 {
        self.ln_theta[k - 1].exp()
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.ln_tau[k - 1].exp()
    }

    pub fn gamma(&self, k: usize) -> f64 {
        self.ln_gamma[k - 1].exp()
    }
}

/// `ln(k^{-2 nu} 2^{(5 nu + 1)(k - 1)})`.
pub fn theta_ln_bound(nu: f64, k: usize) -> f64 {
    -2.0 * nu * (k as f64).ln() + (5.0 * nu + 1.0) * (k as f64 - 1.0) * LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub holds: bool,
    pub checked: usize,
    /// Order with the smallest `ln(rhs) - ln(lhs)`.
    pub worst_k: usize,
    pub worst_ln_margin: f64,
}

fn inequality(k_max: usize, ln_lhs: impl Fn(usize) -> f64, ln_rhs: impl Fn(usize) -> f64) -> InequalityCheck {
    let mut worst_k = 1;
    let mut worst = f64::INFINITY;
    for k in 1..=k_max {
        let (l, r) = (ln_lhs(k), ln_rhs(k));
        let margin = r - l;
        if margin < worst {
            worst = margin;
            worst_k = k;
        }
    }
    InequalityCheck {
        holds: worst >= -ROUNDING * (1.0 + ln_rhs(worst_k).abs()),
        checked: k_max,
        worst_k,
        worst_ln_margin: worst,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusEstimate {
    pub target: f64,
    /// `tau_K^{-1/K}`.
    pub root: f64,
    /// `tau_{K-1} / tau_K`.
    pub ratio: f64,
    /// Least-squares fit of `ln tau_k^{-1/k} = a + b ln(k)/k + c/k` over `k in [K/2, K]`, as `e^a`.
    pub extrapolated: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub theta_bound: InequalityCheck,
    pub tau_radius: Option<RadiusEstimate>,
    pub gamma_bound: InequalityCheck,
    /// `ln((3 - 2 sqrt 2) 2^{-5 nu - 1})`, the closed lower bound for the radius of `sum gamma_k z^k`.
    pub ln_gamma_radius_bound: f64,
    /// `gamma_K^{-1/K}`.
    pub gamma_root_estimate: f64,
}

fn solve3(m: [[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        let mut mi = m;
        for r in 0..3 {
            mi[r][i] = v[r];
        }
        *o = det(mi) / d;
    }
    out
}

/// Radius estimates for `sum tau_k z^k` from `tau_1..tau_K`.
pub fn tau_radius(ln_tau: &[f64]) -> Option<RadiusEstimate> {
    let k_max = ln_tau.len();
    if k_max < 8 {
        return None;
    }
    let root = (-ln_tau[k_max - 1] / k_max as f64).exp();
    let ratio = (ln_tau[k_max - 2] - ln_tau[k_max - 1]).exp();
    let mut m = [[0.0; 3]; 3];
    let mut v = [0.0; 3];
    for k in (k_max / 2)..=k_max {
        let kf = k as f64;
        let basis = [1.0, kf.ln() / kf, 1.0 / kf];
        let y = -ln_tau[k - 1] / kf;
        for i in 0..3 {
            v[i] += basis[i] * y;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let extrapolated = solve3(m, v)[0].exp();
    Some(RadiusEstimate {
        target: TAU_RADIUS,
        root,
        ratio,
        extrapolated,
        relative_error: (extrapolated - TAU_RADIUS).abs() / TAU_RADIUS,
    })
}

pub fn verify_bounds(seqs: &SiegelSequences) -> BoundsReport {
    let k_max = seqs.len();
    let nu = seqs.nu;
    let theta_bound = inequality(k_max, |k| seqs.ln_theta[k - 1], |k| theta_ln_bound(nu, k));
    let gamma_bound = inequality(k_max, |k| seqs.ln_gamma[k - 1], |k| seqs.ln_theta[k - 1] + seqs.ln_tau[k - 1]);
    BoundsReport {
        theta_bound,
        tau_radius: tau_radius(&seqs.ln_tau),
        gamma_bound,
        ln_gamma_radius_bound: TAU_RADIUS.ln() - (5.0 * nu + 1.0) * LN_2,
        gamma_root_estimate: (-seqs.ln_gamma[k_max - 1] / k_max as f64).exp(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerSumCheck {
    pub s: f64,
    pub x: f64,
    pub terms: usize,
    pub sum: f64,
    /// `Gamma(s + 1) / (1 - x)^{s + 1}`.
    pub bound: f64,
    pub holds: bool,
}

/// `sum_{n <= terms} x^n n^s` against `Gamma(s + 1)/(1 - x)^{s + 1}`.
pub fn power_sum_check(s: f64, x: f64, terms: usize) -> Result<PowerSumCheck> {
    if !(s > 0.0) || !(x > 0.0 && x < 1.0) {
        return Err(Error::precondition("siegel", format!("need s > 0 and x in (0, 1) (got s = {s}, x = {x})")));
    }
    let mut sum = 0.0;
    let mut xn = 1.0;
    for n in 0..=terms {
        sum += xn * (n as f64).powf(s);
        xn *= x;
        if xn == 0.0 {
            break;
        }
    }
    let bound = power_sum_constant(s) / (1.0 - x).powf(s + 1.0);
    Ok(PowerSumCheck {
        s,
        x,
        terms,
        sum,
        bound,
        holds: sum <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub delta: f64,
    pub c: f64,
    pub tau: f64,
    pub nu: u32,
    /// `d_k` at index `k - 2`, `k = 2..K`.
    pub d: Vec<f64>,
    /// `delta_k` at index `k - 1`, `k = 1..K`.
    pub deltas: Vec<f64>,
    /// `eps_n = C n / d_{n+1}^{3 + tau}` at index `n - 1`.
    pub eps: Vec<f64>,
    pub partial_sum: f64,
    /// Integral bound on `sum_{k > K} d_k`.
    pub tail_bound: f64,
}

fn d_k(c: f64, tau: f64, nu: f64, k: usize) -> f64 {
    let m = (k - 1) as f64;
    (c * m / (2.0 * m).powf(nu)).powf(1.0 / (3.0 + tau))
}

/// `sum_{k > K} d_k <= A (K^{-p} + K^{1-p}/(p - 1))` with `d_k = A (k-1)^{-p}`; infinite when `p <= 1`.
fn series_tail(c: f64, tau: f64, nu: f64, k_max: usize) -> f64 {
    let p = (nu - 1.0) / (3.0 + tau);
    if p <= 1.0 {
        return f64::INFINITY;
    }
    let a = (c / 2f64.powf(nu)).powf(1.0 / (3.0 + tau));
    let k = k_max.max(1) as f64;
    a * (k.powf(-p) + k.powf(1.0 - p) / (p - 1.0))
}

/// Largest `nu` tried by the schedule search.
pub const NU_SEARCH_MAX: u32 = 200;

/// The strip-loss schedule. With `nu = None` the smallest integer `nu` in `1..=NU_SEARCH_MAX`
/// making `sum_{k >= 2} d_k < delta/2` (tail by integral comparison) is used.
pub fn schedule(delta: f64, c: f64, tau: f64, nu: Option<u32>, k_max: usize) -> Result<Schedule> {
    if !(delta > 0.0) || !(c > 0.0) || !(tau >= 0.0) || k_max == 0 {
        return Err(Error::precondition(
            "siegel",
            format!("schedule needs delta > 0, C > 0, tau >= 0, K >= 1 (got {delta}, {c}, {tau}, {k_max})"),
        ));
    }
    let admissible = |nu: u32| {
        let nf = nu as f64;
        let partial: f64 = (2..=k_max).map(|k| d_k(c, tau, nf, k)).sum();
        let tail = series_tail(c, tau, nf, k_max);
        (partial + tail < delta / 2.0).then_some((partial, tail))
    };
    let (nu, (partial_sum, tail_bound)) = match nu {
        Some(n) => (n, admissible(n).ok_or(Error::NoAdmissibleNu { lo: n, hi: n })?),
        None => (1..=NU_SEARCH_MAX)
            .find_map(|n| admissible(n).map(|v| (n, v)))
            .ok_or(Error::NoAdmissibleNu {
                lo: 1,
                hi: NU_SEARCH_MAX,
            })?,
    };
    let nf = nu as f64;
    let d: Vec<f64> = (2..=k_max).map(|k| d_k(c, tau, nf, k)).collect();
    let mut deltas = vec![delta];
    for dk in &d {
        let last = *deltas.last().unwrap_or(&delta);
        deltas.push(last - dk);
    }
    let eps = d
        .iter()
        .enumerate()
        .map(|(i, dk)| c * (i + 1) as f64 / dk.powf(3.0 + tau))
        .collect();
    Ok(Schedule {
        delta,
        c,
        tau,
        nu,
        d,
        deltas,
        eps,
        partial_sum,
        tail_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateEntry {
    pub k: usize,
    pub delta_k: f64,
    pub h_norm: f64,
    pub ln_gamma: f64,
    pub pass: bool,
}

/// Compares the recorded `strip_norm(h_k, delta_k)` with `gamma_k`.
pub fn certify_trace(trace: &ReductionTrace, seqs: &SiegelSequences) -> Result<Vec<CertificateEntry>> {
    let mut out = vec![CertificateEntry {
        k: 1,
        delta_k: f64::NAN,
        h_norm: 1.0,
        ln_gamma: 0.0,
        pass: true,
    }];
    for r in &trace.records {
        if r.k > seqs.len() {
            break;
        }
        let (Some(delta_k), Some(h_norm)) = (r.delta, r.h_strip_norm) else {
            return Err(Error::precondition(
                "siegel",
                format!("reduction record at order {} has no strip norm attached", r.k),
            ));
        };
        let ln_gamma = seqs.ln_gamma[r.k - 1];
        out.push(CertificateEntry {
            k: r.k,
            delta_k,
            h_norm,
            ln_gamma,
            pass: h_norm == 0.0 || h_norm.ln() <= ln_gamma,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateOptions {
    pub max_order: usize,
    pub delta: f64,
    /// Diophantine exponent `tau` (divisor exponent `2 + tau`).
    pub tau: f64,
    pub nu: Option<u32>,
    /// Strip-loss constant `C` of `||h||_{delta - d} <= C ||g||_delta / d^{3 + tau}`; computed from the empirical Diophantine constant when `None`.
    pub c: Option<f64>,
    pub divisor_scan: u64,
    pub tolerances: Tolerances,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            max_order: 12,
            delta: 0.5,
            tau: 0.0,
            nu: None,
            c: None,
            divisor_scan: 1000,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    /// `a = max_j ||a_j||_delta^{1/(j-1)}`; the map is conjugated by `z -> a z` so `||a_j||_delta <= 1`.
    pub scale: f64,
    pub strip_loss_constant: f64,
    pub diophantine_constant: f64,
    pub schedule: Schedule,
    pub sequences: SiegelSequences,
    pub verdict: Verdict,
    pub trace: ReductionTrace,
    pub entries: Vec<CertificateEntry>,
    /// Largest `|mean|` met by the reduction, relative to its tolerance.
    pub worst_mean_ratio: f64,
    pub well_conditioned: bool,
    pub all_pass: bool,
}

/// `a = max_j ||a_j||_delta^{1/(j-1)}` (1 when every coefficient vanishes).
pub fn rescale_factor(f: &FibredJet, delta: f64) -> f64 {
    let a = (2..=f.truncation())
        .map(|j| f.coeff(j).strip_norm(delta).powf(1.0 / (j - 1) as f64))
        .fold(0.0, f64::max);
    if a > 0.0 {
        a
    } else {
        1.0
    }
}

/// `a F(theta, z / a)`: coefficient `a_j` becomes `a_j a^{1-j}`.
pub fn rescale(f: &FibredJet, a: f64) -> Result<FibredJet> {
    let mut g = FibredJet::new(
        f.alpha().clone(),
        RootOfUnity::ONE,
        f.truncation(),
        (2..=f.truncation()).map(|j| (j, f.coeff(j).scale(Complex64::new(a.powi(1 - j as i32), 0.0)))),
    )?;
    g.annotate(format!("rescale z -> {a} z"));
    Ok(g)
}

/// Rescales, runs the formal reduction to `max_order`, builds the schedule and sequences and
/// compares `||h_k||_{delta_k}` with `gamma_k` order by order.
pub fn h_norm_certificate(f: &FibredJet, opts: &CertificateOptions) -> Result<Certificate> {
    if !f.multiplier().is_one() {
        return Err(Error::precondition("siegel", "certificate needs multiplier 1"));
    }
    let k_max = opts.max_order.min(f.truncation());
    let params = DiophantineParams::new(1.0, opts.tau)?;
    let dio = diophantine_check(f.alpha(), &params, opts.divisor_scan)?;
    let c = opts
        .c
        .unwrap_or_else(|| strip_loss_constant(dio.empirical_constant, dio.sigma, opts.delta));
    let sched = schedule(opts.delta, c, opts.tau, opts.nu, k_max)?;
    let seqs = build_sequences(sched.nu as f64, &sched.eps, k_max)?;
    let scale = rescale_factor(f, opts.delta);
    let g = rescale(f, scale)?;
    let cl = classify(
        &g,
        &ClassifyOptions {
            max_order: k_max,
            tolerances: opts.tolerances,
            scheme: Scheme::Formal,
            ..ClassifyOptions::default()
        },
    )?;
    let mut trace = cl.trace;
    trace.attach_schedule(&sched.deltas[1..]);
    let entries = certify_trace(&trace, &seqs)?;
    let worst_mean_ratio = trace
        .records
        .iter()
        .map(|r| r.rhs_mean.norm() / r.tolerance)
        .fold(0.0, f64::max);
    let well_conditioned = trace.records.iter().all(|r| r.warnings.is_empty());
    let all_pass = entries.iter().all(|e| e.pass);
    Ok(Certificate {
        scale,
        strip_loss_constant: c,
        diophantine_constant: dio.empirical_constant,
        schedule: sched,
        sequences: seqs,
        verdict: cl.verdict,
        trace,
        entries,
        worst_mean_ratio,
        well_conditioned,
        all_pass,
    })
}
