//! Orbits of fibred maps on `T x C`, empirical petal verification and cylindrical cascades.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cohomology::{solve_exact, CohomSolution};
use crate::error::{Error, Result};
use crate::fibredjet::FibredJet;
use crate::petals::{
    boundary_exterior_direction, boundary_samples, in_omega_plus, petal_boundary, region_params, InfinityMap,
    InvariantRegionParams, PetalModel, RegionBudget, Side,
};
use crate::reduction::{Classification, Verdict};
use crate::rotation::RotationNumber;
use crate::trigpoly::TrigPoly;

pub const DEFAULT_CONVERGENCE: f64 = 1e-12;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1.0;
pub const DEFAULT_VALIDITY_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitStatus {
    ConvergedToCurve,
    Escaped,
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitOptions {
    pub max_steps: usize,
    pub convergence: f64,
    pub escape_radius: f64,
    pub validity_radius: f64,
    /// Keep every `record_every`-th iterate; 0 keeps only the seed and the last point.
    pub record_every: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            max_steps: 100_000,
            convergence: DEFAULT_CONVERGENCE,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
            validity_radius: DEFAULT_VALIDITY_RADIUS,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitTrace {
    pub theta0: f64,
    pub z0: Complex64,
    /// `(j, theta_j, z_j)`.
    pub iterates: Vec<(usize, f64, Complex64)>,
    pub steps: usize,
    pub last: Complex64,
    pub status: OrbitStatus,
}

/// Iterates `(theta, z) -> (theta + alpha, F_theta(z))` with `theta_j = theta_0 + j alpha` computed
/// afresh at each step.
pub fn iterate_orbit(f: &FibredJet, theta0: f64, z0: Complex64, opts: &OrbitOptions) -> Result<OrbitTrace> {
    if !(z0.norm() <= opts.validity_radius) {
        return Err(Error::precondition(
            "dynamics",
            format!("seed |z0| = {} outside the validity disk {}", z0.norm(), opts.validity_radius),
        ));
    }
    let ev = f.evaluator();
    let alpha = f.alpha();
    let mut iterates = vec![(0, theta0.rem_euclid(1.0), z0)];
    let mut z = z0;
    let mut status = OrbitStatus::Budget;
    let mut steps = 0;
    for j in 0..opts.max_steps {
        if z.norm() < opts.convergence {
            status = OrbitStatus::ConvergedToCurve;
            break;
        }
        if z.norm() > opts.escape_radius {
            status = OrbitStatus::Escaped;
            break;
        }
        z = ev.eval(alpha.orbit_point(theta0, j as i64), z);
        steps = j + 1;
        if !z.is_finite() {
            return Err(Error::NonFinite { step: steps });
        }
        if opts.record_every > 0 && steps % opts.record_every == 0 {
            iterates.push((steps, alpha.orbit_point(theta0, steps as i64), z));
        }
    }
    if status == OrbitStatus::Budget {
        if z.norm() < opts.convergence {
            status = OrbitStatus::ConvergedToCurve;
        } else if z.norm() > opts.escape_radius {
            status = OrbitStatus::Escaped;
        }
    }
    if iterates.last().map(|p| p.0) != Some(steps) {
        iterates.push((steps, alpha.orbit_point(theta0, steps as i64), z));
    }
    Ok(OrbitTrace {
        theta0,
        z0,
        iterates,
        steps,
        last: z,
        status,
    })
}

/// Writes `j,theta,re,im` rows.
pub fn write_orbit_csv<W: Write>(mut out: W, trace: &OrbitTrace) -> Result<()> {
    writeln!(out, "j,theta,re,im")?;
    for (j, t, z) in &trace.iterates {
        writeln!(out, "{j},{t},{:e},{:e}", z.re, z.im)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PetalOptions {
    pub seeds_per_sector: usize,
    pub seed_radius: f64,
    pub max_steps: usize,
    /// `|z|` below which an orbit counts as converged.
    pub target: f64,
    pub fibres: usize,
    pub boundary_samples: usize,
    pub seed: u64,
}

impl Default for PetalOptions {
    fn default() -> Self {
        Self {
            seeds_per_sector: 200,
            seed_radius: 0.02,
            max_steps: 100_000,
            target: 1e-6,
            fibres: 16,
            boundary_samples: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorStats {
    pub direction: Complex64,
    pub seeds: usize,
    pub converged: usize,
    pub fraction: f64,
    /// Largest final `|z|` among the seeds.
    pub worst_final: f64,
    /// Median final `|z|` times `(steps)^{1/n}`, the parabolic rate constant.
    pub median_rate_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PetalReport {
    pub petals: usize,
    pub iterate_of: u64,
    pub region: Option<InvariantRegionParams>,
    pub attracting: Vec<SectorStats>,
    pub repelling: Vec<SectorStats>,
    pub membership_samples: usize,
    pub membership_held: usize,
    pub membership_fraction: f64,
    /// Largest deviation (radians) of the boundary exterior direction from `arg k^{-1}`.
    pub exterior_deviation: f64,
    pub options: PetalOptions,
}

impl PetalReport {
    fn empty(options: PetalOptions) -> Self {
        Self {
            petals: 0,
            iterate_of: 1,
            region: None,
            attracting: vec![],
            repelling: vec![],
            membership_samples: 0,
            membership_held: 0,
            membership_fraction: 0.0,
            exterior_deviation: 0.0,
            options,
        }
    }

    pub fn min_attracting_fraction(&self) -> f64 {
        self.attracting.iter().map(|s| s.fraction).fold(1.0, f64::min)
    }
}

fn sector_seeds(directions: &[Complex64], n: usize, opts: &PetalOptions, salt: u64) -> Vec<(usize, f64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ salt);
    let half = PI / (2.0 * n as f64);
    let mut out = Vec::with_capacity(directions.len() * opts.seeds_per_sector);
    for (j, d) in directions.iter().enumerate() {
        for _ in 0..opts.seeds_per_sector {
            let phi: f64 = rng.gen_range(-half..half);
            let theta: f64 = rng.gen_range(0.0..1.0);
            out.push((j, theta, d * Complex64::from_polar(opts.seed_radius, phi)));
        }
    }
    out
}

fn sector_stats(f: &FibredJet, directions: &[Complex64], n: usize, opts: &PetalOptions, salt: u64) -> Result<Vec<SectorStats>> {
    let seeds = sector_seeds(directions, n, opts, salt);
    let orbit = OrbitOptions {
        max_steps: opts.max_steps,
        convergence: opts.target,
        escape_radius: DEFAULT_ESCAPE_RADIUS,
        validity_radius: DEFAULT_VALIDITY_RADIUS.max(opts.seed_radius),
        record_every: 0,
    };
    let finals: Vec<(usize, OrbitTrace)> = seeds
        .par_iter()
        .map(|(j, t, z)| iterate_orbit(f, *t, *z, &orbit).map(|tr| (*j, tr)))
        .collect::<Result<_>>()?;
    Ok(directions
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let mine: Vec<&OrbitTrace> = finals.iter().filter(|(s, _)| *s == j).map(|(_, t)| t).collect();
            let converged = mine.iter().filter(|t| t.status == OrbitStatus::ConvergedToCurve).count();
            let worst_final = mine.iter().map(|t| t.last.norm()).fold(0.0, f64::max);
            let mut rates: Vec<f64> = mine
                .iter()
                .map(|t| t.last.norm() * (t.steps.max(1) as f64).powf(1.0 / n as f64))
                .collect();
            rates.sort_by(f64::total_cmp);
            SectorStats {
                direction: *d,
                seeds: mine.len(),
                converged,
                fraction: converged as f64 / mine.len().max(1) as f64,
                worst_final,
                median_rate_constant: rates.get(rates.len() / 2).copied().unwrap_or(0.0),
            }
        })
        .collect())
}

/// Seeds each attracting sector (half-width `pi/(2n)` around the attracting direction) and iterates
/// `F` (or `F^q` for a root-of-unity multiplier); repelling sectors are seeded likewise and iterated
/// under the truncated inverse jet. One-step membership is sampled just inside `partial P^+`.
pub fn verify_petal(f: &FibredJet, classification: &Classification, opts: &PetalOptions) -> Result<PetalReport> {
    let Verdict::Flower { petals, .. } = classification.verdict else {
        return Ok(PetalReport::empty(*opts));
    };
    let q = f.multiplier().q;
    let dynamic = if q > 1 { f.iterate(q as usize)? } else { f.clone() };
    let model = PetalModel::from_classification(classification)?;
    let n = model.n();
    let sectors: Vec<_> = model.geometry.attracting.iter().map(|d| model.sector(*d)).collect();
    let maps: Vec<&dyn InfinityMap> = sectors.iter().map(|s| s as &dyn InfinityMap).collect();
    let region = region_params(&maps, &RegionBudget::default())?;

    let attracting = sector_stats(&dynamic, &model.geometry.attracting, n, opts, 0x5eed)?;
    let repelling = sector_stats(&dynamic.inverse(), &model.geometry.repulsive, n, opts, 0xbacc)?;

    let alpha = model.alpha();
    let pts = boundary_samples(region.a, opts.boundary_samples);
    let mut samples = 0;
    let mut held = 0;
    for fi in 0..opts.fibres {
        let theta = fi as f64 / opts.fibres as f64;
        let next = alpha.orbit_point(theta, 1);
        for d in &model.geometry.attracting {
            for zz in &pts {
                let z = model.from_petal(theta, *zz, *d);
                let image = model.to_petal(next, model.fibre_map(theta, z));
                samples += 1;
                if in_omega_plus(image, region.a) {
                    held += 1;
                }
            }
        }
    }

    let target = model.k().inv().arg();
    let mut exterior_deviation: f64 = 0.0;
    for fi in 0..opts.fibres {
        let theta = fi as f64 / opts.fibres as f64;
        for line in petal_boundary(&model, theta, Side::Attracting, region.a, 64)? {
            let dir = boundary_exterior_direction(&line, n);
            let dev = (dir * Complex64::from_polar(1.0, -target)).arg().abs();
            exterior_deviation = exterior_deviation.max(dev);
        }
    }

    Ok(PetalReport {
        petals,
        iterate_of: q,
        region: Some(region),
        attracting,
        repelling,
        membership_samples: samples,
        membership_held: held,
        membership_fraction: held as f64 / samples.max(1) as f64,
        exterior_deviation,
        options: *opts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationReport {
    pub q: u64,
    /// `image[j]` is the attracting sector of `F^q` reached from sector `j` by one step of `F`.
    pub image: Vec<usize>,
    /// Fraction of seeds agreeing with the majority image of their sector.
    pub agreement: f64,
    pub is_permutation: bool,
    /// Length of every cycle of the permutation.
    pub cycle_lengths: Vec<usize>,
}

/// For a multiplier `e^{2 pi i p/q}`: how one application of `F` moves the attracting sectors of `F^q`.
pub fn petal_permutation(f: &FibredJet, classification: &Classification, radius: f64, seeds: usize, seed: u64) -> Result<PermutationReport> {
    let model = PetalModel::from_classification(classification)?;
    let n = model.n();
    let geometry = &model.geometry;
    let opts = PetalOptions {
        seeds_per_sector: seeds,
        seed_radius: radius,
        seed,
        ..PetalOptions::default()
    };
    let ev = f.evaluator();
    let mut counts = vec![vec![0usize; n]; n];
    for (j, theta, z) in sector_seeds(&geometry.attracting, n, &opts, 0x9e37) {
        let w = ev.eval(theta, z);
        counts[j][geometry.sector_of(w)] += 1;
    }
    let mut image = Vec::with_capacity(n);
    let mut agree = 0;
    let mut total = 0;
    for row in &counts {
        let (best, c) = row.iter().enumerate().max_by_key(|(_, c)| **c).map(|(i, c)| (i, *c)).unwrap_or((0, 0));
        image.push(best);
        agree += c;
        total += row.iter().sum::<usize>();
    }
    let mut seen = vec![false; n];
    for &i in &image {
        seen[i] = true;
    }
    let is_permutation = seen.iter().all(|s| *s);
    let mut cycle_lengths = Vec::new();
    if is_permutation {
        let mut visited = vec![false; n];
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !visited[j] {
                visited[j] = true;
                j = image[j];
                len += 1;
            }
            cycle_lengths.push(len);
        }
    }
    Ok(PermutationReport {
        q: f.multiplier().q,
        image,
        agreement: agree as f64 / total.max(1) as f64,
        is_permutation,
        cycle_lengths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeWitness {
    pub theta: f64,
    pub z0: Complex64,
    pub n: usize,
    /// `Re G^n(Z_0) - Re Z_0 - n/2`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeReport {
    pub passed: bool,
    pub samples: usize,
    pub n_max: usize,
    pub c2: f64,
    pub failures: usize,
    /// Sample with the smallest margin.
    pub worst: Option<EscapeWitness>,
}

/// Checks `Re G^n(Z) > Re Z + n/2` for `n <= n_max` on orbits started at `Re Z_0 in (C_2, 3 C_2 + 1]`,
/// `|Im Z_0| <= 10 (C_2 + 1)`.
pub fn escape_check(map: &dyn InfinityMap, c2: f64, samples: usize, n_max: usize, seed: u64) -> EscapeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = 2.0 * c2 + 1.0;
    let seeds: Vec<(f64, Complex64)> = (0..samples)
        .map(|_| {
            let x = c2 + 1e-9 * c2.max(1.0) + span * rng.gen::<f64>();
            let y = 10.0 * (c2 + 1.0) * rng.gen_range(-1.0..1.0);
            (rng.gen::<f64>(), Complex64::new(x, y))
        })
        .collect();
    let alpha = map.alpha();
    let results: Vec<EscapeWitness> = seeds
        .par_iter()
        .map(|(theta, z0)| {
            let mut z = *z0;
            let mut worst = EscapeWitness {
                theta: *theta,
                z0: *z0,
                n: 0,
                margin: f64::INFINITY,
            };
            for n in 1..=n_max {
                z = map.step(alpha.orbit_point(*theta, n as i64 - 1), z);
                let margin = z.re - z0.re - n as f64 / 2.0;
                if !(margin >= worst.margin) {
                    worst.margin = margin;
                    worst.n = n;
                }
            }
            worst
        })
        .collect();
    let failures = results.iter().filter(|w| !(w.margin > 0.0)).count();
    let worst = results.into_iter().min_by(|a, b| a.margin.total_cmp(&b.margin));
    EscapeReport {
        passed: failures == 0,
        samples,
        n_max,
        c2,
        failures,
        worst,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CascadeVerdict {
    /// `a = c - c o R_alpha` with a trigonometric polynomial `c`.
    Integrable,
    /// Resonant base rotation: some mode of `a` has no divisor.
    Resonant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeOptions {
    pub steps: usize,
    /// Keep every `stride`-th point of the trace; 0 keeps none.
    pub stride: usize,
    /// Radius of the return ball in the `Z` direction.
    pub return_radius: f64,
    /// Radius of the return ball in the base.
    pub return_theta: f64,
    /// Direction onto which `Z_j - Z_0` is projected for the range diagnostic.
    pub projection: Complex64,
    pub mean_tolerance: f64,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        Self {
            steps: 100_000,
            stride: 100,
            return_radius: 0.1,
            return_theta: 0.01,
            projection: Complex64::new(1.0, 0.0),
            mean_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeReport {
    pub verdict: CascadeVerdict,
    pub steps: usize,
    pub sup_deviation: f64,
    /// `2 strip_norm(c, 0)`, the telescoping bound.
    pub bound: f64,
    pub within_bound: Option<bool>,
    /// `sup_j |W_j - W_0|` for `W = Z + c(theta)`.
    pub conjugate_drift: Option<f64>,
    /// `|Z_N - Z_0| / N`.
    pub birkhoff_slope: f64,
    pub projected_range: (f64, f64),
    pub returns: usize,
    pub first_return: Option<usize>,
    pub worst_divisor: Option<f64>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub trace: Vec<(usize, f64, Complex64)>,
}

/// Divisors below this produce a conditioning warning in the cascade diagnostics.
pub const CASCADE_DIVISOR_WARNING: f64 = 1e-6;

/// Iterates the cylindrical cascade `(theta, Z) -> (theta + alpha, Z + a(theta))`.
pub fn cascade_simulate(a: &TrigPoly, alpha: &RotationNumber, theta0: f64, z0: Complex64, opts: &CascadeOptions) -> Result<CascadeReport> {
    let tol = opts.mean_tolerance * a.strip_norm(0.0).max(1.0);
    if a.mean().norm() > tol {
        return Err(Error::precondition(
            "dynamics",
            format!("cascade needs mean(a) = 0 (|mean| = {:e})", a.mean().norm()),
        ));
    }
    let solution: Option<CohomSolution> = match solve_exact(a, alpha) {
        Ok(s) => Some(s),
        Err(Error::Resonance { .. }) | Err(Error::InvalidRotation(_)) => None,
        Err(e) => return Err(e),
    };
    let mut warnings = solution.as_ref().map(|s| s.warnings.clone()).unwrap_or_default();
    let worst_divisor = solution.as_ref().and_then(|s| s.worst_divisor.map(|w| w.magnitude));
    if let Some(w) = solution.as_ref().and_then(|s| s.worst_divisor) {
        if w.magnitude < CASCADE_DIVISOR_WARNING {
            warnings.push(format!(
                "small divisor |e^(2 pi i n alpha) - 1| = {:e} at n = {}: orbit bound enlarged to {:e}",
                w.magnitude,
                w.n,
                2.0 * solution.as_ref().map(|s| s.c.strip_norm(0.0)).unwrap_or(0.0)
            ));
        }
    }
    let c = solution.as_ref().map(|s| s.c.clone());
    let w0 = c.as_ref().map(|c| z0 + c.eval(theta0));
    let mut z = z0;
    let mut sup: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    let mut returns = 0;
    let mut first_return = None;
    let mut trace = Vec::new();
    let proj = opts.projection / opts.projection.norm().max(f64::MIN_POSITIVE);
    let t0 = theta0.rem_euclid(1.0);
    for j in 0..opts.steps {
        let theta = alpha.orbit_point(theta0, j as i64);
        z += a.eval(theta);
        let step = j + 1;
        let next = alpha.orbit_point(theta0, step as i64);
        let d = z - z0;
        sup = sup.max(d.norm());
        let p = (proj.conj() * d).re;
        lo = lo.min(p);
        hi = hi.max(p);
        if let (Some(c), Some(w0)) = (&c, w0) {
            drift = drift.max((z + c.eval(next) - w0).norm());
        }
        let dt = (next - t0).abs();
        if d.norm() < opts.return_radius && dt.min(1.0 - dt) < opts.return_theta {
            returns += 1;
            first_return.get_or_insert(step);
        }
        if opts.stride > 0 && step % opts.stride == 0 {
            trace.push((step, next, z));
        }
    }
    let bound = 2.0 * c.as_ref().map(|c| c.strip_norm(0.0)).unwrap_or(f64::INFINITY);
    Ok(CascadeReport {
        verdict: if solution.is_some() {
            CascadeVerdict::Integrable
        } else {
            CascadeVerdict::Resonant
        },
        steps: opts.steps,
        sup_deviation: sup,
        bound,
        within_bound: c.as_ref().map(|_| sup <= bound + 1e-6),
        conjugate_drift: c.as_ref().map(|_| drift),
        birkhoff_slope: (z - z0).norm() / opts.steps.max(1) as f64,
        projected_range: (lo, hi),
        returns,
        first_return,
        worst_divisor,
        warnings,
        trace,
    })
}

/// Writes `j,theta,re,im` rows of a cascade trace.
pub fn write_cascade_csv<W: Write>(mut out: W, report: &CascadeReport) -> Result<()> {
    writeln!(out, "j,theta,re,im")?;
    for (j, t, z) in &report.trace {
        writeln!(out, "{j},{t},{:e},{:e}", z.re, z.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibredjet::InfinityJet;
    use crate::models;
    use crate::reduction::{classify, ClassifyOptions};
    use crate::rotation::RootOfUnity;

    fn golden() -> RotationNumber {
        RotationNumber::golden_mean()
    }

    #[test]
    fn identity_orbit_is_constant() {
        let f = FibredJet::identity(golden(), 4).unwrap();
        let opts = OrbitOptions {
            max_steps: 1000,
            ..OrbitOptions::default()
        };
        let t = iterate_orbit(&f, 0.3, Complex64::new(0.1, 0.2), &opts).unwrap();
        assert_eq!(t.status, OrbitStatus::Budget);
        assert!(t.iterates.iter().all(|p| p.2 == Complex64::new(0.1, 0.2)));
        assert!(iterate_orbit(&f, 0.0, Complex64::new(0.9, 0.0), &opts).is_err());
    }

    #[test]
    fn scalar_axes() {
        let f = models::scalar_quadratic(golden(), 4).unwrap();
        let opts = OrbitOptions {
            max_steps: 10_000,
            record_every: 0,
            convergence: 1e-3,
            ..OrbitOptions::default()
        };
        let t = iterate_orbit(&f, 0.7, Complex64::new(-0.1, 0.0), &opts).unwrap();
        assert_eq!(t.status, OrbitStatus::ConvergedToCurve);
        let t = iterate_orbit(&f, 0.7, Complex64::new(0.1, 0.0), &opts).unwrap();
        assert_eq!(t.status, OrbitStatus::Escaped);
        let mut buf = Vec::new();
        write_orbit_csv(&mut buf, &t).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("j,theta,re,im\n0,"));
    }

    #[test]
    fn base_has_no_drift() {
        let a = golden();
        let exact = (0.25 + 1_000_000.0 * a.value()).rem_euclid(1.0);
        assert!((a.orbit_point(0.25, 1_000_000) - exact).abs() < 1e-9);
    }

    #[test]
    fn scalar_sector_converges() {
        let f = models::scalar_quadratic(golden(), 4).unwrap();
        let c = classify(&f, &ClassifyOptions::default()).unwrap();
        let opts = PetalOptions {
            seed_radius: 0.05,
            max_steps: 20_000,
            target: 1e-3,
            ..PetalOptions::default()
        };
        let r = verify_petal(&f, &c, &opts).unwrap();
        assert_eq!(r.attracting.len(), 1);
        assert_eq!(r.attracting[0].fraction, 1.0);
        assert_eq!(r.repelling[0].fraction, 1.0);
        assert!(r.membership_fraction >= 0.99);
        assert!(r.exterior_deviation < 1e-3);
    }

    #[test]
    fn identity_has_empty_report() {
        let f = FibredJet::identity(golden(), 4).unwrap();
        let c = classify(&f, &ClassifyOptions::default()).unwrap();
        let r = verify_petal(&f, &c, &PetalOptions::default()).unwrap();
        assert!(r.attracting.is_empty() && r.region.is_none());
    }

    #[test]
    fn escape_examples() {
        let plain = InfinityJet::new(golden(), Complex64::new(1.0, 0.0), TrigPoly::zero(), vec![]);
        let r = escape_check(&plain, 1.0, 64, 100, 1);
        assert!(r.passed);
        assert!((r.worst.unwrap().margin - 0.5).abs() < 1e-9);
        let g = InfinityJet::new(golden(), Complex64::new(1.0, 0.0), TrigPoly::zero(), vec![TrigPoly::constant(1.0)]);
        assert!(escape_check(&g, 20.0, 128, 100, 2).passed);
        let bad = InfinityJet::new(golden(), Complex64::new(1.0, 0.0), TrigPoly::zero(), vec![TrigPoly::constant(-5.0)]);
        let r = escape_check(&bad, 2.0, 128, 100, 3);
        assert!(!r.passed && r.failures > 0);
        assert!(r.worst.unwrap().margin <= 0.0);
    }

    #[test]
    fn cascade_sine_is_integrable() {
        let r = cascade_simulate(&TrigPoly::sin(), &golden(), 0.1, Complex64::new(0.0, 0.0), &CascadeOptions::default()).unwrap();
        assert_eq!(r.verdict, CascadeVerdict::Integrable);
        assert_eq!(r.within_bound, Some(true));
        assert!(r.conjugate_drift.unwrap() < 1e-9);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn cascade_zero_and_rejections() {
        let opts = CascadeOptions {
            steps: 100,
            ..CascadeOptions::default()
        };
        let r = cascade_simulate(&TrigPoly::zero(), &golden(), 0.0, Complex64::new(1.0, 1.0), &opts).unwrap();
        assert_eq!(r.sup_deviation, 0.0);
        assert!(cascade_simulate(&TrigPoly::constant(0.1), &golden(), 0.0, Complex64::new(0.0, 0.0), &opts).is_err());
    }

    #[test]
    fn cascade_huge_partial_quotient_warns() {
        let alpha = RotationNumber::from_continued_fraction(&[0, 1, 100_000_000, 1], Some(1)).unwrap();
        let opts = CascadeOptions {
            steps: 1000,
            ..CascadeOptions::default()
        };
        let r = cascade_simulate(&TrigPoly::sin(), &alpha, 0.0, Complex64::new(0.0, 0.0), &opts).unwrap();
        assert_eq!(r.verdict, CascadeVerdict::Integrable);
        assert!(!r.warnings.is_empty());
        assert!(r.bound > 1e6);
    }

    #[test]
    fn minus_one_multiplier_swaps_sectors() {
        let f = FibredJet::new(golden(), RootOfUnity::new(1, 2).unwrap(), 8, [(2, TrigPoly::constant(1.0))]).unwrap();
        let c = classify(&f, &ClassifyOptions::default()).unwrap();
        let petals = c.verdict.petals().unwrap();
        assert_eq!(petals % 2, 0);
        let p = petal_permutation(&f, &c, 0.01, 50, 7).unwrap();
        assert!(p.is_permutation);
        assert!(p.cycle_lengths.iter().all(|l| *l == 2));
        assert!(p.agreement >= 0.99);
    }
}
