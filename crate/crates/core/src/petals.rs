//! Geometry of the fibred flower.
//!
//! For a reduced map `z + a_{n+1}(theta) z^{n+1} + ...` with `k = mean(a_{n+1}) != 0` the petal
//! coordinate is `Z = (-1/z^n + c(theta)) / (n k)`, where `c(theta + alpha) - c(theta) = n k - n a_{n+1}`.
//! In `Z` the map is `Z + 1 + o(1)` and the petals are the pull-backs of the half-plane-like wedges
//! `Omega_A^+ = {x > A - |y|}` and `Omega_A^- = {x < -A + |y|}`.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::cohomology::solve_exact;
use crate::error::{Error, Result};
use crate::fibredjet::{FibredJet, InfinityJet, JetEvaluator};
use crate::reduction::{Classification, Verdict};
use crate::rotation::RotationNumber;
use crate::trigpoly::TrigPoly;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeadingData {
    pub n: usize,
    pub k: Complex64,
    pub r: f64,
    /// `arg k` in `[0, 2 pi)`.
    pub theta: f64,
}

impl LeadingData {
    pub fn new(n: usize, k: Complex64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Degenerate("petal count must be >= 1".into()));
        }
        if !(k.norm() > 0.0) || !k.is_finite() {
            return Err(Error::Degenerate(format!("leading mean k = {k} (no flower at this order)")));
        }
        Ok(Self {
            n,
            k,
            r: k.norm(),
            theta: k.arg().rem_euclid(TAU),
        })
    }

    pub fn from_classification(c: &Classification) -> Result<Self> {
        match &c.verdict {
            Verdict::Flower {
                petals, leading_mean, ..
            } => Self::new(*petals, *leading_mean),
            v => Err(Error::Degenerate(format!("classification has no flower: {v:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PetalGeometry {
    pub leading: LeadingData,
    /// Unit vectors where `k z^n` is real positive.
    pub repulsive: Vec<Complex64>,
    /// Unit vectors where `k z^n` is real negative, one per attracting sector.
    pub attracting: Vec<Complex64>,
    /// For `n = 1`, the direction of `k^{-1}`.
    pub exterior: Option<Complex64>,
}

/// Repulsive directions `e^{i(2 pi j - Theta)/n}` and the sectors between them.
pub fn repulsive_directions(k: Complex64, n: usize) -> Result<PetalGeometry> {
    let leading = LeadingData::new(n, k)?;
    let nf = n as f64;
    let dir = |phase: f64| Complex64::from_polar(1.0, (phase / nf).rem_euclid(TAU));
    let repulsive = (0..n).map(|j| dir(TAU * j as f64 - leading.theta)).collect();
    let attracting = (0..n).map(|j| dir(PI * (2 * j + 1) as f64 - leading.theta)).collect();
    let exterior = (n == 1).then(|| {
        let inv = k.inv();
        inv / inv.norm()
    });
    Ok(PetalGeometry {
        leading,
        repulsive,
        attracting,
        exterior,
    })
}

impl PetalGeometry {
    /// Index `j` of the open sector between repulsive directions `j` and `j + 1` containing `z`.
    /// Sector `j` contains attracting direction `j`.
    pub fn sector_of(&self, z: Complex64) -> usize {
        let n = self.leading.n as f64;
        let start = self.repulsive[0].arg();
        let rel = (z.arg() - start).rem_euclid(TAU);
        ((rel / (TAU / n)).floor() as usize).min(self.leading.n - 1)
    }

    /// Gap between consecutive repulsive directions, all equal to `2 pi / n`.
    pub fn gaps(&self) -> Vec<f64> {
        let n = self.repulsive.len();
        (0..n)
            .map(|j| (self.repulsive[(j + 1) % n].arg() - self.repulsive[j].arg()).rem_euclid(TAU))
            .map(|g| if g == 0.0 { TAU } else { g })
            .collect()
    }
}

/// A map near infinity in a petal coordinate, `Z -> Z + 1 + o(1)` over the base rotation.
pub trait InfinityMap: Sync {
    fn alpha(&self) -> &RotationNumber;

    /// Image of `Z` in fibre `theta` (landing in fibre `theta + alpha`).
    fn step(&self, theta: f64, z: Complex64) -> Complex64;

    /// Upper bound for `sup |step(theta, Z) - (Z + 1)|` over `|Z| >= radius`; infinite if none.
    fn tail_bound(&self, radius: f64) -> f64;

    /// Preimage of `y` (in fibre `theta + alpha`) under `step(theta, .)`.
    fn inverse_step(&self, theta: f64, y: Complex64) -> Complex64 {
        let mut w = y - 1.0;
        for _ in 0..200 {
            let d = y - self.step(theta, w);
            w += d;
            if d.norm() <= 1e-15 * (1.0 + w.norm()) {
                break;
            }
        }
        w
    }
}

impl InfinityMap for InfinityJet {
    fn alpha(&self) -> &RotationNumber {
        InfinityJet::alpha(self)
    }

    fn step(&self, theta: f64, z: Complex64) -> Complex64 {
        self.eval(theta, z)
    }

    fn tail_bound(&self, radius: f64) -> f64 {
        if radius <= 0.0 {
            return f64::INFINITY;
        }
        let mut acc = (self.k() - 1.0).norm() + self.drift().strip_norm(0.0);
        let mut p = 1.0;
        for b in self.tail() {
            p /= radius;
            acc += b.strip_norm(0.0) * p;
        }
        acc
    }
}

/// Petal coordinate of a reduced map with a flower of `n` petals.
#[derive(Debug, Clone)]
pub struct PetalModel {
    pub geometry: PetalGeometry,
    /// `n k`, the translation scale.
    pub nk: Complex64,
    /// Solution of `c(theta + alpha) - c(theta) = n k - n a_{n+1}(theta)`.
    pub c: TrigPoly,
    reduced: FibredJet,
    evaluator: JetEvaluator,
    c_norm: f64,
    a_norm: f64,
    higher_norms: Vec<(usize, f64)>,
    dust: f64,
}

impl PetalModel {
    /// Builds the model from a reduced map whose first nonzero coefficient is `a_{n+1}`.
    pub fn new(reduced: &FibredJet, n: usize) -> Result<Self> {
        if !reduced.multiplier().is_one() {
            return Err(Error::precondition("petals", "petal model needs multiplier 1"));
        }
        if n + 1 > reduced.truncation() {
            return Err(Error::TruncationExhausted {
                order: reduced.truncation(),
            });
        }
        let a = reduced.coeff(n + 1);
        let k = a.mean();
        let geometry = repulsive_directions(k, n)?;
        let nf = n as f64;
        let sol = solve_exact(&a.scale(nf), reduced.alpha())?;
        let c = sol.c;
        let nk = k * nf;
        let defect = &(&(&c.rotate(reduced.alpha()) - &c) + &a.scale(nf)) - &TrigPoly::constant(nk);
        let lower: f64 = (2..=n).map(|j| reduced.coeff(j).strip_norm(0.0)).sum();
        let higher_norms = ((n + 2)..=reduced.truncation())
            .map(|j| (j, reduced.coeff(j).strip_norm(0.0)))
            .filter(|(_, v)| *v > 0.0)
            .collect();
        Ok(Self {
            geometry,
            nk,
            c_norm: c.strip_norm(0.0),
            c,
            a_norm: a.strip_norm(0.0),
            evaluator: reduced.evaluator(),
            reduced: reduced.clone(),
            higher_norms,
            dust: defect.strip_norm(0.0) / nk.norm() + lower,
        })
    }

    pub fn from_classification(c: &Classification) -> Result<Self> {
        let lead = LeadingData::from_classification(c)?;
        Self::new(&c.reduced, lead.n)
    }

    pub fn n(&self) -> usize {
        self.geometry.leading.n
    }

    pub fn k(&self) -> Complex64 {
        self.geometry.leading.k
    }

    pub fn reduced(&self) -> &FibredJet {
        &self.reduced
    }

    pub fn alpha(&self) -> &RotationNumber {
        self.reduced.alpha()
    }

    pub fn fibre_map(&self, theta: f64, z: Complex64) -> Complex64 {
        self.evaluator.eval(theta, z)
    }

    /// `Z = (-1/z^n + c(theta)) / (n k)`.
    pub fn to_petal(&self, theta: f64, z: Complex64) -> Complex64 {
        (-z.powu(self.n() as u32).inv() + self.c.eval(theta)) / self.nk
    }

    /// The branch of the inverse whose `z` is angularly closest to `direction`.
    pub fn from_petal(&self, theta: f64, zz: Complex64, direction: Complex64) -> Complex64 {
        let w = -(self.nk * zz - self.c.eval(theta)).inv();
        let n = self.n();
        let root = w.powf(1.0 / n as f64);
        (0..n)
            .map(|j| root * Complex64::from_polar(1.0, TAU * j as f64 / n as f64))
            .max_by(|a, b| {
                let da = (a / direction).arg().abs();
                let db = (b / direction).arg().abs();
                db.total_cmp(&da)
            })
            .unwrap_or(root)
    }

    /// Rigorous bound on `|Z' - (Z + 1)|` when `|z| <= rho`.
    pub fn error_at_radius(&self, rho: f64) -> f64 {
        let n = self.n() as i32;
        let nf = n as f64;
        let rn = rho.powi(n);
        let r: f64 = self
            .higher_norms
            .iter()
            .map(|(j, v)| v * rho.powi(*j as i32 - 1))
            .sum();
        let u = self.a_norm * rn + r;
        if u >= 1.0 {
            return f64::INFINITY;
        }
        let e2 = nf * (nf + 1.0) / 2.0 * u * u / (1.0 - u).powi(n + 2);
        (nf * r + e2) / (rn * self.nk.norm()) + self.dust
    }

    /// Largest `|z|` whose petal coordinate can have `|Z| >= radius`.
    pub fn radius_for(&self, radius: f64) -> f64 {
        let denom = self.nk.norm() * radius - self.c_norm;
        if denom <= 0.0 {
            return f64::INFINITY;
        }
        denom.powf(-1.0 / self.n() as f64)
    }

    /// The map in the petal coordinate on the branch near `direction`.
    pub fn sector(&self, direction: Complex64) -> SectorMap<'_> {
        SectorMap { model: self, direction }
    }

    /// True when `z` lies in the attracting petal `P_theta^+` for wedge offset `a` within radius `rho`.
    pub fn in_attracting_petal(&self, theta: f64, z: Complex64, a: f64, rho: f64) -> bool {
        z.norm() > 0.0 && z.norm() <= rho && in_omega_plus(self.to_petal(theta, z), a)
    }

    pub fn in_repelling_petal(&self, theta: f64, z: Complex64, a: f64, rho: f64) -> bool {
        z.norm() > 0.0 && z.norm() <= rho && in_omega_minus(self.to_petal(theta, z), a)
    }
}

pub fn in_omega_plus(z: Complex64, a: f64) -> bool {
    z.re > a - z.im.abs()
}

pub fn in_omega_minus(z: Complex64, a: f64) -> bool {
    z.re < -a + z.im.abs()
}

/// The petal-coordinate map `Z -> Z'` computed through the fibre map on one branch.
#[derive(Debug, Clone, Copy)]
pub struct SectorMap<'a> {
    model: &'a PetalModel,
    direction: Complex64,
}

impl InfinityMap for SectorMap<'_> {
    fn alpha(&self) -> &RotationNumber {
        self.model.alpha()
    }

    fn step(&self, theta: f64, zz: Complex64) -> Complex64 {
        let z = self.model.from_petal(theta, zz, self.direction);
        let fz = self.model.fibre_map(theta, z);
        self.model.to_petal(self.model.alpha().orbit_point(theta, 1), fz)
    }

    fn tail_bound(&self, radius: f64) -> f64 {
        self.model.error_at_radius(self.model.radius_for(radius))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantRegionParams {
    /// Tail-domination radius: the model error is at most 1/2 on `|Z| >= C`.
    pub c: f64,
    /// Wedge offset of `Omega_A^{+/-}`.
    pub a: f64,
    /// Fundamental-domain abscissa, `L > A`.
    pub l: f64,
    /// Half-speed escape abscissa.
    pub c2: f64,
    pub tail_at_c: f64,
    pub invariance_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionBudget {
    /// Number of doublings / enlargements allowed.
    pub steps: usize,
    pub fibres: usize,
    pub boundary_samples: usize,
}

impl Default for RegionBudget {
    fn default() -> Self {
        Self {
            steps: 80,
            fibres: 16,
            boundary_samples: 512,
        }
    }
}

/// Smallest `C` (to bisection accuracy) with `tail_bound(C) <= 1/2`.
pub fn tail_radius(map: &dyn InfinityMap, budget: usize) -> Result<f64> {
    let ok = |c: f64| map.tail_bound(c) <= 0.5;
    let mut hi = 1.0;
    let mut steps = 0;
    while !ok(hi) {
        hi *= 2.0;
        steps += 1;
        if steps > budget {
            return Err(Error::RegionCertification {
                reason: "tail never drops below 1/2".into(),
                witness: format!("C = {hi:e}, tail = {:e}", map.tail_bound(hi)),
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Certifies `C`, then `A` by sampling forward invariance of `Omega_A^+` on its boundary, then
/// sets `C_2 = C` and `L = A + 1`.
pub fn region_params(maps: &[&dyn InfinityMap], budget: &RegionBudget) -> Result<InvariantRegionParams> {
    let mut c: f64 = 0.0;
    for m in maps {
        c = c.max(tail_radius(*m, budget.steps)?);
    }
    let tail_at_c = maps.iter().map(|m| m.tail_bound(c)).fold(0.0, f64::max);
    let mut a = (SQRT_2 * c).max(1.0);
    let mut witness = String::new();
    for _ in 0..budget.steps {
        match boundary_invariance(maps, a, budget.fibres, budget.boundary_samples) {
            None => {
                return Ok(InvariantRegionParams {
                    c,
                    a,
                    l: a + 1.0,
                    c2: c,
                    tail_at_c,
                    invariance_samples: budget.fibres * budget.boundary_samples * maps.len(),
                })
            }
            Some(w) => {
                witness = w;
                a *= 1.25;
            }
        }
    }
    Err(Error::RegionCertification {
        reason: "forward invariance of Omega_A^+ not observed".into(),
        witness,
    })
}

/// Points just inside `partial Omega_A^+` at fibre `theta`.
pub fn boundary_samples(a: f64, count: usize) -> Vec<Complex64> {
    let inset = 1e-9 * a.max(1.0);
    (0..count)
        .map(|i| {
            let t = -1.0 + 2.0 * (i as f64 + 0.5) / count as f64;
            let y = 40.0 * a * t * t.abs();
            Complex64::new(a - y.abs() + inset, y)
        })
        .collect()
}

fn boundary_invariance(maps: &[&dyn InfinityMap], a: f64, fibres: usize, count: usize) -> Option<String> {
    let pts = boundary_samples(a, count);
    for m in maps {
        for f in 0..fibres {
            let theta = f as f64 / fibres as f64;
            for z in &pts {
                let w = m.step(theta, *z);
                if !in_omega_plus(w, a) {
                    return Some(format!("theta = {theta}, Z = {z}, image = {w}, A = {a}"));
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Attracting,
    Repelling,
}

impl Side {
    pub fn sign(&self) -> char {
        match self {
            Side::Attracting => '+',
            Side::Repelling => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub theta: f64,
    pub side: Side,
    pub sector: usize,
    /// Closed curve through `0` at both ends.
    pub points: Vec<Complex64>,
}

impl Polyline {
    pub fn winding_number(&self, z: Complex64) -> i32 {
        let mut total = 0.0;
        let pts = &self.points;
        for i in 0..pts.len() {
            let a = pts[i] - z;
            let b = pts[(i + 1) % pts.len()] - z;
            total += (b / a).arg();
        }
        (total / TAU).round() as i32
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.winding_number(z) != 0
    }
}

/// Pull-back of `partial Omega_A^{+/-}` to the `z`-plane at fibre `theta`, one polyline per sector.
pub fn petal_boundary(model: &PetalModel, theta: f64, side: Side, a: f64, resolution: usize) -> Result<Vec<Polyline>> {
    if resolution < 2 {
        return Err(Error::precondition("petals", "boundary resolution must be >= 2"));
    }
    let dirs = match side {
        Side::Attracting => &model.geometry.attracting,
        Side::Repelling => &model.geometry.repulsive,
    };
    let ymax = 1e4 * a.max(1.0);
    Ok(dirs
        .iter()
        .enumerate()
        .map(|(sector, d)| {
            let mut points = vec![Complex64::new(0.0, 0.0)];
            for i in 0..resolution {
                // y runs over [-ymax, ymax], concentrated near 0 where the curve is far from z = 0
                let t = -1.0 + 2.0 * i as f64 / (resolution - 1) as f64;
                let y = ymax * t.abs().powi(4) * t.signum();
                let zz = match side {
                    Side::Attracting => Complex64::new(a - y.abs(), y),
                    Side::Repelling => Complex64::new(-a + y.abs(), y),
                };
                points.push(model.from_petal(theta, zz, *d));
            }
            points.push(Complex64::new(0.0, 0.0));
            Polyline {
                theta,
                side,
                sector,
                points,
            }
        })
        .collect())
}

/// Writes polylines as CSV rows `theta,side,sector,vertex,re,im`.
pub fn write_polylines_csv<W: Write>(mut out: W, lines: &[Polyline]) -> Result<()> {
    writeln!(out, "theta,side,sector,vertex,re,im")?;
    for l in lines {
        for (i, p) in l.points.iter().enumerate() {
            writeln!(out, "{},{},{},{},{:e},{:e}", l.theta, l.side.sign(), l.sector, i, p.re, p.im)?;
        }
    }
    Ok(())
}

/// Direction in which the closed boundary curve leaves `0`, from the outermost vertices of both
/// branches; compare with `arg(k^{-1})` (for `n > 1`, with the `w = z^n` image).
pub fn boundary_exterior_direction(line: &Polyline, n: usize) -> Complex64 {
    let pts = &line.points;
    let first = pts[1].powu(n as u32);
    let last = pts[pts.len() - 2].powu(n as u32);
    let s = first / first.norm() + last / last.norm();
    s / s.norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TranslationResidual {
    /// `sup |H o G o H^{-1} - (Z + 1)|` for the fundamental-domain construction.
    pub conjugacy_residual: f64,
    /// `sup |G(Z) - (Z + 1)|` on the same samples.
    pub model_defect: f64,
    pub samples: usize,
}

/// Fundamental-domain conjugacy: `H_theta` is the identity on `x = L`, sends `G_{theta-alpha}(L + iy)`
/// to `L + iy + 1` and interpolates linearly between, and is extended by `H o G = H + 1`.
pub struct FundamentalDomain<'a> {
    map: &'a dyn InfinityMap,
    l: f64,
}

impl<'a> FundamentalDomain<'a> {
    pub fn new(map: &'a dyn InfinityMap, l: f64) -> Self {
        Self { map, l }
    }

    fn curve(&self, theta: f64, y: f64) -> (Complex64, Complex64) {
        let base = Complex64::new(self.l, y);
        let prev = self.map.alpha().orbit_point(theta, -1);
        (base, self.map.step(prev, base))
    }

    fn param_point(&self, theta: f64, s: f64, y: f64) -> Complex64 {
        let (p0, p1) = self.curve(theta, y);
        p0 * (1.0 - s) + p1 * s
    }

    /// `(s, y)` with `param_point(theta, s, y) = z`, by Newton iteration.
    fn params(&self, theta: f64, z: Complex64) -> (f64, f64) {
        let (mut s, mut y) = (z.re - self.l, z.im);
        for _ in 0..50 {
            let r = self.param_point(theta, s, y) - z;
            if r.norm() < 1e-14 * (1.0 + z.norm()) {
                break;
            }
            let h = 1e-7;
            let ds = (self.param_point(theta, s + h, y) - z - r) / h;
            let dy = (self.param_point(theta, s, y + h) - z - r) / h;
            let det = ds.re * dy.im - ds.im * dy.re;
            if det.abs() < 1e-300 {
                break;
            }
            s -= (r.re * dy.im - r.im * dy.re) / det;
            y -= (ds.re * r.im - ds.im * r.re) / det;
        }
        (s, y)
    }

    /// `H_theta(z)`.
    pub fn forward(&self, theta: f64, z: Complex64) -> Complex64 {
        let alpha = self.map.alpha();
        let mut t = theta;
        let mut w = z;
        let mut m: i64 = 0;
        for _ in 0..100_000 {
            let (s, y) = self.params(t, w);
            if s >= 1.0 {
                let prev = alpha.orbit_point(t, -1);
                w = self.map.inverse_step(prev, w);
                t = prev;
                m += 1;
            } else if s < 0.0 {
                w = self.map.step(t, w);
                t = alpha.orbit_point(t, 1);
                m -= 1;
            } else {
                return Complex64::new(self.l + s + m as f64, y);
            }
        }
        Complex64::new(f64::NAN, f64::NAN)
    }

    /// `H_theta^{-1}(y)` for `Re y >= L`.
    pub fn inverse(&self, theta: f64, target: Complex64) -> Complex64 {
        let alpha = self.map.alpha();
        let shift = target.re - self.l;
        let m = shift.floor();
        let s = shift - m;
        let m = m as i64;
        let t0 = alpha.orbit_point(theta, -m);
        let mut w = self.param_point(t0, s, target.im);
        let mut t = t0;
        for _ in 0..m {
            w = self.map.step(t, w);
            t = alpha.orbit_point(t, 1);
        }
        w
    }
}

/// Residual of the fundamental-domain conjugacy and the raw model defect, sampled on
/// `Re Z in [L + 1, L + 3]`, `|Im Z| <= L` over several fibres.
pub fn translation_model_residual(
    map: &dyn InfinityMap,
    params: &InvariantRegionParams,
    l: f64,
    samples: usize,
) -> Result<TranslationResidual> {
    if l <= params.a {
        return Err(Error::precondition(
            "petals",
            format!("fundamental-domain abscissa L = {l} must exceed A = {}", params.a),
        ));
    }
    let dom = FundamentalDomain::new(map, l);
    let alpha = map.alpha();
    let side = (samples as f64).sqrt().ceil() as usize;
    let mut conj: f64 = 0.0;
    let mut defect: f64 = 0.0;
    let mut count = 0;
    'outer: for i in 0..side {
        for j in 0..side {
            if count == samples {
                break 'outer;
            }
            let theta = (i as f64 * 0.618_033_988_749_895 + j as f64 * 0.137) % 1.0;
            let y = Complex64::new(
                l + 1.0 + 2.0 * (j as f64 + 0.5) / side as f64,
                l * (-1.0 + 2.0 * (i as f64 + 0.5) / side as f64),
            );
            let w = dom.inverse(theta, y);
            let gw = map.step(theta, w);
            let back = dom.forward(alpha.orbit_point(theta, 1), gw);
            conj = conj.max((back - (y + 1.0)).norm());
            defect = defect.max((map.step(theta, y) - (y + 1.0)).norm());
            count += 1;
        }
    }
    Ok(TranslationResidual {
        conjugacy_residual: conj,
        model_defect: defect,
        samples: count,
    })
}

/// Default neighbourhood radius `(10 C n|k| + ||c||)^{-1/n}` for coverage tests.
pub fn coverage_radius(model: &PetalModel, params: &InvariantRegionParams) -> f64 {
    let n = model.n() as f64;
    (10.0 * params.c.max(params.a) * model.nk.norm() + model.c_norm).powf(-1.0 / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::reduction::{classify, ClassifyOptions};

    fn golden() -> RotationNumber {
        RotationNumber::golden_mean()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn directions_examples() {
        let g = repulsive_directions(Complex64::new(1.0, 0.0), 1).unwrap();
        assert!(close(g.repulsive[0], Complex64::new(1.0, 0.0)));
        assert!(close(g.exterior.unwrap(), Complex64::new(1.0, 0.0)));
        let g = repulsive_directions(Complex64::new(1.0, 0.0), 2).unwrap();
        assert!(close(g.repulsive[0], Complex64::new(1.0, 0.0)));
        assert!(close(g.repulsive[1], Complex64::new(-1.0, 0.0)));
        assert_eq!(g.sector_of(Complex64::new(0.0, 1.0)), 0);
        assert_eq!(g.sector_of(Complex64::new(0.0, -1.0)), 1);
        let g = repulsive_directions(Complex64::new(-0.5, 0.0), 2).unwrap();
        assert!(close(g.repulsive[0], Complex64::new(0.0, -1.0)));
        assert!(close(g.repulsive[1], Complex64::new(0.0, 1.0)));
        assert!(close(g.attracting[0], Complex64::new(1.0, 0.0)) || close(g.attracting[1], Complex64::new(1.0, 0.0)));
        assert!(repulsive_directions(Complex64::new(0.0, 0.0), 2).is_err());
        let g = repulsive_directions(Complex64::new(0.3, -1.1), 5).unwrap();
        for gap in g.gaps() {
            assert!((gap - TAU / 5.0).abs() < 1e-12);
        }
        for d in &g.repulsive {
            let v = Complex64::new(0.3, -1.1) * d.powu(5);
            assert!(v.im.abs() < 1e-12 && v.re > 0.0);
        }
    }

    fn pure_translation() -> InfinityJet {
        InfinityJet::new(golden(), Complex64::new(1.0, 0.0), TrigPoly::zero(), vec![])
    }

    #[test]
    fn region_for_pure_translation() {
        let g = pure_translation();
        let p = region_params(&[&g], &RegionBudget::default()).unwrap();
        assert_eq!(p.a, 1.0);
        assert!(p.l > p.a);
        let r = translation_model_residual(&g, &p, 10.0, 64).unwrap();
        assert!(r.conjugacy_residual < 1e-12);
        assert_eq!(r.model_defect, 0.0);
    }

    #[test]
    fn region_for_one_over_z() {
        let g = InfinityJet::new(golden(), Complex64::new(1.0, 0.0), TrigPoly::zero(), vec![TrigPoly::constant(1.0)]);
        let c = tail_radius(&g, 80).unwrap();
        assert!((c - 2.0).abs() < 1e-9);
        let p = region_params(&[&g], &RegionBudget::default()).unwrap();
        let r = translation_model_residual(&g, &p, 10.0, 256).unwrap();
        assert!(r.conjugacy_residual <= 0.15);
        assert!(r.model_defect <= 0.1);
    }

    #[test]
    fn region_scales_with_huge_tail() {
        let g = InfinityJet::new(golden(), Complex64::new(1.0, 0.0), TrigPoly::zero(), vec![TrigPoly::constant(1e6)]);
        let p = region_params(&[&g], &RegionBudget::default()).unwrap();
        assert!(p.c >= 1.9e6 && p.c <= 2.1e6);
        assert!(p.a >= p.c);
    }

    #[test]
    fn boundary_through_minus_one() {
        // k = 1, c = 0, A = 1: apex Z = 1 maps to z = -1
        let f = models::scalar_quadratic(golden(), 4).unwrap();
        let m = PetalModel::new(&f, 1).unwrap();
        assert!(m.c.is_zero());
        let lines = petal_boundary(&m, 0.0, Side::Attracting, 1.0, 101).unwrap();
        let mid = lines[0].points[51];
        assert!((mid - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(lines[0].points[0], Complex64::new(0.0, 0.0));
        assert!(petal_boundary(&m, 0.0, Side::Attracting, 1.0, 1).is_err());
    }

    #[test]
    fn sine_quadratic_model_and_petals() {
        let f = models::sine_quadratic(golden(), 8).unwrap();
        let c = classify(&f, &ClassifyOptions::default()).unwrap();
        let m = PetalModel::from_classification(&c).unwrap();
        assert_eq!(m.n(), 2);
        let sectors: Vec<SectorMap> = m.geometry.attracting.iter().map(|d| m.sector(*d)).collect();
        let maps: Vec<&dyn InfinityMap> = sectors.iter().map(|s| s as &dyn InfinityMap).collect();
        let p = region_params(&maps, &RegionBudget::default()).unwrap();
        assert!(p.c.is_finite() && p.a >= 1.0);
        let rho = coverage_radius(&m, &p);
        // the polyline and the model membership agree
        let lines = petal_boundary(&m, 0.25, Side::Attracting, p.a, 4001).unwrap();
        for i in 0..64 {
            let z = Complex64::from_polar(rho * 0.5, TAU * i as f64 / 64.0 + 0.01);
            let inside_model = m.in_attracting_petal(0.25, z, p.a, rho);
            let inside_poly = lines.iter().any(|l| l.contains(z));
            assert_eq!(inside_model, inside_poly, "z = {z}");
        }
        // attracting and repelling petals cover a punctured neighbourhood
        for i in 0..16 {
            let theta = i as f64 / 16.0;
            for j in 0..64 {
                let z = Complex64::from_polar(rho * (0.1 + 0.9 * (j % 8) as f64 / 8.0), TAU * j as f64 / 64.0);
                assert!(m.in_attracting_petal(theta, z, p.a, rho) || m.in_repelling_petal(theta, z, p.a, rho));
            }
        }
    }

    #[test]
    fn tail_bound_dominates_observed_error() {
        let f = models::three_petal(golden(), 8).unwrap();
        let c = classify(&f, &ClassifyOptions::default()).unwrap();
        let m = PetalModel::from_classification(&c).unwrap();
        for d in &m.geometry.attracting {
            let s = m.sector(*d);
            for radius in [50.0, 200.0] {
                let bound = s.tail_bound(radius);
                for i in 0..32 {
                    let zz = Complex64::from_polar(radius * 1.5, TAU * i as f64 / 32.0);
                    let theta = i as f64 / 32.0;
                    let e = (s.step(theta, zz) - zz - 1.0).norm();
                    assert!(e <= bound, "radius {radius}: {e} > {bound}");
                }
            }
        }
    }

    #[test]
    fn model_defect_decreases_with_l() {
        let f = models::sine_quadratic(golden(), 8).unwrap();
        let c = classify(&f, &ClassifyOptions::default()).unwrap();
        let m = PetalModel::from_classification(&c).unwrap();
        let s = m.sector(m.geometry.attracting[0]);
        let p = region_params(&[&s], &RegionBudget::default()).unwrap();
        let r1 = translation_model_residual(&s, &p, p.l, 64).unwrap();
        let r2 = translation_model_residual(&s, &p, 4.0 * p.l, 64).unwrap();
        assert!(r1.model_defect.is_finite() && r2.model_defect < r1.model_defect);
        assert!(r1.conjugacy_residual < 1e-6);
        assert!(translation_model_residual(&s, &p, 0.5 * p.a, 4).is_err());
    }
}
