//! Order-by-order reduction of a parabolic fibred map.
//!
//! At order `k` the map is `z + a_k(theta) z^k + ...`. If `mean(a_k)` is nonzero the map has a
//! flower with `k - 1` attracting petals. Otherwise the cohomological equation for `h_k` is solved
//! and the map is conjugated to one whose leading order is at least `k + 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cohomology::{solve_exact_with_floor, WorstDivisor, DEFAULT_DIVISOR_FLOOR};
use crate::error::{Error, Result};
use crate::fibredjet::{change_series, series, ChangeShape, FibredJet};
use crate::rotation::RotationNumber;
use crate::trigpoly::TrigPoly;

/// Default relative mean tolerance: `|mean| <= 1e-10 max(1, strip_norm(rhs, 0))` counts as zero.
pub const DEFAULT_MEAN_TOLERANCE: f64 = 1e-10;

/// Coefficients below the current order may carry rounding dust up to this relative size.
const LOWER_ORDER_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub mean_rel: f64,
    pub divisor_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mean_rel: DEFAULT_MEAN_TOLERANCE,
            divisor_floor: DEFAULT_DIVISOR_FLOOR,
        }
    }
}

impl Tolerances {
    pub fn mean_threshold(&self, rhs: &TrigPoly) -> f64 {
        self.mean_rel * rhs.strip_norm(0.0).max(1.0)
    }
}

/// How each order is removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Solve `F o H = H o Id_alpha` for a single polynomial `H = z + h_2 z^2 + ...`; the leading
    /// coefficient of the reduced map is the right-hand side of the `k`-th equation.
    Formal,
    /// Fatou translation at order 2, polynomial changes `z + h z^k` above.
    #[default]
    Classical,
    /// Polynomial changes `z + h z^k` at every order.
    Polynomial,
    /// Fatou translations at every order.
    Fatou,
}

impl Scheme {
    fn shape(&self, k: usize) -> ChangeShape {
        match self {
            Scheme::Classical if k == 2 => ChangeShape::FatouTranslation,
            Scheme::Fatou => ChangeShape::FatouTranslation,
            _ => ChangeShape::Polynomial,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    FlowerFound { petals: usize, mean: Complex64 },
    Reduced { next: FibredJet, h: TrigPoly, record: StepRecord },
    Obstructed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub rhs_mean: Complex64,
    pub rhs_norm: f64,
    pub tolerance: f64,
    pub worst_divisor: Option<WorstDivisor>,
    /// `strip_norm(h_k, 0)`, absent when the step found a flower.
    pub h_norm: Option<f64>,
    /// Strip width `delta_k` and `strip_norm(h_k, delta_k)` once a schedule is attached.
    pub delta: Option<f64>,
    pub h_strip_norm: Option<f64>,
    pub shape: Option<ChangeShape>,
    #[serde(skip)]
    pub h: Option<TrigPoly>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionTrace {
    pub scheme: Scheme,
    pub truncation: usize,
    pub records: Vec<StepRecord>,
}

impl ReductionTrace {
    pub fn h(&self, k: usize) -> Option<&TrigPoly> {
        self.records.iter().find(|r| r.k == k).and_then(|r| r.h.as_ref())
    }

    /// Attaches `delta_k` for each solved order (`deltas[i]` belongs to `k = i + 2`) and records
    /// `strip_norm(h_k, delta_k)`.
    pub fn attach_schedule(&mut self, deltas: &[f64]) {
        for r in &mut self.records {
            if let (Some(h), Some(d)) = (&r.h, r.k.checked_sub(2).and_then(|i| deltas.get(i))) {
                r.delta = Some(*d);
                r.h_strip_norm = Some(h.strip_norm(*d));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    Flower {
        petals: usize,
        leading_order: usize,
        leading_mean: Complex64,
    },
    Obstructed {
        order: usize,
        reason: String,
    },
    InfinitelyReducible {
        checked_to: usize,
    },
}

impl Verdict {
    pub fn petals(&self) -> Option<usize> {
        match self {
            Verdict::Flower { petals, .. } => Some(*petals),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootOfUnityCheck {
    pub q: u64,
    pub petals_of_iterate: Option<usize>,
    pub divisible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub trace: ReductionTrace,
    /// The reduced map `F_k` at the last order reached.
    #[serde(skip)]
    pub reduced: FibredJet,
    pub root_of_unity: Option<RootOfUnityCheck>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub max_order: usize,
    pub tolerances: Tolerances,
    pub scheme: Scheme,
    /// Test hook: report the cohomological equation at this order as unsolvable.
    #[doc(hidden)]
    pub inject_obstruction_at: Option<usize>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            max_order: usize::MAX,
            tolerances: Tolerances::default(),
            scheme: Scheme::default(),
            inject_obstruction_at: None,
        }
    }
}

fn check_step_preconditions(f: &FibredJet, k: usize, tol: &Tolerances) -> Result<()> {
    f.alpha().require_irrational()?;
    if !f.multiplier().is_one() {
        return Err(Error::precondition("reduction", "reduction needs multiplier 1"));
    }
    if k < 2 {
        return Err(Error::precondition("reduction", "reduction order must be >= 2"));
    }
    if k > f.truncation() {
        return Err(Error::TruncationExhausted { order: f.truncation() });
    }
    // a mean accepted as zero stays behind in the lower order
    let slack = LOWER_ORDER_SLACK.max(2.0 * tol.mean_rel) * f.scale().max(1.0);
    for j in 2..k {
        let size = f.coeff(j).strip_norm(0.0);
        if size > slack {
            return Err(Error::precondition(
                "reduction",
                format!("order {k} step needs a_{j} = 0 (strip norm {size:.3e})"),
            ));
        }
    }
    Ok(())
}

/// One step of the reduction with the default [`Scheme::Classical`] change shape.
pub fn reduction_step(f: &FibredJet, k: usize, tol: &Tolerances) -> Result<StepOutcome> {
    reduction_step_with(f, k, tol, Scheme::Classical.shape(k))
}

pub fn reduction_step_with(f: &FibredJet, k: usize, tol: &Tolerances, shape: ChangeShape) -> Result<StepOutcome> {
    check_step_preconditions(f, k, tol)?;
    let rhs = f.coeff(k);
    let mut record = new_record(k, &rhs, tol);
    if record.rhs_mean.norm() > record.tolerance {
        return Ok(StepOutcome::FlowerFound {
            petals: k - 1,
            mean: record.rhs_mean,
        });
    }
    let sol = solve_exact_with_floor(&-rhs, f.alpha(), tol.divisor_floor)?;
    let next = f.elementary_conjugate_with(&sol.c, k, shape)?;
    record.worst_divisor = sol.worst_divisor;
    record.warnings = sol.warnings;
    record.h_norm = Some(sol.c.strip_norm(0.0));
    record.shape = Some(shape);
    record.h = Some(sol.c.clone());
    Ok(StepOutcome::Reduced {
        next,
        h: sol.c,
        record,
    })
}

fn new_record(k: usize, rhs: &TrigPoly, tol: &Tolerances) -> StepRecord {
    StepRecord {
        k,
        rhs_mean: rhs.mean(),
        rhs_norm: rhs.strip_norm(0.0),
        tolerance: tol.mean_threshold(rhs),
        worst_divisor: None,
        h_norm: None,
        delta: None,
        h_strip_norm: None,
        shape: None,
        h: None,
        warnings: Vec::new(),
    }
}

/// Runs the reduction until a flower is found, the order limit is reached, or the truncation
/// order is exhausted. A non-trivial root-of-unity multiplier `e^{2 pi i p/q}` is handled by
/// classifying `F^q`.
pub fn classify(f: &FibredJet, opts: &ClassifyOptions) -> Result<Classification> {
    f.alpha().require_irrational()?;
    let lambda = f.multiplier();
    if !lambda.is_one() {
        let q = lambda.q;
        let g = f.iterate(q as usize)?;
        let mut out = classify(&g, opts)?;
        let petals = out.verdict.petals();
        out.root_of_unity = Some(RootOfUnityCheck {
            q,
            petals_of_iterate: petals,
            divisible: petals.map(|p| p as u64 % q == 0),
        });
        return Ok(out);
    }
    let top = opts.max_order.min(f.truncation());
    match opts.scheme {
        Scheme::Formal => classify_formal(f, opts, top),
        scheme => classify_stepwise(f, opts, top, scheme),
    }
}

fn classify_stepwise(f: &FibredJet, opts: &ClassifyOptions, top: usize, scheme: Scheme) -> Result<Classification> {
    let mut trace = ReductionTrace {
        scheme,
        truncation: f.truncation(),
        records: Vec::new(),
    };
    let mut cur = f.clone();
    for k in 2..=top {
        if opts.inject_obstruction_at == Some(k) {
            return Ok(obstructed(k, trace, cur));
        }
        match reduction_step_with(&cur, k, &opts.tolerances, scheme.shape(k))? {
            StepOutcome::FlowerFound { petals, mean } => {
                trace.records.push(new_record(k, &cur.coeff(k), &opts.tolerances));
                return Ok(Classification {
                    verdict: Verdict::Flower {
                        petals,
                        leading_order: k,
                        leading_mean: mean,
                    },
                    trace,
                    reduced: cur,
                    root_of_unity: None,
                });
            }
            StepOutcome::Reduced { next, record, .. } => {
                trace.records.push(record);
                cur = next;
            }
            StepOutcome::Obstructed { reason } => {
                return Ok(Classification {
                    verdict: Verdict::Obstructed { order: k, reason },
                    trace,
                    reduced: cur,
                    root_of_unity: None,
                })
            }
        }
    }
    Ok(Classification {
        verdict: Verdict::InfinitelyReducible { checked_to: top },
        trace,
        reduced: cur,
        root_of_unity: None,
    })
}

fn obstructed(k: usize, trace: ReductionTrace, reduced: FibredJet) -> Classification {
    Classification {
        verdict: Verdict::Obstructed {
            order: k,
            reason: "cohomological equation reported unsolvable (injected)".into(),
        },
        trace,
        reduced,
        root_of_unity: None,
    }
}

fn classify_formal(f: &FibredJet, opts: &ClassifyOptions, top: usize) -> Result<Classification> {
    let n = f.truncation();
    let mut trace = ReductionTrace {
        scheme: Scheme::Formal,
        truncation: n,
        records: Vec::new(),
    };
    let mut h = series::zeros(n);
    h[1] = TrigPoly::constant(1.0);
    for k in 2..=top {
        if opts.inject_obstruction_at == Some(k) {
            let reduced = f.conjugate_by(&h, format!("formal conjugacy to order {}", k - 1));
            return Ok(obstructed(k, trace, reduced));
        }
        let rhs = series::compose(f.coeffs(), &h, k).swap_remove(k);
        let mut record = new_record(k, &rhs, &opts.tolerances);
        if record.rhs_mean.norm() > record.tolerance {
            let mean = record.rhs_mean;
            trace.records.push(record);
            let reduced = f.conjugate_by(&h, format!("formal conjugacy to order {}", k - 1));
            return Ok(Classification {
                verdict: Verdict::Flower {
                    petals: k - 1,
                    leading_order: k,
                    leading_mean: mean,
                },
                trace,
                reduced,
                root_of_unity: None,
            });
        }
        let sol = solve_exact_with_floor(&-rhs, f.alpha(), opts.tolerances.divisor_floor)?;
        record.worst_divisor = sol.worst_divisor;
        record.warnings = sol.warnings;
        record.h_norm = Some(sol.c.strip_norm(0.0));
        record.shape = Some(ChangeShape::Polynomial);
        record.h = Some(sol.c.clone());
        trace.records.push(record);
        h[k] = sol.c;
    }
    let reduced = f.conjugate_by(&h, format!("formal conjugacy to order {top}"));
    Ok(Classification {
        verdict: Verdict::InfinitelyReducible { checked_to: top },
        trace,
        reduced,
        root_of_unity: None,
    })
}

/// A fibre-preserving change `H(theta, z) = (theta, z + sum_j h_j(theta) z^j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FibredChange {
    coeffs: Vec<TrigPoly>,
}

impl FibredChange {
    pub fn coeffs(&self) -> &[TrigPoly] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> TrigPoly {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    pub fn eval(&self, theta: f64, z: Complex64) -> Complex64 {
        series::eval(&self.coeffs, theta, z)
    }

    /// `H^{-1} o F o H`.
    pub fn conjugate(&self, f: &FibredJet) -> FibredJet {
        let mut c = self.coeffs.clone();
        c.resize(f.truncation() + 1, TrigPoly::zero());
        c.truncate(f.truncation() + 1);
        f.conjugate_by(&c, "assembled conjugacy")
    }
}

/// The accumulated change `H^{up_to - 1}` from the solved orders `2..up_to`.
///
/// For the formal scheme this is the polynomial `z + h_2 z^2 + ... + h_{up_to-1} z^{up_to-1}`;
/// for the stepwise schemes it is the composition of the elementary changes, truncated at the
/// trace's truncation order.
pub fn assemble_conjugacy(trace: &ReductionTrace, up_to: usize) -> Result<FibredChange> {
    let n = trace.truncation;
    let mut out = series::zeros(n);
    out[1] = TrigPoly::constant(1.0);
    for k in 2..up_to {
        let record = trace
            .records
            .iter()
            .find(|r| r.k == k)
            .ok_or(Error::MissingConjugacy { order: k })?;
        let h = record.h.as_ref().ok_or(Error::MissingConjugacy { order: k })?;
        match trace.scheme {
            Scheme::Formal => out[k] = h.clone(),
            _ => {
                let shape = record.shape.unwrap_or(ChangeShape::Polynomial);
                let step = change_series(h, k, shape, n);
                out = series::compose(&out, &step, n);
            }
        }
    }
    Ok(FibredChange { coeffs: out })
}

/// Sup of `|H^{-1} o F o H - Id_alpha|` in the fibre over a polar grid of radius `radius`.
pub fn identity_residual(f: &FibredJet, h: &FibredChange, radius: f64, grid: usize) -> f64 {
    let mut g = h.conjugate(f).coeffs().to_vec();
    // subtract the identity coefficientwise, avoiding cancellation in g(z) - z
    g[1] = &g[1] - &TrigPoly::constant(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..grid {
        let theta = i as f64 / grid as f64;
        for j in 0..grid {
            let z = Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / grid as f64);
            worst = worst.max(series::eval(&g, theta, z).norm());
        }
    }
    worst
}

/// Rotation number of a classification run, for reports.
pub fn base_rotation(c: &Classification) -> &RotationNumber {
    c.reduced.alpha()
}
