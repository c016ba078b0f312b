//! Command dispatch and report emission for the `fibred-flower` binary.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dynamics::{
    cascade_simulate, iterate_orbit, verify_petal, write_cascade_csv, write_orbit_csv, CascadeOptions, CascadeReport,
    OrbitOptions, OrbitStatus, PetalOptions, PetalReport, DEFAULT_CONVERGENCE, DEFAULT_ESCAPE_RADIUS,
};
use crate::error::{Error, Result};
use crate::fibredjet::{FibredJet, JetRecord};
use crate::petals::{
    petal_boundary, region_params, write_polylines_csv, InfinityMap, InvariantRegionParams, PetalGeometry,
    PetalModel, RegionBudget, Side,
};
use crate::reduction::{classify, Classification, ClassifyOptions, ReductionTrace, RootOfUnityCheck, Scheme, Tolerances, Verdict};
use crate::rotation::Precision;
use crate::siegel::{h_norm_certificate, power_sum_check, verify_bounds, BoundsReport, Certificate, CertificateOptions, PowerSumCheck};
use crate::spec::{parse_spec, MapSpec};

pub const REPORT_SCHEMA: &str = "fibred-flower/report@1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNDETERMINED: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Classify,
    Petals,
    Simulate,
    Cascade,
    Siegel,
}

/// Command-line overrides; `None` falls back to the spec's options, then to the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunFlags {
    pub max_order: Option<usize>,
    pub mean_tol: Option<f64>,
    pub seeds: Option<usize>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub diagnostic: bool,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub spec_sha256: String,
    pub tool_version: &'static str,
    pub precision: Precision,
    pub seed: u64,
    pub flags: RunFlags,
    pub tolerances: Tolerances,
    pub convergence_threshold: f64,
    pub escape_radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationSection {
    pub scheme: Scheme,
    pub max_order: usize,
    pub tolerances: Tolerances,
    pub verdict: Verdict,
    pub root_of_unity: Option<RootOfUnityCheck>,
    pub trace: ReductionTrace,
    pub reduced: JetRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct PetalSection {
    pub geometry: PetalGeometry,
    pub region: InvariantRegionParams,
    pub fibres: Vec<f64>,
    pub resolution: usize,
    /// `c(theta)` of the petal coordinate, as modes.
    pub translation_modes: Vec<crate::trigpoly::ModeRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSummary {
    pub seeds: usize,
    pub radius: f64,
    pub steps: usize,
    pub converged: usize,
    pub escaped: usize,
    pub budget: usize,
    /// `max |z_last - z_0|` over the seeds.
    pub max_displacement: f64,
    pub convergence_threshold: f64,
    pub escape_radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsSection {
    pub orbits: OrbitSummary,
    pub petals: Option<PetalReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SiegelSection {
    pub certificate: Certificate,
    pub bounds: BoundsReport,
    pub power_sums: Vec<PowerSumCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub petals: Option<PetalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cascade: Option<CascadeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub siegel: Option<SiegelSection>,
    pub files: Vec<String>,
    pub provenance: Provenance,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

struct Context {
    spec: MapSpec,
    jet: FibredJet,
    flags: RunFlags,
    tolerances: Tolerances,
    max_order: usize,
    scheme: Scheme,
    seed: u64,
    seeds: usize,
    out: Option<PathBuf>,
    files: Vec<String>,
}

impl Context {
    fn classify(&self) -> Result<Classification> {
        classify(
            &self.jet,
            &ClassifyOptions {
                max_order: self.max_order,
                tolerances: self.tolerances,
                scheme: self.scheme,
                ..ClassifyOptions::default()
            },
        )
    }

    fn section(&self, c: &Classification) -> ClassificationSection {
        ClassificationSection {
            scheme: self.scheme,
            max_order: self.max_order,
            tolerances: self.tolerances,
            verdict: c.verdict.clone(),
            root_of_unity: c.root_of_unity.clone(),
            trace: c.trace.clone(),
            reduced: c.reduced.record(),
        }
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let Some(dir) = &self.out else {
            return Ok(());
        };
        let mut buf = Vec::new();
        body(&mut buf)?;
        fs::write(dir.join(name), buf)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn verdict_exit(v: &Verdict) -> i32 {
    match v {
        Verdict::InfinitelyReducible { .. } => EXIT_UNDETERMINED,
        _ => EXIT_OK,
    }
}

/// Parses `spec_text` and runs one command. Side files go to `flags.out` when set.
pub fn run(command: Command, spec_text: &str, flags: &RunFlags) -> Result<Outcome> {
    let precision = Precision::from_env()?;
    let spec = parse_spec(spec_text, flags.diagnostic)?;
    let jet = spec.to_jet(precision)?;
    let opts = spec.options();
    let tolerances = Tolerances {
        mean_rel: flags.mean_tol.or(opts.mean_tol).unwrap_or(Tolerances::default().mean_rel),
        divisor_floor: opts.divisor_floor.unwrap_or(Tolerances::default().divisor_floor),
    };
    if let Some(dir) = &flags.out {
        fs::create_dir_all(dir)?;
    }
    let mut ctx = Context {
        max_order: flags.max_order.or(opts.max_order).unwrap_or(spec.truncation),
        scheme: opts.scheme.unwrap_or_default(),
        seed: flags.seed.or(opts.seed).unwrap_or(0),
        seeds: flags.seeds.or(opts.seeds).unwrap_or(200),
        out: flags.out.clone(),
        files: vec![],
        tolerances,
        jet,
        flags: flags.clone(),
        spec,
    };
    let budget = flags.budget.or(opts.budget);

    let mut report = Report {
        schema: REPORT_SCHEMA,
        command,
        name: ctx.spec.name.clone(),
        classification: None,
        petals: None,
        dynamics: None,
        cascade: None,
        siegel: None,
        files: vec![],
        provenance: Provenance {
            spec_sha256: sha256_hex(spec_text),
            tool_version: env!("CARGO_PKG_VERSION"),
            precision,
            seed: ctx.seed,
            flags: ctx.flags.clone(),
            tolerances,
            convergence_threshold: DEFAULT_CONVERGENCE,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
        },
    };

    let exit_code = match command {
        Command::Classify => {
            let c = ctx.classify()?;
            report.classification = Some(ctx.section(&c));
            verdict_exit(&c.verdict)
        }
        Command::Petals => {
            let c = ctx.classify()?;
            report.classification = Some(ctx.section(&c));
            if c.verdict.petals().is_none() {
                EXIT_UNDETERMINED
            } else {
                report.petals = Some(petals_command(&mut ctx, &c, budget)?);
                EXIT_OK
            }
        }
        Command::Simulate => {
            let c = ctx.classify()?;
            report.classification = Some(ctx.section(&c));
            report.dynamics = Some(simulate_command(&mut ctx, &c, budget)?);
            EXIT_OK
        }
        Command::Cascade => {
            let cs = ctx.spec.options().cascade.unwrap_or_default();
            let copts = CascadeOptions {
                steps: cs.steps.or(budget).unwrap_or(100_000),
                ..CascadeOptions::default()
            };
            let z0 = Complex64::new(cs.z0_re.unwrap_or(0.0), cs.z0_im.unwrap_or(0.0));
            let r = cascade_simulate(&ctx.spec.coefficient(2), ctx.jet.alpha(), cs.theta0.unwrap_or(0.0), z0, &copts)?;
            ctx.write("cascade.csv", |b| write_cascade_csv(b, &r))?;
            report.cascade = Some(r);
            EXIT_OK
        }
        Command::Siegel => {
            let s = ctx.spec.options().schedule.unwrap_or_default();
            let defaults = CertificateOptions::default();
            let copts = CertificateOptions {
                max_order: flags.max_order.or(opts.max_order).unwrap_or(ctx.jet.truncation()),
                delta: s.delta.unwrap_or(defaults.delta),
                tau: s.tau.unwrap_or(defaults.tau),
                nu: s.nu,
                c: s.c,
                tolerances,
                ..defaults
            };
            let cert = h_norm_certificate(&ctx.jet, &copts)?;
            let bounds = verify_bounds(&cert.sequences);
            let mut power_sums = Vec::new();
            for s in [1.0, 2.0, 3.0] {
                for x in [0.5, 0.9, 0.99] {
                    power_sums.push(power_sum_check(s, x, 1_000_000)?);
                }
            }
            let code = if cert.all_pass { EXIT_OK } else { EXIT_UNDETERMINED };
            report.siegel = Some(SiegelSection {
                certificate: cert,
                bounds,
                power_sums,
            });
            code
        }
    };
    report.files = ctx.files.clone();
    if let Some(dir) = &ctx.out {
        fs::write(dir.join("report.json"), report.to_json())?;
    }
    Ok(Outcome { report, exit_code })
}

fn petals_command(ctx: &mut Context, c: &Classification, budget: Option<usize>) -> Result<PetalSection> {
    let model = PetalModel::from_classification(c)?;
    let sectors: Vec<_> = model.geometry.attracting.iter().map(|d| model.sector(*d)).collect();
    let maps: Vec<&dyn InfinityMap> = sectors.iter().map(|s| s as &dyn InfinityMap).collect();
    let region = region_params(
        &maps,
        &RegionBudget {
            steps: budget.unwrap_or(RegionBudget::default().steps),
            ..RegionBudget::default()
        },
    )?;
    let fibres = vec![0.0, 0.25, 0.5, 0.75];
    let resolution = 257;
    let mut lines = Vec::new();
    for &theta in &fibres {
        lines.extend(petal_boundary(&model, theta, Side::Attracting, region.a, resolution)?);
        lines.extend(petal_boundary(&model, theta, Side::Repelling, region.a, resolution)?);
    }
    ctx.write("petals.csv", |b| write_polylines_csv(b, &lines))?;
    let section = PetalSection {
        geometry: model.geometry.clone(),
        region,
        fibres,
        resolution,
        translation_modes: model.c.to_records(),
    };
    ctx.write("geometry.json", |b| {
        serde_json::to_writer_pretty(&mut *b, &section)?;
        Ok(())
    })?;
    Ok(section)
}

fn simulate_command(ctx: &mut Context, c: &Classification, budget: Option<usize>) -> Result<DynamicsSection> {
    let steps = budget.unwrap_or(10_000);
    let radius = 0.02;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let seeds: Vec<(f64, Complex64)> = (0..ctx.seeds)
        .map(|_| {
            let theta: f64 = rng.gen_range(0.0..1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            (theta, Complex64::from_polar(radius, phi))
        })
        .collect();
    let opts = OrbitOptions {
        max_steps: steps,
        record_every: 0,
        ..OrbitOptions::default()
    };
    let mut summary = OrbitSummary {
        seeds: seeds.len(),
        radius,
        steps,
        converged: 0,
        escaped: 0,
        budget: 0,
        max_displacement: 0.0,
        convergence_threshold: opts.convergence,
        escape_radius: opts.escape_radius,
    };
    for (i, (theta, z)) in seeds.iter().enumerate() {
        let keep = i < 4;
        let o = OrbitOptions {
            record_every: if keep { (steps / 1000).max(1) } else { 0 },
            ..opts
        };
        let t = iterate_orbit(&ctx.jet, *theta, *z, &o)?;
        match t.status {
            OrbitStatus::ConvergedToCurve => summary.converged += 1,
            OrbitStatus::Escaped => summary.escaped += 1,
            OrbitStatus::Budget => summary.budget += 1,
        }
        summary.max_displacement = summary.max_displacement.max((t.last - t.z0).norm());
        if keep {
            ctx.write(&format!("orbit_{i}.csv"), |b| write_orbit_csv(b, &t))?;
        }
    }
    let petals = match c.verdict {
        Verdict::Flower { .. } => Some(verify_petal(
            &ctx.jet,
            c,
            &PetalOptions {
                seeds_per_sector: ctx.seeds,
                max_steps: steps,
                seed: ctx.seed,
                ..PetalOptions::default()
            },
        )?),
        _ => None,
    };
    Ok(DynamicsSection { orbits: summary, petals })
}

/// Reads the spec file and runs the command; errors map to exit code 1 with a module-qualified code.
pub fn run_path(command: Command, spec: &Path, flags: &RunFlags) -> Result<Outcome> {
    let text = fs::read_to_string(spec)?;
    run(command, &text, flags)
}

pub fn error_line(e: &Error) -> String {
    format!("error[{}]: {e}", e.code())
}
