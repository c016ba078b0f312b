//! The map-spec file format.
//!
//! A spec is a JSON object with schema tag `fibred-flower/map-spec@1`:
//!
//! ```text
//! spec        := { "schema": "fibred-flower/map-spec@1",
//!                  "name"?: string,
//!                  "alpha": alpha,
//!                  "lambda"?: { "p": int, "q": int >= 1 },
//!                  "truncation": int >= 2,
//!                  "coefficients": [ { "order": int, "modes": [ { "freq": int, "re": num, "im": num } ] } ],
//!                  "diagnostic"?: bool,
//!                  "options"?: options }
//! alpha       := { "kind": "golden" }
//!              | { "kind": "float", "value": num }
//!              | { "kind": "continued-fraction", "quotients": [int >= 0], "periodic_tail"?: int }
//!              | { "kind": "rational", "p": int, "q": int >= 1 }
//! options     := { "max_order"?: int, "mean_tol"?: num, "divisor_floor"?: num,
//!                  "scheme"?: "formal" | "classical" | "polynomial" | "fatou",
//!                  "seeds"?: int, "budget"?: int, "seed"?: int,
//!                  "schedule"?: { "delta"?: num, "tau"?: num, "nu"?: int, "c"?: num },
//!                  "cascade"?: { "theta0"?: num, "z0_re"?: num, "z0_im"?: num, "steps"?: int } }
//! ```
//!
//! Unknown fields are errors, orders must be distinct with `2 <= order <= truncation`, and a rational
//! (or numerically rational) `alpha` is accepted only with `"diagnostic": true`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::fibredjet::FibredJet;
use crate::reduction::Scheme;
use crate::rotation::{Precision, RootOfUnity, RotationNumber};
use crate::trigpoly::{ModeRecord, TrigPoly};

pub const SPEC_SCHEMA: &str = "fibred-flower/map-spec@1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlphaSpec {
    Golden,
    Float {
        value: f64,
    },
    ContinuedFraction {
        quotients: Vec<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        periodic_tail: Option<usize>,
    },
    Rational {
        p: i64,
        q: u64,
    },
}

impl AlphaSpec {
    pub fn rotation(&self, precision: Precision) -> Result<RotationNumber> {
        let r = match self {
            AlphaSpec::Golden => RotationNumber::golden_mean(),
            AlphaSpec::Float { value } => RotationNumber::from_float(*value),
            AlphaSpec::ContinuedFraction {
                quotients,
                periodic_tail,
            } => RotationNumber::from_continued_fraction(quotients, *periodic_tail)?,
            AlphaSpec::Rational { p, q } => RotationNumber::rational(*p, *q)?,
        };
        Ok(r.with_precision(precision))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSpec {
    pub p: i64,
    pub q: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub order: usize,
    pub modes: Vec<ModeRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisor_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cascade: Option<CascadeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub alpha: AlphaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaSpec>,
    pub truncation: usize,
    pub coefficients: Vec<CoefficientSpec>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub diagnostic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<SpecOptions>,
}

const TOP: &[&str] = &[
    "schema",
    "name",
    "alpha",
    "lambda",
    "truncation",
    "coefficients",
    "diagnostic",
    "options",
];
const OPTIONS: &[&str] = &[
    "max_order",
    "mean_tol",
    "divisor_floor",
    "scheme",
    "seeds",
    "budget",
    "seed",
    "schedule",
    "cascade",
];
const SCHEDULE: &[&str] = &["delta", "tau", "nu", "c"];
const CASCADE: &[&str] = &["theta0", "z0_re", "z0_im", "steps"];
const MODE: &[&str] = &["freq", "re", "im"];

fn at(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

struct Checker {
    violations: Vec<String>,
}

impl Checker {
    fn push(&mut self, msg: String) {
        self.violations.push(msg);
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str, allowed: &[&str]) -> Option<&'a Map<String, Value>> {
        let Some(obj) = v.as_object() else {
            self.push(format!("{}: expected an object", if path.is_empty() { "spec" } else { path }));
            return None;
        };
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.push(format!("{}: unknown field", at(path, k)));
            }
        }
        Some(obj)
    }

    fn uint(&mut self, obj: &Map<String, Value>, path: &str, key: &str, required: bool) -> Option<u64> {
        match obj.get(key) {
            None if required => {
                self.push(format!("{}: missing", at(path, key)));
                None
            }
            None => None,
            Some(v) => v.as_u64().or_else(|| {
                self.push(format!("{}: expected a non-negative integer", at(path, key)));
                None
            }),
        }
    }

    fn int(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<i64> {
        match obj.get(key) {
            None => {
                self.push(format!("{}: missing", at(path, key)));
                None
            }
            Some(v) => v.as_i64().or_else(|| {
                self.push(format!("{}: expected an integer", at(path, key)));
                None
            }),
        }
    }

    fn number(&mut self, obj: &Map<String, Value>, path: &str, key: &str, required: bool) -> Option<f64> {
        match obj.get(key) {
            None if required => {
                self.push(format!("{}: missing", at(path, key)));
                None
            }
            None => None,
            Some(v) => v.as_f64().or_else(|| {
                self.push(format!("{}: expected a number", at(path, key)));
                None
            }),
        }
    }

    fn positive(&mut self, obj: &Map<String, Value>, path: &str, key: &str) {
        if let Some(x) = self.number(obj, path, key, false) {
            if !(x > 0.0) {
                self.push(format!("{}: must be positive (got {x})", at(path, key)));
            }
        }
    }
}

fn check_alpha(ch: &mut Checker, v: &Value, diagnostic: bool) {
    let Some(obj) = v.as_object() else {
        ch.push("alpha: expected an object with a \"kind\" field".into());
        return;
    };
    let kind = obj.get("kind").and_then(Value::as_str).unwrap_or("");
    let allowed: &[&str] = match kind {
        "golden" => &["kind"],
        "float" => &["kind", "value"],
        "continued-fraction" => &["kind", "quotients", "periodic_tail"],
        "rational" => &["kind", "p", "q"],
        other => {
            ch.push(format!(
                "alpha.kind: expected golden, float, continued-fraction or rational (got {other:?})"
            ));
            return;
        }
    };
    ch.object(v, "alpha", allowed);
    let resonance = |q: u64| {
        format!("alpha is rational with denominator {q}: resonance at n = {q}; set \"diagnostic\": true to accept it")
    };
    match kind {
        "float" => {
            if let Some(x) = ch.number(obj, "alpha", "value", true) {
                if !x.is_finite() {
                    ch.push("alpha.value: must be finite".into());
                } else if let Some(q) = RotationNumber::from_float(x).denominator() {
                    if !diagnostic {
                        ch.push(resonance(q));
                    }
                }
            }
        }
        "continued-fraction" => {
            let tail = ch.uint(obj, "alpha", "periodic_tail", false);
            match obj.get("quotients").and_then(Value::as_array) {
                None => ch.push("alpha.quotients: expected an array of non-negative integers".into()),
                Some(qs) => {
                    let parsed: Vec<Option<u64>> = qs.iter().map(Value::as_u64).collect();
                    if parsed.iter().any(Option::is_none) {
                        ch.push("alpha.quotients: expected non-negative integers".into());
                    } else {
                        let qs: Vec<u64> = parsed.into_iter().flatten().collect();
                        match RotationNumber::from_continued_fraction(&qs, tail.map(|t| t as usize)) {
                            Err(e) => ch.push(format!("alpha: {e}")),
                            Ok(r) => {
                                if let (Some(q), false) = (r.denominator(), diagnostic) {
                                    ch.push(resonance(q));
                                }
                            }
                        }
                    }
                }
            }
        }
        "rational" => {
            ch.int(obj, "alpha", "p");
            if let Some(q) = ch.uint(obj, "alpha", "q", true) {
                if q == 0 {
                    ch.push("alpha.q: must be >= 1".into());
                } else if !diagnostic {
                    ch.push(resonance(q));
                }
            }
        }
        _ => {}
    }
}

fn check_options(ch: &mut Checker, v: &Value) {
    let Some(obj) = ch.object(v, "options", OPTIONS) else {
        return;
    };
    for key in ["max_order", "seeds", "budget", "seed"] {
        ch.uint(obj, "options", key, false);
    }
    ch.positive(obj, "options", "mean_tol");
    ch.positive(obj, "options", "divisor_floor");
    if let Some(s) = obj.get("scheme") {
        if serde_json::from_value::<Scheme>(s.clone()).is_err() {
            ch.push(format!("options.scheme: expected formal, classical, polynomial or fatou (got {s})"));
        }
    }
    if let Some(s) = obj.get("schedule") {
        if let Some(o) = ch.object(s, "options.schedule", SCHEDULE) {
            ch.positive(o, "options.schedule", "delta");
            ch.positive(o, "options.schedule", "c");
            if let Some(t) = ch.number(o, "options.schedule", "tau", false) {
                if !(t >= 0.0) {
                    ch.push(format!("options.schedule.tau: must be >= 0 (got {t})"));
                }
            }
            ch.uint(o, "options.schedule", "nu", false);
        }
    }
    if let Some(c) = obj.get("cascade") {
        if let Some(o) = ch.object(c, "options.cascade", CASCADE) {
            for key in ["theta0", "z0_re", "z0_im"] {
                ch.number(o, "options.cascade", key, false);
            }
            ch.uint(o, "options.cascade", "steps", false);
        }
    }
}

fn check(v: &Value, allow_rational: bool) -> Vec<String> {
    let mut ch = Checker { violations: vec![] };
    let Some(top) = ch.object(v, "", TOP) else {
        return ch.violations;
    };
    match top.get("schema").and_then(Value::as_str) {
        Some(SPEC_SCHEMA) => {}
        Some(other) => ch.push(format!("schema: expected {SPEC_SCHEMA:?} (got {other:?})")),
        None => ch.push(format!("schema: missing (expected {SPEC_SCHEMA:?})")),
    }
    if let Some(n) = top.get("name") {
        if !n.is_string() {
            ch.push("name: expected a string".into());
        }
    }
    let diagnostic = match top.get("diagnostic") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => {
            ch.push("diagnostic: expected a boolean".into());
            false
        }
    } || allow_rational;
    match top.get("alpha") {
        None => ch.push("alpha: missing".into()),
        Some(a) => check_alpha(&mut ch, a, diagnostic),
    }
    if let Some(l) = top.get("lambda") {
        if let Some(o) = ch.object(l, "lambda", &["p", "q"]) {
            let p = ch.int(o, "lambda", "p");
            let q = ch.uint(o, "lambda", "q", true);
            if let (Some(p), Some(q)) = (p, q) {
                if let Err(e) = RootOfUnity::new(p, q) {
                    ch.push(format!("lambda: {e}"));
                }
            }
        }
    }
    let truncation = ch.uint(top, "", "truncation", true);
    if let Some(n) = truncation {
        if n < 2 {
            ch.push(format!("truncation: must be >= 2 (got {n})"));
        }
    }
    match top.get("coefficients").map(|c| c.as_array()) {
        None => ch.push("coefficients: missing".into()),
        Some(None) => ch.push("coefficients: expected an array".into()),
        Some(Some(list)) => {
            let mut seen = std::collections::BTreeSet::new();
            for (i, c) in list.iter().enumerate() {
                let path = format!("coefficients[{i}]");
                let Some(o) = ch.object(c, &path, &["order", "modes"]) else {
                    continue;
                };
                if let Some(order) = ch.uint(o, &path, "order", true) {
                    if !seen.insert(order) {
                        ch.push(format!("{path}.order: duplicate order {order}"));
                    }
                    if order < 2 || truncation.is_some_and(|n| order > n) {
                        ch.push(format!(
                            "{path}.order: must satisfy 2 <= order <= truncation (got {order})"
                        ));
                    }
                }
                match o.get("modes").and_then(Value::as_array) {
                    None => ch.push(format!("{path}.modes: expected an array")),
                    Some(modes) => {
                        let mut freqs = std::collections::BTreeSet::new();
                        for (m, mode) in modes.iter().enumerate() {
                            let mp = format!("{path}.modes[{m}]");
                            let Some(mo) = ch.object(mode, &mp, MODE) else {
                                continue;
                            };
                            if let Some(f) = ch.int(mo, &mp, "freq") {
                                if !freqs.insert(f) {
                                    ch.push(format!("{mp}.freq: duplicate frequency {f}"));
                                }
                            }
                            for key in ["re", "im"] {
                                if let Some(x) = ch.number(mo, &mp, key, true) {
                                    if !x.is_finite() {
                                        ch.push(format!("{mp}.{key}: must be finite"));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if let Some(o) = top.get("options") {
        check_options(&mut ch, o);
    }
    ch.violations
}

/// Parses and validates a spec, reporting every violation. `allow_rational` plays the role of the
/// spec's own `diagnostic` flag.
pub fn parse_spec(text: &str, allow_rational: bool) -> Result<MapSpec> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(vec![format!("syntax: {e}")]))?;
    let violations = check(&value, allow_rational);
    if !violations.is_empty() {
        return Err(Error::InvalidSpec(violations));
    }
    serde_json::from_value(value).map_err(|e| Error::InvalidSpec(vec![e.to_string()]))
}

pub fn emit_spec(spec: &MapSpec) -> String {
    let mut s = serde_json::to_string_pretty(spec).expect("spec serializes");
    s.push('\n');
    s
}

impl MapSpec {
    pub fn new(alpha: AlphaSpec, truncation: usize, coefficients: impl IntoIterator<Item = (usize, TrigPoly)>) -> Self {
        Self {
            schema: SPEC_SCHEMA.into(),
            name: None,
            alpha,
            lambda: None,
            truncation,
            coefficients: coefficients
                .into_iter()
                .map(|(order, p)| CoefficientSpec {
                    order,
                    modes: p.to_records(),
                })
                .collect(),
            diagnostic: false,
            options: None,
        }
    }

    pub fn options(&self) -> SpecOptions {
        self.options.unwrap_or_default()
    }

    pub fn rotation(&self, precision: Precision) -> Result<RotationNumber> {
        self.alpha.rotation(precision)
    }

    pub fn multiplier(&self) -> Result<RootOfUnity> {
        match self.lambda {
            None => Ok(RootOfUnity::ONE),
            Some(l) => RootOfUnity::new(l.p, l.q),
        }
    }

    pub fn coefficient(&self, order: usize) -> TrigPoly {
        self.coefficients
            .iter()
            .find(|c| c.order == order)
            .map(|c| TrigPoly::from(c.modes.clone()))
            .unwrap_or_default()
    }

    pub fn to_jet(&self, precision: Precision) -> Result<FibredJet> {
        FibredJet::new(
            self.rotation(precision)?,
            self.multiplier()?,
            self.truncation,
            self.coefficients
                .iter()
                .map(|c| (c.order, TrigPoly::from(c.modes.clone()))),
        )
    }
}
