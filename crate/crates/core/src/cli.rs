//! Batch front-end: TOML scenario configs in, CSV tables and key-value reports out.
//!
//! A config has up to six sections:
//!
//! ```toml
//! [numeric]                  # precision, inversion profile, verification tolerances
//! precision = "double"
//!
//! [measures]                 # named measure literals
//! b = { kind = "bernoulli" }
//! mu = { kind = "pareto", alpha = 1.5 }
//!
//! [[pipeline]]               # operations on declared names
//! name = "s"
//! op = "bool_add"
//! args = ["b", "b"]
//!
//! [[outputs.invert]]
//! target = "s"
//! window = [-3.0, 3.0]
//!
//! [[outputs.tails]]
//! target = "mu"
//! y = { log10_from = 1.0, log10_to = 3.0, n = 5 }
//!
//! [[eval]]
//! transform = "cauchy"
//! target = "b"
//! points = [[0.0, 1.0]]
//!
//! [[verify]]
//! theorem = "T3.1"
//! measure = "mu"
//! ```
//!
//! Any `[numeric]` key can be overridden from the environment as
//! `BOOLRV_<KEY>` (for example `BOOLRV_QUAD_TOL=1e-12`).
//!
//! Exit status: 0 when every requested verification passes, 1 when one does
//! not, 2 on a config or numeric error (an `error.report` is written to `--out`).

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{self, default_remainder_grid, logspace, AsymptoticsReport, TheoremId, Verdict, VerifyOptions};
use crate::boolean_conv::{bool_add_all, bool_add_n, bool_add_power, bool_mult, TransformHandle};
use crate::boolean_max::{self, DistFunction};
use crate::error::{Error, Result};
use crate::free_additive::{belinschi_nica, free_power};
use crate::inversion::{self, InversionProfile, TailMethod};
use crate::measure::Measure;
use crate::real::Precision;

pub const ENV_PREFIX: &str = "BOOLRV_";

#[derive(Debug, Parser)]
#[command(name = "boolrv", version, about = "Boolean convolution transforms and tail-asymptotic checks")]
struct Cli {
    #[command(subcommand)]
    verb: VerbArgs,
    /// Scenario config (TOML).
    #[arg(long, global = true, env = "BOOLRV_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "BOOLRV_PRECISION")]
    precision: Option<Precision>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true, env = "BOOLRV_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true, default_value = "out", env = "BOOLRV_OUT")]
    out: PathBuf,
    #[arg(long, global = true, env = "BOOLRV_SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum VerbArgs {
    /// Evaluate transforms at points.
    Eval,
    /// Run Boolean sums, products and max convolutions.
    Convolve,
    /// Run Boolean, free and max powers.
    Power,
    /// Run Belinschi–Nica maps.
    Bn,
    /// Recover atoms, densities and total mass.
    Invert,
    /// Tail tables.
    Tails,
    /// Run verification scenarios; theorem ids given here run their default scenarios.
    Verify { theorems: Vec<String> },
    /// Everything the config requests.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verb {
    Eval,
    Convolve,
    Power,
    Bn,
    Invert,
    Tails,
    Verify,
    Report,
}

impl Verb {
    fn name(self) -> &'static str {
        match self {
            Verb::Eval => "eval",
            Verb::Convolve => "convolve",
            Verb::Power => "power",
            Verb::Bn => "bn",
            Verb::Invert => "invert",
            Verb::Tails => "tails",
            Verb::Verify => "verify",
            Verb::Report => "report",
        }
    }
}

/// A measure literal. Parameters default to the unit scale.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Dirac { at: f64 },
    Bernoulli,
    Atomic { atoms: Vec<(f64, f64)> },
    Grid { xs: Vec<f64>, ws: Vec<f64> },
    Pareto {
        alpha: f64,
        #[serde(default = "one")]
        xm: f64,
    },
    Cauchy,
    Semicircle {
        #[serde(default = "one")]
        variance: f64,
    },
    /// Weighted mixture of other declared measures.
    Mixture { components: Vec<(f64, String)> },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub name: String,
    pub op: String,
    #[serde(default)]
    pub args: Vec<String>,
    pub n: Option<u32>,
    pub t: Option<f64>,
}

/// Grid of abscissae: an explicit list or a log-spaced range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Log { log10_from: f64, log10_to: f64, n: usize },
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Grid::List(v) if v.is_empty() => Err(Error::Config("grid is empty".into())),
            Grid::List(v) => Ok(v.clone()),
            Grid::Log { n: 0, .. } => Err(Error::Config("grid needs n >= 1".into())),
            Grid::Log { log10_from, log10_to, n } => Ok(logspace(*log10_from, *log10_to, *n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertSpec {
    pub target: String,
    /// Atom search window.
    #[serde(default = "default_window")]
    pub window: (f64, f64),
    /// Density abscissae; no density table without it.
    pub x: Option<Grid>,
}

fn default_window() -> (f64, f64) {
    (-10.0, 10.0)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsSpec {
    pub target: String,
    pub y: Grid,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub invert: Vec<InvertSpec>,
    #[serde(default)]
    pub tails: Vec<TailsSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSpec {
    /// One of `cauchy` (or `g`), `f`, `k`, `eta`, `psi`, `b`.
    pub transform: String,
    pub target: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub theorem: String,
    /// Without a measure the built-in scenarios run.
    pub measure: Option<String>,
    /// Second measure for product scenarios.
    pub other: Option<String>,
    pub y: Option<Grid>,
    pub n: Option<u32>,
    pub t: Option<f64>,
    /// Point `(re, im)` for the Burgers check.
    pub z: Option<(f64, f64)>,
    pub first_step: Option<f64>,
    pub levels: Option<usize>,
    /// Classical Breiman by Monte Carlo instead of the Boolean product.
    #[serde(default)]
    pub monte_carlo: bool,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericConfig {
    pub precision: Option<Precision>,
    pub eps_schedule: Option<Vec<f64>>,
    pub order: Option<usize>,
    pub quad_tol: Option<f64>,
    pub scan_points: Option<usize>,
    pub mass_eps: Option<f64>,
    pub clip_negative: Option<bool>,
    /// `contour` or `density_fit`.
    pub tail_method: Option<String>,
    pub upper_factor: Option<f64>,
    /// Overrides every scenario's ratio tolerance.
    pub tolerance: Option<f64>,
    pub slope_margin: Option<f64>,
    pub r: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

fn parse_env<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Config(format!("{ENV_PREFIX}{key}: cannot parse '{raw}'")))
}

impl NumericConfig {
    /// Applies `BOOLRV_<KEY>` overrides read through `get`.
    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<()> {
        let var = |k: &str| get(&format!("{ENV_PREFIX}{k}"));
        if let Some(v) = var("PRECISION") {
            self.precision = Some(v.trim().parse().map_err(Error::Config)?);
        }
        if let Some(v) = var("EPS_SCHEDULE") {
            self.eps_schedule = Some(v.split(',').map(|s| parse_env("EPS_SCHEDULE", s)).collect::<Result<_>>()?);
        }
        macro_rules! scalar {
            ($($field:ident => $key:literal),*) => {$(
                if let Some(v) = var($key) {
                    self.$field = Some(parse_env($key, &v)?);
                }
            )*};
        }
        scalar!(
            order => "ORDER",
            quad_tol => "QUAD_TOL",
            scan_points => "SCAN_POINTS",
            mass_eps => "MASS_EPS",
            clip_negative => "CLIP_NEGATIVE",
            tail_method => "TAIL_METHOD",
            upper_factor => "UPPER_FACTOR",
            tolerance => "TOLERANCE",
            slope_margin => "SLOPE_MARGIN",
            r => "R",
            samples => "SAMPLES",
            seed => "SEED"
        );
        Ok(())
    }

    pub fn profile(&self, precision: Precision) -> Result<InversionProfile> {
        let mut p = InversionProfile { precision, ..InversionProfile::default() };
        if let Some(e) = &self.eps_schedule {
            p.eps_schedule = e.clone();
            if self.order.is_none() {
                p.order = p.order.min(e.len().saturating_sub(1)).max(1);
            }
        }
        if let Some(o) = self.order {
            p.order = o;
        }
        if let Some(v) = self.quad_tol {
            p.quad_tol = v;
        }
        if let Some(v) = self.scan_points {
            p.scan_points = v;
        }
        if let Some(v) = self.mass_eps {
            p.mass_eps = v;
        }
        if let Some(v) = self.clip_negative {
            p.clip_negative = v;
        }
        p.tail_method = match self.tail_method.as_deref() {
            None | Some("contour") => TailMethod::Contour,
            Some("density_fit") => TailMethod::DensityFit { upper_factor: self.upper_factor.unwrap_or(1e3) },
            Some(other) => return Err(Error::Config(format!("unknown tail_method '{other}'"))),
        };
        p.validate().map_err(|e| Error::Config(format!("numeric: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub measures: BTreeMap<String, MeasureSpec>,
    pub pipeline: Option<Vec<Step>>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub numeric: NumericConfig,
    #[serde(default)]
    pub eval: Vec<EvalSpec>,
    #[serde(default)]
    pub verify: Vec<VerifySpec>,
}

const OPS: &[(&str, usize, Verb)] = &[
    ("bool_add", 0, Verb::Convolve),
    ("bool_add_n", 1, Verb::Power),
    ("bool_add_power", 1, Verb::Power),
    ("bool_mult", 2, Verb::Convolve),
    ("free_power", 1, Verb::Power),
    ("bn_map", 1, Verb::Bn),
    ("bool_max_conv", 2, Verb::Convolve),
    ("max_product", 2, Verb::Convolve),
    ("bool_max_power", 1, Verb::Power),
    ("free_max_power", 1, Verb::Power),
    ("classical_max_power", 1, Verb::Power),
    ("x_map", 1, Verb::Convolve),
    ("x_inv", 1, Verb::Convolve),
];

fn op_info(op: &str) -> Result<(usize, Verb)> {
    OPS.iter()
        .find(|(n, _, _)| *n == op)
        .map(|(_, a, v)| (*a, *v))
        .ok_or_else(|| Error::Config(format!("unknown pipeline op '{op}'")))
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<ScenarioConfig> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ScenarioConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ScenarioConfig::parse(&text)
    }

    /// Schema checks: non-empty pipeline, known ops and arities, names declared before use,
    /// known theorem ids.
    pub fn validate(&self) -> Result<()> {
        let mut names: Vec<&str> = self.measures.keys().map(String::as_str).collect();
        for (name, spec) in &self.measures {
            if let MeasureSpec::Mixture { components } = spec {
                for (_, c) in components {
                    if !self.measures.contains_key(c) {
                        return Err(Error::Config(format!("mixture '{name}' references unknown measure '{c}'")));
                    }
                }
            }
        }
        if let Some(steps) = &self.pipeline {
            if steps.is_empty() {
                return Err(Error::Config("pipeline is empty".into()));
            }
            for s in steps {
                let (arity, _) = op_info(&s.op)?;
                let ok = if arity == 0 { !s.args.is_empty() } else { s.args.len() == arity };
                if !ok {
                    return Err(Error::Config(format!("step '{}': wrong number of args for {}", s.name, s.op)));
                }
                for a in &s.args {
                    if !names.contains(&a.as_str()) {
                        return Err(Error::Config(format!("step '{}' references undeclared name '{a}'", s.name)));
                    }
                }
                let needs_n = matches!(s.op.as_str(), "bool_add_n" | "bool_max_power" | "free_max_power" | "classical_max_power");
                let needs_t = matches!(s.op.as_str(), "bool_add_power" | "free_power" | "bn_map");
                if needs_n && s.n.is_none() {
                    return Err(Error::Config(format!("step '{}': {} needs n", s.name, s.op)));
                }
                if needs_t && s.t.is_none() {
                    return Err(Error::Config(format!("step '{}': {} needs t", s.name, s.op)));
                }
                if names.contains(&s.name.as_str()) {
                    return Err(Error::Config(format!("name '{}' is declared twice", s.name)));
                }
                names.push(&s.name);
            }
        }
        let targets = self
            .outputs
            .invert
            .iter()
            .map(|o| &o.target)
            .chain(self.outputs.tails.iter().map(|o| &o.target))
            .chain(self.eval.iter().map(|e| &e.target))
            .chain(self.verify.iter().filter_map(|v| v.measure.as_ref()))
            .chain(self.verify.iter().filter_map(|v| v.other.as_ref()));
        for t in targets {
            if !names.contains(&t.as_str()) {
                return Err(Error::Config(format!("output references undeclared name '{t}'")));
            }
        }
        for v in &self.verify {
            v.theorem.parse::<TheoremId>()?;
            for m in v.measure.iter().chain(&v.other) {
                if !self.measures.contains_key(m) {
                    return Err(Error::Config(format!("verify {}: '{m}' must be a declared measure", v.theorem)));
                }
            }
        }
        for e in &self.eval {
            transform_fn(&e.transform)?;
        }
        if self.pipeline.is_none() && self.eval.is_empty() && self.verify.is_empty() && self.outputs == Outputs::default() {
            return Err(Error::Config("config requests no work".into()));
        }
        Ok(())
    }
}

/// A measure literal resolved to a validated [`Measure`].
pub fn build_measure(name: &str, specs: &BTreeMap<String, MeasureSpec>, depth: usize) -> Result<Measure> {
    if depth > 16 {
        return Err(Error::Config(format!("mixture nesting through '{name}' is too deep")));
    }
    let spec = specs.get(name).ok_or_else(|| Error::Config(format!("unknown measure '{name}'")))?;
    match spec {
        MeasureSpec::Dirac { at } => Measure::atomic(vec![(*at, 1.0)]),
        MeasureSpec::Bernoulli => Ok(Measure::bernoulli()),
        MeasureSpec::Atomic { atoms } => Measure::atomic(atoms.clone()),
        MeasureSpec::Grid { xs, ws } => Measure::grid(xs.clone(), ws.clone()),
        MeasureSpec::Pareto { alpha, xm } => Measure::pareto(*alpha, *xm),
        MeasureSpec::Cauchy => Ok(Measure::StandardCauchy),
        MeasureSpec::Semicircle { variance } => Measure::semicircle(*variance),
        MeasureSpec::Mixture { components } => {
            let parts = components
                .iter()
                .map(|(w, c)| Ok((*w, build_measure(c, specs, depth + 1)?)))
                .collect::<Result<Vec<_>>>()?;
            Measure::mixture(parts)
        }
    }
}

#[derive(Debug, Clone)]
enum Value {
    Handle(TransformHandle),
    Dist(DistFunction),
}

impl Value {
    fn handle(&self, name: &str) -> Result<&TransformHandle> {
        match self {
            Value::Handle(h) => Ok(h),
            Value::Dist(_) => Err(Error::Config(format!("'{name}' is a distribution function, not a transform handle"))),
        }
    }

    fn dist(&self) -> DistFunction {
        match self {
            Value::Dist(d) => d.clone(),
            Value::Handle(h) => match h.as_leaf() {
                Some(m) => DistFunction::from_measure(m),
                None => {
                    let h = h.clone();
                    let prof = InversionProfile::default();
                    DistFunction::from_survival("handle", move |y| inversion::tail_mass(&h, y, &prof).map_or(f64::NAN, |t| t.value))
                }
            },
        }
    }
}

struct Env {
    measures: BTreeMap<String, Measure>,
    values: HashMap<String, Value>,
    order: Vec<(Step, Verb)>,
}

impl Env {
    fn build(cfg: &ScenarioConfig) -> Result<Env> {
        let mut measures = BTreeMap::new();
        let mut values = HashMap::new();
        for name in cfg.measures.keys() {
            let m = build_measure(name, &cfg.measures, 0)?;
            values.insert(name.clone(), Value::Handle(TransformHandle::leaf(m.clone())));
            measures.insert(name.clone(), m);
        }
        let mut order = Vec::new();
        for s in cfg.pipeline.iter().flatten() {
            let (_, verb) = op_info(&s.op)?;
            let get = |i: usize| -> &Value { &values[&s.args[i]] };
            let h = |i: usize| get(i).handle(&s.args[i]);
            let n = s.n.unwrap_or(0);
            let t = s.t.unwrap_or(f64::NAN);
            let v = match s.op.as_str() {
                "bool_add" => Value::Handle(bool_add_all(&s.args.iter().enumerate().map(|(i, _)| h(i).cloned()).collect::<Result<Vec<_>>>()?)),
                "bool_add_n" => Value::Handle(bool_add_n(h(0)?, n as usize)?),
                "bool_add_power" => Value::Handle(bool_add_power(h(0)?, t)?),
                "bool_mult" => Value::Handle(bool_mult(h(0)?, h(1)?)?),
                "free_power" => Value::Handle(free_power(h(0)?, t)?),
                "bn_map" => Value::Handle(belinschi_nica(h(0)?, t)?),
                "bool_max_conv" => Value::Dist(boolean_max::bool_max_conv(&get(0).dist(), &get(1).dist())),
                "max_product" => Value::Dist(boolean_max::product(&get(0).dist(), &get(1).dist())),
                "bool_max_power" => Value::Dist(boolean_max::bool_max_power(&get(0).dist(), n)?),
                "free_max_power" => Value::Dist(boolean_max::free_max_power(&get(0).dist(), n)?),
                "classical_max_power" => Value::Dist(boolean_max::classical_max_power(&get(0).dist(), n)?),
                "x_map" => Value::Dist(boolean_max::x_map(&get(0).dist())),
                "x_inv" => Value::Dist(boolean_max::x_inv(&get(0).dist())),
                other => return Err(Error::Config(format!("unknown pipeline op '{other}'"))),
            };
            values.insert(s.name.clone(), v);
            order.push((s.clone(), verb));
        }
        Ok(Env { measures, values, order })
    }

    fn value(&self, name: &str) -> Result<&Value> {
        self.values.get(name).ok_or_else(|| Error::Config(format!("unknown name '{name}'")))
    }

    fn measure(&self, name: &str) -> Result<&Measure> {
        self.measures.get(name).ok_or_else(|| Error::Config(format!("'{name}' must be a declared measure")))
    }
}

type TransformFn = fn(&TransformHandle, Complex64, Precision) -> Result<Complex64>;

fn transform_fn(name: &str) -> Result<TransformFn> {
    Ok(match name {
        "cauchy" | "g" => |h, z, p| h.g_at(z, p),
        "f" => |h, z, p| h.f_at(z, p),
        "eta" => |h, z, p| h.eta_at(z, p),
        "k" => |h, z, _| h.k(z),
        "psi" => |h, z, _| h.psi(z),
        "b" => |h, z, _| h.b(z),
        other => return Err(Error::Config(format!("unknown transform '{other}' (expected cauchy, f, k, eta, psi or b)"))),
    })
}

/// Flag values that override the config.
#[derive(Debug, Clone, Default)]
pub struct RunSettings {
    pub precision: Option<Precision>,
    pub workers: Option<usize>,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationOutcome {
    pub theorem: TheoremId,
    pub scenario: String,
    pub verdict: Verdict,
    pub max_deviation: f64,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub verb: Verb,
    pub precision: Precision,
    pub seed: u64,
    pub files: Vec<String>,
    pub verifications: Vec<VerificationOutcome>,
    pub all_passed: bool,
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let dest = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, &dest)?;
    Ok(dest)
}

fn fmt17(v: f64) -> String {
    asymptotics::fmt17(v)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

fn toml_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    toml::to_string(v).map(String::into_bytes).map_err(|e| Error::Io(format!("report serialization: {e}")))
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    env: Env,
    out: PathBuf,
    precision: Precision,
    profile: InversionProfile,
    vopts: VerifyOptions,
    files: Vec<String>,
}

impl Ctx<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.out, name, bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

#[derive(Serialize)]
struct StepSummary {
    name: String,
    op: String,
    args: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    positive: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    moment_count: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cumulants: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_mass: Option<f64>,
}

#[derive(Serialize)]
struct PipelineReport {
    verb: Verb,
    precision: Precision,
    steps: Vec<StepSummary>,
}

fn run_pipeline_verb(ctx: &mut Ctx, verb: Verb) -> Result<()> {
    let selected: Vec<(Step, Verb)> =
        ctx.env.order.iter().filter(|(_, v)| verb == Verb::Report || *v == verb).cloned().collect();
    if selected.is_empty() {
        if verb == Verb::Report {
            return Ok(());
        }
        return Err(Error::Config(format!("pipeline has no {} steps", verb.name())));
    }
    let steps = selected
        .par_iter()
        .map(|(s, _)| {
            let v = ctx.env.value(&s.name)?;
            let mut sum = StepSummary {
                name: s.name.clone(),
                op: s.op.clone(),
                args: s.args.clone(),
                n: s.n,
                t: s.t,
                kind: "distribution",
                positive: None,
                moment_count: None,
                mean: None,
                cumulants: None,
                total_mass: None,
            };
            if let Value::Handle(h) = v {
                let m = h.meta();
                sum.kind = "transform";
                sum.positive = Some(m.positive);
                sum.moment_count = Some(m.moment_count.to_string());
                sum.mean = m.mean;
                sum.cumulants = m.cumulants.clone();
                sum.total_mass = Some(inversion::total_mass(h, &ctx.profile)?.total);
            }
            Ok(sum)
        })
        .collect::<Result<Vec<_>>>()?;
    let rep = PipelineReport { verb, precision: ctx.precision, steps };
    let bytes = toml_bytes(&rep)?;
    ctx.write(&format!("{}.report", if verb == Verb::Report { "pipeline" } else { verb.name() }), &bytes)
}

fn run_eval(ctx: &mut Ctx, required: bool) -> Result<()> {
    if ctx.cfg.eval.is_empty() {
        return if required { Err(Error::Config("no [[eval]] entries".into())) } else { Ok(()) };
    }
    for (i, e) in ctx.cfg.eval.iter().enumerate() {
        let f = transform_fn(&e.transform)?;
        let h = ctx.env.value(&e.target)?.handle(&e.target)?.clone();
        let prec = ctx.precision;
        let vals = e
            .points
            .par_iter()
            .map(|&(re, im)| f(&h, Complex64::new(re, im), prec))
            .collect::<Result<Vec<_>>>()?;
        let rows = e
            .points
            .iter()
            .zip(&vals)
            .map(|(z, v)| vec![fmt17(z.0), fmt17(z.1), fmt17(v.re), fmt17(v.im)]);
        let bytes = csv_bytes(&["z_re", "z_im", "value_re", "value_im"], rows)?;
        ctx.write(&format!("eval_{i}_{}_{}.csv", e.target, e.transform), &bytes)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct InvertReport {
    target: String,
    window: (f64, f64),
    atom_count: usize,
    atom_mass: f64,
    total_mass: f64,
    total_mass_error: f64,
    clipped_mass: f64,
}

fn run_invert(ctx: &mut Ctx, required: bool) -> Result<()> {
    if ctx.cfg.outputs.invert.is_empty() {
        return if required { Err(Error::Config("no [[outputs.invert]] entries".into())) } else { Ok(()) };
    }
    for spec in &ctx.cfg.outputs.invert {
        let h = ctx.env.value(&spec.target)?.handle(&spec.target)?.clone();
        let found = inversion::atoms(&h, spec.window, &ctx.profile)?;
        let rows = found.iter().map(|a| vec![fmt17(a.location), fmt17(a.mass)]);
        let bytes = csv_bytes(&["location", "mass"], rows)?;
        ctx.write(&format!("invert_{}_atoms.csv", spec.target), &bytes)?;
        let known: Vec<(f64, f64)> = found.iter().map(|a| (a.location, a.mass)).collect();
        let mut clipped = 0.0;
        if let Some(g) = &spec.x {
            let xs = g.values()?;
            let prof = &ctx.profile;
            let dens = xs
                .par_iter()
                .map(|&x| inversion::density_detail(&h, x, prof, &known))
                .collect::<Result<Vec<_>>>()?;
            clipped = dens.iter().map(|d| d.clipped).sum();
            let rows = dens.iter().map(|d| vec![fmt17(d.x), fmt17(d.value), fmt17(d.clipped), fmt17(d.atom_indicator)]);
            let bytes = csv_bytes(&["x", "density", "clipped", "atom_indicator"], rows)?;
            ctx.write(&format!("invert_{}_density.csv", spec.target), &bytes)?;
        }
        let mass = inversion::total_mass(&h, &ctx.profile)?;
        let rep = InvertReport {
            target: spec.target.clone(),
            window: spec.window,
            atom_count: found.len(),
            atom_mass: found.iter().map(|a| a.mass).sum(),
            total_mass: mass.total,
            total_mass_error: mass.error,
            clipped_mass: clipped,
        };
        let bytes = toml_bytes(&rep)?;
        ctx.write(&format!("invert_{}.report", spec.target), &bytes)?;
    }
    Ok(())
}

fn run_tails(ctx: &mut Ctx, required: bool) -> Result<()> {
    if ctx.cfg.outputs.tails.is_empty() {
        return if required { Err(Error::Config("no [[outputs.tails]] entries".into())) } else { Ok(()) };
    }
    for spec in &ctx.cfg.outputs.tails {
        let ys = spec.y.values()?;
        let rows: Vec<(f64, f64, f64)> = match ctx.env.value(&spec.target)? {
            Value::Handle(h) => inversion::tail_table(h, &ys, &ctx.profile)?.into_iter().map(|t| (t.y, t.value, t.error)).collect(),
            Value::Dist(d) => ys.iter().map(|&y| (y, d.sf(y), 0.0)).collect(),
        };
        let bytes = csv_bytes(&["y", "tail", "error"], rows.iter().map(|r| vec![fmt17(r.0), fmt17(r.1), fmt17(r.2)]))?;
        ctx.write(&format!("tails_{}.csv", spec.target), &bytes)?;
    }
    Ok(())
}

fn run_verify_spec(spec: &VerifySpec, env: &Env, opts: &VerifyOptions) -> Result<Vec<AsymptoticsReport>> {
    let th: TheoremId = spec.theorem.parse()?;
    let Some(mname) = &spec.measure else {
        return asymptotics::default_scenarios(th, opts);
    };
    let m = env.measure(mname)?;
    let other = || -> Result<&Measure> {
        let o = spec.other.as_ref().ok_or_else(|| Error::Config(format!("verify {th}: needs 'other'")))?;
        env.measure(o)
    };
    let ys = match &spec.y {
        Some(g) => g.values()?,
        None if matches!(th, TheoremId::T3_1 | TheoremId::T3_2 | TheoremId::T3_3 | TheoremId::T3_4 | TheoremId::T3_5) => {
            default_remainder_grid(th)
        }
        None => logspace(2.0, 3.0, 5),
    };
    let n = spec.n.unwrap_or(2);
    let t = spec.t.unwrap_or(1.0);
    let r = match th {
        TheoremId::T2_2 => asymptotics::subexp_ratio(m, n as usize, &ys, opts)?,
        TheoremId::P2_3 => asymptotics::one_large_jump(m, n, &ys, opts)?,
        TheoremId::E2_4 => asymptotics::max_trio(m, n, &ys, opts)?,
        TheoremId::T2_5 => asymptotics::bn_tail_equivalence(m, t, &ys, opts)?,
        TheoremId::T2_6 if spec.monte_carlo => {
            asymptotics::classical_breiman_mc(m, other()?, &ys, spec.samples.unwrap_or(opts.samples), opts.seed, opts)?
        }
        TheoremId::T2_6 => asymptotics::breiman_boolean(m, other()?, &ys, opts)?,
        TheoremId::T3_1 | TheoremId::T3_2 | TheoremId::T3_3 | TheoremId::T3_4 | TheoremId::T3_5 => {
            asymptotics::verify_remainder(m, th, &ys, opts)?
        }
        TheoremId::L5_1 => asymptotics::mult_moment_index(m, other()?, &ys, opts)?,
        TheoremId::R5_3 => asymptotics::unbalanced_equal_index(m, other()?, &ys, opts)?,
        TheoremId::P6_6 => asymptotics::eta_psi_equivalence(m, &ys, opts)?,
        TheoremId::Burgers => {
            let z = spec.z.map_or(Complex64::new(0.0, 2.0), |(a, b)| Complex64::new(a, b));
            let h = TransformHandle::leaf(m.clone());
            asymptotics::burgers_check(&h, t, z, spec.first_step.unwrap_or(0.2), spec.levels.unwrap_or(4), opts)?
        }
    };
    Ok(vec![r])
}

fn run_verify(ctx: &mut Ctx, extra: &[TheoremId], required: bool) -> Result<Vec<VerificationOutcome>> {
    let mut specs: Vec<VerifySpec> = ctx.cfg.verify.clone();
    for th in extra {
        specs.push(VerifySpec {
            theorem: th.to_string(),
            measure: None,
            other: None,
            y: None,
            n: None,
            t: None,
            z: None,
            first_step: None,
            levels: None,
            monte_carlo: false,
            samples: None,
        });
    }
    if specs.is_empty() {
        return if required { Err(Error::Config("no [[verify]] entries or theorem ids".into())) } else { Ok(Vec::new()) };
    }
    let env = &ctx.env;
    let opts = &ctx.vopts;
    let results = specs.par_iter().map(|s| run_verify_spec(s, env, opts)).collect::<Result<Vec<_>>>()?;
    let mut outcomes = Vec::new();
    for (i, reports) in results.into_iter().enumerate() {
        for (j, rep) in reports.iter().enumerate() {
            let stem = format!("verify_{i}_{}_{j}", rep.theorem);
            let mut files = Vec::new();
            let mut buf = Vec::new();
            rep.write_csv(&mut buf)?;
            ctx.write(&format!("{stem}.csv"), &buf)?;
            files.push(format!("{stem}.csv"));
            for (k, s) in rep.extra.iter().enumerate() {
                let mut buf = Vec::new();
                rep.write_extra_csv(k, &mut buf)?;
                let name = format!("{stem}_{}.csv", s.name);
                ctx.write(&name, &buf)?;
                files.push(name);
            }
            let mut rep = rep.clone();
            rep.params.insert("seed".into(), ctx.vopts.seed as f64);
            ctx.write(&format!("{stem}.report"), rep.to_toml()?.as_bytes())?;
            files.push(format!("{stem}.report"));
            outcomes.push(VerificationOutcome {
                theorem: rep.theorem,
                scenario: rep.scenario.clone(),
                verdict: rep.verdict,
                max_deviation: rep.max_deviation,
                files,
            });
        }
    }
    Ok(outcomes)
}

/// Runs `verb` on a parsed config and writes its artifacts to `settings.out`.
pub fn run(verb: Verb, cfg: &ScenarioConfig, settings: &RunSettings, theorems: &[TheoremId]) -> Result<RunOutcome> {
    let mut numeric = cfg.numeric.clone();
    numeric.apply_env(|k| std::env::var(k).ok())?;
    let precision = settings.precision.or(numeric.precision).unwrap_or_default();
    let seed = settings.seed.or(numeric.seed).unwrap_or(0);
    let profile = numeric.profile(precision)?;
    let defaults = VerifyOptions::default();
    let vopts = VerifyOptions {
        precision,
        tolerance: numeric.tolerance,
        slope_margin: numeric.slope_margin.unwrap_or(defaults.slope_margin),
        r: numeric.r.unwrap_or(defaults.r),
        profile: profile.clone(),
        seed,
        samples: numeric.samples.unwrap_or(defaults.samples),
    };
    if !(vopts.r > 0.0 && vopts.r < 0.5) {
        return Err(Error::Config(format!("r must lie in (0, 1/2) (got {})", vopts.r)));
    }
    let work = || -> Result<RunOutcome> {
        let env = Env::build(cfg)?;
        let mut ctx = Ctx { cfg, env, out: settings.out.clone(), precision, profile, vopts, files: Vec::new() };
        let mut verifications = Vec::new();
        match verb {
            Verb::Eval => run_eval(&mut ctx, true)?,
            Verb::Convolve | Verb::Power | Verb::Bn => run_pipeline_verb(&mut ctx, verb)?,
            Verb::Invert => run_invert(&mut ctx, true)?,
            Verb::Tails => run_tails(&mut ctx, true)?,
            Verb::Verify => verifications = run_verify(&mut ctx, theorems, true)?,
            Verb::Report => {
                run_pipeline_verb(&mut ctx, verb)?;
                run_eval(&mut ctx, false)?;
                run_invert(&mut ctx, false)?;
                run_tails(&mut ctx, false)?;
                verifications = run_verify(&mut ctx, theorems, false)?;
            }
        }
        let all_passed = verifications.iter().all(|v| v.verdict == Verdict::Pass);
        let mut outcome = RunOutcome { verb, precision, seed, files: ctx.files.clone(), verifications, all_passed };
        outcome.files.push("summary.report".into());
        write_atomic(&ctx.out, "summary.report", &toml_bytes(&outcome)?)?;
        Ok(outcome)
    };
    match settings.workers {
        Some(0) => Err(Error::Config("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Short machine-readable name of an error variant.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidMeasure(_) => "invalid_measure",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Domain { .. } => "domain",
        Error::QuadratureFailure { .. } => "quadrature_failure",
        Error::Validity(_) => "validity",
        Error::Moment(_) => "moment",
        Error::NoConvergence { .. } => "no_convergence",
        Error::OutOfRegion { .. } => "out_of_region",
        Error::Fit(_) => "fit",
        Error::AtomProximity { .. } => "atom_proximity",
        Error::PrecisionBudget { .. } => "precision_budget",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let settings = RunSettings { precision: cli.precision, workers: cli.workers, out: cli.out.clone(), seed: cli.seed };
    let result = (|| -> Result<RunOutcome> {
        let (verb, ids) = match &cli.verb {
            VerbArgs::Eval => (Verb::Eval, Vec::new()),
            VerbArgs::Convolve => (Verb::Convolve, Vec::new()),
            VerbArgs::Power => (Verb::Power, Vec::new()),
            VerbArgs::Bn => (Verb::Bn, Vec::new()),
            VerbArgs::Invert => (Verb::Invert, Vec::new()),
            VerbArgs::Tails => (Verb::Tails, Vec::new()),
            VerbArgs::Report => (Verb::Report, Vec::new()),
            VerbArgs::Verify { theorems } => {
                (Verb::Verify, theorems.iter().map(|s| s.parse()).collect::<Result<Vec<TheoremId>>>()?)
            }
        };
        let cfg = match &cli.config {
            Some(p) => ScenarioConfig::load(p)?,
            None if verb == Verb::Verify && !ids.is_empty() => ScenarioConfig::default(),
            None => return Err(Error::Config(format!("{} needs --config", verb.name()))),
        };
        run(verb, &cfg, &settings, &ids)
    })();
    match result {
        Ok(outcome) => {
            for v in &outcome.verifications {
                println!("{} [{}] {} (max deviation {:.3e})", v.theorem, v.scenario, v.verdict, v.max_deviation);
            }
            if outcome.all_passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let rec = ErrorRecord { kind: error_kind(&e), message: e.to_string(), exit_code: 2 };
            if let Ok(bytes) = toml_bytes(&rec) {
                let _ = write_atomic(&settings.out, "error.report", &bytes);
            }
            2
        }
    }
}
