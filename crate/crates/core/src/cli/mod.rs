//! Command-line front end: `simulate`, `moments`, `estimate`, `verify` and
//! `discriminate`.
//!
//! Settings come from defaults, then an optional JSON config file, then
//! explicit flags. Exit codes: 0 success, 1 runtime or check failure,
//! 2 usage or validation error.

pub mod io;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::levy::LevySpec;
use crate::model::{CumulantVector, DilativeParams, ProcessSpec, SamplePath, DEFAULT_P_MAX};
use crate::partition::{kolmogorov_bound, moment_from_cumulants, scaled_increment_moment, MAX_PARTITION_SIZE};
use crate::pathstats::{
    estimate_alpha, estimate_holder_exponent, probe_times, DichotomyRule, GeometricGrid, HolderCentering,
};
use crate::seed::derive_seed;
use crate::simulate::{
    sample_batch, DeterministicPath, DeterministicSampler, FbmSampler, FlpSimulator, PathSampler, SimGrid,
    CHOLESKY_LIMIT, DEFAULT_WINDOW_FACTOR,
};
use crate::verify::{
    discrimination_experiment, verify_covariance, verify_cumulant_scaling, verify_kolmogorov_bound,
    verify_start_at_zero, verify_stationary_increments, CheckId, DiscriminationCriteria, Family, McConfig,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DILATIVE_OUT_DIR";
const DEFAULT_SEED: u64 = 42;
const DEFAULT_LEVY: &str = "cpois:rate=5,jumps=cexp:mu=1";

#[derive(Debug, Parser)]
#[command(
    name = "dilative",
    version,
    about = "Dilatively stable processes: moments, simulation, estimation and verification"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalArgs {
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file with default settings; explicit flags win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $DILATIVE_OUT_DIR or the working directory)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Omit the timestamp from reports
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessArg {
    Fbm,
    Flp,
    Identity,
    Power,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Alpha,
    Holder,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenteringArg {
    Gaussian,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Fbm,
    Power,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate sample paths and write one CSV per path
    Simulate(SimulateArgs),
    /// Tabulate exact increment moments and Kolmogorov bounds
    Moments(MomentsArgs),
    /// Estimate the scaling exponent and the Hölder exponent of paths
    Estimate(EstimateArgs),
    /// Run verification checks
    Verify(VerifyArgs),
    /// Run a two-exponent discrimination experiment
    Discriminate(DiscriminateArgs),
}

/// Process selection shared by several commands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ProcessArgs {
    #[arg(long, value_enum)]
    pub process: Option<ProcessArg>,
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Variance of X(1) for FBM
    #[arg(long)]
    pub var1: Option<f64>,
    /// Lévy driver for FLP, e.g. `cpois:rate=5,jumps=cexp:mu=1;gauss:sigma=0.3`
    #[arg(long)]
    pub levy: Option<String>,
    /// Exponent of the power path
    #[arg(long)]
    pub beta: Option<f64>,
    /// FLP truncation window as a multiple of the horizon
    #[arg(long)]
    pub window_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Add the geometric probe points used by `estimate` to the grid
    #[arg(long)]
    pub probes: bool,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub grid_anchors: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct MomentsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Cumulants c2,c3,... of X(1) (c1 = 0)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub cumulants: Option<Vec<f64>>,
    /// Even moment orders
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<usize>>,
    /// Lags
    #[arg(long, value_delimiter = ',')]
    pub h: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    /// CSV input files (`t,x`); without them paths are simulated
    #[arg(long, value_delimiter = ',')]
    pub input: Option<Vec<PathBuf>>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub grid_anchors: Option<usize>,
    /// Trend window of the dichotomy rule
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub min_level: Option<u32>,
    #[arg(long)]
    pub max_level: Option<u32>,
    #[arg(long, value_enum)]
    pub centering: Option<CenteringArg>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    /// Comma-separated check ids
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Standard-error multiplier
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Moment order of the Kolmogorov check
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub lags: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub anchors: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Covariance probe pairs `t1:t2`
    #[arg(long, value_delimiter = ',')]
    pub pairs: Option<Vec<String>>,
    #[arg(long)]
    pub h1: Option<f64>,
    #[arg(long)]
    pub h2: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscriminateArgs {
    #[arg(long)]
    pub h1: Option<f64>,
    #[arg(long)]
    pub h2: Option<f64>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long)]
    pub var1: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub grid_anchors: Option<usize>,
    /// Resolution T/steps of the finest geometric offset
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub accuracy_floor: Option<f64>,
    #[arg(long)]
    pub max_undecided: Option<f64>,
    /// Allow H1 = H2 and report chance-level accuracy
    #[arg(long)]
    pub null_control: bool,
}

/// Failure of a command, mapped to the exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::OrderOutOfRange { .. }
            | Error::SizeLimit { .. }
            | Error::OddOrder(_)
            | Error::Unsupported(_)
            | Error::InvalidCumulants(_)
            | Error::InvalidLevy(_)
            | Error::Window { .. }
            | Error::InvalidInput(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Resolved global settings.
#[derive(Debug, Clone)]
struct Globals {
    seed: u64,
    out: PathBuf,
    format: Format,
    timestamp: bool,
}

/// Overlays explicitly given flags onto the config file; unknown config keys
/// are usage errors.
fn merge_settings<T: Serialize + DeserializeOwned + Default>(
    global: &GlobalArgs,
    args: &T,
) -> CliResult<(GlobalArgs, T, Value)> {
    let mut merged = Map::new();
    if let Some(path) = &global.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        let Value::Object(obj) = value else {
            return usage("config file must contain a JSON object");
        };
        let mut allowed = object_keys(&GlobalArgs::default());
        allowed.extend(object_keys(&T::default()));
        if let Some(k) = obj.keys().find(|k| !allowed.contains(k)) {
            return usage(format!("unknown config key `{k}`"));
        }
        merged = obj;
    }
    for (k, v) in to_object(global).into_iter().chain(to_object(args)) {
        if !(v.is_null() || v == Value::Bool(false)) {
            merged.insert(k, v);
        }
    }
    let value = Value::Object(merged);
    let g: GlobalArgs =
        serde_json::from_value(value.clone()).map_err(|e| CliError::Usage(format!("invalid setting: {e}")))?;
    let t: T = serde_json::from_value(value.clone()).map_err(|e| CliError::Usage(format!("invalid setting: {e}")))?;
    let mut echo = value;
    if let Value::Object(o) = &mut echo {
        o.remove("config");
        o.remove("out");
    }
    Ok((g, t, echo))
}

fn to_object<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v) {
        Ok(Value::Object(o)) => o,
        _ => Map::new(),
    }
}

fn object_keys<T: Serialize>(v: &T) -> Vec<String> {
    to_object(v).keys().cloned().collect()
}

fn resolve_globals(g: &GlobalArgs, default_format: Format) -> Globals {
    let out = g
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    Globals {
        seed: g.seed.unwrap_or(DEFAULT_SEED),
        out,
        format: g.format.unwrap_or(default_format),
        timestamp: !g.no_timestamp,
    }
}

fn envelope(command: &str, globals: &Globals, config: &Value, results: Value) -> Value {
    let mut v = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": globals.seed,
        "config_echo": config,
        "results": results,
    });
    if globals.timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        v["timestamp"] = json!(secs);
    }
    v
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_report(globals: &Globals, name: &str, report: &Value) -> CliResult<String> {
    ensure_dir(&globals.out)?;
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
    let file = globals.out.join(format!("{name}.json"));
    std::fs::write(&file, &text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", file.display())))?;
    Ok(text)
}

/// Parses `std::env::args` and runs the command.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    ExitCode::from(run(cli))
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: Cli) -> u8 {
    let outcome = match &cli.command {
        Command::Simulate(a) => cmd_simulate(&cli.global, a),
        Command::Moments(a) => cmd_moments(&cli.global, a),
        Command::Estimate(a) => cmd_estimate(&cli.global, a),
        Command::Verify(a) => cmd_verify(&cli.global, a),
        Command::Discriminate(a) => cmd_discriminate(&cli.global, a),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}

fn levy_arg(p: &ProcessArgs) -> CliResult<LevySpec> {
    Ok(p.levy.as_deref().unwrap_or(DEFAULT_LEVY).parse::<LevySpec>()?)
}

fn process_spec(p: &ProcessArgs, default: ProcessArg) -> CliResult<ProcessSpec> {
    Ok(match p.process.unwrap_or(default) {
        ProcessArg::Fbm => ProcessSpec::fbm(p.hurst.unwrap_or(0.7), p.var1.unwrap_or(1.0))?,
        ProcessArg::Flp => ProcessSpec::flp(p.hurst.unwrap_or(0.75), levy_arg(p)?)?,
        ProcessArg::Identity => ProcessSpec::deterministic(DeterministicPath::Identity),
        ProcessArg::Power => ProcessSpec::deterministic(DeterministicPath::power(p.beta.unwrap_or(0.8))?),
        ProcessArg::Zero => ProcessSpec::deterministic(DeterministicPath::Zero),
    })
}

/// Anchor count of the geometric family: deterministic paths are only
/// singular at the origin, so they use the single grid anchored there.
fn default_anchors(deterministic: bool) -> usize {
    if deterministic {
        1
    } else {
        32
    }
}

fn is_deterministic(spec: &ProcessSpec) -> bool {
    matches!(spec.kind, crate::model::ProcessKind::Deterministic { .. })
}

fn window_of(p: &ProcessArgs, horizon: f64) -> f64 {
    p.window_factor.unwrap_or(DEFAULT_WINDOW_FACTOR) * horizon
}

/// Sampler observing `spec` at `times ⊂ [0, grid.horizon]`; uniform grids
/// beyond the direct factorization limit use the FFT method for FBM.
fn sampler_at(spec: &ProcessSpec, grid: &SimGrid, window: f64, times: &[f64]) -> CliResult<Box<dyn PathSampler>> {
    use crate::model::ProcessKind;
    let uniform = times.len() == grid.steps + 1 && times.iter().enumerate().all(|(k, t)| *t == grid.time(k));
    Ok(match &spec.kind {
        ProcessKind::Fbm { hurst, var1 } => {
            if uniform && times.len() > CHOLESKY_LIMIT {
                Box::new(FbmSampler::on_grid(*hurst, *var1, grid)?)
            } else {
                Box::new(FbmSampler::new(*hurst, *var1, times)?)
            }
        }
        ProcessKind::Flp { hurst, levy } => {
            Box::new(FlpSimulator::at_times(*hurst, levy.clone(), grid, window, times)?)
        }
        ProcessKind::Deterministic { path } => Box::new(DeterministicSampler::new(*path, times)),
    })
}

/// Sorted union of `a` and `b`, dropping points of `b` within 1e-12 of `a`.
fn union_times(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.to_vec();
    for &t in b {
        let tol = 1e-12 * t.abs();
        let i = a.partition_point(|x| *x < t - tol);
        if !(i < a.len() && (a[i] - t).abs() <= tol) {
            all.push(t);
        }
    }
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

fn process_label(spec: &ProcessSpec) -> Value {
    serde_json::to_value(&spec.kind).unwrap_or(Value::Null)
}

fn cmd_simulate(global: &GlobalArgs, args: &SimulateArgs) -> CliResult<bool> {
    let (g, a, echo) = merge_settings(global, args)?;
    let globals = resolve_globals(&g, Format::Json);
    let spec = process_spec(&a.process, ProcessArg::Fbm)?;
    let steps = a.steps.unwrap_or(1024);
    let horizon = a.horizon.unwrap_or(1.0);
    let paths = a.paths.unwrap_or(1);
    if paths == 0 {
        return usage("--paths must be ≥ 1");
    }
    let grid = SimGrid::new(horizon, steps, globals.seed)?;
    let mut notes = Vec::new();
    let mut times = grid.times();
    if a.probes {
        let family = GeometricGrid::anchored_family(
            horizon,
            steps,
            a.ratio.unwrap_or(0.7),
            a.grid_anchors.unwrap_or(default_anchors(is_deterministic(&spec))),
        )?;
        let probes = probe_times(&family);
        let union = union_times(&times, &probes);
        let too_large = matches!(spec.kind, crate::model::ProcessKind::Fbm { .. }) && union.len() > CHOLESKY_LIMIT;
        if too_large {
            notes.push(format!(
                "union of the uniform grid and {} probe points exceeds {CHOLESKY_LIMIT}; writing probe points only",
                probes.len()
            ));
            times = probes;
        } else {
            times = union;
        }
    }
    let sampler = sampler_at(&spec, &grid, window_of(&a.process, horizon), &times)?;
    let batch = sample_batch(sampler.as_ref(), paths, globals.seed)?;
    ensure_dir(&globals.out)?;
    let mut files = Vec::new();
    for (i, values) in batch.into_iter().enumerate() {
        let path = SamplePath::new(times.clone(), values)?;
        let name = format!("path_{i:04}.csv");
        io::write_path_file(&path, &globals.out.join(&name))?;
        files.push(
            json!({ "file": name, "seed": derive_seed(globals.seed, i as u64), "points": path.len(),
                           "value_at_start": path.values()[0] }),
        );
    }
    let results = json!([{ "process": process_label(&spec), "steps": steps, "horizon": horizon,
                           "points": times.len(), "paths": files, "notes": notes }]);
    let report = envelope("simulate", &globals, &echo, results);
    let text = write_report(&globals, "simulate", &report)?;
    match globals.format {
        Format::Json => print!("{text}"),
        Format::Csv => {
            println!(
                "wrote {paths} path(s): n={steps}, T={horizon}, seed={}, points={}",
                globals.seed,
                times.len()
            )
        }
    }
    Ok(true)
}

fn cmd_moments(global: &GlobalArgs, args: &MomentsArgs) -> CliResult<bool> {
    let (g, a, echo) = merge_settings(global, args)?;
    let globals = resolve_globals(&g, Format::Json);
    let orders = a.p.clone().unwrap_or_else(|| vec![2, 4]);
    let lags = a.h.clone().unwrap_or_else(|| vec![0.25, 0.5, 1.0]);
    if let Some(p) = orders.iter().find(|p| **p % 2 == 1) {
        return Err(Error::OddOrder(*p).into());
    }
    if let Some(h) = lags.iter().find(|h| !(**h > 0.0)) {
        return usage(format!("lags must be > 0 (got {h})"));
    }
    let p_max = orders.iter().copied().max().unwrap_or(2).max(DEFAULT_P_MAX);
    if p_max > MAX_PARTITION_SIZE {
        return Err(Error::SizeLimit {
            p: p_max,
            max: MAX_PARTITION_SIZE,
        }
        .into());
    }
    let (params, cumulants) = match (&a.cumulants, a.process.process) {
        (Some(c), _) => {
            let params = DilativeParams::stationary(a.process.hurst.unwrap_or(0.75), a.delta.unwrap_or(0.0));
            (params, CumulantVector::from_higher(c)?)
        }
        (None, Some(ProcessArg::Flp)) => {
            let spec = ProcessSpec::flp_with_order(a.process.hurst.unwrap_or(0.75), levy_arg(&a.process)?, p_max)?;
            (spec.params, spec.cumulants.expect("FLP has cumulants"))
        }
        (None, Some(ProcessArg::Fbm) | None) => {
            let h = a.process.hurst.unwrap_or(0.75);
            let params = DilativeParams::stationary(h, a.delta.unwrap_or(0.0));
            (params, CumulantVector::gaussian(a.process.var1.unwrap_or(1.0), p_max)?)
        }
        (None, Some(other)) => return usage(format!("{other:?} paths have no cumulants")),
    };
    params.validate().map_err(Error::InvalidParams)?;
    let mut rows = Vec::new();
    for &p in &orders {
        for &h in &lags {
            let moment = scaled_increment_moment(&params, &cumulants, p, h)?;
            let bound = if h < 1.0 {
                match kolmogorov_bound(&params, &cumulants, p, h) {
                    Ok(b) => Some(b),
                    Err(Error::Unsupported(_)) => None,
                    Err(e) => return Err(e.into()),
                }
            } else {
                None
            };
            rows.push(
                json!({ "p": p, "h": h, "scaled_moment": moment, "kolmogorov_bound": bound,
                              "moment_at_one": moment_from_cumulants(&cumulants, p)? }),
            );
        }
    }
    let results = Value::Array(rows);
    let report = envelope("moments", &globals, &echo, results.clone());
    let text = write_report(&globals, "moments", &report)?;
    match globals.format {
        Format::Json => print!("{text}"),
        Format::Csv => {
            let mut out = String::from("p,h,scaled_moment,kolmogorov_bound,moment_at_one\n");
            for r in results.as_array().into_iter().flatten() {
                let bound = r["kolmogorov_bound"]
                    .as_f64()
                    .map(|b| format!("{b:.16e}"))
                    .unwrap_or_default();
                out += &format!(
                    "{},{},{:.16e},{},{:.16e}\n",
                    r["p"],
                    r["h"],
                    r["scaled_moment"].as_f64().unwrap_or(f64::NAN),
                    bound,
                    r["moment_at_one"].as_f64().unwrap_or(f64::NAN)
                );
            }
            ensure_dir(&globals.out)?;
            std::fs::write(globals.out.join("moments.csv"), &out).map_err(|e| CliError::Runtime(e.to_string()))?;
            print!("{out}");
        }
    }
    Ok(true)
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

fn kappa_grid() -> Vec<f64> {
    crate::pathstats::default_kappa_grid()
}

/// Points of `path` on the uniform grid with `steps` cells, if all present.
fn uniform_subpath(path: &SamplePath, steps: usize) -> crate::error::Result<SamplePath> {
    let t0 = path.times()[0];
    let horizon = path.times()[path.len() - 1] - t0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = t0 + horizon * k as f64 / steps as f64;
        times.push(t);
        values.push(path.value_at(t)?);
    }
    SamplePath::new(times, values)
}

fn alpha_result(path: &SamplePath, family: &[GeometricGrid], rule: &DichotomyRule) -> CliResult<(Value, Option<f64>)> {
    match estimate_alpha(path, family, &kappa_grid(), rule) {
        Ok(est) => Ok((serde_json::to_value(&est).unwrap_or(Value::Null), Some(est.estimate))),
        Err(Error::BracketFailure { trace }) => Ok((json!({ "error": "bracket_failure", "trace": trace }), None)),
        Err(e) => Err(e.into()),
    }
}

fn holder_result(path: &SamplePath, min: u32, max: u32, centering: HolderCentering) -> CliResult<(Value, Option<f64>)> {
    let est = estimate_holder_exponent(path, min, max, centering)?;
    Ok((serde_json::to_value(est).unwrap_or(Value::Null), est.value()))
}

fn cmd_estimate(global: &GlobalArgs, args: &EstimateArgs) -> CliResult<bool> {
    let (g, a, echo) = merge_settings(global, args)?;
    let globals = resolve_globals(&g, Format::Json);
    let method = a.method.unwrap_or(MethodArg::Both);
    let want_alpha = method != MethodArg::Holder;
    let want_holder = method != MethodArg::Alpha;
    let ratio = a.ratio.unwrap_or(0.7);
    let simulated_deterministic = a.input.is_none()
        && matches!(
            a.process.process,
            Some(ProcessArg::Identity | ProcessArg::Power | ProcessArg::Zero)
        );
    let anchors = a.grid_anchors.unwrap_or(default_anchors(simulated_deterministic));
    let rule = DichotomyRule {
        window: a.window.unwrap_or(DichotomyRule::default().window),
        ..Default::default()
    };
    DichotomyRule::new(rule.window, rule.diverge_threshold, rule.vanish_threshold)?;
    let centering = match a.centering.unwrap_or(CenteringArg::Gaussian) {
        CenteringArg::Gaussian => HolderCentering::Gaussian,
        CenteringArg::Raw => HolderCentering::Raw,
    };
    let min_level_for = |max_level: u32| a.min_level.unwrap_or(6.min(max_level.saturating_sub(2)));
    let mut per_path = Vec::new();
    let mut alphas = Vec::new();
    let mut holders = Vec::new();
    let mut notes = Vec::new();

    if let Some(inputs) = &a.input {
        let steps = a.steps;
        for file in inputs {
            let path = io::read_path_file(file).map_err(|e| CliError::Runtime(format!("{}: {e}", file.display())))?;
            let horizon = path.times()[path.len() - 1];
            let mut entry = json!({ "source": file.display().to_string(), "points": path.len() });
            if want_alpha {
                let resolution = steps.unwrap_or(path.len() - 1);
                let family = GeometricGrid::anchored_family(horizon, resolution, ratio, anchors)?;
                let (v, est) = alpha_result(&path, &family, &rule)?;
                entry["alpha"] = v;
                alphas.extend(est);
            }
            if want_holder {
                let uniform = match steps {
                    Some(s) => uniform_subpath(&path, s)?,
                    None => path.clone(),
                };
                let levels = uniform.len() - 1;
                let max_level = a.max_level.unwrap_or(levels.max(1).ilog2());
                let (v, est) = holder_result(&uniform, min_level_for(max_level), max_level, centering)?;
                entry["holder"] = v;
                holders.extend(est);
            }
            per_path.push(entry);
        }
    } else {
        let spec = process_spec(&a.process, ProcessArg::Fbm)?;
        let steps = a.steps.unwrap_or(1 << 14);
        let horizon = a.horizon.unwrap_or(1.0);
        let paths = a.paths.unwrap_or(1);
        if paths == 0 {
            return usage("--paths must be ≥ 1");
        }
        let grid = SimGrid::new(horizon, steps, globals.seed)?;
        let window = window_of(&a.process, horizon);
        let mut entries: Vec<Value> = (0..paths)
            .map(|i| json!({ "source": format!("simulated #{i}") }))
            .collect();
        if want_alpha {
            let family = GeometricGrid::anchored_family(horizon, steps, ratio, anchors)?;
            let times = probe_times(&family);
            let sampler = sampler_at(&spec, &grid, window, &times)?;
            let batch = sample_batch(sampler.as_ref(), paths, derive_seed(globals.seed, 0))?;
            for (entry, values) in entries.iter_mut().zip(batch) {
                let path = SamplePath::new(times.clone(), values)?;
                let (v, est) = alpha_result(&path, &family, &rule)?;
                entry["alpha"] = v;
                alphas.extend(est);
            }
            notes.push(format!(
                "alpha: {} paths sampled exactly at {} probe points",
                paths,
                times.len()
            ));
        }
        if want_holder {
            let sampler = sampler_at(&spec, &grid, window, &grid.times())?;
            let batch = sample_batch(sampler.as_ref(), paths, derive_seed(globals.seed, 1))?;
            let max_level = a.max_level.unwrap_or(steps.ilog2());
            for (entry, values) in entries.iter_mut().zip(batch) {
                let path = SamplePath::new(grid.times(), values)?;
                let (v, est) = holder_result(&path, min_level_for(max_level), max_level, centering)?;
                entry["holder"] = v;
                holders.extend(est);
            }
            notes.push(format!(
                "holder: {paths} independent paths on the uniform grid, levels from {}",
                min_level_for(max_level)
            ));
        }
        if !spec.gaussian && matches!(spec.kind, crate::model::ProcessKind::Flp { .. }) {
            let levy = levy_arg(&a.process)?;
            if !levy.has_gaussian_component() {
                notes.push("driver has no Gaussian component: the divergence half of the dichotomy has weaker theoretical backing".into());
            }
        }
        per_path = entries;
    }
    let results = json!([{
        "alpha_median": median(&mut alphas),
        "holder_median": median(&mut holders),
        "paths": per_path,
        "notes": notes,
    }]);
    let report = envelope("estimate", &globals, &echo, results);
    let text = write_report(&globals, "estimate", &report)?;
    print!("{text}");
    Ok(true)
}

fn parse_pairs(pairs: &[String]) -> CliResult<Vec<(f64, f64)>> {
    pairs
        .iter()
        .map(|s| {
            let (a, b) = s
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("pair `{s}` is not `t1:t2`")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("not a number in `{s}`")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

fn cmd_verify(global: &GlobalArgs, args: &VerifyArgs) -> CliResult<bool> {
    let (g, a, echo) = merge_settings(global, args)?;
    let globals = resolve_globals(&g, Format::Json);
    let default_checks = [
        "start_at_zero",
        "covariance",
        "cumulant_scaling",
        "stationary_increments",
        "kolmogorov",
    ];
    let checks: Vec<CheckId> = match &a.checks {
        Some(list) => list
            .iter()
            .map(|s| s.parse::<CheckId>())
            .collect::<crate::error::Result<_>>()?,
        None => default_checks.iter().map(|s| s.parse().expect("known id")).collect(),
    };
    let spec = process_spec(&a.process, ProcessArg::Fbm)?;
    let horizon = a.horizon.unwrap_or(2.0);
    let grid = SimGrid::new(horizon, a.steps.unwrap_or(256), globals.seed)?;
    let mut mc = McConfig::new(a.paths.unwrap_or(2000), grid)?.with_tolerance(a.tolerance.unwrap_or(4.0))?;
    mc.flp_window_factor = a.process.window_factor.unwrap_or(DEFAULT_WINDOW_FACTOR);
    let mut reports = Vec::new();
    for check in checks {
        match check {
            CheckId::StartAtZero => reports.push(verify_start_at_zero(&spec, &mc)?),
            CheckId::Covariance => {
                let pairs = match &a.pairs {
                    Some(p) => parse_pairs(p)?,
                    None => {
                        let t = [horizon / 4.0, horizon / 2.0, horizon];
                        vec![
                            (t[0], t[0]),
                            (t[1], t[1]),
                            (t[2], t[2]),
                            (t[0], t[1]),
                            (t[1], t[2]),
                            (t[0], t[2]),
                        ]
                    }
                };
                reports.push(verify_covariance(&spec, &pairs, &mc)?);
            }
            CheckId::CumulantScaling => {
                let orders = a.orders.clone().unwrap_or_else(|| vec![2, 3, 4]);
                let times = a
                    .times
                    .clone()
                    .unwrap_or_else(|| [0.125, 0.25, 0.5, 1.0].iter().map(|f| f * horizon).collect());
                reports.push(verify_cumulant_scaling(&spec, &orders, &times, &mc)?);
            }
            CheckId::StationaryIncrements => {
                let lags = a.lags.clone().unwrap_or_else(|| vec![horizon / 8.0, horizon / 4.0]);
                let anchors = a
                    .anchors
                    .clone()
                    .unwrap_or_else(|| vec![0.0, horizon / 4.0, horizon / 2.0]);
                reports.push(verify_stationary_increments(&spec, &lags, &anchors, &mc)?);
            }
            CheckId::Kolmogorov => {
                let lags = a.lags.clone().unwrap_or_else(|| vec![0.25, 0.5]);
                reports.push(verify_kolmogorov_bound(&spec, a.p.unwrap_or(2), &lags, &mc)?);
            }
            CheckId::Discrimination => {
                let family = match spec.kind {
                    crate::model::ProcessKind::Fbm { var1, .. } => Family::Fbm { var1 },
                    crate::model::ProcessKind::Deterministic { .. } => Family::Power,
                    _ => return usage("discrimination supports the fbm and power families"),
                };
                let (h1, h2) = (a.h1.unwrap_or(0.6), a.h2.unwrap_or(0.8));
                let grids =
                    GeometricGrid::anchored_family(1.0, 1 << 14, 0.7, default_anchors(family == Family::Power))?;
                let disc_mc = McConfig::new(200, SimGrid::new(1.0, 1 << 14, globals.seed)?)?;
                let out = discrimination_experiment(
                    h1,
                    h2,
                    family,
                    &disc_mc,
                    &grids,
                    &DichotomyRule::default(),
                    &DiscriminationCriteria::default(),
                )?;
                reports.extend(out.reports);
            }
        }
    }
    let all_pass = reports.iter().all(|r| r.pass);
    let results = serde_json::to_value(&reports).map_err(|e| CliError::Runtime(e.to_string()))?;
    let report = envelope("verify", &globals, &echo, results);
    let text = write_report(&globals, "verify", &report)?;
    print!("{text}");
    Ok(all_pass)
}

fn cmd_discriminate(global: &GlobalArgs, args: &DiscriminateArgs) -> CliResult<bool> {
    let (g, a, echo) = merge_settings(global, args)?;
    let globals = resolve_globals(&g, Format::Json);
    let h1 = a.h1.unwrap_or(0.6);
    let h2 = a.h2.unwrap_or(0.8);
    if h1 == h2 && !a.null_control {
        return usage(format!(
            "H1 = H2 = {h1}: exponents must differ (use --null-control for a chance-level run)"
        ));
    }
    if h1 != h2 && a.null_control {
        return usage("--null-control needs H1 = H2");
    }
    let family = match a.family.unwrap_or(FamilyArg::Fbm) {
        FamilyArg::Fbm => Family::Fbm {
            var1: a.var1.unwrap_or(1.0),
        },
        FamilyArg::Power => Family::Power,
    };
    for h in [h1, h2] {
        if !(h > 0.0 && h < 1.0) {
            return usage(format!("exponents must lie in (0,1) (got {h})"));
        }
    }
    let steps = a.steps.unwrap_or(1 << 14);
    let grids = GeometricGrid::anchored_family(
        1.0,
        steps,
        a.ratio.unwrap_or(0.7),
        a.grid_anchors.unwrap_or(default_anchors(family == Family::Power)),
    )?;
    let mc = McConfig::new(a.paths.unwrap_or(200).max(8), SimGrid::new(1.0, steps, globals.seed)?)?;
    let rule = DichotomyRule {
        window: a.window.unwrap_or(DichotomyRule::default().window),
        ..Default::default()
    };
    DichotomyRule::new(rule.window, rule.diverge_threshold, rule.vanish_threshold)?;
    let defaults = DiscriminationCriteria::default();
    let criteria = DiscriminationCriteria {
        accuracy_floor: a.accuracy_floor.unwrap_or(defaults.accuracy_floor),
        max_undecided: a.max_undecided.unwrap_or(defaults.max_undecided),
        ..defaults
    };
    let out = discrimination_experiment(h1, h2, family, &mc, &grids, &rule, &criteria)?;
    let all_pass = out.reports.iter().all(|r| r.pass);
    let results = json!([{
        "accuracy": out.accuracy,
        "undecided_rate": out.undecided_rate,
        "labels": { "first": out.labels[0], "second": out.labels[1] },
        "reports": out.reports,
    }]);
    let report = envelope("discriminate", &globals, &echo, results);
    let text = write_report(&globals, "discriminate", &report)?;
    print!("{text}");
    Ok(all_pass)
}
