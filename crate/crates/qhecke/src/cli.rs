//! Command-line front end: flag and config-file resolution, the seven
//! subcommands, provenance, deterministic JSON/CSV rendering, atomic writes.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical tolerance
//! failure. Errors go to stderr as `qhecke:error:<kind>: <message>`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::empirical::{
    one_level_density, poisson_check, DensityConfig, DensityReport, EmpiricalError, PrimeSieve,
};
use crate::expansion::{expansion_coefficients, theorem11_prediction, ExpansionError, Kernels, DEFAULT_ORDER, MAX_ORDER};
use crate::ratios::{
    bridging_check, compare, ratios_density, ratios_first_order, FamilyNorms, LaurentBranch, RatiosError, RatiosOptions,
    COMPARISON_HEADER,
};
use crate::specfun::{digamma, zeta_k, Constants, SpecError, ZetaKContext, C64, EULER_CUTOFF, EULER_GAMMA};
use crate::transforms::{mellin_identity_check, TestFunction, TransformError, WeightFunction};
use crate::zint::{
    cached_primes, gauss_sum, primary_primes_up_to, quad_symbol, quad_symbol_euler, quad_symbol_prime, write_sieve_csv,
    GInt, PrimeKind, ZintError,
};

/// Version of the JSON envelope; bump on any field change.
pub const SCHEMA_VERSION: u32 = 1;

/// Sieve bound used for the d_m coefficients.
pub const D_SIEVE_BOUND: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) | CliError::Tolerance(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Numeric(_) => "numeric",
            CliError::Tolerance(_) => "tolerance",
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::Sigma(_) | TransformError::TestSpec(_) | TransformError::WeightSpec(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<ZintError> for CliError {
    fn from(e: ZintError) -> Self {
        match e {
            ZintError::Cache(_) => CliError::Io(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<EmpiricalError> for CliError {
    fn from(e: EmpiricalError) -> Self {
        match e {
            EmpiricalError::BadX(_) | EmpiricalError::SieveBound { .. } | EmpiricalError::Threads(_) => {
                CliError::Config(e.to_string())
            }
            EmpiricalError::Zint(z) => z.into(),
        }
    }
}

impl From<ExpansionError> for CliError {
    fn from(e: ExpansionError) -> Self {
        match e {
            ExpansionError::Order(_) | ExpansionError::BadX(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<RatiosError> for CliError {
    fn from(e: RatiosError) -> Self {
        match e {
            RatiosError::Support(_) => CliError::Config(e.to_string()),
            RatiosError::Spec(s) => s.into(),
            RatiosError::Empirical(s) => s.into(),
            RatiosError::Expansion(s) => s.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "qhecke", version, about = "One-level densities of quadratic Hecke L-functions over Q(i)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// Primary Gaussian primes up to --bound.
    Sieve,
    /// Field constants (γ, γ_K, ζ_K values).
    Constants,
    /// Fast invariant suite; exit 2 on any failure.
    Selftest,
    /// Empirical one-level density via the explicit formula.
    Density,
    /// Ratios-conjecture prediction.
    Predict,
    /// Lower-order expansion coefficients and the assembled prediction.
    Expand,
    /// Empirical vs. predictions over an X grid.
    Compare,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Raw flags; every field is optional so config-file values can fill gaps.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Flat key=value config file (flags override it).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long = "X", global = true)]
    pub x: Option<f64>,
    #[arg(long = "X-grid", global = true, value_delimiter = ',')]
    pub x_grid: Option<Vec<f64>>,
    /// Test function: fejer:<σ> or bump:<σ>.
    #[arg(long, global = true)]
    pub phi: Option<String>,
    /// Weight function: gaussian.
    #[arg(long, global = true)]
    pub weight: Option<String>,
    /// Expansion order M.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Norm bound for `sieve`.
    #[arg(long, global = true)]
    pub bound: Option<u64>,
    #[arg(long = "euler-cutoff", global = true)]
    pub euler_cutoff: Option<u64>,
    #[arg(long = "sieve-cache", global = true)]
    pub sieve_cache: Option<PathBuf>,
    /// `predict`: skip the full integral.
    #[arg(long = "first-order", global = true)]
    pub first_order: bool,
    /// Tolerance override, NAME=VALUE (repeatable).
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("bad tolerance value in `{s}`"))?;
    Ok((k.trim().to_string(), v))
}

/// Named numerical tolerances used by `selftest`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances(pub BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let t = [
            ("symbols", 0.0),
            ("reciprocity", 0.0),
            ("gauss_sum", 1e-9),
            ("poisson", 1e-6),
            ("zeta_k_0", 1e-8),
            ("digamma_half", 1e-10),
            ("a_diagonal", 1e-12),
            ("mellin", 1e-4),
            ("bridging", 1e-4),
            ("pole_cancellation", 1e-8),
        ];
        Tolerances(t.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    fn set(&mut self, name: &str, v: f64) -> Result<()> {
        match self.0.get_mut(name) {
            Some(slot) => {
                *slot = v;
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown tolerance `{name}`"))),
        }
    }
}

/// Fully resolved configuration (flags > config file > defaults).
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(rename = "X")]
    pub x: Vec<f64>,
    pub phi: String,
    pub weight: String,
    pub order: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
    pub bound: u64,
    pub euler_cutoff: u64,
    #[serde(skip)]
    pub sieve_cache: Option<PathBuf>,
    pub first_order: bool,
    pub tolerances: Tolerances,
}

const CONFIG_KEYS: &[&str] = &[
    "X", "X-grid", "phi", "weight", "order", "out", "format", "threads", "bound", "euler-cutoff", "sieve-cache",
    "first-order",
];

/// Parses a flat `key = value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim().replace('_', "-");
        let k = if k.eq_ignore_ascii_case("x") { "X".to_string() } else if k.eq_ignore_ascii_case("x-grid") { "X-grid".to_string() } else { k };
        if !CONFIG_KEYS.contains(&k.as_str()) && !k.starts_with("tol.") {
            return Err(CliError::Config(format!("config line {}: unknown key `{k}`", i + 1)));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn parse_val<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| CliError::Config(format!("bad value `{v}` for `{key}`")))
}

fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_val::<f64>(key, s.trim())).collect()
}

impl RunConfig {
    pub fn resolve(command: CommandKind, flags: &Flags, file: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| file.get(k).map(String::as_str);
        let x = match (&flags.x_grid, flags.x, get("X-grid"), get("X")) {
            (Some(g), _, _, _) => g.clone(),
            (None, Some(x), _, _) => vec![x],
            (None, None, Some(g), _) => parse_grid("X-grid", g)?,
            (None, None, None, Some(x)) => vec![parse_val("X", x)?],
            _ => match command {
                CommandKind::Compare => vec![500.0, 2000.0, 8000.0],
                _ => vec![2000.0],
            },
        };
        if x.is_empty() || x.iter().any(|v| !(*v > 1.0) || !v.is_finite()) {
            return Err(CliError::Config(format!("X values must be finite and > 1, got {x:?}")));
        }
        let phi = flags.phi.clone().or(get("phi").map(String::from)).unwrap_or_else(|| "fejer:1.5".into());
        let weight = flags.weight.clone().or(get("weight").map(String::from)).unwrap_or_else(|| "gaussian".into());
        let order = match (flags.order, get("order")) {
            (Some(o), _) => o,
            (None, Some(o)) => parse_val("order", o)?,
            _ => DEFAULT_ORDER,
        };
        if order == 0 || order > MAX_ORDER {
            return Err(CliError::Config(format!("order must be in 1..={MAX_ORDER}, got {order}")));
        }
        let format = match (flags.format, get("format")) {
            (Some(f), _) => f,
            (None, Some(f)) => Format::from_str(f, true).map_err(|_| CliError::Config(format!("bad format `{f}`")))?,
            _ if command == CommandKind::Compare => Format::Csv,
            _ => Format::Json,
        };
        let threads = match (flags.threads, get("threads")) {
            (Some(t), _) => t,
            (None, Some(t)) => parse_val("threads", t)?,
            _ => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
        .max(1);
        let bound = match (flags.bound, get("bound")) {
            (Some(b), _) => b,
            (None, Some(b)) => parse_val("bound", b)?,
            _ => 10_000,
        };
        let euler_cutoff = match (flags.euler_cutoff, get("euler-cutoff")) {
            (Some(b), _) => b,
            (None, Some(b)) => parse_val("euler-cutoff", b)?,
            _ => EULER_CUTOFF,
        };
        let first_order = flags.first_order || get("first-order").map(|v| v == "true" || v == "1").unwrap_or(false);
        let mut tolerances = Tolerances::default();
        for (k, v) in file.iter().filter_map(|(k, v)| k.strip_prefix("tol.").map(|k| (k, v))) {
            tolerances.set(k, parse_val(k, v)?)?;
        }
        for (k, v) in &flags.tol {
            tolerances.set(k, *v)?;
        }
        if format == Format::Csv && matches!(command, CommandKind::Constants | CommandKind::Selftest) {
            return Err(CliError::Config("csv output is not available for this command".into()));
        }
        TestFunction::parse(&phi)?;
        WeightFunction::parse(&weight)?;
        Ok(RunConfig {
            command,
            x,
            phi,
            weight,
            order,
            out: flags.out.clone().or(get("out").map(PathBuf::from)),
            format,
            threads,
            bound,
            euler_cutoff,
            sieve_cache: flags.sieve_cache.clone().or(get("sieve-cache").map(PathBuf::from)),
            first_order,
            tolerances,
        })
    }

    fn test(&self) -> Result<TestFunction> {
        Ok(TestFunction::parse(&self.phi)?)
    }

    fn weight_fn(&self) -> Result<Arc<WeightFunction>> {
        Ok(Arc::new(WeightFunction::parse(&self.weight)?))
    }

    fn sieve(&self, bound: u64) -> Result<Arc<PrimeSieve>> {
        Ok(Arc::new(match &self.sieve_cache {
            Some(path) => PrimeSieve::from_primes(bound, cached_primes(path, bound)?),
            None => PrimeSieve::new(bound),
        }))
    }

    fn density_configs(&self) -> Result<Vec<DensityConfig>> {
        let test = self.test()?;
        let weight = self.weight_fn()?;
        let need = self.x.iter().map(|x| x.powf(test.sigma).ceil() as u64).max().unwrap_or(2);
        let sieve = self.sieve(need)?;
        Ok(self
            .x
            .iter()
            .map(|&x| {
                let mut cfg = DensityConfig::new(x, test.clone(), weight.clone());
                cfg.threads = self.threads;
                cfg.sieve = Some(sieve.clone());
                cfg
            })
            .collect())
    }
}

/// Formats a float to 15 significant digits.
pub fn fmt_float(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{}", round15(v))
}

fn round15(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.14e}", v).parse().unwrap_or(v)
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().unwrap_or(f64::NAN);
            serde_json::Number::from_f64(round15(f)).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Serialises to pretty JSON with every float rounded to 15 significant digits.
pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let value = serde_json::to_value(v).map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&round_json(value)).map_err(|e| CliError::Numeric(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row.iter().map(|v| fmt_float(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

/// Tool version, configuration echo, sieve bound and tolerances.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub sieve_bound: Option<u64>,
}

/// Output of one run: the body to write and whether all checks passed.
#[derive(Clone, Debug)]
pub struct Rendered {
    pub body: String,
    pub provenance: Provenance,
    pub failures: Vec<String>,
}

fn envelope<T: Serialize>(prov: &Provenance, result: &T) -> Result<String> {
    to_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "provenance": prov,
        "result": result,
    }))
}

/// Executes a resolved configuration without touching the filesystem
/// (except for an explicitly requested sieve cache).
pub fn render(cfg: &RunConfig) -> Result<Rendered> {
    let mut prov = Provenance { tool: "qhecke", version: env!("CARGO_PKG_VERSION"), config: cfg.clone(), sieve_bound: None };
    let mut failures = Vec::new();
    let body = match cfg.command {
        CommandKind::Sieve => {
            prov.sieve_bound = Some(cfg.bound);
            let primes = match &cfg.sieve_cache {
                Some(p) => cached_primes(p, cfg.bound)?,
                None => primary_primes_up_to(cfg.bound),
            };
            match cfg.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_sieve_csv(&mut buf, cfg.bound, &primes).map_err(|e| CliError::Io(e.to_string()))?;
                    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))?
                }
                Format::Json => {
                    let split = primes.iter().filter(|p| p.kind == PrimeKind::Split).count();
                    let largest = primes.last().map(|p| json!({"re": p.value.re, "im": p.value.im, "norm": p.norm}));
                    envelope(
                        &prov,
                        &json!({"bound": cfg.bound, "count": primes.len(), "split": split,
                                "inert": primes.len() - split, "largest": largest}),
                    )?
                }
            }
        }
        CommandKind::Constants => envelope(&prov, &Constants::compute()?)?,
        CommandKind::Selftest => {
            let checks = selftest(&cfg.tolerances)?;
            failures = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
            envelope(&prov, &json!({"passed": failures.is_empty(), "checks": checks}))?
        }
        CommandKind::Density => {
            let cfgs = cfg.density_configs()?;
            prov.sieve_bound = cfgs.first().and_then(|c| c.sieve.as_ref()).map(|s| s.bound);
            let reports: Vec<DensityReport> =
                cfgs.iter().map(one_level_density).collect::<std::result::Result<_, _>>()?;
            match cfg.format {
                Format::Json => envelope(&prov, &reports)?,
                Format::Csv => csv(
                    "X,L,w_x,term_log_conductor,term_gamma_const,term_integral,s_even,s_odd,D_total",
                    reports.iter().map(|r| {
                        vec![r.x, r.l, r.w_x, r.term_log_conductor, r.term_gamma_const, r.term_integral, r.s_even, r.s_odd, r.d_total]
                    }),
                ),
            }
        }
        CommandKind::Predict => {
            let cfgs = cfg.density_configs()?;
            prov.sieve_bound = Some(cfg.euler_cutoff);
            let ctx = ZetaKContext::new(cfg.euler_cutoff)?;
            let opts = RatiosOptions::default();
            let reports = cfgs
                .iter()
                .map(|c| if cfg.first_order { ratios_first_order(c, &ctx) } else { ratios_density(c, &ctx, &opts) })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            match cfg.format {
                Format::Json => envelope(&prov, &reports)?,
                Format::Csv => csv(
                    "X,L,D_int,D_fo,leading,tail_integral,conductor,digamma,even_prime,j_term",
                    reports.iter().map(|r| {
                        let t = &r.terms;
                        vec![
                            r.x,
                            r.l,
                            r.d_ratios_integral.unwrap_or(f64::NAN),
                            r.d_ratios_first_order,
                            t.leading,
                            t.tail_integral,
                            t.conductor,
                            t.digamma,
                            t.even_prime,
                            t.j_term,
                        ]
                    }),
                ),
            }
        }
        CommandKind::Expand => {
            prov.sieve_bound = Some(D_SIEVE_BOUND);
            let test = cfg.test()?;
            let kernels = Kernels::new(cfg.weight_fn()?, 0)?;
            let sieve = cfg.sieve(D_SIEVE_BOUND)?;
            let coeffs = expansion_coefficients(cfg.order, &test, &kernels, &sieve)?;
            let rows: Vec<Value> = (0..cfg.order)
                .map(|i| {
                    json!({"m": i + 1, "d_m": coeffs.d[i], "c_wm": coeffs.c_w[i],
                           "R_wm": coeffs.r_w[i], "error_m": coeffs.r_w_error[i]})
                })
                .collect();
            let predictions: Vec<Value> = cfg
                .x
                .iter()
                .map(|&x| json!({"X": x, "L": x.ln(), "D_thm11": theorem11_prediction(x, &test, &coeffs, cfg.order)}))
                .collect();
            match cfg.format {
                Format::Json => envelope(&prov, &json!({"coefficients": coeffs, "rows": rows, "prediction": predictions}))?,
                Format::Csv => csv(
                    "m,d_m,c_wm,R_wm,error_m",
                    (0..cfg.order).map(|i| vec![(i + 1) as f64, coeffs.d[i], coeffs.c_w[i], coeffs.r_w[i], coeffs.r_w_error[i]]),
                ),
            }
        }
        CommandKind::Compare => {
            let cfgs = cfg.density_configs()?;
            prov.sieve_bound = cfgs.first().and_then(|c| c.sieve.as_ref()).map(|s| s.bound);
            let ctx = ZetaKContext::new(cfg.euler_cutoff)?;
            let kernels = Kernels::new(cfg.weight_fn()?, 0)?;
            let d_sieve = cfg.sieve(D_SIEVE_BOUND)?;
            let rows = compare(&cfg.x, &cfgs[0], &ctx, &RatiosOptions::default(), &kernels, &d_sieve)?;
            match cfg.format {
                Format::Json => envelope(&prov, &rows)?,
                Format::Csv => {
                    let mut s = String::from(COMPARISON_HEADER);
                    s.push('\n');
                    for r in &rows {
                        s.push_str(&r.csv());
                        s.push('\n');
                    }
                    s
                }
            }
        }
    };
    Ok(Rendered { body, provenance: prov, failures })
}

/// Writes via a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(body.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(io)
}

fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.flags.config {
        Some(p) => parse_config_file(
            &std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        )?,
        None => BTreeMap::new(),
    };
    let cfg = RunConfig::resolve(cli.command, &cli.flags, &file)?;
    // An already-initialised global pool is fine: callers may embed `run`.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    let out = render(&cfg)?;
    if let Ok(p) = serde_json::to_string(&round_json(serde_json::to_value(&out.provenance).unwrap_or(Value::Null))) {
        eprintln!("qhecke:provenance: {p}");
    }
    match &cfg.out {
        Some(path) => write_atomic(path, &out.body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(out.body.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    if out.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!("failed checks: {}", out.failures.join(", "))))
    }
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    let msg = e.to_string();
                    eprintln!("qhecke:error:config: {}", msg.lines().next().unwrap_or("").trim_start_matches("error: "));
                    1
                }
            };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qhecke:error:{}: {e}", e.kind());
            e.exit_code()
        }
    }
}

/// One invariant check of the self-test suite.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

fn primary_odd_up_to(bound: u64) -> Vec<GInt> {
    let r = (bound as f64).sqrt() as i64 + 1;
    let mut v = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let z = GInt::new(a, b);
            if z.norm() <= bound && z.norm() > 1 && z.is_primary() {
                v.push(z);
            }
        }
    }
    v.sort_by(|a, b| a.canonical_cmp(b));
    v
}

/// A reduced-size pass over the library's invariants (a few seconds).
pub fn selftest(tol: &Tolerances) -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let primes = primary_primes_up_to(2000);
    let odd = primary_odd_up_to(100);
    let mut mismatches = 0usize;
    for w in &primes {
        for &a in &odd {
            if quad_symbol_euler(a, w) != quad_symbol_prime(a, w) {
                mismatches += 1;
            }
        }
    }
    out.push(Check::new("symbols", mismatches as f64, tol.get("symbols")));

    let small = primary_odd_up_to(100);
    let mut bad = 0usize;
    for &m in &small {
        for &n in &small {
            let (a, b) = (quad_symbol(m, n)?, quad_symbol(n, m)?);
            if a != 0 && a != b {
                bad += 1;
            }
        }
    }
    out.push(Check::new("reciprocity", bad as f64, tol.get("reciprocity")));

    let mut worst: f64 = 0.0;
    for w in primary_primes_up_to(200) {
        let sqrt_n = (w.norm as f64).sqrt();
        for r in crate::zint::residue_system(w.value) {
            let lhs = gauss_sum(r, w.value)?;
            let rhs = quad_symbol(GInt::I * r, w.value)? as f64 * sqrt_n;
            worst = worst.max((lhs - Complex64::new(rhs, 0.0)).norm());
        }
    }
    out.push(Check::new("gauss_sum", worst, tol.get("gauss_sum")));

    let w = WeightFunction::parse("gaussian")?;
    let p = poisson_check(&w, Some(GInt::new(-1, -2)), 1.0)?;
    out.push(Check::new("poisson", (p.lhs - p.rhs).norm(), tol.get("poisson")));

    let z0 = zeta_k(C64::new(0.0, 0.0))?.re;
    out.push(Check::new("zeta_k_0", (z0 + 0.25).abs(), tol.get("zeta_k_0")));
    let psi = digamma(C64::new(0.5, 0.0))?.re;
    out.push(Check::new(
        "digamma_half",
        (psi + EULER_GAMMA + 2.0 * std::f64::consts::LN_2).abs(),
        tol.get("digamma_half"),
    ));

    let ctx = ZetaKContext::new(100_000)?;
    let r = C64::new(0.1, 0.2);
    let a = ctx.a_euler(r, r)?.value;
    out.push(Check::new("a_diagonal", (a - 1.0).norm(), tol.get("a_diagonal")));

    let m = mellin_identity_check(&w, C64::new(0.5, 0.0))?;
    out.push(Check::new("mellin", m.residual, tol.get("mellin")));

    let test = TestFunction::parse("fejer:1.5")?;
    let l = 2000f64.ln();
    let sieve = PrimeSieve::new((1.5 * l / 2.0).exp().ceil() as u64);
    let b = bridging_check(&test, l, &sieve, None)?;
    out.push(Check::new("bridging", b.residual, tol.get("bridging")));

    let branch = LaurentBranch::for_family(&ctx, &FamilyNorms::single(5.0))?;
    out.push(Check::new("pole_cancellation", branch.residue().norm(), tol.get("pole_cancellation")));
    Ok(out)
}
