//! The `itercomm` command-line frontend.
//!
//! Every command writes a JSON report (stdout unless `--out` is given) that
//! embeds the fully resolved configuration. Exit codes: 0 success, 2 bad
//! configuration, 3 bad data, 4 numerical non-convergence.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::conditions::{scan_condition, ConditionKind, ConditionSpec, SymbolPair};
use crate::error::{Error, Result};
use crate::gallery::{
    by_name, make_bmo_pair, make_nip1_pair, make_prop41_pair, random_smooth, witness_domain,
    witness_f, witness_power, BmoKind, GalleryPair, PAIR_NAMES,
};
use crate::grid::{Domain, ScanSchedule, SampledFunction};
use crate::singular::{
    commutator_apply, commutator_apply_at, operator_norm, KernelKind, KernelOperator, NormOptions,
};
use crate::sparse::{
    build_sparse, default_root, verify_domination, AlphaChoice, SparseConfig,
};
use crate::young::YoungFunction;

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "ITERCOMM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "itercomm", version, about = "Iterated commutator toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan a condition over dyadic intervals or an interval ladder.
    Scan(ScanArgs),
    /// Apply the commutator to a function or estimate its norm.
    Commutator(CommutatorArgs),
    /// Build a sparse family and optionally verify domination.
    Sparse(SparseArgs),
    /// Young function diagnostics.
    Young(YoungArgs),
    /// List or show gallery pairs.
    Pair {
        #[command(subcommand)]
        action: PairAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PairAction {
    List,
    Show {
        /// Pair spec, `name[:key=value,...]`.
        name: String,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct PairArgs {
    /// Gallery pair `name[:key=value,...]`, e.g. `prop41:p=1.5,q=3`.
    #[arg(long)]
    pub pair: Option<String>,
    /// CSV file (`x,re,im`) for b1; requires `--b2`.
    #[arg(long, conflicts_with = "pair")]
    pub b1: Option<PathBuf>,
    #[arg(long, requires = "b1")]
    pub b2: Option<PathBuf>,
    /// Window `LEFT RIGHT` (defaults to the pair's hint).
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LEFT", "RIGHT"])]
    pub window: Option<Vec<f64>>,
    /// Number of cells (power of two).
    #[arg(long)]
    pub ncells: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelArg {
    Quadrature,
    Spectral,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// `s_p`, `t_p`, `s_ab` or `t_c`.
    #[arg(long)]
    pub condition: String,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "A")]
    pub a: Option<String>,
    #[arg(long = "B")]
    pub b: Option<String>,
    #[arg(long = "C")]
    pub c: Option<String>,
    /// Dyadic levels `MIN..MAX` (default: all).
    #[arg(long)]
    pub levels: Option<String>,
    /// Skip the one-third shifted intervals.
    #[arg(long)]
    pub no_shift: bool,
    /// Interval ladder `symmetric:K0..K1` (`[-k, k)`) or `origin:K0..K1`
    /// (`[0, k)`), `k` doubling; replaces the dyadic scan.
    #[arg(long, conflicts_with = "levels")]
    pub ladder: Option<String>,
    /// JSON report path (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-scale CSV path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Apply,
    Norm,
}

#[derive(Debug, Args, Serialize)]
pub struct CommutatorArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_enum, default_value = "norm")]
    pub mode: Mode,
    #[arg(long, value_enum, default_value = "quadrature")]
    pub kernel: KernelArg,
    /// Input for `apply`: `witness_f`, `witness_power`, `random` or
    /// `file:<path>`.
    #[arg(long, default_value = "random")]
    pub input: String,
    /// Truncation `R` of the witness functions.
    #[arg(long = "R", default_value_t = 1e4)]
    pub r: f64,
    /// Exponent `q` of the power witness `x^(-1/q)`.
    #[arg(long, default_value_t = 3.0)]
    pub q: f64,
    /// Window on which the output norm is reported (default `-1 1` for
    /// witnesses, the whole window otherwise).
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LEFT", "RIGHT"])]
    pub eval_window: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 3000)]
    pub max_iter: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output function CSV (`apply` mode).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SparseArgs {
    /// Gallery pair (default `smooth_random` with `--seed`).
    #[arg(long)]
    pub pair: Option<String>,
    #[arg(long, default_value_t = 1024)]
    pub ncells: usize,
    /// `random`, `zero` or `file:<path>` (on the window `[-2, 2)`).
    #[arg(long, default_value = "random")]
    pub input: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `auto` or a positive number.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    #[arg(long, default_value_t = 64)]
    pub max_depth: u32,
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Of {
    #[value(name = "self")]
    #[serde(rename = "self")]
    Itself,
    Complement,
}

#[derive(Debug, Args, Serialize)]
pub struct YoungArgs {
    /// `power:p=2`, `logbump:p=2,delta=1`, `loglogbump:p=2,delta=0.5`,
    /// `phi0` or `table:<path>`.
    #[arg(long = "fn")]
    pub function: String,
    /// Check `t <= A^-1(t) Abar^-1(t) <= 2t` on log-spaced probes.
    #[arg(long)]
    pub duality: bool,
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    /// Classify membership in `B_p`.
    #[arg(long)]
    pub bp: Option<f64>,
    #[arg(long, value_enum, default_value = "self")]
    pub of: Of,
    #[arg(long)]
    pub eval: Option<f64>,
    #[arg(long)]
    pub inverse: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. }
        | Error::Parse(_)
        | Error::Window(_)
        | Error::DomainMismatch(_) => 2,
        Error::NonConvergence { .. } => 4,
        Error::Data(_) | Error::Precondition(_) | Error::Overflow(_) | Error::Io(_) | Error::Json(_) => 3,
    }
}

/// Parses the arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| Error::param("ITERCOMM_THREADS", format!("not a count: `{v}`")))?;
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scan(a) => cmd_scan(&a),
        Command::Commutator(a) => cmd_commutator(&a),
        Command::Sparse(a) => cmd_sparse(&a),
        Command::Young(a) => cmd_young(&a),
        Command::Pair { action } => cmd_pair(&action),
    }
}

fn emit(doc: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

/// Splits `name[:k=v,...]` into the name and its numeric parameters.
fn parse_pair_spec(spec: &str) -> Result<(String, Vec<(String, f64)>)> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.trim(), r),
        None => (spec.trim(), ""),
    };
    let mut params = Vec::new();
    for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("pair parameter `{kv}` is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("pair parameter `{kv}`: {e}")))?;
        params.push((k.trim().to_string(), v));
    }
    Ok((name.to_string(), params))
}

/// Resolves a gallery spec such as `prop41:p=1.5,q=3` or `nip1:k_max=10`.
pub fn resolve_pair(spec: &str) -> Result<GalleryPair> {
    let (name, params) = parse_pair_spec(spec)?;
    let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| *v);
    let allow = |keys: &[&str]| -> Result<()> {
        for (k, _) in &params {
            if !keys.contains(&k.as_str()) {
                return Err(Error::param("pair", format!("`{name}` takes no parameter `{k}`")));
            }
        }
        Ok(())
    };
    match name.as_str() {
        "prop41" => {
            allow(&["p", "q"])?;
            make_prop41_pair(get("p").unwrap_or(1.5), get("q").unwrap_or(3.0))
        }
        "nip1" => {
            allow(&["k_max"])?;
            let k = get("k_max").unwrap_or(6.0);
            if k.fract() != 0.0 || k < 0.0 {
                return Err(Error::param("k_max", format!("must be a whole number, got {k}")));
            }
            make_nip1_pair(k as u32, None)
        }
        "smooth_random" => {
            allow(&["seed"])?;
            Ok(make_bmo_pair(BmoKind::SmoothRandom(get("seed").unwrap_or(0.0) as u64)))
        }
        other => {
            allow(&[])?;
            by_name(other, 0)
        }
    }
}

/// Default cell count for a gallery pair's hinted window.
fn default_cells(pair: &GalleryPair) -> usize {
    match pair.name.as_str() {
        "jnce1" | "lastexample" => 131072,
        "nip1" => 8192,
        _ => 4096,
    }
}

struct LoadedPair {
    pair: SymbolPair,
    config: Value,
}

fn load_pair(args: &PairArgs) -> Result<LoadedPair> {
    if let (Some(p1), Some(p2)) = (&args.b1, &args.b2) {
        if args.window.is_some() || args.ncells.is_some() {
            return Err(Error::param("window", "the CSV files fix the grid"));
        }
        let b1 = SampledFunction::read_csv(p1)?;
        let b2 = SampledFunction::read_csv(p2)?;
        let pair = SymbolPair::from_samples(b1, b2, "csv")?;
        let d = *pair.domain();
        return Ok(LoadedPair {
            pair,
            config: json!({
                "b1": p1, "b2": p2,
                "window": [d.left(), d.right()], "ncells": d.n_cells(),
            }),
        });
    }
    let spec = args
        .pair
        .as_deref()
        .ok_or_else(|| Error::param("pair", "give --pair or --b1/--b2"))?;
    let gp = resolve_pair(spec)?;
    let window = match &args.window {
        Some(w) => [w[0], w[1]],
        None => gp.window_hint,
    };
    let n = args.ncells.unwrap_or_else(|| default_cells(&gp));
    let domain = Domain::new(window[0], window[1], n)?;
    let pair = gp.sample(domain)?;
    Ok(LoadedPair {
        pair,
        config: json!({
            "pair": gp.info(),
            "window": window,
            "ncells": n,
        }),
    })
}

fn parse_levels(s: &str) -> Result<(u32, u32)> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::param("levels", format!("expected MIN..MAX, got `{s}`")))?;
    let p = |x: &str| {
        x.trim()
            .parse::<u32>()
            .map_err(|e| Error::param("levels", format!("`{x}`: {e}")))
    };
    Ok((p(a)?, p(b)?))
}

fn ladder_schedule(spec: &str, domain: &Domain) -> Result<ScanSchedule> {
    let (kind, range) = spec
        .split_once(':')
        .ok_or_else(|| Error::param("ladder", format!("expected KIND:K0..K1, got `{spec}`")))?;
    let (k0, k1) = range
        .split_once("..")
        .ok_or_else(|| Error::param("ladder", format!("expected K0..K1, got `{range}`")))?;
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| Error::param("ladder", format!("`{x}`: {e}")))
    };
    let (k0, k1) = (num(k0)?, num(k1)?);
    if !(k0 > 0.0 && k1 >= k0) {
        return Err(Error::param("ladder", format!("need 0 < K0 <= K1, got {k0}..{k1}")));
    }
    let mut out = Vec::new();
    let mut k = k0;
    while k <= k1 * (1.0 + 1e-12) {
        let q = match kind {
            "symmetric" => domain.interval(-k, k)?,
            "origin" => domain.interval(0.0, k)?,
            other => {
                return Err(Error::param("ladder", format!("unknown ladder kind `{other}`")))
            }
        };
        out.push(q);
        k *= 2.0;
    }
    Ok(ScanSchedule::Ladder(out))
}

fn young_arg(v: &Option<String>, name: &'static str) -> Result<YoungFunction> {
    v.as_deref()
        .ok_or_else(|| Error::param(name, "required by this condition"))?
        .parse()
}

fn condition_spec(args: &ScanArgs) -> Result<ConditionSpec> {
    let kind: ConditionKind = args.condition.parse()?;
    let p = || args.p.ok_or_else(|| Error::param("p", "required by this condition"));
    Ok(match kind {
        ConditionKind::Sp => ConditionSpec::Sp { p: p()? },
        ConditionKind::Tp => ConditionSpec::Tp { p: p()? },
        ConditionKind::Sab => ConditionSpec::Sab {
            a: young_arg(&args.a, "A")?,
            b: young_arg(&args.b, "B")?,
        },
        ConditionKind::Tc => ConditionSpec::Tc {
            c: young_arg(&args.c, "C")?,
        },
    })
}

pub fn cmd_scan(args: &ScanArgs) -> Result<()> {
    let spec = condition_spec(args)?;
    let loaded = load_pair(&args.pair)?;
    let domain = *loaded.pair.domain();
    let schedule = match (&args.ladder, &args.levels) {
        (Some(l), _) => ladder_schedule(l, &domain)?,
        (None, Some(l)) => {
            let (min_level, max_level) = parse_levels(l)?;
            ScanSchedule::Dyadic {
                min_level,
                max_level,
                shift: !args.no_shift,
            }
        }
        (None, None) => ScanSchedule::Dyadic {
            min_level: 0,
            max_level: domain.depth(),
            shift: !args.no_shift,
        },
    };
    let mut report = scan_condition(&loaded.pair, &spec, &schedule)?;
    let schedule_cfg = match &schedule {
        ScanSchedule::Dyadic {
            min_level,
            max_level,
            shift,
        } => json!({ "levels": [min_level, max_level], "shift": shift }),
        ScanSchedule::Ladder(_) => json!({ "ladder": args.ladder }),
    };
    report.config = Some(json!({
        "command": "scan",
        "input": loaded.config,
        "condition": spec.name(),
        "params": spec.params(),
        "schedule": schedule_cfg,
    }));
    if let Some(path) = &args.csv {
        std::fs::write(path, report.to_csv())?;
    }
    emit(&serde_json::to_value(&report)?, args.out.as_deref())
}

fn operator(kind: KernelArg, domain: Domain) -> KernelOperator {
    match kind {
        KernelArg::Quadrature => KernelOperator::new(KernelKind::HilbertQuadrature, domain),
        KernelArg::Spectral => KernelOperator::new(KernelKind::HilbertSpectral, domain),
    }
}

pub fn cmd_commutator(args: &CommutatorArgs) -> Result<()> {
    let witness = matches!(args.input.as_str(), "witness_f" | "witness_power");
    let mut pair_args = PairArgs {
        pair: args.pair.pair.clone(),
        b1: args.pair.b1.clone(),
        b2: args.pair.b2.clone(),
        window: args.pair.window.clone(),
        ncells: args.pair.ncells,
    };
    if witness && args.mode == Mode::Apply && pair_args.window.is_none() && pair_args.ncells.is_none() {
        let d = witness_domain();
        pair_args.window = Some(vec![d.left(), d.right()]);
        pair_args.ncells = Some(d.n_cells());
    }
    let loaded = load_pair(&pair_args)?;
    let domain = *loaded.pair.domain();
    let op = operator(args.kernel, domain);
    let mut config = json!({
        "command": "commutator",
        "input": loaded.config,
        "mode": args.mode,
        "kernel": args.kernel,
    });
    let doc = match args.mode {
        Mode::Norm => {
            let opts = NormOptions {
                tol: args.tol,
                max_iter: args.max_iter,
                seed: args.seed,
            };
            config["norm_options"] = serde_json::to_value(opts)?;
            let est = operator_norm(&op, &loaded.pair, &opts)?;
            json!({ "norm": est, "config": config })
        }
        Mode::Apply => {
            let f = match args.input.as_str() {
                "witness_f" => witness_f(args.r)?.sample(domain)?,
                "witness_power" => witness_power(args.q, args.r)?.sample(domain)?,
                "random" => random_smooth(domain, args.seed),
                other => match other.strip_prefix("file:") {
                    Some(path) => SampledFunction::read_csv(Path::new(path))?,
                    None => {
                        return Err(Error::param(
                            "input",
                            format!("unknown input `{other}` (witness_f, witness_power, random, file:<path>)"),
                        ))
                    }
                },
            };
            let eval = match &args.eval_window {
                Some(w) => [w[0], w[1]],
                None if witness => [-1.0, 1.0],
                None => [domain.left(), domain.right()],
            };
            let q = domain.interval(eval[0], eval[1])?;
            let cells: Vec<usize> = q.cells().collect();
            let values = if cells.len() == domain.n_cells() {
                commutator_apply(&op, &loaded.pair, &f)?.into_values()
            } else {
                commutator_apply_at(&op, &loaded.pair, &f, &cells)?
            };
            let h = domain.cell_width();
            let l2 = (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h).sqrt();
            if let Some(path) = &args.csv {
                let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
                writeln!(out, "x,re,im")?;
                for (v, &i) in values.iter().zip(&cells) {
                    writeln!(out, "{:e},{:e},{:e}", domain.midpoint(i), v.re, v.im)?;
                }
            }
            config["input_function"] = json!(args.input);
            config["R"] = json!(args.r);
            config["q"] = json!(args.q);
            config["seed"] = json!(args.seed);
            config["eval_window"] = json!(eval);
            json!({
                "output_l2": l2,
                "input_l2": f.l2_norm(),
                "eval_window": eval,
                "config": config,
            })
        }
    };
    emit(&doc, args.out.as_deref())
}

pub fn cmd_sparse(args: &SparseArgs) -> Result<()> {
    let (domain, root) = default_root(args.ncells)?;
    let gp = match &args.pair {
        Some(spec) => resolve_pair(spec)?,
        None => make_bmo_pair(BmoKind::SmoothRandom(args.seed)),
    };
    let pair = gp.sample(domain)?;
    let f = match args.input.as_str() {
        "random" => random_smooth(domain, args.seed.wrapping_add(1_000_003)),
        "zero" => SampledFunction::zeros(domain),
        other => match other.strip_prefix("file:") {
            Some(path) => {
                let f = SampledFunction::read_csv(Path::new(path))?;
                if f.domain() != &domain {
                    return Err(Error::Data(format!(
                        "input on {}, expected {domain}",
                        f.domain()
                    )));
                }
                f
            }
            None => {
                return Err(Error::param(
                    "input",
                    format!("unknown input `{other}` (random, zero, file:<path>)"),
                ))
            }
        },
    };
    let alpha = match args.alpha.as_str() {
        "auto" => AlphaChoice::Auto,
        s => AlphaChoice::Fixed(
            s.parse()
                .map_err(|e| Error::param("alpha", format!("`{s}`: {e}")))?,
        ),
    };
    let config = SparseConfig {
        alpha,
        max_depth: args.max_depth,
        ..SparseConfig::default()
    };
    let op = KernelOperator::quadrature(domain);
    let family = build_sparse(&op, &pair, &f, &root, &config)?;
    let mut doc = json!({
        "family": family.to_json(),
        "config": {
            "command": "sparse",
            "pair": gp.info(),
            "window": [domain.left(), domain.right()],
            "ncells": args.ncells,
            "root": root.bounds(),
            "input": args.input,
            "seed": args.seed,
            "sparse": config,
        },
    });
    if args.verify {
        doc["domination"] = serde_json::to_value(verify_domination(&op, &pair, &f, &family)?)?;
    }
    emit(&doc, args.out.as_deref())
}

pub fn cmd_young(args: &YoungArgs) -> Result<()> {
    let a: YoungFunction = args.function.parse()?;
    let mut doc = json!({
        "config": {
            "command": "young",
            "fn": a.to_string(),
            "duality": args.duality,
            "points": args.points,
            "bp": args.bp,
            "of": args.of,
            "eval": args.eval,
            "inverse": args.inverse,
        }
    });
    if let Some(t) = args.eval {
        doc["eval"] = json!({ "t": t, "value": a.eval(t)? });
    }
    if let Some(s) = args.inverse {
        doc["inverse"] = json!({ "s": s, "value": a.inverse(s)? });
    }
    if args.duality {
        if args.points < 2 {
            return Err(Error::param("points", "need at least 2 probes"));
        }
        let comp = a.complementary()?;
        let ts: Vec<f64> = (0..args.points)
            .map(|i| 10f64.powf(-4.0 + 12.0 * i as f64 / (args.points - 1) as f64))
            .collect();
        let ratios = a.duality_ratios(&comp, &ts)?;
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().copied().fold(0.0, f64::max);
        doc["duality"] = json!({
            "complement": comp.to_string(),
            "t_range": [ts[0], ts[ts.len() - 1]],
            "min_ratio": min,
            "max_ratio": max,
        });
    }
    if let Some(p) = args.bp {
        let target = match args.of {
            Of::Itself => a.clone(),
            Of::Complement => a.complementary()?,
        };
        doc["bp"] = serde_json::to_value(target.bp_classify(p)?)?;
    }
    emit(&doc, args.out.as_deref())
}

pub fn cmd_pair(action: &PairAction) -> Result<()> {
    match action {
        PairAction::List => {
            let names: Vec<Value> = PAIR_NAMES.iter().map(|n| json!(n)).collect();
            emit(&json!({ "pairs": names }), None)
        }
        PairAction::Show { name } => {
            let gp = resolve_pair(name)?;
            emit(&serde_json::to_value(gp.info())?, None)
        }
    }
}
