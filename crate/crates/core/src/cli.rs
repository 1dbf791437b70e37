//! Command-line surface of the `census-lab` binary.
//!
//! Exit codes: 0 success, 2 usage, 3 resource cap, 4 statistical or budget
//! failure (including a failed identity row).

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::{self, compare_table, LRule};
use crate::census::{max_complexity, CountTable};
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::graph::{sample_graphs, GraphSampler};
use crate::mc::{self, Streams};
use crate::tilt::{self, classify_regime};
use crate::walk;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "census-lab", version, about = "Connected graph counts by complexity")]
pub struct Cli {
    /// RNG seed; drawn from entropy when absent and always echoed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker streams for simulations.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact C(k, l), optionally with its asymptotic estimate.
    Count {
        k: u64,
        l: i64,
        #[arg(long)]
        asymptotic: bool,
    },
    /// Check the exact identity for every (k, l, p) with k <= K_MAX.
    VerifyIdentity {
        k_max: u64,
        /// Comma-separated rational tilts, e.g. 1/4,1/2,3/4
        p_list: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Monte Carlo estimators.
    Simulate(SimulateArgs),
    /// CSV of exact versus asymptotic log counts.
    Table {
        /// Comma-separated vertex counts; may be empty.
        #[arg(long, default_value = "")]
        k_list: String,
        /// const:N | pow:A | lin:B | nlogn:C
        #[arg(long)]
        l_rule: String,
    },
    /// Uniform random connected graphs.
    SampleGraph {
        k: usize,
        l: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, value_enum, default_value_t = GraphFormat::Edgelist)]
        format: GraphFormat,
        /// Override the tilt used for the rejection sampler.
        #[arg(long)]
        p: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphFormat {
    Edgelist,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Tree,
    EscLeft,
    EscRight,
    Mstar,
    A3,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub estimator: Estimator,
    #[arg(long)]
    pub k: Option<usize>,
    /// Tilt as a decimal or a/b.
    #[arg(long)]
    pub p: Option<String>,
    /// Target complexity for a3; the tilt defaults to the solved tilt.
    #[arg(long)]
    pub l: Option<u64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Walk horizon.
    #[arg(long = "L", default_value_t = 1000)]
    pub horizon: u64,
    /// Draws, or accepted draws for mstar.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0,1")]
    pub u_grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    Exact,
    Float,
}

/// Resolved settings for one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub caps: Caps,
}

/// A tilt given on the command line: `a/b` is exact, a decimal is float.
#[derive(Debug, Clone)]
pub enum TiltArg {
    Exact(BigRational),
    Float(f64),
}

impl TiltArg {
    pub fn parse(s: &str) -> Result<Self> {
        let t = if s.contains('/') {
            TiltArg::Exact(crate::parse_rational(s)?)
        } else {
            TiltArg::Float(
                s.trim()
                    .parse()
                    .map_err(|_| Error::Domain(format!("cannot parse tilt {s:?}")))?,
            )
        };
        let v = t.value();
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Domain(format!("tilt {s} is outside (0, 1]")));
        }
        Ok(t)
    }

    pub fn value(&self) -> f64 {
        match self {
            TiltArg::Exact(r) => tilt::rational_to_f64(r),
            TiltArg::Float(v) => *v,
        }
    }

    pub fn mode(&self) -> ArithmeticMode {
        match self {
            TiltArg::Exact(_) => ArithmeticMode::Exact,
            TiltArg::Float(_) => ArithmeticMode::Float,
        }
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match run(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let config = RunConfig {
        seed: cli.seed.unwrap_or_else(rand::random),
        workers: cli.workers as usize,
        caps: Caps::from_env()?,
    };
    match cli.command {
        Command::Count { k, l, asymptotic } => count(&config, k, l, asymptotic, out),
        Command::VerifyIdentity {
            k_max,
            p_list,
            format,
        } => verify_identity(&config, k_max, &p_list, format, out),
        Command::Simulate(args) => simulate(&config, args, out),
        Command::Table { k_list, l_rule } => table(&config, &parse_k_list(&k_list)?, &l_rule, out),
        Command::SampleGraph {
            k,
            l,
            count,
            format,
            p,
        } => sample_graph(&config, k, l, count, format, p.as_deref(), out, err),
    }
}

fn emit(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn count(config: &RunConfig, k: u64, l: i64, asymptotic: bool, out: &mut dyn Write) -> Result<i32> {
    if k < 1 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let in_range = l >= 0 && l as u64 <= max_complexity(k);
    let exact = if !in_range {
        Some("0".to_string())
    } else {
        match CountTable::for_query(k, l, &config.caps) {
            Ok(t) => Some(t.count_connected(k, l)?.to_string()),
            Err(e @ Error::CapExceeded { .. }) if !asymptotic => return Err(e),
            Err(Error::CapExceeded { .. }) => None,
            Err(e) => return Err(e),
        }
    };
    let (regime, log_asym, c) = if k >= 2 && in_range {
        let tag = classify_regime(k, l as u64)?;
        let value = if asymptotic {
            Some(asymptotics::log_asymptotic(k, l as u64)?.1.log_value)
        } else {
            None
        };
        (Some(tag.regime.as_str()), value, tag.c)
    } else {
        (None, None, None)
    };
    emit(
        out,
        &json!({
            "tool_version": TOOL_VERSION,
            "seed": config.seed,
            "arithmetic_mode": ArithmeticMode::Exact,
            "k": k,
            "l": l,
            "exact": exact,
            "log_asymptotic": log_asym,
            "regime": regime,
            "model": { "c": c },
        }),
    )?;
    Ok(0)
}

fn verify_identity(
    config: &RunConfig,
    k_max: u64,
    p_list: &str,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32> {
    if k_max < 2 {
        return Err(Error::Domain("k_max must be at least 2".into()));
    }
    let tilts = p_list
        .split(',')
        .map(|s| {
            let p = crate::parse_rational(s)?;
            crate::tilt::check_rational_tilt(&p)?;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = walk::identity_sweep(k_max, &tilts, &config.caps)?;
    let failures = rows.iter().filter(|r| !r.equal).count();
    match format {
        OutputFormat::Json => emit(
            out,
            &json!({
                "tool_version": TOOL_VERSION,
                "seed": config.seed,
                "arithmetic_mode": ArithmeticMode::Exact,
                "k_max": k_max,
                "p_list": tilts.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "rows": rows,
                "failures": failures,
            }),
        )?,
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(if failures == 0 { 0 } else { 4 })
}

fn simulate(config: &RunConfig, args: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let streams = Streams::new(config.seed, config.workers);
    let need_k = || args.k.ok_or_else(|| Error::Domain("--k is required".into()));
    let need_p = || -> Result<TiltArg> {
        TiltArg::parse(args.p.as_deref().ok_or_else(|| Error::Domain("--p is required".into()))?)
    };
    let model = |k: usize, p: f64| {
        let kf = k as f64;
        json!({
            "k": k,
            "p": p,
            "epsilon": p * kf / 2.0,
            "c": p * kf,
            "lambda": tilt::lambda_left(k as u64, p),
            "lambda_r": tilt::lambda_right(k as u64, p),
        })
    };
    let (params, estimate, reference, mode) = match args.estimator {
        Estimator::Tree => {
            let (k, p) = (need_k()?, need_p()?);
            let est = mc::estimate_prob_tree(k, p.value(), args.samples, streams)?;
            let reference = match &p {
                TiltArg::Exact(r) if (k as u64) <= 60 => json!({
                    "value": tilt::rational_to_f64(&walk::prob_tree_exact(k as u64, r, &config.caps)?),
                    "source": "exact dp",
                }),
                _ => json!({"value": walk::prob_tree_float(k as u64, p.value())?, "source": "float dp"}),
            };
            (model(k, p.value()), json!(est), reference, p.mode())
        }
        Estimator::EscLeft => {
            let lambda = match (args.lambda, args.eps) {
                (Some(l), _) => l,
                (None, Some(e)) => 1.0 + e,
                _ => return Err(Error::Domain("--lambda or --eps is required".into())),
            };
            let est = mc::estimate_esc_left(lambda, args.horizon, args.samples, streams)?;
            (
                json!({"lambda": lambda, "epsilon": lambda - 1.0, "L": args.horizon}),
                json!(est),
                json!({"value": walk::survival_probability(lambda)?, "source": "survival probability"}),
                ArithmeticMode::Float,
            )
        }
        Estimator::EscRight => {
            let lambda_r = match (args.lambda, args.eps) {
                (Some(l), _) => l,
                (None, Some(e)) => 1.0 - e,
                _ => return Err(Error::Domain("--lambda or --eps is required".into())),
            };
            let est = mc::estimate_esc_right(lambda_r, args.horizon, args.samples, streams)?;
            let eps = 1.0 - lambda_r;
            let reference = if eps > 0.0 && eps < 1.0 {
                json!({"value": walk::esc_right_probability(eps)?, "source": "exact escape"})
            } else {
                serde_json::Value::Null
            };
            (
                json!({"lambda_r": lambda_r, "epsilon": eps, "L": args.horizon}),
                json!(est),
                reference,
                ArithmeticMode::Float,
            )
        }
        Estimator::Mstar => {
            let (k, p) = (need_k()?, need_p()?);
            let report = mc::sample_mstar_clt(k, p.value(), args.samples, &args.u_grid, streams)?;
            (model(k, p.value()), json!(report), serde_json::Value::Null, ArithmeticMode::Float)
        }
        Estimator::A3 => {
            let k = need_k()?;
            let l = args.l.ok_or_else(|| Error::Domain("--l is required".into()))?;
            let p = match &args.p {
                Some(s) => TiltArg::parse(s)?.value(),
                None => tilt::solve_tilt(k as u64, l)?,
            };
            let est = mc::estimate_a3(k, p, l, args.samples, streams)?;
            (
                model(k, p),
                json!(est),
                json!({"value": asymptotics::a3_local_limit(k as u64, p), "source": "local limit"}),
                ArithmeticMode::Float,
            )
        }
    };
    emit(
        out,
        &json!({
            "tool_version": TOOL_VERSION,
            "seed": config.seed,
            "workers": config.workers,
            "arithmetic_mode": mode,
            "estimator": args.estimator,
            "model": params,
            "estimate": estimate,
            "reference": reference,
            "tolerance_policy": "exact targets: 4 stderr; asymptotic targets: declared loose bands",
        }),
    )?;
    Ok(0)
}

fn parse_k_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Domain(format!("bad k in list: {t:?}"))))
        .collect()
}

#[derive(Serialize)]
struct CsvRow {
    k: u64,
    l: u64,
    log_exact: f64,
    log_asymptotic: f64,
    rel_log_error: f64,
    regime: &'static str,
}

fn table(config: &RunConfig, k_list: &[u64], l_rule: &str, out: &mut dyn Write) -> Result<i32> {
    let rule: LRule = l_rule.parse()?;
    let rows = compare_table(k_list, rule, &config.caps)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut *out);
    w.write_record(["k", "l", "log_exact", "log_asymptotic", "rel_log_error", "regime"])?;
    for r in rows {
        w.serialize(CsvRow {
            k: r.k,
            l: r.l,
            log_exact: r.log_exact,
            log_asymptotic: r.log_asymptotic,
            rel_log_error: r.rel_log_error,
            regime: r.regime.as_str(),
        })?;
    }
    w.flush()?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn sample_graph(
    config: &RunConfig,
    k: usize,
    l: u64,
    count: u64,
    format: GraphFormat,
    p: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let sampler = match p {
        Some(s) => GraphSampler::with_tilt(k, l, TiltArg::parse(s)?.value(), &config.caps)?,
        None => GraphSampler::new(k, l, &config.caps)?,
    };
    if let Some(w) = sampler.budget_warning() {
        writeln!(err, "warning: {w}")?;
    }
    let graphs = sample_graphs(&sampler, count, Streams::new(config.seed, config.workers))?;
    for (i, g) in graphs.iter().enumerate() {
        match format {
            GraphFormat::Edgelist => {
                if i > 0 {
                    writeln!(out)?;
                }
                write!(out, "{}", g.to_edge_list())?;
            }
            GraphFormat::Json => {
                let mut v = g.to_json();
                v["tool_version"] = json!(TOOL_VERSION);
                v["seed"] = json!(config.seed);
                v["arithmetic_mode"] = json!(ArithmeticMode::Float);
                v["p"] = json!(sampler.tilt());
                v["index"] = json!(i);
                emit(out, &v)?;
            }
        }
    }
    Ok(0)
}
