// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod plot;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use simo_core::bounds::{bound_report, predicted_exponent, ExponentScheme};
use simo_core::harness::{read_records, run_sweep, run_sweep_with_workers, write_records, SweepConfig};
use simo_core::numerics::ceil_pow;
use simo_core::{Scheme, SelectionMode};
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "simo", version, about = "Wideband SIMO block-fading sweeps, bounds and charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo BER and rate sweep over a geometric N grid.
    Sweep(SweepArgs),
    /// Shape-encoding bound, a0 and critical bandwidth for one (N, L, P).
    Bounds(BoundsArgs),
    /// Predicted scaling exponents for (eps, tau).
    Predict(PredictArgs),
    /// Render a results CSV as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    /// Sweep configuration file (`key = value` lines); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nmin: Option<usize>,
    #[arg(long)]
    nmax: Option<usize>,
    /// Number of geometric grid points between nmin and nmax.
    #[arg(long)]
    points: Option<usize>,
    /// Transmitted bits per grid point.
    #[arg(long)]
    symbols: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of em,fem,pa.
    #[arg(long)]
    schemes: Option<String>,
    /// theoretical | all-subcarriers
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    /// Worker threads (defaults to all cores); results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    l: usize,
    #[arg(long, allow_negative_numbers = true)]
    p: f64,
    /// Subcarrier count for the M search.
    #[arg(long, conflicts_with = "eps")]
    b: Option<usize>,
    /// Derive the subcarrier count as ceil(N^eps).
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// Also write the report as a one-row CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long, allow_negative_numbers = true)]
    eps: f64,
    #[arg(long, allow_negative_numbers = true)]
    tau: f64,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// ber | nominal_rate | bsc_eq_rate
    #[arg(long)]
    metric: String,
    #[arg(long)]
    out: PathBuf,
    /// Bits per point used by the sweep; sets the BER floor 1/(2 symbols).
    #[arg(long, default_value_t = simo_core::harness::DEFAULT_SYMBOLS)]
    symbols: usize,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `simo help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Geometric grid rounded to integers, duplicates removed.
fn geometric_grid(nmin: usize, nmax: usize, points: usize) -> Vec<usize> {
    if points <= 1 || nmin == nmax {
        return vec![nmin];
    }
    let ratio = (nmax as f64 / nmin as f64).ln();
    let mut grid: Vec<usize> = (0..points)
        .map(|i| (nmin as f64 * (ratio * i as f64 / (points - 1) as f64).exp()).round() as usize)
        .collect();
    grid.dedup();
    grid
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading sweep config {}", path.display()))?;
            SweepConfig::parse(&text).or_else(|e| usage(e.to_string()))?
        }
        None => match (a.eps, a.tau) {
            (Some(eps), Some(tau)) => SweepConfig::new(eps, tau),
            _ => return usage("sweep needs --eps and --tau (or --config)"),
        },
    };
    if let Some(eps) = a.eps {
        cfg.eps = eps;
    }
    if let Some(tau) = a.tau {
        cfg.tau = tau;
    }
    if a.nmin.is_some() || a.nmax.is_some() || a.points.is_some() {
        let nmin = a.nmin.unwrap_or(16);
        let nmax = a.nmax.unwrap_or(4096);
        let points = a.points.unwrap_or(9);
        if nmin == 0 || nmax < nmin || points == 0 {
            return usage(format!("invalid grid: nmin = {nmin}, nmax = {nmax}, points = {points}"));
        }
        cfg.n_grid = geometric_grid(nmin, nmax, points);
    }
    if let Some(symbols) = a.symbols {
        cfg.symbols_per_point = symbols;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(p) = a.p {
        cfg.power = p;
    }
    if let Some(list) = &a.schemes {
        let mut schemes = list
            .split(',')
            .map(str::parse::<Scheme>)
            .collect::<Result<Vec<_>, _>>()
            .or_else(|e| usage(e.to_string()))?;
        schemes.sort();
        schemes.dedup();
        cfg.schemes = schemes;
    }
    if let Some(mode) = &a.mode {
        cfg.mode = mode.parse::<SelectionMode>().or_else(|e| usage(e.to_string()))?;
    }
    cfg.validate().or_else(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let cfg = sweep_config(&a)?;
    let records = match a.workers {
        Some(w) => run_sweep_with_workers(&cfg, w),
        None => run_sweep(&cfg),
    }
    .context("sweep failed")?;
    match &a.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_records(BufWriter::new(file), &records).context("writing results")?;
        }
        None => write_records(io::stdout().lock(), &records).context("writing results")?,
    }
    Ok(())
}

fn cmd_bounds(a: BoundsArgs) -> Result<(), Failure> {
    if a.l < 2 {
        return usage(format!("bounds need L >= 2, got L = {}", a.l));
    }
    if a.n == 0 || !(a.p > 0.0) {
        return usage("bounds need N >= 1 and P > 0");
    }
    let b = match (a.b, a.eps) {
        (Some(b), _) if b >= 1 => b,
        (Some(_), _) => return usage("--b must be at least 1"),
        (None, Some(eps)) if eps >= 0.0 => ceil_pow(a.n, eps),
        (None, Some(eps)) => return usage(format!("--eps must be >= 0, got {eps}")),
        (None, None) => 1,
    };
    let r = bound_report(a.n, a.l, a.p, b).context("bound evaluation failed")?;
    let mut out = io::stdout().lock();
    writeln!(out, "N = {}", a.n)?;
    writeln!(out, "L = {}", a.l)?;
    writeln!(out, "P = {}", a.p)?;
    writeln!(out, "B = {b}")?;
    writeln!(out, "a0 = {:.6}", r.a0)?;
    writeln!(out, "sup_phi = {:.6}", r.sup_phi)?;
    writeln!(out, "cs_upper = {:.6}", r.cs_upper)?;
    writeln!(out, "m_star = {}", r.m_star)?;
    writeln!(out, "bcrit_lo = {:.6}", r.bcrit_lo)?;
    writeln!(out, "bcrit_hi = {:.6}", r.bcrit_hi)?;
    if let Some(path) = &a.csv {
        let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        writeln!(f, "N,L,P,B,a0,sup_phi,cs_upper,m_star,bcrit_lo,bcrit_hi")?;
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{}",
            a.n, a.l, a.p, b, r.a0, r.sup_phi, r.cs_upper, r.m_star, r.bcrit_lo, r.bcrit_hi
        )?;
    }
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<(), Failure> {
    if !(a.eps >= 0.0 && a.tau >= 0.0) {
        return usage(format!("--eps and --tau must be >= 0, got {} and {}", a.eps, a.tau));
    }
    let mut out = io::stdout().lock();
    for scheme in ExponentScheme::ALL {
        let p = predicted_exponent(scheme, a.eps, a.tau).map_err(|e| Failure::Usage(e.to_string()))?;
        writeln!(out, "{} {}", scheme, p.exponent)?;
    }
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> Result<(), Failure> {
    let metric: plot::Metric = a.metric.parse().or_else(|e: String| usage(e))?;
    let file = match File::open(&a.input) {
        Ok(f) => f,
        Err(e) => return usage(format!("cannot open {}: {e}", a.input.display())),
    };
    let records = read_records(file).or_else(|e| usage(format!("{}: {e}", a.input.display())))?;
    if records.is_empty() {
        return usage(format!("{} has no records", a.input.display()));
    }
    if a.symbols == 0 {
        return usage("--symbols must be at least 1");
    }
    let svg = plot::render(&records, metric, a.symbols);
    fs::write(&a.out, svg).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}
