//! Sweeps over a geometric antenna grid: Monte Carlo BER per scheme, nominal
//! and BSC-equivalent rates, and log-log exponent fits.

use crate::channel::{apply_noiseless, apply_subchannel, sample_subchannels, SystemConfig};
use crate::em::{em_detect, em_modulate, em_select_params, EmParams, EnergyConstellation};
use crate::error::{domain, Error, Result};
use crate::fem::{fem_detect, fem_modulate, fem_select_params, FemParams};
use crate::numerics::{binary_entropy, loglog_slope, SeededStream};
use crate::pa::{pa_detect, pa_estimate, pa_select_params, PaFrame, PaParams};
use crate::scheme::{Scheme, SelectionMode};
use ndarray::{s, ArrayView1};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

pub const DEFAULT_SYMBOLS: usize = 10_000;
pub const DEFAULT_POWER: f64 = 2.0;
pub const MIN_SYMBOLS: usize = 1_000;

/// `2^4, 2^5, ..., 2^12`.
pub fn default_n_grid() -> Vec<usize> {
    (4..=12).map(|k| 1usize << k).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub eps: f64,
    pub tau: f64,
    pub n_grid: Vec<usize>,
    pub symbols_per_point: usize,
    pub power: f64,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub mode: SelectionMode,
}

impl SweepConfig {
    pub fn new(eps: f64, tau: f64) -> Self {
        Self {
            eps,
            tau,
            n_grid: default_n_grid(),
            symbols_per_point: DEFAULT_SYMBOLS,
            power: DEFAULT_POWER,
            seed: 0,
            schemes: Scheme::ALL.to_vec(),
            mode: SelectionMode::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps >= 0.0 && self.eps.is_finite() && self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!(
                "eps and tau must be finite and >= 0, got eps = {}, tau = {}",
                self.eps, self.tau
            )));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return Err(Error::Config("n_grid must be non-empty with N >= 1".into()));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.symbols_per_point < MIN_SYMBOLS {
            return Err(Error::Config(format!(
                "symbols_per_point must be >= {MIN_SYMBOLS}, got {}",
                self.symbols_per_point
            )));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::Config(format!("P must be positive, got {}", self.power)));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme is required".into()));
        }
        Ok(())
    }

    /// Parse the flat `key = value` format. Keys: `eps`, `tau`, `n_grid`,
    /// `symbols_per_point`, `P`, `seed`, `schemes`, `mode`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::new(f64::NAN, f64::NAN);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Config(format!("line {}: invalid {what} '{value}'", lineno + 1));
            match key {
                "eps" => cfg.eps = value.parse().map_err(|_| bad("eps"))?,
                "tau" => cfg.tau = value.parse().map_err(|_| bad("tau"))?,
                "n_grid" => {
                    cfg.n_grid = value
                        .split(',')
                        .map(|v| v.trim().parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("n_grid"))?
                }
                "symbols_per_point" => cfg.symbols_per_point = value.parse().map_err(|_| bad("symbols_per_point"))?,
                "P" => cfg.power = value.parse().map_err(|_| bad("P"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "schemes" => {
                    cfg.schemes = value
                        .split(',')
                        .map(str::parse)
                        .collect::<Result<Vec<Scheme>>>()
                        .map_err(|_| bad("schemes"))?;
                    cfg.schemes.sort();
                    cfg.schemes.dedup();
                }
                "mode" => cfg.mode = value.parse().map_err(|_| bad("mode"))?,
                other => return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        if cfg.eps.is_nan() || cfg.tau.is_nan() {
            return Err(Error::Config("eps and tau are required".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut out = String::new();
        let _ = writeln!(out, "eps = {}", self.eps);
        let _ = writeln!(out, "tau = {}", self.tau);
        let _ = writeln!(out, "n_grid = {}", join(self.n_grid.iter().map(|n| n.to_string()).collect()));
        let _ = writeln!(out, "symbols_per_point = {}", self.symbols_per_point);
        let _ = writeln!(out, "P = {}", self.power);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "schemes = {}", join(self.schemes.iter().map(|s| s.to_string()).collect()));
        let _ = writeln!(out, "mode = {}", self.mode);
        out
    }

    pub fn system(&self, n: usize) -> Result<SystemConfig> {
        SystemConfig::new(n, self.eps, self.tau, self.power, self.seed)
    }
}

/// One (scheme, N) measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub n: usize,
    pub b: usize,
    pub l: usize,
    pub m: usize,
    pub k: usize,
    pub ber: f64,
    pub nominal_rate: f64,
    pub bsc_eq_rate: f64,
    pub seed: u64,
}

/// Per-scheme parameters chosen for one sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeParams {
    Em(EmParams),
    Fem(FemParams),
    Pa(PaParams),
}

impl SchemeParams {
    pub fn select(scheme: Scheme, cfg: &SystemConfig, mode: SelectionMode) -> Result<Self> {
        Ok(match scheme {
            Scheme::Em => SchemeParams::Em(em_select_params(cfg, mode)?),
            Scheme::Fem => SchemeParams::Fem(fem_select_params(cfg, mode)?),
            Scheme::Pa => SchemeParams::Pa(pa_select_params(cfg, mode)?),
        })
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeParams::Em(_) => Scheme::Em,
            SchemeParams::Fem(_) => Scheme::Fem,
            SchemeParams::Pa(_) => Scheme::Pa,
        }
    }

    pub fn active_subchannels(&self) -> usize {
        match self {
            SchemeParams::Em(p) => p.m,
            SchemeParams::Fem(p) => p.m,
            SchemeParams::Pa(p) => p.m,
        }
    }

    pub fn constellation_size(&self) -> usize {
        match self {
            SchemeParams::Em(p) => p.k,
            SchemeParams::Fem(p) => p.k,
            SchemeParams::Pa(_) => 2,
        }
    }

    /// Uses per coherence block that the scheme occupies.
    pub fn block_len(&self, cfg: &SystemConfig) -> usize {
        match self {
            SchemeParams::Pa(p) => p.split.block_len,
            _ => cfg.l(),
        }
    }

    fn bits_per_block(&self, cfg: &SystemConfig) -> usize {
        let bits_per_symbol = (self.constellation_size() as f64).log2().floor() as usize;
        let symbols = match self {
            SchemeParams::Em(p) => p.m,
            SchemeParams::Fem(p) => p.m * cfg.l(),
            SchemeParams::Pa(p) => p.m * (p.split.block_len - 1),
        };
        symbols * bits_per_symbol
    }
}

/// Overrides used by tests to isolate parts of the link.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LinkHooks {
    /// Drop the additive noise.
    pub noiseless: bool,
    /// Hand the PA combiner the true channel instead of the MMSE estimate.
    pub perfect_csi: bool,
}

/// Fraction of wrongly decided bits over `n_symbols` transmitted bits.
pub fn estimate_ber(cfg: &SystemConfig, params: &SchemeParams, n_symbols: usize, stream: &SeededStream) -> Result<f64> {
    estimate_ber_with(cfg, params, n_symbols, stream, LinkHooks::default())
}

pub fn estimate_ber_with(
    cfg: &SystemConfig,
    params: &SchemeParams,
    n_symbols: usize,
    stream: &SeededStream,
    hooks: LinkHooks,
) -> Result<f64> {
    if n_symbols == 0 {
        return domain("need at least one transmitted bit");
    }
    let per_block = params.bits_per_block(cfg);
    if per_block == 0 {
        return domain("scheme carries no bits per block");
    }
    let link = Link::new(cfg, params, hooks)?;
    let blocks = n_symbols.div_ceil(per_block);
    let errors: usize = (0..blocks)
        .into_par_iter()
        .map(|i| {
            let keep = per_block.min(n_symbols - i * per_block);
            let bits = link.run_block(&mut stream.derive(i as u64));
            bits.iter().take(keep).filter(|&&(sent, got)| sent != got).count()
        })
        .sum();
    Ok(errors as f64 / n_symbols as f64)
}

/// Transmit/receive chain for one scheme at one sweep point.
struct Link<'a> {
    cfg: &'a SystemConfig,
    params: &'a SchemeParams,
    constellation: Option<EnergyConstellation>,
    hooks: LinkHooks,
}

impl<'a> Link<'a> {
    fn new(cfg: &'a SystemConfig, params: &'a SchemeParams, hooks: LinkHooks) -> Result<Self> {
        let constellation = match params {
            SchemeParams::Em(p) => Some(p.constellation(cfg.power())?),
            SchemeParams::Fem(p) => Some(p.constellation(cfg.power())?),
            SchemeParams::Pa(_) => None,
        };
        Ok(Self {
            cfg,
            params,
            constellation,
            hooks,
        })
    }

    fn receive(
        &self,
        h: ArrayView1<'_, Complex64>,
        x: &[Complex64],
        stream: &mut SeededStream,
    ) -> ndarray::Array2<Complex64> {
        if self.hooks.noiseless {
            apply_noiseless(h, x)
        } else {
            apply_subchannel(h, x, stream)
        }
    }

    /// One coherence slot over all active subchannels; returns (sent, decided)
    /// bit pairs in (subcarrier, use) order.
    fn run_block(&self, stream: &mut SeededStream) -> Vec<(bool, bool)> {
        let m = self.params.active_subchannels();
        let channel = sample_subchannels(self.cfg.n(), m, stream);
        let mut out = Vec::new();
        for b in 0..m {
            let h = channel.subchannel(b);
            match self.params {
                SchemeParams::Em(_) => {
                    let c = self.constellation.as_ref().expect("energy constellation");
                    let bit: bool = stream.random();
                    let x = em_modulate(c.level(bit as usize), self.cfg.l()).expect("non-negative level");
                    let y = self.receive(h, &x, stream);
                    let got = em_detect(&y, c).expect("non-empty constellation");
                    out.push((bit, got == 1));
                }
                SchemeParams::Fem(_) => {
                    let c = self.constellation.as_ref().expect("energy constellation");
                    let bits: Vec<bool> = (0..self.cfg.l()).map(|_| stream.random()).collect();
                    let energies: Vec<f64> = bits.iter().map(|&bit| c.level(bit as usize)).collect();
                    let x = fem_modulate(&energies).expect("non-negative levels");
                    let y = self.receive(h, &x, stream);
                    let got = fem_detect(&y, c).expect("non-empty constellation");
                    out.extend(bits.iter().zip(got).map(|(&s, g)| (s, g == 1)));
                }
                SchemeParams::Pa(p) => {
                    let bits: Vec<bool> = (0..p.split.block_len - 1).map(|_| stream.random()).collect();
                    let frame = PaFrame::new(&p.split, &bits).expect("frame length matches split");
                    let y = self.receive(h, &frame.symbols(), stream);
                    let h_hat: Vec<Complex64> = if self.hooks.perfect_csi {
                        h.to_vec()
                    } else {
                        pa_estimate(y.column(0), frame.pilot)
                    };
                    match pa_detect(&y.slice(s![.., 1..]).to_owned(), &h_hat) {
                        Ok(got) => out.extend(bits.iter().zip(got).map(|(&s, g)| (s, g))),
                        // undefined decision: count every symbol as an error
                        Err(_) => out.extend(bits.iter().map(|&s| (s, !s))),
                    }
                }
            }
        }
        out
    }
}

/// Bits per symbol-period the scheme puts on the air.
pub fn nominal_rate(scheme: Scheme, m: usize, l: usize, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::DegenerateConstellation(k));
    }
    if l == 0 {
        return domain("block length must be at least 1");
    }
    let per_use = m as f64 * (k as f64).log2();
    Ok(match scheme {
        Scheme::Em => per_use / l as f64,
        Scheme::Fem => per_use,
        Scheme::Pa => per_use * (l as f64 - 1.0) / l as f64,
    })
}

/// Capacity of a BSC with crossover `ber`, scaled by the nominal rate.
pub fn bsc_eq_rate(nominal: f64, ber: f64) -> Result<f64> {
    Ok(nominal * (1.0 - binary_entropy(ber)?))
}

/// Stream id for a (scheme, N) grid point; independent of the rest of the grid.
pub fn point_stream_id(scheme: Scheme, n: usize) -> u64 {
    ((scheme as u64 + 1) << 48) | n as u64
}

pub fn run_point(sweep: &SweepConfig, scheme: Scheme, n: usize) -> Result<SweepRecord> {
    let cfg = sweep.system(n)?;
    let params = SchemeParams::select(scheme, &cfg, sweep.mode)?;
    let stream = SeededStream::new(sweep.seed, point_stream_id(scheme, n));
    let ber = estimate_ber(&cfg, &params, sweep.symbols_per_point, &stream)?;
    let (m, k, l) = (params.active_subchannels(), params.constellation_size(), params.block_len(&cfg));
    let nominal = nominal_rate(scheme, m, l, k)?;
    Ok(SweepRecord {
        scheme,
        n,
        b: cfg.b(),
        l,
        m,
        k,
        ber,
        nominal_rate: nominal,
        bsc_eq_rate: bsc_eq_rate(nominal, ber)?,
        seed: sweep.seed,
    })
}

/// One record per (scheme, N), sorted by scheme then N.
pub fn run_sweep(sweep: &SweepConfig) -> Result<Vec<SweepRecord>> {
    sweep.validate()?;
    let mut schemes = sweep.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let points: Vec<(Scheme, usize)> = schemes
        .iter()
        .flat_map(|&s| sweep.n_grid.iter().map(move |&n| (s, n)))
        .collect();
    points.into_par_iter().map(|(s, n)| run_point(sweep, s, n)).collect()
}

/// [`run_sweep`] on a dedicated pool of `workers` threads.
pub fn run_sweep_with_workers(sweep: &SweepConfig, workers: usize) -> Result<Vec<SweepRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Domain(e.to_string()))?;
    pool.install(|| run_sweep(sweep))
}

/// Log-log slope of `bsc_eq_rate` against N per scheme, over the upper half
/// of each scheme's grid.
pub fn empirical_exponents(records: &[SweepRecord]) -> Result<BTreeMap<Scheme, f64>> {
    let mut by_scheme: BTreeMap<Scheme, Vec<(f64, f64)>> = BTreeMap::new();
    for r in records {
        by_scheme.entry(r.scheme).or_default().push((r.n as f64, r.bsc_eq_rate));
    }
    by_scheme
        .into_iter()
        .map(|(scheme, mut pts)| {
            if pts.len() < 3 {
                return domain(format!("{scheme}: need at least 3 grid points, got {}", pts.len()));
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            Ok((scheme, loglog_slope(upper_half(&pts))?))
        })
        .collect()
}

/// The last `ceil(len / 2)` points.
pub fn upper_half<T>(points: &[T]) -> &[T] {
    &points[points.len() / 2..]
}

pub const CSV_HEADER: [&str; 10] = [
    "scheme",
    "N",
    "B",
    "L",
    "M",
    "K",
    "ber",
    "nominal_rate",
    "bsc_eq_rate",
    "seed",
];

pub fn write_records<W: Write>(out: W, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.scheme.to_string(),
            r.n.to_string(),
            r.b.to_string(),
            r.l.to_string(),
            r.m.to_string(),
            r.k.to_string(),
            r.ber.to_string(),
            r.nominal_rate.to_string(),
            r.bsc_eq_rate.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!("unexpected CSV header: {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        let bad = |col: &str| Error::Config(format!("row {}: invalid {col}", i + 1));
        let int = |j: usize, col: &str| row[j].parse::<usize>().map_err(|_| bad(col));
        let real = |j: usize, col: &str| row[j].parse::<f64>().map_err(|_| bad(col));
        out.push(SweepRecord {
            scheme: row[0].parse()?,
            n: int(1, "N")?,
            b: int(2, "B")?,
            l: int(3, "L")?,
            m: int(4, "M")?,
            k: int(5, "K")?,
            ber: real(6, "ber")?,
            nominal_rate: real(7, "nominal_rate")?,
            bsc_eq_rate: real(8, "bsc_eq_rate")?,
            seed: row[9].parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(out)
}
