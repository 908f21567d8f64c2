//! Capacity bounds and scaling predictions.
//!
//! The shape-encoding bound optimizes `E[Phi(a)]` over the block-energy law,
//! where `Phi(a) = min(Phi1(a), Phi2(a))`,
//! `Phi1(a) = a^2 / (1 + a) * N (1 - 1/L)` and `Phi2(a) = L ln(1 + a N)`.
//! `Phi1` and `Phi2` cross once at `a0 > 0`; below it `Phi` is convex and the
//! optimal law is on/off at `a0`, above it `Phi` is concave and the optimal
//! law is a point mass at the budget. Everything here works in nats and
//! converts to bits only at the capacity level.

use crate::channel::SystemConfig;
use crate::error::{domain, Error, Result};
use crate::numerics::{bisect_root, pairwise_sum, SeededStream};
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

/// Integer subchannel search switches from exhaustive to golden-section here.
pub const EXHAUSTIVE_SEARCH_LIMIT: usize = 4096;

const PLATEAU_RTOL: f64 = 1e-12;

pub fn phi1(a: f64, n: usize, l: usize) -> f64 {
    a * a / (1.0 + a) * n as f64 * (1.0 - 1.0 / l as f64)
}

pub fn phi2(a: f64, n: usize, l: usize) -> f64 {
    l as f64 * (a * n as f64).ln_1p()
}

pub fn phi(a: f64, n: usize, l: usize) -> Result<f64> {
    if l < 2 {
        return Err(Error::DegenerateBlock(l));
    }
    if !(a >= 0.0) {
        return domain(format!("energy must be >= 0, got {a}"));
    }
    Ok(phi1(a, n, l).min(phi2(a, n, l)))
}

/// Crossing point of `Phi1` and `Phi2`; `tol` bounds the final bracket width.
pub fn solve_a0(n: usize, l: usize, tol: f64) -> Result<f64> {
    if l < 2 {
        return Err(Error::DegenerateBlock(l));
    }
    if n == 0 {
        return domain("antenna count must be at least 1");
    }
    let gap = |a: f64| phi1(a, n, l) - phi2(a, n, l);
    let lo = 1e-9;
    let mut hi = 1.0;
    while gap(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return domain("could not bracket a0");
        }
    }
    bisect_root(gap, lo, hi, tol)
}

/// `sup_p E[Phi(a)]` subject to `E[a] <= rho`, in nats.
pub fn sup_phi(rho: f64, n: usize, l: usize) -> Result<f64> {
    let a0 = solve_a0(n, l, crate::numerics::DEFAULT_BISECT_TOL)?;
    sup_phi_given_a0(rho, n, l, a0)
}

pub fn sup_phi_given_a0(rho: f64, n: usize, l: usize, a0: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return domain(format!("energy budget must be positive, got {rho}"));
    }
    if l < 2 {
        return Err(Error::DegenerateBlock(l));
    }
    if a0 >= rho {
        Ok(rho * a0 / (1.0 + a0) * n as f64 * (1.0 - 1.0 / l as f64))
    } else {
        Ok(l as f64 * (rho * n as f64).ln_1p())
    }
}

/// Result of the search over the active subchannel count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeBound {
    /// Upper bound on the shape-encoding capacity, bits per symbol-period.
    pub cs_upper: f64,
    /// Smallest maximizing subchannel count.
    pub m_star: usize,
    /// `sup_p E[Phi]` at `m_star`, nats.
    pub sup_phi: f64,
    pub a0: f64,
}

struct ShapeObjective {
    n: usize,
    l: usize,
    power: f64,
    a0: f64,
}

impl ShapeObjective {
    fn new(n: usize, l: usize, power: f64) -> Result<Self> {
        if !(power > 0.0) {
            return domain(format!("power must be positive, got {power}"));
        }
        Ok(Self {
            n,
            l,
            power,
            a0: solve_a0(n, l, 1e-12)?,
        })
    }

    fn sup_phi_at(&self, m: f64) -> f64 {
        let rho = self.power * self.l as f64 / m;
        sup_phi_given_a0(rho, self.n, self.l, self.a0).expect("validated in constructor")
    }

    /// `(M / L) sup E[Phi](P L / M)` in nats, on the continuous relaxation.
    fn value(&self, m: f64) -> f64 {
        m / self.l as f64 * self.sup_phi_at(m)
    }

    fn finish(&self, m_star: usize) -> ShapeBound {
        ShapeBound {
            cs_upper: self.value(m_star as f64) / LN_2,
            m_star,
            sup_phi: self.sup_phi_at(m_star as f64),
            a0: self.a0,
        }
    }

    /// Smallest `m` in `1..=hi` with `value(m) >= target`, for a
    /// non-decreasing objective.
    fn first_reaching(&self, target: f64, hi: usize) -> usize {
        let (mut lo, mut hi) = (1usize, hi);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.value(mid as f64) >= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }
}

pub fn shape_bound_exhaustive(n: usize, l: usize, power: f64, b: usize) -> Result<ShapeBound> {
    if b == 0 {
        return domain("need at least one subcarrier");
    }
    let obj = ShapeObjective::new(n, l, power)?;
    let values: Vec<f64> = (1..=b).map(|m| obj.value(m as f64)).collect();
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let m_star = values
        .iter()
        .position(|&v| v >= best * (1.0 - PLATEAU_RTOL))
        .expect("non-empty")
        + 1;
    Ok(obj.finish(m_star))
}

/// Golden-section search on the continuous relaxation, then both
/// neighbouring integers. The objective rises while `P L / M > a0` and is
/// flat beyond, so the plateau start is recovered by bisection.
pub fn shape_bound_golden(n: usize, l: usize, power: f64, b: usize) -> Result<ShapeBound> {
    if b == 0 {
        return domain("need at least one subcarrier");
    }
    let obj = ShapeObjective::new(n, l, power)?;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1.0, b as f64);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (obj.value(x1), obj.value(x2));
    while hi - lo > 0.5 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = obj.value(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = obj.value(x1);
        }
    }
    let centre = 0.5 * (lo + hi);
    let candidates = [centre.floor(), centre.ceil(), lo.floor(), hi.ceil(), b as f64];
    let best = candidates
        .iter()
        .map(|&m| m.clamp(1.0, b as f64))
        .map(|m| obj.value(m.round()))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(obj.finish(obj.first_reaching(best * (1.0 - PLATEAU_RTOL), b)))
}

/// Shape-encoding capacity bound with the subchannel count optimized over `1..=B`.
pub fn shape_capacity_ub(cfg: &SystemConfig) -> Result<ShapeBound> {
    shape_capacity_ub_with(cfg.n(), cfg.l(), cfg.power(), cfg.b())
}

/// Same as [`shape_capacity_ub`] with explicit dimensions.
pub fn shape_capacity_ub_with(n: usize, l: usize, power: f64, b: usize) -> Result<ShapeBound> {
    if b < EXHAUSTIVE_SEARCH_LIMIT {
        shape_bound_exhaustive(n, l, power, b)
    } else {
        shape_bound_golden(n, l, power, b)
    }
}

/// Interval of subcarrier counts beyond which spreading stops paying off.
pub fn critical_bandwidth(power: f64, n: usize, l: usize) -> Result<(f64, f64)> {
    if l < 2 {
        return domain(format!("critical bandwidth needs L >= 2, got {l}"));
    }
    if !(power > 0.0) || n == 0 {
        return domain("critical bandwidth needs P > 0 and N >= 1");
    }
    let core = PI.ln() * l as f64 / (l as f64).ln();
    let np1 = 1.0 + n as f64;
    Ok((
        2.0 * power * (core / np1).sqrt(),
        2.0 * power * (np1 * core).sqrt(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub a0: f64,
    /// nats
    pub sup_phi: f64,
    /// bits per symbol-period
    pub cs_upper: f64,
    pub m_star: usize,
    pub bcrit_lo: f64,
    pub bcrit_hi: f64,
}

pub fn bound_report(n: usize, l: usize, power: f64, b: usize) -> Result<BoundReport> {
    let shape = shape_capacity_ub_with(n, l, power, b)?;
    let (bcrit_lo, bcrit_hi) = critical_bandwidth(power, n, l)?;
    Ok(BoundReport {
        a0: shape.a0,
        sup_phi: shape.sup_phi,
        cs_upper: shape.cs_upper,
        m_star: shape.m_star,
        bcrit_lo,
        bcrit_hi,
    })
}

/// Schemes with a predicted capacity or rate exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExponentScheme {
    Coherent,
    Noncoherent,
    Em,
    Fem,
    Oed,
    Pa,
}

impl ExponentScheme {
    pub const ALL: [ExponentScheme; 6] = [
        ExponentScheme::Coherent,
        ExponentScheme::Noncoherent,
        ExponentScheme::Em,
        ExponentScheme::Fem,
        ExponentScheme::Oed,
        ExponentScheme::Pa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExponentScheme::Coherent => "coherent",
            ExponentScheme::Noncoherent => "noncoherent",
            ExponentScheme::Em => "em",
            ExponentScheme::Fem => "fem",
            ExponentScheme::Oed => "oed",
            ExponentScheme::Pa => "pa",
        }
    }
}

impl fmt::Display for ExponentScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExponentScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExponentScheme::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Domain(format!("unknown scheme '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentPrediction {
    pub scheme: ExponentScheme,
    pub exponent: f64,
}

/// Scaling exponent in N for `B ~ N^eps`, `L ~ N^tau`.
pub fn predicted_exponent(scheme: ExponentScheme, eps: f64, tau: f64) -> Result<ExponentPrediction> {
    if !(eps >= 0.0 && tau >= 0.0) {
        return domain(format!("exponents must be >= 0, got eps = {eps}, tau = {tau}"));
    }
    let exponent = match scheme {
        ExponentScheme::Coherent => eps.min(1.0),
        ExponentScheme::Noncoherent | ExponentScheme::Pa => eps.min((1.0 + tau) / 2.0).min(1.0),
        ExponentScheme::Em | ExponentScheme::Oed => (eps - tau).min(0.5),
        ExponentScheme::Fem => eps.min(0.5),
    };
    Ok(ExponentPrediction { scheme, exponent })
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
}

const MC_CHUNK: usize = 4096;

/// `B E[log2(1 + (P/B) ||h||^2)]` with `||h||^2 ~ Gamma(N, 1)`, i.e. a sum of
/// N unit-mean exponentials; bits per symbol-period.
pub fn coherent_capacity_mc(cfg: &SystemConfig, trials: usize, stream: &SeededStream) -> Result<McEstimate> {
    coherent_capacity_mc_with(cfg.n(), cfg.b(), cfg.power(), trials, stream)
}

pub fn coherent_capacity_mc_with(
    n: usize,
    b: usize,
    power: f64,
    trials: usize,
    stream: &SeededStream,
) -> Result<McEstimate> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    if n == 0 || b == 0 {
        return domain("need N >= 1 and B >= 1");
    }
    if power == 0.0 {
        return Ok(McEstimate { mean: 0.0, std_err: 0.0 });
    }
    let gain = Gamma::new(n as f64, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let snr = power / b as f64;
    let chunks = trials.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = stream.derive(c as u64);
            let len = MC_CHUNK.min(trials - c * MC_CHUNK);
            let v: Vec<f64> = (0..len)
                .map(|_| b as f64 * (1.0 + snr * gain.sample(&mut s)).log2())
                .collect();
            let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
            (pairwise_sum(&v), pairwise_sum(&sq))
        })
        .collect();
    let sum = pairwise_sum(&partial.iter().map(|p| p.0).collect::<Vec<_>>());
    let sum_sq = pairwise_sum(&partial.iter().map(|p| p.1).collect::<Vec<_>>());
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        std_err: (var / t).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        assert_eq!(phi(0.0, 100, 10).unwrap(), 0.0);
        assert!((phi(1.0, 100, 10).unwrap() - 45.0).abs() < 1e-12);
        let v = phi(2.0, 100, 10).unwrap();
        assert!((v - 10.0 * 201f64.ln()).abs() < 1e-12);
        assert!((v - 53.03).abs() < 0.01);
        assert!(matches!(phi(1.0, 10, 1), Err(Error::DegenerateBlock(1))));
    }

    #[test]
    fn a0_example() {
        let a0 = solve_a0(100, 10, 1e-9).unwrap();
        assert!((a0 - 1.020).abs() < 1e-3);
        // the hand bracket
        assert!(phi1(1.0, 100, 10) < phi2(1.0, 100, 10));
        assert!(phi1(1.05, 100, 10) > phi2(1.05, 100, 10));
        assert!(matches!(solve_a0(10, 1, 1e-9), Err(Error::DegenerateBlock(1))));
    }

    #[test]
    fn phi_switches_branch_at_a0() {
        let (n, l) = (300, 7);
        let a0 = solve_a0(n, l, 1e-13).unwrap();
        for i in 1..50 {
            let below = a0 * (1.0 - i as f64 / 60.0);
            let above = a0 * (1.0 + i as f64 / 10.0);
            assert_eq!(phi(below, n, l).unwrap(), phi1(below, n, l));
            assert_eq!(phi(above, n, l).unwrap(), phi2(above, n, l));
        }
        let mut prev = 0.0;
        for i in 0..2000 {
            let v = phi(i as f64 * a0 / 500.0, n, l).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn sup_phi_examples() {
        let v = sup_phi(10.0, 100, 10).unwrap();
        assert!((v - 10.0 * 1001f64.ln()).abs() < 1e-12);
        assert!((v - 69.08).abs() < 0.01);
        let a0 = solve_a0(100, 10, 1e-12).unwrap();
        let v = sup_phi(0.5, 100, 10).unwrap();
        assert!((v - 0.5 * a0 / (1.0 + a0) * 90.0).abs() < 1e-6);
        assert!((v - 22.72).abs() < 0.05);
    }

    #[test]
    fn sup_phi_is_continuous_at_a0() {
        let a0 = solve_a0(100, 10, 1e-14).unwrap();
        let below = sup_phi_given_a0(a0, 100, 10, a0).unwrap();
        let above = sup_phi_given_a0(a0 * (1.0 + 1e-12), 100, 10, a0).unwrap();
        assert!((below - above).abs() / below < 1e-6);
    }

    #[test]
    fn single_subcarrier() {
        let s = shape_capacity_ub_with(100, 10, 2.0, 1).unwrap();
        assert_eq!(s.m_star, 1);
    }

    #[test]
    fn golden_matches_exhaustive() {
        for &(n, l, p) in &[(100, 10, 2.0), (64, 4, 2.0), (4096, 13, 2.0), (10, 2, 0.1), (1000, 100, 50.0)] {
            for &b in &[1usize, 2, 3, 16, 100, 1024] {
                let e = shape_bound_exhaustive(n, l, p, b).unwrap();
                let g = shape_bound_golden(n, l, p, b).unwrap();
                assert!((e.cs_upper - g.cs_upper).abs() <= 1e-10 * e.cs_upper, "{n} {l} {p} {b}");
                assert_eq!(e.m_star, g.m_star, "{n} {l} {p} {b}");
            }
        }
    }

    #[test]
    fn critical_bandwidth_examples() {
        let (lo, hi) = critical_bandwidth(2.0, 4, 100).unwrap();
        assert!((lo - 8.92).abs() < 0.01);
        assert!((hi - 44.60).abs() < 0.05);
        assert!((hi / lo - 5.0).abs() < 1e-12);
        assert!(critical_bandwidth(2.0, 4, 1).is_err());
    }

    #[test]
    fn critical_bandwidth_is_monotone() {
        let base = critical_bandwidth(2.0, 50, 10).unwrap();
        for other in [
            critical_bandwidth(3.0, 50, 10).unwrap(),
            critical_bandwidth(2.0, 50, 11).unwrap(),
        ] {
            assert!(other.0 > base.0 && other.1 > base.1);
        }
        // lo falls with N while hi grows
        let more_n = critical_bandwidth(2.0, 51, 10).unwrap();
        assert!(more_n.1 > base.1);
    }

    #[test]
    fn exponent_examples() {
        let e = |s, eps, tau| predicted_exponent(s, eps, tau).unwrap().exponent;
        assert_eq!(e(ExponentScheme::Noncoherent, 0.6, 0.3), 0.6);
        assert!((e(ExponentScheme::Em, 0.6, 0.3) - 0.3).abs() < 1e-15);
        assert_eq!(e(ExponentScheme::Fem, 0.6, 0.3), 0.5);
        assert_eq!(e(ExponentScheme::Noncoherent, 0.8, 0.0), 0.5);
        assert!("bogus".parse::<ExponentScheme>().is_err());
        assert_eq!("OED".parse::<ExponentScheme>().unwrap(), ExponentScheme::Oed);
    }

    #[test]
    fn coherent_zero_power() {
        let s = SeededStream::new(0, 0);
        assert_eq!(coherent_capacity_mc_with(4, 2, 0.0, 10, &s).unwrap().mean, 0.0);
    }
}
