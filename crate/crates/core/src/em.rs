//! Energy modulation: one energy symbol per coherence block, repeated over
//! all L uses, detected from the block-averaged received energy.

use crate::channel::SystemConfig;
use crate::error::{domain, Error, Result};
use crate::numerics::ceil_pow;
use crate::scheme::SelectionMode;
use ndarray::Array2;
use num_complex::Complex64;

/// Constellation size used by the sweeps.
pub const BINARY: usize = 2;

/// Uniformly spaced non-negative energy levels `{0, s, 2s, ..., (K-1)s}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyConstellation {
    levels: Vec<f64>,
    spacing: f64,
    active: usize,
}

impl EnergyConstellation {
    /// K levels whose uniform mean energy equals the per-use budget `power / m`.
    pub fn scaled(k: usize, m: usize, power: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::DegenerateConstellation(k));
        }
        if m == 0 || !(power > 0.0) {
            return domain(format!("need m >= 1 and power > 0, got m = {m}, power = {power}"));
        }
        let spacing = 2.0 * power / (m as f64 * (k - 1) as f64);
        Ok(Self {
            levels: (0..k).map(|i| i as f64 * spacing).collect(),
            spacing,
            active: m,
        })
    }

    /// Arbitrary sorted levels; used by tests that need a specific geometry.
    pub fn from_levels(levels: Vec<f64>, active: usize) -> Result<Self> {
        if levels.is_empty() {
            return domain("empty constellation");
        }
        if levels.iter().any(|&a| !(a >= 0.0)) || levels.windows(2).any(|w| w[1] <= w[0]) {
            return domain("levels must be non-negative and strictly increasing");
        }
        let spacing = if levels.len() > 1 { levels[1] - levels[0] } else { 0.0 };
        Ok(Self {
            levels,
            spacing,
            active,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> f64 {
        self.levels[index]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn active_subchannels(&self) -> usize {
        self.active
    }

    pub fn mean_energy(&self) -> f64 {
        self.levels.iter().sum::<f64>() / self.levels.len() as f64
    }

    /// Index of the level nearest to `u`; ties go to the smaller level.
    pub fn nearest(&self, u: f64) -> usize {
        let mut best = 0;
        let mut best_dist = (u - self.levels[0]).abs();
        for (i, &a) in self.levels.iter().enumerate().skip(1) {
            let d = (u - a).abs();
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmParams {
    /// Active subchannels.
    pub m: usize,
    /// Distance exponent, midpoint of the feasible interval when it exists.
    pub t: Option<f64>,
    /// Nominal half-spacing `N^-t`.
    pub d: Option<f64>,
    /// Constellation size.
    pub k: usize,
}

impl EmParams {
    pub fn constellation(&self, power: f64) -> Result<EnergyConstellation> {
        EnergyConstellation::scaled(self.k, self.m, power)
    }
}

/// Reliable EM needs `eps < t < 1/2 + tau`.
pub fn em_select_params(cfg: &SystemConfig, mode: SelectionMode) -> Result<EmParams> {
    let upper = 0.5 + cfg.tau();
    let feasible = cfg.eps() < upper;
    let t = feasible.then(|| 0.5 * (cfg.eps() + upper));
    let m = match mode {
        SelectionMode::Theoretical => {
            if !feasible {
                return Err(Error::InfeasibleParameters(format!(
                    "EM needs eps < 1/2 + tau, got eps = {}, tau = {}",
                    cfg.eps(),
                    cfg.tau()
                )));
            }
            cfg.b().min(ceil_pow(cfg.n(), cfg.eps().min(upper)))
        }
        SelectionMode::AllSubcarriers => cfg.b(),
    };
    Ok(EmParams {
        m,
        t,
        d: t.map(|t| (cfg.n() as f64).powf(-t)),
        k: BINARY,
    })
}

/// `sqrt(a) * 1_L`.
pub fn em_modulate(a: f64, l: usize) -> Result<Vec<Complex64>> {
    if !(a >= 0.0) {
        return domain(format!("energy level must be >= 0, got {a}"));
    }
    Ok(vec![Complex64::new(a.sqrt(), 0.0); l])
}

/// `v = sum_n |(1/L) sum_l y[n, l]|^2`.
pub fn em_statistic(y: &Array2<Complex64>) -> f64 {
    let l = y.ncols() as f64;
    y.rows()
        .into_iter()
        .map(|row| (row.sum() / l).norm_sqr())
        .sum()
}

/// Decide the block's energy level from `u = v/N - 1/L`; returns the level index.
pub fn em_detect(y: &Array2<Complex64>, constellation: &EnergyConstellation) -> Result<usize> {
    if constellation.is_empty() {
        return domain("empty constellation");
    }
    let (n, l) = y.dim();
    if n == 0 || l == 0 {
        return domain("receive matrix has a zero dimension");
    }
    let u = em_statistic(y) / n as f64 - 1.0 / l as f64;
    Ok(constellation.nearest(u))
}
