//! Block-fading resource grid: N receive antennas, B flat subcarriers, and a
//! channel that stays constant for L consecutive uses.

use crate::error::{domain, Result};
use crate::numerics::{ceil_pow, SeededStream};
use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;

/// Grid parameters. B and L are always recomputed from `(n, eps, tau)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemConfig {
    n: usize,
    eps: f64,
    tau: f64,
    power: f64,
    seed: u64,
}

impl SystemConfig {
    pub fn new(n: usize, eps: f64, tau: f64, power: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return domain("antenna count N must be at least 1");
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return domain(format!("bandwidth exponent must be finite and >= 0, got {eps}"));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return domain(format!("block-length exponent must be finite and >= 0, got {tau}"));
        }
        if !(power > 0.0 && power.is_finite()) {
            return domain(format!("power must be positive, got {power}"));
        }
        Ok(Self {
            n,
            eps,
            tau,
            power,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Subcarrier count, `ceil(N^eps)`.
    pub fn b(&self) -> usize {
        ceil_pow(self.n, self.eps)
    }

    /// Coherence block length, `ceil(N^tau)`.
    pub fn l(&self) -> usize {
        ceil_pow(self.n, self.tau)
    }

    /// Average received SNR per antenna per subcarrier with the power spread
    /// evenly over all B subcarriers.
    pub fn snr_per_antenna(&self) -> f64 {
        self.power / self.b() as f64
    }
}

/// One coherence slot's channel: an N x B matrix of i.i.d. CN(0,1) gains.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelBlock {
    h: Array2<Complex64>,
}

impl ChannelBlock {
    pub fn from_matrix(h: Array2<Complex64>) -> Self {
        Self { h }
    }

    pub fn antennas(&self) -> usize {
        self.h.nrows()
    }

    pub fn subcarriers(&self) -> usize {
        self.h.ncols()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.h
    }

    /// Channel vector of subcarrier `b` across all antennas.
    pub fn subchannel(&self, b: usize) -> ArrayView1<'_, Complex64> {
        self.h.column(b)
    }
}

pub fn sample_channel(cfg: &SystemConfig, stream: &mut SeededStream) -> ChannelBlock {
    sample_subchannels(cfg.n(), cfg.b(), stream)
}

/// An N x `count` block; used when only the first `count` subcarriers are active.
pub fn sample_subchannels(n: usize, count: usize, stream: &mut SeededStream) -> ChannelBlock {
    ChannelBlock {
        h: Array2::from_shape_simple_fn((n, count), || stream.cn01()),
    }
}

/// `Y = h x^H + Z` for one subcarrier, with Z drawn from `stream`.
pub fn apply_subchannel(
    h: ArrayView1<'_, Complex64>,
    x: &[Complex64],
    stream: &mut SeededStream,
) -> Array2<Complex64> {
    let mut y = apply_noiseless(h, x);
    y.mapv_inplace(|v| v + stream.cn01());
    y
}

/// `Y = h x^H` without noise. Test hook for deterministic checks.
pub fn apply_noiseless(h: ArrayView1<'_, Complex64>, x: &[Complex64]) -> Array2<Complex64> {
    Array2::from_shape_fn((h.len(), x.len()), |(n, l)| h[n] * x[l].conj())
}
