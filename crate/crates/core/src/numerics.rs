//! Seeded sampling, scalar special functions, root finding and regression
//! helpers shared by the channel, modem, bound and sweep modules.

use crate::error::{domain, Error, Result};
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::FRAC_1_SQRT_2;

/// Bracket-width tolerance used when callers have no stronger requirement.
pub const DEFAULT_BISECT_TOL: f64 = 1e-9;

/// A reproducible random stream keyed by `(master_seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id mapped onto the cipher's stream
/// selector, so any `(seed, id)` pair can be materialized independently of
/// every other pair. This is what lets sweep work items run in any order on
/// any number of threads and still produce identical numbers.
#[derive(Clone, Debug)]
pub struct SeededStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl SeededStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh child stream whose id is a hash of this stream's id and `index`.
    ///
    /// The child does not depend on how many values were already drawn
    /// from `self`.
    pub fn derive(&self, index: u64) -> SeededStream {
        let id = splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)));
        SeededStream::new(self.master_seed, id)
    }

    /// One draw from CN(0, 1).
    pub fn cn01(&mut self) -> Complex64 {
        let re: f64 = StandardNormal.sample(&mut self.rng);
        let im: f64 = StandardNormal.sample(&mut self.rng);
        Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    }
}

impl RngCore for SeededStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Circularly symmetric complex Gaussian with unit total variance.
pub fn sample_cn01(stream: &mut SeededStream) -> Complex64 {
    stream.cn01()
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("binary entropy needs 0 <= p <= 1, got {p}"));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Bisection on a sign-changing bracket; returns the final bracket `(lo, hi)`.
///
/// Halves until `hi - lo <= tol` or until the midpoint is no longer
/// representable between the endpoints.
pub fn bisect_bracket<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) || !(tol > 0.0) {
        return domain(format!("invalid bracket [{lo}, {hi}] or tolerance {tol}"));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracketing { lo, hi });
    }
    while hi - lo > tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok((mid, mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Root of `f` on `[lo, hi]` by bisection, as the midpoint of the final bracket.
pub fn bisect_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (lo, hi) = bisect_bracket(f, lo, hi, tol)?;
    Ok(lo + 0.5 * (hi - lo))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return domain(format!("need at least 2 points, got {}", points.len()));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0)) {
        return domain(format!("log-log fit needs positive coordinates, got ({x}, {y})"));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return domain("all x coordinates are equal");
    }
    Ok(sxy / sxx)
}

/// Pairwise (cascade) summation in a fixed tree order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// `ceil(n^exponent)` with a guard against `powf` landing a hair above an
/// exact integer (e.g. 1024^0.3 = 8).
pub fn ceil_pow(n: usize, exponent: f64) -> usize {
    let x = (n as f64).powf(exponent);
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cn01_is_zero_mean_unit_variance_with_gaussian_kurtosis() {
        let mut s = SeededStream::new(11, 0);
        let n = 1_000_000;
        let (mut sum, mut e2, mut e4) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
        for _ in 0..n {
            let h = s.cn01();
            sum += h;
            let p = h.norm_sqr();
            e2 += p;
            e4 += p * p;
        }
        let nf = n as f64;
        assert!((sum / nf).norm() < 0.01);
        assert!((e2 / nf - 1.0).abs() < 0.01);
        assert!((e4 / nf - 2.0).abs() < 0.05);
    }

    #[test]
    fn same_key_same_sequence() {
        let mut a = SeededStream::new(42, 7);
        let mut b = SeededStream::new(42, 7);
        for _ in 0..1000 {
            let (x, y) = (a.cn01(), b.cn01());
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let mut a = SeededStream::new(42, 1);
        let mut b = SeededStream::new(42, 2);
        let n = 200_000;
        let mut c = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            c += a.cn01() * b.cn01().conj();
        }
        // standard error of the normalized cross-correlation is 1/sqrt(n)
        assert!((c / n as f64).norm() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn derive_ignores_parent_position() {
        let parent = SeededStream::new(3, 9);
        let mut advanced = parent.clone();
        for _ in 0..10 {
            advanced.cn01();
        }
        assert_eq!(parent.derive(5).stream_id(), advanced.derive(5).stream_id());
        assert_ne!(parent.derive(5).stream_id(), parent.derive(6).stream_id());
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.11).unwrap() - 0.4999).abs() < 1e-4);
        assert!(matches!(binary_entropy(1.5), Err(Error::Domain(_))));
        assert!(matches!(binary_entropy(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn bisection_examples() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0, 1e-9).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-9);
        let r = bisect_root(|x| x, -1.0, 1.0, 1e-9).unwrap();
        assert!(r.abs() < 1e-9);
        let r = bisect_root(|x: f64| x.ln_1p() - 1.0, 0.0, 3.0, 1e-9).unwrap();
        assert!((r - (std::f64::consts::E - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn bisection_rejects_same_sign() {
        let e = bisect_root(|x| x * x + 1.0, -1.0, 1.0, 1e-9).unwrap_err();
        assert!(matches!(e, Error::Bracketing { .. }));
    }

    #[test]
    fn loglog_examples() {
        let s = loglog_slope(&[(10.0, 10.0), (100.0, 100.0)]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        let s = loglog_slope(&[(100.0, 10.0), (10000.0, 100.0)]).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
        // closed-form least squares on log10: x = 1,2,3; slope = (ly3 - ly1) / 2
        let oracle = (10.2f64.log10() - 1.1f64.log10()) / 2.0;
        let s = loglog_slope(&[(10.0, 1.1), (100.0, 3.0), (1000.0, 10.2)]).unwrap();
        assert!((s - oracle).abs() < 1e-12);
        assert!((s - 0.483).abs() < 0.01);
    }

    #[test]
    fn loglog_rejects_bad_input() {
        assert!(loglog_slope(&[(1.0, 1.0)]).is_err());
        assert!(loglog_slope(&[(1.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(loglog_slope(&[(1.0, -1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn ceil_pow_handles_exact_powers() {
        assert_eq!(ceil_pow(1024, 0.3), 8);
        assert_eq!(ceil_pow(4, 0.5), 2);
        assert_eq!(ceil_pow(256, 0.3), 6);
        assert_eq!(ceil_pow(100, 0.6), 16);
        assert_eq!(ceil_pow(4096, 0.6), 148);
        assert_eq!(ceil_pow(7, 0.0), 1);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn entropy_is_symmetric(p in 0.0f64..=1.0) {
                let a = binary_entropy(p).unwrap();
                let b = binary_entropy(1.0 - p).unwrap();
                prop_assert!((a - b).abs() < 1e-12);
            }

            #[test]
            fn bisection_stays_in_bracket(root in -5.0f64..5.0, tol in 1e-12f64..1e-3) {
                let f = |x: f64| (x - root).powi(3) + (x - root);
                let (lo, hi) = bisect_bracket(f, -10.0, 10.0, tol).unwrap();
                prop_assert!(lo >= -10.0 && hi <= 10.0 && lo <= hi);
                prop_assert!(f(lo) <= 0.0 && f(hi) >= 0.0);
            }

            #[test]
            fn two_point_slope_is_exact(x1 in 0.1f64..1e3, dx in 1.5f64..1e3, y1 in 0.1f64..1e3, y2 in 0.1f64..1e3) {
                let x2 = x1 * dx;
                let s = loglog_slope(&[(x1, y1), (x2, y2)]).unwrap();
                let exact = (y2.ln() - y1.ln()) / (x2.ln() - x1.ln());
                prop_assert!((s - exact).abs() <= 1e-12 * exact.abs().max(1.0));
            }
        }
    }
}
