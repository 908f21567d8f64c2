//! Pilot-assisted coherent scheme: one pilot per block per subcarrier, MMSE
//! channel estimate, maximum ratio combining and scaled BPSK data.
//!
//! Per-subchannel block energy `rho = P L / M` is split between the pilot
//! (`alpha rho`) and `L - 1` data symbols (`(1 - alpha) rho / (L - 1)` each).
//! The pilot fraction maximizing the decider-perceived SNR
//! `S0 * gamma(alpha)`, with `gamma(alpha) = (alpha - alpha^2) / (alpha C1 + 1)`,
//! has the closed form `alpha* = 1 / (sqrt(1 + C1) + 1)`.

use crate::channel::SystemConfig;
use crate::error::{domain, Error, Result};
use crate::numerics::ceil_pow;
use crate::scheme::SelectionMode;
use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;

/// Everything about the pilot/data energy split that is fixed before data flows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PaPowerSplit {
    /// Per-subchannel block energy budget.
    pub rho: f64,
    /// `rho / (L - 1)`.
    pub kappa: f64,
    /// `(rho - kappa) / (1 + kappa)`.
    pub c1: f64,
    /// `sqrt(1 + C1)`.
    pub c2: f64,
    pub alpha_star: f64,
    /// MMSE error variance `1 / (1 + alpha* rho)`.
    pub est_err_var: f64,
    pub block_len: usize,
}

impl PaPowerSplit {
    pub fn pilot_energy(&self) -> f64 {
        self.alpha_star * self.rho
    }

    pub fn data_symbol_energy(&self) -> f64 {
        (1.0 - self.alpha_star) * self.rho / (self.block_len - 1) as f64
    }

    /// `gamma(alpha)`, the part of the perceived SNR that depends on the split.
    pub fn gamma(&self, alpha: f64) -> f64 {
        (alpha - alpha * alpha) / (alpha * self.c1 + 1.0)
    }
}

pub fn pa_alpha_star(rho: f64, l: usize) -> Result<PaPowerSplit> {
    if l < 2 {
        return Err(Error::InsufficientBlockLength(l));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return domain(format!("block energy must be positive, got {rho}"));
    }
    let kappa = rho / (l - 1) as f64;
    let c1 = (rho - kappa) / (1.0 + kappa);
    let c2 = (1.0 + c1).sqrt();
    // 1/(C2 + 1) is the C1 -> 0 limit-safe form of (sqrt(1 + C1) - 1)/C1
    let alpha_star = 1.0 / (c2 + 1.0);
    Ok(PaPowerSplit {
        rho,
        kappa,
        c1,
        c2,
        alpha_star,
        est_err_var: 1.0 / (1.0 + alpha_star * rho),
        block_len: l,
    })
}

/// Decider-perceived SNR at `alpha*` under `||h||^2 ~ N`.
pub fn pa_effective_snr(n: usize, split: &PaPowerSplit) -> f64 {
    let denom = (1.0 + split.rho).sqrt() + (1.0 + split.kappa).sqrt();
    n as f64 * split.kappa * split.rho / (denom * denom)
}

/// Achievable rate in bits per symbol-period over `m` active subchannels.
pub fn pa_rate(n: usize, m: usize, split: &PaPowerSplit) -> f64 {
    let l = split.block_len as f64;
    (l - 1.0) / l * m as f64 * (1.0 + pa_effective_snr(n, split)).log2()
}

/// Elementwise MMSE estimate `x_p^* y_p / (|x_p|^2 + 1)`.
pub fn pa_estimate(y_pilot: ArrayView1<'_, Complex64>, x_pilot: Complex64) -> Vec<Complex64> {
    let g = x_pilot.conj() / (x_pilot.norm_sqr() + 1.0);
    y_pilot.iter().map(|&y| g * y).collect()
}

/// Antipodal data symbols `{-s, +s}` with `s^2` the data symbol energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledBpsk {
    pub amplitude: f64,
}

impl ScaledBpsk {
    pub fn symbol(&self, bit: bool) -> Complex64 {
        Complex64::new(if bit { self.amplitude } else { -self.amplitude }, 0.0)
    }
}

/// MRC `r_l = h_hat^H y_l` followed by a sign decision on each data column.
/// Returns the decided bits (`true` for `+s`).
pub fn pa_detect(y_data: &Array2<Complex64>, h_hat: &[Complex64]) -> Result<Vec<bool>> {
    if y_data.nrows() != h_hat.len() {
        return domain(format!(
            "receive matrix has {} rows but the estimate has {} entries",
            y_data.nrows(),
            h_hat.len()
        ));
    }
    if h_hat.iter().all(|h| h.norm_sqr() == 0.0) {
        return Err(Error::DegenerateCombining);
    }
    Ok(y_data
        .columns()
        .into_iter()
        .map(|col| {
            let r: Complex64 = col.iter().zip(h_hat).map(|(y, h)| h.conj() * y).sum();
            r.re >= 0.0
        })
        .collect())
}

/// One block for one subcarrier: pilot first, then `L - 1` data symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct PaFrame {
    pub pilot: Complex64,
    pub data: Vec<Complex64>,
}

impl PaFrame {
    pub fn new(split: &PaPowerSplit, bits: &[bool]) -> Result<Self> {
        if bits.len() != split.block_len - 1 {
            return domain(format!(
                "frame carries {} data symbols, got {} bits",
                split.block_len - 1,
                bits.len()
            ));
        }
        let bpsk = ScaledBpsk {
            amplitude: split.data_symbol_energy().sqrt(),
        };
        Ok(Self {
            pilot: Complex64::new(split.pilot_energy().sqrt(), 0.0),
            data: bits.iter().map(|&b| bpsk.symbol(b)).collect(),
        })
    }

    pub fn energy(&self) -> f64 {
        self.pilot.norm_sqr() + self.data.iter().map(|x| x.norm_sqr()).sum::<f64>()
    }

    pub fn symbols(&self) -> Vec<Complex64> {
        std::iter::once(self.pilot).chain(self.data.iter().copied()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PaParams {
    pub m: usize,
    pub split: PaPowerSplit,
}

/// Subchannel count and energy split for a sweep point.
///
/// The frame needs at least one data symbol after the pilot, so the block
/// length is `max(L, 2)`.
pub fn pa_select_params(cfg: &SystemConfig, mode: SelectionMode) -> Result<PaParams> {
    let m = match mode {
        SelectionMode::Theoretical => cfg.b().min(ceil_pow(cfg.n(), 0.5 * (1.0 + cfg.tau()))),
        SelectionMode::AllSubcarriers => cfg.b(),
    };
    let block_len = cfg.l().max(2);
    let rho = cfg.power() * block_len as f64 / m as f64;
    Ok(PaParams {
        m,
        split: pa_alpha_star(rho, block_len)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::apply_noiseless;
    use ndarray::Array1;

    /// Exhaustive grid maximization of gamma over [0, 1].
    fn grid_argmax(split: &PaPowerSplit, step: f64) -> f64 {
        let steps = (1.0 / step).round() as usize;
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..=steps {
            let a = i as f64 * step;
            let g = split.gamma(a);
            if g > best.1 {
                best = (a, g);
            }
        }
        best.0
    }

    #[test]
    fn equal_split_at_two_symbols() {
        let s = pa_alpha_star(7.0, 2).unwrap();
        assert_eq!(s.c1, 0.0);
        assert_eq!(s.alpha_star, 0.5);
    }

    #[test]
    fn alpha_star_matches_grid_search() {
        let s = pa_alpha_star(3.0, 4).unwrap();
        assert!((s.kappa - 1.0).abs() < 1e-15 && (s.c1 - 1.0).abs() < 1e-15);
        assert!((s.alpha_star - 1.0 / (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((grid_argmax(&s, 1e-7) - 0.41421).abs() < 1e-5);
        assert!((s.alpha_star - grid_argmax(&s, 1e-7)).abs() < 1e-6);

        let s = pa_alpha_star(10.0, 11).unwrap();
        assert!((s.c1 - 4.5).abs() < 1e-12);
        assert!((grid_argmax(&s, 1e-7) - 0.29893).abs() < 1e-5);
        assert!((s.alpha_star - 0.29893).abs() < 1e-5);
    }

    #[test]
    fn rejects_short_blocks() {
        assert!(matches!(pa_alpha_star(1.0, 1), Err(Error::InsufficientBlockLength(1))));
        assert!(pa_alpha_star(0.0, 3).is_err());
    }

    #[test]
    fn effective_snr_examples() {
        let s = pa_alpha_star(10.0, 11).unwrap();
        let snr = pa_effective_snr(100, &s);
        assert!((snr - 44.68).abs() < 0.01);
        // cross-check against S0 * gamma(alpha*)
        let s0 = 100.0 * s.kappa * s.rho / (1.0 + s.kappa);
        assert!((snr - s0 * s.gamma(s.alpha_star)).abs() < 1e-9);

        let s = pa_alpha_star(2.0, 2).unwrap();
        assert!((pa_effective_snr(10, &s) - 40.0 / 12.0).abs() < 1e-12);

        // data energy per symbol vanishes as L grows
        let s = pa_alpha_star(10.0, 1_000_000).unwrap();
        assert!(pa_effective_snr(100, &s) < 1e-2);
    }

    #[test]
    fn rate_examples() {
        let s = pa_alpha_star(10.0, 11).unwrap();
        assert!((pa_rate(100, 1, &s) - 5.014).abs() < 0.01);
        // L = 2 with perceived SNR 3: rho^2 N / (4 (1 + rho)) = 3 at rho = 2, N = 9
        let s = pa_alpha_star(2.0, 2).unwrap();
        assert!((pa_effective_snr(9, &s) - 3.0).abs() < 1e-12);
        assert!((pa_rate(9, 5, &s) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn estimate_limits() {
        let y = Array1::from_elem(4, Complex64::new(1.0, -2.0));
        assert!(pa_estimate(y.view(), Complex64::new(0.0, 0.0))
            .iter()
            .all(|h| h.norm() == 0.0));

        let h = Array1::from_vec(vec![
            Complex64::new(0.3, -1.1),
            Complex64::new(-0.7, 0.2),
            Complex64::new(1.4, 0.9),
        ]);
        let xp = Complex64::new(1e3, 0.0);
        let y = apply_noiseless(h.view(), &[xp]);
        let est = pa_estimate(y.column(0), xp);
        for (e, t) in est.iter().zip(h.iter()) {
            assert!((e - t).norm() / t.norm() < 1e-5);
        }
    }

    #[test]
    fn detect_recovers_sign_with_perfect_csi() {
        let h = vec![Complex64::new(0.5, 0.5), Complex64::new(-1.0, 0.25)];
        let hv = Array1::from_vec(h.clone());
        let bpsk = ScaledBpsk { amplitude: 0.7 };
        let x = vec![bpsk.symbol(true), bpsk.symbol(false), bpsk.symbol(true)];
        let y = apply_noiseless(hv.view(), &x);
        assert_eq!(pa_detect(&y, &h).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn zero_estimate_is_degenerate() {
        let y = Array2::from_elem((2, 3), Complex64::new(1.0, 0.0));
        let h = vec![Complex64::new(0.0, 0.0); 2];
        assert!(matches!(pa_detect(&y, &h), Err(Error::DegenerateCombining)));
    }

    #[test]
    fn frame_exhausts_budget() {
        let s = pa_alpha_star(3.7, 9).unwrap();
        let f = PaFrame::new(&s, &[true, false, true, true, false, false, true, false]).unwrap();
        assert!((f.energy() - 3.7).abs() < 1e-12);
        assert!(PaFrame::new(&s, &[true]).is_err());
    }

    #[test]
    fn select_params_modes() {
        let cfg = SystemConfig::new(4096, 0.6, 0.3, 2.0, 0).unwrap();
        let p = pa_select_params(&cfg, SelectionMode::AllSubcarriers).unwrap();
        assert_eq!((p.m, p.split.block_len), (148, 13));
        assert!((p.split.rho - 2.0 * 13.0 / 148.0).abs() < 1e-12);
        let p = pa_select_params(&cfg, SelectionMode::Theoretical).unwrap();
        assert_eq!(p.m, 148);

        let cfg = SystemConfig::new(256, 1.0, 0.0, 2.0, 0).unwrap();
        let p = pa_select_params(&cfg, SelectionMode::Theoretical).unwrap();
        assert_eq!((p.m, p.split.block_len), (16, 2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn closed_forms_agree(log_rho in -3.0f64..3.0, l in 3usize..10_000) {
                let s = pa_alpha_star(10f64.powf(log_rho), l).unwrap();
                prop_assume!(s.c1 > 0.0);
                let a1 = ((1.0 + s.c1).sqrt() - 1.0) / s.c1;
                let a2 = 1.0 / (s.c2 + 1.0);
                let a3 = 1.0 / (((1.0 + s.rho) / (1.0 + s.kappa)).sqrt() + 1.0);
                prop_assert!((a1 - a2).abs() <= 1e-12);
                prop_assert!((a2 - a3).abs() <= 1e-12);
                prop_assert!((0.0..=1.0).contains(&s.alpha_star));
                prop_assert!(s.c2 >= 1.0 && s.kappa <= s.rho);
            }

            #[test]
            fn rate_non_decreasing_in_n(log_rho in -3.0f64..3.0, l in 2usize..1000, n in 1usize..100_000) {
                let s = pa_alpha_star(10f64.powf(log_rho), l).unwrap();
                prop_assert!(pa_rate(n + 1, 3, &s) >= pa_rate(n, 3, &s));
            }
        }
    }
}
