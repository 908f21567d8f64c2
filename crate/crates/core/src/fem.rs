//! Fast energy modulation: L independent energy symbols per block, each
//! decided on its own from the per-use received energy.

use crate::channel::SystemConfig;
use crate::em::{EnergyConstellation, BINARY};
use crate::error::{domain, Error, Result};
use crate::numerics::ceil_pow;
use crate::scheme::SelectionMode;
use ndarray::Array2;
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FemParams {
    pub m: usize,
    /// Distance exponent; must stay below 1/2.
    pub t: Option<f64>,
    pub k: usize,
}

impl FemParams {
    pub fn constellation(&self, power: f64) -> Result<EnergyConstellation> {
        EnergyConstellation::scaled(self.k, self.m, power)
    }
}

pub fn fem_select_params(cfg: &SystemConfig, mode: SelectionMode) -> Result<FemParams> {
    let feasible = cfg.eps() < 0.5;
    let t = feasible.then(|| 0.5 * (cfg.eps() + 0.5));
    let m = match mode {
        SelectionMode::Theoretical => {
            if !feasible {
                return Err(Error::InfeasibleParameters(format!(
                    "FEM needs eps < 1/2, got eps = {}",
                    cfg.eps()
                )));
            }
            cfg.b().min(ceil_pow(cfg.n(), cfg.eps().min(0.5)))
        }
        SelectionMode::AllSubcarriers => cfg.b(),
    };
    Ok(FemParams { m, t, k: BINARY })
}

pub fn fem_modulate(energies: &[f64]) -> Result<Vec<Complex64>> {
    energies
        .iter()
        .map(|&a| {
            if a >= 0.0 {
                Ok(Complex64::new(a.sqrt(), 0.0))
            } else {
                domain(format!("energy level must be >= 0, got {a}"))
            }
        })
        .collect()
}

/// Per-use energies `v_l = sum_n |y[n, l]|^2`.
pub fn fem_statistics(y: &Array2<Complex64>) -> Vec<f64> {
    y.columns()
        .into_iter()
        .map(|col| col.iter().map(|v| v.norm_sqr()).sum())
        .collect()
}

/// Symbol-by-symbol decisions from `u_l = v_l/N - 1`; returns level indices.
pub fn fem_detect(y: &Array2<Complex64>, constellation: &EnergyConstellation) -> Result<Vec<usize>> {
    if constellation.is_empty() {
        return domain("empty constellation");
    }
    let n = y.nrows();
    if n == 0 {
        return domain("receive matrix has no antennas");
    }
    Ok(fem_statistics(y)
        .into_iter()
        .map(|v| constellation.nearest(v / n as f64 - 1.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::apply_noiseless;
    use ndarray::Array1;

    fn cfg(n: usize, eps: f64) -> SystemConfig {
        SystemConfig::new(n, eps, 0.0, 2.0, 0).unwrap()
    }

    #[test]
    fn params() {
        let p = fem_select_params(&cfg(10_000, 0.3), SelectionMode::Theoretical).unwrap();
        assert_eq!(p.m, 16);
        assert!((p.t.unwrap() - 0.4).abs() < 1e-12);
        assert!(matches!(
            fem_select_params(&cfg(100, 0.6), SelectionMode::Theoretical),
            Err(Error::InfeasibleParameters(_))
        ));
        let p = fem_select_params(&cfg(100, 0.6), SelectionMode::AllSubcarriers).unwrap();
        assert_eq!(p.m, 16);
    }

    #[test]
    fn modulate() {
        assert!(fem_modulate(&[0.0; 4]).unwrap().iter().all(|x| x.norm() == 0.0));
        let x = fem_modulate(&[4.0, 0.0, 1.0]).unwrap();
        assert_eq!(x.iter().map(|v| v.re).collect::<Vec<_>>(), vec![2.0, 0.0, 1.0]);
        let e: f64 = fem_modulate(&[0.5, 0.5]).unwrap().iter().map(|x| x.norm_sqr()).sum();
        assert!((e - 1.0).abs() < 1e-15);
        assert!(fem_modulate(&[1.0, -0.5]).is_err());
    }

    #[test]
    fn noiseless_columns() {
        // y[., l] = sqrt(a_l) 1_N gives u_l = a_l - 1
        let c = EnergyConstellation::from_levels(vec![0.0, 3.0, 6.0], 1).unwrap();
        let h = Array1::from_elem(8, Complex64::new(1.0, 0.0));
        let a = [4.0, 1.0, 7.0, 2.0];
        let y = apply_noiseless(h.view(), &fem_modulate(&a).unwrap());
        assert_eq!(fem_detect(&y, &c).unwrap(), vec![1, 0, 2, 0]);
    }

    #[test]
    fn decisions_commute_with_column_permutation() {
        let c = EnergyConstellation::scaled(2, 1, 2.0).unwrap();
        let mut s = crate::numerics::SeededStream::new(4, 4);
        let y = Array2::from_shape_simple_fn((16, 6), || s.cn01());
        let perm = [3, 0, 5, 1, 4, 2];
        let permuted = ndarray::Array2::from_shape_fn((16, 6), |(n, l)| y[[n, perm[l]]]);
        let d = fem_detect(&y, &c).unwrap();
        let dp = fem_detect(&permuted, &c).unwrap();
        for (l, &p) in perm.iter().enumerate() {
            assert_eq!(dp[l], d[p]);
        }
    }
}
