use serde::{Deserialize, Serialize};

use crate::error::{check_hurst, invalid, Error, Result};
use crate::gaussianpaths::SamplePath;

/// Autocorrelation `r_H(n)` of unit-spaced fBm increments.
pub fn theoretical_acf(hurst: f64, n: i64) -> Result<f64> {
    check_hurst(hurst)?;
    if n < 0 {
        return Err(invalid("n", format!("lag {n} is negative")));
    }
    Ok(acf_unchecked(hurst, n as u64))
}

pub(crate) fn acf_unchecked(hurst: f64, n: u64) -> f64 {
    let e = 2.0 * hurst;
    match n {
        0 => 1.0,
        // the second difference of a linear function vanishes identically
        _ if hurst == 0.5 => 0.0,
        1 => 0.5 * (2f64.powf(e) - 2.0),
        _ => {
            // second difference written through expm1 to survive large n
            let x = n as f64;
            let up = (e * (1.0 / x).ln_1p()).exp_m1();
            let down = (e * (-1.0 / x).ln_1p()).exp_m1();
            0.5 * x.powf(e) * (up + down)
        }
    }
}

/// Sample autocorrelations of the path increments at lags `0..=max_lag`,
/// normalized without mean removal (the increments have mean zero).
/// Correlations are scale-free, so any uniform spacing serves as unit spacing.
pub fn empirical_acf(path: &SamplePath, max_lag: usize) -> Result<Vec<f64>> {
    let x = path.increments();
    if max_lag == 0 || 4 * max_lag >= x.len() {
        return Err(Error::InsufficientData(format!(
            "max_lag {max_lag} needs more than {} increments, got {}",
            4 * max_lag,
            x.len()
        )));
    }
    let denom: f64 = x.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / denom
            }
        })
        .collect())
}

/// Partial sums and asymptote ratios of the increment autocorrelation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrdDiagnostic {
    pub hurst: f64,
    /// `partial_sums[k] = Σ_{n=0}^{k} |r_H(n)|`, `k = 0..=N`.
    pub partial_sums: Vec<f64>,
    /// `asymptote_ratio[n-1] = r_H(n) / (H (2H - 1) n^{2H-2})`, `n = 1..=N`.
    pub asymptote_ratio: Vec<f64>,
}

impl LrdDiagnostic {
    /// Relative growth of the partial sum over the last decade `(N/10, N]`.
    pub fn last_decade_growth(&self) -> f64 {
        let n = self.partial_sums.len() - 1;
        let a = self.partial_sums[n / 10];
        (self.partial_sums[n] - a) / a
    }
}

pub fn lrd_diagnostic(hurst: f64, n_max: usize) -> Result<LrdDiagnostic> {
    check_hurst(hurst)?;
    if hurst == 0.5 {
        return Err(invalid("hurst", "H = 1/2 has no correlation to diagnose"));
    }
    if n_max < 10 {
        return Err(invalid("N", format!("need N >= 10, got {n_max}")));
    }
    let coeff = hurst * (2.0 * hurst - 1.0);
    let mut partial_sums = Vec::with_capacity(n_max + 1);
    let mut asymptote_ratio = Vec::with_capacity(n_max);
    let mut acc = 0.0;
    for n in 0..=n_max as u64 {
        let r = acf_unchecked(hurst, n);
        acc += r.abs();
        partial_sums.push(acc);
        if n > 0 {
            asymptote_ratio.push(r / (coeff * (n as f64).powf(2.0 * hurst - 2.0)));
        }
    }
    Ok(LrdDiagnostic {
        hurst,
        partial_sums,
        asymptote_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acf_examples() {
        assert_eq!(theoretical_acf(0.5, 3).unwrap(), 0.0);
        assert!((theoretical_acf(0.75, 1).unwrap() - 0.5 * (2f64.powf(1.5) - 2.0)).abs() < 1e-15);
        assert_eq!(theoretical_acf(0.3, 0).unwrap(), 1.0);
        assert!(theoretical_acf(0.3, -1).is_err());
    }

    #[test]
    fn expm1_form_matches_direct_for_moderate_lags() {
        for n in 2..50u64 {
            let x = n as f64;
            let direct = 0.5 * ((x + 1.0).powf(1.5) - 2.0 * x.powf(1.5) + (x - 1.0).powf(1.5));
            assert!((acf_unchecked(0.75, n) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn lrd_rejects_brownian() {
        assert!(lrd_diagnostic(0.5, 100).is_err());
    }
}
