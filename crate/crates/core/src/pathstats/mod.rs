//! Path statistics: quadratic and p-variation, Hurst estimators, increment
//! autocorrelation and long-range-dependence diagnostics.

mod acf;
mod hurst;
mod variation;

use serde::{Deserialize, Serialize};

pub use acf::{empirical_acf, lrd_diagnostic, theoretical_acf, LrdDiagnostic};
pub use hurst::{holder_exponent, rescaled_range_hurst};
pub use variation::{
    difference_quotient_growth, p_variation, quadratic_variation, variation_index, Verdict,
    VariationEstimate,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HurstMethod {
    RescaledRange,
    VariationIndex,
    HolderSup,
}

/// A Hurst-exponent estimate with the per-scale data it was fitted from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub h_hat: f64,
    pub method: HurstMethod,
    pub stderr: f64,
    /// `(block size or lag, statistic)` with strictly increasing sizes.
    pub block_data: Vec<(f64, f64)>,
    /// Set when the estimate falls outside `(0, 1)`, e.g. for smooth paths.
    pub out_of_model: bool,
}

/// Ordinary least-squares slope of `y` on `x` and its standard error.
pub(crate) fn ols_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if x.len() < 3 {
        return (slope, 0.0);
    }
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - my - slope * (a - mx);
            r * r
        })
        .sum();
    (slope, (rss / (n - 2.0) / sxx).sqrt())
}
