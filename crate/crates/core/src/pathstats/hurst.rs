use super::{ols_slope, HurstEstimate, HurstMethod};
use crate::error::{Error, Result};
use crate::gaussianpaths::SamplePath;

const RS_MIN_LEN: usize = 256;
const RS_MIN_BLOCK: usize = 16;

/// Mean rescaled range over the non-overlapping blocks of size `size`;
/// `None` when every block has zero spread.
fn mean_rescaled_range(series: &[f64], size: usize) -> Option<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for block in series.chunks_exact(size) {
        let mean = block.iter().sum::<f64>() / size as f64;
        let mut partial = 0.0;
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let mut ss = 0.0;
        for x in block {
            let d = x - mean;
            partial += d;
            lo = lo.min(partial);
            hi = hi.max(partial);
            ss += d * d;
        }
        let s = (ss / size as f64).sqrt();
        if s > 0.0 {
            total += (hi - lo) / s;
            count += 1;
        }
    }
    (count > 0).then(|| total / count as f64)
}

/// Classical R/S analysis: non-overlapping blocks of dyadic sizes from 16 up
/// to a eighth of the series, mean-adjusted partial sums, population
/// standard deviation within each block, and a least-squares fit of
/// `log(R/S)` against `log n`.
pub fn rescaled_range_hurst(series: &[f64]) -> Result<HurstEstimate> {
    let len = series.len();
    if len < RS_MIN_LEN {
        return Err(Error::InsufficientData(format!(
            "R/S needs at least {RS_MIN_LEN} samples, got {len}"
        )));
    }
    if let Some(k) = series.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("series value {k}")));
    }
    let mut block_data = Vec::new();
    let mut size = RS_MIN_BLOCK;
    while size <= len / 8 {
        if let Some(rs) = mean_rescaled_range(series, size) {
            block_data.push((size as f64, rs));
        }
        size *= 2;
    }
    if block_data.is_empty() {
        return Err(Error::ConstantSeries);
    }
    if block_data.len() < 2 {
        return Err(Error::InsufficientData("fewer than two usable block sizes".into()));
    }
    let x: Vec<f64> = block_data.iter().map(|b| b.0.ln()).collect();
    let y: Vec<f64> = block_data.iter().map(|b| b.1.ln()).collect();
    let (h_hat, stderr) = ols_slope(&x, &y);
    Ok(HurstEstimate {
        h_hat,
        method: HurstMethod::RescaledRange,
        stderr,
        block_data,
        out_of_model: !(h_hat > 0.0 && h_hat < 1.0),
    })
}

/// Hölder exponent from the scaling of `max_k |X(t_k + δ) - X(t_k)|` over a
/// dyadic ladder of lags `δ = 2^j Δt` up to a sixteenth of the path.
pub fn holder_exponent(path: &SamplePath) -> Result<HurstEstimate> {
    let n = path.grid.n_steps;
    if n < 1 << 10 {
        return Err(Error::InsufficientData(format!("Hölder estimate needs 2^10 steps, got {n}")));
    }
    let v = &path.values;
    let mut block_data = Vec::new();
    let mut lag = 1;
    while lag <= n / 16 {
        let m = v[lag..]
            .iter()
            .zip(v)
            .map(|(b, a)| (b - a).abs())
            .fold(0.0, f64::max);
        if m == 0.0 {
            return Err(Error::ConstantSeries);
        }
        block_data.push((lag as f64, m));
        lag *= 2;
    }
    let dt = path.dt();
    let x: Vec<f64> = block_data.iter().map(|b| (b.0 * dt).ln()).collect();
    let y: Vec<f64> = block_data.iter().map(|b| b.1.ln()).collect();
    let (h_hat, stderr) = ols_slope(&x, &y);
    Ok(HurstEstimate {
        h_hat,
        method: HurstMethod::HolderSup,
        stderr,
        block_data,
        out_of_model: !(h_hat > 0.0 && h_hat < 1.0 - 1e-9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussianpaths::GridSpec;

    #[test]
    fn rescaled_range_errors() {
        assert!(matches!(rescaled_range_hurst(&[1.0; 10]), Err(Error::InsufficientData(_))));
        assert!(matches!(rescaled_range_hurst(&[2.0; 1024]), Err(Error::ConstantSeries)));
    }

    #[test]
    fn ramp_is_lipschitz() {
        let p = SamplePath::deterministic(GridSpec::new(1.0, 1024).unwrap(), |t| 3.0 * t).unwrap();
        let h = holder_exponent(&p).unwrap();
        assert!((h.h_hat - 1.0).abs() < 1e-9);
        assert!(h.out_of_model);
        let flat = SamplePath::deterministic(GridSpec::new(1.0, 1024).unwrap(), |_| 1.0).unwrap();
        assert!(holder_exponent(&flat).is_err());
    }

    #[test]
    fn block_sizes_increase() {
        let series: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 101) as f64).collect();
        let h = rescaled_range_hurst(&series).unwrap();
        assert!(h.block_data.windows(2).all(|w| w[1].0 > w[0].0));
        assert_eq!(h.block_data.first().unwrap().0, 16.0);
        assert_eq!(h.block_data.last().unwrap().0, 64.0);
    }
}
