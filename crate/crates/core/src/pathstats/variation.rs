use serde::{Deserialize, Serialize};

use super::{ols_slope, HurstEstimate, HurstMethod};
use crate::error::{invalid, Error, Result};
use crate::gaussianpaths::SamplePath;

/// How `v_p` behaves as the partition mesh shrinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ConvergesToZero,
    Stabilizes,
    Diverges,
}

/// Slope of `log v_p` against `log mesh` beyond which `v_p` is judged to
/// vanish (positive) or blow up (negative) under refinement.
pub const VERDICT_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationEstimate {
    pub p: f64,
    /// `(mesh, v_p)`, coarse to fine.
    pub mesh_levels: Vec<(f64, f64)>,
    pub slope: f64,
    pub verdict: Verdict,
}

/// `Σ (ΔX)^2` over the path's own grid.
pub fn quadratic_variation(path: &SamplePath) -> f64 {
    path.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
}

/// `Σ |X(t_{i+1}) - X(t_i)|^p` over the nodes `0, s, 2s, ...` (plus the last
/// node when `s` does not divide the step count).
fn strided_variation(values: &[f64], stride: usize, p: f64) -> f64 {
    let n = values.len() - 1;
    let mut acc = 0.0;
    let mut k = 0;
    while k < n {
        let next = (k + stride).min(n);
        acc += (values[next] - values[k]).abs().powf(p);
        k = next;
    }
    acc
}

/// p-variation along dyadic coarsenings of the grid.
///
/// Level `i` keeps every `2^{levels-1-i}`-th node, so the first level is the
/// coarsest. The supremum over all partitions is not attempted; the verdict
/// comes from the log-log slope of `v_p` against the mesh.
pub fn p_variation(path: &SamplePath, p: f64, levels: usize) -> Result<VariationEstimate> {
    if !(p.is_finite() && p > 0.0) {
        return Err(invalid("p", format!("{p} is not positive")));
    }
    if levels < 3 {
        return Err(invalid("levels", format!("need at least 3 levels, got {levels}")));
    }
    let n = path.grid.n_steps;
    let coarsest = 1usize << (levels - 1);
    if n < 2 * coarsest {
        return Err(Error::InsufficientData(format!(
            "{n} steps cannot support {levels} dyadic levels"
        )));
    }
    let dt = path.dt();
    let mesh_levels: Vec<(f64, f64)> = (0..levels)
        .map(|i| {
            let stride = coarsest >> i;
            (stride as f64 * dt, strided_variation(&path.values, stride, p))
        })
        .collect();
    if mesh_levels.iter().any(|&(_, v)| v == 0.0) {
        return Err(Error::ConstantSeries);
    }
    let x: Vec<f64> = mesh_levels.iter().map(|m| m.0.ln()).collect();
    let y: Vec<f64> = mesh_levels.iter().map(|m| m.1.ln()).collect();
    let (slope, _) = ols_slope(&x, &y);
    let verdict = if slope > VERDICT_SLOPE {
        Verdict::ConvergesToZero
    } else if slope < -VERDICT_SLOPE {
        Verdict::Diverges
    } else {
        Verdict::Stabilizes
    };
    Ok(VariationEstimate {
        p,
        mesh_levels,
        slope,
        verdict,
    })
}

/// Dyadic levels used by the variation index. A fixed count keeps the
/// regression window the same number of octaves at every length, so the
/// estimator sharpens as the path is refined instead of trading depth for
/// variance.
const INDEX_LEVELS: usize = 5;

const P_LO: f64 = 0.5;
const P_HI: f64 = 20.0;
const P_WIDTH: f64 = 1e-3;

/// Estimates `H = 1 / I` where the variation index `I` is located by
/// bisection on `p` for the sign change of the p-variation slope, the
/// midpoint of the transition from `Diverges` to `ConvergesToZero`.
pub fn variation_index(path: &SamplePath) -> Result<HurstEstimate> {
    let n = path.grid.n_steps;
    if n < 1 << 10 {
        return Err(Error::InsufficientData(format!("variation index needs 2^10 steps, got {n}")));
    }
    let levels = INDEX_LEVELS;
    let slope = |p: f64| p_variation(path, p, levels).map(|v| v.slope);
    let (mut lo, mut hi) = (P_LO, P_HI);
    let (s_lo, s_hi) = (slope(lo)?, slope(hi)?);
    if !(s_lo < 0.0 && s_hi > 0.0) {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > P_WIDTH {
        let mid = 0.5 * (lo + hi);
        if slope(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_star = 0.5 * (lo + hi);
    let at_star = p_variation(path, p_star, levels)?;
    let block_data = at_star
        .mesh_levels
        .iter()
        .rev()
        .map(|&(mesh, v)| ((mesh / path.dt()).round(), v))
        .collect();
    let h_hat = 1.0 / p_star;
    Ok(HurstEstimate {
        h_hat,
        method: HurstMethod::VariationIndex,
        stderr: 0.5 * (1.0 / lo - 1.0 / hi),
        block_data,
        out_of_model: !(h_hat > 0.0 && h_hat < 1.0),
    })
}

/// `max_k |ΔX_k| / Δt` at dyadic coarsenings, coarse to fine. Grows without
/// bound under refinement for nowhere-differentiable paths and settles to
/// `max |X'|` for smooth ones.
pub fn difference_quotient_growth(path: &SamplePath, levels: usize) -> Result<Vec<(f64, f64)>> {
    let n = path.grid.n_steps;
    if levels < 2 || n < 1 << (levels - 1) {
        return Err(Error::InsufficientData(format!("{n} steps for {levels} levels")));
    }
    let dt = path.dt();
    Ok((0..levels)
        .map(|i| {
            let stride = 1usize << (levels - 1 - i);
            let h = stride as f64 * dt;
            let m = path
                .values
                .iter()
                .step_by(stride)
                .collect::<Vec<_>>()
                .windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(0.0, f64::max);
            (h, m / h)
        })
        .collect())
}
