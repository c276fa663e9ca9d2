use serde::{Deserialize, Serialize};

use super::{check_shared, IntegralKind, IntegralResult};
use crate::error::{Error, Result};
use crate::gaussianpaths::SamplePath;
use crate::special::{gamma, pow_diff};

/// ε ladder and u-grid of the extended forward integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedForwardConfig {
    /// Largest ε; level `j` uses `eps_start * ratio^j`.
    pub eps_start: f64,
    pub ratio: f64,
    /// Log-spaced u-nodes per octave between the grid spacing and `T`.
    pub per_octave: usize,
    pub tolerance: f64,
    /// Smallest share of the u-weight that must fall on `u >= h`.
    pub min_resolved_mass: f64,
}

impl Default for ExtendedForwardConfig {
    fn default() -> Self {
        Self {
            eps_start: 0.02,
            ratio: 0.5,
            per_octave: 8,
            tolerance: 0.02,
            min_resolved_mass: 1e-3,
        }
    }
}

/// u-nodes `0 = u_0 < h = u_1 < ... < u_m = T`, geometric above `h`.
fn u_grid(h: f64, t_max: f64, per_octave: usize) -> Vec<f64> {
    let octaves = (t_max / h).log2();
    let m = ((octaves * per_octave as f64).ceil() as usize).max(1);
    let mut u = vec![0.0];
    u.extend((0..=m).map(|j| h * (t_max / h).powf(j as f64 / m as f64)));
    u[1] = h;
    u[m + 1] = t_max;
    u
}

/// Product-integration weights of `∫_0^T u^{ε-1} J(u) du` for `J` linear on
/// each u-cell.
fn u_weights(u: &[f64], eps: f64) -> Vec<f64> {
    let mut w = vec![0.0; u.len()];
    for j in 0..u.len() - 1 {
        let (a, b) = (u[j], u[j + 1]);
        let m0 = pow_diff(b, a, eps) / eps;
        let m1 = pow_diff(b, a, eps + 1.0) / (eps + 1.0);
        // ∫ u^{ε-1} (u - a) / (b - a) du
        let upper = (m1 - a * m0) / (b - a);
        w[j] += m0 - upper;
        w[j + 1] += upper;
    }
    w
}

/// Numerical value of `(1/Γ(ε)) ∫_0^T u^{ε-1} du` on the configured u-grid;
/// the closed form is `T^ε / Γ(1+ε)`.
pub fn extended_forward_weight(eps: f64, t_max: f64, h: f64, config: &ExtendedForwardConfig) -> f64 {
    let u = u_grid(h, t_max, config.per_octave);
    eps / gamma(1.0 + eps) * u_weights(&u, eps).iter().sum::<f64>()
}

/// `J(u) = ∫_0^T f(s) [g(s+u) - g(s)] / u ds` for the piecewise-linear
/// interpolants of `f` and `g`, with `g` clamped beyond `T`.
///
/// On each cell the integrand is piecewise quadratic with one kink where
/// `s + u` crosses a node, so Simpson's rule on the two pieces is exact.
fn inner(f: &[f64], g: &[f64], h: f64, u: f64) -> f64 {
    let n = g.len() - 1;
    if u == 0.0 {
        // the u -> 0 limit ∫ f g' ds
        return (0..n).map(|k| 0.5 * (f[k] + f[k + 1]) * (g[k + 1] - g[k])).sum();
    }
    let shift = u / h;
    let phi = shift - shift.floor();
    let lin = |v: &[f64], x: f64| {
        if x >= n as f64 {
            return v[n];
        }
        let i = (x.floor() as usize).min(n - 1);
        v[i] + (x - i as f64) * (v[i + 1] - v[i])
    };
    let integrand = |k: usize, x: f64| {
        let local = |v: &[f64]| v[k] + (x - k as f64) * (v[k + 1] - v[k]);
        local(f) * (lin(g, x + shift) - local(g))
    };
    let simpson = |k: usize, a: f64, b: f64| {
        (b - a) / 6.0 * (integrand(k, a) + 4.0 * integrand(k, 0.5 * (a + b)) + integrand(k, b))
    };
    let total: f64 = (0..n)
        .map(|k| {
            let (a, b) = (k as f64, (k + 1) as f64);
            if phi == 0.0 {
                simpson(k, a, b)
            } else {
                let c = b - phi;
                simpson(k, a, c) + simpson(k, c, b)
            }
        })
        .sum();
    total * h / u
}

/// `(1/Γ(ε)) ∫_0^T u^{ε-1} ∫_0^T f(s) [g(s+u) - g(s)] / u ds du` on a
/// decreasing ε ladder.
///
/// `J` is evaluated exactly for the linear interpolants at `u = 0` (as a
/// limit), at the grid spacing and on a log-spaced grid up to `T`, and the
/// u-integral uses linear product integration between those nodes. Levels
/// whose weight sits almost entirely below the grid spacing cannot see the
/// path and are rejected.
pub fn extended_forward_integral(f: &SamplePath, g: &SamplePath, eps_levels: usize) -> Result<IntegralResult> {
    extended_forward_with(f, g, eps_levels, &ExtendedForwardConfig::default())
}

pub fn extended_forward_with(
    f: &SamplePath,
    g: &SamplePath,
    eps_levels: usize,
    config: &ExtendedForwardConfig,
) -> Result<IntegralResult> {
    check_shared(f, g)?;
    if eps_levels < 2 {
        return Err(Error::Schedule(format!("need at least 2 ε levels, got {eps_levels}")));
    }
    let h = g.dt();
    let t_max = g.grid.t_max;
    let eps: Vec<f64> = (0..eps_levels)
        .map(|j| config.eps_start * config.ratio.powi(j as i32))
        .collect();
    let last = *eps.last().unwrap();
    let resolved = -((last * (h / t_max).ln()).exp_m1());
    if !(resolved >= config.min_resolved_mass) {
        return Err(Error::Underflow(format!(
            "ε = {last:.3e} leaves {resolved:.2e} of the weight above the grid spacing"
        )));
    }
    let u = u_grid(h, t_max, config.per_octave);
    let j: Vec<f64> = u.iter().map(|&ui| inner(&f.values, &g.values, h, ui)).collect();
    let levels = eps
        .iter()
        .map(|&e| {
            let w = u_weights(&u, e);
            let s: f64 = w.iter().zip(&j).map(|(a, b)| a * b).sum();
            // 1/Γ(ε) = ε/Γ(1+ε) keeps small ε well conditioned
            (e, s * e / gamma(1.0 + e))
        })
        .collect();
    IntegralResult::from_levels(IntegralKind::ExtendedForward, levels, config.tolerance)
}
