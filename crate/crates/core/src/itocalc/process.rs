use serde::{Deserialize, Serialize};

use super::{eval_finite, AdaptedIntegrand};
use crate::error::{Error, Result};
use crate::gaussianpaths::{GridSpec, SamplePath};

/// `X(t) = x0 + ∫ μ dt + ∫ ν dB` driven by a Brownian path.
#[derive(Clone, Copy)]
pub struct ItoProcess<'a> {
    pub x0: f64,
    pub drift: &'a dyn AdaptedIntegrand,
    pub diffusion: &'a dyn AdaptedIntegrand,
    pub driving_path: &'a SamplePath,
}

/// Node values of an Itô process together with the coefficients used on
/// each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedProcess {
    pub grid: GridSpec,
    pub x: Vec<f64>,
    /// `μ(t_i)` for step `i`.
    pub drift: Vec<f64>,
    /// `ν(t_i)` for step `i`.
    pub diffusion: Vec<f64>,
}

impl ItoProcess<'_> {
    /// Euler accumulation `X_{i+1} = X_i + μ_i Δt + ν_i ΔB_i`.
    pub fn realize(&self) -> Result<RealizedProcess> {
        let path = self.driving_path;
        let n = path.grid.n_steps;
        let dt = path.dt();
        let mut x = Vec::with_capacity(n + 1);
        let mut drift = Vec::with_capacity(n);
        let mut diffusion = Vec::with_capacity(n);
        let mut acc = self.x0;
        x.push(acc);
        for k in 0..n {
            let mu = eval_finite(self.drift, path, k)?;
            let nu = eval_finite(self.diffusion, path, k)?;
            acc += mu * dt + nu * (path.values[k + 1] - path.values[k]);
            if !acc.is_finite() {
                return Err(Error::NonFinite(format!("process value at node {}", k + 1)));
            }
            drift.push(mu);
            diffusion.push(nu);
            x.push(acc);
        }
        Ok(RealizedProcess {
            grid: path.grid,
            x,
            drift,
            diffusion,
        })
    }
}

/// The two sides of a change-of-variables formula at every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaPaths {
    pub times: Vec<f64>,
    /// `g(t, X(t)) - g(0, X(0))`.
    pub lhs: Vec<f64>,
    /// Running sums of the differential terms.
    pub rhs: Vec<f64>,
}

impl FormulaPaths {
    pub fn max_gap(&self) -> f64 {
        self.lhs
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn end_gap(&self) -> f64 {
        (self.lhs.last().unwrap() - self.rhs.last().unwrap()).abs()
    }
}

pub(crate) fn finite(v: f64, what: &str, k: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{what} at node {k}")))
    }
}

/// Evaluates both sides of the Itô formula for `g(t, X(t))` with the box
/// rules `dt·dt = dt·dB = 0`, `dB·dB = dt`, so that `(dX)^2 = ν^2 dt`.
pub fn ito_formula_apply(
    g: &dyn Fn(f64, f64) -> f64,
    g_t: &dyn Fn(f64, f64) -> f64,
    g_x: &dyn Fn(f64, f64) -> f64,
    g_xx: &dyn Fn(f64, f64) -> f64,
    process: &ItoProcess<'_>,
) -> Result<FormulaPaths> {
    let real = process.realize()?;
    let times = real.grid.times();
    let dt = real.grid.dt();
    let n = real.grid.n_steps;
    let g0 = finite(g(0.0, real.x[0]), "g", 0)?;
    let mut lhs = Vec::with_capacity(n + 1);
    let mut rhs = Vec::with_capacity(n + 1);
    lhs.push(0.0);
    rhs.push(0.0);
    let mut acc = 0.0;
    for k in 0..n {
        let (t, x) = (times[k], real.x[k]);
        let nu = real.diffusion[k];
        acc += finite(g_t(t, x), "g_t", k)? * dt
            + finite(g_x(t, x), "g_x", k)? * (real.x[k + 1] - x)
            + 0.5 * finite(g_xx(t, x), "g_xx", k)? * nu * nu * dt;
        rhs.push(acc);
        lhs.push(finite(g(times[k + 1], real.x[k + 1]), "g", k + 1)? - g0);
    }
    Ok(FormulaPaths { times, lhs, rhs })
}
