use super::check_shared;
use crate::error::{invalid, Error, Result};
use crate::gaussianpaths::{Generator, SamplePath};
use crate::itocalc::{finite, FormulaPaths};

/// `X(t) = x0 + ∫ α ds + ∫ f d⁻B^H` with `α` and `f` given as node values on
/// the driver's grid.
#[derive(Debug, Clone, Copy)]
pub struct FractionalForwardProcess<'a> {
    pub x0: f64,
    pub alpha: &'a SamplePath,
    pub f: &'a SamplePath,
    pub driver: &'a SamplePath,
}

impl FractionalForwardProcess<'_> {
    /// Accumulates `α_i Δt + f_i ΔB^H_i`, the forward integral at grid
    /// resolution.
    pub fn realize(&self) -> Result<SamplePath> {
        check_shared(self.alpha, self.driver)?;
        check_shared(self.f, self.driver)?;
        let g = &self.driver.values;
        let dt = self.driver.dt();
        let mut acc = self.x0;
        let mut values = Vec::with_capacity(g.len());
        values.push(acc);
        for k in 0..g.len() - 1 {
            acc += self.alpha.values[k] * dt + self.f.values[k] * (g[k + 1] - g[k]);
            if !acc.is_finite() {
                return Err(Error::NonFinite(format!("forward process at node {}", k + 1)));
            }
            values.push(acc);
        }
        SamplePath::from_values(
            self.driver.grid,
            values,
            self.driver.hurst,
            self.driver.seed,
            Generator::External,
        )
    }
}

pub fn fractional_forward_process(x0: f64, alpha: &SamplePath, f: &SamplePath, g: &SamplePath) -> Result<SamplePath> {
    FractionalForwardProcess {
        x0,
        alpha,
        f,
        driver: g,
    }
    .realize()
}

/// First-order change of variables for `Y = g(t, X(t))`:
/// `lhs = g(t, X(t)) - g(0, X(0))` against the running sums of
/// `g_t dt + g_x d⁻X`. There is no second-order term because `X` has zero
/// quadratic variation when `H > 1/2`; for `H <= 1/2` the check is refused.
pub fn fbm_ito_formula_check(
    g: &dyn Fn(f64, f64) -> f64,
    g_t: &dyn Fn(f64, f64) -> f64,
    g_x: &dyn Fn(f64, f64) -> f64,
    process: &FractionalForwardProcess<'_>,
) -> Result<FormulaPaths> {
    let hurst = process.driver.hurst;
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(invalid("hurst", format!("the first-order formula needs 1/2 < H < 1, got {hurst}")));
    }
    let x = process.realize()?;
    let times = x.times();
    let dt = x.dt();
    let g0 = finite(g(0.0, x.values[0]), "g", 0)?;
    let mut lhs = vec![0.0];
    let mut rhs = vec![0.0];
    let mut acc = 0.0;
    for k in 0..x.values.len() - 1 {
        let (t, xk) = (times[k], x.values[k]);
        acc += finite(g_t(t, xk), "g_t", k)? * dt + finite(g_x(t, xk), "g_x", k)? * (x.values[k + 1] - xk);
        rhs.push(acc);
        lhs.push(finite(g(times[k + 1], x.values[k + 1]), "g", k + 1)? - g0);
    }
    Ok(FormulaPaths { times, lhs, rhs })
}
