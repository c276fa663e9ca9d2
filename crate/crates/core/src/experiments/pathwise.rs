use super::{majority_check, median, Check, ExperimentOptions};
use crate::ensemble::map_replicates;
use crate::error::Result;
use crate::fbmintegrate::{
    backward_integral, boundary_tolerance, extended_forward_integral, fbm_ito_formula_check, forward_integral,
    symmetric_integral, EpsilonSchedule, FractionalForwardProcess,
};
use crate::gaussianpaths::{CirculantEmbedding, GridSpec, PathGenerator, RngSeed, SamplePath};

const N: usize = 1 << 14;
const SEEDS: usize = 20;

fn fbm(hurst: f64, n: usize) -> Result<CirculantEmbedding> {
    CirculantEmbedding::new(GridSpec::new(1.0, n)?, hurst)
}

/// `f(T) g(T) - f(0) g(0) - ∫ g f' dt` by the trapezoid rule with the exact
/// derivative of `f`.
fn parts_value(g: &SamplePath, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> f64 {
    let t = g.times();
    let n = g.grid.n_steps;
    let inner: f64 = (1..n).map(|k| g.values[k] * df(t[k])).sum();
    let quad = g.dt() * (inner + 0.5 * (g.values[0] * df(t[0]) + g.values[n] * df(t[n])));
    f(t[n]) * g.values[n] - f(0.0) * g.values[0] - quad
}

fn telescoping(opts: &ExperimentOptions, checks: &mut Vec<Check>) -> Result<()> {
    for (k, hurst) in [0.3, 0.75].into_iter().enumerate() {
        let g = fbm(hurst, N)?.sample(RngSeed::new(opts.root_for(k as u64), 0))?;
        let one = SamplePath::deterministic(g.grid, |_| 1.0)?;
        let eps = EpsilonSchedule::default_for(g.grid);
        let tol = boundary_tolerance(&g, *eps.values.last().unwrap());
        let target = g.last() - g.values[0];
        let s = symmetric_integral(&one, &g, &eps)?;
        let f = forward_integral(&one, &g, &eps)?;
        // the literal backward kernel carries the opposite sign
        let b = backward_integral(&one, &g, &eps)?;
        let x = extended_forward_integral(&one, &g, 5)?;
        checks.push(Check::within(format!("f=1 symmetric, H={hurst}"), target, s.value, tol));
        checks.push(Check::within(format!("f=1 forward, H={hurst}"), target, f.value, tol));
        checks.push(Check::within(format!("f=1 backward (negated), H={hurst}"), target, -b.value, tol));
        checks.push(Check::within(format!("f=1 extended forward, H={hurst}"), target, x.value, 0.02));
    }
    Ok(())
}

fn integration_by_parts(opts: &ExperimentOptions, checks: &mut Vec<Check>) -> Result<()> {
    for (k, hurst) in [0.6, 0.75, 0.9].into_iter().enumerate() {
        let gaps = map_replicates(&fbm(hurst, N)?, opts.root_for(2 + k as u64), 10, opts.exec, |g| {
            let eps = EpsilonSchedule::default_for(g.grid);
            let lin = symmetric_integral(&SamplePath::deterministic(g.grid, |t| t)?, g, &eps)?.value;
            let cos = symmetric_integral(&SamplePath::deterministic(g.grid, |t| (3.0 * t).cos())?, g, &eps)?.value;
            let lin_gap = (lin - parts_value(g, |t| t, |_| 1.0)).abs();
            let cos_gap = (cos - parts_value(g, |t| (3.0 * t).cos(), |t| -3.0 * (3.0 * t).sin())).abs();
            Ok(lin_gap.max(cos_gap))
        })?;
        checks.push(Check::residual(
            format!("integration by parts f in {{t, cos 3t}}, H={hurst}, worst of 10 seeds"),
            gaps.into_iter().fold(0.0, f64::max),
            0.01,
        ));
    }
    Ok(())
}

/// Median over seeds of the largest node gap in `∫B^H d⁻B^H = (B^H)^2 / 2`.
fn ito_gap(opts: &ExperimentOptions, n: usize) -> Result<f64> {
    let gaps = map_replicates(&fbm(0.75, n)?, opts.root_for(5), SEEDS, opts.exec, |g| {
        let zero = SamplePath::deterministic(g.grid, |_| 0.0)?;
        let one = SamplePath::deterministic(g.grid, |_| 1.0)?;
        let x = FractionalForwardProcess {
            x0: 0.0,
            alpha: &zero,
            f: &one,
            driver: g,
        };
        Ok(fbm_ito_formula_check(&|_, x| 0.5 * x * x, &|_, _| 0.0, &|_, x| x, &x)?.max_gap())
    })?;
    Ok(median(gaps))
}

pub(super) fn e12(opts: &ExperimentOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    telescoping(opts, &mut checks)?;
    integration_by_parts(opts, &mut checks)?;

    checks.push(Check::residual(
        "fBm Itô formula g=x^2/2, H=0.75, median max gap at n=2^14",
        ito_gap(opts, N)?,
        0.02,
    ));
    checks.push(Check::below(
        "fBm Itô formula median max gap: n=2^15 below n=2^13",
        ito_gap(opts, N / 2)?,
        ito_gap(opts, 2 * N)?,
    ));

    for (k, (hurst, want)) in [(0.6, true), (0.75, true), (0.9, true), (0.1, false), (0.25, false)]
        .into_iter()
        .enumerate()
    {
        let verdicts = map_replicates(&fbm(hurst, N)?, opts.root_for(6 + k as u64), SEEDS, opts.exec, |g| {
            Ok(forward_integral(g, g, &EpsilonSchedule::default_for(g.grid))?.converged)
        })?;
        checks.push(majority_check(
            format!("forward ∫B^H d⁻B^H converged={want} at H={hurst} (seeds agreeing of {SEEDS})"),
            &verdicts,
            &want,
        ));
    }
    Ok(checks)
}
