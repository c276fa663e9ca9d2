use super::Check;
use crate::error::Result;
use crate::par::{map_indices, Execution};
use crate::fraccalc::{
    cauchy_repeated_integral, fractional_derivative, fractional_integral, DifferintegralSpec, GridFunction, Side,
};

const N: usize = 4096;
const RESIDUAL_BOUND: f64 = 1e-4;
const MIN_SHRINK: f64 = 1.5;
/// Residuals below this are rounding noise and cannot shrink further.
const ROUNDING_FLOOR: f64 = 1e-13;

fn left(alpha: f64) -> DifferintegralSpec {
    DifferintegralSpec::integral(alpha, Side::LeftSided)
}

fn right(alpha: f64) -> DifferintegralSpec {
    DifferintegralSpec::integral(alpha, Side::RightSided)
}

fn dleft(alpha: f64) -> DifferintegralSpec {
    DifferintegralSpec::derivative(alpha, Side::LeftSided)
}

fn sup_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn semigroup(n: usize, alpha: f64, beta: f64) -> Result<f64> {
    let f = GridFunction::from_fn(0.0, 1.0, n, |t| (2.0 * t).cos() + t)?;
    let iab = fractional_integral(&fractional_integral(&f, &left(beta))?, &left(alpha))?;
    let direct = fractional_integral(&f, &left(alpha + beta))?;
    Ok(sup_diff(&iab.values(), &direct.values()))
}

fn reflection(n: usize, alpha: f64) -> Result<f64> {
    let f = GridFunction::from_fn(0.0, 1.0, n, |t| t.exp() * (2.0 * t).sin())?;
    let a = fractional_integral(&f, &left(alpha))?.reflect();
    let b = fractional_integral(&f.reflect(), &right(alpha))?;
    Ok(sup_diff(&a.values(), &b.values()))
}

fn integration_by_parts(n: usize, alpha: f64) -> Result<f64> {
    let f = GridFunction::from_fn(0.0, 1.0, n, |t| t.exp())?;
    let g = GridFunction::from_fn(0.0, 1.0, n, |t| (3.0 * t).sin() + 2.0)?;
    let lhs = f.product(&fractional_integral(&g, &right(alpha))?)?.integrate()?;
    let rhs = fractional_integral(&f, &left(alpha))?.product(&g)?.integrate()?;
    Ok((lhs - rhs).abs())
}

fn derivative_of_integral(n: usize, alpha: f64) -> Result<f64> {
    let f = GridFunction::from_fn(0.0, 1.0, n, f64::sin)?;
    let d = fractional_derivative(&fractional_integral(&f, &left(alpha))?, &dleft(alpha))?;
    Ok(sup_diff(&d.values(), &f.values()))
}

type Residual = Box<dyn Fn(usize) -> Result<f64> + Sync + Send>;

/// Residual at `N` plus its shrink factor from `N / 2`.
fn refined(name: &str, coarse: f64, fine: f64) -> [Check; 2] {
    let at_n = Check::residual(format!("{name} residual at n={N}"), fine, RESIDUAL_BOUND);
    if fine <= ROUNDING_FLOOR && coarse <= ROUNDING_FLOOR {
        [at_n, Check::residual(format!("{name} residual at rounding floor"), coarse.max(fine), ROUNDING_FLOOR)]
    } else {
        [at_n, Check::at_least(format!("{name} shrink n={}->{N}", N / 2), MIN_SHRINK, coarse / fine)]
    }
}

pub(super) fn e1(exec: Execution) -> Result<Vec<Check>> {
    let mut cases: Vec<(String, Residual)> = Vec::new();
    for (a, b) in [(0.25, 0.5), (0.75, 0.25), (0.5, 0.5)] {
        cases.push((format!("semigroup I^{a} I^{b}"), Box::new(move |n| semigroup(n, a, b))));
    }
    for alpha in [0.25, 0.5, 1.7] {
        cases.push((format!("reflection alpha={alpha}"), Box::new(move |n| reflection(n, alpha))));
    }
    for alpha in [0.25, 0.5, 0.75] {
        cases.push((format!("integration by parts alpha={alpha}"), Box::new(move |n| integration_by_parts(n, alpha))));
    }
    for alpha in [0.3, 0.7] {
        cases.push((format!("D^{alpha} I^{alpha} f = f"), Box::new(move |n| derivative_of_integral(n, alpha))));
    }
    // every (case, size) pair is independent
    let residuals = map_indices(exec, 2 * cases.len(), |i| (cases[i / 2].1)(if i % 2 == 0 { N / 2 } else { N }));
    let mut checks = Vec::new();
    for (k, (name, _)) in cases.iter().enumerate() {
        checks.extend(refined(name, residuals[2 * k].clone()?, residuals[2 * k + 1].clone()?));
    }
    Ok(checks)
}

pub(super) fn e2() -> Result<Vec<Check>> {
    let n = 8192;
    let f = GridFunction::weighted(0.0, 1.0, vec![1.0; n + 1], -0.5, 0.0)?;
    let d = fractional_derivative(&f, &dleft(0.5))?.values();
    let worst = d[1..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(vec![Check::residual(
        format!("max interior |D^0.5 t^-0.5| at n={n}"),
        worst,
        1e-3,
    )])
}

/// `m`-fold cumulative trapezoid on a `refine`-times finer grid, sampled
/// back onto the `n + 1` coarse nodes of `[0, 1]`.
fn iterated_trapezoid(f: impl Fn(f64) -> f64, m: u32, n: usize, refine: usize) -> Vec<f64> {
    let fine = n * refine;
    let h = 1.0 / fine as f64;
    let mut v: Vec<f64> = (0..=fine).map(|k| f(k as f64 * h)).collect();
    for _ in 0..m {
        let mut acc = vec![0.0; fine + 1];
        for k in 1..=fine {
            acc[k] = acc[k - 1] + 0.5 * h * (v[k - 1] + v[k]);
        }
        v = acc;
    }
    (0..=n).map(|k| v[k * refine]).collect()
}

pub(super) fn e3() -> Result<Vec<Check>> {
    let g = |t: f64| (3.0 * t).cos() + t * t;
    let f = GridFunction::from_fn(0.0, 1.0, N, g)?;
    let mut checks = Vec::new();
    for m in [2, 3] {
        let r = cauchy_repeated_integral(&f, m)?;
        let oracle = iterated_trapezoid(g, m, N, 8);
        checks.push(Check::residual(
            format!("Cauchy m={m} vs iterated trapezoid at n={N}"),
            sup_diff(&r.values(), &oracle),
            1e-6,
        ));
    }
    Ok(checks)
}
