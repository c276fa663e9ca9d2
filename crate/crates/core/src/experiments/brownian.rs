use super::{median, Check, ExperimentOptions};
use crate::ensemble::{empirical_covariance, generate_ensemble, map_replicates, Ensemble};
use crate::error::Result;
use crate::gaussianpaths::{
    fbm_covariance, BmGenerator, CholeskyFactor, GridSpec, MovingAverage, MovingAverageConfig, PathGenerator,
};
use crate::itocalc::{
    constant, deterministic, endpoint_comparison, isometry_check, ito_formula_apply, ito_integral, path_value,
    AdaptedIntegrand, ItoProcess, Partition, MIN_REPLICATES,
};

const ENSEMBLE: usize = 10_000;

/// The Itô ensemble checks refuse fewer than [`MIN_REPLICATES`] paths, so a
/// reduced run is raised to that floor.
fn ito_ensemble_size(opts: &ExperimentOptions) -> usize {
    opts.replicates_or(ENSEMBLE).max(MIN_REPLICATES)
}

/// `max |Ĉ(s, t) - R(s, t)|` over the nonzero nodes.
fn covariance_error(
    gen: &dyn PathGenerator,
    root: u64,
    opts: &ExperimentOptions,
    target: impl Fn(f64, f64) -> Result<f64>,
) -> Result<f64> {
    let grid = gen.grid();
    let paths = generate_ensemble(gen, root, opts.replicates_or(ENSEMBLE), opts.exec)?;
    let cov = empirical_covariance(&paths)?;
    let mut worst = 0.0f64;
    for (i, row) in cov.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            worst = worst.max((c - target(grid.time(i + 1), grid.time(j + 1))?).abs());
        }
    }
    Ok(worst)
}

pub(super) fn e4(opts: &ExperimentOptions) -> Result<Vec<Check>> {
    let gen = BmGenerator {
        grid: GridSpec::new(1.0, 16)?,
    };
    let worst = covariance_error(&gen, opts.root_for(0), opts, |s, t| Ok(s.min(t)))?;
    Ok(vec![Check::residual("max |cov - min(s,t)|, 16 nodes", worst, 0.05)])
}

pub(super) fn e5(opts: &ExperimentOptions) -> Result<Vec<Check>> {
    let grid = GridSpec::new(1.0, 16)?;
    let mut checks = Vec::new();
    for (k, hurst) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        let r = |s, t| fbm_covariance(hurst, s, t);
        let chol = CholeskyFactor::new(grid, hurst)?;
        let worst = covariance_error(&chol, opts.root_for(2 * k as u64), opts, r)?;
        checks.push(Check::residual(format!("Cholesky H={hurst}: max |cov - R_H|"), worst, 0.05));
        let ma = MovingAverage::new(grid, hurst, MovingAverageConfig::for_grid(grid))?;
        let worst = covariance_error(&ma, opts.root_for(2 * k as u64 + 1), opts, r)?;
        checks.push(Check::residual(
            format!("moving average H={hurst}, L=50: max |cov - R_H|"),
            worst,
            0.08,
        ));
    }
    Ok(checks)
}

pub(super) fn e6(opts: &ExperimentOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (k, t_max) in [1.0, 2.0].into_iter().enumerate() {
        let gen = BmGenerator {
            grid: GridSpec::new(t_max, 1024)?,
        };
        let ens = Ensemble::new(&gen, opts.root_for(k as u64), ito_ensemble_size(opts)).with_execution(opts.exec);
        let c = endpoint_comparison(&ens)?;
        checks.push(Check::within(format!("mean left sum, T={t_max}"), 0.0, c.mean_left, 0.05));
        checks.push(Check::within(
            format!("mean right sum, T={t_max}"),
            t_max,
            c.mean_right,
            0.05 * t_max,
        ));
    }
    Ok(checks)
}

pub(super) fn e7(opts: &ExperimentOptions) -> Result<Vec<Check>> {
    let gen = BmGenerator {
        grid: GridSpec::new(1.0, 4096)?,
    };
    let gaps = map_replicates(&gen, opts.root_for(0), 100, opts.exec, |p| {
        let mut worst = 0.0f64;
        for stride in [1, 2, 4, 16, 64, 256, 1024] {
            let part = Partition::strided(p.grid, stride)?;
            let v = ito_integral(&path_value(), p, Some(&part))?;
            let coarse: Vec<f64> = part.nodes().iter().map(|&k| p.values[k]).collect();
            let qv: f64 = coarse.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
            worst = worst.max((v - 0.5 * p.last() * p.last() + 0.5 * qv).abs());
        }
        Ok(worst)
    })?;
    let worst = gaps.into_iter().fold(0.0, f64::max);
    Ok(vec![Check::residual(
        "max |Σ B ΔB - (B(T)^2 - Σ ΔB^2)/2| over 100 seeds and 7 meshes",
        worst,
        1e-10,
    )])
}

pub(super) fn e8(opts: &ExperimentOptions) -> Result<Vec<Check>> {
    let gen = BmGenerator {
        grid: GridSpec::new(1.0, 1024)?,
    };
    let ens = Ensemble::new(&gen, opts.root_for(0), ito_ensemble_size(opts)).with_execution(opts.exec);
    let integrands: [(&str, &dyn AdaptedIntegrand); 3] = [
        ("f=1", &constant(1.0)),
        ("f=B", &path_value()),
        ("f=t", &deterministic(|t| t)),
    ];
    let mut checks = Vec::new();
    for (name, f) in integrands {
        let iso = isometry_check(f, &ens)?;
        checks.push(Check::within(
            format!("isometry {name}: E[(∫f dB)^2] vs E[∫f^2 dt]"),
            iso.rhs,
            iso.lhs,
            iso.ci + iso.discretization_bias(),
        ));
    }

    let zero = constant(0.0);
    let one = constant(1.0);
    let fine = BmGenerator {
        grid: GridSpec::new(1.0, 1 << 14)?,
    };
    let gaps = map_replicates(&fine, opts.root_for(1), 100, opts.exec, |p| {
        let x = ItoProcess {
            x0: 0.0,
            drift: &zero,
            diffusion: &one,
            driving_path: p,
        };
        let fp = ito_formula_apply(&|_, x| 0.5 * x * x, &|_, _| 0.0, &|_, x| x, &|_, _| 1.0, &x)?;
        Ok(fp.end_gap())
    })?;
    checks.push(Check::residual(
        "Itô formula g=x^2/2, median |lhs - rhs| at T=1, n=2^14",
        median(gaps),
        0.02,
    ));
    Ok(checks)
}
