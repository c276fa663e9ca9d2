use fracbm::ensemble::{covariance_of_rows, empirical_covariance, generate_ensemble, map_replicates, sample_correlation, EnsembleStats};
use fracbm::gaussianpaths::*;
use fracbm::par::Execution;
use fracbm::special::gamma;

const PAR: Execution = Execution::Parallel;

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Composite Simpson oracle (for H > 1/2) for C(H)^2 - 1/(2H) on [0, X] plus the leading
/// asymptotic tail `β² X^{2β-1} / (1 - 2β)`.
fn composite_kernel_integral(hurst: f64, n: usize) -> f64 {
    let beta = hurst - 0.5;
    let gap = |x: f64| (1.0 + x).powf(beta) - x.powf(beta);
    let x_max: f64 = 1e6;
    // x = y^8 flattens the x^β cusp at the origin (β > 0 here)
    let near = simpson(|y: f64| gap(y.powi(8)).powi(2) * 8.0 * y.powi(7), 0.0, 1.0, n);
    let far = simpson(
        |u: f64| {
            let x = u.exp();
            let g = x.powf(beta) * (beta * (1.0 / x).ln_1p()).exp_m1();
            g * g * x
        },
        0.0,
        x_max.ln(),
        n,
    );
    let tail = beta * beta * x_max.powf(2.0 * beta - 1.0) / (1.0 - 2.0 * beta);
    near + far + tail
}

#[test]
fn normalizing_constant_against_oracles() {
    for hurst in [0.25, 0.6, 0.75, 0.9] {
        let c = normalizing_constant(hurst).unwrap();
        let closed = (gamma(hurst + 0.5).powi(2) / (gamma(2.0 * hurst + 1.0) * (std::f64::consts::PI * hurst).sin())).sqrt();
        assert!((c - closed).abs() <= 1e-8 * closed, "H={hurst}: {c} vs {closed}");
    }
    let coarse = (composite_kernel_integral(0.75, 4000) + 0.5 / 0.75).sqrt();
    let fine = (composite_kernel_integral(0.75, 8000) + 0.5 / 0.75).sqrt();
    let c = normalizing_constant(0.75).unwrap();
    assert!((coarse - fine).abs() < 1e-6);
    assert!((fine - c).abs() < 1e-6, "{fine} vs {c}");
}

#[test]
fn normalizing_constant_is_continuous_at_half() {
    let mut last = f64::INFINITY;
    for d in [0.1, 0.01, 0.001] {
        let gap = (normalizing_constant(0.5 + d).unwrap() - 1.0).abs();
        assert!(gap < last);
        last = gap;
    }
    assert!(last < 1e-2);
}

#[test]
fn bm_ensemble_moments() {
    let grid = GridSpec::new(1.0, 16).unwrap();
    let paths = generate_ensemble(&BmGenerator { grid }, 11, 10_000, PAR).unwrap();
    let last: Vec<f64> = paths.iter().map(|p| p.last()).collect();
    let s = EnsembleStats::from_samples(&last).unwrap();
    assert!((s.variance - 1.0).abs() < 0.05);
    let cov = empirical_covariance(&paths).unwrap();
    // nodes are t_1..t_16; t = 0.5 is row 7
    assert!((cov[7][15] - 0.5).abs() < 0.05);
}

#[test]
fn cholesky_ensembles_match_covariance() {
    let grid = GridSpec::new(1.0, 16).unwrap();
    for hurst in [0.25, 0.5, 0.75] {
        let gen = CholeskyFactor::new(grid, hurst).unwrap();
        let paths = generate_ensemble(&gen, 21, 10_000, PAR).unwrap();
        let cov = empirical_covariance(&paths).unwrap();
        let mut worst = 0.0f64;
        for i in 0..16 {
            for j in 0..16 {
                let r = fbm_covariance(hurst, grid.time(i + 1), grid.time(j + 1)).unwrap();
                worst = worst.max((cov[i][j] - r).abs());
            }
        }
        assert!(worst < 0.05, "H={hurst}: {worst}");
    }
}

#[test]
fn cholesky_and_moving_average_agree() {
    let grid = GridSpec::new(1.0, 8).unwrap();
    let chol = CholeskyFactor::new(grid, 0.75).unwrap();
    let ma = MovingAverage::new(grid, 0.75, MovingAverageConfig::for_grid(grid)).unwrap();
    let a = empirical_covariance(&generate_ensemble(&chol, 1, 10_000, PAR).unwrap()).unwrap();
    let b = empirical_covariance(&generate_ensemble(&ma, 2, 10_000, PAR).unwrap()).unwrap();
    let tol = 0.05 + 0.08 + ma.truncation_bias();
    for i in 0..8 {
        for j in 0..8 {
            assert!((a[i][j] - b[i][j]).abs() < tol);
        }
    }
}

#[test]
fn moving_average_at_half_is_brownian() {
    let grid = GridSpec::new(1.0, 8).unwrap();
    let ma = MovingAverage::new(grid, 0.5, MovingAverageConfig::for_grid(grid)).unwrap();
    let cov = empirical_covariance(&generate_ensemble(&ma, 3, 10_000, PAR).unwrap()).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            assert!((cov[i][j] - grid.time(i.min(j) + 1)).abs() < 0.05);
        }
    }
}

#[test]
fn factorization_succeeds_without_large_jitter() {
    let grid = GridSpec::new(1.0, 512).unwrap();
    for k in 1..=9 {
        let hurst = k as f64 / 10.0;
        let f = CholeskyFactor::new(grid, hurst).unwrap();
        let max_diag = 1.0;
        assert!(f.jitter() <= 1e-10 * max_diag, "H={hurst}");
    }
}

#[test]
fn covariance_identities() {
    for hurst in [0.1, 0.25, 0.5, 0.75, 0.9] {
        for &(s, t, r) in &[(0.3, 1.0, 0.4), (2.0, 0.5, 1.5), (1.0, 3.0, 3.0)] {
            let lhs = increment_cross_covariance(hurst, s, t + s, s, r + s).unwrap();
            let rhs = fbm_covariance(hurst, t, r).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
            assert!((fbm_covariance(hurst, s, t).unwrap() - fbm_covariance(hurst, t, s).unwrap()).abs() < 1e-15);
        }
    }
    for hurst in [0.25, 0.75] {
        let c = increment_cross_covariance(hurst, 0.0, 1.0, 1.0, 2.0).unwrap();
        let expect = 0.5 * (2f64.powf(2.0 * hurst) - 1.0 - 1.0);
        assert!((c - expect).abs() < 1e-15 && c != 0.0);
        assert_eq!(c > 0.0, hurst > 0.5);
    }
    assert_eq!(increment_cross_covariance(0.5, 0.0, 1.0, 1.0, 2.0).unwrap(), 0.0);
    let positive = increment_cross_covariance(0.75, 0.0, 1.0, 1.0, 2.0).unwrap();
    assert!((positive - 0.5 * (2f64.powf(1.5) - 2.0)).abs() < 1e-15);
    // self-similarity at covariance level
    let (h, a, t, s) = (0.75, 4.0, 1.0, 0.5);
    let lhs = fbm_covariance(h, a * t, a * s).unwrap() * a.powf(-2.0 * h);
    assert!((lhs - fbm_covariance(h, t, s).unwrap()).abs() < 1e-12);
    // time inversion at covariance level
    let (s, t): (f64, f64) = (0.5, 2.0);
    assert_eq!(s * t * (1.0 / t).min(1.0 / s), 0.5);
}

#[test]
fn scaled_and_inverted_bm_have_unit_variance() {
    let grid = GridSpec::new(2.0, 16).unwrap();
    let gen = BmGenerator { grid };
    let scaled = map_replicates(&gen, 4, 10_000, PAR, |p| Ok(scale_path(p, 2.0)?.last())).unwrap();
    let s = EnsembleStats::from_samples(&scaled).unwrap();
    assert!((s.variance - 1.0).abs() < 0.05);
    let rows = map_replicates(&gen, 5, 10_000, PAR, |p| {
        let x = time_invert_bm(p)?;
        Ok(vec![x.at(1.0).unwrap(), x.at(2.0).unwrap()])
    })
    .unwrap();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let cov = covariance_of_rows(&refs).unwrap();
    assert!((cov[0][0] - 1.0).abs() < 0.05);
    assert!((cov[1][1] - 2.0).abs() < 0.1);
    assert!((cov[0][1] - 1.0).abs() < 0.05);
}

#[test]
fn streams_are_reproducible_and_uncorrelated() {
    let grid = GridSpec::new(1.0, 4096).unwrap();
    let gen = CirculantEmbedding::new(grid, 0.5).unwrap();
    let a = gen.sample(RngSeed::new(9, 0)).unwrap();
    assert_eq!(a, gen.sample(RngSeed::new(9, 0)).unwrap());
    let b = gen.sample(RngSeed::new(9, 1)).unwrap();
    let rho = sample_correlation(&a.increments(), &b.increments());
    assert!(rho.abs() < 5.0 / (4096f64).sqrt(), "{rho}");
    let chol = generate_fbm_cholesky(GridSpec::new(1.0, 32).unwrap(), 0.3, RngSeed::new(1, 2)).unwrap();
    assert_eq!(chol, generate_fbm_cholesky(GridSpec::new(1.0, 32).unwrap(), 0.3, RngSeed::new(1, 2)).unwrap());
    assert_eq!(chol.values[0], 0.0);
}

#[test]
fn circulant_matches_covariance() {
    let grid = GridSpec::new(1.0, 16).unwrap();
    for hurst in [0.25, 0.75] {
        let gen = CirculantEmbedding::new(grid, hurst).unwrap();
        let cov = empirical_covariance(&generate_ensemble(&gen, 8, 10_000, PAR).unwrap()).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let r = fbm_covariance(hurst, grid.time(i + 1), grid.time(j + 1)).unwrap();
                assert!((cov[i][j] - r).abs() < 0.05);
            }
        }
    }
}

#[test]
fn generators_reject_bad_input() {
    let grid = GridSpec::new(1.0, 8).unwrap();
    assert!(generate_fbm_cholesky(grid, 1.5, RngSeed::new(0, 0)).is_err());
    assert!(GridSpec::new(0.0, 8).is_err());
    assert!(GridSpec::new(1.0, 0).is_err());
    assert!(CirculantEmbedding::new(grid, 0.0).is_err());
}
