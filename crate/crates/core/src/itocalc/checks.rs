use serde::{Deserialize, Serialize};

use super::{eval_finite, ito_integral_path, AdaptedIntegrand};
use crate::ensemble::{Ensemble, EnsembleStats, Z95};
use crate::error::Result;
use crate::gaussianpaths::SamplePath;

/// Replicate floor for the ensemble checks.
pub const MIN_REPLICATES: usize = 1000;

/// Left- and right-endpoint sums of `∫ B dB` on the path's own grid.
pub fn endpoint_sums(path: &SamplePath) -> (f64, f64) {
    let (mut left, mut right) = (0.0, 0.0);
    for w in path.values.windows(2) {
        let d = w[1] - w[0];
        left += w[0] * d;
        right += w[1] * d;
    }
    (left, right)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointComparison {
    pub mean_left: f64,
    pub mean_right: f64,
    pub left: EnsembleStats,
    pub right: EnsembleStats,
}

/// Ensemble means of the left- and right-endpoint sums for the integrand
/// `B(t)`. Their gap is the expected quadratic variation `T`.
pub fn endpoint_comparison(ensemble: &Ensemble<'_>) -> Result<EndpointComparison> {
    ensemble.require(MIN_REPLICATES)?;
    let sums = ensemble.map(|p| Ok(endpoint_sums(p)))?;
    let (l, r): (Vec<f64>, Vec<f64>) = sums.into_iter().unzip();
    let left = EnsembleStats::from_samples(&l)?;
    let right = EnsembleStats::from_samples(&r)?;
    Ok(EndpointComparison {
        mean_left: left.mean,
        mean_right: right.mean,
        left,
        right,
    })
}

/// Both sides of the Itô isometry over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryCheck {
    /// Mean of `(∫ f dB)^2`.
    pub lhs: f64,
    /// Mean of `∫ f^2 dt` by the trapezoid rule.
    pub rhs: f64,
    /// 95% half-width of the mean of the paired differences.
    pub ci: f64,
    /// Mean of the left-point sum `Σ f_i^2 Δt`, which the discrete isometry
    /// matches exactly in expectation; its distance from `rhs` bounds the
    /// quadrature bias.
    pub rhs_left: f64,
    pub replicates: usize,
}

impl IsometryCheck {
    pub fn discretization_bias(&self) -> f64 {
        (self.rhs - self.rhs_left).abs()
    }

    /// `|lhs - rhs|` within the Monte Carlo half-width plus the quadrature bias.
    pub fn agrees(&self) -> bool {
        (self.lhs - self.rhs).abs() <= self.ci + self.discretization_bias()
    }
}

struct IsometrySample {
    square: f64,
    trapezoid: f64,
    left: f64,
}

fn isometry_sample<F: AdaptedIntegrand + ?Sized>(f: &F, path: &SamplePath) -> Result<IsometrySample> {
    let n = path.grid.n_steps;
    let dt = path.dt();
    let f2: Vec<f64> = (0..=n)
        .map(|k| eval_finite(f, path, k).map(|v| v * v))
        .collect::<Result<_>>()?;
    let left: f64 = f2[..n].iter().sum::<f64>() * dt;
    let trapezoid = left + 0.5 * (f2[n] - f2[0]) * dt;
    let integral = *ito_integral_path(f, path)?.last().unwrap();
    Ok(IsometrySample {
        square: integral * integral,
        trapezoid,
        left,
    })
}

pub fn isometry_check<F: AdaptedIntegrand + ?Sized>(f: &F, ensemble: &Ensemble<'_>) -> Result<IsometryCheck> {
    ensemble.require(MIN_REPLICATES)?;
    let samples = ensemble.map(|p| isometry_sample(f, p))?;
    let sq: Vec<f64> = samples.iter().map(|s| s.square).collect();
    let tr: Vec<f64> = samples.iter().map(|s| s.trapezoid).collect();
    let lf: Vec<f64> = samples.iter().map(|s| s.left).collect();
    let diff: Vec<f64> = samples.iter().map(|s| s.square - s.trapezoid).collect();
    let d = EnsembleStats::from_samples(&diff)?;
    Ok(IsometryCheck {
        lhs: EnsembleStats::from_samples(&sq)?.mean,
        rhs: EnsembleStats::from_samples(&tr)?.mean,
        ci: Z95 * d.std_err,
        rhs_left: EnsembleStats::from_samples(&lf)?.mean,
        replicates: samples.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QvCheck {
    /// `Σ (ΔI_k)^2` of the running integral.
    pub qv: f64,
    /// `∫ f^2 dt` on the same grid (trapezoid).
    pub target: f64,
}

/// Quadratic variation of the running integral against `∫ f^2 dt`.
pub fn ito_integral_qv<F: AdaptedIntegrand + ?Sized>(f: &F, path: &SamplePath) -> Result<QvCheck> {
    let running = ito_integral_path(f, path)?;
    let qv = running.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
    let s = isometry_sample(f, path)?;
    Ok(QvCheck {
        qv,
        target: s.trapezoid,
    })
}
