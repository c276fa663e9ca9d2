//! Monte Carlo ensembles: replicate fan-out over seed streams and
//! order-independent reductions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussianpaths::{PathGenerator, RngSeed, SamplePath};
use crate::par::{map_indices, pairwise_sum, Execution};

/// Normal quantile used for confidence half-widths.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Aggregate of a scalar functional over replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub replicates: usize,
    pub std_err: f64,
    /// 95% normal-approximation half-width of the mean.
    pub half_width: f64,
}

impl EnsembleStats {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::TooFewReplicates { got: n, need: 2 });
        }
        let mean = pairwise_sum(xs) / n as f64;
        let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let variance = pairwise_sum(&sq) / (n - 1) as f64;
        let std_err = (variance / n as f64).sqrt();
        Ok(Self {
            mean,
            variance,
            replicates: n,
            std_err,
            half_width: Z95 * std_err,
        })
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

/// Samples replicate `i` from stream `i` of `root` and applies `f` to it.
/// The output order is the replicate order regardless of `exec`.
pub fn map_replicates<G, T, F>(
    generator: &G,
    root: u64,
    replicates: usize,
    exec: Execution,
    f: F,
) -> Result<Vec<T>>
where
    G: PathGenerator + ?Sized,
    T: Send,
    F: Fn(&SamplePath) -> Result<T> + Sync + Send,
{
    map_indices(exec, replicates, |i| {
        generator
            .sample(RngSeed::new(root, i as u64))
            .and_then(|p| f(&p))
    })
    .into_iter()
    .collect()
}

/// A seeded replicate ensemble. Paths are sampled on demand, so an
/// ensemble of any size costs one path of memory per worker.
#[derive(Clone, Copy)]
pub struct Ensemble<'a> {
    pub generator: &'a dyn PathGenerator,
    pub root: u64,
    pub replicates: usize,
    pub exec: Execution,
}

impl<'a> Ensemble<'a> {
    pub fn new(generator: &'a dyn PathGenerator, root: u64, replicates: usize) -> Self {
        Self {
            generator,
            root,
            replicates,
            exec: Execution::default(),
        }
    }

    pub fn with_execution(self, exec: Execution) -> Self {
        Self { exec, ..self }
    }

    pub fn map<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&SamplePath) -> Result<T> + Sync + Send,
    {
        map_replicates(self.generator, self.root, self.replicates, self.exec, f)
    }

    pub(crate) fn require(&self, need: usize) -> Result<()> {
        if self.replicates < need {
            return Err(Error::TooFewReplicates {
                got: self.replicates,
                need,
            });
        }
        Ok(())
    }
}

/// All replicate paths; memory grows as `replicates * n_steps`.
pub fn generate_ensemble<G: PathGenerator + ?Sized>(
    generator: &G,
    root: u64,
    replicates: usize,
    exec: Execution,
) -> Result<Vec<SamplePath>> {
    map_replicates(generator, root, replicates, exec, |p| Ok(p.clone()))
}

/// Sample covariance matrix of the node values `1..=n` across paths.
pub fn empirical_covariance(paths: &[SamplePath]) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<&[f64]> = paths.iter().map(|p| &p.values[1..]).collect();
    covariance_of_rows(&rows)
}

/// Sample covariance of equally long rows, one row per replicate.
pub fn covariance_of_rows(rows: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let r = rows.len();
    if r < 2 {
        return Err(Error::TooFewReplicates { got: r, need: 2 });
    }
    let n = rows[0].len();
    if rows.iter().any(|row| row.len() != n) {
        return Err(Error::GridMismatch("replicates of different length".into()));
    }
    let means: Vec<f64> = (0..n)
        .map(|i| pairwise_sum(&rows.iter().map(|row| row[i]).collect::<Vec<_>>()) / r as f64)
        .collect();
    let mut cov = vec![vec![0.0; n]; n];
    let mut buf = vec![0.0; r];
    for i in 0..n {
        for j in 0..=i {
            for (b, row) in buf.iter_mut().zip(rows) {
                *b = (row[i] - means[i]) * (row[j] - means[j]);
            }
            let c = pairwise_sum(&buf) / (r - 1) as f64;
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }
    Ok(cov)
}

/// Pearson correlation of two equally long samples.
pub fn sample_correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}
