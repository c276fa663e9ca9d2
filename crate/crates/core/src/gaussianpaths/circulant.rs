use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{fill_normals, GridSpec, Generator, PathGenerator, RngSeed, SamplePath};
use crate::error::{check_hurst, Error, Result};

/// Exact fBm sampling by circulant embedding of the increment covariance.
/// Costs `O(n log n)` per path, so the path statistics use it for long paths.
pub struct CirculantEmbedding {
    grid: GridSpec,
    hurst: f64,
    sqrt_eigen: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantEmbedding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantEmbedding")
            .field("grid", &self.grid)
            .field("hurst", &self.hurst)
            .finish()
    }
}

/// Autocovariance of unit-spaced fractional Gaussian noise.
fn fgn_autocov(hurst: f64, k: usize) -> f64 {
    let e = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

impl CirculantEmbedding {
    pub fn new(grid: GridSpec, hurst: f64) -> Result<Self> {
        check_hurst(hurst)?;
        grid.validate()?;
        let n = grid.n_steps;
        let m = 2 * n;
        let mut c: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = if j <= n { j } else { m - j };
                Complex::new(fgn_autocov(hurst, lag), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut c);
        let max = c.iter().map(|z| z.re).fold(0.0, f64::max);
        let mut sqrt_eigen = Vec::with_capacity(m);
        for (j, z) in c.iter().enumerate() {
            if z.re < -1e-10 * max {
                return Err(Error::Factorization(format!(
                    "circulant eigenvalue {j} is negative ({:e})",
                    z.re
                )));
            }
            sqrt_eigen.push((z.re.max(0.0) / m as f64).sqrt());
        }
        Ok(Self {
            grid,
            hurst,
            sqrt_eigen,
            fft,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }
}

impl PathGenerator for CirculantEmbedding {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn sample(&self, seed: RngSeed) -> Result<SamplePath> {
        let n = self.grid.n_steps;
        let m = 2 * n;
        let mut z = vec![0.0; 2 * m];
        fill_normals(&mut seed.rng(), &mut z);
        let mut w: Vec<Complex<f64>> = (0..m)
            .map(|j| Complex::new(z[2 * j], z[2 * j + 1]) * self.sqrt_eigen[j])
            .collect();
        self.fft.process(&mut w);
        let scale = self.grid.dt().powf(self.hurst);
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for wk in &w[..n] {
            acc += scale * wk.re;
            values.push(acc);
        }
        Ok(SamplePath {
            grid: self.grid,
            values,
            hurst: self.hurst,
            seed,
            generator: Generator::FbmCirculant,
        })
    }
}
