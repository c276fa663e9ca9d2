use super::{fbm_cov_unchecked, fill_normals, GridSpec, Generator, PathGenerator, RngSeed, SamplePath};
use crate::error::{check_hurst, invalid, Error, Result};

/// Largest grid the exact generator accepts by default; the factorization
/// costs `O(n^3)`.
pub const DEFAULT_CHOLESKY_CAP: usize = 4096;

const JITTER: f64 = 1e-12;

/// Lower-triangular factor of the fBm covariance matrix on `t_1..t_n`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    grid: GridSpec,
    hurst: f64,
    // row-major packed lower triangle
    lower: Vec<f64>,
    jitter: f64,
}

fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

/// In-place Cholesky of a packed lower-triangular symmetric matrix.
fn factorize(m: &mut [f64], n: usize) -> std::result::Result<(), usize> {
    for i in 0..n {
        let ri = row_start(i);
        for j in 0..=i {
            let rj = row_start(j);
            let dot: f64 = m[ri..ri + j].iter().zip(&m[rj..rj + j]).map(|(a, b)| a * b).sum();
            let v = m[ri + j] - dot;
            if i == j {
                if !(v > 0.0) {
                    return Err(i);
                }
                m[ri + i] = v.sqrt();
            } else {
                m[ri + j] = v / m[rj + j];
            }
        }
    }
    Ok(())
}

impl CholeskyFactor {
    pub fn new(grid: GridSpec, hurst: f64) -> Result<Self> {
        Self::with_cap(grid, hurst, DEFAULT_CHOLESKY_CAP)
    }

    pub fn with_cap(grid: GridSpec, hurst: f64, cap: usize) -> Result<Self> {
        check_hurst(hurst)?;
        grid.validate()?;
        let n = grid.n_steps;
        if n > cap {
            return Err(invalid("n_steps", format!("{n} exceeds the Cholesky cap {cap}")));
        }
        let mut cov = Vec::with_capacity(row_start(n));
        for i in 1..=n {
            for j in 1..=i {
                cov.push(fbm_cov_unchecked(hurst, grid.time(i), grid.time(j)));
            }
        }
        let mut lower = cov.clone();
        let mut jitter = 0.0;
        if factorize(&mut lower, n).is_err() {
            let max_diag = (0..n).map(|i| cov[row_start(i) + i]).fold(0.0, f64::max);
            jitter = JITTER * max_diag;
            lower = cov;
            for i in 0..n {
                lower[row_start(i) + i] += jitter;
            }
            factorize(&mut lower, n).map_err(|i| {
                Error::Factorization(format!("pivot {i} not positive after jitter {jitter:e}"))
            })?;
        }
        Ok(Self {
            grid,
            hurst,
            lower,
            jitter,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Diagonal jitter that was needed to factorize (zero when none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Entry `(i, j)` of the factor, `i >= j`, rows indexed from `t_1`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.lower[row_start(i) + j]
    }
}

impl PathGenerator for CholeskyFactor {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn sample(&self, seed: RngSeed) -> Result<SamplePath> {
        let n = self.grid.n_steps;
        let mut z = vec![0.0; n];
        fill_normals(&mut seed.rng(), &mut z);
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        for i in 0..n {
            let r = row_start(i);
            values.push(self.lower[r..=r + i].iter().zip(&z).map(|(l, z)| l * z).sum());
        }
        Ok(SamplePath {
            grid: self.grid,
            values,
            hurst: self.hurst,
            seed,
            generator: Generator::FbmCholesky,
        })
    }
}

/// One fBm path from the exact covariance factorization.
pub fn generate_fbm_cholesky(grid: GridSpec, hurst: f64, seed: RngSeed) -> Result<SamplePath> {
    CholeskyFactor::new(grid, hurst)?.sample(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_covariance() {
        let g = GridSpec::new(1.0, 12).unwrap();
        let f = CholeskyFactor::new(g, 0.3).unwrap();
        for i in 0..12 {
            for j in 0..=i {
                let llt: f64 = (0..=j).map(|k| f.entry(i, k) * f.entry(j, k)).sum();
                let cov = fbm_cov_unchecked(0.3, g.time(i + 1), g.time(j + 1));
                assert!((llt - cov).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = GridSpec::new(1.0, 100).unwrap();
        assert!(CholeskyFactor::with_cap(g, 0.5, 50).is_err());
    }

    #[test]
    fn standard_bm_factor_is_unit_lower_sum() {
        // for H = 1/2 on a unit-spaced grid the factor is all ones
        let g = GridSpec::new(5.0, 5).unwrap();
        let f = CholeskyFactor::new(g, 0.5).unwrap();
        assert!((f.entry(4, 2) - 1.0).abs() < 1e-14);
        assert_eq!(f.jitter(), 0.0);
    }
}
