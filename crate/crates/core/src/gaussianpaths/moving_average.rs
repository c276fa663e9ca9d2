use serde::{Deserialize, Serialize};

use super::normalizing::{kernel_gap, normalizing_constant};
use super::{fill_normals, GridSpec, Generator, PathGenerator, RngSeed, SamplePath};
use crate::error::{check_hurst, invalid, Error, Result};
use crate::quad;
use crate::special::pow_diff;

/// Discretization controls for the moving-average generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingAverageConfig {
    /// Left cutoff `L`: the driving noise lives on `[-L, t_max]`.
    pub truncation: f64,
    /// Noise cells per grid step on `[-t_max, t_max]`.
    pub kernel_mesh: usize,
}

impl MovingAverageConfig {
    /// `L = 50 t_max` with 16 noise cells per step.
    pub fn for_grid(grid: GridSpec) -> Self {
        Self {
            truncation: 50.0 * grid.t_max,
            kernel_mesh: 16,
        }
    }
}

/// Growth factor of the noise cells beyond `-t_max`, where the kernel is smooth.
const CELL_GROWTH: f64 = 1.1;
const MAX_COEFFICIENTS: usize = 50_000_000;

/// fBm as `Z(t) = (1/C(H)) ∫ [(t - s)_+^{H-1/2} - (-s)_+^{H-1/2}] dB(s)`.
///
/// The auxiliary Brownian motion is cut into cells; each cell contributes its
/// Gaussian increment times the cell average of the kernel, so the discrete
/// sum is the exact variance-optimal projection of the kernel onto
/// piecewise constants.
#[derive(Debug, Clone)]
pub struct MovingAverage {
    grid: GridSpec,
    hurst: f64,
    config: MovingAverageConfig,
    constant: f64,
    n_cells: usize,
    // rows[k - 1][c]: coefficient of the c-th standard normal in Z(t_k)
    rows: Vec<Vec<f64>>,
}

fn cell_edges(grid: GridSpec, config: MovingAverageConfig) -> Vec<f64> {
    let delta = grid.dt() / config.kernel_mesh as f64;
    let uniform = 2 * grid.n_steps * config.kernel_mesh;
    let mut far = Vec::new();
    let mut edge = -grid.t_max;
    let mut width = delta;
    while edge > -config.truncation {
        width *= CELL_GROWTH;
        edge = (edge - width).max(-config.truncation);
        far.push(edge);
    }
    far.reverse();
    let half = grid.n_steps * config.kernel_mesh;
    far.extend((0..=uniform).map(|i| {
        let i = i as isize - half as isize;
        if i == half as isize {
            grid.t_max
        } else {
            i as f64 * delta
        }
    }));
    far
}

/// `∫_{s0}^{s1} [(t - s)_+^β - (-s)_+^β] ds` for a cell that does not
/// straddle `0` or `t`.
fn cell_integral(beta: f64, t: f64, s0: f64, s1: f64) -> f64 {
    let c = beta + 1.0;
    if s0 >= t {
        return 0.0;
    }
    if s1 <= 0.0 {
        // both terms present; difference of D(x) = (t + x)^c - x^c, x = -s
        let d = |x: f64| {
            if x == 0.0 {
                t.powf(c)
            } else {
                x.powf(c) * (c * (t / x).ln_1p()).exp_m1()
            }
        };
        return (d(-s0) - d(-s1)) / c;
    }
    pow_diff(t - s0, t - s1, c) / c
}

impl MovingAverage {
    pub fn new(grid: GridSpec, hurst: f64, config: MovingAverageConfig) -> Result<Self> {
        check_hurst(hurst)?;
        grid.validate()?;
        if !(config.truncation >= grid.t_max) {
            return Err(invalid(
                "truncation",
                format!("L = {} is below t_max = {}", config.truncation, grid.t_max),
            ));
        }
        if config.kernel_mesh == 0 {
            return Err(invalid("kernel_mesh", "need at least one noise cell per step"));
        }
        let edges = cell_edges(grid, config);
        let n_cells = edges.len() - 1;
        if n_cells.saturating_mul(grid.n_steps) > MAX_COEFFICIENTS {
            return Err(invalid(
                "kernel_mesh",
                format!("{} noise cells on {} steps is too large a kernel matrix", n_cells, grid.n_steps),
            ));
        }
        let constant = normalizing_constant(hurst)?;
        let beta = hurst - 0.5;
        let mut rows = Vec::with_capacity(grid.n_steps);
        for k in 1..=grid.n_steps {
            let t = grid.time(k);
            let row: Vec<f64> = edges
                .windows(2)
                .take_while(|w| w[0] < t)
                .map(|w| cell_integral(beta, t, w[0], w[1]) / ((w[1] - w[0]).sqrt() * constant))
                .collect();
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::KernelOverflow(format!(
                    "kernel weight of cell [{}, {}] at t = {t} is {}",
                    edges[c],
                    edges[c + 1],
                    row[c]
                )));
            }
            rows.push(row);
        }
        Ok(Self {
            grid,
            hurst,
            config,
            constant,
            n_cells,
            rows,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn config(&self) -> MovingAverageConfig {
        self.config
    }

    pub fn normalizing_constant(&self) -> f64 {
        self.constant
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Variance lost at `t_max` by cutting the noise off at `-L`:
    /// `(1/C^2) ∫_L^∞ [(t_max + x)^β - x^β]^2 dx`.
    pub fn truncation_bias(&self) -> f64 {
        let beta = self.hurst - 0.5;
        if beta == 0.0 {
            return 0.0;
        }
        let t = self.grid.t_max;
        let l = self.config.truncation;
        // x = L / z with z = w^k keeps the integrand bounded at z = 0
        let k = 1.0 / (1.0 - 2.0 * beta);
        let tail = quad::integrate(
            |w| {
                let z = w.powf(k);
                let x = l / z;
                let d = t.powf(beta) * kernel_gap(beta, x / t);
                d * d * l / (z * z) * k * w.powf(k - 1.0)
            },
            0.0,
            1.0,
            1e-14,
        );
        tail / (self.constant * self.constant)
    }

    /// `t_k^{2H}` minus the variance the discrete sum carries at node `k`
    /// (truncation and cell-averaging combined).
    pub fn variance_deficit(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let represented: f64 = self.rows[k - 1].iter().map(|a| a * a).sum();
        self.grid.time(k).powf(2.0 * self.hurst) - represented
    }
}

impl PathGenerator for MovingAverage {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn sample(&self, seed: RngSeed) -> Result<SamplePath> {
        let mut z = vec![0.0; self.n_cells];
        fill_normals(&mut seed.rng(), &mut z);
        let mut values = Vec::with_capacity(self.grid.n_steps + 1);
        values.push(0.0);
        for row in &self.rows {
            values.push(row.iter().zip(&z).map(|(a, z)| a * z).sum());
        }
        Ok(SamplePath {
            grid: self.grid,
            values,
            hurst: self.hurst,
            seed,
            generator: Generator::FbmMovingAverage,
        })
    }
}

/// One fBm path from the moving-average representation.
pub fn generate_fbm_moving_average(
    grid: GridSpec,
    hurst: f64,
    seed: RngSeed,
    config: MovingAverageConfig,
) -> Result<SamplePath> {
    MovingAverage::new(grid, hurst, config)?.sample(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_are_increasing_and_hit_the_grid() {
        let g = GridSpec::new(1.0, 4).unwrap();
        let cfg = MovingAverageConfig {
            truncation: 10.0,
            kernel_mesh: 2,
        };
        let e = cell_edges(g, cfg);
        assert_eq!(e[0], -10.0);
        assert_eq!(*e.last().unwrap(), 1.0);
        assert!(e.windows(2).all(|w| w[1] > w[0]));
        assert!(e.contains(&0.0) && e.contains(&0.5) && e.contains(&-1.0));
    }

    #[test]
    fn brownian_kernel_is_indicator() {
        let g = GridSpec::new(1.0, 4).unwrap();
        let m = MovingAverage::new(g, 0.5, MovingAverageConfig::for_grid(g)).unwrap();
        for k in 1..=4 {
            assert!(m.variance_deficit(k).abs() < 1e-12);
        }
        assert_eq!(m.truncation_bias(), 0.0);
    }

    #[test]
    fn deficit_is_small_and_bounded_by_tail_plus_projection() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let m = MovingAverage::new(g, 0.75, MovingAverageConfig::for_grid(g)).unwrap();
        let bias = m.truncation_bias();
        assert!(bias > 0.0 && bias < 0.05, "{bias}");
        let deficit = m.variance_deficit(8);
        assert!(deficit >= bias * 0.999 && deficit < bias + 0.01, "{deficit} vs {bias}");
    }

    #[test]
    fn rejects_short_truncation() {
        let g = GridSpec::new(2.0, 4).unwrap();
        let cfg = MovingAverageConfig {
            truncation: 1.0,
            kernel_mesh: 4,
        };
        assert!(MovingAverage::new(g, 0.7, cfg).is_err());
    }
}
