//! Seeded Brownian and fractional Brownian sample paths, the closed-form
//! covariance functions and the deterministic path transforms (scaling and
//! time inversion).
//!
//! Gaussian variates come from `rand_distr::StandardNormal` (the ziggurat
//! method) driven by a ChaCha8 stream: the root seed keys the generator and
//! the replicate index selects the stream, so every `(root, stream)` pair
//! names one reproducible path.

mod cholesky;
mod circulant;
mod moving_average;
mod normalizing;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_hurst, invalid, Error, Result};

pub use cholesky::{generate_fbm_cholesky, CholeskyFactor, DEFAULT_CHOLESKY_CAP};
pub use circulant::CirculantEmbedding;
pub use moving_average::{generate_fbm_moving_average, MovingAverage, MovingAverageConfig};
pub use normalizing::normalizing_constant;

/// Root seed plus replicate stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub root: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(root: u64, stream: u64) -> Self {
        Self { root, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(self.stream);
        rng
    }
}

/// Fills `out` with independent standard normals from `rng`.
pub(crate) fn fill_normals(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for z in out.iter_mut() {
        *z = StandardNormal.sample(rng);
    }
}

/// Closed uniform grid `t_k = k t_max / n_steps`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_max: f64,
    pub n_steps: usize,
}

impl GridSpec {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        let g = Self { t_max, n_steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(invalid("t_max", format!("{} is not a positive finite time", self.t_max)));
        }
        if self.n_steps == 0 {
            return Err(invalid("n_steps", "need at least one step"));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_max
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.time(k)).collect()
    }

    /// Index of the node equal to `t` (up to rounding), if any.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let x = t / self.dt();
        let k = x.round();
        if k < 0.0 || k > self.n_steps as f64 || (x - k).abs() > 1e-9 * x.abs().max(1.0) {
            None
        } else {
            Some(k as usize)
        }
    }
}

/// The method that produced a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    BmIncrements,
    FbmCholesky,
    FbmMovingAverage,
    /// Circulant embedding of the increment covariance, used for long paths.
    FbmCirculant,
    /// Built from node values supplied by the caller.
    External,
}

impl Generator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Generator::BmIncrements => "bm-increments",
            Generator::FbmCholesky => "fbm-cholesky",
            Generator::FbmMovingAverage => "fbm-moving-average",
            Generator::FbmCirculant => "fbm-circulant",
            Generator::External => "external",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Generator::BmIncrements,
            Generator::FbmCholesky,
            Generator::FbmMovingAverage,
            Generator::FbmCirculant,
            Generator::External,
        ]
        .into_iter()
        .find(|g| g.as_str() == s)
    }
}

/// A realized trajectory on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub hurst: f64,
    pub seed: RngSeed,
    pub generator: Generator,
}

impl SamplePath {
    /// Wraps caller-supplied node values.
    pub fn from_values(grid: GridSpec, values: Vec<f64>, hurst: f64, seed: RngSeed, generator: Generator) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n_steps + 1 {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} steps",
                values.len(),
                grid.n_steps
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("path value {k}")));
        }
        Ok(Self {
            grid,
            values,
            hurst,
            seed,
            generator,
        })
    }

    /// A deterministic path `t -> f(t)` (tagged `External`, Hurst 1/2).
    pub fn deterministic<F: Fn(f64) -> f64>(grid: GridSpec, f: F) -> Result<Self> {
        let values = grid.times().into_iter().map(f).collect();
        Self::from_values(grid, values, 0.5, RngSeed::new(0, 0), Generator::External)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt()
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("paths have at least two nodes")
    }

    /// Linear interpolation between nodes; clamps outside `[0, t_max]`.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values[0];
        }
        if t >= self.grid.t_max {
            return self.last();
        }
        let x = t / self.grid.dt();
        let k = (x.floor() as usize).min(self.grid.n_steps - 1);
        let w = x - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }
}

/// Anything that turns a seed into a path on a fixed grid.
pub trait PathGenerator: Sync {
    fn grid(&self) -> GridSpec;
    fn sample(&self, seed: RngSeed) -> Result<SamplePath>;
}

/// A fixed path is a degenerate generator: every seed yields the same path.
impl PathGenerator for SamplePath {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn sample(&self, _seed: RngSeed) -> Result<SamplePath> {
        Ok(self.clone())
    }
}

/// `E[B(s) B(t)] = min(s, t)`.
pub fn bm_covariance(s: f64, t: f64) -> Result<f64> {
    check_times(&[s, t])?;
    Ok(s.min(t))
}

/// `E[B^H(s) B^H(t)] = ½ (t^{2H} + s^{2H} - |t - s|^{2H})`.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> Result<f64> {
    check_hurst(hurst)?;
    check_times(&[s, t])?;
    Ok(fbm_cov_unchecked(hurst, s, t))
}

pub(crate) fn fbm_cov_unchecked(hurst: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * hurst;
    0.5 * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e))
}

/// Covariance of the increments `B^H(t) - B^H(s)` and `B^H(v) - B^H(u)`,
/// both taken end minus start: identical intervals give the variance.
pub fn increment_cross_covariance(hurst: f64, s: f64, t: f64, u: f64, v: f64) -> Result<f64> {
    check_hurst(hurst)?;
    check_times(&[s, t, u, v])?;
    let e = 2.0 * hurst;
    let p = |x: f64| x.abs().powf(e);
    Ok(0.5 * (p(t - u) + p(s - v) - p(s - u) - p(t - v)))
}

fn check_times(ts: &[f64]) -> Result<()> {
    match ts.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        Some(t) => Err(invalid("time", format!("{t} is not a nonnegative time"))),
        None => Ok(()),
    }
}

/// Brownian motion by cumulative sums of `N(0, dt)` increments.
#[derive(Debug, Clone, Copy)]
pub struct BmGenerator {
    pub grid: GridSpec,
}

impl PathGenerator for BmGenerator {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn sample(&self, seed: RngSeed) -> Result<SamplePath> {
        generate_bm(self.grid, seed)
    }
}

pub fn generate_bm(grid: GridSpec, seed: RngSeed) -> Result<SamplePath> {
    grid.validate()?;
    let n = grid.n_steps;
    let mut z = vec![0.0; n];
    fill_normals(&mut seed.rng(), &mut z);
    let sd = grid.dt().sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for zi in z {
        acc += sd * zi;
        values.push(acc);
    }
    Ok(SamplePath {
        grid,
        values,
        hurst: 0.5,
        seed,
        generator: Generator::BmIncrements,
    })
}

/// `t -> a^{-H} X(a t)` on the grid with times divided by `a`.
///
/// The node values are unchanged up to the factor `a^{-H}`; only the time
/// axis is rescaled, so node `k` of the result sits at `t_k / a`.
pub fn scale_path(path: &SamplePath, a: f64) -> Result<SamplePath> {
    if !(a.is_finite() && a > 0.0) {
        return Err(invalid("a", format!("scale factor must be positive, got {a}")));
    }
    let factor = a.powf(-path.hurst);
    Ok(SamplePath {
        grid: GridSpec::new(path.grid.t_max / a, path.grid.n_steps)?,
        values: path.values.iter().map(|v| v * factor).collect(),
        ..path.clone()
    })
}

/// A path on a nonuniform, increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrregularPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl IrregularPath {
    /// Value at an exact node time.
    pub fn at(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .position(|&x| (x - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|k| self.values[k])
    }
}

/// `X(t) = t B(1/t)` with `X(0) = 0`, sampled at the reciprocal node times
/// `0 < 1/t_n < ... < 1/t_1`.
pub fn time_invert_bm(path: &SamplePath) -> Result<IrregularPath> {
    if path.hurst != 0.5 {
        return Err(invalid("path", format!("time inversion needs a Brownian path, got H = {}", path.hurst)));
    }
    let n = path.grid.n_steps;
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    times.push(0.0);
    values.push(0.0);
    for k in (1..=n).rev() {
        let s = path.grid.time(k);
        let t = 1.0 / s;
        times.push(t);
        values.push(t * path.values[k]);
    }
    Ok(IrregularPath { times, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_examples() {
        assert_eq!(bm_covariance(2.0, 3.0).unwrap(), 2.0);
        assert_eq!(bm_covariance(0.0, 5.0).unwrap(), 0.0);
        assert!(bm_covariance(-1.0, 1.0).is_err());
        assert!((fbm_covariance(0.5, 2.0, 3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((fbm_covariance(0.75, 1.0, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(fbm_covariance(1.0, 1.0, 1.0).is_err());
        assert_eq!(increment_cross_covariance(0.5, 0.0, 1.0, 1.0, 2.0).unwrap(), 0.0);
        assert!((increment_cross_covariance(0.3, 0.0, 1.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bm_is_reproducible() {
        let g = GridSpec::new(1.0, 64).unwrap();
        let a = generate_bm(g, RngSeed::new(7, 3)).unwrap();
        let b = generate_bm(g, RngSeed::new(7, 3)).unwrap();
        let c = generate_bm(g, RngSeed::new(7, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert_eq!(a.values[0], 0.0);
    }

    #[test]
    fn interpolation_and_node_lookup() {
        let g = GridSpec::new(2.0, 4).unwrap();
        let p = SamplePath::deterministic(g, |t| t * t).unwrap();
        assert_eq!(p.value_at(1.0), 1.0);
        assert!((p.value_at(0.75) - 0.625).abs() < 1e-15);
        assert_eq!(p.value_at(5.0), 4.0);
        assert_eq!(g.node_index(1.5), Some(3));
        assert_eq!(g.node_index(1.3), None);
    }

    #[test]
    fn scaling_and_inversion() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let p = generate_bm(g, RngSeed::new(1, 0)).unwrap();
        assert_eq!(scale_path(&p, 1.0).unwrap(), p);
        assert!(scale_path(&p, 0.0).is_err());
        let x = time_invert_bm(&p).unwrap();
        assert_eq!(x.values[0], 0.0);
        assert_eq!(x.at(1.0), Some(p.last()));
        let mut fbm = p.clone();
        fbm.hurst = 0.7;
        assert!(time_invert_bm(&fbm).is_err());
    }
}
