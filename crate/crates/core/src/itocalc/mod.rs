//! Itô integration against Brownian paths.
//!
//! Integrands are rules `(t, path prefix) -> value`. The prefix handed to a
//! rule at time `t_i` ends at node `i`, and reading past it is an error, so
//! adaptedness is enforced at run time rather than assumed. Integrals are
//! left-endpoint sums of the simple process built from those evaluations.

mod checks;
mod process;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussianpaths::{GridSpec, SamplePath};

pub use checks::{
    endpoint_comparison, endpoint_sums, isometry_check, ito_integral_qv, EndpointComparison,
    IsometryCheck, QvCheck, MIN_REPLICATES,
};
pub(crate) use process::finite;
pub use process::{ito_formula_apply, FormulaPaths, ItoProcess, RealizedProcess};

/// The part of a path visible at node `end`.
#[derive(Debug, Clone, Copy)]
pub struct PathPrefix<'a> {
    path: &'a SamplePath,
    end: usize,
}

impl<'a> PathPrefix<'a> {
    pub fn new(path: &'a SamplePath, end: usize) -> Self {
        Self {
            path,
            end: end.min(path.grid.n_steps),
        }
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn grid(&self) -> GridSpec {
        self.path.grid
    }

    pub fn time(&self) -> f64 {
        self.path.grid.time(self.end)
    }

    /// Path value at the last visible node.
    pub fn current(&self) -> f64 {
        self.path.values[self.end]
    }

    /// Path value at node `k`, which must not lie in the future.
    pub fn at(&self, k: usize) -> Result<f64> {
        if k > self.end {
            return Err(Error::LookAhead {
                requested: k,
                available: self.end,
            });
        }
        Ok(self.path.values[k])
    }

    /// Interpolated path value at time `t <= self.time()`.
    pub fn at_time(&self, t: f64) -> Result<f64> {
        let now = self.time();
        if t > now + 1e-12 * now.max(1.0) {
            return Err(Error::LookAhead {
                requested: (t / self.path.dt()).ceil() as usize,
                available: self.end,
            });
        }
        Ok(self.path.value_at(t.min(now)))
    }

    pub fn values(&self) -> &'a [f64] {
        &self.path.values[..=self.end]
    }
}

/// A rule assigning the integrand value from the time and the path seen so
/// far. Square integrability is the caller's obligation.
pub trait AdaptedIntegrand: Sync {
    fn eval(&self, t: f64, prefix: &PathPrefix<'_>) -> Result<f64>;
}

impl<F> AdaptedIntegrand for F
where
    F: Fn(f64, &PathPrefix<'_>) -> Result<f64> + Sync,
{
    fn eval(&self, t: f64, prefix: &PathPrefix<'_>) -> Result<f64> {
        self(t, prefix)
    }
}

/// `f(t, ω) = c`.
pub fn constant(c: f64) -> impl AdaptedIntegrand {
    move |_: f64, _: &PathPrefix<'_>| Ok(c)
}

/// `f(t, ω) = g(t)`, independent of the path.
pub fn deterministic<G: Fn(f64) -> f64 + Sync>(g: G) -> impl AdaptedIntegrand {
    move |t: f64, _: &PathPrefix<'_>| Ok(g(t))
}

/// `f(t, ω) = B(t, ω)`.
pub fn path_value() -> impl AdaptedIntegrand {
    |_: f64, p: &PathPrefix<'_>| Ok(p.current())
}

/// Nondecreasing grid-node indices `t_0 <= ... <= t_n` of a sub-partition.
/// Repeated nodes are allowed and contribute empty subintervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    grid: GridSpec,
    nodes: Vec<usize>,
}

impl Partition {
    /// Every node of the grid.
    pub fn full(grid: GridSpec) -> Self {
        Self {
            grid,
            nodes: (0..=grid.n_steps).collect(),
        }
    }

    /// Every `stride`-th node, always ending at the last node.
    pub fn strided(grid: GridSpec, stride: usize) -> Result<Self> {
        if stride == 0 || stride > grid.n_steps {
            return Err(invalid("stride", format!("{stride} for {} steps", grid.n_steps)));
        }
        let mut nodes: Vec<usize> = (0..=grid.n_steps).step_by(stride).collect();
        if *nodes.last().unwrap() != grid.n_steps {
            nodes.push(grid.n_steps);
        }
        Ok(Self { grid, nodes })
    }

    /// Partition through the given times, each of which must be a grid node.
    pub fn from_times(grid: GridSpec, times: &[f64]) -> Result<Self> {
        if times.len() < 2 {
            return Err(invalid("partition", "need at least two times"));
        }
        let nodes = times
            .iter()
            .map(|&t| grid.node_index(t).ok_or(Error::MisalignedPartition { time: t }))
            .collect::<Result<Vec<_>>>()?;
        if nodes.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("partition", "times must be nondecreasing"));
        }
        Ok(Self { grid, nodes })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn times(&self) -> Vec<f64> {
        self.nodes.iter().map(|&k| self.grid.time(k)).collect()
    }

    fn check_path(&self, path: &SamplePath) -> Result<()> {
        if self.grid != path.grid {
            return Err(Error::GridMismatch(format!(
                "partition grid {:?} against path grid {:?}",
                self.grid, path.grid
            )));
        }
        Ok(())
    }
}

/// `Σ e_i 1_{[t_i, t_{i+1})}` with `e_i` read from the path prefix at `t_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleProcess {
    pub partition: Partition,
    /// `values[i]` is held on `[t_i, t_{i+1})`.
    pub values: Vec<f64>,
}

impl SimpleProcess {
    /// Evaluates `f` at the left end of every subinterval.
    pub fn sample<F: AdaptedIntegrand + ?Sized>(f: &F, path: &SamplePath, partition: &Partition) -> Result<Self> {
        partition.check_path(path)?;
        let nodes = partition.nodes();
        let values = nodes[..nodes.len() - 1]
            .iter()
            .map(|&k| eval_finite(f, path, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            partition: partition.clone(),
            values,
        })
    }

    /// Running integral `Σ_{j<i} e_j ΔB_j` at every partition node.
    pub fn running_integral(&self, path: &SamplePath) -> Result<Vec<f64>> {
        self.partition.check_path(path)?;
        let nodes = self.partition.nodes();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(nodes.len());
        out.push(0.0);
        for (e, w) in self.values.iter().zip(nodes.windows(2)) {
            acc += e * (path.values[w[1]] - path.values[w[0]]);
            out.push(acc);
        }
        Ok(out)
    }

    pub fn integral(&self, path: &SamplePath) -> Result<f64> {
        Ok(*self.running_integral(path)?.last().unwrap())
    }
}

pub(crate) fn eval_finite<F: AdaptedIntegrand + ?Sized>(f: &F, path: &SamplePath, k: usize) -> Result<f64> {
    let v = f.eval(path.grid.time(k), &PathPrefix::new(path, k))?;
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("integrand at node {k}")));
    }
    Ok(v)
}

/// Left-endpoint Itô sum `Σ f(t_i) [B(t_{i+1}) - B(t_i)]` over the given
/// sub-partition, or over the path's own grid.
pub fn ito_integral<F: AdaptedIntegrand + ?Sized>(f: &F, path: &SamplePath, sub_partition: Option<&Partition>) -> Result<f64> {
    let full;
    let partition = match sub_partition {
        Some(p) => p,
        None => {
            full = Partition::full(path.grid);
            &full
        }
    };
    SimpleProcess::sample(f, path, partition)?.integral(path)
}

/// Running left-endpoint integral at every grid node.
pub fn ito_integral_path<F: AdaptedIntegrand + ?Sized>(f: &F, path: &SamplePath) -> Result<Vec<f64>> {
    SimpleProcess::sample(f, path, &Partition::full(path.grid))?.running_integral(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussianpaths::{generate_bm, RngSeed};

    #[test]
    fn prefix_refuses_the_future() {
        let p = generate_bm(GridSpec::new(1.0, 8).unwrap(), RngSeed::new(1, 0)).unwrap();
        let pre = PathPrefix::new(&p, 3);
        assert_eq!(pre.at(3).unwrap(), p.values[3]);
        assert_eq!(pre.values().len(), 4);
        assert_eq!(pre.at(4), Err(Error::LookAhead { requested: 4, available: 3 }));
        assert!(pre.at_time(0.375).is_ok());
        assert!(pre.at_time(0.4).is_err());
    }

    #[test]
    fn strided_partition_keeps_the_endpoint() {
        let g = GridSpec::new(1.0, 10).unwrap();
        assert_eq!(Partition::strided(g, 4).unwrap().nodes(), &[0, 4, 8, 10]);
        assert!(Partition::strided(g, 0).is_err());
        assert_eq!(
            Partition::from_times(g, &[0.0, 0.3, 0.3, 1.0]).unwrap().nodes(),
            &[0, 3, 3, 10]
        );
        assert_eq!(
            Partition::from_times(g, &[0.0, 0.35]),
            Err(Error::MisalignedPartition { time: 0.35 })
        );
        assert!(Partition::from_times(g, &[0.5, 0.2]).is_err());
    }
}
