use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::power_moment;

/// A function sampled on the uniform grid `t_k = a + k (b - a) / n`.
///
/// The sampled function is `f(t) = (t - a)^p (b - t)^q g(t)` where `g` is the
/// piecewise-linear interpolant of the stored regular values and `p`, `q` are
/// the endpoint exponents. Plain grid functions have `p = q = 0`. Operators
/// that produce algebraic endpoint behaviour (fractional integrals and
/// derivatives) return it through the exponents, which keeps the regular part
/// smooth and lets later operators integrate the singular factor exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    a: f64,
    b: f64,
    regular: Vec<f64>,
    left_exponent: f64,
    right_exponent: f64,
}

impl GridFunction {
    /// Plain samples `f(t_0), ..., f(t_n)`.
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        Self::weighted(a, b, values, 0.0, 0.0)
    }

    /// Samples `t -> f(t)` at `n + 1` nodes.
    pub fn from_fn<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> Result<Self> {
        if n < 2 {
            return Err(Error::DegenerateGrid(format!("need n >= 2 cells, got {n}")));
        }
        let h = (b - a) / n as f64;
        let values = (0..=n).map(|k| f(node_at(a, b, h, n, k))).collect();
        Self::new(a, b, values)
    }

    /// `(t - a)^p (b - t)^q g(t)` with `g` given by its node values.
    pub fn weighted(
        a: f64,
        b: f64,
        regular: Vec<f64>,
        left_exponent: f64,
        right_exponent: f64,
    ) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::DegenerateGrid(format!("interval [{a}, {b}] is empty")));
        }
        if regular.len() < 3 {
            return Err(Error::DegenerateGrid(format!(
                "need at least 3 nodes, got {}",
                regular.len()
            )));
        }
        if let Some(k) = regular.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sample {k} is {}", regular[k])));
        }
        for (name, e) in [("left_exponent", left_exponent), ("right_exponent", right_exponent)] {
            if !e.is_finite() {
                return Err(invalid(name, format!("{e} is not finite")));
            }
        }
        Ok(Self {
            a,
            b,
            regular,
            left_exponent,
            right_exponent,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of cells.
    pub fn n(&self) -> usize {
        self.regular.len() - 1
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n() as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        node_at(self.a, self.b, self.h(), self.n(), k)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n()).map(|k| self.node(k)).collect()
    }

    pub fn regular(&self) -> &[f64] {
        &self.regular
    }

    pub fn left_exponent(&self) -> f64 {
        self.left_exponent
    }

    pub fn right_exponent(&self) -> f64 {
        self.right_exponent
    }

    pub fn is_plain(&self) -> bool {
        self.left_exponent == 0.0 && self.right_exponent == 0.0
    }

    /// Node values of the represented function. Where a negative exponent
    /// meets a nonzero regular value at an endpoint the value is infinite.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n();
        let h = self.h();
        self.regular
            .iter()
            .enumerate()
            .map(|(k, &g)| {
                if g == 0.0 {
                    return 0.0;
                }
                let left = weight(k as f64 * h, self.left_exponent, k == 0);
                let right = weight((n - k) as f64 * h, self.right_exponent, k == n);
                g * left * right
            })
            .collect()
    }

    /// Value at node `k`.
    pub fn value(&self, k: usize) -> f64 {
        self.values()[k]
    }

    /// `(Rf)(t) = f(a + b - t)`, realized by index reversal.
    pub fn reflect(&self) -> Self {
        let mut regular = self.regular.clone();
        regular.reverse();
        Self {
            a: self.a,
            b: self.b,
            regular,
            left_exponent: self.right_exponent,
            right_exponent: self.left_exponent,
        }
    }

    /// Pointwise map of node values; the result is plain.
    pub fn map<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<Self> {
        let values = self
            .nodes()
            .into_iter()
            .zip(self.values())
            .map(|(t, v)| f(t, v))
            .collect();
        Self::new(self.a, self.b, values)
    }

    /// Drops the endpoint weights by folding them into node samples.
    pub fn to_plain(&self) -> Result<Self> {
        if self.is_plain() {
            return Ok(self.clone());
        }
        Self::new(self.a, self.b, self.values())
    }

    /// Folds a nonnegative right weight into the regular part so that
    /// left-sided operators, which integrate against the left weight only,
    /// can consume the function.
    pub(crate) fn absorb_right(&self) -> Result<Self> {
        let q = self.right_exponent;
        if q == 0.0 {
            return Ok(self.clone());
        }
        if q < 0.0 {
            return Err(Error::UnsupportedWeight(format!(
                "left-sided operator applied to a function with right endpoint exponent {q}"
            )));
        }
        let n = self.n();
        let h = self.h();
        let regular = self
            .regular
            .iter()
            .enumerate()
            .map(|(k, &g)| g * ((n - k) as f64 * h).powf(q))
            .collect();
        Self::weighted(self.a, self.b, regular, self.left_exponent, 0.0)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.n() == other.n() && self.a == other.a && self.b == other.b
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "[{}, {}] with {} cells vs [{}, {}] with {} cells",
                self.a,
                self.b,
                self.n(),
                other.a,
                other.b,
                other.n()
            )))
        }
    }

    /// Pointwise product; exponents add and regular parts multiply.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let regular = self
            .regular
            .iter()
            .zip(&other.regular)
            .map(|(x, y)| x * y)
            .collect();
        Self::weighted(
            self.a,
            self.b,
            regular,
            self.left_exponent + other.left_exponent,
            self.right_exponent + other.right_exponent,
        )
    }

    /// Linear combination `x * self + y * other` of two plain or
    /// identically weighted functions.
    pub fn combine(&self, x: f64, other: &Self, y: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        if self.left_exponent != other.left_exponent || self.right_exponent != other.right_exponent {
            return Err(Error::UnsupportedWeight(
                "linear combination of differently weighted functions".into(),
            ));
        }
        let regular = self
            .regular
            .iter()
            .zip(&other.regular)
            .map(|(u, v)| x * u + y * v)
            .collect();
        Self::weighted(self.a, self.b, regular, self.left_exponent, self.right_exponent)
    }

    /// `∫_a^b f(t) dt`, integrating the endpoint weights exactly against the
    /// piecewise-linear regular part. Requires both exponents above `-1`.
    pub fn integrate(&self) -> Result<f64> {
        let (p, q) = (self.left_exponent, self.right_exponent);
        if p <= -1.0 || q <= -1.0 {
            return Err(Error::UnsupportedWeight(format!(
                "endpoint exponents ({p}, {q}) are not integrable"
            )));
        }
        let n = self.n();
        let h = self.h();
        let tau = self.b - self.a;
        if self.is_plain() {
            let g = &self.regular;
            let inner: f64 = crate::par::pairwise_sum(&g[1..n]);
            return Ok(h * (0.5 * (g[0] + g[n]) + inner));
        }
        let terms: Vec<f64> = (0..n)
            .map(|j| {
                let (y0, y1) = (j as f64 * h, if j + 1 == n { tau } else { (j + 1) as f64 * h });
                let s = (self.regular[j + 1] - self.regular[j]) / h;
                // g(u) = c - s (b - u) on the cell
                let c = self.regular[j] + s * (tau - y0);
                c * power_moment(p, q, y0, y1, tau) - s * power_moment(p, q + 1.0, y0, y1, tau)
            })
            .collect();
        Ok(crate::par::pairwise_sum(&terms))
    }
}

fn node_at(a: f64, b: f64, h: f64, n: usize, k: usize) -> f64 {
    if k == n {
        b
    } else {
        a + k as f64 * h
    }
}

fn weight(dist: f64, exponent: f64, at_end: bool) -> f64 {
    if exponent == 0.0 {
        1.0
    } else if at_end {
        if exponent > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        dist.powf(exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GridFunction::new(0.0, 1.0, vec![1.0, 2.0]).is_err());
        assert!(GridFunction::new(1.0, 1.0, vec![1.0; 4]).is_err());
        assert!(GridFunction::new(0.0, 1.0, vec![1.0, f64::NAN, 0.0]).is_err());
        assert!(GridFunction::from_fn(0.0, 1.0, 1, |t| t).is_err());
    }

    #[test]
    fn nodes_hit_both_ends() {
        let f = GridFunction::from_fn(0.1, 0.7, 3, |t| t).unwrap();
        assert_eq!(f.node(0), 0.1);
        assert_eq!(f.node(3), 0.7);
        assert!((f.h() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn weighted_values_and_reflection() {
        let f = GridFunction::weighted(0.0, 1.0, vec![1.0; 5], -0.5, 0.0).unwrap();
        let v = f.values();
        assert!(v[0].is_infinite());
        assert!((v[1] - 2.0).abs() < 1e-15);
        let r = f.reflect();
        assert_eq!(r.right_exponent(), -0.5);
        assert!(r.values()[4].is_infinite());
        assert_eq!(r.reflect(), f);
    }

    #[test]
    fn integrate_plain_is_trapezoid() {
        let f = GridFunction::from_fn(0.0, 2.0, 4, |t| t).unwrap();
        assert!((f.integrate().unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn integrate_weighted_exactly() {
        // ∫_0^1 t^{-1/2} (1 - t)^{-1/2} dt = π
        let f = GridFunction::weighted(0.0, 1.0, vec![1.0; 9], -0.5, -0.5).unwrap();
        assert!((f.integrate().unwrap() - std::f64::consts::PI).abs() < 1e-12);
        // ∫_0^1 t^{-1/2} t dt = 2/3
        let f = GridFunction::weighted(0.0, 1.0, (0..=8).map(|k| k as f64 / 8.0).collect(), -0.5, 0.0)
            .unwrap();
        assert!((f.integrate().unwrap() - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn absorb_right_rejects_singular_weight() {
        let f = GridFunction::weighted(0.0, 1.0, vec![1.0; 5], 0.0, -0.3).unwrap();
        assert!(matches!(f.absorb_right(), Err(Error::UnsupportedWeight(_))));
        let f = GridFunction::weighted(0.0, 1.0, vec![1.0; 5], 0.0, 1.0).unwrap();
        let g = f.absorb_right().unwrap();
        assert!((g.regular()[1] - 0.75).abs() < 1e-15);
    }
}
