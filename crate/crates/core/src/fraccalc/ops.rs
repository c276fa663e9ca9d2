use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use super::kernel::CellMoments;
use crate::error::{invalid, Error, Result};
use crate::par::{map_indices, Execution};
use crate::special::{gamma, pow_diff, rgamma};

/// Which end of the interval an operator integrates from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Integrates over `[a, t]` (operators indexed `a+`).
    LeftSided,
    /// Integrates over `[t, b]` (operators indexed `b-`).
    RightSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Integral,
    Derivative,
}

/// Order, side and kind of a Riemann-Liouville differintegral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferintegralSpec {
    pub alpha: f64,
    pub side: Side,
    pub kind: Kind,
}

impl DifferintegralSpec {
    pub fn integral(alpha: f64, side: Side) -> Self {
        Self {
            alpha,
            side,
            kind: Kind::Integral,
        }
    }

    pub fn derivative(alpha: f64, side: Side) -> Self {
        Self {
            alpha,
            side,
            kind: Kind::Derivative,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.alpha;
        match self.kind {
            Kind::Integral if !(a.is_finite() && a > 0.0) => {
                Err(invalid("alpha", format!("integral order must be positive, got {a}")))
            }
            Kind::Derivative if !(a > 0.0 && a < 1.0) => {
                Err(invalid("alpha", format!("derivative order must lie in (0, 1), got {a}")))
            }
            _ => Ok(()),
        }
    }
}

fn snap(e: f64) -> f64 {
    if e.abs() < 1e-12 {
        0.0
    } else {
        e
    }
}

fn check_finite(g: &[f64], what: &str) -> Result<()> {
    match g.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::NonFinite(format!("{what} at node {k}"))),
        None => Ok(()),
    }
}

/// Left-sided integral of order `alpha > 0` by product integration of
/// `(t_k - u)^{alpha-1}` against the weighted piecewise-linear interpolant.
fn left_integral(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    let f = f.absorb_right()?;
    let p = f.left_exponent();
    if p <= -1.0 {
        return Err(Error::UnsupportedWeight(format!("left exponent {p} is not integrable")));
    }
    let n = f.n();
    let h = f.h();
    let g = f.regular();
    let moments = CellMoments::new(p, h, n, &[alpha - 1.0, alpha]);
    let slopes: Vec<f64> = g.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let out_exp = snap(p + alpha);
    let scale = rgamma(alpha);
    let regular = map_indices(Execution::Parallel, n + 1, |k| {
        if k == 0 {
            return g[0] * gamma(p + 1.0) * rgamma(p + alpha + 1.0);
        }
        let mut acc = 0.0;
        for j in 0..k {
            let s = slopes[j];
            // g(u) = c - s (t_k - u) on cell j
            let c = g[j] + s * ((k - j) as f64 * h);
            acc += c * moments.cell(0, j, k) - s * moments.cell(1, j, k);
        }
        let tau = k as f64 * h;
        scale * acc / tau.powf(out_exp)
    });
    check_finite(&regular, "fractional integral")?;
    GridFunction::weighted(f.a(), f.b(), regular, out_exp, 0.0)
}

/// Left-sided derivative of order `alpha` in (0, 1) through the Marchaud form
/// `D f(t) = f(t) / (Γ(1-α) (t-a)^α) + α/Γ(1-α) ∫_a^t (f(t) - f(u)) (t-u)^{-α-1} du`.
///
/// The weight `(u-a)^p` is split off so that its contribution is the exact
/// power-law derivative and only the regular part enters the singular
/// integral.
fn left_derivative(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    let f = f.absorb_right()?;
    let p = f.left_exponent();
    if p <= -1.0 {
        return Err(Error::UnsupportedWeight(format!("left exponent {p} is not integrable")));
    }
    let n = f.n();
    let h = f.h();
    let g = f.regular();
    let moments = CellMoments::new(p, h, n, &[-alpha - 1.0, -alpha]);
    let slopes: Vec<f64> = g.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let out_exp = snap(p - alpha);
    let power_factor = gamma(p + 1.0) * rgamma(p + 1.0 - alpha);
    let scale = alpha * rgamma(1.0 - alpha);
    let regular = map_indices(Execution::Parallel, n + 1, |k| {
        if k == 0 {
            return g[0] * power_factor;
        }
        let mut acc = 0.0;
        for j in 0..k {
            let s = slopes[j];
            // g(t_k) - g(u) = A + s (t_k - u) on cell j; A vanishes on the last cell
            let a_j = if j + 1 == k {
                0.0
            } else {
                g[k] - (g[j] + s * ((k - j) as f64 * h))
            };
            if a_j != 0.0 {
                acc += a_j * moments.cell(0, j, k);
            }
            acc += s * moments.cell(1, j, k);
        }
        let tau = k as f64 * h;
        g[k] * power_factor + scale * acc / tau.powf(out_exp)
    });
    check_finite(&regular, "fractional derivative")?;
    GridFunction::weighted(f.a(), f.b(), regular, out_exp, 0.0)
}

/// `I^α f` on every grid node.
///
/// Right-sided operators are the reflections of the left-sided ones, so
/// `R I_{a+} = I_{b-} R` holds exactly.
pub fn fractional_integral(f: &GridFunction, spec: &DifferintegralSpec) -> Result<GridFunction> {
    if spec.kind != Kind::Integral {
        return Err(invalid("spec", "expected an integral spec"));
    }
    spec.validate()?;
    match spec.side {
        Side::LeftSided => left_integral(f, spec.alpha),
        Side::RightSided => Ok(left_integral(&f.reflect(), spec.alpha)?.reflect()),
    }
}

/// `D^α f` on every grid node, `0 < α < 1`. Endpoint nodes hold the
/// one-sided limit, which is infinite when the result blows up there.
pub fn fractional_derivative(f: &GridFunction, spec: &DifferintegralSpec) -> Result<GridFunction> {
    if spec.kind != Kind::Derivative {
        return Err(invalid("spec", "expected a derivative spec"));
    }
    spec.validate()?;
    match spec.side {
        Side::LeftSided => left_derivative(f, spec.alpha),
        Side::RightSided => Ok(left_derivative(&f.reflect(), spec.alpha)?.reflect()),
    }
}

/// The `m`-fold repeated integral `(1/(m-1)!) ∫_a^t (t-u)^{m-1} f(u) du`.
/// Shares its quadrature with [`fractional_integral`] at integer order.
pub fn cauchy_repeated_integral(f: &GridFunction, m: u32) -> Result<GridFunction> {
    if m < 1 {
        return Err(invalid("m", "repeated integral order must be at least 1"));
    }
    fractional_integral(f, &DifferintegralSpec::integral(f64::from(m), Side::LeftSided))
}

fn check_open_unit(name: &'static str, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{alpha} is outside (0, 1)")))
    }
}

/// Whole-line integral of `f` extended by zero outside `[a, b]`, evaluated at
/// arbitrary points.
///
/// `LeftSided` uses the kernel `(t - u)_+^{α-1}` and `RightSided` the kernel
/// `(u - t)_+^{α-1}`. The moving-average representation of fBm is written with
/// the second kernel.
pub fn whole_line_fractional_integral_at(
    f: &GridFunction,
    alpha: f64,
    side: Side,
    points: &[f64],
) -> Result<Vec<f64>> {
    check_open_unit("alpha", alpha)?;
    let f = f.to_plain()?;
    match side {
        Side::LeftSided => Ok(points.iter().map(|&t| whole_line_left(&f, alpha, t)).collect()),
        Side::RightSided => {
            let r = f.reflect();
            let (a, b) = (f.a(), f.b());
            Ok(points
                .iter()
                .map(|&t| whole_line_left(&r, alpha, a + b - t))
                .collect())
        }
    }
}

/// [`whole_line_fractional_integral_at`] on the grid of `f` itself.
pub fn whole_line_fractional_integral(
    f: &GridFunction,
    alpha: f64,
    side: Side,
) -> Result<GridFunction> {
    check_open_unit("alpha", alpha)?;
    let f = f.to_plain()?;
    let values = match side {
        Side::LeftSided => (0..=f.n()).map(|k| whole_line_left(&f, alpha, f.node(k))).collect(),
        Side::RightSided => {
            let r = f.reflect();
            let mut v: Vec<f64> = (0..=r.n()).map(|k| whole_line_left(&r, alpha, r.node(k))).collect();
            v.reverse();
            v
        }
    };
    GridFunction::new(f.a(), f.b(), values)
}

fn whole_line_left(f: &GridFunction, alpha: f64, t: f64) -> f64 {
    let a = f.a();
    if t <= a {
        return 0.0;
    }
    let upper = t.min(f.b());
    let g = f.regular();
    let h = f.h();
    let mut acc = 0.0;
    for j in 0..f.n() {
        let u0 = f.node(j);
        if u0 >= upper {
            break;
        }
        let u1 = f.node(j + 1).min(upper);
        let s = (g[j + 1] - g[j]) / h;
        let c = g[j] + s * (t - u0);
        let (x0, x1) = (t - u0, t - u1);
        acc += c * pow_diff(x0, x1, alpha) / alpha - s * pow_diff(x0, x1, alpha + 1.0) / (alpha + 1.0);
    }
    acc * rgamma(alpha)
}

/// The fractal integral `∫_a^b f dg` for `0 <= α <= 1`:
/// `-∫ D^α_{a+} f_{a+} · D^{1-α}_{b-} g_{b-} dx + f(a+) [g(b-) - g(a+)]`,
/// with `f_{a+} = f - f(a+)` and `g_{b-} = g - g(b-)` read off the first and
/// last samples. The leading minus sign comes from the right-sided derivative
/// carrying `-d/dx` at order one.
pub fn fractal_integral(f: &GridFunction, g: &GridFunction, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid("alpha", format!("{alpha} is outside [0, 1]")));
    }
    f.check_same_grid(g)?;
    let f = f.to_plain()?;
    let g = g.to_plain()?;
    let n = f.n();
    let fa = f.regular()[0];
    let (ga, gb) = (g.regular()[0], g.regular()[n]);
    let fv = f.regular();
    let gv = g.regular();
    let boundary = fa * (gb - ga);
    let body = if alpha == 0.0 {
        // D^0 is the identity and D^1_{b-} = -d/dx
        -(0..n)
            .map(|j| -0.5 * (fv[j] + fv[j + 1] - 2.0 * fa) * (gv[j + 1] - gv[j]))
            .sum::<f64>()
    } else if alpha == 1.0 {
        -(0..n)
            .map(|j| (fv[j + 1] - fv[j]) * 0.5 * (gv[j] + gv[j + 1] - 2.0 * gb))
            .sum::<f64>()
    } else {
        let f_a = f.map(|_, v| v - fa)?;
        let g_b = g.map(|_, v| v - gb)?;
        let df = fractional_derivative(&f_a, &DifferintegralSpec::derivative(alpha, Side::LeftSided))?;
        let dg = fractional_derivative(
            &g_b,
            &DifferintegralSpec::derivative(1.0 - alpha, Side::RightSided),
        )?;
        -df.product(&dg)?.integrate()?
    };
    let total = body + boundary;
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::NonFinite("fractal integral".into()))
    }
}
