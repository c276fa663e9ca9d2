//! Special functions and the weighted power-moment primitive that every
//! product-quadrature rule in the crate is built on.

/// Euler gamma function.
pub fn gamma(x: f64) -> f64 {
    if x > 0.0 && x == x.round() && x <= 171.0 {
        // exact factorials keep integer orders bit-reproducible
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    libm::tgamma(x)
}

/// Reciprocal gamma, continued through the poles (where it vanishes).
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Euler beta function for positive arguments.
pub fn beta(a: f64, b: f64) -> f64 {
    (libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)).exp()
}

/// `x^c - y^c` for `x > y >= 0` without cancellation.
pub fn pow_diff(x: f64, y: f64, c: f64) -> f64 {
    if y == 0.0 {
        return x.powf(c);
    }
    x.powf(c) * -(c * ((y - x) / x).ln_1p()).exp_m1()
}

/// Gauss-Legendre nodes and weights mapped onto [0, 1].
pub(crate) const GL8: [(f64, f64); 8] = {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    [
        (0.5 - 0.5 * X[3], 0.5 * W[3]),
        (0.5 - 0.5 * X[2], 0.5 * W[2]),
        (0.5 - 0.5 * X[1], 0.5 * W[1]),
        (0.5 - 0.5 * X[0], 0.5 * W[0]),
        (0.5 + 0.5 * X[0], 0.5 * W[0]),
        (0.5 + 0.5 * X[1], 0.5 * W[1]),
        (0.5 + 0.5 * X[2], 0.5 * W[2]),
        (0.5 + 0.5 * X[3], 0.5 * W[3]),
    ]
};

const SERIES_MAX_TERMS: usize = 600;

/// `∫_0^{y1} y^p (tau - y)^beta dy` for `y1 <= tau / 2`, by the binomial
/// series of `(1 - y/tau)^beta`.
fn left_series(p: f64, beta: f64, y1: f64, tau: f64) -> f64 {
    let x = y1 / tau;
    let mut coeff = 1.0;
    let mut xm = 1.0;
    let mut sum = 0.0;
    for m in 0..SERIES_MAX_TERMS {
        let mf = m as f64;
        let term = coeff * xm / (p + mf + 1.0);
        sum += term;
        if coeff == 0.0 || (m > 2 && term.abs() <= 1e-17 * sum.abs()) {
            break;
        }
        coeff *= (mf - beta) / (mf + 1.0);
        xm *= x;
    }
    tau.powf(beta) * y1.powf(p + 1.0) * sum
}

/// `∫_{y0}^{tau} y^p (tau - y)^beta dy` for `tau - y0 <= tau / 2`.
fn right_series(p: f64, beta: f64, y0: f64, tau: f64) -> f64 {
    let r = tau - y0;
    let x = r / tau;
    let mut coeff = 1.0;
    let mut xm = 1.0;
    let mut sum = 0.0;
    for m in 0..SERIES_MAX_TERMS {
        let mf = m as f64;
        let term = coeff * xm / (beta + mf + 1.0);
        sum += term;
        if coeff == 0.0 || (m > 2 && term.abs() <= 1e-17 * sum.abs()) {
            break;
        }
        coeff *= (mf - p) / (mf + 1.0);
        xm *= x;
    }
    tau.powf(p) * r.powf(beta + 1.0) * sum
}

fn is_smooth_exponent(e: f64) -> bool {
    e >= 0.0 && e == e.round()
}

fn gl_moment(p: f64, beta: f64, y0: f64, y1: f64, tau: f64, depth: u32) -> f64 {
    let width = y1 - y0;
    let mut dist = f64::INFINITY;
    if !is_smooth_exponent(p) {
        dist = dist.min(y0);
    }
    if !is_smooth_exponent(beta) {
        dist = dist.min(tau - y1);
    }
    if dist < width && depth < 64 {
        let mid = 0.5 * (y0 + y1);
        return gl_moment(p, beta, y0, mid, tau, depth + 1)
            + gl_moment(p, beta, mid, y1, tau, depth + 1);
    }
    GL8.iter()
        .map(|&(x, w)| {
            let y = y0 + x * width;
            w * y.powf(p) * (tau - y).powf(beta)
        })
        .sum::<f64>()
        * width
}

/// Weighted power moment `∫_{y0}^{y1} y^p (tau - y)^beta dy` with
/// `0 <= y0 <= y1 <= tau`.
///
/// Integrable endpoint singularities are handled analytically: a cell that
/// touches `y = 0` (needs `p > -1`) or `y = tau` (needs `beta > -1`) is summed
/// as a convergent binomial series, the full range is a beta function, and
/// interior cells use Gauss-Legendre, bisected until the nearest singular
/// point is at least one cell width away.
pub fn power_moment(p: f64, beta: f64, y0: f64, y1: f64, tau: f64) -> f64 {
    if y1 <= y0 {
        return 0.0;
    }
    let half = 0.5 * tau;
    if y0 == 0.0 && y1 >= tau {
        return tau.powf(p + beta + 1.0) * self::beta(p + 1.0, beta + 1.0);
    }
    if y0 == 0.0 {
        return if y1 <= half {
            left_series(p, beta, y1, tau)
        } else {
            left_series(p, beta, half, tau) + power_moment(p, beta, half, y1, tau)
        };
    }
    if y1 >= tau {
        return if y0 >= half {
            right_series(p, beta, y0, tau)
        } else {
            power_moment(p, beta, y0, half, tau) + right_series(p, beta, half, tau)
        };
    }
    gl_moment(p, beta, y0, y1, tau, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(1.0), 1.0);
        assert_eq!(gamma(5.0), 24.0);
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-2.0), 0.0);
    }

    #[test]
    fn full_range_is_beta() {
        let v = power_moment(0.5, -0.5, 0.0, 2.0, 2.0);
        // 2^{1} B(1.5, 0.5) = 2 * pi / 2
        assert!((v - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn singular_cells_against_substituted_simpson() {
        // y^{-1/2} (1 - y)^{-3/2} on [0, 0.25]: substitute y = s^2
        let exact = simpson(|s| 2.0 * (1.0 - s * s).powf(-1.5), 0.0, 0.5, 2000);
        let v = power_moment(-0.5, -1.5, 0.0, 0.25, 1.0);
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");

        // y^{0.3} (1 - y)^{-0.7} on [0.8, 1]: substitute 1 - y = s^{1/0.3}
        let k = 1.0 / 0.3;
        let exact = simpson(
            |s| k * (1.0 - s.powf(k)).powf(0.3),
            0.0,
            0.2f64.powf(0.3),
            4000,
        );
        let v = power_moment(0.3, -0.7, 0.8, 1.0, 1.0);
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn interior_cell_matches_fine_simpson() {
        let exact = simpson(|y| y.powf(-0.4) * (3.0 - y).powf(-1.2), 0.5, 0.75, 4000);
        let v = power_moment(-0.4, -1.2, 0.5, 0.75, 3.0);
        assert!((v - exact).abs() < 1e-13 * exact.abs().max(1.0));
    }

    #[test]
    fn split_ranges_add_up() {
        let whole = power_moment(-0.3, 0.6, 0.0, 1.0, 1.0);
        let parts: f64 = (0..10)
            .map(|i| power_moment(-0.3, 0.6, i as f64 / 10.0, (i + 1) as f64 / 10.0, 1.0))
            .sum();
        assert!((whole - parts).abs() < 1e-13);
    }
}
