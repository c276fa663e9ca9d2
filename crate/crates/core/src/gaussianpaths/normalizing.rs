use crate::error::{check_hurst, Result};
use crate::quad;

/// `(1 + x)^β - x^β` for `x > 0` without cancellation at large `x`.
pub(crate) fn kernel_gap(beta: f64, x: f64) -> f64 {
    if x < 1.0 {
        (1.0 + x).powf(beta) - x.powf(beta)
    } else {
        x.powf(beta) * (beta * (1.0 / x).ln_1p()).exp_m1()
    }
}

/// Same gap written in `z = 1 / x`, usable as `z -> 0`.
fn kernel_gap_inv(beta: f64, z: f64) -> f64 {
    z.powf(-beta) * (beta * z.ln_1p()).exp_m1()
}

/// `∫_0^∞ [(1 + x)^β - x^β]^2 dx` with `β = H - 1/2`.
///
/// Split at `x = 1`; the inner piece is substituted `x = y^{1/(2H)}` when
/// `β < 0` and the outer piece mapped to `z = 1/x = w^{1/(2-2H)}` so that
/// both integrands stay bounded at the ends.
pub(crate) fn kernel_square_integral(hurst: f64) -> f64 {
    let beta = hurst - 0.5;
    if beta == 0.0 {
        return 0.0;
    }
    let m = if beta < 0.0 { 1.0 / (2.0 * hurst) } else { 1.0 };
    let inner = quad::integrate(
        |y| {
            let x = y.powf(m);
            let d = kernel_gap(beta, x);
            d * d * m * y.powf(m - 1.0)
        },
        0.0,
        1.0,
        1e-15,
    );
    let k = if beta > 0.0 { 1.0 / (2.0 - 2.0 * hurst) } else { 1.0 };
    let outer = quad::integrate(
        |w| {
            let z = w.powf(k);
            let d = kernel_gap_inv(beta, z);
            // dx = z^{-2} dz, dz = k w^{k-1} dw
            d * d * k * w.powf(k - 1.0) / (z * z)
        },
        0.0,
        1.0,
        1e-15,
    );
    inner + outer
}

/// Normalizing constant `C(H)` of the moving-average representation:
/// `C(H)^2 = ∫_{-∞}^0 [(1 - s)^{H-1/2} - (-s)^{H-1/2}]^2 ds + 1/(2H)`.
pub fn normalizing_constant(hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    Ok((kernel_square_integral(hurst) + 0.5 / hurst).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_case_is_one() {
        assert_eq!(normalizing_constant(0.5).unwrap(), 1.0);
        assert!(normalizing_constant(0.0).is_err());
    }

    #[test]
    fn gap_forms_agree() {
        for &x in &[0.5, 1.0, 3.0, 100.0] {
            let a = kernel_gap(0.3, x);
            let b = kernel_gap_inv(0.3, 1.0 / x);
            assert!((a - b).abs() < 1e-14 * a.abs().max(1e-300));
        }
    }
}
