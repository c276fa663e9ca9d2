//! Riemann-Liouville fractional integrals and derivatives of gridded
//! functions, the whole-line integrals and the fractal integral.
//!
//! Every operator is a product-integration rule: the regular part of the
//! input is interpolated linearly and integrated exactly against the
//! singular kernel, so no node ever evaluates `(t - u)^{α-1}` at `u = t`.

mod grid;
mod kernel;
mod ops;

pub use grid::GridFunction;
pub use ops::{
    cauchy_repeated_integral, fractal_integral, fractional_derivative, fractional_integral,
    whole_line_fractional_integral, whole_line_fractional_integral_at, DifferintegralSpec, Kind,
    Side,
};
