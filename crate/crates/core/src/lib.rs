//! Fractional calculus, Brownian and fractional Brownian path generation,
//! Itô integration and pathwise integration with respect to fBm, together
//! with the path statistics and experiment harness used to check them.

pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod fbmintegrate;
pub mod fraccalc;
pub mod gaussianpaths;
pub mod io;
pub mod itocalc;
pub mod par;
pub mod pathstats;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
