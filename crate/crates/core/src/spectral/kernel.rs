//! The Mehler kernel and the Gaussian densities around it.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest `|rho|` accepted by the discretized operator. Past this the kernel
/// exponent, which scales like `1 / (1 - rho^2)`, outruns the default grid.
pub const RHO_CAP: f64 = 0.95;

/// Reject `rho` outside `|rho| <= RHO_CAP`.
pub fn check_rho(rho: f64) -> Result<()> {
    if !(rho.abs() < 1.0) {
        return Err(Error::RhoOutOfRange {
            rho,
            bound: "-1 < rho < 1 (the operator is undefined otherwise)",
        });
    }
    if rho.abs() > RHO_CAP {
        return Err(Error::RhoOutOfRange {
            rho,
            bound: "|rho| <= 0.95 (cap of the Nystrom discretization)",
        });
    }
    Ok(())
}

/// Standard normal density.
pub fn gauss_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `m_rho(x, y) = (1-rho^2)^{-1/2} exp(-(rho^2 x^2 + rho^2 y^2 - 2 rho x y) / (2 (1-rho^2)))`.
///
/// Bitwise symmetric in `x` and `y`.
pub fn mehler(rho: f64, x: f64, y: f64) -> f64 {
    let one_minus = 1.0 - rho * rho;
    let quad = rho * rho * (x * x + y * y) - 2.0 * rho * (x * y);
    (-quad / (2.0 * one_minus)).exp() / one_minus.sqrt()
}

/// Density of `N(0, 1 - rho^2)` relative to the standard Gaussian.
pub fn start_density_ratio(rho: f64, x: f64) -> f64 {
    let one_minus = 1.0 - rho * rho;
    (-rho * rho * x * x / (2.0 * one_minus)).exp() / one_minus.sqrt()
}
