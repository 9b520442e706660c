//! Nystrom discretization of the Mehler-kernel operator on `L^2([0, inf), gamma)`.
//!
//! `M_rho f(x) = int_0^inf f(y) m_rho(x, y) dgamma(y)` is discretized on a
//! truncated composite Gauss-Legendre rule, symmetrized as
//! `A = D^{1/2} K D^{1/2}` with `D = diag(w_i phi(x_i))`, and its Perron root
//! is extracted by power iteration. The same matrix drives finite-horizon
//! persistence probabilities through operator powers.

pub mod kernel;
mod operator;
mod quadrature;

pub use operator::{
    discretize, discretize_with, perron_eigenpair, persistence_by_power, persistence_curve,
    DiscretizedOperator, Eigenpair, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use quadrature::{build_rule, gauss_legendre, QuadratureRule};

/// Default grid: 16 Gauss-Legendre nodes on each of 8 panels over `[0, 10]`.
pub const DEFAULT_NODES_PER_PANEL: usize = 16;
pub const DEFAULT_PANELS: usize = 8;
pub const DEFAULT_LENGTH: f64 = 10.0;

/// Rule built from the default grid.
pub fn default_rule() -> QuadratureRule {
    build_rule(DEFAULT_NODES_PER_PANEL, DEFAULT_PANELS, DEFAULT_LENGTH)
        .expect("default grid parameters are valid")
}
