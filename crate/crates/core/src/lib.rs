//! Persistence exponents of Gaussian AR(1) processes.
//!
//! For `X_n = rho * X_{n-1} + xi_n` with standard normal `X_0` and innovations,
//! the probability `P(X_0 >= 0, ..., X_N >= 0)` decays like `lambda^N`, where
//! `lambda` is the Perron root of the Mehler-kernel operator restricted to the
//! half line. This crate computes `lambda` three independent ways:
//!
//! * [`series`]: the exact power series `lambda = sum K_n rho^n`, with every
//!   `K_n` an exact polynomial in `1/pi` ([`exact::PiPolynomial`]).
//! * [`spectral`]: a Nystrom discretization of the operator on a composite
//!   Gauss-Legendre grid, solved by power iteration.
//! * [`mc`]: direct simulation of the process with survival counting and a
//!   weighted log-linear fit.
//!
//! Data-parallel loops go through [`exec::Backend`]; with the `parallel`
//! feature (default) they run on rayon, otherwise sequentially.

// `!(x < y)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod exec;
pub mod hermite;
pub mod mc;
pub mod series;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};
pub use exact::{PiPolynomial, Rational};
pub use exec::Backend;
pub use mc::{fit_exponent, simulate, PersistenceEstimate, SimConfig};
pub use series::{expand, kato_radius_bound, psi, SeriesExpansion};
pub use spectral::{
    build_rule, discretize, perron_eigenpair, persistence_by_power, DiscretizedOperator,
    QuadratureRule,
};
