//! Acceptance checks, shared by the `validate` subcommand and the acceptance
//! test target.
//!
//! Each check returns a [`Check`] recording what was measured, what was
//! required and how long it took.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::exact::{rat, PiPolynomial, Rational};
use crate::mc::{fit_exponent, simulate, usable_fit_window, SimConfig};
use crate::series::{expand, kato_radius_bound, psi};
use crate::spectral::{
    build_rule, default_rule, discretize, perron_eigenpair, persistence_curve, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};

/// `K_0..K_8` as `(pi exponent, numerator, denominator)` triples.
const REFERENCE_K: [&[(u32, i64, i64)]; 9] = [
    &[(0, 1, 2)],
    &[(1, 1, 1)],
    &[(1, 1, 1), (2, -2, 1)],
    &[(1, 7, 6), (2, -6, 1), (3, 8, 1)],
    &[(1, 1, 1), (2, -35, 3), (3, 40, 1), (4, -40, 1)],
    &[
        (1, 43, 40),
        (2, -19, 1),
        (3, 116, 1),
        (4, -280, 1),
        (5, 224, 1),
    ],
    &[
        (1, 7, 6),
        (2, -5149, 180),
        (3, 790, 3),
        (4, -3260, 3),
        (5, 2016, 1),
        (6, -1344, 1),
    ],
    &[
        (1, 117, 112),
        (2, -799, 20),
        (3, 7762, 15),
        (4, -3164, 1),
        (5, 29456, 3),
        (6, -14784, 1),
        (7, 8448, 1),
    ],
    &[
        (1, 1, 1),
        (2, -8843, 168),
        (3, 16541, 18),
        (4, -23147, 3),
        (5, 34944, 1),
        (6, -86688, 1),
        (7, 109824, 1),
        (8, -54912, 1),
    ],
];

/// The reference `K_n`, `n <= 8`, as exact values.
pub fn reference_coefficients() -> Vec<PiPolynomial> {
    REFERENCE_K
        .iter()
        .map(|terms| {
            let map: BTreeMap<u32, Rational> =
                terms.iter().map(|&(e, p, q)| (e, rat(p, q))).collect();
            PiPolynomial::from_pi_form(&map)
        })
        .collect()
}

/// `P(X_0 >= 0, X_1 >= 0)` for `rho = 0.5`: a bivariate orthant probability
/// with correlation `rho / sqrt(1 + rho^2)`.
pub fn orthant_oracle(rho: f64) -> f64 {
    0.25 + (rho / (1.0 + rho * rho).sqrt()).asin() / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fast,
    Full,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Fast => "fast",
            Suite::Full => "full",
        }
    }

    /// Paths per Monte Carlo run.
    pub fn mc_paths(self) -> u64 {
        match self {
            Suite::Fast => 1_000_000,
            Suite::Full => 10_000_000,
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            other => Err(format!("unknown suite {other:?} (expected fast or full)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: u32,
    pub name: String,
    /// The quantity compared against `required`.
    pub measured: f64,
    pub required: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "[{}] {}. {}: measured {:e}, required {} ({:.2} s){}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.required,
            self.seconds,
            if self.detail.is_empty() {
                String::new()
            } else {
                format!("; {}", self.detail)
            }
        )
    }
}

fn timed(
    id: u32,
    name: &str,
    required: &str,
    time_limit: Option<f64>,
    body: impl FnOnce() -> Result<(f64, bool, String)>,
) -> Check {
    let start = Instant::now();
    let outcome = body();
    let seconds = start.elapsed().as_secs_f64();
    let (measured, mut passed, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (f64::NAN, false, format!("error: {e}")),
    };
    if let Some(limit) = time_limit {
        if seconds > limit {
            passed = false;
            detail = format!("{detail} exceeded time limit of {limit} s")
                .trim()
                .to_string();
        }
    }
    Check {
        id,
        name: name.to_string(),
        measured,
        required: required.to_string(),
        passed,
        detail,
        seconds,
    }
}

/// Exact reproduction of the reference `K_0..K_8`.
pub fn check_coefficients() -> Check {
    timed(
        1,
        "exact coefficients K0..K8",
        "0 mismatches, < 1 s",
        Some(1.0),
        || {
            let series = expand(8);
            let reference = reference_coefficients();
            let bad: Vec<String> = (0..=8)
                .filter(|&n| series.k(n) != &reference[n])
                .map(|n| format!("K{n} = {}", series.k(n)))
                .collect();
            Ok((bad.len() as f64, bad.is_empty(), bad.join("; ")))
        },
    )
}

/// Kato bound with `a = 1/2`, `c = 1`, `d = 1/2`.
pub fn check_kato_bound() -> Check {
    timed(2, "Kato radius bound", "exactly 1/3", None, || {
        let r = kato_radius_bound(&rat(1, 2), &rat(1, 1), &rat(1, 2))?;
        let ok = r == rat(1, 3);
        Ok((
            num_traits::ToPrimitive::to_f64(&r).unwrap_or(f64::NAN),
            ok,
            format!("r = {r}"),
        ))
    })
}

/// At `rho = 0` every route gives `lambda = 1/2` and `P(N) = 2^-(N+1)`.
pub fn check_rho_zero() -> Check {
    timed(
        3,
        "rho = 0 ground truth",
        "max error < 1e-10, < 1 s",
        Some(1.0),
        || {
            let series = expand(8).eval_lambda(0.0, 8)?;
            let op = discretize(0.0, &default_rule())?;
            let nystrom = perron_eigenpair(&op, DEFAULT_TOL, DEFAULT_MAX_ITER)?.lambda;
            let curve = persistence_curve(0.0, 20, &default_rule())?;
            let curve_err = curve
                .iter()
                .enumerate()
                .map(|(n, p)| (p - 0.5f64.powi(n as i32 + 1)).abs())
                .fold(0.0, f64::max);
            let err = (series - 0.5)
                .abs()
                .max((nystrom - 0.5).abs())
                .max(curve_err);
            Ok((
                err,
                err < 1e-10,
                format!("series {series}, nystrom {nystrom}, persistence max error {curve_err:e}"),
            ))
        },
    )
}

/// Series of order 40 against the Nystrom Perron root.
pub fn check_cross_method() -> Check {
    timed(
        4,
        "series vs Nystrom eigenvalue",
        "max |diff| < 1e-8, < 5 s",
        Some(5.0),
        || {
            let series = expand(40);
            let rule = default_rule();
            let mut worst = 0.0f64;
            let mut parts = Vec::new();
            for rho in [-0.3, -0.2, -0.1, 0.1, 0.2, 0.3] {
                let s = series.eval_lambda(rho, 40)?;
                let n = perron_eigenpair(&discretize(rho, &rule)?, DEFAULT_TOL, DEFAULT_MAX_ITER)?
                    .lambda;
                worst = worst.max((s - n).abs());
                parts.push(format!("rho {rho}: {s:.15}"));
            }
            Ok((worst, worst < 1e-8, parts.join(", ")))
        },
    )
}

/// Two-step persistence at `rho = 0.5` against the orthant formula.
pub fn check_orthant() -> Check {
    timed(
        5,
        "orthant probability at rho = 0.5",
        "|error| < 1e-8, < 1 s",
        Some(1.0),
        || {
            let p = persistence_curve(0.5, 1, &default_rule())?[1];
            let oracle = orthant_oracle(0.5);
            let err = (p - oracle).abs();
            Ok((
                err,
                err < 1e-8,
                format!("power {p:.15}, closed form {oracle:.15}"),
            ))
        },
    )
}

pub const MC_SEED: u64 = 20_240_601;
pub const MC_BATCHES: u64 = 100;
pub const MC_WINDOW: (usize, usize) = (10, 30);

/// Monte Carlo slope against `log lambda` for `rho` in {0, 0.3, 0.5}.
pub fn check_monte_carlo(paths: u64) -> Check {
    let required = format!("max |z| <= 3 at {paths} paths, < 180 s per rho");
    timed(
        6,
        "Monte Carlo slope vs log lambda",
        &required,
        Some(540.0),
        || {
            let rule = default_rule();
            let mut worst = 0.0f64;
            let mut parts = Vec::new();
            for rho in [0.0, 0.3, 0.5] {
                let config = SimConfig {
                    rho,
                    n_max: MC_WINDOW.1,
                    paths,
                    seed: MC_SEED,
                    batches: MC_BATCHES,
                };
                let est = simulate(&config)?;
                let (lo, hi) =
                    usable_fit_window(&est, MC_WINDOW.0, MC_WINDOW.1).ok_or_else(|| {
                        crate::Error::FitWindow {
                            lo: MC_WINDOW.0,
                            hi: MC_WINDOW.1,
                            reason: format!("fewer than two usable horizons at rho = {rho}"),
                        }
                    })?;
                let fit = fit_exponent(&est, lo, hi)?;
                let log_lambda =
                    perron_eigenpair(&discretize(rho, &rule)?, DEFAULT_TOL, DEFAULT_MAX_ITER)?
                        .lambda
                        .ln();
                let z = (fit.slope - log_lambda) / fit.slope_se;
                worst = worst.max(z.abs());
                parts.push(format!(
                "rho {rho}: window [{lo},{hi}] slope {:.5} +- {:.5}, log lambda {log_lambda:.5}, z {z:.2}",
                fit.slope, fit.slope_se
            ));
                if rho == 0.0 {
                    let z2 = (fit.slope + 2f64.ln()) / fit.slope_se;
                    worst = worst.max(z2.abs());
                }
            }
            Ok((worst, worst <= 3.0, parts.join("; ")))
        },
    )
}

/// Squared Frobenius norm: `1/4` at `rho = 0`, grid-stable at `rho = 0.5`.
pub fn check_hilbert_schmidt() -> Check {
    timed(
        7,
        "Hilbert-Schmidt norm",
        "|F^2 - 1/4| < 1e-10 and node-doubling change < 1%",
        None,
        || {
            let f0 = discretize(0.0, &default_rule())?.frobenius_norm_sq();
            let coarse = discretize(0.5, &build_rule(16, 8, 10.0)?)?.frobenius_norm_sq();
            let fine = discretize(0.5, &build_rule(32, 8, 10.0)?)?.frobenius_norm_sq();
            let err0 = (f0 - 0.25).abs();
            let change = (fine - coarse).abs() / coarse;
            Ok((
            err0.max(change),
            err0 < 1e-10 && change < 0.01 && fine.is_finite(),
            format!("rho 0: {f0:.15}; rho 0.5: {coarse:.12} -> {fine:.12} (relative change {change:e})"),
        ))
        },
    )
}

/// Parity structure of `expand(40)` and the symmetry of `psi`.
pub fn check_structure() -> Check {
    timed(
        8,
        "parity and psi symmetry",
        "0 violations, < 30 s",
        Some(30.0),
        || {
            let series = expand(40);
            let mut violations = Vec::new();
            for n in 0..=40 {
                if series.k(n).pi_form().is_none() {
                    violations.push(format!("K{n} has odd s-powers"));
                }
            }
            for k in 0..=40 {
                for j in 0..=k {
                    let g = series.g(j, k);
                    if !g.is_zero() && g.parity() != Some((j % 2) as u32) {
                        violations.push(format!("G{j},{k} parity"));
                    }
                }
            }
            let fact =
                |n: usize| -> Rational { (1..=n as i64).fold(rat(1, 1), |acc, k| acc * rat(k, 1)) };
            for i in 0..=15 {
                for j in 0..=15 {
                    if psi(i, j).scale(&fact(j)) != psi(j, i).scale(&fact(i)) {
                        violations.push(format!("psi({i},{j}) symmetry"));
                    }
                }
            }
            Ok((
                violations.len() as f64,
                violations.is_empty(),
                violations.join("; "),
            ))
        },
    )
}

pub const RADIUS_ORDER: usize = 60;
pub const RADIUS_WINDOW: usize = 20;

/// Root-test radius estimate from the highest coefficients.
pub fn check_radius() -> Check {
    timed(
        9,
        "empirical radius estimate",
        "1/3 < estimate <= 1.1",
        None,
        || {
            let series = expand(RADIUS_ORDER);
            let r = series.radius_estimate(RADIUS_WINDOW)?;
            let min_root = (RADIUS_ORDER - RADIUS_WINDOW..=RADIUS_ORDER)
                .map(|n| series.k_values()[n].abs().powf(-1.0 / n as f64))
                .fold(f64::INFINITY, f64::min);
            Ok((
            r,
            r > 1.0 / 3.0 && r <= 1.1,
            format!(
                "ESTIMATE from K_{}..K_{RADIUS_ORDER}; smallest |K_n|^(-1/n) over n = {}..{RADIUS_ORDER} is {min_root:.4}",
                RADIUS_ORDER + 1 - RADIUS_WINDOW,
                RADIUS_ORDER - RADIUS_WINDOW
            ),
        ))
        },
    )
}

/// All checks in order. The suites differ only in Monte Carlo path count.
pub fn run_suite(suite: Suite) -> Vec<Check> {
    vec![
        check_coefficients(),
        check_kato_bound(),
        check_rho_zero(),
        check_cross_method(),
        check_orthant(),
        check_monte_carlo(suite.mc_paths()),
        check_hilbert_schmidt(),
        check_structure(),
        check_radius(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthant_value() {
        assert!((orthant_oracle(0.5) - 0.323_791_808_825_216_6).abs() < 1e-15);
        assert_eq!(orthant_oracle(0.0), 0.25);
    }

    #[test]
    fn reference_renders() {
        let k = reference_coefficients();
        assert_eq!(k[2].to_string(), "1/pi - 2/pi^2");
        assert_eq!(k[0].to_string(), "1/2");
    }

    #[test]
    fn suite_parsing() {
        assert_eq!("fast".parse::<Suite>(), Ok(Suite::Fast));
        assert!("bogus".parse::<Suite>().is_err());
    }
}
