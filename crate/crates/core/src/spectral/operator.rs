use crate::error::{Error, Result};
use crate::exec::Backend;
use crate::spectral::kernel::{check_rho, mehler, start_density_ratio};
use crate::spectral::quadrature::QuadratureRule;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Symmetrized Nystrom matrix `A[i][j] = m_rho(x_i, x_j) * sqrt(d_i d_j)`,
/// `d_i = w_i phi(x_i)`. Same nonzero spectrum as the plain Nystrom matrix
/// `K D`.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    rho: f64,
    dim: usize,
    /// Row-major.
    matrix: Vec<f64>,
    sqrt_density: Vec<f64>,
    rule: QuadratureRule,
    backend: Backend,
}

pub fn discretize(rho: f64, rule: &QuadratureRule) -> Result<DiscretizedOperator> {
    discretize_with(rho, rule, Backend::default())
}

pub fn discretize_with(
    rho: f64,
    rule: &QuadratureRule,
    backend: Backend,
) -> Result<DiscretizedOperator> {
    check_rho(rho)?;
    let dim = rule.len();
    let nodes = rule.nodes();
    let sqrt_density: Vec<f64> = rule.density_weights().iter().map(|d| d.sqrt()).collect();
    let mut matrix = vec![0.0; dim * dim];
    backend.fill(&mut matrix, |idx| {
        let (i, j) = (idx / dim, idx % dim);
        // sqrt_d[i] * sqrt_d[j] is commutative, so A[i][j] and A[j][i] agree bitwise.
        mehler(rho, nodes[i], nodes[j]) * (sqrt_density[i] * sqrt_density[j])
    });
    Ok(DiscretizedOperator {
        rho,
        dim,
        matrix,
        sqrt_density,
        rule: rule.clone(),
        backend,
    })
}

impl DiscretizedOperator {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    /// `sqrt(w_i phi(x_i))`.
    pub fn sqrt_density(&self) -> &[f64] {
        &self.sqrt_density
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// `out = A x`; rows are computed independently.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        self.backend
            .fill(out, |i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum());
    }

    /// Sum of squared entries, the discrete `int int m_rho^2 dgamma dgamma`.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.matrix.iter().map(|a| a * a).sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Perron root and unit eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda: f64,
    /// Unit Euclidean norm, positive components.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Power iteration with Rayleigh-quotient readout. Stops once successive
/// quotients differ by less than `tol`; otherwise fails with the last iterate
/// after `max_iter` steps.
pub fn perron_eigenpair(op: &DiscretizedOperator, tol: f64, max_iter: usize) -> Result<Eigenpair> {
    if !(tol > 0.0) {
        return Err(Error::invalid(
            "tol",
            format!("must be positive, got {tol}"),
        ));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be >= 1"));
    }
    // The rho = 0 eigenvector; strictly positive, so never orthogonal to the Perron vector.
    let mut v = op.sqrt_density().to_vec();
    normalize(&mut v);
    let mut w = vec![0.0; op.dim()];
    let mut previous = f64::NAN;
    let mut change = f64::INFINITY;
    for iteration in 1..=max_iter {
        op.apply(&v, &mut w);
        let rq = dot(&v, &w);
        std::mem::swap(&mut v, &mut w);
        normalize(&mut v);
        change = (rq - previous).abs();
        previous = rq;
        if change < tol {
            return Ok(Eigenpair {
                lambda: rq,
                vector: v,
                iterations: iteration,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        last_change: change,
        lambda: previous,
        vector: v,
    })
}

/// `P(X_0 >= 0, ..., X_N >= 0)` for `N = 0..=n_max`, by applying the
/// discretized operator `N` times to the constant one and integrating
/// against the start law `N(0, 1 - rho^2)` on `[0, inf)`.
pub fn persistence_curve(rho: f64, n_max: usize, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let op = discretize(rho, rule)?;
    // Work with u = D^{1/2} v so that v -> K D v becomes u -> A u.
    let sqrt_d = op.sqrt_density();
    let readout: Vec<f64> = rule
        .nodes()
        .iter()
        .zip(sqrt_d)
        .map(|(&x, s)| s * start_density_ratio(rho, x))
        .collect();
    let mut u = sqrt_d.to_vec();
    let mut next = vec![0.0; u.len()];
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(dot(&readout, &u));
    for _ in 0..n_max {
        op.apply(&u, &mut next);
        std::mem::swap(&mut u, &mut next);
        out.push(dot(&readout, &u));
    }
    Ok(out)
}

/// `P(X_0 >= 0, ..., X_N >= 0)` by operator powers.
pub fn persistence_by_power(rho: f64, n: usize, rule: &QuadratureRule) -> Result<f64> {
    Ok(*persistence_curve(rho, n, rule)?
        .last()
        .expect("curve has n + 1 entries"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_rule, default_rule};

    #[test]
    fn rho_zero_is_rank_one() {
        let rule = default_rule();
        let op = discretize(0.0, &rule).unwrap();
        let v = op.sqrt_density();
        for i in (0..op.dim()).step_by(7) {
            for j in (0..op.dim()).step_by(5) {
                assert_eq!(op.entry(i, j), v[i] * v[j]);
            }
        }
    }

    #[test]
    fn matrix_is_positive_and_exactly_symmetric() {
        let op = discretize(0.5, &default_rule()).unwrap();
        for i in 0..op.dim() {
            for j in 0..op.dim() {
                assert!(op.entry(i, j) > 0.0);
                assert_eq!(op.entry(i, j).to_bits(), op.entry(j, i).to_bits());
            }
        }
    }

    #[test]
    fn discretize_rejects_large_rho() {
        let rule = default_rule();
        assert!(matches!(
            discretize(0.99, &rule),
            Err(Error::RhoOutOfRange { .. })
        ));
        assert!(matches!(
            discretize(-1.0, &rule),
            Err(Error::RhoOutOfRange { .. })
        ));
        assert!(discretize(0.95, &rule).is_ok());
    }

    #[test]
    fn perron_at_rho_zero() {
        let op = discretize(0.0, &default_rule()).unwrap();
        let pair = perron_eigenpair(&op, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((pair.lambda - 0.5).abs() < 1e-10);
        let mut expected = op.sqrt_density().to_vec();
        normalize(&mut expected);
        for (a, b) in pair.vector.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn perron_root_in_unit_interval_and_vector_positive() {
        let rule = default_rule();
        for &rho in &[-0.9, -0.5, -0.1, 0.2, 0.6, 0.9] {
            let op = discretize(rho, &rule).unwrap();
            let pair = perron_eigenpair(&op, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
            assert!(
                pair.lambda > 0.0 && pair.lambda < 1.0,
                "rho={rho}: {}",
                pair.lambda
            );
            assert!(pair.vector.iter().all(|&x| x > 0.0), "rho={rho}");
            assert!(pair.lambda <= op.frobenius_norm_sq().sqrt());
        }
    }

    #[test]
    fn non_convergence_is_reported_with_last_iterate() {
        let op = discretize(0.9, &default_rule()).unwrap();
        match perron_eigenpair(&op, 1e-300, 3) {
            Err(Error::NotConverged {
                iterations, vector, ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(vector.len(), op.dim());
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
        assert!(perron_eigenpair(&op, 0.0, 10).is_err());
    }

    #[test]
    fn persistence_at_rho_zero_halves_each_step() {
        let rule = default_rule();
        let curve = persistence_curve(0.0, 20, &rule).unwrap();
        for (n, p) in curve.iter().enumerate() {
            assert!((p - 0.5f64.powi(n as i32 + 1)).abs() < 1e-10, "N={n}");
        }
    }

    #[test]
    fn persistence_is_nonincreasing_in_horizon() {
        let rule = build_rule(16, 8, 10.0).unwrap();
        for &rho in &[-0.7, 0.3, 0.8] {
            let curve = persistence_curve(rho, 40, &rule).unwrap();
            assert!(curve.iter().all(|&p| p > 0.0 && p <= 1.0));
            assert!(curve.windows(2).all(|w| w[1] <= w[0]), "rho={rho}");
        }
    }

    #[test]
    fn sequential_backend_matches() {
        let rule = default_rule();
        let a = discretize_with(0.4, &rule, Backend::Sequential).unwrap();
        let b = discretize_with(0.4, &rule, Backend::default()).unwrap();
        assert_eq!(a.matrix, b.matrix);
        let pa = perron_eigenpair(&a, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let pb = perron_eigenpair(&b, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(pa, pb);
    }
}
