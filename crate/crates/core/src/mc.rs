//! Monte Carlo persistence probabilities for `X_n = rho X_{n-1} + xi_n`.
//!
//! Each path records the first index with `X_n < 0`; one pass therefore
//! yields the survival counts for every horizon `0..=n_max` at once.
//! Paths are split into batches, each driven by its own ChaCha8 stream
//! `(seed, stream = batch index)`, and batch histograms are summed in batch
//! order, so results do not depend on scheduling or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Backend;

/// Generator identity recorded in provenance output.
pub const GENERATOR: &str = "rand_chacha::ChaCha8Rng(seed_from_u64(seed), stream = batch index)";
/// Normal variate method recorded in provenance output.
pub const NORMAL_METHOD: &str = "ziggurat (rand_distr::StandardNormal)";
/// Minimum survivors at the top of a fit window.
pub const MIN_SURVIVORS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub rho: f64,
    /// Largest horizon `N`.
    pub n_max: usize,
    pub paths: u64,
    pub seed: u64,
    pub batches: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::RhoOutOfRange {
                rho: self.rho,
                bound: "-1 < rho < 1 (persistence exponent regime)",
            });
        }
        if self.n_max == 0 {
            return Err(Error::invalid("n_max", "must be >= 1"));
        }
        if self.paths == 0 {
            return Err(Error::invalid("paths", "must be >= 1"));
        }
        if self.batches == 0 {
            return Err(Error::invalid("batches", "must be >= 1"));
        }
        if !self.paths.is_multiple_of(self.batches) {
            return Err(Error::invalid(
                "batches",
                format!(
                    "{} paths are not divisible into {} batches",
                    self.paths, self.batches
                ),
            ));
        }
        Ok(())
    }

    pub fn paths_per_batch(&self) -> u64 {
        self.paths / self.batches
    }
}

/// First-failure histogram of one or more batches: `first_failure[n]` paths
/// went negative first at index `n`; `survived` paths never did up to `n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchCounts {
    pub first_failure: Vec<u64>,
    pub survived: u64,
}

impl BatchCounts {
    pub fn empty(n_max: usize) -> Self {
        Self {
            first_failure: vec![0; n_max + 1],
            survived: 0,
        }
    }

    pub fn merge(mut self, other: &BatchCounts) -> Self {
        assert_eq!(self.first_failure.len(), other.first_failure.len());
        for (a, b) in self.first_failure.iter_mut().zip(&other.first_failure) {
            *a += b;
        }
        self.survived += other.survived;
        self
    }

    pub fn total(&self) -> u64 {
        self.first_failure.iter().sum::<u64>() + self.survived
    }

    /// `survivors[N]`: paths whose first failure index exceeds `N`.
    pub fn survivors(&self) -> Vec<u64> {
        let mut remaining = self.total();
        self.first_failure
            .iter()
            .map(|&f| {
                remaining -= f;
                remaining
            })
            .collect()
    }
}

/// Simulate batch `batch` of `config`.
pub fn simulate_batch(config: &SimConfig, batch: u64) -> BatchCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(batch);
    let mut counts = BatchCounts::empty(config.n_max);
    'paths: for _ in 0..config.paths_per_batch() {
        let mut x: f64 = rng.sample(StandardNormal);
        for n in 0..=config.n_max {
            if n > 0 {
                let xi: f64 = rng.sample(StandardNormal);
                x = config.rho * x + xi;
            }
            if x < 0.0 {
                counts.first_failure[n] += 1;
                continue 'paths;
            }
        }
        counts.survived += 1;
    }
    counts
}

/// Survival counts and probabilities for horizons `0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceEstimate {
    pub survivors: Vec<u64>,
    pub p_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    pub config: SimConfig,
}

impl PersistenceEstimate {
    pub fn from_survivors(config: SimConfig, survivors: Vec<u64>) -> Self {
        let paths = config.paths as f64;
        let p_hat: Vec<f64> = survivors.iter().map(|&s| s as f64 / paths).collect();
        let stderr = p_hat
            .iter()
            .map(|p| (p * (1.0 - p) / paths).sqrt())
            .collect();
        Self {
            survivors,
            p_hat,
            stderr,
            config,
        }
    }
}

pub fn simulate(config: &SimConfig) -> Result<PersistenceEstimate> {
    simulate_with(config, Backend::default())
}

pub fn simulate_with(config: &SimConfig, backend: Backend) -> Result<PersistenceEstimate> {
    config.validate()?;
    let per_batch = backend.map_range(config.batches as usize, |b| {
        simulate_batch(config, b as u64)
    });
    let merged = per_batch
        .iter()
        .fold(BatchCounts::empty(config.n_max), BatchCounts::merge);
    Ok(PersistenceEstimate::from_survivors(
        *config,
        merged.survivors(),
    ))
}

/// Weighted least-squares line through `(N, log p_hat[N])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Estimate of `log lambda`.
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub n_lo: usize,
    pub n_hi: usize,
}

impl ExponentFit {
    pub fn lambda(&self) -> f64 {
        self.slope.exp()
    }
}

/// Fit `log p_hat[N] = a + b N` over `N in [n_lo, n_hi]` with weights
/// `paths * p / (1 - p)`, the inverse delta-method variance of `log p_hat`.
///
/// All horizons are estimated from the same paths, and the survival events
/// are nested, so `Cov(log p_hat[N], log p_hat[M]) = v[min(N, M)]` with
/// `v[N] = (1 - p[N]) / (paths * p[N])`. The slope error is the sampling
/// error of the weighted estimator under that covariance.
pub fn fit_exponent(est: &PersistenceEstimate, n_lo: usize, n_hi: usize) -> Result<ExponentFit> {
    let window_err = |reason: String| Error::FitWindow {
        lo: n_lo,
        hi: n_hi,
        reason,
    };
    if n_lo == 0 || n_lo >= n_hi {
        return Err(window_err("need 1 <= n_lo < n_hi".into()));
    }
    if n_hi >= est.p_hat.len() {
        return Err(window_err(format!(
            "n_hi exceeds n_max = {}",
            est.p_hat.len() - 1
        )));
    }
    if let Some(n) = (n_lo..=n_hi).find(|&n| est.survivors[n] == 0 || est.p_hat[n] <= 0.0) {
        return Err(window_err(format!("horizon {n} has no survivors")));
    }
    if est.survivors[n_hi] < MIN_SURVIVORS {
        return Err(window_err(format!(
            "only {} survivors at n_hi (need >= {MIN_SURVIVORS})",
            est.survivors[n_hi]
        )));
    }
    let paths = est.config.paths as f64;
    let mut points = Vec::with_capacity(n_hi - n_lo + 1);
    for n in n_lo..=n_hi {
        let p = est.p_hat[n];
        if p >= 1.0 {
            return Err(window_err(format!(
                "p_hat[{n}] = 1 carries no variance information"
            )));
        }
        points.push((n as f64, p.ln(), paths * p / (1.0 - p)));
    }
    let (slope, intercept, slope_weights) = weighted_line(&points);
    // v[min(N, M)] = 1 / w[min(N, M)]; points are in ascending N.
    let mut var = 0.0;
    for (a, (pa, ca)) in points.iter().zip(&slope_weights).enumerate() {
        var += ca * ca / pa.2;
        for cb in &slope_weights[a + 1..] {
            var += 2.0 * ca * cb / pa.2;
        }
    }
    Ok(ExponentFit {
        slope,
        slope_se: var.sqrt(),
        intercept,
        n_lo,
        n_hi,
    })
}

/// Weighted least squares through `(x, y, w)`: returns the slope, the
/// intercept and the linear weights `c` with `slope = sum c_i y_i`.
fn weighted_line(points: &[(f64, f64, f64)]) -> (f64, f64, Vec<f64>) {
    let sw: f64 = points.iter().map(|p| p.2).sum();
    let xbar = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ybar = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - xbar).powi(2)).sum();
    let coeffs: Vec<f64> = points.iter().map(|p| p.2 * (p.0 - xbar) / sxx).collect();
    let slope = coeffs.iter().zip(points).map(|(c, p)| c * p.1).sum();
    (slope, ybar - slope * xbar, coeffs)
}

/// Largest sub-window `[n_lo, hi]` of `[n_lo, n_hi]` whose top horizon keeps
/// at least [`MIN_SURVIVORS`] paths.
pub fn usable_fit_window(
    est: &PersistenceEstimate,
    n_lo: usize,
    n_hi: usize,
) -> Option<(usize, usize)> {
    let top = n_hi.min(est.survivors.len().checked_sub(1)?);
    (n_lo + 1..=top)
        .rev()
        .find(|&hi| est.survivors[hi] >= MIN_SURVIVORS)
        .map(|hi| (n_lo, hi))
}
