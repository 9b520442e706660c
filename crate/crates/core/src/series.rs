//! Exact perturbation series for the Perron root `lambda(rho) = sum K_n rho^n`.
//!
//! Writing the eigenfunction as `f = sum_k rho^k g_k` with
//! `g_k = sum_{j<=k} G[j][k] h_j` and expanding the Mehler kernel
//! `m_rho(x, y) = sum_n rho^n h_n(x) h_n(y) / n!`, matching the coefficient of
//! `rho^k h_j(x)` on both sides of the eigenvalue equation gives
//!
//! ```text
//! sum_{i=j}^{k} K[k-i] G[j][i] = sum_{i=0}^{k-j} G[i][k-j] psi(i, j),   0 <= j <= k,
//! ```
//!
//! with `psi(i, j) = (1/j!) int_0^inf h_i h_j dgamma`. The free scale of the
//! eigenfunction is fixed by `G[0][0] = 1` and `G[0][k] = 0` for `k >= 1`.
//! Under that normalization order `k` is solved in strict triangular order:
//! every `G[j][k]` with `j >= 1` depends only on earlier orders, and `K[k]`
//! then follows from the `j = 0` equation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{PiPolynomial, Rational};
use crate::exec::Backend;
use crate::hermite::{factorial_rational, half_moment, hermite_linearize, hermite_table};
use crate::spectral::{kernel, QuadratureRule};

/// `psi(i, j) = (1/j!) int_0^inf h_i h_j dgamma`, exactly.
pub fn psi(i: usize, j: usize) -> PiPolynomial {
    let mut sum = PiPolynomial::zero();
    for (degree, c) in hermite_linearize(i, j) {
        sum += &half_moment(degree).scale(&c);
    }
    sum.scale(&(Rational::one() / factorial_rational(j)))
}

/// Dense table of `psi(i, j)` for `0 <= i, j <= size - 1`.
#[derive(Debug, Clone)]
pub struct PsiTable {
    size: usize,
    entries: Vec<PiPolynomial>,
}

impl PsiTable {
    pub fn new(size: usize, backend: Backend) -> Self {
        let entries = backend.map_range(size * size, |idx| psi(idx / size, idx % size));
        Self { size, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &PiPolynomial {
        assert!(
            i < self.size && j < self.size,
            "psi({i}, {j}) outside table"
        );
        &self.entries[i * self.size + j]
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

/// Exact coefficients `K[0..=order]` and eigenfunction coefficients `G[j][k]`.
#[derive(Debug, Clone)]
pub struct SeriesExpansion {
    order: usize,
    k: Vec<PiPolynomial>,
    /// `g[j][k]`, zero for `j > k`.
    g: Vec<Vec<PiPolynomial>>,
    k_values: Vec<f64>,
}

/// Run the recursion up to `order` with the default backend.
pub fn expand(order: usize) -> SeriesExpansion {
    expand_with(order, Backend::default())
}

/// Run the recursion up to `order`. The `j` equations of a single order are
/// independent and are distributed over `backend`; orders run in sequence.
pub fn expand_with(order: usize, backend: Backend) -> SeriesExpansion {
    let n = order + 1;
    let psi_table = PsiTable::new(n, backend);
    let psi: Vec<ScaledPoly> = psi_table
        .entries
        .iter()
        .map(ScaledPoly::from_exact)
        .collect();
    let psi = |i: usize, j: usize| &psi[i * n + j];

    let zero = ScaledPoly::zero();
    let mut k: Vec<ScaledPoly> = Vec::with_capacity(n);
    // g[0] holds every order; g[j] for j >= 1 starts at order j.
    let mut g: Vec<Vec<ScaledPoly>> = vec![Vec::with_capacity(n); n];
    g[0].push(ScaledPoly::from_exact(&PiPolynomial::one()));
    for _ in 1..n {
        g[0].push(ScaledPoly::zero());
    }
    fn entry<'a>(
        g: &'a [Vec<ScaledPoly>],
        zero: &'a ScaledPoly,
        j: usize,
        kk: usize,
    ) -> &'a ScaledPoly {
        if j == 0 {
            &g[0][kk]
        } else if kk < j {
            zero
        } else {
            &g[j][kk - j]
        }
    }

    // K_0 = G[0][0] psi(0, 0).
    k.push(psi(0, 0).clone());
    let k0 = psi_table.get(0, 0).coeff(0);
    debug_assert!(psi_table.get(0, 0).len() == 1 && !k0.is_zero());

    for order_k in 1..n {
        let column: Vec<ScaledPoly> = backend.map_range(order_k, |idx| {
            let j = idx + 1;
            let lower = order_k - j;
            let mut acc = Accumulator::new();
            for i in 0..=lower {
                acc.add_product(entry(&g, &zero, i, lower), psi(i, j), false);
            }
            for i in j..order_k {
                acc.add_product(&k[order_k - i], entry(&g, &zero, j, i), true);
            }
            // Divide by K_0.
            acc.finish_scaled(k0.denom(), k0.numer())
        });
        for (idx, value) in column.into_iter().enumerate() {
            g[idx + 1].push(value);
        }
        let mut acc = Accumulator::new();
        for i in 1..=order_k {
            acc.add_product(entry(&g, &zero, i, order_k), psi(i, 0), false);
        }
        k.push(acc.finish_scaled(&BigInt::one(), &BigInt::one()));
    }

    let k: Vec<PiPolynomial> = k.iter().map(ScaledPoly::to_exact).collect();
    let g: Vec<Vec<PiPolynomial>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|kk| entry(&g, &zero, j, kk).to_exact())
                .collect()
        })
        .collect();
    let k_values = k.iter().map(PiPolynomial::eval).collect();
    SeriesExpansion {
        order,
        k,
        g,
        k_values,
    }
}

/// `sum num[e] s^e / den` with integer numerators: products and sums need no
/// gcd per term, only when denominators are merged.
#[derive(Debug, Clone)]
struct ScaledPoly {
    den: BigInt,
    num: Vec<BigInt>,
}

impl ScaledPoly {
    fn zero() -> Self {
        Self {
            den: BigInt::one(),
            num: Vec::new(),
        }
    }

    fn from_exact(p: &PiPolynomial) -> Self {
        let den = p
            .terms()
            .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let mut num = vec![BigInt::zero(); p.degree().map_or(0, |d| d as usize + 1)];
        for (e, c) in p.terms() {
            num[e as usize] = c.numer() * (&den / c.denom());
        }
        Self { den, num }
    }

    fn to_exact(&self) -> PiPolynomial {
        let mut out = PiPolynomial::zero();
        for (e, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                out +=
                    &PiPolynomial::monomial(e as u32, Rational::new(c.clone(), self.den.clone()));
            }
        }
        out
    }
}

struct Accumulator {
    den: BigInt,
    num: Vec<BigInt>,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            den: BigInt::one(),
            num: Vec::new(),
        }
    }

    fn add_product(&mut self, a: &ScaledPoly, b: &ScaledPoly, negate: bool) {
        if a.num.is_empty() || b.num.is_empty() {
            return;
        }
        let pden = &a.den * &b.den;
        let common = self.den.gcd(&pden);
        let self_scale = &pden / &common;
        let prod_scale = &self.den / &common;
        if !self_scale.is_one() {
            self.num.iter_mut().for_each(|c| *c *= &self_scale);
            self.den *= &self_scale;
        }
        let len = a.num.len() + b.num.len() - 1;
        if self.num.len() < len {
            self.num.resize(len, BigInt::zero());
        }
        for (ea, ca) in a.num.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            let ca = if prod_scale.is_one() {
                ca.clone()
            } else {
                ca * &prod_scale
            };
            for (eb, cb) in b.num.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let term = &ca * cb;
                if negate {
                    self.num[ea + eb] -= term;
                } else {
                    self.num[ea + eb] += term;
                }
            }
        }
    }

    /// Multiply by `mul / div` and reduce to lowest common terms.
    fn finish_scaled(mut self, mul: &BigInt, div: &BigInt) -> ScaledPoly {
        self.num.iter_mut().for_each(|c| *c *= mul);
        self.den *= div;
        if self.den.is_negative() {
            self.den = -self.den;
            self.num.iter_mut().for_each(|c| *c = -&*c);
        }
        while self.num.last().is_some_and(|c| c.is_zero()) {
            self.num.pop();
        }
        if self.num.is_empty() {
            return ScaledPoly::zero();
        }
        let content = self.num.iter().fold(self.den.clone(), |acc, c| acc.gcd(c));
        if !content.is_one() {
            self.num.iter_mut().for_each(|c| *c /= &content);
            self.den /= &content;
        }
        ScaledPoly {
            den: self.den,
            num: self.num,
        }
    }
}

impl SeriesExpansion {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Exact `K_n`.
    pub fn k(&self, n: usize) -> &PiPolynomial {
        &self.k[n]
    }

    pub fn coefficients(&self) -> &[PiPolynomial] {
        &self.k
    }

    /// `K_n` rounded to `f64`.
    pub fn k_values(&self) -> &[f64] {
        &self.k_values
    }

    /// Exact `G[j][k]`; zero whenever `j > k`.
    pub fn g(&self, j: usize, k: usize) -> &PiPolynomial {
        &self.g[j][k]
    }

    /// Truncated series `sum_{n <= truncation} K_n rho^n`.
    pub fn eval_lambda(&self, rho: f64, truncation: usize) -> Result<f64> {
        if !(rho.abs() < 1.0) {
            return Err(Error::RhoOutOfRange {
                rho,
                bound: "|rho| < 1 (lambda = 1 for rho >= 1, the series does not apply)",
            });
        }
        if truncation > self.order {
            return Err(Error::invalid(
                "truncation",
                format!("{truncation} exceeds the expansion order {}", self.order),
            ));
        }
        Ok(self.k_values[..=truncation]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * rho + c))
    }

    /// Root-test radius estimate from the trailing `window` coefficients.
    /// An estimate only: nothing here proves a radius of convergence.
    pub fn radius_estimate(&self, window: usize) -> Result<f64> {
        root_test_radius(&self.k_values, window)
    }

    /// Coefficients `c_i = sum_{j=i}^{truncation} rho^j G[i][j]` of the
    /// truncated eigenfunction `f = sum_i c_i h_i`.
    pub fn eigenfunction_coefficients(&self, rho: f64, truncation: usize) -> Result<Vec<f64>> {
        if truncation > self.order {
            return Err(Error::invalid(
                "truncation",
                format!("{truncation} exceeds the expansion order {}", self.order),
            ));
        }
        let mut coeffs = vec![0.0; truncation + 1];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let mut power = rho.powi(i as i32);
            for j in i..=truncation {
                let gij = &self.g[i][j];
                if !gij.is_zero() {
                    *c += power * gij.eval();
                }
                power *= rho;
            }
        }
        Ok(coeffs)
    }
}

/// Sum of `values[n] * rho^n` for `n <= truncation`; see
/// [`SeriesExpansion::eval_lambda`].
pub fn eval_lambda_series(series: &SeriesExpansion, rho: f64, truncation: usize) -> Result<f64> {
    series.eval_lambda(rho, truncation)
}

/// `1 / max |c_n|^(1/n)` over the last `window` indices, skipping zeros.
///
/// Needs `coeffs.len() - 1 >= 2 * window` and `window >= 4`.
pub fn root_test_radius(coeffs: &[f64], window: usize) -> Result<f64> {
    if window < 4 {
        return Err(Error::invalid("window", format!("{window} < 4")));
    }
    let order = coeffs.len().saturating_sub(1);
    if coeffs.is_empty() || order < 2 * window {
        return Err(Error::invalid(
            "window",
            format!(
                "window {window} needs order >= {}, have {order}",
                2 * window
            ),
        ));
    }
    let root_max = (order + 1 - window..=order)
        .filter(|&n| coeffs[n] != 0.0)
        .map(|n| coeffs[n].abs().powf(1.0 / n as f64))
        .fold(0.0_f64, f64::max);
    if root_max == 0.0 {
        return Err(Error::invalid(
            "window",
            "every coefficient in the window vanishes",
        ));
    }
    Ok(1.0 / root_max)
}

/// Convergence-radius lower bound `1 / (2a/d + c)` for a perturbation
/// `T(t) = T_0 + sum_{n>=1} t^n T_n` with `||T_n|| <= a c^(n-1)` around a
/// simple eigenvalue of a normal `T_0` isolated by distance `d`.
pub fn kato_radius_bound(a: &Rational, c: &Rational, d: &Rational) -> Result<Rational> {
    if !d.is_positive() {
        return Err(Error::invalid(
            "d",
            format!("spectral gap must be positive, got {d}"),
        ));
    }
    if a.is_negative() {
        return Err(Error::invalid("a", format!("must be nonnegative, got {a}")));
    }
    if c.is_negative() {
        return Err(Error::invalid("c", format!("must be nonnegative, got {c}")));
    }
    let denom = Rational::from_integer(2.into()) * a / d + c;
    if denom.is_zero() {
        return Err(Error::invalid(
            "a, c",
            "a = c = 0 gives an unbounded radius",
        ));
    }
    Ok(Rational::one() / denom)
}

/// `max_x |lambda f(x) - (M_rho f)(x)|` over `probes`, where `lambda` and `f`
/// are the series truncated at `truncation` and `M_rho` is applied with the
/// quadrature `rule`.
pub fn eigen_residual(
    series: &SeriesExpansion,
    rho: f64,
    truncation: usize,
    probes: &[f64],
    rule: &QuadratureRule,
) -> Result<f64> {
    kernel::check_rho(rho)?;
    if let Some(&bad) = probes.iter().find(|&&x| !(x >= 0.0)) {
        return Err(Error::invalid(
            "probes",
            format!("{bad} is not in [0, inf)"),
        ));
    }
    let lambda = series.eval_lambda(rho, truncation)?;
    let coeffs = series.eigenfunction_coefficients(rho, truncation)?;
    let f = |x: f64| -> f64 {
        hermite_table(truncation, x)
            .iter()
            .zip(&coeffs)
            .map(|(h, c)| h * c)
            .sum()
    };
    let weighted: Vec<f64> = rule
        .nodes()
        .iter()
        .zip(rule.density_weights())
        .map(|(&y, w)| w * f(y))
        .collect();
    let residual = probes
        .iter()
        .map(|&x| {
            let mf: f64 = rule
                .nodes()
                .iter()
                .zip(&weighted)
                .map(|(&y, wf)| kernel::mehler(rho, x, y) * wf)
                .sum();
            (lambda * f(x) - mf).abs()
        })
        .fold(0.0, f64::max);
    Ok(residual)
}
