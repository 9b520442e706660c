//! Probabilists' Hermite polynomials `h_n`, orthogonal for `e^{-x^2/2}`.
//!
//! `h_0 = 1`, `h_1 = x`, `h_{n+1} = x h_n - n h_{n-1}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exact::{int, PiPolynomial, Rational};

/// `h_n(x)` by the three-term recurrence.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `h_0(x), ..., h_n(x)` in one pass.
pub fn hermite_table(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 1..n {
        let next = x * out[k] - k as f64 * out[k - 1];
        out.push(next);
    }
    out
}

/// `(2m - 1)!!`, with `(-1)!! = 1`.
fn double_factorial_odd(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, k| acc * BigInt::from(2 * k - 1))
}

fn factorial(n: usize) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    // Multiplicative form stays integral at every step.
    (0..k).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n - i) / BigInt::from(i + 1)
    })
}

/// `h_n(0)`: zero for odd `n`, `(-1)^m (2m-1)!!` for `n = 2m`.
pub fn hermite_at_zero(n: usize) -> Rational {
    if n % 2 == 1 {
        return Rational::zero();
    }
    let m = n / 2;
    let v = double_factorial_odd(m);
    int(if m.is_multiple_of(2) { v } else { -v })
}

/// Coefficients of `h_i h_j = sum_m C(i,m) C(j,m) m! h_{i+j-2m}`, keyed by degree.
pub fn hermite_linearize(i: usize, j: usize) -> BTreeMap<usize, Rational> {
    (0..=i.min(j))
        .map(|m| {
            let c = binomial(i, m) * binomial(j, m) * factorial(m);
            (i + j - 2 * m, int(c))
        })
        .collect()
}

/// Half-line moment `M_n = int_0^inf h_n dgamma`.
///
/// `M_0 = 1/2`; for `n >= 1`, `h_n e^{-x^2/2} = -(h_{n-1} e^{-x^2/2})'` gives
/// `M_n = h_{n-1}(0) * s`.
pub fn half_moment(n: usize) -> PiPolynomial {
    if n == 0 {
        PiPolynomial::constant(Rational::new(BigInt::one(), BigInt::from(2)))
    } else {
        PiPolynomial::monomial(1, hermite_at_zero(n - 1))
    }
}

/// `n!` as an exact rational.
pub(crate) fn factorial_rational(n: usize) -> Rational {
    int(factorial(n))
}
