//! Oracles that share no code with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// `int_0^inf f dgamma`, truncated at 14.
pub fn half_line(f: impl Fn(f64) -> f64) -> f64 {
    simpson(|x| f(x) * phi(x), 0.0, 14.0, 40_000)
}

/// `int_R f dgamma`, truncated at +-14.
pub fn full_line(f: impl Fn(f64) -> f64) -> f64 {
    simpson(|x| f(x) * phi(x), -14.0, 14.0, 80_000)
}

/// Hermite polynomial from its explicit coefficient sum
/// `h_n(x) = n! sum_m (-1)^m x^{n-2m} / (m! (n-2m)! 2^m)`.
pub fn hermite_explicit(n: usize, x: f64) -> f64 {
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    (0..=n / 2)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * fact(n) * x.powi((n - 2 * m) as i32)
                / (fact(m) * fact(n - 2 * m) * 2f64.powi(m as i32))
        })
        .sum()
}

pub fn mehler(rho: f64, x: f64, y: f64) -> f64 {
    let c = 1.0 - rho * rho;
    (-(rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * c)).exp() / c.sqrt()
}

/// `int int m_rho^2 dgamma dgamma` over the quadrant by a tensor Simpson grid.
pub fn hilbert_schmidt_sq(rho: f64) -> f64 {
    let n = 1200;
    let (a, b) = (0.0, 12.0);
    let h = (b - a) / n as f64;
    let w = |k: usize| {
        if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut total = 0.0;
    for i in 0..=n {
        let x = a + i as f64 * h;
        let mut row = 0.0;
        for j in 0..=n {
            let y = a + j as f64 * h;
            row += w(j) * mehler(rho, x, y).powi(2) * phi(y);
        }
        total += w(i) * row * phi(x);
    }
    total * (h / 3.0) * (h / 3.0)
}

/// `1/4 + asin(r)/(2 pi)` with `r = 0.5 / sqrt(1.25)`, evaluated once by hand.
pub const ORTHANT_HALF: f64 = 0.323_791_808_825_216_6;
