//! Exact arithmetic in `Q[s]`, where `s = (2*pi)^(-1/2)`.
//!
//! The half-line Gaussian moments of Hermite polynomials are rational
//! multiples of `1` or `s`, so every quantity the perturbation recursion
//! touches lives in this ring. `s` is treated as transcendental: powers of
//! `s` are never related to each other, and `s^(2m) = 2^(-m) pi^(-m)` is only
//! used when rendering.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Shorthand for the rational `num/den`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integer-valued rational.
pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

// 1/sqrt(2*pi) to 155 significant digits (about 515 bits).
const INV_SQRT_2PI: &str = "0.39894228040143267793994605993438186847585863116493465766592582967065792589930183850125233390730693643030255886263518268551099195455583724299621273062550771";

/// Fixed-point precision used by [`PiPolynomial::eval`].
const EVAL_BITS: usize = 480;

/// `floor(s * 2^EVAL_BITS)`.
fn s_fixed() -> &'static BigInt {
    static S: OnceLock<BigInt> = OnceLock::new();
    S.get_or_init(|| {
        let digits = INV_SQRT_2PI.trim_start_matches("0.");
        let num: BigInt = digits.parse().expect("valid digit string");
        let den = num_traits::pow(BigInt::from(10), digits.len());
        (num << EVAL_BITS) / den
    })
}

/// `x / 2^frac_bits` rounded to `f64`.
fn fixed_to_f64(x: &BigInt, frac_bits: usize) -> f64 {
    let bits = x.bits() as i64;
    if bits == 0 {
        return 0.0;
    }
    // Keep 62 significant bits, then scale by a power of two.
    let shift = (bits - 62).max(0);
    let mantissa = (x >> shift as usize).to_f64().unwrap_or(f64::NAN);
    mantissa * 2f64.powi((shift - frac_bits as i64) as i32)
}

/// Element of `Q[s]`, stored sparsely as exponent -> nonzero coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PiPolynomial {
    coeffs: BTreeMap<u32, Rational>,
}

impl PiPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, c)
    }

    /// The distinguished symbol `s = (2*pi)^(-1/2)`.
    pub fn s() -> Self {
        Self::monomial(1, Rational::one())
    }

    /// `c * s^exp`.
    pub fn monomial(exp: u32, c: Rational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(exp, c);
        }
        Self { coeffs }
    }

    /// Build from a `pi`-form map `m -> q_m` meaning `sum q_m * pi^(-m)`.
    pub fn from_pi_form(terms: &BTreeMap<u32, Rational>) -> Self {
        let mut out = Self::zero();
        for (&m, q) in terms {
            // pi^(-m) = 2^m s^(2m)
            let scale = int(num_traits::pow(BigInt::from(2), m as usize));
            out.add_term(2 * m, q * scale);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: u32) -> Rational {
        self.coeffs
            .get(&exp)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Common parity (0 or 1) of all exponents, or `None` if mixed.
    /// The zero polynomial has every parity; it reports `None` as well, so
    /// callers checking structure should test [`is_zero`](Self::is_zero) first.
    pub fn parity(&self) -> Option<u32> {
        let mut it = self.coeffs.keys().map(|e| e % 2);
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    fn add_term(&mut self, exp: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += a * b`, without materialising the product.
    pub fn add_product(&mut self, a: &PiPolynomial, b: &PiPolynomial) {
        for (ea, ca) in &a.coeffs {
            for (eb, cb) in &b.coeffs {
                self.add_term(ea + eb, ca * cb);
            }
        }
    }

    /// `self -= a * b`.
    pub fn sub_product(&mut self, a: &PiPolynomial, b: &PiPolynomial) {
        for (ea, ca) in &a.coeffs {
            for (eb, cb) in &b.coeffs {
                self.add_term(ea + eb, -(ca * cb));
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> PiPolynomial {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(&e, q)| (e, q * c)).collect(),
        }
    }

    /// Floating-point value. Each term is formed in 480-bit fixed point
    /// and the sum is rounded once, so cancellation between large
    /// coefficients costs nothing.
    pub fn eval(&self) -> f64 {
        let Some(deg) = self.degree() else {
            return 0.0;
        };
        let s = s_fixed();
        let mut pow = BigInt::one() << EVAL_BITS;
        let mut acc = BigInt::zero();
        for e in 0..=deg {
            if e > 0 {
                pow = (&pow * s) >> EVAL_BITS;
            }
            if let Some(c) = self.coeffs.get(&e) {
                acc += (c.numer() * &pow) / c.denom();
            }
        }
        fixed_to_f64(&acc, EVAL_BITS)
    }

    /// Floating-point evaluation by direct summation in `f64`, for comparison
    /// with [`eval`](Self::eval).
    pub fn eval_f64(&self) -> f64 {
        let s = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        self.coeffs
            .iter()
            .map(|(&e, c)| c.to_f64().unwrap_or(f64::NAN) * s.powi(e as i32))
            .sum()
    }

    /// Rewrite as `sum q_m * pi^(-m)` if every exponent is even.
    pub fn pi_form(&self) -> Option<BTreeMap<u32, Rational>> {
        let mut out = BTreeMap::new();
        for (&e, c) in &self.coeffs {
            if e % 2 != 0 {
                return None;
            }
            let m = e / 2;
            // s^(2m) = (2 pi)^(-m)
            let scale = Rational::new(BigInt::one(), num_traits::pow(BigInt::from(2), m as usize));
            out.insert(m, c * scale);
        }
        Some(out)
    }

    /// Canonical `pi`-form text, e.g. `1/pi - 2/pi^2`, ascending in the power of `pi`.
    pub fn render_pi(&self) -> Option<String> {
        let form = self.pi_form()?;
        Some(render_terms(form.iter().map(|(&m, q)| (q, pi_factor(m)))))
    }

    /// Canonical `s`-form text, e.g. `1/2 + 2*s`.
    pub fn render_s(&self) -> String {
        render_terms(self.coeffs.iter().map(|(&e, q)| (q, s_factor(e))))
    }
}

enum Factor {
    Unit,
    /// Goes in the denominator, e.g. `pi^2`.
    Below(String),
    /// Multiplies the coefficient, e.g. `s^3`.
    Times(String),
}

fn pi_factor(m: u32) -> Factor {
    match m {
        0 => Factor::Unit,
        1 => Factor::Below("pi".into()),
        _ => Factor::Below(format!("pi^{m}")),
    }
}

fn s_factor(e: u32) -> Factor {
    match e {
        0 => Factor::Unit,
        1 => Factor::Times("s".into()),
        _ => Factor::Times(format!("s^{e}")),
    }
}

fn render_magnitude(q: &Rational, factor: Factor) -> String {
    let num = q.numer().abs();
    let den = q.denom();
    let unit_den = den.is_one();
    match factor {
        Factor::Unit if unit_den => format!("{num}"),
        Factor::Unit => format!("{num}/{den}"),
        Factor::Below(f) if unit_den => format!("{num}/{f}"),
        Factor::Below(f) => format!("{num}/({den}*{f})"),
        Factor::Times(f) if num.is_one() && unit_den => f,
        Factor::Times(f) if unit_den => format!("{num}*{f}"),
        Factor::Times(f) => format!("{num}/{den}*{f}"),
    }
}

fn render_terms<'a>(terms: impl Iterator<Item = (&'a Rational, Factor)>) -> String {
    let mut out = String::new();
    for (q, factor) in terms {
        let negative = q.is_negative();
        let body = render_magnitude(q, factor);
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for PiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.render_pi() {
            Some(text) => f.write_str(&text),
            None => f.write_str(&self.render_s()),
        }
    }
}

impl From<Rational> for PiPolynomial {
    fn from(c: Rational) -> Self {
        Self::constant(c)
    }
}

impl Add<&PiPolynomial> for &PiPolynomial {
    type Output = PiPolynomial;
    fn add(self, rhs: &PiPolynomial) -> PiPolynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for PiPolynomial {
    type Output = PiPolynomial;
    fn add(mut self, rhs: PiPolynomial) -> PiPolynomial {
        self += &rhs;
        self
    }
}

impl AddAssign<&PiPolynomial> for PiPolynomial {
    fn add_assign(&mut self, rhs: &PiPolynomial) {
        for (&e, c) in &rhs.coeffs {
            self.add_term(e, c.clone());
        }
    }
}

impl SubAssign<&PiPolynomial> for PiPolynomial {
    fn sub_assign(&mut self, rhs: &PiPolynomial) {
        for (&e, c) in &rhs.coeffs {
            self.add_term(e, -c.clone());
        }
    }
}

impl Sub<&PiPolynomial> for &PiPolynomial {
    type Output = PiPolynomial;
    fn sub(self, rhs: &PiPolynomial) -> PiPolynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for PiPolynomial {
    type Output = PiPolynomial;
    fn sub(mut self, rhs: PiPolynomial) -> PiPolynomial {
        self -= &rhs;
        self
    }
}

impl Neg for &PiPolynomial {
    type Output = PiPolynomial;
    fn neg(self) -> PiPolynomial {
        PiPolynomial {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }
}

impl Neg for PiPolynomial {
    type Output = PiPolynomial;
    fn neg(self) -> PiPolynomial {
        -&self
    }
}

impl Mul<&PiPolynomial> for &PiPolynomial {
    type Output = PiPolynomial;
    fn mul(self, rhs: &PiPolynomial) -> PiPolynomial {
        let mut out = PiPolynomial::zero();
        out.add_product(self, rhs);
        out
    }
}

impl Mul for PiPolynomial {
    type Output = PiPolynomial;
    fn mul(self, rhs: PiPolynomial) -> PiPolynomial {
        &self * &rhs
    }
}
