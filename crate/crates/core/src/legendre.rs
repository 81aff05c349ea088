//! Exact polynomial algebra over the rationals and the Legendre basis.
//!
//! Everything here is exact. Floating point only appears in
//! [`ScaledBasis::eval`], which is used by numerical oracles.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Default upper bound for Legendre indices used by coefficient tables.
pub const DEFAULT_MAX_INDEX: usize = 16;

/// Builds the rational `n / d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Converts an exact rational to the nearest `f64`.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Univariate polynomial with rational coefficients, index = power of `x`.
///
/// Trailing zero coefficients are always trimmed, so the zero polynomial has
/// an empty coefficient vector and degree `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalPolynomial {
    coeffs: Vec<Rational>,
}

impl RationalPolynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::from_coeffs(vec![Rational::zero(), Rational::one()])
    }

    /// `c * x^n`.
    pub fn monomial(c: Rational, n: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); n + 1];
        coeffs[n] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Convenience constructor from small integer ratios `(num, den)`.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Self {
        Self::from_coeffs(pairs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    /// Degree, `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation at a rational point.
    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Horner evaluation in floating point.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Exact product.
    pub fn mul_poly(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self::from_coeffs(out)
    }

    /// Returns `F` with `F' = self` and `F(lower) = 0`.
    pub fn antiderivative_from(&self, lower: &Rational) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Rational::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / BigInt::from(i as u64 + 1));
        }
        let f = Self::from_coeffs(coeffs);
        let shift = f.eval(lower);
        f.sub_poly(&Self::constant(shift))
    }

    /// Exact `∫_a^b p(x) dx`.
    pub fn definite_integral(&self, a: &Rational, b: &Rational) -> Rational {
        let f = self.antiderivative_from(a);
        f.eval(b)
    }

    pub fn add_poly(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub_poly(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }
}

impl Add for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn add(self, rhs: Self) -> RationalPolynomial {
        self.add_poly(rhs)
    }
}

impl Sub for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn sub(self, rhs: Self) -> RationalPolynomial {
        self.sub_poly(rhs)
    }
}

impl Mul for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn mul(self, rhs: Self) -> RationalPolynomial {
        self.mul_poly(rhs)
    }
}

impl Neg for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn neg(self) -> RationalPolynomial {
        RationalPolynomial::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*x")?,
                _ => write!(f, "{a}*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Legendre polynomial `P_n` on `[-1, 1]` with `P_n(1) = 1`, built by the Bonnet recurrence
/// `(n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}`.
pub fn legendre(n: usize) -> RationalPolynomial {
    legendre_table(n).pop().expect("table holds n + 1 entries")
}

/// `[P_0, ..., P_n]`.
pub fn legendre_table(n: usize) -> Vec<RationalPolynomial> {
    let mut out = vec![RationalPolynomial::one()];
    if n == 0 {
        return out;
    }
    out.push(RationalPolynomial::x());
    let x = RationalPolynomial::x();
    for k in 1..n {
        let a = (&x * &out[k]).scale(&rat(2 * k as i64 + 1, k as i64 + 1));
        let b = out[k - 1].scale(&rat(k as i64, k as i64 + 1));
        out.push(&a - &b);
    }
    out
}

/// Floating evaluation of `P_n(x)` by the same recurrence.
pub fn legendre_f64(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Orthonormal shifted Legendre basis on `[left, left + step]`:
/// `φ_i(s) = sqrt((2i+1)/Δ) P_i((s - left - Δ/2) 2/Δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledBasis {
    step: f64,
    left: f64,
}

impl ScaledBasis {
    /// Returns `None` unless `step` is positive and finite.
    pub fn new(step: f64, left: f64) -> Option<Self> {
        (step > 0.0 && step.is_finite()).then_some(Self { step, left })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    /// Maps a time in the step interval to `[-1, 1]`.
    pub fn to_reference(&self, s: f64) -> f64 {
        (s - self.left - 0.5 * self.step) * 2.0 / self.step
    }

    pub fn eval(&self, i: usize, s: f64) -> f64 {
        ((2 * i + 1) as f64 / self.step).sqrt() * legendre_f64(i, self.to_reference(s))
    }
}
