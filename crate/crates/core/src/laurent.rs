//! Exact Laurent polynomials over ℤ and truncated power series over ℚ.
//!
//! [`LaurentPolynomial`] holds Δ_K(t) ∈ ℤ[t, t⁻¹]; [`TruncatedSeries`] holds
//! elements of ℚ[[h]] modulo h^{N+1}, enough to expand log Δ_K(e^h).

use crate::linalg::Q;
use crate::Error;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Σ coeffs[i] · t^{lo+i}, trimmed so the first and last coefficients are nonzero.
/// The zero polynomial is `lo = 0, coeffs = []`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaurentPolynomial {
    pub lo: i64,
    pub coeffs: Vec<i64>,
}

impl LaurentPolynomial {
    pub fn zero() -> Self {
        Self { lo: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    /// c · t^e
    pub fn monomial(c: i64, e: i64) -> Self {
        Self::new(e, vec![c])
    }

    /// Builds and trims.
    pub fn new(lo: i64, coeffs: Vec<i64>) -> Self {
        let mut p = Self { lo, coeffs };
        p.trim();
        p
    }

    /// Coefficients of t^0, t^1, … of an ordinary polynomial.
    pub fn from_poly(coeffs: &[i64]) -> Self {
        Self::new(0, coeffs.to_vec())
    }

    /// Removes zero coefficients at both ends.
    pub fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| **c == 0).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.lo = 0;
            return;
        }
        self.coeffs.drain(..lead);
        self.lo += lead as i64;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest exponent (None for zero).
    pub fn hi(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.lo + self.coeffs.len() as i64 - 1)
    }

    /// Coefficient of t^e.
    pub fn coeff(&self, e: i64) -> i64 {
        let i = e - self.lo;
        if i < 0 {
            return 0;
        }
        self.coeffs.get(i as usize).copied().unwrap_or(0)
    }

    /// (exponent, coefficient) pairs with nonzero coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| **c != 0).map(move |(i, c)| (self.lo + i as i64, *c))
    }

    /// Multiplication by t^m.
    pub fn shift(&self, m: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Self { lo: self.lo + m, coeffs: self.coeffs.clone() }
    }

    pub fn scale(&self, c: i64) -> Self {
        Self::new(self.lo, self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Value at an exact rational point t ≠ 0.
    pub fn eval(&self, t: &Q) -> Q {
        let mut acc = Q::zero();
        for (e, c) in self.terms() {
            acc += Q::from_integer(BigInt::from(c)) * pow_q(t, e);
        }
        acc
    }

    /// Value at t = 1 (sum of coefficients).
    pub fn eval_one(&self) -> i64 {
        self.coeffs.iter().sum()
    }

    /// d/dt.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            if e != 0 {
                out = &out + &Self::monomial(c * e, e - 1);
            }
        }
        out
    }

    /// t ↦ t⁻¹.
    pub fn reflect(&self) -> Self {
        match self.hi() {
            None => Self::zero(),
            Some(hi) => Self::new(-hi, self.coeffs.iter().rev().copied().collect()),
        }
    }

    /// Integer power (nonnegative).
    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }
}

/// t^e for a rational t ≠ 0 and any integer e.
pub fn pow_q(t: &Q, e: i64) -> Q {
    let base = if e < 0 { t.recip() } else { t.clone() };
    num_traits::pow(base, e.unsigned_abs() as usize)
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            let (sign, mag) = if c < 0 { ("-", -c) } else { ("+", c) };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (mag, e) {
                (_, 0) => write!(f, "{mag}")?,
                (1, 1) => write!(f, "t")?,
                (1, _) => write!(f, "t^{e}")?,
                (_, 1) => write!(f, "{mag}t")?,
                _ => write!(f, "{mag}t^{e}")?,
            }
        }
        Ok(())
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn add(self, o: &LaurentPolynomial) -> LaurentPolynomial {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(o.lo);
        let hi = self.hi().unwrap().max(o.hi().unwrap());
        let coeffs = (lo..=hi).map(|e| self.coeff(e) + o.coeff(e)).collect();
        LaurentPolynomial::new(lo, coeffs)
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn neg(self) -> LaurentPolynomial {
        self.scale(-1)
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn sub(self, o: &LaurentPolynomial) -> LaurentPolynomial {
        self + &(-o)
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn mul(self, o: &LaurentPolynomial) -> LaurentPolynomial {
        if self.is_zero() || o.is_zero() {
            return LaurentPolynomial::zero();
        }
        let mut c = vec![0i64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        LaurentPolynomial::new(self.lo + o.lo, c)
    }
}

/// Interpolates the integer polynomial of degree ≤ values.len()−1 taking
/// `values[i]` at t = i (Newton divided differences, exact).
pub fn interpolate_integer(values: &[Q]) -> Result<Vec<i64>, Error> {
    let n = values.len();
    let mut dd: Vec<Q> = values.to_vec();
    // dd[i] becomes the i-th divided difference f[0..i]
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / Q::from_integer(BigInt::from(j));
        }
    }
    // expand Σ dd[i] Π_{m<i} (t − m) into monomials
    let mut poly = vec![Q::zero(); n.max(1)];
    let mut basis = vec![Q::one()];
    for (i, c) in dd.iter().enumerate() {
        for (d, b) in basis.iter().enumerate() {
            poly[d] += c * b;
        }
        // basis *= (t − i)
        let mut next = vec![Q::zero(); basis.len() + 1];
        for (d, b) in basis.iter().enumerate() {
            next[d + 1] += b;
            next[d] -= b * Q::from_integer(BigInt::from(i));
        }
        basis = next;
    }
    poly.iter()
        .map(|c| {
            if !c.is_integer() {
                return Err(Error::Structural(format!("non-integral interpolated coefficient {c}")));
            }
            c.to_integer().to_i64().ok_or_else(|| Error::Resource("coefficient overflows i64".into()))
        })
        .collect()
}

/// Element of ℚ[[h]] truncated after h^N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    /// Coefficients of h^0..=h^N (length N+1).
    pub coeffs: Vec<Q>,
}

impl TruncatedSeries {
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![Q::zero(); order + 1] }
    }

    pub fn constant(c: Q, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The series h.
    pub fn h(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = Q::one();
        }
        s
    }

    /// From explicit coefficients, padded or truncated to `order`.
    pub fn from_coeffs(mut coeffs: Vec<Q>, order: usize) -> Self {
        coeffs.resize(order + 1, Q::zero());
        Self { coeffs }
    }

    /// Truncation order N.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &Q {
        &self.coeffs[i]
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.order(), o.order(), "series truncation orders differ");
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// exp(c·h) = Σ cʲ hʲ / j!.
    pub fn exp_linear(c: &Q, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut term = Q::one();
        for j in 0..=order {
            coeffs.push(term.clone());
            term = term * c / Q::from_integer(BigInt::from(j as u64 + 1));
        }
        Self { coeffs }
    }

    /// f ∘ g, where g has zero constant term (Horner in g).
    pub fn compose(&self, g: &Self) -> Result<Self, Error> {
        self.check(g);
        if !g.coeffs[0].is_zero() {
            return Err(Error::Validation("inner series must have zero constant term".into()));
        }
        let mut acc = Self::zero(self.order());
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * g) + &Self::constant(c.clone(), self.order());
        }
        Ok(acc)
    }

    /// log(1 + g) for g with zero constant term.
    pub fn log1p(g: &Self) -> Result<Self, Error> {
        if !g.coeffs[0].is_zero() {
            return Err(Error::Validation("log1p needs zero constant term".into()));
        }
        let n = g.order();
        // Σ_{i≥1} (−1)^{i+1} x^i / i, composed with g
        let mut outer = vec![Q::zero(); n + 1];
        for (i, c) in outer.iter_mut().enumerate().skip(1) {
            let s = if i % 2 == 1 { 1 } else { -1 };
            *c = Q::new(BigInt::from(s), BigInt::from(i as u64));
        }
        Self { coeffs: outer }.compose(g)
    }

    /// log f for f with constant term 1.
    pub fn log(&self) -> Result<Self, Error> {
        if !self.coeffs[0].is_one() {
            return Err(Error::Validation(format!("log needs constant term 1, got {}", self.coeffs[0])));
        }
        let mut g = self.clone();
        g.coeffs[0] = Q::zero();
        Self::log1p(&g)
    }

    /// exp(g) for g with zero constant term.
    pub fn exp(g: &Self) -> Result<Self, Error> {
        if !g.coeffs[0].is_zero() {
            return Err(Error::Validation("exp needs zero constant term".into()));
        }
        Self::exp_linear(&Q::one(), g.order()).compose(g)
    }

    /// Whether every coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Largest |coefficient| as f64 (diagnostics).
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| crate::algebra::rational_to_f64(&c.abs())).fold(0.0, f64::max)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, o: &TruncatedSeries) -> TruncatedSeries {
        self.check(o);
        TruncatedSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, o: &TruncatedSeries) -> TruncatedSeries {
        self.check(o);
        TruncatedSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, o: &TruncatedSeries) -> TruncatedSeries {
        self.check(o);
        let n = self.order();
        let mut c = vec![Q::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(n + 1 - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        TruncatedSeries { coeffs: c }
    }
}

/// p(e^h) as a truncated series.
pub fn at_exp(p: &LaurentPolynomial, order: usize) -> TruncatedSeries {
    let mut acc = TruncatedSeries::zero(order);
    for (e, c) in p.terms() {
        let term = TruncatedSeries::exp_linear(&Q::from_integer(BigInt::from(e)), order);
        acc = &acc + &term.scale(&Q::from_integer(BigInt::from(c)));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, q_frac};

    fn tm1() -> LaurentPolynomial {
        LaurentPolynomial::from_poly(&[-1, 1])
    }

    #[test]
    fn arithmetic_and_trim() {
        let p = &LaurentPolynomial::one() + &tm1().pow(2);
        assert_eq!(p, LaurentPolynomial::from_poly(&[2, -2, 1]));
        assert_eq!((&p - &p), LaurentPolynomial::zero());
        assert_eq!(LaurentPolynomial::new(-2, vec![0, 0, 3, 0]), LaurentPolynomial::monomial(3, 0));
        assert_eq!(p.derivative(), LaurentPolynomial::from_poly(&[-2, 2]));
        assert_eq!(p.eval_one(), 1);
        assert_eq!(LaurentPolynomial::monomial(1, -1).eval(&q(2)), q_frac(1, 2));
        assert_eq!(LaurentPolynomial::from_poly(&[1, 2]).reflect(), LaurentPolynomial::new(-1, vec![2, 1]));
        assert_eq!(p.to_string(), "2 - 2t + t^2");
    }

    #[test]
    fn json_shape() {
        let p = LaurentPolynomial::new(-1, vec![1, -1, 1]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"lo":-1,"coeffs":[1,-1,1]}"#);
        assert_eq!(serde_json::from_str::<LaurentPolynomial>(&s).unwrap(), p);
    }

    #[test]
    fn interpolation_recovers_coefficients() {
        let p = [3i64, -2, 0, 5];
        let vals: Vec<Q> = (0..6).map(|x| LaurentPolynomial::from_poly(&p).eval(&q(x))).collect();
        assert_eq!(interpolate_integer(&vals).unwrap()[..4], p);
    }

    #[test]
    fn exp_log_roundtrip() {
        let n = 8;
        let g = TruncatedSeries::from_coeffs(vec![q(0), q(2), q_frac(-1, 3), q(5)], n);
        let back = TruncatedSeries::exp(&g).unwrap().log().unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn log_of_one_plus_h_squared_like() {
        // log(1+(e^h−1)²) = h² + h³ + h⁴/12 + …
        let p = &LaurentPolynomial::one() + &tm1().pow(2);
        let l = at_exp(&p, 6).log().unwrap();
        assert_eq!(l.coeffs[..5], [q(0), q(0), q(1), q(1), q_frac(1, 12)]);
    }
}
