// SPDX-License-Identifier: Apache-2.0

//! Exact complex numbers over the field Q(√2)(i).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

/// `a + b·√2` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RealSqrt2 {
    pub a: Rational,
    pub b: Rational,
}

impl RealSqrt2 {
    pub fn new(a: Rational, b: Rational) -> Self {
        RealSqrt2 { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        RealSqrt2 { a, b: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        ratio_f64(&self.a) + ratio_f64(&self.b) * std::f64::consts::SQRT_2
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        // (a + b√2)⁻¹ = (a − b√2) / (a² − 2b²); the norm vanishes only at zero.
        let norm = self.a * self.a - Rational::from_integer(2) * self.b * self.b;
        if norm.is_zero() {
            return None;
        }
        Some(RealSqrt2 { a: self.a / norm, b: -&self.b / norm })
    }
}

impl Add for &RealSqrt2 {
    type Output = RealSqrt2;
    fn add(self, o: &RealSqrt2) -> RealSqrt2 {
        RealSqrt2 { a: self.a + o.a, b: self.b + o.b }
    }
}

impl Sub for &RealSqrt2 {
    type Output = RealSqrt2;
    fn sub(self, o: &RealSqrt2) -> RealSqrt2 {
        RealSqrt2 { a: self.a - o.a, b: self.b - o.b }
    }
}

impl Mul for &RealSqrt2 {
    type Output = RealSqrt2;
    fn mul(self, o: &RealSqrt2) -> RealSqrt2 {
        let two = Rational::from_integer(2);
        RealSqrt2 {
            a: self.a * o.a + two * self.b * o.b,
            b: self.a * o.b + self.b * o.a,
        }
    }
}

impl Neg for &RealSqrt2 {
    type Output = RealSqrt2;
    fn neg(self) -> RealSqrt2 {
        RealSqrt2 { a: -&self.a, b: -&self.b }
    }
}

impl fmt::Display for RealSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt2", self.b),
            (false, false) => write!(f, "({} + {}*sqrt2)", self.a, self.b),
        }
    }
}

pub(crate) fn ratio_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Exact complex number `re + i·im` with components in Q(√2).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exact {
    pub re: RealSqrt2,
    pub im: RealSqrt2,
}

impl Exact {
    pub fn new(re: RealSqrt2, im: RealSqrt2) -> Self {
        Exact { re, im }
    }

    pub fn zero() -> Self {
        Exact { re: RealSqrt2::zero(), im: RealSqrt2::zero() }
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn i() -> Self {
        Exact { re: RealSqrt2::zero(), im: RealSqrt2::one() }
    }

    pub fn from_integer(n: i128) -> Self {
        Self::from_rational(Rational::from_integer(n))
    }

    pub fn from_rational(r: Rational) -> Self {
        Exact { re: RealSqrt2::rational(r), im: RealSqrt2::zero() }
    }

    pub fn sqrt2() -> Self {
        Exact {
            re: RealSqrt2::new(Rational::zero(), Rational::one()),
            im: RealSqrt2::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one()
    }

    /// The rational value, when the number is a rational real.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.im.is_zero() && self.re.b.is_zero() {
            Some(self.re.a)
        } else {
            None
        }
    }

    pub fn conj(&self) -> Self {
        Exact { re: self.re.clone(), im: -&self.im }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn inverse(&self) -> Option<Self> {
        let norm = &(&self.re * &self.re) + &(&self.im * &self.im);
        let inv = norm.inverse()?;
        let c = self.conj();
        Some(Exact { re: &c.re * &inv, im: &c.im * &inv })
    }

    /// `e^{iπk/4}` for integer `k`.
    pub fn eighth_root(k: i64) -> Self {
        let h = Rational::new(1, 2);
        let z = Rational::zero();
        let one = Rational::one();
        let (re, im) = match k.rem_euclid(8) {
            0 => (RealSqrt2::rational(one), RealSqrt2::zero()),
            1 => (RealSqrt2::new(z, h), RealSqrt2::new(z, h)),
            2 => (RealSqrt2::zero(), RealSqrt2::rational(one)),
            3 => (RealSqrt2::new(z, -h), RealSqrt2::new(z, h)),
            4 => (RealSqrt2::rational(-one), RealSqrt2::zero()),
            5 => (RealSqrt2::new(z, -h), RealSqrt2::new(z, -h)),
            6 => (RealSqrt2::zero(), RealSqrt2::rational(-one)),
            _ => (RealSqrt2::new(z, h), RealSqrt2::new(z, -h)),
        };
        Exact { re, im }
    }

    /// `e^{iπr}` when `r` is a multiple of 1/4.
    pub fn exp_i_pi(r: &Rational) -> Option<Self> {
        let k = r * Rational::from_integer(4);
        if !k.is_integer() {
            return None;
        }
        let k = (k.to_integer() % 8) as i64;
        Some(Self::eighth_root(k))
    }
}

impl Add for &Exact {
    type Output = Exact;
    fn add(self, o: &Exact) -> Exact {
        Exact { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &Exact {
    type Output = Exact;
    fn sub(self, o: &Exact) -> Exact {
        Exact { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &Exact {
    type Output = Exact;
    fn mul(self, o: &Exact) -> Exact {
        Exact {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }
}

impl Neg for &Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        Exact { re: -&self.re, im: -&self.im }
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "i*{}", self.im),
            (false, false) => write!(f, "({} + i*{})", self.re, self.im),
        }
    }
}

/// Formats a rational as an SMT-LIB real literal.
pub(crate) fn smt_rational(r: &Rational) -> String {
    let body = if r.is_integer() {
        format!("{}.0", r.numer().abs())
    } else {
        format!("(/ {}.0 {}.0)", r.numer().abs(), r.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighth_roots_match_floating_point() {
        for k in -9..17 {
            let z = Exact::eighth_root(k).to_c64();
            let w = Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / 4.0);
            assert!((z - w).norm() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn inverse_of_sqrt2_half() {
        let h = Exact::new(RealSqrt2::new(Rational::zero(), Rational::new(1, 2)), RealSqrt2::zero());
        let inv = h.inverse().unwrap();
        assert_eq!(inv, Exact::sqrt2());
        assert!(Exact::zero().inverse().is_none());
    }

    #[test]
    fn complex_inverse_round_trips() {
        let z = &Exact::eighth_root(3) + &Exact::from_integer(2);
        let p = &z * &z.inverse().unwrap();
        assert!(p.is_one());
    }

    #[test]
    fn smt_literals() {
        assert_eq!(smt_rational(&Rational::new(-3, 4)), "(- (/ 3.0 4.0))");
        assert_eq!(smt_rational(&Rational::from_integer(2)), "2.0");
    }
}
