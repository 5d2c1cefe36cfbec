//! Exact Gaussian rationals and the mixed exact/floating values produced by
//! expression evaluation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A number `re + i·im` with arbitrary-precision rational parts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::from_int(1)
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        GaussRat::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat::new(re, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat::new(&self.re / &n, -&self.im / &n))
    }

    /// Integer power; `None` when a negative power of zero is requested.
    pub fn powi(&self, e: i64) -> Option<Self> {
        if e < 0 {
            return self.inv()?.powi(-e);
        }
        let mut base = self.clone();
        let mut acc = GaussRat::one();
        let mut k = e as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        Some(acc)
    }

    /// Exact square root when both parts allow it (only real non-negative
    /// perfect squares are recognised).
    pub fn exact_sqrt(&self) -> Option<Self> {
        if !self.is_real() || self.re.is_negative() {
            return None;
        }
        let n = self.re.numer().sqrt();
        let d = self.re.denom().sqrt();
        if &(&n * &n) == self.re.numer() && &(&d * &d) == self.re.denom() {
            Some(GaussRat::real(BigRational::new(n, d)))
        } else {
            None
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Integer value if this is a real integer.
    pub fn as_integer(&self) -> Option<i64> {
        if self.is_real() && self.re.is_integer() {
            self.re.to_integer().to_i64()
        } else {
            None
        }
    }
}

impl From<i64> for GaussRat {
    fn from(n: i64) -> Self {
        GaussRat::from_int(n)
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl<'a> Div<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &GaussRat) -> GaussRat {
        self * &o.inv().expect("division by exact zero")
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, o: GaussRat) -> GaussRat {
        &self + &o
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, o: GaussRat) -> GaussRat {
        &self - &o
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, o: GaussRat) -> GaussRat {
        &self * &o
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        -&self
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-&self.im).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}*i", fmt_rat(&self.im))
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                let im = self.im.abs();
                if im.is_one() {
                    write!(f, "({} {} i)", fmt_rat(&self.re), sign)
                } else {
                    write!(f, "({} {} {}*i)", fmt_rat(&self.re), sign, fmt_rat(&im))
                }
            }
        }
    }
}

/// Result of evaluating an expression at a point: exact whenever every node
/// on the way was algebraic over exact inputs.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(GaussRat),
    Float(Complex64),
}

impl Value {
    pub fn zero() -> Self {
        Value::Exact(GaussRat::zero())
    }

    pub fn one() -> Self {
        Value::Exact(GaussRat::one())
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Value::Exact(q) => q.to_c64(),
            Value::Float(c) => *c,
        }
    }

    pub fn conj(&self) -> Value {
        match self {
            Value::Exact(q) => Value::Exact(q.conj()),
            Value::Float(c) => Value::Float(c.conj()),
        }
    }

    pub fn sub(&self, o: &Value) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
            _ => Value::Float(self.to_c64() - o.to_c64()),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    /// Zero test: exact for exact values, relative tolerance otherwise.
    pub fn is_zero(&self, tol: f64) -> bool {
        match self {
            Value::Exact(q) => q.is_zero(),
            Value::Float(c) => c.norm() <= tol,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Value::Exact(q) if q.is_zero())
    }

    pub fn add(&self, o: &Value) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            _ => Value::Float(self.to_c64() + o.to_c64()),
        }
    }

    pub fn mul(&self, o: &Value) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
            _ => Value::Float(self.to_c64() * o.to_c64()),
        }
    }

    /// Integer power; `None` on a negative power of zero.
    pub fn powi(&self, e: i64) -> Option<Value> {
        match self {
            Value::Exact(q) => q.powi(e).map(Value::Exact),
            Value::Float(c) => {
                if e < 0 && c.norm() == 0.0 {
                    None
                } else {
                    Some(Value::Float(c.powi(e as i32)))
                }
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(q) => write!(f, "{q}"),
            Value::Float(c) => write!(f, "{:.12}{:+.12}i", c.re, c.im),
        }
    }
}
