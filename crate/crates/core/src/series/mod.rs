//! Truncated formal power series in the deformation parameter with exact
//! rational coefficients, plus the operator symbols and the abelian-twist star
//! product of the formal sector.

mod star;
mod symbol;

pub use star::{star_product, star_series, StarExpansion, StarGrid};
pub use symbol::{mode_symbol_eval, OperatorSymbol, SymbolKind};

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};

use crate::error::{Error, Result};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 8;

/// `sum_{n=0}^{N} a_n u^n + O(u^{N+1})` with exact rational `a_n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FormalSeries {
    coeffs: Vec<BigRational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl FormalSeries {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![BigRational::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(BigRational::one(), order)
    }

    pub fn constant(c: BigRational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// Takes ownership of the coefficients; the order is `len - 1`.
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("series needs at least one coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    /// Coefficients given as `(numerator, denominator)` pairs.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Result<Self> {
        if pairs.iter().any(|&(_, d)| d == 0) {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Self::from_coeffs(pairs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &BigRational {
        &self.coeffs[n]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { coeffs })
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.order();
        let mut coeffs = vec![BigRational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Ok(Self { coeffs })
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::NonInvertible);
        }
        let inv0 = a0.recip();
        let mut out: Vec<BigRational> = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for n in 1..self.coeffs.len() {
            let mut acc = BigRational::zero();
            for j in 1..=n {
                acc += &self.coeffs[j] * &out[n - j];
            }
            out.push(-(acc * &inv0));
        }
        Ok(Self { coeffs: out })
    }

    /// Principal square root; requires a positive constant term that is the
    /// square of a rational.
    pub fn sqrt(&self) -> Result<Self> {
        let a0 = &self.coeffs[0];
        if !a0.is_positive() {
            return Err(Error::Domain(format!(
                "square root needs a positive constant term, got {a0}"
            )));
        }
        let b0 = rational_sqrt(a0).ok_or_else(|| {
            Error::Domain(format!("constant term {a0} is not a rational square"))
        })?;
        let two_b0 = &b0 * BigRational::from_integer(BigInt::from(2));
        let mut out = vec![b0];
        for n in 1..self.coeffs.len() {
            let mut acc = self.coeffs[n].clone();
            for j in 1..n {
                acc -= &out[j] * &out[n - j];
            }
            out.push(acc / &two_b0);
        }
        Ok(Self { coeffs: out })
    }

    /// Positive iff the lowest nonvanishing coefficient is positive.
    pub fn is_positive(&self) -> bool {
        self.coeffs
            .iter()
            .find(|c| !c.is_zero())
            .is_some_and(Signed::is_positive)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Evaluates the truncated sum at a complex point (Horner).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.to_f64()
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `cos(u)` to order `n`.
    pub fn cos(order: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); order + 1];
        let mut fact = BigInt::one();
        for k in 0..=order {
            if k > 0 {
                fact *= BigInt::from(k);
            }
            if k % 2 == 0 {
                let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
                coeffs[k] = BigRational::new(BigInt::from(sign), fact.clone());
            }
        }
        Self { coeffs }
    }

    /// `sec(u) = 1/cos(u)`.
    pub fn sec(order: usize) -> Self {
        Self::cos(order).inverse().expect("cos has unit constant term")
    }

    /// `sqrt(sec(u))`, the formal S-map symbol.
    pub fn sqrt_sec(order: usize) -> Self {
        Self::sec(order).sqrt().expect("sec has unit constant term")
    }

    /// `sqrt(cos(u))`, the formal inverse S-map symbol.
    pub fn sqrt_cos(order: usize) -> Self {
        Self::cos(order).sqrt().expect("cos has unit constant term")
    }
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    let n = q.numer();
    let d = q.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

/// Coefficientwise ring operation on two series of equal order.
pub fn series_arith(a: &FormalSeries, b: &FormalSeries, op: SeriesOp) -> Result<FormalSeries> {
    match op {
        SeriesOp::Add => a.add(b),
        SeriesOp::Mul => a.mul(b),
    }
}

pub fn series_inverse(a: &FormalSeries) -> Result<FormalSeries> {
    a.inverse()
}

pub fn series_sqrt(a: &FormalSeries) -> Result<FormalSeries> {
    a.sqrt()
}

impl fmt::Display for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})u")?,
                _ => write!(f, "({c})u^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(u^{})", self.order() + 1)
    }
}

struct JsonInt<'a>(&'a BigInt);

impl Serialize for JsonInt<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

struct JsonRatio<'a>(&'a BigRational);

impl Serialize for JsonRatio<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("numerator", &JsonInt(self.0.numer()))?;
        m.serialize_entry("denominator", &JsonInt(self.0.denom()))?;
        m.end()
    }
}

/// Serialized as a JSON array of `{numerator, denominator}` objects.
impl Serialize for FormalSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&JsonRatio(c))?;
        }
        seq.end()
    }
}
