//! Complex scalars under two backends: exact Gaussian rationals and `Complex64`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Relative pivot threshold for the float backend.
pub const SINGULAR_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Float,
    Exact,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Float => "float",
            Backend::Exact => "exact",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(Backend::Float),
            "exact" => Ok(Backend::Exact),
            other => Err(Error::Invalid(format!("unknown backend `{other}`"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Field operations shared by both backends.
///
/// Values are immutable; arithmetic goes through the by-value operator traits.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;

    /// Multiplicative inverse, `None` for zero.
    fn recip(&self) -> Option<Self>;

    /// Modulus as a double, used for pivoting and norms.
    fn modulus(&self) -> f64;

    fn is_finite(&self) -> bool;

    /// Whether `pivot` counts as zero for a matrix whose largest entry modulus is `scale`.
    fn is_singular_pivot(pivot: &Self, scale: f64) -> bool;

    /// Real double into the backend. The exact backend converts the binary value exactly.
    fn from_f64(x: f64) -> Result<Self>;

    fn from_complex(z: Complex64) -> Result<Self>;

    fn to_complex(&self) -> Complex64;

    /// `[re, im]` JSON pair.
    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;

    fn div(&self, rhs: &Self) -> Option<Self> {
        rhs.recip().map(|r| self.clone() * r)
    }
}

impl Scalar for Complex64 {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn recip(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            return None;
        }
        let r = self.inv();
        Scalar::is_finite(&r).then_some(r)
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn is_singular_pivot(pivot: &Self, scale: f64) -> bool {
        scale == 0.0 || pivot.norm() <= SINGULAR_TOL * scale
    }

    fn from_f64(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(Complex64::new(x, 0.0))
        } else {
            Err(Error::NonFinite { context: "from_f64" })
        }
    }

    fn from_complex(z: Complex64) -> Result<Self> {
        if Scalar::is_finite(&z) {
            Ok(z)
        } else {
            Err(Error::NonFinite { context: "from_complex" })
        }
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn to_json(&self) -> Value {
        serde_json::json!([self.re, self.im])
    }

    fn from_json(v: &Value) -> Result<Self> {
        let [re, im] = json_pair(v)?;
        Ok(Complex64::new(component_f64(re)?, component_f64(im)?))
    }
}

/// Exact complex number `re + i·im` with rational parts in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self {
            re: BigRational::from_integer(re.into()),
            im: BigRational::from_integer(im.into()),
        }
    }

    pub fn from_ratio(re: (i64, i64), im: (i64, i64)) -> Self {
        Self {
            re: BigRational::new(re.0.into(), re.1.into()),
            im: BigRational::new(im.0.into(), im.1.into()),
        }
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// |z|² exactly.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for GaussianRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for GaussianRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for GaussianRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        Self::new(re, im)
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn format_rational(q: &BigRational) -> String {
    q.to_string()
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Invalid(format!("malformed rational `{s}`"));
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            if let Ok(p) = s.parse::<BigInt>() {
                return Ok(BigRational::from_integer(p));
            }
            let x: f64 = s.parse().map_err(|_| bad())?;
            BigRational::from_float(x).ok_or_else(bad)
        }
    }
}

impl Scalar for GaussianRational {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Self::new(BigRational::one(), BigRational::zero())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn recip(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            return None;
        }
        let d = self.norm_sqr();
        Some(Self::new(&self.re / &d, -(&self.im / &d)))
    }

    fn modulus(&self) -> f64 {
        rational_to_f64(&self.re).hypot(rational_to_f64(&self.im))
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn is_singular_pivot(pivot: &Self, _scale: f64) -> bool {
        Scalar::is_zero(pivot)
    }

    fn from_f64(x: f64) -> Result<Self> {
        let re = BigRational::from_float(x).ok_or(Error::NonFinite { context: "from_f64" })?;
        Ok(Self::new(re, BigRational::zero()))
    }

    fn from_complex(z: Complex64) -> Result<Self> {
        let re = BigRational::from_float(z.re);
        let im = BigRational::from_float(z.im);
        match (re, im) {
            (Some(re), Some(im)) => Ok(Self::new(re, im)),
            _ => Err(Error::NonFinite {
                context: "from_complex",
            }),
        }
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn to_json(&self) -> Value {
        serde_json::json!([format_rational(&self.re), format_rational(&self.im)])
    }

    fn from_json(v: &Value) -> Result<Self> {
        let [re, im] = json_pair(v)?;
        Ok(Self::new(component_rational(re)?, component_rational(im)?))
    }
}

fn json_pair(v: &Value) -> Result<[&Value; 2]> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok([re, im]),
        _ => Err(Error::Invalid(format!(
            "expected a complex pair [re, im], found {v}"
        ))),
    }
}

fn component_f64(v: &Value) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => {
            let q = parse_rational(s)?;
            q.to_f64()
        }
        _ => None,
    };
    match x {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Invalid(format!("expected a finite number, found {v}"))),
    }
}

fn component_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(i.into()))
            } else {
                n.as_f64()
                    .and_then(BigRational::from_float)
                    .ok_or_else(|| Error::Invalid(format!("expected a finite number, found {v}")))
            }
        }
        _ => Err(Error::Invalid(format!(
            "expected a rational string or number, found {v}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_reciprocal_of_minus_i_is_i() {
        let minus_i = -GaussianRational::i();
        assert_eq!(minus_i.recip().unwrap(), GaussianRational::i());
        assert!(GaussianRational::zero().recip().is_none());
    }

    #[test]
    fn rationals_stay_in_lowest_terms() {
        let a = GaussianRational::from_ratio((2, 4), (6, -8));
        assert_eq!(format_rational(&a.re), "1/2");
        assert_eq!(format_rational(&a.im), "-3/4");
    }

    #[test]
    fn json_pairs_accept_strings_and_numbers() {
        let v = serde_json::json!(["1/3", -2]);
        let q = GaussianRational::from_json(&v).unwrap();
        assert_eq!(q, GaussianRational::from_ratio((1, 3), (-2, 1)));
        assert_eq!(q.to_json(), serde_json::json!(["1/3", "-2"]));

        let z = Complex64::from_json(&v).unwrap();
        assert!((z.re - 1.0 / 3.0).abs() < 1e-16 && z.im == -2.0);
        assert!(Complex64::from_json(&serde_json::json!([1.0])).is_err());
        assert!(GaussianRational::from_json(&serde_json::json!(["1/0", "0"])).is_err());
    }

    #[test]
    fn float_reciprocal_rejects_zero_and_overflow() {
        assert!(Scalar::recip(&Complex64::new(0.0, 0.0)).is_none());
        assert!(Scalar::recip(&Complex64::new(1e-320, 0.0)).is_none());
        assert!(<Complex64 as Scalar>::from_f64(f64::NAN).is_err());
    }
}
