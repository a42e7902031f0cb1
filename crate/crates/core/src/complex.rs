//! Arbitrary-precision complex scalar and the working-precision context.
//!
//! Every computation in the crate runs at a [`Precision`] chosen by the caller.
//! Values created inside a computation inherit that precision; binary operators
//! round their result to the precision of the left operand.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::{Complex, Float};

use crate::error::{Error, Result};

/// Working precision in bits (at least 53).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 53;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::PrecisionTooLow {
                rule: "the working-precision floor",
                required: Self::MIN_BITS,
                got: bits,
            });
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// `2^-(P - slack)`, the tolerance used for "equal at working precision".
    pub fn tolerance(self, slack: u32) -> Float {
        let exp = self.0.saturating_sub(slack) as i32;
        Float::with_val(self.0, Float::i_exp(1, -exp))
    }

    /// Number of significant decimal digits printed for values at this precision.
    #[allow(clippy::approx_constant)] // the rule is stated with four digits
    pub fn decimal_digits(self) -> usize {
        (f64::from(self.0) * 0.3010).ceil() as usize
    }

    /// Fails with `PrecisionTooLow` unless `self.bits() >= required`.
    pub fn require(self, required: u32, rule: &'static str) -> Result<()> {
        if self.0 < required {
            Err(Error::PrecisionTooLow {
                rule,
                required,
                got: self.0,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BigComplex(Complex);

impl BigComplex {
    pub fn new(prec: Precision, re: f64, im: f64) -> Self {
        BigComplex(Complex::with_val(prec.bits(), (re, im)))
    }

    pub fn zero(prec: Precision) -> Self {
        Self::new(prec, 0.0, 0.0)
    }

    pub fn one(prec: Precision) -> Self {
        Self::new(prec, 1.0, 0.0)
    }

    pub fn from_floats(prec: Precision, re: &Float, im: &Float) -> Self {
        BigComplex(Complex::with_val(prec.bits(), (re, im)))
    }

    pub fn from_real(prec: Precision, re: &Float) -> Self {
        BigComplex(Complex::with_val(prec.bits(), (re, 0)))
    }

    pub fn from_rug(value: Complex) -> Self {
        BigComplex(value)
    }

    /// Parses decimal strings for the two parts at the given precision.
    pub fn from_decimal_parts(prec: Precision, re: &str, im: &str) -> Result<Self> {
        let re = parse_float(prec, re)?;
        let im = parse_float(prec, im)?;
        Ok(Self::from_floats(prec, &re, &im))
    }

    /// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i` (decimal, exponents allowed).
    pub fn parse(prec: Precision, text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty complex literal".into()));
        }
        let Some(body) = s.strip_suffix('i') else {
            return Self::from_decimal_parts(prec, &s, "0");
        };
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        Self::from_decimal_parts(prec, re, im)
    }

    pub fn as_rug(&self) -> &Complex {
        &self.0
    }

    pub fn re(&self) -> &Float {
        self.0.real()
    }

    pub fn im(&self) -> &Float {
        self.0.imag()
    }

    pub fn prec(&self) -> Precision {
        Precision(self.0.prec().0)
    }

    /// Rounds (or extends) to another precision.
    pub fn with_prec(&self, prec: Precision) -> Self {
        BigComplex(Complex::with_val(prec.bits(), &self.0))
    }

    pub fn is_finite(&self) -> bool {
        self.re().is_finite() && self.im().is_finite()
    }

    /// Passes the value through, or reports a non-finite part.
    pub fn checked(self, context: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(context))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re().is_zero() && self.im().is_zero()
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec().bits(), self.0.abs_ref())
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn norm_sqr(&self) -> Float {
        Float::with_val(self.prec().bits(), self.0.norm_ref())
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re().to_f64(), self.im().to_f64())
    }

    pub fn square(&self) -> Self {
        BigComplex(Complex::with_val(self.prec().bits(), self.0.square_ref()))
    }

    pub fn conj(&self) -> Self {
        BigComplex(Complex::with_val(self.prec().bits(), self.0.conj_ref()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        BigComplex(Complex::with_val(self.prec().bits(), &self.0 * factor))
    }

    pub fn scale_float(&self, factor: &Float) -> Self {
        BigComplex(Complex::with_val(self.prec().bits(), &self.0 * factor))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NonFinite("reciprocal of zero"));
        }
        BigComplex(Complex::with_val(self.prec().bits(), self.0.recip_ref())).checked("reciprocal")
    }

    /// Integer power by repeated squaring; negative exponents invert.
    pub fn powi(&self, exp: i64) -> Result<Self> {
        let prec = self.prec();
        let mut base = if exp < 0 { self.recip()? } else { self.clone() };
        let mut k = exp.unsigned_abs();
        let mut acc = BigComplex::one(prec);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = base.square();
            k >>= 1;
        }
        acc.checked("integer power")
    }

    /// Principal square root by the half-angle construction: the result has
    /// non-negative real part, and positive imaginary part when the real part
    /// is zero.
    pub fn sqrt(&self) -> Self {
        let bits = self.prec().bits();
        if self.is_zero() {
            return BigComplex::zero(self.prec());
        }
        let (a, b) = (self.re(), self.im());
        let r = self.abs();
        let two = 2u32;
        if *a >= 0 {
            // u = sqrt((r + a) / 2) > 0, v = b / (2u)
            let u = Float::with_val(bits, (Float::with_val(bits, &r + a) / two).sqrt());
            let v = Float::with_val(bits, b / Float::with_val(bits, &u * two));
            BigComplex(Complex::with_val(bits, (u, v)))
        } else {
            // v = ±sqrt((r - a) / 2) with the sign of b (b = 0 counts as positive)
            let mut v = Float::with_val(bits, (Float::with_val(bits, &r - a) / two).sqrt());
            if *b < 0 {
                v = -v;
            }
            let u = Float::with_val(bits, b / Float::with_val(bits, &v * two));
            BigComplex(Complex::with_val(bits, (u, v)))
        }
    }

    pub fn dist(&self, other: &BigComplex) -> Float {
        (self - other).abs()
    }

    /// Decimal rendering `re+imi` with `digits` significant digits per part.
    pub fn to_decimal(&self, digits: usize) -> String {
        let re = self.re().to_string_radix(10, Some(digits));
        let im = self.im().to_string_radix(10, Some(digits));
        if im.starts_with('-') {
            format!("{re}{im}i")
        } else {
            format!("{re}+{im}i")
        }
    }

    /// Decimal strings for both parts with enough digits to round-trip exactly.
    pub fn to_exact_parts(&self) -> (String, String) {
        (
            self.re().to_string_radix(10, None),
            self.im().to_string_radix(10, None),
        )
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(self.prec().decimal_digits()))
    }
}

pub fn parse_float(prec: Precision, text: &str) -> Result<Float> {
    let parsed = Float::parse(text.trim()).map_err(|e| Error::Parse(format!("{text:?}: {e}")))?;
    Ok(Float::with_val(prec.bits(), parsed))
}

pub fn pi(prec: Precision) -> Float {
    Float::with_val(prec.bits(), Constant::Pi)
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a BigComplex> for &'a BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &'a BigComplex) -> BigComplex {
                BigComplex(Complex::with_val(self.prec().bits(), &self.0 $op &rhs.0))
            }
        }
        impl $trait<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: BigComplex) -> BigComplex {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &'a BigComplex) -> BigComplex {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<BigComplex> for &'a BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: BigComplex) -> BigComplex {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);
forward_binop!(Div, div, /);

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex(-self.0)
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex(Complex::with_val(self.prec().bits(), -&self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::new(128).unwrap()
    }

    #[test]
    fn precision_floor() {
        assert!(Precision::new(52).is_err());
        assert_eq!(Precision::new(53).unwrap().bits(), 53);
        assert_eq!(Precision::new(128).unwrap().decimal_digits(), 39);
    }

    #[test]
    fn principal_sqrt_convention() {
        let prec = p();
        let minus_four = BigComplex::new(prec, -4.0, 0.0);
        assert_eq!(minus_four.sqrt(), BigComplex::new(prec, 0.0, 2.0));
        let negative_zero_im = BigComplex::from_rug(Complex::with_val(128, (-4.0, -0.0)));
        assert_eq!(negative_zero_im.sqrt(), BigComplex::new(prec, 0.0, 2.0));
        let minus_i = BigComplex::new(prec, 0.0, -1.0);
        let r = minus_i.sqrt();
        assert!(r.re().to_f64() > 0.0);
        assert!((r.square() - minus_i).abs_f64() < 1e-35);
        assert_eq!(BigComplex::new(prec, 2.0, 0.0).sqrt().im().to_f64(), 0.0);
    }

    #[test]
    fn parse_forms() {
        let prec = p();
        let cases = [
            ("-1.9", (-1.9, 0.0)),
            ("0.1+0.9i", (0.1, 0.9)),
            ("i", (0.0, 1.0)),
            ("-i", (0.0, -1.0)),
            ("-1+i", (-1.0, 1.0)),
            ("2.5e-3-4e+1i", (2.5e-3, -40.0)),
            ("3i", (0.0, 3.0)),
        ];
        for (text, (re, im)) in cases {
            let z = BigComplex::parse(prec, text).unwrap();
            assert_eq!(z.to_f64_pair(), (re, im), "{text}");
        }
        assert!(BigComplex::parse(prec, "abc").is_err());
        assert!(BigComplex::parse(prec, "").is_err());
    }

    #[test]
    fn powi_and_recip() {
        let prec = p();
        let mu = BigComplex::new(prec, 4.0, 4.0);
        let m3 = mu.powi(3).unwrap();
        let back = &m3 * &mu.powi(-3).unwrap();
        assert!((back - BigComplex::one(prec)).abs_f64() < 1e-35);
        assert!(BigComplex::zero(prec).recip().is_err());
    }

    #[test]
    fn exact_parts_round_trip() {
        let prec = p();
        let z = BigComplex::new(prec, 1.0, 0.0) / BigComplex::new(prec, 3.0, 7.0);
        let (re, im) = z.to_exact_parts();
        assert_eq!(BigComplex::from_decimal_parts(prec, &re, &im).unwrap(), z);
    }
}
