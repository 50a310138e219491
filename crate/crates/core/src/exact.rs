//! Exact values of the form `q0 + q1 * pi^2` and their conversion to `f64`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Error;

/// Exact rational number.
pub type Rational = BigRational;

const PI_DIGITS: &str = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899862803482534211706798";

/// A rational approximation of pi^2 accurate to more than 90 decimal digits.
pub fn pi_squared() -> &'static Rational {
    static PI2: OnceLock<Rational> = OnceLock::new();
    PI2.get_or_init(|| {
        let digits: String = PI_DIGITS.chars().filter(|c| *c != '.').collect();
        let frac_len = PI_DIGITS.len() - 2;
        let num: BigInt = digits.parse().expect("pi digits");
        let den = BigInt::from(10u32).pow(frac_len as u32);
        let pi = Rational::new(num, den);
        &pi * &pi
    })
}

/// `n!` as an exact integer.
pub fn factorial(n: u32) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `n!` as an exact rational.
pub fn factorial_q(n: u32) -> Rational {
    Rational::from_integer(BigInt::from(factorial(n)))
}

/// Shorthand for the rational `num / den`.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// An element of `Q + Q*pi^2`, or an infinite value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExactValue {
    Finite { rational: Rational, pi2: Rational },
    Infinite,
}

impl ExactValue {
    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn rational(r: Rational) -> Self {
        ExactValue::Finite { rational: r, pi2: Rational::zero() }
    }

    pub fn new(rational: Rational, pi2: Rational) -> Self {
        ExactValue::Finite { rational, pi2 }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExactValue::Finite { .. })
    }

    /// Rational and pi^2 parts, or `None` for an infinite value.
    pub fn parts(&self) -> Option<(&Rational, &Rational)> {
        match self {
            ExactValue::Finite { rational, pi2 } => Some((rational, pi2)),
            ExactValue::Infinite => None,
        }
    }

    /// Multiply by a rational. Infinite values may only be scaled by positive factors.
    pub fn scale(&self, c: &Rational) -> Result<Self, Error> {
        match self {
            ExactValue::Finite { rational, pi2 } => Ok(ExactValue::Finite {
                rational: rational * c,
                pi2: pi2 * c,
            }),
            ExactValue::Infinite if c.is_positive() => Ok(ExactValue::Infinite),
            ExactValue::Infinite => Err(Error::ScaleInfiniteByNonpositive),
        }
    }

    /// Difference of two values. Fails when the subtrahend is infinite.
    pub fn checked_sub(&self, other: &Self) -> Result<Self, Error> {
        match (self, other) {
            (_, ExactValue::Infinite) => Err(Error::InfiniteValue),
            (ExactValue::Infinite, _) => Ok(ExactValue::Infinite),
            (
                ExactValue::Finite { rational: a, pi2: b },
                ExactValue::Finite { rational: c, pi2: d },
            ) => Ok(ExactValue::Finite { rational: a - c, pi2: b - d }),
        }
    }

    /// Correctly rounded conversion (pi^2 replaced by its high precision rational approximation).
    pub fn to_f64(&self) -> Result<f64, Error> {
        match self {
            ExactValue::Finite { rational, pi2 } => {
                if pi2.is_zero() {
                    Ok(rational_to_f64(rational))
                } else {
                    Ok(rational_to_f64(&(rational + pi2 * pi_squared())))
                }
            }
            ExactValue::Infinite => Err(Error::InfiniteValue),
        }
    }
}

impl Add for &ExactValue {
    type Output = ExactValue;
    fn add(self, rhs: &ExactValue) -> ExactValue {
        match (self, rhs) {
            (
                ExactValue::Finite { rational: a, pi2: b },
                ExactValue::Finite { rational: c, pi2: d },
            ) => ExactValue::Finite { rational: a + c, pi2: b + d },
            _ => ExactValue::Infinite,
        }
    }
}

impl Add for ExactValue {
    type Output = ExactValue;
    fn add(self, rhs: ExactValue) -> ExactValue {
        &self + &rhs
    }
}

impl Sub for &ExactValue {
    type Output = ExactValue;
    /// Panics if either operand is infinite.
    fn sub(self, rhs: &ExactValue) -> ExactValue {
        assert!(self.is_finite(), "subtraction from an infinite value");
        self.checked_sub(rhs).expect("subtraction of an infinite value")
    }
}

impl Mul<&Rational> for &ExactValue {
    type Output = ExactValue;
    /// Panics when an infinite value is scaled by a non-positive factor.
    fn mul(self, c: &Rational) -> ExactValue {
        self.scale(c).expect("non-positive scaling of an infinite value")
    }
}

impl Neg for &ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        self * &(-Rational::one())
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactValue::Finite { rational, pi2 } => write!(f, "{rational} + {pi2}*pi^2"),
            ExactValue::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for ExactValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "inf" {
            return Ok(ExactValue::Infinite);
        }
        let bad = || Error::Parse(format!("not an exact value: {s:?}"));
        let (a, b) = s.split_once(" + ").ok_or_else(bad)?;
        let b = b.strip_suffix("*pi^2").ok_or_else(bad)?;
        let a: Rational = a.trim().parse().map_err(|_| bad())?;
        let b: Rational = b.trim().parse().map_err(|_| bad())?;
        Ok(ExactValue::new(a, b))
    }
}

/// Correctly rounded (round half to even) conversion of a rational to `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.is_negative();
    let num = r.numer().abs().to_biguint().expect("non-negative");
    let den = r.denom().abs().to_biguint().expect("non-negative");
    // Scale so the quotient has between 55 and 56 bits.
    let shift = 55 - (num.bits() as i64 - den.bits() as i64);
    let (scaled_num, scaled_den) = if shift >= 0 {
        (num << shift as usize, den)
    } else {
        (num, den << (-shift) as usize)
    };
    let (quot, rem) = scaled_num.div_rem(&scaled_den);
    let sticky = !rem.is_zero();
    let bits = quot.bits();
    let drop = bits - 53;
    let quot = quot.to_u64().expect("quotient fits in 64 bits");
    let mut mantissa = quot >> drop;
    let dropped = quot & ((1u64 << drop) - 1);
    let half = 1u64 << (drop - 1);
    let round_up = dropped > half || (dropped == half && (sticky || mantissa & 1 == 1));
    if round_up {
        mantissa += 1;
    }
    let exponent = drop as i64 - shift;
    let value = if (-1022 - 52 + 60..=1023 - 60).contains(&exponent) {
        mantissa as f64 * 2f64.powi(exponent as i32)
    } else {
        // Outside the range used by the library; fall back to a two-step scaling.
        (mantissa as f64) * 2f64.powi((exponent / 2) as i32) * 2f64.powi((exponent - exponent / 2) as i32)
    };
    if negative {
        -value
    } else {
        value
    }
}

/// Exact rational representation of a finite `f64`.
pub fn f64_to_rational(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}
