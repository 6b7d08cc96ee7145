//! Exact rational helpers shared by every module.
//!
//! All order comparisons in the crate are made on [`Rational`] values or on
//! [`IntRatio`], a machine-integer fast path used by the pair scans. Floating
//! point only appears when a logarithm or square root is reported.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision exact rational.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Config(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// Lowest-terms `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde wrapper that reads and writes a [`Rational`] as a `"p/q"` string.
/// Plain JSON integers are accepted on input.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Q;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational string \"p/q\" or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Q, E> {
                parse_rational(v).map(Q).map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Q, E> {
                Ok(Q(int(v)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Q, E> {
                Ok(Q(Rational::from_integer(BigInt::from(v))))
            }
        }
        d.deserialize_any(V)
    }
}

impl From<Rational> for Q {
    fn from(r: Rational) -> Self {
        Q(r)
    }
}

/// Natural log of a positive rational, robust to magnitudes outside `f64`.
pub fn ln_rational(r: &Rational) -> f64 {
    assert!(r.is_positive(), "ln of a nonpositive rational");
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().expect("finite").ln()
    } else {
        let shift = bits - 64;
        (n >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `-ln(r)` for `0 < r <= 1`, computed as `ln_1p((1 - r)/r)` to keep precision
/// near `r = 1`.
pub fn neg_ln_unit(r: &Rational) -> f64 {
    let gap = (Rational::one() - r) / r;
    match gap.to_f64() {
        Some(g) if g.is_finite() => g.ln_1p(),
        _ => -ln_rational(r),
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn ceil_to_u64(r: &Rational) -> Result<u64> {
    r.ceil()
        .to_integer()
        .to_u64()
        .ok_or(Error::Overflow("ceiling of a rational"))
}

/// `t <= p + 2*sqrt(d)` decided exactly, for `p >= 0`.
pub fn le_plus_two_sqrt(t: &Rational, p: &Rational, d: u64) -> bool {
    let gap = t - p;
    if !gap.is_positive() {
        return true;
    }
    &gap * &gap <= int(4 * d)
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("formatted float parses")
}

/// Exact nonnegative ratio `num/den` of machine integers, `den > 0`.
///
/// This is the representation of λ values and λ-products between lattice
/// vectors inside the exhaustive pair scans.
#[derive(Clone, Copy, Debug)]
pub struct IntRatio {
    pub num: u128,
    pub den: u128,
}

impl IntRatio {
    pub const ZERO: IntRatio = IntRatio { num: 0, den: 1 };
    pub const ONE: IntRatio = IntRatio { num: 1, den: 1 };

    pub fn new(num: u128, den: u128) -> Self {
        assert!(den > 0);
        let g = num.gcd(&den);
        if g > 1 {
            IntRatio {
                num: num / g,
                den: den / g,
            }
        } else {
            IntRatio { num, den }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn times(self, other: IntRatio) -> IntRatio {
        match (self.num.checked_mul(other.num), self.den.checked_mul(other.den)) {
            (Some(n), Some(d)) => IntRatio::new(n, d),
            _ => {
                // reduce crosswise first, then multiply
                let g1 = self.num.gcd(&other.den).max(1);
                let g2 = other.num.gcd(&self.den).max(1);
                let n = (self.num / g1)
                    .checked_mul(other.num / g2)
                    .expect("λ-product numerator overflow");
                let d = (self.den / g2)
                    .checked_mul(other.den / g1)
                    .expect("λ-product denominator overflow");
                IntRatio::new(n, d)
            }
        }
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    /// `-ln(self)` for a value in `(0, 1]`; `+inf` at zero.
    pub fn neg_ln(self) -> f64 {
        if self.num == 0 {
            return f64::INFINITY;
        }
        debug_assert!(self.num <= self.den);
        let gap = (self.den - self.num) as f64 / self.num as f64;
        gap.ln_1p()
    }
}

impl PartialEq for IntRatio {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for IntRatio {}

impl PartialOrd for IntRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IntRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        match (
            self.num.checked_mul(other.den),
            other.num.checked_mul(self.den),
        ) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => {
                let a = BigUint::from(self.num) * BigUint::from(other.den);
                let b = BigUint::from(other.num) * BigUint::from(self.den);
                a.cmp(&b)
            }
        }
    }
}
