//! Rigorous real arithmetic on interval enclosures.
//!
//! A [`Scalar`] is a closed interval `[lo, hi]` with dyadic endpoints together
//! with the working precision (in mantissa bits) that operations on it round
//! to. Binary operations use the larger precision of their operands. Results
//! always enclose the exact mathematical result.
//!
//! Comparisons are three-valued ([`Trilean`]): when enclosures overlap, the
//! answer is [`Trilean::Unknown`] and the caller is expected to restart the
//! computation at a higher precision (see [`next_precision`]).

mod dyadic;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub use dyadic::{Dyadic, Round};

/// Starting working precision of a solve.
pub const INITIAL_PRECISION: u32 = 64;

/// Precision used after an attempt at `p` bits failed to decide something.
pub fn next_precision(p: u32) -> u32 {
    let scaled = (p as u64 * 3).div_ceil(2);
    scaled.max(p as u64 + 32).min(u32::MAX as u64) as u32
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by an enclosure containing zero: [{lo}, {hi}]")]
    DivisionByZero { lo: String, hi: String },
    #[error("square root of a negative enclosure: [{lo}, {hi}]")]
    NegativeSqrt { lo: String, hi: String },
    #[error("malformed decimal literal {0:?}")]
    BadDecimal(String),
}

/// Three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trilean {
    Yes,
    No,
    Unknown,
}

impl Trilean {
    pub fn is_yes(self) -> bool {
        self == Trilean::Yes
    }

    pub fn is_no(self) -> bool {
        self == Trilean::No
    }
}

impl std::ops::Not for Trilean {
    type Output = Trilean;

    fn not(self) -> Trilean {
        match self {
            Trilean::Yes => Trilean::No,
            Trilean::No => Trilean::Yes,
            Trilean::Unknown => Trilean::Unknown,
        }
    }
}

/// Interval enclosure `[lo, hi]` at a working precision.
#[derive(Clone, PartialEq, Eq)]
pub struct Scalar {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl Scalar {
    /// Builds `[lo, hi]`. Panics if `lo > hi`.
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        assert!(lo <= hi, "inverted enclosure [{lo:?}, {hi:?}]");
        Scalar { lo, hi, prec }
    }

    pub fn point(v: Dyadic, prec: u32) -> Self {
        Scalar {
            lo: v.clone(),
            hi: v,
            prec,
        }
    }

    pub fn zero(prec: u32) -> Self {
        Scalar::point(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Self {
        Scalar::from_i64(1, prec)
    }

    /// Integer value, enclosed at `prec` bits.
    pub fn from_i64(v: i64, prec: u32) -> Self {
        let d = Dyadic::from_i64(v);
        Scalar::new(d.round(prec, Round::Down), d.round(prec, Round::Up), prec)
    }

    /// `2^k` (exact).
    pub fn pow2(k: i64, prec: u32) -> Self {
        Scalar::point(Dyadic::pow2(k), prec)
    }

    /// Enclosure of the rational `num / den` at `prec` bits.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Result<Self, ArithError> {
        if den.is_zero() {
            return Err(ArithError::DivisionByZero {
                lo: "0".into(),
                hi: "0".into(),
            });
        }
        let n = Dyadic::new(num.clone(), 0);
        let d = Dyadic::new(den.clone(), 0);
        Ok(Scalar::new(
            n.div(&d, prec, Round::Down),
            n.div(&d, prec, Round::Up),
            prec,
        ))
    }

    /// Exact enclosure of a finite `f64` (rounded outward to `prec` bits).
    pub fn from_f64(v: f64, prec: u32) -> Option<Self> {
        let d = Dyadic::from_f64(v)?;
        Some(Scalar::new(
            d.round(prec, Round::Down),
            d.round(prec, Round::Up),
            prec,
        ))
    }

    /// Parses a decimal literal (`[+-]digits[.digits][(e|E)[+-]digits]`)
    /// into an enclosure at most one ulp wide at `prec` bits.
    pub fn parse_decimal(text: &str, prec: u32) -> Result<Self, ArithError> {
        let (num, den) = parse_decimal_ratio(text)?;
        Scalar::from_ratio(&num, &den, prec)
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Same enclosure, rounding future operations to `prec` bits.
    pub fn with_precision(&self, prec: u32) -> Self {
        Scalar {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            prec,
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Exact width `hi - lo`.
    pub fn width(&self) -> Dyadic {
        self.hi.sub_exact(&self.lo)
    }

    /// Lower endpoint as a point enclosure.
    pub fn lower(&self) -> Scalar {
        Scalar::point(self.lo.clone(), self.prec)
    }

    /// Upper endpoint as a point enclosure.
    pub fn upper(&self) -> Scalar {
        Scalar::point(self.hi.clone(), self.prec)
    }

    /// A point inside the enclosure (the midpoint, rounded down).
    pub fn mid(&self) -> Dyadic {
        self.lo
            .add_exact(&self.hi)
            .ldexp(-1)
            .round(self.prec + 1, Round::Down)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn contains(&self, v: &Dyadic) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    /// `other` lies entirely inside `self`.
    pub fn encloses(&self, other: &Scalar) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Scalar) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Certainly `> 0`.
    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// Certainly `< 0`.
    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Smallest enclosure of both.
    pub fn hull(&self, other: &Scalar) -> Scalar {
        Scalar {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    /// Widens by `[-r, r]` for a nonnegative `r`.
    pub fn widen(&self, r: &Dyadic) -> Scalar {
        let p = self.prec;
        Scalar {
            lo: self.lo.sub(r, p, Round::Down),
            hi: self.hi.add(r, p, Round::Up),
            prec: p,
        }
    }

    pub fn abs(&self) -> Scalar {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self
        } else {
            Scalar {
                lo: Dyadic::zero(),
                hi: self.hi.clone().max(self.lo.neg()),
                prec: self.prec,
            }
        }
    }

    /// Upper bound on `|x|` over the enclosure.
    pub fn mag(&self) -> Dyadic {
        self.hi.abs().max(self.lo.abs())
    }

    pub fn max(&self, other: &Scalar) -> Scalar {
        Scalar {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    pub fn min(&self, other: &Scalar) -> Scalar {
        Scalar {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
            prec: self.prec.max(other.prec),
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn ldexp(&self, k: i64) -> Scalar {
        Scalar {
            lo: self.lo.ldexp(k),
            hi: self.hi.ldexp(k),
            prec: self.prec,
        }
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar, ArithError> {
        if other.contains_zero() {
            return Err(ArithError::DivisionByZero {
                lo: other.lo.to_string(),
                hi: other.hi.to_string(),
            });
        }
        let p = self.prec.max(other.prec);
        if other.hi.is_negative() {
            return Ok(-&self.checked_div(&-other)?);
        }
        let (a, b) = (self, other);
        let (lo, hi) = if !a.lo.is_negative() {
            (
                a.lo.div(&b.hi, p, Round::Down),
                a.hi.div(&b.lo, p, Round::Up),
            )
        } else if !a.hi.is_positive() {
            (
                a.lo.div(&b.lo, p, Round::Down),
                a.hi.div(&b.hi, p, Round::Up),
            )
        } else {
            (
                a.lo.div(&b.lo, p, Round::Down),
                a.hi.div(&b.lo, p, Round::Up),
            )
        };
        Ok(Scalar { lo, hi, prec: p })
    }

    /// Division by a positive integer.
    pub fn div_int(&self, k: u64) -> Scalar {
        assert!(k > 0, "division by zero integer");
        let d = Dyadic::new(BigInt::from(k), 0);
        let p = self.prec;
        Scalar {
            lo: self.lo.div(&d, p, Round::Down),
            hi: self.hi.div(&d, p, Round::Up),
            prec: p,
        }
    }

    pub fn mul_int(&self, k: i64) -> Scalar {
        self * &Scalar::point(Dyadic::from_i64(k), self.prec)
    }

    pub fn sqr(&self) -> Scalar {
        let a = self.abs();
        let p = a.prec;
        Scalar {
            lo: a.lo.mul(&a.lo, p, Round::Down),
            hi: a.hi.mul(&a.hi, p, Round::Up),
            prec: p,
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: u32) -> Scalar {
        if n == 0 {
            return Scalar::one(self.prec);
        }
        if n == 1 {
            return self.clone();
        }
        let half = self.powi(n / 2).sqr();
        if n.is_multiple_of(2) {
            half
        } else {
            self * &half
        }
    }

    pub fn sqrt(&self) -> Result<Scalar, ArithError> {
        if self.hi.is_negative() {
            return Err(ArithError::NegativeSqrt {
                lo: self.lo.to_string(),
                hi: self.hi.to_string(),
            });
        }
        let p = self.prec;
        let lo = if self.lo.is_negative() {
            Dyadic::zero()
        } else {
            self.lo.sqrt(p, Round::Down)
        };
        Ok(Scalar {
            lo,
            hi: self.hi.sqrt(p, Round::Up),
            prec: p,
        })
    }

    /// `self < other`, decided only when the enclosures are disjoint.
    pub fn compare_lt(&self, other: &Scalar) -> Trilean {
        if self.hi < other.lo {
            Trilean::Yes
        } else if self.lo > other.hi {
            Trilean::No
        } else {
            Trilean::Unknown
        }
    }

    /// Multivalued test between `x < -2^-k` (Yes) and `x > -2^(1-k)` (No).
    ///
    /// The two conditions overlap on `(-2^(1-k), -2^-k)`, so for any exact value
    /// at least one holds and a sufficiently tight enclosure decides.
    pub fn multivalued_negative(&self, k: u32) -> Trilean {
        let yes_bound = Dyadic::pow2(-(k as i64)).neg();
        let no_bound = Dyadic::pow2(1 - k as i64).neg();
        if self.hi < yes_bound {
            Trilean::Yes
        } else if self.lo > no_bound {
            Trilean::No
        } else {
            Trilean::Unknown
        }
    }

    /// Decimal string with `digits` fractional digits, truncated towards zero,
    /// guaranteed to lie within one unit of the last place of every value in
    /// the enclosure. `None` when the enclosure is wider than that unit.
    pub fn to_decimal(&self, digits: u32) -> Option<String> {
        let (wn, wd) = self.width().to_ratio();
        if wn * BigInt::from(10u32).pow(digits) > wd {
            return None;
        }
        // Truncate the endpoint with the larger magnitude.
        let (value, negative) = if !self.lo.is_negative() {
            (self.hi.scaled_decimal(digits, Round::Down), false)
        } else if !self.hi.is_positive() {
            (self.lo.scaled_decimal(digits, Round::Up), true)
        } else {
            // Straddles zero; width <= one unit, so 0 is within a unit of all.
            (BigInt::zero(), false)
        };
        Some(format_scaled(&value, digits, negative))
    }

    /// Decimal enclosure `[lo, hi]` with `digits` fractional digits, rounded
    /// outwards.
    pub fn decimal_bounds(&self, digits: u32) -> (String, String) {
        let side = |d: &Dyadic, dir| {
            let v = d.scaled_decimal(digits, dir);
            format_scaled(&v, digits, v.is_negative())
        };
        (side(&self.lo, Round::Down), side(&self.hi, Round::Up))
    }
}

fn format_scaled(value: &BigInt, digits: u32, negative: bool) -> String {
    let mag = value.abs().to_string();
    let digits = digits as usize;
    let padded = if mag.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - mag.len()), mag)
    } else {
        mag
    };
    let split = padded.len() - digits;
    let (int_part, frac_part) = padded.split_at(split);
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Parses `[+-]int[.frac][e[+-]exp]` into an exact ratio.
pub fn parse_decimal_ratio(text: &str) -> Result<(BigInt, BigInt), ArithError> {
    let bad = || ArithError::BadDecimal(text.to_string());
    let s = text.trim();
    let (negative, s) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let mut exp10: i64 = match exponent {
        Some(e) => e.parse().map_err(|_| bad())?,
        None => 0,
    };
    if exp10.abs() > 100_000 {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if negative {
        num = -num;
    }
    exp10 -= frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    if exp10 >= 0 {
        Ok((num * ten.pow(exp10 as u32), BigInt::from(1u32)))
    } else {
        Ok((num, ten.pow((-exp10) as u32)))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]@{}", self.lo, self.hi, self.prec)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
            prec: self.prec,
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let p = self.prec.max(rhs.prec);
        Scalar {
            lo: self.lo.add(&rhs.lo, p, Round::Down),
            hi: self.hi.add(&rhs.hi, p, Round::Up),
            prec: p,
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        let p = self.prec.max(rhs.prec);
        Scalar {
            lo: self.lo.sub(&rhs.hi, p, Round::Down),
            hi: self.hi.sub(&rhs.lo, p, Round::Up),
            prec: p,
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let p = self.prec.max(rhs.prec);
        let (a, b) = (self, rhs);
        let down = |x: &Dyadic, y: &Dyadic| x.mul(y, p, Round::Down);
        let up = |x: &Dyadic, y: &Dyadic| x.mul(y, p, Round::Up);
        let a_nonneg = !a.lo.is_negative();
        let a_nonpos = !a.hi.is_positive();
        let b_nonneg = !b.lo.is_negative();
        let b_nonpos = !b.hi.is_positive();
        let (lo, hi) = if a_nonneg {
            if b_nonneg {
                (down(&a.lo, &b.lo), up(&a.hi, &b.hi))
            } else if b_nonpos {
                (down(&a.hi, &b.lo), up(&a.lo, &b.hi))
            } else {
                (down(&a.hi, &b.lo), up(&a.hi, &b.hi))
            }
        } else if a_nonpos {
            if b_nonneg {
                (down(&a.lo, &b.hi), up(&a.hi, &b.lo))
            } else if b_nonpos {
                (down(&a.hi, &b.hi), up(&a.lo, &b.lo))
            } else {
                (down(&a.lo, &b.hi), up(&a.lo, &b.lo))
            }
        } else if b_nonneg {
            (down(&a.lo, &b.hi), up(&a.hi, &b.hi))
        } else if b_nonpos {
            (down(&a.hi, &b.lo), up(&a.lo, &b.lo))
        } else {
            (
                down(&a.lo, &b.hi).min(down(&a.hi, &b.lo)),
                up(&a.lo, &b.lo).max(up(&a.hi, &b.hi)),
            )
        };
        Scalar { lo, hi, prec: p }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl PartialOrd for Scalar {
    /// Interval order: `Some` only when the enclosures are disjoint or equal
    /// points.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.is_point() && other.is_point() && self.lo == other.lo {
            Some(Ordering::Equal)
        } else if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}
