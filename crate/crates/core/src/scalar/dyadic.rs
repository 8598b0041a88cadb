//! Binary floating values `m * 2^e` with explicitly directed rounding.
//!
//! These are the endpoints of [`Scalar`](super::Scalar) enclosures. Every
//! rounding operation takes a [`Round`] direction; lower endpoints are always
//! rounded towards negative infinity and upper endpoints towards positive
//! infinity, which is what makes interval results sound.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Rounding direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Round {
    pub fn flip(self) -> Round {
        match self {
            Round::Down => Round::Up,
            Round::Up => Round::Down,
        }
    }
}

/// Exact dyadic rational `mant * 2^exp`.
///
/// Normalized: zero is stored as `(0, 0)`, any other value has an odd
/// mantissa. Two equal values therefore always have identical representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from_i64(1)
    }

    pub fn from_i64(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    /// Builds `mant * 2^exp` exactly.
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: k,
        }
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Exponent of the bit just above the most significant one, so that
    /// `|self| < 2^top()`. Meaningless for zero.
    pub fn top(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn ldexp(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    /// Rounds to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Round) -> Self {
        round_parts(self.mant.clone(), self.exp, prec, dir)
    }

    /// Rounds to an integer multiple of `2^k` in direction `dir`.
    pub fn round_to_exp(&self, k: i64, dir: Round) -> Self {
        if self.is_zero() || self.exp >= k {
            return self.clone();
        }
        let shift = (k - self.exp) as u64;
        Dyadic::new(shift_round(&self.mant, shift, dir), k)
    }

    /// Exact sum.
    pub fn add_exact(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub_exact(&self, other: &Dyadic) -> Dyadic {
        self.add_exact(&other.neg())
    }

    pub fn mul_exact(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    /// Directed-rounding sum at `prec` bits.
    ///
    /// Whichever operand is far below the other's rounding position is first
    /// rounded (in the same direction) to a coarser grid, so aligning
    /// exponents never builds mantissas much larger than `2 * prec` bits.
    pub fn add(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        if self.is_zero() {
            return other.round(prec, dir);
        }
        if other.is_zero() {
            return self.round(prec, dir);
        }
        let (big, small) = if self.top() >= other.top() {
            (self, other)
        } else {
            (other, self)
        };
        let cutoff = big.exp.min(big.top() - prec as i64) - 2;
        if small.exp < cutoff {
            let small = small.round_to_exp(cutoff, dir);
            return big.add_exact(&small).round(prec, dir);
        }
        self.add_exact(other).round(prec, dir)
    }

    pub fn sub(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        self.add(&other.neg(), prec, dir)
    }

    pub fn mul(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        round_parts(&self.mant * &other.mant, self.exp + other.exp, prec, dir)
    }

    /// Directed-rounding quotient. `other` must be nonzero.
    pub fn div(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        // Scale the numerator so the integer quotient carries prec + 2 bits.
        let want = prec as i64 + 2 + other.mant.bits() as i64 - self.mant.bits() as i64;
        let shift = want.max(0);
        let num = &self.mant << shift as u64;
        let q = div_round(&num, &other.mant, dir);
        round_parts(q, self.exp - other.exp - shift, prec, dir)
    }

    /// Directed-rounding square root. `self` must be nonnegative.
    pub fn sqrt(&self, prec: u32, dir: Round) -> Dyadic {
        assert!(!self.is_negative(), "square root of a negative dyadic");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let need = 2 * (prec as i64 + 2) - self.mant.bits() as i64;
        let mut shift = need.max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let n = &self.mant << shift as u64;
        let mut r = n.sqrt();
        if dir == Round::Up && &r * &r != n {
            r += 1;
        }
        round_parts(r, (self.exp - shift) / 2, prec, dir)
    }

    /// Exact rational value as `(numerator, denominator)`.
    pub fn to_ratio(&self) -> (BigInt, BigInt) {
        if self.exp >= 0 {
            (&self.mant << self.exp as u64, BigInt::one())
        } else {
            (self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// `floor(self * 10^digits)` or `ceil(..)` depending on `dir`.
    pub fn scaled_decimal(&self, digits: u32, dir: Round) -> BigInt {
        let (num, den) = self.to_ratio();
        let num = num * BigInt::from(10u32).pow(digits);
        div_round(&num, &den, dir)
    }

    /// Nearest `f64`, for diagnostics and heuristics only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let (m, e) = if bits > 60 {
            let s = bits - 60;
            (&self.mant >> s, self.exp + s as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        let m: i64 = (&m).try_into().expect("mantissa fits in 61 bits");
        let e = e.clamp(-2000, 2000) as i32;
        (m as f64) * 2f64.powi(e)
    }

    /// Exact conversion from a finite `f64`.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = (bits & ((1u64 << 52) - 1)) as i64;
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1i64 << 52), raw_exp - 1075)
        };
        Some(Dyadic::new(BigInt::from(sign * m), e))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.signum();
        let sb = other.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // Same sign, nonzero: compare magnitudes by top bit first.
        let mag = match self.top().cmp(&other.top()) {
            Ordering::Equal => {
                let e = self.exp.min(other.exp);
                let a = self.mant.abs() << (self.exp - e) as u64;
                let b = other.mant.abs() << (other.exp - e) as u64;
                a.cmp(&b)
            }
            o => o,
        };
        if sa > 0 {
            mag
        } else {
            mag.reverse()
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

/// `m >> shift`, rounded in direction `dir` (floor or ceiling).
fn shift_round(m: &BigInt, shift: u64, dir: Round) -> BigInt {
    match dir {
        // BigInt's arithmetic shift rounds towards negative infinity.
        Round::Down => m >> shift,
        Round::Up => -((-m) >> shift),
    }
}

fn round_parts(mant: BigInt, exp: i64, prec: u32, dir: Round) -> Dyadic {
    let bits = mant.bits();
    if bits <= prec as u64 {
        return Dyadic::new(mant, exp);
    }
    let shift = bits - prec as u64;
    Dyadic::new(shift_round(&mant, shift, dir), exp + shift as i64)
}

/// Integer quotient rounded as floor (`Down`) or ceiling (`Up`).
fn div_round(num: &BigInt, den: &BigInt, dir: Round) -> BigInt {
    match dir {
        Round::Down => num.div_floor(den),
        Round::Up => -((-num).div_floor(den)),
    }
}
