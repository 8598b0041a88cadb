#![allow(dead_code)]

use guardivp::{Dyadic, Exact, GuardDef, Problem, Scalar, Term};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn e(s: &str) -> Exact {
    Exact::parse(s).unwrap()
}

pub fn term(c: &str, x: &[u32]) -> Term {
    Term {
        coeff: e(c),
        t_exp: 0,
        x_exp: x.to_vec(),
    }
}

/// `y1' = y2, y2' = -y1 + c y2` from `(t0, (0, 1))`.
pub fn oscillator(damping: Option<&str>, t0: &str, guard: GuardDef) -> Problem {
    let mut second = vec![term("-1", &[1, 0])];
    if let Some(c) = damping {
        second.push(term(c, &[0, 1]));
    }
    Problem::new(
        2,
        vec![vec![term("1", &[0, 1])], second],
        e(t0),
        vec![e("0"), e("1")],
        guard,
    )
    .unwrap()
}

/// `x1 <= b` in the `(t, x1, x2)` space.
pub fn x1_at_most(b: &str) -> GuardDef {
    let b = e(b);
    GuardDef::HalfSpace {
        normal: vec![e("0"), e("-1"), e("0")],
        offset: Exact::new(-b.numer(), b.denom().clone()).unwrap(),
    }
}

/// `t >= eta` in the `(t, x1, x2)` space.
pub fn time_at_least(eta: &str) -> GuardDef {
    GuardDef::HalfSpace {
        normal: vec![e("1"), e("0"), e("0")],
        offset: e(eta),
    }
}

pub fn damped_benchmark() -> Problem {
    oscillator(Some("0.02"), "0", x1_at_most("-2"))
}

pub fn ratio(d: &Dyadic) -> BigRational {
    let (n, m) = d.to_ratio();
    BigRational::new(n, m)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn enclose(q: &BigRational, prec: u32) -> Scalar {
    Scalar::from_ratio(q.numer(), q.denom(), prec).unwrap()
}

/// Whether `lo <= q <= hi`.
pub fn contains_rational(x: &Scalar, q: &BigRational) -> bool {
    &ratio(x.lo()) <= q && q <= &ratio(x.hi())
}

/// Whether `x` contains the whole interval `[lo, hi]`.
pub fn contains_range(x: &Scalar, lo: &BigRational, hi: &BigRational) -> bool {
    &ratio(x.lo()) <= lo && hi <= &ratio(x.hi())
}

/// Exact decimal literal as a rational.
pub fn decimal(s: &str) -> BigRational {
    let x = e(s);
    BigRational::new(x.numer().clone(), x.denom().clone())
}

/// Partial sums of the sine and cosine series at a rational `z` with
/// `|z| <= 1`, together with a bound on both remainders.
pub fn sin_cos(z: &BigRational, terms: usize) -> (BigRational, BigRational, BigRational) {
    let mut sin = BigRational::zero();
    let mut cos = BigRational::zero();
    let mut power = BigRational::one();
    let mut factorial = BigRational::one();
    for k in 0..terms {
        let term = &power / &factorial;
        match k % 4 {
            0 => cos += &term,
            1 => sin += &term,
            2 => cos -= &term,
            _ => sin -= &term,
        }
        power *= z;
        factorial *= BigRational::from_integer(BigInt::from(k + 1));
    }
    // Alternating series with decreasing terms: the first omitted term bounds
    // the remainder.
    let rem = (power / factorial).abs();
    (sin, cos, rem)
}
