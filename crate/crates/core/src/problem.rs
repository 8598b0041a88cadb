//! Precision-independent problem description.
//!
//! Inputs are stored as exact rationals so that every restart of a solve can
//! enclose them afresh at its own working precision.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::flow::{FlowError, Monomial, PolyFlow, State};
use crate::guard::{GuardError, GuardSpec};
use crate::scalar::{parse_decimal_ratio, ArithError, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("initial state has {found} components, flow has {expected}")]
    InitialDimension { expected: usize, found: usize },
    #[error("guard has {found} coordinates, expected {expected} (time plus state)")]
    GuardDimension { expected: usize, found: usize },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Exact rational value, kept in lowest terms with a positive denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exact {
    num: BigInt,
    den: BigInt,
}

impl Exact {
    pub fn new(num: BigInt, den: BigInt) -> Result<Self, ArithError> {
        if den.is_zero() {
            return Err(ArithError::DivisionByZero {
                lo: "0".into(),
                hi: "0".into(),
            });
        }
        let g = num.gcd(&den);
        let sign = if den.is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        let g = if g.is_zero() { BigInt::one() } else { g };
        Ok(Exact {
            num: &num / &g * &sign,
            den: &den / &g * &sign,
        })
    }

    pub fn from_i64(v: i64) -> Self {
        Exact {
            num: BigInt::from(v),
            den: BigInt::one(),
        }
    }

    /// Parses a decimal literal or a fraction `p/q` of integers.
    pub fn parse(text: &str) -> Result<Self, ArithError> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            let bad = || ArithError::BadDecimal(text.to_string());
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            return Exact::new(p, q);
        }
        let (num, den) = parse_decimal_ratio(text)?;
        Exact::new(num, den)
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Outward enclosure at `prec` bits.
    pub fn enclose(&self, prec: u32) -> Scalar {
        Scalar::from_ratio(&self.num, &self.den, prec).expect("denominator is nonzero")
    }
}

/// Decimal when the denominator divides a power of ten, `p/q` otherwise.
impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let (mut twos, mut fives, mut rest) = (0u32, 0u32, self.den.clone());
        let (two, five) = (BigInt::from(2), BigInt::from(5));
        while (&rest % &two).is_zero() {
            rest /= &two;
            twos += 1;
        }
        while (&rest % &five).is_zero() {
            rest /= &five;
            fives += 1;
        }
        if !rest.is_one() {
            return write!(f, "{}/{}", self.num, self.den);
        }
        let digits = twos.max(fives);
        let scaled = &self.num * BigInt::from(10).pow(digits) / &self.den;
        let s = scaled.abs().to_string();
        let s = format!("{:0>width$}", s, width = digits as usize + 1);
        let (int_part, frac_part) = s.split_at(s.len() - digits as usize);
        let sign = if self.num.is_negative() { "-" } else { "" };
        write!(f, "{sign}{int_part}.{frac_part}")
    }
}

/// One monomial with an exact coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: Exact,
    pub t_exp: u32,
    pub x_exp: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardDef {
    /// `<normal, (t, x)> >= offset`.
    HalfSpace {
        normal: Vec<Exact>,
        offset: Exact,
    },
    Ball {
        center: Vec<Exact>,
        radius: Exact,
    },
}

/// Flow, initial state and guard of one IVP-with-guard problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    dim: usize,
    flow: Vec<Vec<Term>>,
    t0: Exact,
    w0: Vec<Exact>,
    guard: GuardDef,
}

/// A problem enclosed at one working precision.
#[derive(Debug, Clone)]
pub struct Instance {
    pub flow: PolyFlow,
    pub start: State,
    pub guard: GuardSpec,
}

impl Problem {
    /// Validates the description by instantiating it once.
    pub fn new(
        dim: usize,
        flow: Vec<Vec<Term>>,
        t0: Exact,
        w0: Vec<Exact>,
        guard: GuardDef,
    ) -> Result<Self, ProblemError> {
        let p = Problem {
            dim,
            flow,
            t0,
            w0,
            guard,
        };
        p.instantiate(64)?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flow(&self) -> &[Vec<Term>] {
        &self.flow
    }

    pub fn t0(&self) -> &Exact {
        &self.t0
    }

    pub fn w0(&self) -> &[Exact] {
        &self.w0
    }

    pub fn guard(&self) -> &GuardDef {
        &self.guard
    }

    pub fn instantiate(&self, prec: u32) -> Result<Instance, ProblemError> {
        let components = self
            .flow
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| Monomial::new(t.coeff.enclose(prec), t.t_exp, t.x_exp.clone()))
                    .collect()
            })
            .collect();
        let flow = PolyFlow::new(self.dim, components)?;
        if self.w0.len() != self.dim {
            return Err(ProblemError::InitialDimension {
                expected: self.dim,
                found: self.w0.len(),
            });
        }
        let start = State::new(
            self.t0.enclose(prec),
            self.w0.iter().map(|w| w.enclose(prec)).collect(),
        );
        let enclose_all =
            |xs: &[Exact]| -> Vec<Scalar> { xs.iter().map(|x| x.enclose(prec)).collect() };
        let coords = match &self.guard {
            GuardDef::HalfSpace { normal, .. } => normal.len(),
            GuardDef::Ball { center, .. } => center.len(),
        };
        if coords != self.dim + 1 {
            return Err(ProblemError::GuardDimension {
                expected: self.dim + 1,
                found: coords,
            });
        }
        let guard = match &self.guard {
            GuardDef::HalfSpace { normal, offset } => {
                GuardSpec::half_space(enclose_all(normal), offset.enclose(prec))?
            }
            GuardDef::Ball { center, radius } => {
                GuardSpec::ball(enclose_all(center), radius.enclose(prec))?
            }
        };
        Ok(Instance { flow, start, guard })
    }
}
