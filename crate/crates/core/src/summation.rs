//! Certified summation of Taylor series.
//!
//! If `|y(z)| <= M` on the circle `|z| = R`, the Cauchy estimate
//! `|a_n| <= M R^-n` bounds the tail after index `n` by
//! `M R / (R - |z|) * (|z| / R)^(n+1)` for `|z| < R`. The pair `(R, M)` comes
//! from a bound `U` on the flow over a complex neighbourhood of the expansion
//! point: with `R = min(delta, eps / U)` the trajectory cannot leave that
//! neighbourhood within complex time `R`, so `M_v = |w_v| + R U` works.

use thiserror::Error;

use crate::flow::{FlowError, PolyFlow, State};
use crate::scalar::{Dyadic, Round, Scalar};
use crate::taylor::SeriesSystem;

/// Precision of the tail-bound arithmetic. Every quantity is rounded upward,
/// so this only affects how tight the bound is, never its validity.
const BOUND_PREC: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SummationError {
    #[error("evaluation point |z| = {z} is not certainly inside the radius {radius}")]
    OutsideRadius { z: String, radius: String },
    #[error("truncation order would exceed the cap of {cap} terms")]
    OrderCap { cap: usize },
}

/// `(U, R, M)`: flow bound, validity radius, per-component modulus bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTriple {
    pub flow_bound: Scalar,
    pub radius: Scalar,
    pub modulus: Vec<Scalar>,
}

impl BoundTriple {
    /// Computes `U = bound(F)`, `R = min(delta, eps / U)` (or `delta` when
    /// `U` may vanish) and `M_v = |w_v| + R U`. All three are point values
    /// rounded in the safe direction: `R` down, `U` and `M` up.
    pub fn derive(
        flow: &PolyFlow,
        s: &State,
        delta: &Scalar,
        eps: &Scalar,
    ) -> Result<BoundTriple, FlowError> {
        let prec = s.t.precision();
        let u = flow.bound(s, delta, eps)?;
        let delta_lo = delta.lo().clone();
        let radius = if u.contains_zero() {
            delta_lo
        } else {
            let by_eps = eps
                .lower()
                .checked_div(&u)
                .expect("flow bound excludes zero")
                .lo()
                .clone();
            delta_lo.min(by_eps)
        };
        let radius = Scalar::point(radius, prec);
        let reach = (&radius * &u).hi().clone();
        let modulus =
            s.w.iter()
                .map(|w| Scalar::point(w.mag().add(&reach, prec, Round::Up), prec))
                .collect();
        Ok(BoundTriple {
            flow_bound: u,
            radius,
            modulus,
        })
    }

    pub fn flow_bound(&self) -> &Scalar {
        &self.flow_bound
    }

    pub fn radius(&self) -> &Scalar {
        &self.radius
    }
}

/// Tail bound `M R / (R - |z|) * (|z|/R)^(n+1)` as an upper point value.
///
/// Fails unless `|z| < R` is certain.
pub fn truncation_bound(
    modulus: &Scalar,
    radius: &Scalar,
    z_abs: &Scalar,
    n: usize,
) -> Result<Scalar, SummationError> {
    let tail = TailBound::new(modulus, radius, z_abs)?;
    Ok(Scalar::point(tail.at(n), modulus.precision()))
}

/// Geometric tail bound `factor * ratio^(n+1)`, all upper bounds.
#[derive(Debug, Clone)]
struct TailBound {
    factor: Dyadic,
    ratio: Dyadic,
}

impl TailBound {
    fn new(modulus: &Scalar, radius: &Scalar, z_abs: &Scalar) -> Result<Self, SummationError> {
        let z = z_abs.abs().hi().clone();
        let r = radius.lo().clone();
        if z >= r {
            return Err(SummationError::OutsideRadius {
                z: z.to_string(),
                radius: r.to_string(),
            });
        }
        if z.is_zero() {
            return Ok(TailBound {
                factor: Dyadic::zero(),
                ratio: Dyadic::zero(),
            });
        }
        let p = BOUND_PREC;
        let m = modulus.hi().clone();
        // factor = M R / (R - z): round the denominator down.
        let gap = r.sub(&z, p, Round::Down);
        let factor = m.mul(&r, p, Round::Up).div(&gap, p, Round::Up);
        let ratio = z.div(&r, p, Round::Up);
        Ok(TailBound { factor, ratio })
    }

    fn at(&self, n: usize) -> Dyadic {
        let mut power = Dyadic::one();
        let mut base = self.ratio.clone();
        let mut e = n + 1;
        while e > 0 {
            if e & 1 == 1 {
                power = power.mul(&base, BOUND_PREC, Round::Up);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, BOUND_PREC, Round::Up);
            }
        }
        self.factor.mul(&power, BOUND_PREC, Round::Up)
    }

    /// Smallest `n <= cap` with `at(n) <= target`, and that bound.
    fn order_for(&self, target: &Dyadic, cap: usize) -> Option<(usize, Dyadic)> {
        if self.ratio.is_zero() || self.factor.is_zero() {
            return Some((0, Dyadic::zero()));
        }
        // (n + 1) log2(ratio) + log2(factor) <= log2(target)
        let steps = (log2(target) - log2(&self.factor)) / log2(&self.ratio);
        let mut n = (steps.ceil() as i64 - 1).clamp(0, cap as i64 + 1) as usize;
        while n > 0 && self.at(n - 1) <= *target {
            n -= 1;
        }
        loop {
            if n > cap {
                return None;
            }
            let b = self.at(n);
            if b <= *target {
                return Some((n, b));
            }
            n += 1;
        }
    }
}

/// Approximate base-2 logarithm of a positive dyadic.
fn log2(d: &Dyadic) -> f64 {
    let top = d.top();
    top as f64 + d.ldexp(-top).to_f64().log2()
}

/// Result of one certified evaluation.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Enclosures of `y_v(z)` (including the series base offset).
    pub values: Vec<Scalar>,
    /// Largest truncation order used over all components.
    pub order: usize,
}

/// Largest number of terms accepted for a given target error `2^-bits`.
pub fn order_cap(target: &Dyadic) -> usize {
    let bits = (1 - target.top()).max(1) as usize;
    16 * bits
}

/// Default summation target `2^(-p + guard)` at working precision `p`.
pub fn default_target(prec: u32, guard_bits: u32) -> Dyadic {
    Dyadic::pow2(guard_bits as i64 - prec as i64)
}

/// Bits below the working precision kept as a guard for the truncation target.
pub const GUARD_BITS: u32 = 10;

/// Evaluates the series at `z`, choosing for each component the smallest
/// order whose tail bound is at most `target`, and widening the partial sum
/// by that bound. Extends the series as needed.
pub fn eval_series(
    sys: &mut SeriesSystem,
    bounds: &BoundTriple,
    z: &Scalar,
    target: &Dyadic,
) -> Result<Evaluation, SummationError> {
    let cap = order_cap(target);
    let mut plan = Vec::with_capacity(sys.dim());
    for v in 0..sys.dim() {
        let tail = TailBound::new(&bounds.modulus[v], &bounds.radius, z)?;
        let (n, b) = tail
            .order_for(target, cap)
            .ok_or(SummationError::OrderCap { cap })?;
        plan.push((n, b));
    }
    let order = plan.iter().map(|(n, _)| *n).max().unwrap_or(0);
    sys.extend(order);
    let values = plan
        .iter()
        .enumerate()
        .map(|(v, (n, b))| {
            let sum = horner(&sys.coeffs(v)[..=*n], z);
            (&sys.base()[v] + &sum).widen(b)
        })
        .collect();
    Ok(Evaluation { values, order })
}

/// Partial sums `sum_{k<=n} a_{v,k} z^k` (without the base offset).
pub fn partial_sum(sys: &mut SeriesSystem, z: &Scalar, n: usize) -> Vec<Scalar> {
    sys.extend(n);
    (0..sys.dim())
        .map(|v| horner(&sys.coeffs(v)[..=n], z))
        .collect()
}

fn horner(coeffs: &[Scalar], z: &Scalar) -> Scalar {
    let mut it = coeffs.iter().rev();
    let mut acc = it
        .next()
        .cloned()
        .unwrap_or_else(|| Scalar::zero(z.precision()));
    for c in it {
        acc = &(&acc * z) + c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Monomial;

    const P: u32 = 128;

    fn s(v: &str) -> Scalar {
        Scalar::parse_decimal(v, P).unwrap()
    }

    fn mono(c: &str, k: u32, x: &[u32]) -> Monomial {
        Monomial::new(s(c), k, x.to_vec())
    }

    fn oscillator(damped: bool) -> PolyFlow {
        let mut second = vec![mono("-1", 0, &[1, 0])];
        if damped {
            second.push(mono("0.02", 0, &[0, 1]));
        }
        PolyFlow::new(2, vec![vec![mono("1", 0, &[0, 1])], second]).unwrap()
    }

    fn state(w: &[&str]) -> State {
        State::new(s("0"), w.iter().map(|v| s(v)).collect())
    }

    #[test]
    fn derive_bounds_examples() {
        let one = s("1");
        for damped in [true, false] {
            let b =
                BoundTriple::derive(&oscillator(damped), &state(&["0", "1"]), &one, &one).unwrap();
            assert_eq!(b.flow_bound, s("2"));
            assert_eq!(b.radius, s("0.5"));
            assert_eq!(b.modulus, vec![s("1"), s("2")]);
        }
        let b = BoundTriple::derive(&PolyFlow::zero(2), &state(&["3", "4"]), &one, &one).unwrap();
        assert!(b.flow_bound.lo().is_zero());
        assert_eq!(b.radius, s("1"));
        assert_eq!(b.modulus, vec![s("3"), s("4")]);
    }

    #[test]
    fn bound_triple_invariants() {
        let delta = s("0.7");
        let eps = s("1.3");
        let st = state(&["-1.5", "2.25"]);
        let b = BoundTriple::derive(&oscillator(true), &st, &delta, &eps).unwrap();
        assert!(b.radius.is_positive());
        assert!(b.radius.hi() <= delta.hi());
        assert!((&b.radius * &b.flow_bound).hi() <= eps.hi());
        for (m, w) in b.modulus.iter().zip(&st.w) {
            assert!(m.lo() >= &w.mag());
        }
    }

    #[test]
    fn truncation_bound_examples() {
        let b = truncation_bound(&s("1"), &s("0.5"), &s("0.25"), 3).unwrap();
        assert_eq!(b, s("0.125"));
        let b = truncation_bound(&s("1"), &s("0.5"), &s("0"), 7).unwrap();
        assert!(b.lo().is_zero());
        let mut prev = truncation_bound(&s("1"), &s("0.5"), &s("0.25"), 0).unwrap();
        for n in 1..40 {
            let b = truncation_bound(&s("1"), &s("0.5"), &s("0.25"), n).unwrap();
            assert_eq!(b, prev.ldexp(-1));
            prev = b;
        }
        assert!(matches!(
            truncation_bound(&s("1"), &s("0.5"), &s("0.5"), 3),
            Err(SummationError::OutsideRadius { .. })
        ));
    }

    #[test]
    fn truncation_bound_is_monotone() {
        let m = s("3");
        let r = s("0.75");
        let zs = ["0", "0.1", "0.2", "0.375", "0.5", "0.7"];
        for n in 0..20 {
            let row: Vec<Dyadic> = zs
                .iter()
                .map(|z| truncation_bound(&m, &r, &s(z), n).unwrap().hi().clone())
                .collect();
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
            for z in zs {
                let now = truncation_bound(&m, &r, &s(z), n).unwrap();
                let next = truncation_bound(&m, &r, &s(z), n + 1).unwrap();
                assert!(next.hi() <= now.hi());
            }
        }
    }

    #[test]
    fn eval_at_center_returns_initial_value() {
        let f = oscillator(false);
        let st = state(&["0", "1"]);
        let one = s("1");
        let b = BoundTriple::derive(&f, &st, &one, &one).unwrap();
        let mut sys = SeriesSystem::for_state(&f, &st, 0).unwrap();
        let ev = eval_series(&mut sys, &b, &s("0"), &default_target(P, GUARD_BITS)).unwrap();
        assert_eq!(ev.values, vec![s("0"), s("1")]);
        assert_eq!(ev.order, 0);
    }

    #[test]
    fn eval_encloses_sine() {
        let f = oscillator(false);
        let st = state(&["0", "1"]);
        let one = s("1");
        let b = BoundTriple::derive(&f, &st, &one, &one).unwrap();
        let mut sys = SeriesSystem::for_state(&f, &st, 0).unwrap();
        let ev = eval_series(&mut sys, &b, &s("0.25"), &Dyadic::pow2(-30)).unwrap();
        // sin(0.25) = 0.24740395925452292960...
        let lo = s("0.2474039592545229");
        let hi = s("0.2474039592545230");
        assert!(ev.values[0].lo() <= lo.lo() && hi.hi() <= ev.values[0].hi());
        assert!(ev.values[0].width() <= Dyadic::pow2(-28));
        // cos(0.25) = 0.96891242171064478414...
        assert!(ev.values[1].contains(s("0.9689124217106447").lo()));
    }

    #[test]
    fn eval_constant_flow() {
        let f = PolyFlow::zero(1);
        let st = state(&["5"]);
        let one = s("1");
        let b = BoundTriple::derive(&f, &st, &one, &one).unwrap();
        let mut sys = SeriesSystem::for_state(&f, &st, 0).unwrap();
        let ev = eval_series(&mut sys, &b, &s("0.5"), &Dyadic::pow2(-40)).unwrap();
        assert!(ev.values[0].contains(s("5").lo()));
        assert!(ev.values[0].width() <= Dyadic::pow2(-39));
    }

    #[test]
    fn order_cap_aborts() {
        let f = oscillator(false);
        let st = state(&["0", "1"]);
        let one = s("1");
        let b = BoundTriple::derive(&f, &st, &one, &one).unwrap();
        let mut sys = SeriesSystem::for_state(&f, &st, 0).unwrap();
        // |z| / R just below one needs far more than 16 * 8 terms for 2^-8.
        let z = s("0.4999999");
        assert_eq!(
            eval_series(&mut sys, &b, &z, &Dyadic::pow2(-8)).unwrap_err(),
            SummationError::OrderCap { cap: 128 }
        );
    }
}
