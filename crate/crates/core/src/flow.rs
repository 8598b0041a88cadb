//! Multinomial flow functions `F_v(t, x_1, .., x_d)`.
//!
//! Each component is a sparse map from the exponent tuple `(k, i_1, .., i_d)`
//! to its coefficient. Only finitely many monomials are stored, so every
//! operation here is a finite manipulation of polynomials.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::scalar::{Dyadic, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("flow has dimension {expected} but component {component} monomial has {found} state exponents")]
    ExponentLength {
        component: usize,
        expected: usize,
        found: usize,
    },
    #[error("component {component} repeats the exponent tuple t^{t_exp} x^{x_exp:?}")]
    DuplicateMonomial {
        component: usize,
        t_exp: u32,
        x_exp: Vec<u32>,
    },
    #[error("expected {expected} flow components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("state has {found} coordinates, flow dimension is {expected}")]
    StateDimension { expected: usize, found: usize },
    #[error("flow dimension must be positive")]
    ZeroDimension,
}

/// One term `c * t^k * x_1^i_1 * .. * x_d^i_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: Scalar,
    pub t_exp: u32,
    pub x_exp: Vec<u32>,
}

impl Monomial {
    pub fn new(coeff: Scalar, t_exp: u32, x_exp: Vec<u32>) -> Self {
        Monomial {
            coeff,
            t_exp,
            x_exp,
        }
    }

    /// Total degree in the state variables.
    pub fn state_degree(&self) -> u32 {
        self.x_exp.iter().sum()
    }
}

/// Exponent tuple `(k, i_1, .., i_d)`, time first.
type Key = Vec<u32>;

/// Point `(t, w)` of the extended state space.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: Scalar,
    pub w: Vec<Scalar>,
}

impl State {
    pub fn new(t: Scalar, w: Vec<Scalar>) -> Self {
        State { t, w }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// `(t, w_1, .., w_d)` as one vector.
    pub fn as_point(&self) -> Vec<Scalar> {
        std::iter::once(self.t.clone())
            .chain(self.w.iter().cloned())
            .collect()
    }
}

/// Polynomial flow with `d` components.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFlow {
    dim: usize,
    degree: u32,
    components: Vec<BTreeMap<Key, Scalar>>,
}

impl PolyFlow {
    /// Builds a flow from per-component monomial lists. The degree bound is
    /// the largest exponent that occurs.
    pub fn new(dim: usize, components: Vec<Vec<Monomial>>) -> Result<Self, FlowError> {
        if dim == 0 {
            return Err(FlowError::ZeroDimension);
        }
        if components.len() != dim {
            return Err(FlowError::ComponentCount {
                expected: dim,
                found: components.len(),
            });
        }
        let mut maps = Vec::with_capacity(dim);
        for (v, monos) in components.into_iter().enumerate() {
            let mut map = BTreeMap::new();
            for m in monos {
                if m.x_exp.len() != dim {
                    return Err(FlowError::ExponentLength {
                        component: v,
                        expected: dim,
                        found: m.x_exp.len(),
                    });
                }
                let key: Key = std::iter::once(m.t_exp)
                    .chain(m.x_exp.iter().copied())
                    .collect();
                if map.insert(key, m.coeff).is_some() {
                    return Err(FlowError::DuplicateMonomial {
                        component: v,
                        t_exp: m.t_exp,
                        x_exp: m.x_exp,
                    });
                }
            }
            maps.push(map);
        }
        Ok(PolyFlow::from_maps(dim, maps))
    }

    /// The identically zero flow.
    pub fn zero(dim: usize) -> Self {
        PolyFlow::from_maps(dim, vec![BTreeMap::new(); dim])
    }

    fn from_maps(dim: usize, components: Vec<BTreeMap<Key, Scalar>>) -> Self {
        let degree = components
            .iter()
            .flat_map(|c| c.keys())
            .flat_map(|k| k.iter().copied())
            .max()
            .unwrap_or(0);
        PolyFlow {
            dim,
            degree,
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Degree bound `mu`: no exponent exceeds it.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Monomials of component `v`, in exponent order.
    pub fn monomials(&self, v: usize) -> impl Iterator<Item = Monomial> + '_ {
        self.components[v].iter().map(|(k, c)| Monomial {
            coeff: c.clone(),
            t_exp: k[0],
            x_exp: k[1..].to_vec(),
        })
    }

    /// Number of stored monomials of component `v`.
    pub fn term_count(&self, v: usize) -> usize {
        self.components[v].len()
    }

    /// Coefficient of `t^t_exp x^x_exp` in component `v` (if stored).
    pub fn coefficient(&self, v: usize, t_exp: u32, x_exp: &[u32]) -> Option<&Scalar> {
        let key: Key = std::iter::once(t_exp)
            .chain(x_exp.iter().copied())
            .collect();
        self.components[v].get(&key)
    }

    /// Largest exponent of `x_j` (0-based) across all components.
    pub fn max_state_exponent(&self, j: usize) -> u32 {
        self.components
            .iter()
            .flat_map(|c| c.keys())
            .map(|k| k[j + 1])
            .max()
            .unwrap_or(0)
    }

    /// Same flow with every coefficient rounding at `prec` bits.
    pub fn with_precision(&self, prec: u32) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(k, v)| (k.clone(), v.with_precision(prec)))
                    .collect()
            })
            .collect();
        PolyFlow {
            dim: self.dim,
            degree: self.degree,
            components,
        }
    }

    fn check_state(&self, s: &State) -> Result<(), FlowError> {
        if s.dim() != self.dim {
            return Err(FlowError::StateDimension {
                expected: self.dim,
                found: s.dim(),
            });
        }
        Ok(())
    }

    /// Enclosure of `F(t, w)`.
    pub fn eval(&self, s: &State) -> Result<Vec<Scalar>, FlowError> {
        self.check_state(s)?;
        let point = s.as_point();
        let prec = point.iter().map(Scalar::precision).max().unwrap_or(64);
        let powers = power_tables(&point, self.degree);
        Ok(self
            .components
            .iter()
            .map(|comp| {
                comp.iter().fold(Scalar::zero(prec), |acc, (key, c)| {
                    let term = key
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .fold(c.clone(), |t, (j, &e)| &t * &powers[j][e as usize]);
                    &acc + &term
                })
            })
            .collect())
    }

    /// Upper bound `U` for `max_v |F_v|` on the complex polydisc
    /// `|t - t0| <= delta, |z_j - w_j| <= eps`, from the triangle inequality
    /// applied monomial by monomial. The result is a point value.
    pub fn bound(&self, s: &State, delta: &Scalar, eps: &Scalar) -> Result<Scalar, FlowError> {
        self.check_state(s)?;
        let prec = s.t.precision();
        let up = |x: &Scalar| Scalar::point(x.hi().clone(), prec);
        let radius: Vec<Scalar> = std::iter::once(up(&(&s.t.abs().upper() + &delta.upper())))
            .chain(s.w.iter().map(|w| up(&(&w.abs().upper() + &eps.upper()))))
            .collect();
        let powers = power_tables(&radius, self.degree);
        let mut best = Dyadic::zero();
        for comp in &self.components {
            let mut sum = Scalar::zero(prec);
            for (key, c) in comp {
                let term = key
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .fold(Scalar::point(c.mag(), prec), |t, (j, &e)| {
                        up(&(&t * &powers[j][e as usize]))
                    });
                sum = up(&(&sum + &term));
            }
            best = best.max(sum.hi().clone());
        }
        Ok(Scalar::point(best, prec))
    }

    /// Re-centred flow `E(t, x) = F(t + t0, x + w)`, computed by one Taylor
    /// shift per variable.
    pub fn recenter(&self, s: &State) -> Result<PolyFlow, FlowError> {
        self.check_state(s)?;
        let point = s.as_point();
        let mut components = self.components.clone();
        for (var, shift) in point.iter().enumerate() {
            if shift.is_point() && shift.lo().is_zero() {
                continue;
            }
            let max_e = components
                .iter()
                .flat_map(|c| c.keys())
                .map(|k| k[var])
                .max()
                .unwrap_or(0);
            if max_e == 0 {
                continue;
            }
            let pows = powers_of(shift, max_e);
            let binom = binomial_rows(max_e);
            for comp in components.iter_mut() {
                *comp = shift_variable(comp, var, &pows, &binom);
            }
        }
        Ok(PolyFlow::from_maps(self.dim, components))
    }

    /// True iff every monomial has `k = 0` and state degree at most one.
    pub fn is_autonomous_linear(&self) -> bool {
        self.components
            .iter()
            .flat_map(|c| c.keys())
            .all(|k| k[0] == 0 && k[1..].iter().sum::<u32>() <= 1)
    }
}

/// Taylor shift of variable `var` in one component.
fn shift_variable(
    comp: &BTreeMap<Key, Scalar>,
    var: usize,
    pows: &[Scalar],
    binom: &[Vec<u64>],
) -> BTreeMap<Key, Scalar> {
    let mut out: BTreeMap<Key, Scalar> = BTreeMap::new();
    for (key, c) in comp {
        let e = key[var];
        for m in 0..=e {
            let mut k = key.clone();
            k[var] = m;
            let factor = &pows[(e - m) as usize]
                * &Scalar::point(
                    Dyadic::new(binom[e as usize][m as usize].into(), 0),
                    c.precision(),
                );
            let term = c * &factor;
            match out.get_mut(&k) {
                Some(acc) => *acc = &*acc + &term,
                None => {
                    out.insert(k, term);
                }
            }
        }
    }
    out.retain(|_, c| !(c.is_point() && c.lo().is_zero()));
    out
}

/// `[1, x, x^2, .., x^n]`.
fn powers_of(x: &Scalar, n: u32) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Scalar::one(x.precision()));
    for i in 1..=n as usize {
        let next = &out[i - 1] * x;
        out.push(next);
    }
    out
}

fn power_tables(point: &[Scalar], degree: u32) -> Vec<Vec<Scalar>> {
    point.iter().map(|x| powers_of(x, degree)).collect()
}

fn binomial_rows(n: u32) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = vec![vec![1]];
    for i in 1..=n as usize {
        let prev = &rows[i - 1];
        let mut row = vec![1u64; i + 1];
        for j in 1..i {
            row[j] = prev[j - 1] + prev[j];
        }
        rows.push(row);
    }
    rows
}
