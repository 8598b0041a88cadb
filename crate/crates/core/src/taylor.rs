//! Taylor coefficients `a_{v,n}` of IVP solutions, computed by finite
//! recursions and extended lazily.
//!
//! Two routes are provided:
//!
//! * [`SeriesSystem::general`] expects a flow already re-centred so that the
//!   initial value is the zero vector. It keeps a cache of the coefficients of
//!   the powers `(y_v)^i` and uses the fact that those vanish below index `i`.
//! * [`SeriesSystem::linear`] handles autonomous affine flows with an
//!   arbitrary initial value directly, without any power cache.
//!
//! [`SeriesSystem::for_state`] picks the cheaper route.

use thiserror::Error;

use crate::flow::{FlowError, PolyFlow, State};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("flow is not autonomous linear")]
    NotAutonomousLinear,
    #[error("initial value has {found} components, flow dimension is {expected}")]
    InitialDimension { expected: usize, found: usize },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Coefficient `n` of `(y)^(i+1)` given the coefficients of `y` and of
/// `(y)^i`: the Cauchy product `sum_{j<=n} a_j * a^(i)_{n-j}`.
///
/// Terms with an exactly-zero factor are skipped, which is where the
/// vanishing of `a^(i)_n` for `i > n` (zero initial value) pays off.
pub fn power_step(a: &[Scalar], power_i: &[Scalar], n: usize) -> Scalar {
    let prec = a.first().map(Scalar::precision).unwrap_or(64);
    let mut acc = Scalar::zero(prec);
    for j in 0..=n {
        let (x, y) = (&a[j], &power_i[n - j]);
        if is_exact_zero(x) || is_exact_zero(y) {
            continue;
        }
        acc = &acc + &(x * y);
    }
    acc
}

fn is_exact_zero(x: &Scalar) -> bool {
    x.is_point() && x.lo().is_zero()
}

#[derive(Debug, Clone)]
struct LinearParts {
    constant: Vec<Option<Scalar>>,
    /// `terms[v]` lists `(j, c_{v,e_j})`.
    terms: Vec<Vec<(usize, Scalar)>>,
}

/// A stored monomial of the recentred flow with its active variables.
#[derive(Debug, Clone)]
struct Term {
    coeff: Scalar,
    t_exp: usize,
    /// `(variable, exponent)` for every exponent > 0.
    active: Vec<(usize, u32)>,
}

#[derive(Debug, Clone)]
enum Route {
    Linear(LinearParts),
    General {
        terms: Vec<Vec<Term>>,
        /// `powers[v][i - 2]` holds the coefficients of `(z_v)^i`, `i >= 2`.
        powers: Vec<Vec<Vec<Scalar>>>,
    },
}

/// Lazily extended Taylor coefficients of a solution, together with the
/// offset that is added back on evaluation (the re-centring point).
#[derive(Debug, Clone)]
pub struct SeriesSystem {
    dim: usize,
    prec: u32,
    base: Vec<Scalar>,
    coeffs: Vec<Vec<Scalar>>,
    route: Route,
}

impl SeriesSystem {
    /// Coefficients of `z' = E(t, z)`, `z(0) = 0`, up to `order`.
    pub fn general(flow: &PolyFlow, order: usize) -> Self {
        let dim = flow.dim();
        let prec = flow_precision(flow);
        let terms = (0..dim)
            .map(|v| {
                flow.monomials(v)
                    .map(|m| Term {
                        coeff: m.coeff.clone(),
                        t_exp: m.t_exp as usize,
                        active: m
                            .x_exp
                            .iter()
                            .enumerate()
                            .filter(|(_, &e)| e > 0)
                            .map(|(j, &e)| (j, e))
                            .collect(),
                    })
                    .collect()
            })
            .collect();
        let powers = (0..dim)
            .map(|j| {
                let top = flow.max_state_exponent(j);
                vec![vec![Scalar::zero(prec)]; top.saturating_sub(1) as usize]
            })
            .collect();
        let mut sys = SeriesSystem {
            dim,
            prec,
            base: vec![Scalar::zero(prec); dim],
            coeffs: vec![vec![Scalar::zero(prec)]; dim],
            route: Route::General { terms, powers },
        };
        sys.extend(order);
        sys
    }

    /// Coefficients of `y' = F(y)`, `y(0) = w0`, for an autonomous affine `F`.
    pub fn linear(flow: &PolyFlow, w0: &[Scalar], order: usize) -> Result<Self, SeriesError> {
        if !flow.is_autonomous_linear() {
            return Err(SeriesError::NotAutonomousLinear);
        }
        let dim = flow.dim();
        if w0.len() != dim {
            return Err(SeriesError::InitialDimension {
                expected: dim,
                found: w0.len(),
            });
        }
        let prec = w0
            .iter()
            .map(Scalar::precision)
            .chain(std::iter::once(flow_precision(flow)))
            .max()
            .unwrap_or(64);
        let mut constant = vec![None; dim];
        let mut terms = vec![Vec::new(); dim];
        for v in 0..dim {
            for m in flow.monomials(v) {
                match m.x_exp.iter().position(|&e| e == 1) {
                    Some(j) => terms[v].push((j, m.coeff)),
                    None => constant[v] = Some(m.coeff),
                }
            }
        }
        let mut sys = SeriesSystem {
            dim,
            prec,
            base: vec![Scalar::zero(prec); dim],
            coeffs: w0.iter().map(|w| vec![w.clone()]).collect(),
            route: Route::Linear(LinearParts { constant, terms }),
        };
        sys.extend(order);
        Ok(sys)
    }

    /// Series of the solution through `state`: the linear route when `flow`
    /// is autonomous linear, otherwise the general route on the flow
    /// re-centred at `state` (with `state.w` as evaluation offset).
    pub fn for_state(flow: &PolyFlow, state: &State, order: usize) -> Result<Self, SeriesError> {
        if flow.is_autonomous_linear() {
            return SeriesSystem::linear(flow, &state.w, order);
        }
        let recentred = flow.recenter(state)?;
        let mut sys = SeriesSystem::general(&recentred, order);
        sys.base = state.w.clone();
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Highest computed coefficient index.
    pub fn order(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.route, Route::Linear(_))
    }

    /// Offset added to the series on evaluation.
    pub fn base(&self) -> &[Scalar] {
        &self.base
    }

    /// `a_{v,n}`; `n` must not exceed [`order`](Self::order).
    pub fn coeff(&self, v: usize, n: usize) -> &Scalar {
        &self.coeffs[v][n]
    }

    /// All computed coefficients of component `v`.
    pub fn coeffs(&self, v: usize) -> &[Scalar] {
        &self.coeffs[v]
    }

    /// `a^(i)_{v,n}`, the coefficient of `t^n` in `(z_v)^i`.
    pub fn power_coeff(&self, v: usize, i: u32, n: usize) -> Scalar {
        match i {
            0 => {
                if n == 0 {
                    Scalar::one(self.prec)
                } else {
                    Scalar::zero(self.prec)
                }
            }
            1 => self.coeffs[v][n].clone(),
            _ => match &self.route {
                Route::General { powers, .. } => match powers[v].get(i as usize - 2) {
                    Some(row) => row[n].clone(),
                    None => self.power_from_scratch(v, i, n),
                },
                Route::Linear(_) => self.power_from_scratch(v, i, n),
            },
        }
    }

    fn power_from_scratch(&self, v: usize, i: u32, n: usize) -> Scalar {
        let a = &self.coeffs[v][..=n];
        let mut row: Vec<Scalar> = (0..=n).map(|m| self.power_coeff(v, 0, m)).collect();
        for _ in 0..i {
            row = (0..=n).map(|m| power_step(a, &row, m)).collect();
        }
        row[n].clone()
    }

    /// Makes coefficients up to `new_order` available. Existing coefficients
    /// are left untouched.
    pub fn extend(&mut self, new_order: usize) {
        while self.order() < new_order {
            let l = self.order();
            let next: Vec<Scalar> = (0..self.dim).map(|v| self.next_coeff(v, l)).collect();
            for (v, c) in next.into_iter().enumerate() {
                self.coeffs[v].push(c);
            }
            self.extend_powers(l + 1);
        }
    }

    /// `a_{v,l+1}` from coefficients up to index `l`.
    fn next_coeff(&self, v: usize, l: usize) -> Scalar {
        let prec = self.prec;
        match &self.route {
            Route::Linear(parts) => {
                let mut acc = match (&parts.constant[v], l) {
                    (Some(c), 0) => c.clone(),
                    _ => Scalar::zero(prec),
                };
                for (j, c) in &parts.terms[v] {
                    acc = &acc + &(c * &self.coeffs[*j][l]);
                }
                acc.div_int(l as u64 + 1)
            }
            Route::General { terms, powers } => {
                let mut acc = Scalar::zero(prec);
                for term in &terms[v] {
                    if term.t_exp > l {
                        continue;
                    }
                    let rest = l - term.t_exp;
                    let sum = if term.active.is_empty() {
                        if rest == 0 {
                            Some(Scalar::one(prec))
                        } else {
                            None
                        }
                    } else {
                        self.convolve(powers, &term.active, rest)
                    };
                    if let Some(sum) = sum {
                        acc = &acc + &(&term.coeff * &sum);
                    }
                }
                acc.div_int(l as u64 + 1)
            }
        }
    }

    /// Sum over compositions `n_1 + .. + n_m = total` with `n_j >= i_j` of
    /// `prod_j a^(i_j)_{v_j, n_j}`. `None` when there is no admissible term.
    fn convolve(
        &self,
        powers: &[Vec<Vec<Scalar>>],
        active: &[(usize, u32)],
        total: usize,
    ) -> Option<Scalar> {
        let (&(var, exp), rest) = active.split_first()?;
        let min_rest: usize = rest.iter().map(|&(_, e)| e as usize).sum();
        if total < exp as usize + min_rest {
            return None;
        }
        let factor = |n: usize| -> &Scalar {
            if exp == 1 {
                &self.coeffs[var][n]
            } else {
                &powers[var][exp as usize - 2][n]
            }
        };
        if rest.is_empty() {
            return Some(factor(total).clone());
        }
        let mut acc: Option<Scalar> = None;
        for n in exp as usize..=total - min_rest {
            let f = factor(n);
            if is_exact_zero(f) {
                continue;
            }
            if let Some(tail) = self.convolve(powers, rest, total - n) {
                let term = f * &tail;
                acc = Some(match acc {
                    Some(a) => &a + &term,
                    None => term,
                });
            }
        }
        acc
    }

    /// Appends index `n` to every cached power row.
    fn extend_powers(&mut self, n: usize) {
        let Route::General { powers, .. } = &mut self.route else {
            return;
        };
        for (v, rows) in powers.iter_mut().enumerate() {
            for r in 0..rows.len() {
                let i = r + 2;
                let value = if n < i {
                    Scalar::zero(self.prec)
                } else if r == 0 {
                    power_step(&self.coeffs[v], &self.coeffs[v], n)
                } else {
                    power_step(&self.coeffs[v], &rows[r - 1], n)
                };
                rows[r].push(value);
            }
        }
    }
}

fn flow_precision(flow: &PolyFlow) -> u32 {
    (0..flow.dim())
        .flat_map(|v| {
            flow.monomials(v)
                .map(|m| m.coeff.precision())
                .collect::<Vec<_>>()
        })
        .max()
        .unwrap_or(64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Monomial;

    const P: u32 = 128;

    fn s(v: &str) -> Scalar {
        Scalar::parse_decimal(v, P).unwrap()
    }

    fn ratio(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(&n.into(), &d.into(), P).unwrap()
    }

    fn mono(c: &str, k: u32, x: &[u32]) -> Monomial {
        Monomial::new(s(c), k, x.to_vec())
    }

    fn sine_flow() -> PolyFlow {
        PolyFlow::new(
            2,
            vec![vec![mono("1", 0, &[0, 1])], vec![mono("-1", 0, &[1, 0])]],
        )
        .unwrap()
    }

    fn assert_coeffs(got: &[Scalar], want: &[(i64, i64)]) {
        for (n, &(num, den)) in want.iter().enumerate() {
            let w = ratio(num, den);
            assert!(
                got[n].overlaps(&w),
                "coefficient {n}: {:?} vs {num}/{den}",
                got[n]
            );
        }
    }

    #[test]
    fn power_step_examples() {
        let a: Vec<Scalar> = [1, 2, 0, 0]
            .iter()
            .map(|&v| Scalar::from_i64(v, P))
            .collect();
        let sq: Vec<Scalar> = (0..4).map(|n| power_step(&a, &a, n)).collect();
        assert_coeffs(&sq, &[(1, 1), (4, 1), (4, 1), (0, 1)]);

        let a: Vec<Scalar> = [0, 1, 0, 0]
            .iter()
            .map(|&v| Scalar::from_i64(v, P))
            .collect();
        let sq: Vec<Scalar> = (0..4).map(|n| power_step(&a, &a, n)).collect();
        assert_coeffs(&sq, &[(0, 1), (0, 1), (1, 1), (0, 1)]);
    }

    #[test]
    fn power_zero_row_is_unit() {
        let sys = SeriesSystem::general(
            &sine_flow()
                .recenter(&State::new(s("0"), vec![s("0"), s("1")]))
                .unwrap(),
            5,
        );
        for v in 0..2 {
            assert_eq!(sys.power_coeff(v, 0, 0), Scalar::one(P));
            for n in 1..=5 {
                assert!(sys.power_coeff(v, 0, n).lo().is_zero());
                assert_eq!(sys.power_coeff(v, 1, n), *sys.coeff(v, n));
            }
        }
    }

    #[test]
    fn general_sine_recentred() {
        // E = (x2 + 1, -x1): z = (sin t, cos t - 1)
        let e = sine_flow()
            .recenter(&State::new(s("0"), vec![s("0"), s("1")]))
            .unwrap();
        let sys = SeriesSystem::general(&e, 6);
        assert_coeffs(
            sys.coeffs(0),
            &[(0, 1), (1, 1), (0, 1), (-1, 6), (0, 1), (1, 120), (0, 1)],
        );
        assert_coeffs(
            sys.coeffs(1),
            &[(0, 1), (0, 1), (-1, 2), (0, 1), (1, 24), (0, 1), (-1, 720)],
        );
    }

    #[test]
    fn general_constant_and_zero_solutions() {
        let one = PolyFlow::new(1, vec![vec![mono("1", 0, &[0])]]).unwrap();
        let sys = SeriesSystem::general(&one, 4);
        assert_coeffs(sys.coeffs(0), &[(0, 1), (1, 1), (0, 1), (0, 1), (0, 1)]);

        let lin = PolyFlow::new(1, vec![vec![mono("1", 0, &[1])]]).unwrap();
        let sys = SeriesSystem::general(&lin, 6);
        assert!(sys.coeffs(0).iter().all(is_exact_zero));
    }

    #[test]
    fn general_nonlinear_riccati() {
        // z' = (z + 1)^2 = 1 + 2z + z^2, z(0) = 0: z = t / (1 - t) = t + t^2 + ...
        let f = PolyFlow::new(
            1,
            vec![vec![
                mono("1", 0, &[0]),
                mono("2", 0, &[1]),
                mono("1", 0, &[2]),
            ]],
        )
        .unwrap();
        let sys = SeriesSystem::general(&f, 10);
        let want: Vec<(i64, i64)> = std::iter::once((0, 1))
            .chain((1..=10).map(|_| (1, 1)))
            .collect();
        assert_coeffs(sys.coeffs(0), &want);
    }

    #[test]
    fn general_time_dependent() {
        // z' = t^2, z(0) = 0: z = t^3 / 3
        let f = PolyFlow::new(1, vec![vec![mono("1", 2, &[0])]]).unwrap();
        let sys = SeriesSystem::general(&f, 5);
        assert_coeffs(
            sys.coeffs(0),
            &[(0, 1), (0, 1), (0, 1), (1, 3), (0, 1), (0, 1)],
        );
    }

    #[test]
    fn vanishing_powers_with_zero_initial_value() {
        let f = PolyFlow::new(
            2,
            vec![
                vec![mono("1", 0, &[0, 0]), mono("0.5", 0, &[2, 1])],
                vec![mono("-2", 1, &[0, 0]), mono("1", 0, &[3, 0])],
            ],
        )
        .unwrap();
        let sys = SeriesSystem::general(&f, 8);
        for v in 0..2 {
            for i in 2..=3u32 {
                for n in 0..(i as usize).min(9) {
                    if n < i as usize {
                        assert!(
                            is_exact_zero(&sys.power_coeff(v, i, n)),
                            "v={v} i={i} n={n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn linear_examples() {
        let sys = SeriesSystem::linear(&sine_flow(), &[s("0"), s("1")], 6).unwrap();
        assert_coeffs(
            sys.coeffs(0),
            &[(0, 1), (1, 1), (0, 1), (-1, 6), (0, 1), (1, 120), (0, 1)],
        );
        assert_coeffs(
            sys.coeffs(1),
            &[(1, 1), (0, 1), (-1, 2), (0, 1), (1, 24), (0, 1), (-1, 720)],
        );

        let exp = PolyFlow::new(1, vec![vec![mono("1", 0, &[1])]]).unwrap();
        let sys = SeriesSystem::linear(&exp, &[s("1")], 8).unwrap();
        let mut fact = 1i64;
        for n in 0..=8 {
            if n > 0 {
                fact *= n as i64;
            }
            assert!(sys.coeff(0, n).overlaps(&ratio(1, fact)));
        }

        let sys = SeriesSystem::linear(&PolyFlow::zero(1), &[s("5")], 4).unwrap();
        assert_coeffs(sys.coeffs(0), &[(5, 1), (0, 1), (0, 1), (0, 1), (0, 1)]);
    }

    #[test]
    fn linear_rejects_nonlinear_flows() {
        let f = PolyFlow::new(1, vec![vec![mono("1", 0, &[2])]]).unwrap();
        assert_eq!(
            SeriesSystem::linear(&f, &[s("0")], 3).unwrap_err(),
            SeriesError::NotAutonomousLinear
        );
    }

    #[test]
    fn linear_affine_constant_term() {
        // y' = 3 + y, y(0) = 0: y = 3(e^t - 1), a_n = 3 / n!
        let f = PolyFlow::new(1, vec![vec![mono("3", 0, &[0]), mono("1", 0, &[1])]]).unwrap();
        let sys = SeriesSystem::linear(&f, &[s("0")], 4).unwrap();
        assert_coeffs(sys.coeffs(0), &[(0, 1), (3, 1), (3, 2), (1, 2), (1, 8)]);
    }

    #[test]
    fn extend_examples() {
        let mut sys = SeriesSystem::linear(&sine_flow(), &[s("0"), s("1")], 4).unwrap();
        let before = sys.coeffs(0).to_vec();
        sys.extend(4);
        assert_eq!(sys.order(), 4);
        sys.extend(6);
        assert_eq!(sys.order(), 6);
        assert_eq!(&sys.coeffs(0)[..5], &before[..]);
        assert!(sys.coeff(0, 5).overlaps(&ratio(1, 120)));
        assert!(sys.coeff(0, 6).lo().is_zero() && sys.coeff(0, 6).is_point());

        let mut zero = SeriesSystem::general(&PolyFlow::zero(2), 2);
        zero.extend(9);
        assert!((0..2).all(|v| zero.coeffs(v).iter().all(is_exact_zero)));
    }

    #[test]
    fn dispatch_and_linear_general_agreement() {
        let damped = PolyFlow::new(
            2,
            vec![
                vec![mono("1", 0, &[0, 1])],
                vec![mono("-1", 0, &[1, 0]), mono("0.02", 0, &[0, 1])],
            ],
        )
        .unwrap();
        let zero_state = State::new(s("0"), vec![s("0"), s("0")]);
        let lin = SeriesSystem::for_state(&damped, &zero_state, 10).unwrap();
        assert!(lin.is_linear());
        let gen = SeriesSystem::general(&damped.recenter(&zero_state).unwrap(), 10);
        for v in 0..2 {
            for n in 0..=10 {
                assert!(lin.coeff(v, n).overlaps(gen.coeff(v, n)));
            }
        }
        let quad = PolyFlow::new(1, vec![vec![mono("1", 0, &[2])]]).unwrap();
        let sys = SeriesSystem::for_state(&quad, &State::new(s("0"), vec![s("1")]), 4).unwrap();
        assert!(!sys.is_linear());
        assert_eq!(sys.base(), &[s("1")]);
        // y = 1/(1-t) = 1 + t + t^2 + ...; the series holds y - 1.
        assert_coeffs(sys.coeffs(0), &[(0, 1), (1, 1), (1, 1), (1, 1), (1, 1)]);
    }
}
