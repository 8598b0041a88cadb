//! Guard-crossing search along a validated trajectory.
//!
//! A big step re-centres the flow at the current state and builds a fresh
//! Taylor expansion with its bound triple `(U, R, M)`. Small steps then walk
//! along that expansion inside `R' = R/2`. Each accepted step time carries a
//! certified positive guard distance, and the step size `Delta / U` keeps the
//! trajectory off the guard in between, so the latest accepted time is a
//! certified left approximation of the crossing time `t_G`.
//!
//! Right approximations come from secant extrapolation: once the distance is
//! certainly below `2^-(n+1)` of the secant root, the point `t + 2 rho` is
//! recorded as a candidate and re-tested at later steps. A candidate whose
//! signed distance is certainly negative closes the bracket.
//!
//! Step times are kept as exact dyadic offsets from `t0`, so `t0 < t1 < ..`
//! holds strictly and offsets inside an expansion are exact.
//!
//! An attempt is restarted at higher precision when a needed sign cannot be
//! decided, when the series needs too many terms, or when a state enclosure
//! grows wider than `2^-n`.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::flow::{FlowError, PolyFlow, State};
use crate::guard::{GuardError, GuardSpec};
use crate::problem::{Exact, Problem, ProblemError};
use crate::scalar::{next_precision, Dyadic, Round, Scalar, Trilean, INITIAL_PRECISION};
use crate::summation::{default_target, eval_series, BoundTriple, SummationError, GUARD_BITS};
use crate::taylor::{SeriesError, SeriesSystem};

/// How often a step is halved when the distance at its end is undecided.
const STEP_RETRIES: u32 = 2;

/// Significant bits of a small-step size.
const STEP_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("target bits must be positive")]
    ZeroTargetBits,
    #[error("delta and epsilon must be positive")]
    NonPositiveRadius,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Guard(#[from] GuardError),
}

/// Resource limits. Exhausting any of them ends the solve with
/// [`HitStatus::LeftOnly`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budget {
    pub max_big_steps: u64,
    pub max_small_steps: u64,
    pub max_wall_time: Duration,
    /// Largest working precision an escalation may reach.
    pub max_bits: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_big_steps: 10_000,
            max_small_steps: 1_000_000,
            max_wall_time: Duration::from_secs(600),
            max_bits: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    /// Target bits `n`: a bracket is at most `2^-n` wide.
    pub target_bits: u32,
    /// Time radius of the complex neighbourhood used for `U`.
    pub delta: Exact,
    /// State radius of the complex neighbourhood used for `U`.
    pub epsilon: Exact,
    pub budget: Budget,
    pub initial_bits: u32,
    pub record_trajectory: bool,
}

impl SolveOptions {
    pub fn new(target_bits: u32) -> Self {
        SolveOptions {
            target_bits,
            delta: Exact::from_i64(1),
            epsilon: Exact::from_i64(1),
            budget: Budget::default(),
            initial_bits: INITIAL_PRECISION,
            record_trajectory: false,
        }
    }

    pub fn with_trajectory(mut self) -> Self {
        self.record_trajectory = true;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_radii(mut self, delta: Exact, epsilon: Exact) -> Self {
        self.delta = delta;
        self.epsilon = epsilon;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitStatus {
    Bracketed,
    LeftOnly,
}

/// Counters in the layout `n, p, b, s, l_max, time`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    pub target_bits: u32,
    pub working_bits: u32,
    /// Series constructions.
    pub big_steps: u64,
    /// Series evaluations, candidate evaluations included.
    pub small_steps: u64,
    pub max_order: usize,
    /// Wall time over all attempts.
    pub wall_time: Duration,
    /// Number of attempts, `1` when no escalation happened.
    pub attempts: u32,
}

/// Accepted step point `(t_i, w_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPoint {
    pub t: Scalar,
    pub w: Vec<Scalar>,
}

#[derive(Debug, Clone)]
pub struct GuardHit {
    pub status: HitStatus,
    /// Last certified left approximation of `t_G`.
    pub t_lo: Scalar,
    /// First candidate with a certified negative signed distance.
    pub t_hi: Option<Scalar>,
    /// Trajectory value at `t_lo`.
    pub state_lo: State,
    /// Enclosure of the state at `t_G`, when bracketed inside one expansion.
    pub state_hit: Option<Vec<Scalar>>,
    pub stats: SolverStats,
    /// Accepted step points, when requested.
    pub trajectory: Vec<StepPoint>,
}

impl GuardHit {
    pub fn is_bracketed(&self) -> bool {
        self.status == HitStatus::Bracketed
    }

    /// `t_hi - t_lo` as an upper point value.
    pub fn width(&self) -> Option<Scalar> {
        self.t_hi.as_ref().map(|hi| (hi - &self.t_lo).upper())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateStatus {
    Open,
    Rejected,
}

/// Possible right approximation `t_hat = t_left + 2 rho`. The solver keeps
/// candidate times as offsets from `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub j: usize,
    pub t_hat: Scalar,
    pub t_left: Scalar,
    pub status: CandidateStatus,
    /// Cached signed distance at `t_hat`.
    pub gamma: Option<Scalar>,
}

/// `min(dist / U, R' - consumed)`, as a certified lower bound. Returns
/// `R' - consumed` when `U` may vanish.
pub fn small_step_size(dist: &Scalar, u: &Scalar, r_prime: &Scalar, consumed: &Scalar) -> Scalar {
    let room = (r_prime.lower() - consumed.upper()).lower();
    if u.contains_zero() {
        return room;
    }
    let by_dist = dist
        .lower()
        .checked_div(&u.upper())
        .expect("U excludes zero")
        .lower();
    by_dist.min(&room).lower()
}

/// Whether the accumulated offset calls for re-centring.
pub fn big_step_due(s1: &Scalar, r: &Scalar, consumed: &Scalar) -> bool {
    let half = r.ldexp(-1);
    let quarter_root = s1.abs().sqrt().and_then(|x| x.sqrt()).expect("nonnegative");
    let threshold = (&quarter_root * &r.abs().sqrt().expect("nonnegative")).min(&half);
    if threshold.compare_lt(consumed).is_yes() {
        return true;
    }
    // Never sum beyond R/2.
    consumed.hi() >= half.lo()
}

/// Outcome of the secant test at one step.
#[derive(Debug, Clone, PartialEq)]
pub enum Secant {
    /// Approaching, with `rho = delta / |slope| < 2^-(n+1)` certified.
    Close(Scalar),
    /// Receding, flat, or `rho >= 2^-(n+1)` certified.
    Far,
    Undecided,
}

/// Secant slope and root distance between two accepted steps.
pub fn secant(
    t_prev: &Scalar,
    t_cur: &Scalar,
    delta_prev: &Scalar,
    delta_cur: &Scalar,
    n: u32,
) -> Secant {
    let slope = match (delta_cur - delta_prev).checked_div(&(t_cur - t_prev)) {
        Ok(s) => s,
        Err(_) => return Secant::Undecided,
    };
    if !slope.is_negative() {
        return if slope.lo().signum() >= 0 {
            Secant::Far
        } else {
            Secant::Undecided
        };
    }
    let rho = delta_cur
        .checked_div(&slope.abs())
        .expect("slope excludes zero");
    let gate = Scalar::pow2(-(n as i64) - 1, rho.precision());
    match rho.compare_lt(&gate) {
        Trilean::Yes => Secant::Close(rho),
        Trilean::No => Secant::Far,
        Trilean::Unknown => Secant::Undecided,
    }
}

/// Candidate `t_cur + 2 rho` (rounded up) when the secant test passes and the
/// candidate lies within `2^-n` of `t_cur`.
pub fn propose_candidate(
    t_prev: &Scalar,
    t_cur: &Scalar,
    delta_prev: &Scalar,
    delta_cur: &Scalar,
    n: u32,
    j: usize,
) -> Option<Candidate> {
    match secant(t_prev, t_cur, delta_prev, delta_cur, n) {
        Secant::Close(rho) => candidate_from(t_cur, &rho, n, j),
        _ => None,
    }
}

fn candidate_from(t_cur: &Scalar, rho: &Scalar, n: u32, j: usize) -> Option<Candidate> {
    let prec = t_cur.precision();
    let t_hat = t_cur.hi().add(&rho.hi().ldexp(1), prec, Round::Up);
    if t_hat.sub_exact(t_cur.lo()) > Dyadic::pow2(-(n as i64)) {
        return None;
    }
    Some(Candidate {
        j,
        t_hat: Scalar::point(t_hat, prec),
        t_left: t_cur.clone(),
        status: CandidateStatus::Open,
        gamma: None,
    })
}

/// Re-tests the open candidates against the multivalued test with `k = j`.
///
/// Returns the first `t_hat` with a certainly negative signed distance.
/// Candidates with certainly positive distance, or already passed by the
/// current step time `t_now`, are rejected and dropped. `gamma_at` returns
/// `None` for a candidate that cannot be evaluated yet.
pub fn retest_candidates(
    list: &mut Vec<Candidate>,
    j: usize,
    t_now: &Scalar,
    mut gamma_at: impl FnMut(&Candidate) -> Option<Scalar>,
) -> Option<Scalar> {
    let k = u32::try_from(j.max(1)).unwrap_or(u32::MAX);
    let mut hit = None;
    for c in list
        .iter_mut()
        .filter(|c| c.status == CandidateStatus::Open)
    {
        if (!c.t_hat.compare_lt(t_now)).is_no() {
            c.status = CandidateStatus::Rejected;
            continue;
        }
        let Some(g) = gamma_at(c) else { continue };
        match g.multivalued_negative(k) {
            Trilean::Yes => {
                hit = Some(c.t_hat.clone());
                break;
            }
            Trilean::No if g.is_positive() => c.status = CandidateStatus::Rejected,
            _ => {}
        }
    }
    list.retain(|c| c.status == CandidateStatus::Open);
    hit
}

/// Solves the problem, escalating the working precision until the outcome
/// is decided or the budget runs out.
pub fn solve(problem: &Problem, options: &SolveOptions) -> Result<GuardHit, SolveError> {
    if options.target_bits == 0 {
        return Err(SolveError::ZeroTargetBits);
    }
    if options.delta.numer().sign() != num_bigint::Sign::Plus
        || options.epsilon.numer().sign() != num_bigint::Sign::Plus
    {
        return Err(SolveError::NonPositiveRadius);
    }
    let started = Instant::now();
    let mut prec = options.initial_bits.max(2);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let mut attempt = Attempt::new(problem, options, prec, started)?;
        let outcome = attempt.run()?;
        let mut hit = match outcome {
            Outcome::Done(hit) => *hit,
            Outcome::Escalate => {
                let next = next_precision(prec);
                let out_of_time = started.elapsed() >= options.budget.max_wall_time;
                if next <= options.budget.max_bits && !out_of_time {
                    prec = next;
                    continue;
                }
                attempt.left_only()
            }
        };
        hit.stats.attempts = attempts;
        hit.stats.wall_time = started.elapsed();
        return Ok(hit);
    }
}

enum Outcome {
    Done(Box<GuardHit>),
    Escalate,
}

/// Signal to restart at higher precision.
struct Undecided;

impl From<SummationError> for Undecided {
    fn from(_: SummationError) -> Self {
        Undecided
    }
}

type Step<T> = Result<Result<T, Undecided>, SolveError>;

/// One Taylor expansion with its validity data.
struct Expansion {
    center: Dyadic,
    sys: SeriesSystem,
    bounds: BoundTriple,
    r_prime: Dyadic,
    s1: Option<Dyadic>,
}

/// All mutable state of one solve at a fixed precision.
struct Attempt<'a> {
    options: &'a SolveOptions,
    prec: u32,
    flow: PolyFlow,
    guard: GuardSpec,
    t0: Scalar,
    delta: Scalar,
    epsilon: Scalar,
    target: Dyadic,
    /// Widest state enclosure tolerated, `2^-n`.
    resolution: Dyadic,
    started: Instant,
    stats: SolverStats,
    trajectory: Vec<StepPoint>,
    tau: Dyadic,
    w: Vec<Scalar>,
}

impl<'a> Attempt<'a> {
    fn new(
        problem: &Problem,
        options: &'a SolveOptions,
        prec: u32,
        started: Instant,
    ) -> Result<Self, SolveError> {
        let inst = problem.instantiate(prec)?;
        Ok(Attempt {
            options,
            prec,
            flow: inst.flow,
            guard: inst.guard,
            t0: inst.start.t,
            delta: options.delta.enclose(prec),
            epsilon: options.epsilon.enclose(prec),
            target: default_target(prec, GUARD_BITS),
            resolution: Dyadic::pow2(-(options.target_bits as i64)),
            started,
            stats: SolverStats {
                target_bits: options.target_bits,
                working_bits: prec,
                ..SolverStats::default()
            },
            trajectory: Vec::new(),
            tau: Dyadic::zero(),
            w: inst.start.w,
        })
    }

    fn time(&self, tau: &Dyadic) -> Scalar {
        &self.t0 + &Scalar::point(tau.clone(), self.prec)
    }

    fn gamma(&self, tau: &Dyadic, w: &[Scalar]) -> Result<Scalar, SolveError> {
        let mut xi = Vec::with_capacity(w.len() + 1);
        xi.push(self.time(tau));
        xi.extend_from_slice(w);
        Ok(self.guard.signed_distance(&xi)?)
    }

    fn record(&mut self) {
        if self.options.record_trajectory {
            self.trajectory.push(StepPoint {
                t: self.time(&self.tau),
                w: self.w.clone(),
            });
        }
    }

    fn over_budget(&self) -> bool {
        let b = &self.options.budget;
        self.stats.big_steps >= b.max_big_steps
            || self.stats.small_steps >= b.max_small_steps
            || self.started.elapsed() >= b.max_wall_time
    }

    fn state(&self) -> State {
        State::new(self.time(&self.tau), self.w.clone())
    }

    fn finish(
        &mut self,
        status: HitStatus,
        t_hi: Option<Scalar>,
        state_hit: Option<Vec<Scalar>>,
    ) -> GuardHit {
        GuardHit {
            status,
            t_lo: self.time(&self.tau),
            t_hi,
            state_lo: self.state(),
            state_hit,
            stats: self.stats.clone(),
            trajectory: std::mem::take(&mut self.trajectory),
        }
    }

    fn left_only(&mut self) -> GuardHit {
        self.finish(HitStatus::LeftOnly, None, None)
    }

    fn expand(&mut self) -> Result<Expansion, SolveError> {
        let s = self.state();
        let sys = SeriesSystem::for_state(&self.flow, &s, 0)?;
        let bounds = BoundTriple::derive(&self.flow, &s, &self.delta, &self.epsilon)?;
        self.stats.big_steps += 1;
        let r_prime = bounds.radius().lo().ldexp(-1).round(STEP_BITS, Round::Down);
        Ok(Expansion {
            center: self.tau.clone(),
            sys,
            bounds,
            r_prime,
            s1: None,
        })
    }

    /// Series value at offset `tau` (absolute, from `t0`).
    fn evaluate(&mut self, exp: &mut Expansion, tau: &Dyadic) -> Result<Vec<Scalar>, Undecided> {
        let z = Scalar::point(tau.sub_exact(&exp.center), self.prec);
        let ev = eval_series(&mut exp.sys, &exp.bounds, &z, &self.target)?;
        self.stats.small_steps += 1;
        self.stats.max_order = self.stats.max_order.max(ev.order);
        Ok(ev.values)
    }

    /// Evaluates the signed distance at every candidate inside the current
    /// expansion. Returns whether some candidate lies beyond it.
    fn evaluate_candidates(&mut self, exp: &mut Expansion, list: &mut [Candidate]) -> Step<bool> {
        let mut beyond = false;
        for c in list.iter_mut().filter(|c| c.gamma.is_none()) {
            let t_hat = c.t_hat.lo().clone();
            if t_hat.sub_exact(&exp.center) >= exp.r_prime {
                beyond = true;
                continue;
            }
            let w = match self.evaluate(exp, &t_hat) {
                Ok(w) => w,
                Err(u) => return Ok(Err(u)),
            };
            c.gamma = Some(self.gamma(&t_hat, &w)?);
        }
        Ok(Ok(beyond))
    }

    /// Enclosure of the state on `[tau, t_hat]` from the flow bound.
    fn crossing_state(&self, exp: &Expansion, t_hat: &Dyadic) -> Option<Vec<Scalar>> {
        if t_hat.sub_exact(&exp.center) >= *exp.bounds.radius().lo() {
            return None;
        }
        let span = t_hat.sub_exact(&self.tau);
        let spread = exp
            .bounds
            .flow_bound()
            .hi()
            .mul(&span, self.prec, Round::Up);
        Some(self.w.iter().map(|w| w.widen(&spread)).collect())
    }

    fn bracketed(&mut self, exp: &Expansion, t_hat: &Scalar) -> GuardHit {
        let t_hat = t_hat.hi().clone();
        let state_hit = self.crossing_state(exp, &t_hat);
        let t_hi = self.time(&t_hat);
        self.finish(HitStatus::Bracketed, Some(t_hi), state_hit)
    }

    fn run(&mut self) -> Result<Outcome, SolveError> {
        let n = self.options.target_bits;
        let g0 = self.gamma(&self.tau, &self.w.clone())?;
        if g0.is_negative() {
            let t0 = self.t0.clone();
            let w = self.w.clone();
            self.record();
            return Ok(Outcome::Done(Box::new(self.finish(
                HitStatus::Bracketed,
                Some(t0),
                Some(w),
            ))));
        }
        if !g0.is_positive() {
            return Ok(Outcome::Escalate);
        }
        self.record();
        let mut gamma = g0;
        let mut prev: Option<(Dyadic, Scalar)> = None;
        let mut candidates: Vec<Candidate> = Vec::new();
        let mut j = 0usize;
        loop {
            if self.over_budget() {
                return Ok(Outcome::Done(Box::new(self.left_only())));
            }
            let mut exp = self.expand()?;
            let u = exp.bounds.flow_bound().clone();
            let rate = u.upper().max(&self.guard.rate_bound(&u));
            let r_prime = Scalar::point(exp.r_prime.clone(), self.prec);
            if let Err(Undecided) = self.evaluate_candidates(&mut exp, &mut candidates)? {
                return Ok(Outcome::Escalate);
            }
            let now = Scalar::point(self.tau.clone(), self.prec);
            if let Some(t_hat) = retest_candidates(&mut candidates, j, &now, |c| c.gamma.clone()) {
                return Ok(Outcome::Done(Box::new(self.bracketed(&exp, &t_hat))));
            }
            loop {
                if self.over_budget() {
                    return Ok(Outcome::Done(Box::new(self.left_only())));
                }
                let consumed = Scalar::point(self.tau.sub_exact(&exp.center), self.prec);
                let room = (&r_prime - &consumed).lo().clone();
                if self.tau.add(&room, self.prec, Round::Down) <= self.tau {
                    // Rounded step times left the expansion a few ulps short of R'.
                    break;
                }
                let step = small_step_size(&gamma, &rate, &r_prime, &consumed);
                // Short step sizes keep the evaluation offsets short. A step
                // that exhausts the room is exact already.
                let mut size = if step.lo() >= &room {
                    room.clone()
                } else {
                    step.lo().round(STEP_BITS, Round::Down)
                };
                let mut accepted = None;
                for _ in 0..=STEP_RETRIES {
                    if !size.is_positive() {
                        break;
                    }
                    let tau_new = self.tau.add(&size, self.prec, Round::Down);
                    if tau_new <= self.tau {
                        break;
                    }
                    let w_new = match self.evaluate(&mut exp, &tau_new) {
                        Ok(w) => w,
                        Err(Undecided) => return Ok(Outcome::Escalate),
                    };
                    let g_new = self.gamma(&tau_new, &w_new)?;
                    if g_new.is_positive() {
                        accepted = Some((tau_new, w_new, g_new));
                        break;
                    }
                    size = size.ldexp(-1);
                }
                let Some((tau_new, w_new, g_new)) = accepted else {
                    return Ok(Outcome::Escalate);
                };
                if w_new.iter().any(|w| w.width() > self.resolution) {
                    return Ok(Outcome::Escalate);
                }
                if exp.s1.is_none() {
                    exp.s1 = Some(tau_new.sub_exact(&self.tau));
                }
                j += 1;
                let t_prev_cur = (
                    Scalar::point(self.tau.clone(), self.prec),
                    Scalar::point(tau_new.clone(), self.prec),
                );
                self.tau = tau_new;
                self.w = w_new;
                self.record();
                if let Some((_, g_prev)) = &prev {
                    match secant(&t_prev_cur.0, &t_prev_cur.1, g_prev, &g_new, n) {
                        Secant::Close(rho) => {
                            if let Some(c) = candidate_from(&t_prev_cur.1, &rho, n, j) {
                                candidates.push(c);
                            }
                        }
                        Secant::Far => candidates.clear(),
                        Secant::Undecided => {}
                    }
                }
                prev = Some((self.tau.clone(), g_new.clone()));
                gamma = g_new;

                let beyond = match self.evaluate_candidates(&mut exp, &mut candidates)? {
                    Ok(b) => b,
                    Err(Undecided) => return Ok(Outcome::Escalate),
                };
                let now = Scalar::point(self.tau.clone(), self.prec);
                if let Some(t_hat) =
                    retest_candidates(&mut candidates, j, &now, |c| c.gamma.clone())
                {
                    return Ok(Outcome::Done(Box::new(self.bracketed(&exp, &t_hat))));
                }
                let consumed = Scalar::point(self.tau.sub_exact(&exp.center), self.prec);
                let s1 = Scalar::point(exp.s1.clone().expect("set above"), self.prec);
                if beyond || big_step_due(&s1, exp.bounds.radius(), &consumed) {
                    break;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{GuardDef, Term};

    const P: u32 = 96;

    fn s(v: &str) -> Scalar {
        Scalar::parse_decimal(v, P).unwrap()
    }

    fn e(v: &str) -> Exact {
        Exact::parse(v).unwrap()
    }

    fn term(c: &str, x: &[u32]) -> Term {
        Term {
            coeff: e(c),
            t_exp: 0,
            x_exp: x.to_vec(),
        }
    }

    fn oscillator(damping: Option<&str>, guard: GuardDef) -> Problem {
        let mut second = vec![term("-1", &[1, 0])];
        if let Some(c) = damping {
            second.push(term(c, &[0, 1]));
        }
        Problem::new(
            2,
            vec![vec![term("1", &[0, 1])], second],
            e("0"),
            vec![e("0"), e("1")],
            guard,
        )
        .unwrap()
    }

    fn x1_at_most(b: &str) -> GuardDef {
        let b = e(b);
        GuardDef::HalfSpace {
            normal: vec![e("0"), e("-1"), e("0")],
            offset: Exact::new(-b.numer(), b.denom().clone()).unwrap(),
        }
    }

    fn time_at_least(eta: &str) -> GuardDef {
        GuardDef::HalfSpace {
            normal: vec![e("1"), e("0"), e("0")],
            offset: e(eta),
        }
    }

    #[test]
    fn small_step_examples() {
        assert_eq!(
            small_step_size(&s("2"), &s("2"), &s("0.25"), &s("0")),
            s("0.25")
        );
        let st = small_step_size(&s("0.1"), &s("2"), &s("0.25"), &s("0"));
        assert!(st.is_point() && st.hi() <= s("0.05").hi());
        assert!((&s("0.05") - &st).hi() <= &Dyadic::pow2(-80));
        let st = small_step_size(&s("10"), &s("1"), &s("0.25"), &s("0.2"));
        assert!(st.hi() <= s("0.05").hi() && (&s("0.05") - &st).hi() <= &Dyadic::pow2(-80));
        // U may vanish: only the radius limits the step.
        assert_eq!(
            small_step_size(&s("1"), &s("0"), &s("0.5"), &s("0.25")),
            s("0.25")
        );
    }

    #[test]
    fn big_step_examples() {
        assert!(big_step_due(&s("0.0001"), &s("1"), &s("0.2")));
        assert!(!big_step_due(&s("0.0001"), &s("1"), &s("0")));
        assert!(!big_step_due(&s("1"), &s("1"), &s("0.4")));
        assert!(big_step_due(&s("1"), &s("1"), &s("0.5")));
    }

    #[test]
    fn candidate_examples() {
        let n = 10;
        let d_cur = Scalar::pow2(-12, P);
        let c = propose_candidate(&s("0"), &s("1"), &s("1"), &d_cur, n, 1).unwrap();
        // rho = 2^-12 / (1 - 2^-12) ~ 0.000244; t_hat ~ 1.000488
        assert!(c.t_hat.to_f64() > 1.000488 && c.t_hat.to_f64() < 1.000489);
        // With delta = 2^-11 the root distance lands just above the gate 2^-11.
        let d_edge = Scalar::pow2(-11, P);
        assert_eq!(secant(&s("0"), &s("1"), &s("1"), &d_edge, n), Secant::Far);
        assert_eq!(c.status, CandidateStatus::Open);
        assert!(propose_candidate(&s("0"), &s("1"), &s("0.5"), &s("1"), n, 1).is_none());
        // rho = 0.3 against the gate 2^-5.
        assert!(propose_candidate(&s("0"), &s("1"), &s("0.6"), &s("0.3"), 4, 1).is_none());
        assert_eq!(
            secant(&s("0"), &s("1"), &s("0.6"), &s("0.3"), 4),
            Secant::Far
        );
        assert_eq!(secant(&s("0"), &s("1"), &s("1"), &s("1"), 4), Secant::Far);
    }

    fn candidate(t_hat: &str, gamma: Option<&str>) -> Candidate {
        Candidate {
            j: 1,
            t_hat: s(t_hat),
            t_left: s("0"),
            status: CandidateStatus::Open,
            gamma: gamma.map(s),
        }
    }

    fn iv(lo: &str, hi: &str) -> Scalar {
        Scalar::new(s(lo).lo().clone(), s(hi).hi().clone(), P)
    }

    #[test]
    fn retest_examples() {
        let mut list = vec![candidate("1", None)];
        list[0].gamma = Some(iv("-0.5", "-0.4"));
        let hit = retest_candidates(&mut list, 2, &s("0.5"), |c| c.gamma.clone());
        assert_eq!(hit, Some(s("1")));

        let mut list = vec![candidate("1", None)];
        list[0].gamma = Some(iv("0.1", "0.2"));
        assert_eq!(
            retest_candidates(&mut list, 2, &s("0.5"), |c| c.gamma.clone()),
            None
        );
        assert!(list.is_empty());

        let mut empty = Vec::new();
        assert_eq!(
            retest_candidates(&mut empty, 2, &s("0"), |c| c.gamma.clone()),
            None
        );

        // Undecided candidates stay, passed ones go.
        let mut list = vec![candidate("1", Some("-0.1")), candidate("0.25", Some("-1"))];
        list[0].gamma = Some(iv("-0.3", "0.1"));
        assert_eq!(
            retest_candidates(&mut list, 3, &s("0.5"), |c| c.gamma.clone()),
            None
        );
        assert_eq!(list.len(), 1);
        assert_eq!(list[0].t_hat, s("1"));
    }

    #[test]
    fn initial_state_inside_guard() {
        let p = oscillator(None, x1_at_most("0.5"));
        let hit = solve(&p, &SolveOptions::new(10)).unwrap();
        assert!(hit.is_bracketed());
        assert_eq!(hit.t_lo, hit.t_hi.clone().unwrap());
        assert!(hit.t_lo.contains(&Dyadic::zero()));
    }

    #[test]
    fn zero_flow_is_left_only() {
        let p = Problem::new(
            2,
            vec![vec![], vec![]],
            e("0"),
            vec![e("0"), e("0")],
            x1_at_most("-2"),
        )
        .unwrap();
        let budget = Budget {
            max_big_steps: 50,
            ..Budget::default()
        };
        let hit = solve(&p, &SolveOptions::new(10).with_budget(budget)).unwrap();
        assert_eq!(hit.status, HitStatus::LeftOnly);
        assert!(hit.t_hi.is_none());
        assert_eq!(hit.stats.big_steps, 50);
        assert!(hit.t_lo.is_positive());
    }

    #[test]
    fn time_guard_brackets_exact_time() {
        let p = oscillator(None, time_at_least("3"));
        let hit = solve(&p, &SolveOptions::new(30).with_trajectory()).unwrap();
        assert!(hit.is_bracketed());
        let three = Dyadic::from_i64(3);
        assert!(hit.t_lo.hi() < &three);
        assert!(hit.t_hi.as_ref().unwrap().lo() > &three);
        assert!(hit.width().unwrap().hi() <= &Dyadic::pow2(-30));
        let y1 = &hit.state_hit.as_ref().unwrap()[0];
        // sin(3) = 0.14112000805986722...
        assert!(y1.contains(s("0.1411200080598672").lo()));
        let times: Vec<_> = hit.trajectory.iter().map(|p| p.t.lo().clone()).collect();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        for pt in &hit.trajectory {
            let energy = &pt.w[0].sqr() + &pt.w[1].sqr();
            assert!(energy.contains(&Dyadic::one()));
        }
    }

    #[test]
    fn damped_benchmark_short_target() {
        let p = oscillator(Some("0.02"), x1_at_most("-2"));
        let hit = solve(&p, &SolveOptions::new(12)).unwrap();
        assert!(hit.is_bracketed());
        let t = Dyadic::from_f64(73.54220619947169).unwrap();
        assert!(hit.t_lo.hi() < &t && &t < hit.t_hi.as_ref().unwrap().lo());
        assert!(hit.width().unwrap().hi() <= &Dyadic::pow2(-12));
        assert!(hit.stats.working_bits >= 64);
    }

    #[test]
    fn rejects_bad_options() {
        let p = oscillator(None, time_at_least("1"));
        assert_eq!(
            solve(&p, &SolveOptions::new(0)).unwrap_err(),
            SolveError::ZeroTargetBits
        );
        let opts = SolveOptions::new(8).with_radii(e("0"), e("1"));
        assert_eq!(solve(&p, &opts).unwrap_err(), SolveError::NonPositiveRadius);
    }
}
