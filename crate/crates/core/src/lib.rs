//! Validated initial-value-problem solving for polynomial flows.
//!
//! The solution of `y' = F(t, y)`, `y(t0) = w0` is expanded into Taylor series
//! whose coefficients come from exact finite recursions ([`taylor`]). Partial
//! sums are certified by a Cauchy-type tail bound derived from a bound on `F`
//! over a complex neighbourhood ([`summation`]). The [`stepper`] walks the
//! trajectory towards a guard set ([`guard`]) and returns a bracket
//! `[t_lo, t_hi]` for the first time the trajectory enters it.
//!
//! All arithmetic is done on interval enclosures ([`scalar`]); whenever an
//! enclosure is too wide to decide a needed comparison, the whole solve is
//! restarted at a higher working precision.

pub mod flow;
pub mod guard;
pub mod problem;
pub mod scalar;
pub mod stepper;
pub mod summation;
pub mod taylor;

pub use flow::{FlowError, Monomial, PolyFlow, State};
pub use guard::{GuardError, GuardSpec};
pub use problem::{Exact, GuardDef, Instance, Problem, ProblemError, Term};
pub use scalar::{ArithError, Dyadic, Round, Scalar, Trilean};
pub use stepper::{
    solve, Budget, GuardHit, HitStatus, SolveError, SolveOptions, SolverStats, StepPoint,
};
pub use summation::BoundTriple;
pub use taylor::{SeriesError, SeriesSystem};
