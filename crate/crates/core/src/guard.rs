//! Guard sets in the extended state space `(t, x_1, .., x_d)` with closed-form
//! Euclidean signed distance.
//!
//! The signed distance is positive outside the guard, negative in its
//! interior and zero exactly on the border.

use thiserror::Error;

use crate::scalar::{ArithError, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuardError {
    #[error("guard lives in dimension {expected}, point has {found} coordinates")]
    Dimension { expected: usize, found: usize },
    #[error("half-space normal has no component that is certainly nonzero")]
    DegenerateNormal,
    #[error("ball radius must be certainly positive")]
    NonPositiveRadius,
    #[error("guard needs at least two coordinates (time and one state variable)")]
    TooFewCoordinates,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GuardSpec {
    /// `{xi : <normal, xi> >= offset}`.
    HalfSpace {
        normal: Vec<Scalar>,
        offset: Scalar,
        norm: Scalar,
    },
    /// Closed ball.
    Ball { center: Vec<Scalar>, radius: Scalar },
}

impl GuardSpec {
    /// Half-space `<normal, (t, x)> >= offset`.
    pub fn half_space(normal: Vec<Scalar>, offset: Scalar) -> Result<Self, GuardError> {
        if normal.len() < 2 {
            return Err(GuardError::TooFewCoordinates);
        }
        if normal.iter().all(Scalar::contains_zero) {
            return Err(GuardError::DegenerateNormal);
        }
        let prec = normal.iter().map(Scalar::precision).max().unwrap_or(64);
        let norm = normal
            .iter()
            .fold(Scalar::zero(prec), |acc, a| &acc + &a.sqr())
            .sqrt()?;
        Ok(GuardSpec::HalfSpace {
            normal,
            offset,
            norm,
        })
    }

    pub fn ball(center: Vec<Scalar>, radius: Scalar) -> Result<Self, GuardError> {
        if center.len() < 2 {
            return Err(GuardError::TooFewCoordinates);
        }
        if !radius.is_positive() {
            return Err(GuardError::NonPositiveRadius);
        }
        Ok(GuardSpec::Ball { center, radius })
    }

    /// `{t >= eta}` for a `d`-dimensional state.
    pub fn time_at_least(dim: usize, eta: Scalar) -> Self {
        let prec = eta.precision();
        let mut normal = vec![Scalar::zero(prec); dim + 1];
        normal[0] = Scalar::one(prec);
        GuardSpec::half_space(normal, eta).expect("unit normal")
    }

    /// Number of coordinates `d + 1`.
    pub fn dim(&self) -> usize {
        match self {
            GuardSpec::HalfSpace { normal, .. } => normal.len(),
            GuardSpec::Ball { center, .. } => center.len(),
        }
    }

    fn check(&self, xi: &[Scalar]) -> Result<(), GuardError> {
        if xi.len() != self.dim() {
            return Err(GuardError::Dimension {
                expected: self.dim(),
                found: xi.len(),
            });
        }
        Ok(())
    }

    /// Signed Euclidean distance `gamma(xi) = d_G(xi) - d_{X \ G°}(xi)`.
    pub fn signed_distance(&self, xi: &[Scalar]) -> Result<Scalar, GuardError> {
        self.check(xi)?;
        match self {
            GuardSpec::HalfSpace {
                normal,
                offset,
                norm,
            } => {
                let dot = normal
                    .iter()
                    .zip(xi)
                    .filter(|(a, _)| !(a.is_point() && a.lo().is_zero()))
                    .fold(Scalar::zero(offset.precision()), |acc, (a, x)| {
                        &acc + &(a * x)
                    });
                Ok((offset - &dot).checked_div(norm)?)
            }
            GuardSpec::Ball { center, radius } => {
                let sq = center
                    .iter()
                    .zip(xi)
                    .fold(Scalar::zero(radius.precision()), |acc, (c, x)| {
                        &acc + &(x - c).sqr()
                    });
                Ok(&sq.sqrt()? - radius)
            }
        }
    }

    /// Distance `d_G(xi) = max(gamma(xi), 0)`.
    pub fn distance(&self, xi: &[Scalar]) -> Result<Scalar, GuardError> {
        let g = self.signed_distance(xi)?;
        Ok(g.max(&Scalar::zero(g.precision())))
    }

    /// Upper bound on `|d/dt gamma(t, y(t))|` for trajectories whose state
    /// velocity components are bounded by `flow_bound` in absolute value.
    pub fn rate_bound(&self, flow_bound: &Scalar) -> Scalar {
        let u = flow_bound.upper();
        let up = |x: Scalar| x.upper();
        match self {
            GuardSpec::HalfSpace { normal, norm, .. } => {
                let time = Scalar::point(normal[0].mag(), u.precision());
                let state = normal[1..]
                    .iter()
                    .fold(Scalar::zero(u.precision()), |acc, a| {
                        up(&acc + &Scalar::point(a.mag(), u.precision()))
                    });
                let num = up(&time + &up(&state * &u));
                up(num.checked_div(&norm.lower()).expect("normal is nonzero"))
            }
            GuardSpec::Ball { center, .. } => {
                let d = (center.len() - 1) as i64;
                let sq = up(&Scalar::one(u.precision()) + &up(u.sqr().mul_int(d)));
                up(sq.sqrt().expect("positive"))
            }
        }
    }
}
