//! Problem files: a TOML description of one IVP with its guard.
//!
//! ```toml
//! dimension = 2
//!
//! [initial]
//! t0 = "0"
//! w0 = ["0", "1"]
//!
//! [[flow]]
//! terms = [{ coeff = "1", x = [0, 1] }]
//!
//! [[flow]]
//! terms = [{ coeff = "-1", x = [1, 0] }, { coeff = "0.02", x = [0, 1] }]
//!
//! [guard]
//! kind = "half_space"
//! normal = ["0", "-1", "0"]
//! offset = "2"
//! ```
//!
//! Numbers are decimal strings (or `p/q`); TOML integers are accepted too,
//! TOML floats are rejected.

use std::collections::BTreeSet;
use std::time::Duration;

use guardivp::{Exact, GuardDef, GuardError, Problem, ProblemError, Term};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("malformed problem file: {0}")]
    Syntax(String),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

fn field_error(field: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError::Field {
        field: field.into(),
        message: message.into(),
    }
}

/// Solver settings that may be stored alongside a problem.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileOptions {
    pub delta: Option<Exact>,
    pub epsilon: Option<Exact>,
    pub max_big_steps: Option<u64>,
    pub max_small_steps: Option<u64>,
    pub max_wall_time: Option<Duration>,
    pub max_bits: Option<u32>,
}

impl FileOptions {
    fn is_empty(&self) -> bool {
        *self == FileOptions::default()
    }
}

/// A validated problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub problem: Problem,
    pub options: FileOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Text(String),
    Float(f64),
}

impl Number {
    fn exact(&self, field: &str) -> Result<Exact, InputError> {
        match self {
            Number::Int(v) => Ok(Exact::from_i64(*v)),
            Number::Text(s) => Exact::parse(s)
                .map_err(|e| field_error(field, format!("invalid number {s:?}: {e}"))),
            Number::Float(_) => Err(field_error(
                field,
                "binary floats are not accepted; write the value as a string",
            )),
        }
    }

    fn from_exact(x: &Exact) -> Number {
        if x.denom() == &1.into() {
            if let Ok(v) = i64::try_from(x.numer()) {
                return Number::Int(v);
            }
        }
        Number::Text(x.to_string())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    dimension: i64,
    initial: RawInitial,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    flow: Vec<RawComponent>,
    guard: RawGuard,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    options: Option<RawOptions>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    t0: Number,
    w0: Vec<Number>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    #[serde(default)]
    terms: Vec<RawTerm>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    coeff: Number,
    #[serde(default, skip_serializing_if = "is_zero")]
    t: u32,
    x: Vec<u32>,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGuard {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normal: Option<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    center: Option<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<Number>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_big_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_small_steps: Option<u64>,
    /// Wall-time budget in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_seconds: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_bits: Option<u32>,
}

pub const HALF_SPACE: &str = "half_space";
pub const BALL: &str = "ball";

/// Parses and validates a problem file. Errors name the first offending
/// field, in file order.
pub fn parse_problem(text: &str) -> Result<ProblemSpec, InputError> {
    let raw: RawFile =
        toml::from_str(text).map_err(|e| InputError::Syntax(e.message().to_string()))?;
    let d = usize::try_from(raw.dimension)
        .ok()
        .filter(|&d| d > 0)
        .ok_or_else(|| field_error("dimension", "must be a positive integer"))?;

    let t0 = raw.initial.t0.exact("initial.t0")?;
    if raw.initial.w0.len() != d {
        return Err(field_error(
            "initial.w0",
            format!("expected {d} components, found {}", raw.initial.w0.len()),
        ));
    }
    let w0 = numbers(&raw.initial.w0, "initial.w0")?;

    let flow = if raw.flow.is_empty() {
        vec![Vec::new(); d]
    } else if raw.flow.len() != d {
        return Err(field_error(
            "flow",
            format!("expected {d} components, found {}", raw.flow.len()),
        ));
    } else {
        raw.flow
            .iter()
            .enumerate()
            .map(|(v, c)| component(v, c, d))
            .collect::<Result<_, _>>()?
    };

    let guard = guard(&raw.guard, d)?;
    let options = match &raw.options {
        Some(o) => options(o)?,
        None => FileOptions::default(),
    };

    let problem = Problem::new(d, flow, t0, w0, guard).map_err(|e| match e {
        ProblemError::Guard(GuardError::DegenerateNormal) => {
            field_error("guard.normal", "normal vector must be nonzero")
        }
        ProblemError::Guard(GuardError::NonPositiveRadius) => {
            field_error("guard.radius", "radius must be positive")
        }
        other => field_error("problem", other.to_string()),
    })?;
    Ok(ProblemSpec { problem, options })
}

fn numbers(xs: &[Number], field: &str) -> Result<Vec<Exact>, InputError> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| x.exact(&format!("{field}[{i}]")))
        .collect()
}

fn component(v: usize, c: &RawComponent, d: usize) -> Result<Vec<Term>, InputError> {
    let mut seen = BTreeSet::new();
    c.terms
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let at = format!("flow[{v}].terms[{k}]");
            let coeff = t.coeff.exact(&format!("{at}.coeff"))?;
            if t.x.len() != d {
                return Err(field_error(
                    format!("{at}.x"),
                    format!("expected {d} exponents, found {}", t.x.len()),
                ));
            }
            if !seen.insert((t.t, t.x.clone())) {
                return Err(field_error(
                    at,
                    format!("duplicate exponent tuple (t = {}, x = {:?})", t.t, t.x),
                ));
            }
            Ok(Term {
                coeff,
                t_exp: t.t,
                x_exp: t.x.clone(),
            })
        })
        .collect()
}

fn guard(g: &RawGuard, d: usize) -> Result<GuardDef, InputError> {
    let coords = |xs: &Option<Vec<Number>>, field: &str| -> Result<Vec<Exact>, InputError> {
        let xs = xs.as_ref().ok_or_else(|| field_error(field, "missing"))?;
        if xs.len() != d + 1 {
            return Err(field_error(
                field,
                format!(
                    "expected {} coordinates (time plus state), found {}",
                    d + 1,
                    xs.len()
                ),
            ));
        }
        numbers(xs, field)
    };
    let scalar = |x: &Option<Number>, field: &str| -> Result<Exact, InputError> {
        x.as_ref()
            .ok_or_else(|| field_error(field, "missing"))?
            .exact(field)
    };
    let stray = |x: bool, field: &str| -> Result<(), InputError> {
        if x {
            Err(field_error(
                field,
                format!("not used by guard kind {:?}", g.kind),
            ))
        } else {
            Ok(())
        }
    };
    match g.kind.as_str() {
        HALF_SPACE => {
            stray(g.center.is_some(), "guard.center")?;
            stray(g.radius.is_some(), "guard.radius")?;
            Ok(GuardDef::HalfSpace {
                normal: coords(&g.normal, "guard.normal")?,
                offset: scalar(&g.offset, "guard.offset")?,
            })
        }
        BALL => {
            stray(g.normal.is_some(), "guard.normal")?;
            stray(g.offset.is_some(), "guard.offset")?;
            Ok(GuardDef::Ball {
                center: coords(&g.center, "guard.center")?,
                radius: scalar(&g.radius, "guard.radius")?,
            })
        }
        other => Err(field_error(
            "guard.kind",
            format!("unknown guard kind {other:?} (expected \"{HALF_SPACE}\" or \"{BALL}\")"),
        )),
    }
}

fn options(o: &RawOptions) -> Result<FileOptions, InputError> {
    let positive = |x: &Option<Number>, field: &str| -> Result<Option<Exact>, InputError> {
        match x {
            None => Ok(None),
            Some(n) => {
                let v = n.exact(field)?;
                if v.numer() <= &0.into() {
                    return Err(field_error(field, "must be positive"));
                }
                Ok(Some(v))
            }
        }
    };
    let max_wall_time = positive(&o.max_seconds, "options.max_seconds")?
        .map(|s| {
            exact_seconds(&s).ok_or_else(|| field_error("options.max_seconds", "out of range"))
        })
        .transpose()?;
    Ok(FileOptions {
        delta: positive(&o.delta, "options.delta")?,
        epsilon: positive(&o.epsilon, "options.epsilon")?,
        max_big_steps: o.max_big_steps,
        max_small_steps: o.max_small_steps,
        max_wall_time,
        max_bits: o.max_bits,
    })
}

/// Duration of `s` seconds, rounded down to whole nanoseconds.
pub fn exact_seconds(s: &Exact) -> Option<Duration> {
    let nanos = s.numer() * 1_000_000_000u64 / s.denom();
    u64::try_from(nanos).ok().map(Duration::from_nanos)
}

/// Serializes a problem file; `parse_problem` reads it back to an equal spec.
pub fn to_toml(spec: &ProblemSpec) -> String {
    let p = &spec.problem;
    let nums = |xs: &[Exact]| xs.iter().map(Number::from_exact).collect::<Vec<_>>();
    let flow = if p.flow().iter().all(Vec::is_empty) {
        Vec::new()
    } else {
        p.flow()
            .iter()
            .map(|terms| RawComponent {
                terms: terms
                    .iter()
                    .map(|t| RawTerm {
                        coeff: Number::from_exact(&t.coeff),
                        t: t.t_exp,
                        x: t.x_exp.clone(),
                    })
                    .collect(),
            })
            .collect()
    };
    let guard = match p.guard() {
        GuardDef::HalfSpace { normal, offset } => RawGuard {
            kind: HALF_SPACE.into(),
            normal: Some(nums(normal)),
            offset: Some(Number::from_exact(offset)),
            center: None,
            radius: None,
        },
        GuardDef::Ball { center, radius } => RawGuard {
            kind: BALL.into(),
            normal: None,
            offset: None,
            center: Some(nums(center)),
            radius: Some(Number::from_exact(radius)),
        },
    };
    let o = &spec.options;
    let options = (!o.is_empty()).then(|| RawOptions {
        delta: o.delta.as_ref().map(Number::from_exact),
        epsilon: o.epsilon.as_ref().map(Number::from_exact),
        max_big_steps: o.max_big_steps,
        max_small_steps: o.max_small_steps,
        max_seconds: o.max_wall_time.map(|t| {
            let nanos = t.as_nanos() as i64;
            Number::from_exact(&Exact::new(nanos.into(), 1_000_000_000.into()).expect("nonzero"))
        }),
        max_bits: o.max_bits,
    });
    let raw = RawFile {
        dimension: p.dim() as i64,
        initial: RawInitial {
            t0: Number::from_exact(p.t0()),
            w0: nums(p.w0()),
        },
        flow,
        guard,
        options,
    };
    toml::to_string(&raw).expect("problem files serialize")
}
