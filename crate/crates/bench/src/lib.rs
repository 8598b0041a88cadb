//! Problems shared by the benchmarks.

use guardivp::{Exact, GuardDef, Problem, Term};

fn e(s: &str) -> Exact {
    Exact::parse(s).expect("valid literal")
}

fn term(c: &str, x: [u32; 2]) -> Term {
    Term {
        coeff: e(c),
        t_exp: 0,
        x_exp: x.to_vec(),
    }
}

/// `y1' = y2, y2' = -y1 + c y2` from `(0, (0, 1))`.
pub fn oscillator(damping: Option<&str>, guard: GuardDef) -> Problem {
    let mut second = vec![term("-1", [1, 0])];
    if let Some(c) = damping {
        second.push(term(c, [0, 1]));
    }
    Problem::new(
        2,
        vec![vec![term("1", [0, 1])], second],
        e("0"),
        vec![e("0"), e("1")],
        guard,
    )
    .expect("valid problem")
}

/// Damping 0.02, guard `y1 <= -2`.
pub fn damped_benchmark() -> Problem {
    oscillator(
        Some("0.02"),
        GuardDef::HalfSpace {
            normal: vec![e("0"), e("-1"), e("0")],
            offset: e("2"),
        },
    )
}

/// Undamped, guard `t >= eta`.
pub fn sine_until(eta: &str) -> Problem {
    oscillator(
        None,
        GuardDef::HalfSpace {
            normal: vec![e("1"), e("0"), e("0")],
            offset: e(eta),
        },
    )
}
