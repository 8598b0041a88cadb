//! Result record, stats line and trajectory export.

use std::io::Write;

use guardivp::{GuardHit, HitStatus, Scalar, SolverStats, StepPoint};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub status: &'static str,
    /// Rounded down.
    pub t_lo: String,
    /// Rounded up; absent without a bracket.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_hi: Option<String>,
    pub state_lo: Vec<String>,
    pub stats: StatsRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRecord {
    pub n: u32,
    pub p: u32,
    pub b: u64,
    pub s: u64,
    pub l_max: usize,
    /// Seconds.
    pub time: f64,
}

impl From<&SolverStats> for StatsRecord {
    fn from(s: &SolverStats) -> Self {
        StatsRecord {
            n: s.target_bits,
            p: s.working_bits,
            b: s.big_steps,
            s: s.small_steps,
            l_max: s.max_order,
            time: s.wall_time.as_secs_f64(),
        }
    }
}

pub fn status_name(status: HitStatus) -> &'static str {
    match status {
        HitStatus::Bracketed => "BRACKETED",
        HitStatus::LeftOnly => "LEFT_ONLY",
    }
}

/// Default number of fractional digits for a target of `n` bits: enough to
/// resolve `2^-n`, plus two.
pub fn default_digits(n: u32) -> u32 {
    (f64::from(n) * std::f64::consts::LOG10_2).ceil() as u32 + 2
}

/// Longest decimal of at most `digits` fractional digits whose every digit is
/// guaranteed for all values of `x`.
pub fn guaranteed_decimal(x: &Scalar, digits: u32) -> String {
    (0..=digits)
        .rev()
        .find_map(|k| x.to_decimal(k))
        .unwrap_or_else(|| {
            let (lo, hi) = x.decimal_bounds(0);
            format!("[{lo}, {hi}]")
        })
}

impl ResultRecord {
    pub fn new(hit: &GuardHit, digits: u32) -> Self {
        ResultRecord {
            status: status_name(hit.status),
            t_lo: hit.t_lo.decimal_bounds(digits).0,
            t_hi: hit.t_hi.as_ref().map(|t| t.decimal_bounds(digits).1),
            state_lo: hit
                .state_lo
                .w
                .iter()
                .map(|w| guaranteed_decimal(w, digits))
                .collect(),
            stats: StatsRecord::from(&hit.stats),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }
}

pub const STATS_HEADER: &str = "n\tp\tb\ts\tl_max\ttime";

/// Tab-separated stats row matching [`STATS_HEADER`].
pub fn stats_line(s: &StatsRecord) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}\t{:.3}",
        s.n, s.p, s.b, s.s, s.l_max, s.time
    )
}

/// Writes `t,y1,..,yd` with one row per accepted step point.
pub fn write_trajectory<W: Write>(
    out: W,
    dim: usize,
    points: &[StepPoint],
    digits: u32,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header = std::iter::once("t".to_string()).chain((1..=dim).map(|v| format!("y{v}")));
    w.write_record(header)?;
    for p in points {
        w.write_record(
            std::iter::once(&p.t)
                .chain(&p.w)
                .map(|x| guaranteed_decimal(x, digits)),
        )?;
    }
    w.flush()?;
    Ok(())
}
