//! CSV writers. UTF-8, `\n` line endings, mandatory header, `NA` for
//! undefined cells, numbers rounded to 12 significant digits.

use std::fmt::Write as _;

use crate::diagnostics::DiagnosticRow;
use crate::spinhilbert::SpinSpace;
use crate::trajectories::{Channel, EventKind, Trajectory, TrajectoryEvent};

pub const DIAGNOSTIC_HEADER: &str = "t,qs,qt,trace,purity,qs_norm,qt_norm,purity_norm,svn,p_s,s_i,info_gain";
pub const EVENT_HEADER: &str = "traj_index,time,kind,channel";
pub const TRAJECTORY_HEADER: &str = "t,qs,qt,trace";
/// Upper bound on emitted rows per series.
pub const MAX_ROWS: usize = 2001;

/// Shortest decimal that round-trips the value rounded to 12 significant digits.
pub fn format_value(v: f64) -> String {
    if !v.is_finite() {
        return "NA".into();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("valid float");
    if rounded == 0.0 {
        "0".into()
    } else {
        rounded.to_string()
    }
}

fn format_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), format_value)
}

/// Grid indices kept after stride decimation to at most [`MAX_ROWS`]
/// rows. The last index is always kept.
pub fn decimate(n_points: usize) -> Vec<usize> {
    if n_points == 0 {
        return Vec::new();
    }
    let intervals = n_points - 1;
    let stride = intervals.div_ceil(MAX_ROWS - 1).max(1);
    let mut idx: Vec<usize> = (0..n_points).step_by(stride).collect();
    if *idx.last().unwrap() != intervals {
        idx.push(intervals);
    }
    idx
}

pub fn diagnostics_csv(rows: &[DiagnosticRow]) -> String {
    let mut out = String::with_capacity(rows.len().min(MAX_ROWS) * 160);
    out.push_str(DIAGNOSTIC_HEADER);
    out.push('\n');
    for i in decimate(rows.len()) {
        let r = &rows[i];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            format_value(r.t),
            format_value(r.qs),
            format_value(r.qt),
            format_value(r.trace),
            format_value(r.purity),
            format_opt(r.qs_norm),
            format_opt(r.qt_norm),
            format_opt(r.purity_norm),
            format_opt(r.svn),
            format_opt(r.p_s),
            format_opt(r.s_i),
            format_opt(r.info_gain),
        );
    }
    out
}

pub fn kind_label(kind: EventKind) -> &'static str {
    match kind {
        EventKind::ProjectSinglet => "ProjectSinglet",
        EventKind::ProjectTriplet => "ProjectTriplet",
        EventKind::Recombine => "Recombine",
    }
}

fn channel_label(channel: Option<Channel>) -> &'static str {
    match channel {
        Some(Channel::Singlet) => "Singlet",
        Some(Channel::Triplet) => "Triplet",
        None => "NA",
    }
}

/// Event log, one line per event, trajectories in index order.
pub fn events_csv<'a, I>(logs: I) -> String
where
    I: IntoIterator<Item = (usize, &'a [TrajectoryEvent])>,
{
    let mut out = String::from(EVENT_HEADER);
    out.push('\n');
    for (index, events) in logs {
        for e in events {
            let _ = writeln!(
                out,
                "{index},{},{},{}",
                format_value(e.time),
                kind_label(e.kind),
                channel_label(e.channel)
            );
        }
    }
    out
}

/// `⟨Q_S⟩`, `⟨Q_T⟩` and `Tr{ρ}` (1 alive, 0 recombined) along one trajectory.
pub fn trajectory_csv(traj: &Trajectory, space: &SpinSpace) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for i in decimate(traj.times.len()) {
        let s = &traj.states[i];
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_value(traj.times[i]),
            format_value(s.expectation(&space.q_singlet)),
            format_value(s.expectation(&space.q_triplet)),
            if s.alive { "1" } else { "0" },
        );
    }
    out
}
