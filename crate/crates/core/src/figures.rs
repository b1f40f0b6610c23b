//! Published configurations and panel layouts for the figure datasets.
//!
//! Every panel is derived from a [`RunConfig`] that is written next to the
//! data, so `spinpair evolve` / `spinpair trajectories` on that config
//! reproduce it. Single-trajectory panels name the trajectory index they
//! show; its events appear in the `trajectories` event log for that config.

use crate::cli;
use crate::config::{InitialState, RunConfig, Toggle};
use crate::diagnostics::DiagnosticRow;
use crate::error::{Error, Result};
use crate::master_eq::TheoryKind;
use crate::output::{events_csv, format_value, trajectory_csv, decimate};
use crate::trajectories::{run_trajectory, Conditioning, EventKind, Trajectory, TrajectoryEvent};

pub const FIGURE_IDS: [u32; 6] = [1, 2, 3, 4, 7, 8];

/// Mixing strength of the illustrative mixed trajectory, units of `k_S`.
pub const FIG7_OMEGA: f64 = 5.0;
pub const FIG7_SEED: u64 = 7;
pub const FIG3_SEED: u64 = 3;
pub const FIG8_SEED: u64 = 8;
/// Trajectories searched for a representative single-trajectory panel.
const SEARCH_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct FigureFile {
    pub name: String,
    pub contents: String,
}

impl FigureFile {
    fn new(name: impl Into<String>, contents: String) -> Self {
        Self { name: name.into(), contents }
    }

    fn config(name: &str, cfg: &RunConfig) -> Self {
        let mut json = cfg.to_json();
        json.push('\n');
        Self::new(format!("{name}_config.json"), json)
    }
}

fn jones_hore(t_end: f64) -> RunConfig {
    RunConfig { t_end, ..RunConfig::new(TheoryKind::JonesHore) }
}

fn kominis_trajectories(seed: u64, recombination: Toggle) -> RunConfig {
    RunConfig {
        n_traj: SEARCH_LIMIT,
        seed,
        recombination,
        ..RunConfig::new(TheoryKind::Kominis)
    }
}

/// The configurations behind figure `id`, keyed by file stem.
pub fn published_configs(id: u32) -> Result<Vec<(&'static str, RunConfig)>> {
    Ok(match id {
        1 => vec![("fig1", jones_hore(10.0))],
        2 => vec![("fig2", jones_hore(15.0))],
        3 => vec![(
            "fig3",
            RunConfig { n_traj: SEARCH_LIMIT, seed: FIG3_SEED, ..jones_hore(10.0) },
        )],
        4 => vec![("fig4", jones_hore(20.0))],
        7 => vec![(
            "fig7",
            RunConfig {
                omega: FIG7_OMEGA,
                initial: InitialState::Singlet,
                ..kominis_trajectories(FIG7_SEED, Toggle::On)
            },
        )],
        8 => vec![
            ("fig8ab", kominis_trajectories(FIG8_SEED, Toggle::On)),
            (
                "fig8c",
                RunConfig {
                    n_traj: 10_000,
                    conditioning: Conditioning::NonReacted,
                    ..kominis_trajectories(FIG8_SEED, Toggle::Off)
                },
            ),
        ],
        other => return Err(Error::Config(format!("unknown figure id {other}; expected one of {FIGURE_IDS:?}"))),
    })
}

type Column<'a> = (&'a str, fn(&DiagnosticRow) -> Option<f64>);

fn column_csv(rows: &[DiagnosticRow], columns: &[Column]) -> String {
    let mut out = String::from("t");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in decimate(rows.len()) {
        let r = &rows[i];
        out.push_str(&format_value(r.t));
        for (_, get) in columns {
            out.push(',');
            out.push_str(&get(r).map_or_else(|| "NA".into(), format_value));
        }
        out.push('\n');
    }
    out
}

/// First trajectory index (below `n_traj`) whose events satisfy `pred`.
pub fn find_trajectory(cfg: &RunConfig, pred: impl Fn(&[TrajectoryEvent]) -> bool) -> Result<(usize, Trajectory)> {
    let ensemble = cfg.ensemble()?;
    for index in 0..ensemble.n_traj {
        let traj = run_trajectory(&ensemble, index)?;
        if pred(&traj.events) {
            return Ok((index, traj));
        }
    }
    Err(Error::Numeric {
        time: cfg.t_end,
        reason: format!("no trajectory among the first {} matches the panel definition", ensemble.n_traj),
    })
}

/// `kinds` occur in this order (not necessarily adjacent).
pub fn has_sequence(events: &[TrajectoryEvent], kinds: &[EventKind]) -> bool {
    let mut want = kinds.iter().peekable();
    for e in events {
        if want.peek() == Some(&&e.kind) {
            want.next();
        }
    }
    want.peek().is_none()
}

fn trajectory_panel(name: &str, cfg: &RunConfig, pred: impl Fn(&[TrajectoryEvent]) -> bool) -> Result<Vec<FigureFile>> {
    let (index, traj) = find_trajectory(cfg, pred)?;
    let space = cfg.scenario()?.space;
    Ok(vec![
        FigureFile::new(format!("{name}.csv"), trajectory_csv(&traj, &space)),
        FigureFile::new(
            format!("{name}_events.csv"),
            events_csv(std::iter::once((index, traj.events.as_slice()))),
        ),
    ])
}

/// All files of figure `id`.
pub fn figure(id: u32) -> Result<Vec<FigureFile>> {
    let configs = published_configs(id)?;
    let mut files: Vec<FigureFile> = configs.iter().map(|(n, c)| FigureFile::config(n, c)).collect();
    let cfg = &configs[0].1;
    match id {
        1 => {
            let rows = cli::evolve_rows(cfg)?;
            files.push(FigureFile::new("fig1a.csv", column_csv(&rows, &[("qs", |r| Some(r.qs))])));
            files.push(FigureFile::new("fig1b.csv", column_csv(&rows, &[("qt", |r| Some(r.qt))])));
            files.push(FigureFile::new("fig1c.csv", column_csv(&rows, &[("trace", |r| Some(r.trace))])));
            files.push(FigureFile::new("fig1d.csv", column_csv(&rows, &[("purity", |r| Some(r.purity))])));
        }
        2 => {
            let rows = cli::evolve_rows(cfg)?;
            files.push(FigureFile::new("fig2a.csv", column_csv(&rows, &[("qs_norm", |r| r.qs_norm)])));
            files.push(FigureFile::new("fig2b.csv", column_csv(&rows, &[("qt_norm", |r| r.qt_norm)])));
            files.push(FigureFile::new("fig2c.csv", column_csv(&rows, &[("purity_norm", |r| r.purity_norm)])));
        }
        3 => {
            files.extend(trajectory_panel("fig3a", cfg, |ev| has_sequence(ev, &[EventKind::Recombine]))?);
            files.extend(trajectory_panel("fig3b", cfg, |ev| has_sequence(ev, &[EventKind::ProjectTriplet]))?);
        }
        4 => {
            let rows = cli::evolve_rows(cfg)?;
            files.push(FigureFile::new(
                "fig4.csv",
                column_csv(&rows, &[("svn", |r| r.svn), ("info_gain", |r| r.info_gain)]),
            ));
        }
        7 => {
            files.extend(trajectory_panel("fig7", cfg, |ev| {
                has_sequence(ev, &[EventKind::ProjectTriplet, EventKind::ProjectSinglet, EventKind::Recombine])
            })?);
        }
        8 => {
            files.extend(trajectory_panel("fig8a", cfg, |ev| {
                has_sequence(ev, &[EventKind::ProjectSinglet, EventKind::Recombine])
            })?);
            files.extend(trajectory_panel("fig8b", cfg, |ev| {
                ev.first().map(|e| e.kind) == Some(EventKind::ProjectTriplet)
            })?);
            let rows = cli::trajectory_rows(&configs[1].1)?.0;
            files.push(FigureFile::new(
                "fig8c.csv",
                column_csv(&rows, &[("purity_norm", |r| r.purity_norm)]),
            ));
        }
        _ => unreachable!("validated by published_configs"),
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(kind: EventKind) -> TrajectoryEvent {
        TrajectoryEvent { time: 0.0, kind, channel: None }
    }

    #[test]
    fn sequence_matching() {
        use EventKind::*;
        let log = [ev(ProjectTriplet), ev(ProjectSinglet), ev(ProjectTriplet), ev(Recombine)];
        assert!(has_sequence(&log, &[ProjectTriplet, ProjectSinglet, Recombine]));
        assert!(has_sequence(&log, &[ProjectSinglet, Recombine]));
        assert!(!has_sequence(&log, &[Recombine, ProjectSinglet]));
        assert!(has_sequence(&[], &[]));
    }

    #[test]
    fn unknown_figure() {
        assert!(matches!(figure(5), Err(Error::Config(_))));
    }

    fn parse(csv: &str) -> Vec<Vec<f64>> {
        csv.lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    #[test]
    fn figure_one_trace_halves() {
        let files = figure(1).unwrap();
        let c = files.iter().find(|f| f.name == "fig1c.csv").unwrap();
        assert!(c.contents.starts_with("t,trace\n"));
        let rows = parse(&c.contents);
        assert_eq!(rows[0][1], 1.0);
        assert!((rows.last().unwrap()[1] - 0.5).abs() < 1e-4);
        assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
    }

    #[test]
    fn figure_three_event_structure() {
        let files = figure(3).unwrap();
        let a = files.iter().find(|f| f.name == "fig3a_events.csv").unwrap();
        let b = files.iter().find(|f| f.name == "fig3b_events.csv").unwrap();
        assert_eq!(a.contents.lines().count(), 2);
        assert!(a.contents.lines().nth(1).unwrap().ends_with("Recombine,Singlet"));
        assert!(b.contents.lines().nth(1).unwrap().ends_with("ProjectTriplet,NA"));
        // The reacting trajectory keeps ⟨Q_S⟩ = ½ until it dies.
        let traj = parse(&files.iter().find(|f| f.name == "fig3a.csv").unwrap().contents);
        for row in &traj {
            assert!(row[3] == 0.0 && row[1] == 0.0 || row[3] == 1.0 && row[1] == 0.5);
        }
    }

    #[test]
    fn figure_seven_has_kinks_and_recombination() {
        let files = figure(7).unwrap();
        let events = &files.iter().find(|f| f.name == "fig7_events.csv").unwrap().contents;
        let kinds: Vec<&str> = events.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
        assert_eq!(kinds.last(), Some(&"Recombine"));
        assert!(kinds.contains(&"ProjectTriplet") && kinds.contains(&"ProjectSinglet"));
    }
}
