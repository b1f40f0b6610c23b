//! Command implementations behind the `spinpair` binary. Argument parsing
//! lives in the binary; everything here is plain library code.

use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::diagnostics::{diagnostic_rows, DiagnosticRow};
use crate::error::{Error, Result};
use crate::figures;
use crate::master_eq::evolve;
use crate::output::{diagnostics_csv, events_csv};
use crate::trajectories::{run_ensemble, Conditioning, TrajectoryEvent};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

/// Exit code for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numeric { .. } => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

/// Single-line failure reason with a machine-parsable prefix.
pub fn failure_line(err: &Error) -> String {
    let (prefix, body) = match err {
        Error::Numeric { time, reason } => ("numeric", format!("t={time}: {reason}")),
        Error::EmptyEnsemble(t) => ("ensemble", format!("conditional ensemble empty at t={t}")),
        Error::Io(e) => ("io", e.to_string()),
        Error::Config(msg) => ("config", msg.clone()),
        other => ("config", other.to_string()),
    };
    format!("{prefix}: {}", body.replace('\n', " "))
}

/// Master-equation run with every diagnostic on the full grid.
pub fn evolve_rows(cfg: &RunConfig) -> Result<Vec<DiagnosticRow>> {
    let scenario = cfg.scenario()?;
    let series = evolve(&scenario)?;
    diagnostic_rows(&series, &scenario.space, scenario.k_s)
}

pub fn evolve_csv(cfg: &RunConfig) -> Result<String> {
    Ok(diagnostics_csv(&evolve_rows(cfg)?))
}

/// Ensemble diagnostics under the configured conditioning, plus every
/// trajectory's event log.
pub fn trajectory_rows(cfg: &RunConfig) -> Result<(Vec<DiagnosticRow>, Vec<Vec<TrajectoryEvent>>)> {
    let ensemble = cfg.ensemble()?;
    let run = run_ensemble(&ensemble)?;
    let series = run.average(cfg.conditioning).to_rho_series()?;
    let mut rows = diagnostic_rows(&series, &ensemble.scenario.space, ensemble.scenario.k_s)?;
    if cfg.conditioning == Conditioning::NonReacted {
        // The information integrand needs the unnormalized surviving fraction.
        rows.iter_mut().for_each(|r| r.info_gain = None);
    }
    Ok((rows, run.events))
}

pub struct TrajectoryOutput {
    pub ensemble_csv: String,
    pub events_csv: String,
}

pub fn trajectories_csv(cfg: &RunConfig) -> Result<TrajectoryOutput> {
    let (rows, events) = trajectory_rows(cfg)?;
    Ok(TrajectoryOutput {
        ensemble_csv: diagnostics_csv(&rows),
        events_csv: events_csv(events.iter().enumerate().map(|(i, e)| (i, e.as_slice()))),
    })
}

/// Default event-log path next to the ensemble CSV: `run.csv` → `run_events.csv`.
pub fn default_events_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectories");
    out.with_file_name(format!("{stem}_events.csv"))
}

/// Writes figure `id`'s files into `dir`, returning their paths.
pub fn write_figure(id: u32, dir: &Path) -> Result<Vec<PathBuf>> {
    let files = figures::figure(id)?;
    std::fs::create_dir_all(dir)?;
    files
        .into_iter()
        .map(|f| {
            let path = dir.join(&f.name);
            std::fs::write(&path, f.contents)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master_eq::TheoryKind;

    #[test]
    fn error_mapping() {
        let numeric = Error::Numeric { time: 1.5, reason: "negative eigenvalue".into() };
        assert_eq!(exit_code(&numeric), 2);
        assert_eq!(failure_line(&numeric), "numeric: t=1.5: negative eigenvalue");
        assert_eq!(exit_code(&Error::EmptyEnsemble(3.0)), 1);
        assert!(failure_line(&Error::EmptyEnsemble(3.0)).starts_with("ensemble: "));
        let cfg_err = Error::InvalidScenario("dt too large".into());
        assert_eq!(exit_code(&cfg_err), 1);
        assert!(failure_line(&cfg_err).starts_with("config: "));
    }

    #[test]
    fn events_path() {
        assert_eq!(default_events_path(Path::new("out/run.csv")), PathBuf::from("out/run_events.csv"));
    }

    #[test]
    fn desk_example_rows() {
        let rows = evolve_rows(&RunConfig::new(TheoryKind::JonesHore)).unwrap();
        assert!((rows[0].qs - 0.5).abs() < 1e-15);
        assert!((rows[0].purity - 1.0).abs() < 1e-15);
        assert!((rows.last().unwrap().trace - 0.5).abs() < 1e-4);
        let rows = evolve_rows(&RunConfig::new(TheoryKind::Kominis)).unwrap();
        assert!((rows.last().unwrap().purity - 0.5).abs() < 1e-4);
        assert!(rows.iter().all(|r| r.info_gain.is_none()));
    }

    #[test]
    fn non_reacted_emptying_is_reported() {
        let cfg = RunConfig {
            initial: crate::config::InitialState::Singlet,
            n_traj: 3,
            t_end: 40.0,
            dt: 0.01,
            conditioning: Conditioning::NonReacted,
            ..RunConfig::new(TheoryKind::JonesHore)
        };
        let err = trajectory_rows(&cfg).expect_err("must empty");
        assert!(matches!(err, Error::EmptyEnsemble(_)));
        assert!(failure_line(&err).starts_with("ensemble: conditional ensemble empty at t="));
    }
}
