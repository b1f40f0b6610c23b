//! WebAssembly bindings for the static page in `www/`.
//!
//! Every export takes a JSON run configuration (the same schema as the CLI)
//! and returns a JSON document of plot-ready columns. Errors come back as
//! `{"error": "..."}` so the page never has to catch exceptions.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use spinpair::cli::{evolve_rows, failure_line};
use spinpair::diagnostics::DiagnosticRow;
use spinpair::output::{decimate, kind_label};
use spinpair::trajectories::{run_ensemble, run_trajectory, Channel};
use spinpair::{Result, RunConfig};

fn finish(result: Result<Value>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": failure_line(&e) }).to_string(),
    }
}

fn columns(rows: &[DiagnosticRow]) -> Value {
    let keep = decimate(rows.len());
    let pick = |f: &dyn Fn(&DiagnosticRow) -> Option<f64>| -> Vec<Option<f64>> {
        keep.iter().map(|&i| f(&rows[i])).collect()
    };
    json!({
        "t": pick(&|r| Some(r.t)),
        "qs": pick(&|r| Some(r.qs)),
        "qt": pick(&|r| Some(r.qt)),
        "trace": pick(&|r| Some(r.trace)),
        "purity": pick(&|r| Some(r.purity)),
        "purity_norm": pick(&|r| r.purity_norm),
        "svn": pick(&|r| r.svn),
        "info_gain": pick(&|r| r.info_gain),
    })
}

pub fn master_equation_json(config: &str) -> String {
    finish((|| {
        let cfg = RunConfig::from_json(config)?;
        Ok(columns(&evolve_rows(&cfg)?))
    })())
}

pub fn trajectory_json(config: &str, index: usize) -> String {
    finish((|| {
        let mut cfg = RunConfig::from_json(config)?;
        cfg.n_traj = cfg.n_traj.max(index + 1);
        let ensemble = cfg.ensemble()?;
        let traj = run_trajectory(&ensemble, index)?;
        let space = &ensemble.scenario.space;
        let keep = decimate(traj.times.len());
        let events: Vec<Value> = traj
            .events
            .iter()
            .map(|e| {
                json!({
                    "time": e.time,
                    "kind": kind_label(e.kind),
                    "channel": e.channel.map(|c| match c {
                        Channel::Singlet => "S",
                        Channel::Triplet => "T",
                    }),
                })
            })
            .collect();
        Ok(json!({
            "t": keep.iter().map(|&i| traj.times[i]).collect::<Vec<_>>(),
            "qs": keep.iter().map(|&i| traj.states[i].expectation(&space.q_singlet)).collect::<Vec<_>>(),
            "alive": keep.iter().map(|&i| traj.states[i].alive).collect::<Vec<_>>(),
            "events": events,
        }))
    })())
}

/// Ensemble average next to the master-equation solution of the same scenario.
pub fn ensemble_json(config: &str) -> String {
    finish((|| {
        let cfg = RunConfig::from_json(config)?;
        let ensemble = cfg.ensemble()?;
        let run = run_ensemble(&ensemble)?;
        let series = run.average(cfg.conditioning).to_rho_series()?;
        let space = &ensemble.scenario.space;
        let rows = spinpair::diagnostics::diagnostic_rows(&series, space, ensemble.scenario.k_s)?;
        let exact = evolve_rows(&cfg)?;
        Ok(json!({
            "n_traj": run.n_traj,
            "events": run.events.iter().map(Vec::len).sum::<usize>(),
            "ensemble": columns(&rows),
            "master": columns(&exact),
        }))
    })())
}

#[wasm_bindgen]
pub fn master_equation(config: &str) -> String {
    master_equation_json(config)
}

#[wasm_bindgen]
pub fn trajectory(config: &str, index: usize) -> String {
    trajectory_json(config, index)
}

#[wasm_bindgen]
pub fn ensemble(config: &str) -> String {
    ensemble_json(config)
}
