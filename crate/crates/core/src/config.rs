//! JSON run configuration shared by every CLI command.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::master_eq::{Scenario, TheoryKind, DEFAULT_DT};
use crate::spinhilbert::{coherent_st_state, mixing_hamiltonian, st_space};
use crate::trajectories::{Conditioning, EnsembleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    #[default]
    CoherentSt,
    Singlet,
    Triplet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Toggle {
    On,
    #[default]
    Off,
}

fn default_k_s() -> f64 {
    1.0
}
fn default_t_end() -> f64 {
    10.0
}
fn default_dt() -> f64 {
    DEFAULT_DT
}

/// Scenario, ensemble and output options for one run on the two-state
/// `{S, T}` space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub theory: TheoryKind,
    #[serde(default = "default_k_s")]
    pub k_s: f64,
    #[serde(default)]
    pub k_t: f64,
    /// Singlet-triplet mixing frequency, units of `k_S`.
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// 0 runs the master equation only.
    #[serde(default)]
    pub n_traj: usize,
    #[serde(default)]
    pub seed: u64,
    /// Kominis trajectories only; Jones-Hore molecules always recombine.
    #[serde(default)]
    pub recombination: Toggle,
    #[serde(default)]
    pub conditioning: Conditioning,
}

impl RunConfig {
    pub fn new(theory: TheoryKind) -> Self {
        Self {
            theory,
            k_s: default_k_s(),
            k_t: 0.0,
            omega: 0.0,
            initial: InitialState::CoherentSt,
            t_end: default_t_end(),
            dt: default_dt(),
            n_traj: 0,
            seed: 0,
            recombination: Toggle::Off,
            conditioning: Conditioning::All,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let space = st_space();
        let hamiltonian = mixing_hamiltonian(&space, self.omega)?;
        let rho0 = match self.initial {
            InitialState::CoherentSt => coherent_st_state(&space)?,
            InitialState::Singlet => space.basis_state(0)?,
            InitialState::Triplet => space.basis_state(1)?,
        }
        .density_matrix();
        if !self.omega.is_finite() {
            return Err(Error::Config("omega must be finite".into()));
        }
        let scenario = Scenario {
            space,
            theory: self.theory,
            hamiltonian,
            k_s: self.k_s,
            k_t: self.k_t,
            rho0,
            t_end: self.t_end,
            dt: self.dt,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn ensemble(&self) -> Result<EnsembleConfig> {
        let config = EnsembleConfig {
            scenario: self.scenario()?,
            n_traj: self.n_traj,
            master_seed: self.seed,
            recombination_enabled: self.recombination == Toggle::On,
        };
        config.validate()?;
        Ok(config)
    }
}
