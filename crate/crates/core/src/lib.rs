//! Spin-selective radical-ion-pair reaction dynamics.
//!
//! Two competing descriptions of the non-reacted spin state are provided,
//! selected by [`TheoryKind`]: a trace-preserving dephasing master equation
//! (`Kominis`) and a trace-decaying one whose single-molecule picture ties
//! every singlet projection to a recombination (`JonesHore`). Both are
//! available as ensemble master equations ([`master_eq`]) and as
//! single-molecule quantum-jump trajectories ([`trajectories`]), with the
//! purity, entropy and information diagnostics in [`diagnostics`].
//!
//! All rates and frequencies are in units of `k_S`; time is in `1/k_S`;
//! entropies are in nats.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod figures;
pub mod master_eq;
pub mod oracle;
pub mod output;
pub mod spinhilbert;
pub mod trajectories;
pub mod verify;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use master_eq::{evolve, RhoSeries, Scenario, TheoryKind};
pub use spinhilbert::{DensityMatrix, Hamiltonian, PureState, SpinSpace};
pub use trajectories::{Conditioning, EnsembleConfig};
