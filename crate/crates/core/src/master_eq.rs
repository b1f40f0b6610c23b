//! Ensemble dynamics: the two competing master equations and a fixed-step
//! fourth-order Runge-Kutta propagator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spinhilbert::{
    check_shape, coherent_st_state, st_space, CMatrix, DensityMatrix, Hamiltonian, SpinSpace, C64,
    TRACE_TOL,
};

/// Largest Hermiticity correction accepted per step before aborting.
pub const MAX_HERMITIAN_CORRECTION: f64 = 1e-8;
/// Bound on `dt · max(k_S, k_T)`.
pub const STEP_SANITY_BOUND: f64 = 0.1;
/// Default step, in units of `1/k_S`.
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoryKind {
    /// Trace-preserving singlet-triplet dephasing of non-reacted pairs.
    Kominis,
    /// Trace-decaying equation with projection onto the non-reactive subspace.
    JonesHore,
}

impl TheoryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoryKind::Kominis => "kominis",
            TheoryKind::JonesHore => "jones-hore",
        }
    }
}

/// Full model configuration for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub space: SpinSpace,
    pub theory: TheoryKind,
    pub hamiltonian: Hamiltonian,
    pub k_s: f64,
    pub k_t: f64,
    pub rho0: DensityMatrix,
    pub t_end: f64,
    pub dt: f64,
}

impl Scenario {
    /// No mixing, singlet channel only, coherent `(|S⟩+|T⟩)/√2` start.
    pub fn desk_example(theory: TheoryKind, t_end: f64) -> Self {
        let space = st_space();
        let rho0 = coherent_st_state(&space).expect("2-dim").density_matrix();
        Self {
            hamiltonian: Hamiltonian::zeros(2),
            space,
            theory,
            k_s: 1.0,
            k_t: 0.0,
            rho0,
            t_end,
            dt: DEFAULT_DT,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if !(self.k_s >= 0.0 && self.k_s.is_finite()) || !(self.k_t >= 0.0 && self.k_t.is_finite()) {
            return bad(format!("rates must be finite and non-negative (k_s={}, k_t={})", self.k_s, self.k_t));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.dt > 0.0) || self.dt > self.t_end {
            return bad(format!("dt must satisfy 0 < dt ≤ t_end, got {}", self.dt));
        }
        let stiffness = self.dt * self.k_s.max(self.k_t);
        if stiffness > STEP_SANITY_BOUND * (1.0 + 1e-12) {
            return bad(format!(
                "dt·max(k_s, k_t) = {stiffness} exceeds the step-size bound {STEP_SANITY_BOUND}"
            ));
        }
        if self.space.projector_defect() > crate::spinhilbert::PROJECTOR_TOL {
            return bad("singlet/triplet projectors are not a complete orthogonal pair".into());
        }
        check_shape(self.hamiltonian.mat(), self.space.dim)?;
        check_shape(self.rho0.mat(), self.space.dim)?;
        self.rho0
            .check()
            .map_err(|e| Error::InvalidScenario(format!("initial state: {e}")))?;
        Ok(())
    }

    /// Number of integration steps covering `[0, t_end]`.
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }

    /// The integration grid `i·dt`, `i = 0..=n_steps`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps()).map(|i| i as f64 * self.dt).collect()
    }
}

/// Density matrices on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoSeries {
    pub theory: TheoryKind,
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Largest Frobenius-norm change made by re-symmetrizing after a step.
    pub max_hermiticity_correction: f64,
}

impl RhoSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }
}

fn commutator_term(h: &CMatrix, rho: &CMatrix) -> CMatrix {
    (h * rho - rho * h) * C64::new(0.0, -1.0)
}

/// Kominis generator without shape checks.
pub fn kominis_generator(rho: &CMatrix, space: &SpinSpace, h: &Hamiltonian, k_s: f64, k_t: f64) -> CMatrix {
    let qs = &space.q_singlet;
    let qs_rho = qs * rho;
    let dissipator = &qs_rho + rho * qs - (&qs_rho * qs) * C64::new(2.0, 0.0);
    commutator_term(h.mat(), rho) - dissipator * C64::new(0.5 * (k_s + k_t), 0.0)
}

/// Jones-Hore generator without shape checks.
pub fn jones_hore_generator(rho: &CMatrix, space: &SpinSpace, h: &Hamiltonian, k_s: f64, k_t: f64) -> CMatrix {
    let (qs, qt) = (&space.q_singlet, &space.q_triplet);
    let mut out = commutator_term(h.mat(), rho) - rho * C64::new(k_s + k_t, 0.0);
    if k_s != 0.0 {
        out += qt * rho * qt * C64::new(k_s, 0.0);
    }
    if k_t != 0.0 {
        out += qs * rho * qs * C64::new(k_t, 0.0);
    }
    out
}

fn check_operands(rho: &DensityMatrix, space: &SpinSpace, h: &Hamiltonian) -> Result<()> {
    check_shape(rho.mat(), space.dim)?;
    check_shape(h.mat(), space.dim)
}

/// `−i[H,ρ] − ((k_S+k_T)/2)(Q_S ρ + ρ Q_S − 2 Q_S ρ Q_S)`.
pub fn kominis_rhs(
    rho: &DensityMatrix,
    space: &SpinSpace,
    h: &Hamiltonian,
    k_s: f64,
    k_t: f64,
) -> Result<CMatrix> {
    check_operands(rho, space, h)?;
    Ok(kominis_generator(rho.mat(), space, h, k_s, k_t))
}

/// `−i[H,ρ] − (k_S+k_T)ρ + k_S Q_T ρ Q_T + k_T Q_S ρ Q_S`.
pub fn jones_hore_rhs(
    rho: &DensityMatrix,
    space: &SpinSpace,
    h: &Hamiltonian,
    k_s: f64,
    k_t: f64,
) -> Result<CMatrix> {
    check_operands(rho, space, h)?;
    Ok(jones_hore_generator(rho.mat(), space, h, k_s, k_t))
}

/// Right-hand side selected by the scenario's theory.
pub fn scenario_rhs(scenario: &Scenario) -> impl Fn(&CMatrix) -> CMatrix + '_ {
    move |rho| match scenario.theory {
        TheoryKind::Kominis => kominis_generator(rho, &scenario.space, &scenario.hamiltonian, scenario.k_s, scenario.k_t),
        TheoryKind::JonesHore => {
            jones_hore_generator(rho, &scenario.space, &scenario.hamiltonian, scenario.k_s, scenario.k_t)
        }
    }
}

/// Integrates the scenario's master equation over `[0, t_end]`.
pub fn evolve(scenario: &Scenario) -> Result<RhoSeries> {
    evolve_with(scenario, scenario_rhs(scenario))
}

/// Fixed-step RK4 with a caller-supplied generator. The invariants checked
/// after every step still follow `scenario.theory`.
pub fn evolve_with<F>(scenario: &Scenario, rhs: F) -> Result<RhoSeries>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    scenario.validate()?;
    let n = scenario.n_steps();
    let dt = scenario.dt;
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);

    let trace0 = scenario.rho0.trace();
    let mut rho = scenario.rho0.mat().clone();
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(scenario.rho0.clone());
    let mut max_correction: f64 = 0.0;

    for step in 1..=n {
        let t = step as f64 * dt;
        let k1 = rhs(&rho);
        let k2 = rhs(&(&rho + &k1 * half));
        let k3 = rhs(&(&rho + &k2 * half));
        let k4 = rhs(&(&rho + &k3 * full));
        let next = &rho + (k1 + (k2 + k3) * two + k4) * sixth;

        let symmetrized = (&next + next.adjoint()) * C64::new(0.5, 0.0);
        let correction = (&next - &symmetrized).norm();
        if !correction.is_finite() || correction > MAX_HERMITIAN_CORRECTION {
            return Err(Error::Numeric {
                time: t,
                reason: format!("hermiticity correction {correction:e} exceeds {MAX_HERMITIAN_CORRECTION:e}"),
            });
        }
        max_correction = max_correction.max(correction);

        let state = DensityMatrix::new(symmetrized)?;
        let trace = state.trace();
        match scenario.theory {
            TheoryKind::Kominis if (trace - trace0).abs() > TRACE_TOL => {
                return Err(Error::Numeric {
                    time: t,
                    reason: format!("trace drifted to {trace} from {trace0} under a trace-preserving generator"),
                });
            }
            TheoryKind::JonesHore if trace > states[step - 1].trace() + 1e-12 => {
                return Err(Error::Numeric {
                    time: t,
                    reason: format!("trace increased to {trace}"),
                });
            }
            _ => {}
        }
        state.check().map_err(|reason| Error::Numeric { time: t, reason })?;

        rho = state.mat().clone();
        times.push(t);
        states.push(state);
    }

    Ok(RhoSeries {
        theory: scenario.theory,
        times,
        states,
        max_hermiticity_correction: max_correction,
    })
}
