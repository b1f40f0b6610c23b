//! Single-molecule quantum-jump trajectories and their ensemble averages.
//!
//! Each step of length `dt` draws one uniform number and partitions
//! `[0, 1)` into mutually exclusive branches with state-dependent
//! probabilities; if no branch fires the state evolves unitarily under `H`.
//!
//! Jones-Hore rules (per step, `⟨·⟩` taken in the current state):
//!
//! | probability      | outcome                         |
//! |------------------|---------------------------------|
//! | `k_S dt ⟨Q_S⟩`   | recombine through the singlet   |
//! | `k_T dt ⟨Q_T⟩`   | recombine through the triplet   |
//! | `k_S dt ⟨Q_T⟩`   | project onto `Q_T`              |
//! | `k_T dt ⟨Q_S⟩`   | project onto `Q_S`              |
//!
//! Kominis rules: `Q_S` is measured at rate `λ = (k_S + k_T)/2`, giving
//! outcome 1 with probability `⟨Q_S⟩`; recombination, when enabled, is a
//! separate hazard `k_S⟨Q_S⟩ + k_T⟨Q_T⟩`.
//!
//! A projection onto the subspace the state already occupies leaves the
//! state unchanged and is not recorded as an event.
//!
//! # Seeding
//!
//! Trajectory `i` of an ensemble draws from `ChaCha8Rng` seeded with
//! `seed_from_u64(master_seed)` and switched to stream `i`
//! (`set_stream(i)`). The stream layout is fixed by the ChaCha definition,
//! so results are reproducible across machines and independent of the
//! order in which trajectories run.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::master_eq::{RhoSeries, Scenario, TheoryKind};
use crate::spinhilbert::{quadratic_form, CMatrix, CVector, DensityMatrix, Hamiltonian, PureState, SpinSpace, C64};

/// A state already inside a subspace to this precision is not projected again.
const NOOP_PROJECTION_TOL: f64 = 1e-12;
/// Trajectories per accumulation block.
const BLOCK: usize = 64;
/// Blocks evaluated concurrently before being folded in index order.
const WAVE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    ProjectSinglet,
    ProjectTriplet,
    Recombine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Singlet,
    Triplet,
}

/// What happened during one step, without its time stamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Jump {
    Project(Channel),
    Recombine(Channel),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub kind: EventKind,
    /// Set for recombinations only.
    pub channel: Option<Channel>,
}

impl TrajectoryEvent {
    fn new(time: f64, jump: Jump) -> Self {
        match jump {
            Jump::Project(Channel::Singlet) => Self { time, kind: EventKind::ProjectSinglet, channel: None },
            Jump::Project(Channel::Triplet) => Self { time, kind: EventKind::ProjectTriplet, channel: None },
            Jump::Recombine(ch) => Self { time, kind: EventKind::Recombine, channel: Some(ch) },
        }
    }
}

/// Per-step record of one molecule.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PureState>,
    pub events: Vec<TrajectoryEvent>,
}

impl Trajectory {
    pub fn recombined(&self) -> bool {
        self.events.iter().any(|e| e.kind == EventKind::Recombine)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub scenario: Scenario,
    pub n_traj: usize,
    pub master_seed: u64,
    /// Kominis only: whether molecules may recombine at all.
    pub recombination_enabled: bool,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_traj == 0 {
            return Err(Error::InvalidScenario("n_traj must be at least 1".into()));
        }
        check_step_bound(self.scenario.dt, self.scenario.k_s, self.scenario.k_t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// Dead trajectories count as zero; the trace is the surviving fraction.
    #[default]
    All,
    /// Average over trajectories still alive, normalized to unit trace.
    NonReacted,
}

fn check_step_bound(dt: f64, k_s: f64, k_t: f64) -> Result<()> {
    if dt * (k_s + k_t) > 0.1 * (1.0 + 1e-12) {
        return Err(Error::InvalidScenario(format!(
            "trajectory step needs dt·(k_s + k_t) ≤ 0.1, got {}",
            dt * (k_s + k_t)
        )));
    }
    Ok(())
}

/// Precomputed single-step kernel shared by every trajectory of a run.
#[derive(Debug, Clone)]
pub struct Stepper {
    theory: TheoryKind,
    q_singlet: CMatrix,
    q_triplet: CMatrix,
    /// `exp(−iH dt)`, or `None` for `H = 0`.
    propagator: Option<CMatrix>,
    k_s: f64,
    k_t: f64,
    dt: f64,
    recombination_enabled: bool,
}

impl Stepper {
    pub fn new(
        theory: TheoryKind,
        space: &SpinSpace,
        h: &Hamiltonian,
        k_s: f64,
        k_t: f64,
        dt: f64,
        recombination_enabled: bool,
    ) -> Result<Self> {
        crate::spinhilbert::check_shape(h.mat(), space.dim)?;
        check_step_bound(dt, k_s, k_t)?;
        if !(k_s >= 0.0 && k_t >= 0.0 && dt > 0.0) {
            return Err(Error::InvalidArgument("rates must be non-negative and dt positive".into()));
        }
        let propagator = (!h.is_zero()).then(|| unitary_propagator(h, dt));
        Ok(Self {
            theory,
            q_singlet: space.q_singlet.clone(),
            q_triplet: space.q_triplet.clone(),
            propagator,
            k_s,
            k_t,
            dt,
            recombination_enabled,
        })
    }

    pub fn for_config(config: &EnsembleConfig) -> Result<Self> {
        let s = &config.scenario;
        Self::new(s.theory, &s.space, &s.hamiltonian, s.k_s, s.k_t, s.dt, config.recombination_enabled)
    }

    /// Advances `state` by one step given a uniform draw `u ∈ [0, 1)`.
    pub fn step(&self, state: &mut PureState, u: f64) -> Result<Option<Jump>> {
        if !state.alive {
            return Err(Error::DeadState);
        }
        let qs = quadratic_form(&self.q_singlet, &state.vec);
        let qt = quadratic_form(&self.q_triplet, &state.vec);
        let dt = self.dt;

        let branches: [(f64, Jump); 4] = match self.theory {
            TheoryKind::JonesHore => [
                (self.k_s * dt * qs, Jump::Recombine(Channel::Singlet)),
                (self.k_t * dt * qt, Jump::Recombine(Channel::Triplet)),
                (self.k_s * dt * qt, Jump::Project(Channel::Triplet)),
                (self.k_t * dt * qs, Jump::Project(Channel::Singlet)),
            ],
            TheoryKind::Kominis => {
                let lambda = 0.5 * (self.k_s + self.k_t);
                let rec = if self.recombination_enabled { 1.0 } else { 0.0 };
                [
                    (lambda * dt * qs, Jump::Project(Channel::Singlet)),
                    (lambda * dt * qt, Jump::Project(Channel::Triplet)),
                    (rec * self.k_s * dt * qs, Jump::Recombine(Channel::Singlet)),
                    (rec * self.k_t * dt * qt, Jump::Recombine(Channel::Triplet)),
                ]
            }
        };

        let mut cumulative = 0.0;
        let mut fired = None;
        for (p, jump) in branches {
            cumulative += p.max(0.0);
            if u < cumulative {
                fired = Some(jump);
                break;
            }
        }

        match fired {
            Some(Jump::Recombine(ch)) => {
                *state = PureState::dead(state.dim());
                Ok(Some(Jump::Recombine(ch)))
            }
            Some(Jump::Project(ch)) => {
                let (q, already) = match ch {
                    Channel::Singlet => (&self.q_singlet, qs),
                    Channel::Triplet => (&self.q_triplet, qt),
                };
                if already >= 1.0 - NOOP_PROJECTION_TOL {
                    self.unitary(state);
                    return Ok(None);
                }
                let projected = q * &state.vec;
                let norm = projected.norm();
                state.vec = projected / C64::new(norm, 0.0);
                Ok(Some(Jump::Project(ch)))
            }
            _ => {
                self.unitary(state);
                Ok(None)
            }
        }
    }

    fn unitary(&self, state: &mut PureState) {
        if let Some(u) = &self.propagator {
            state.vec = u * &state.vec;
        }
    }
}

/// `exp(−iH dt)` from the Hermitian eigendecomposition of `H`.
fn unitary_propagator(h: &Hamiltonian, dt: f64) -> CMatrix {
    let eig = SymmetricEigen::new(h.mat().clone());
    let v = &eig.eigenvectors;
    let phases = CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * dt)),
    );
    v * CMatrix::from_diagonal(&phases) * v.adjoint()
}

/// One Jones-Hore step drawing from `rng`.
#[allow(clippy::too_many_arguments)]
pub fn jh_step<R: Rng + ?Sized>(
    state: &PureState,
    space: &SpinSpace,
    h: &Hamiltonian,
    k_s: f64,
    k_t: f64,
    dt: f64,
    rng: &mut R,
) -> Result<(PureState, Option<Jump>)> {
    let stepper = Stepper::new(TheoryKind::JonesHore, space, h, k_s, k_t, dt, true)?;
    let mut next = state.clone();
    let jump = stepper.step(&mut next, rng.gen())?;
    Ok((next, jump))
}

/// One Kominis step drawing from `rng`.
#[allow(clippy::too_many_arguments)]
pub fn kominis_step<R: Rng + ?Sized>(
    state: &PureState,
    space: &SpinSpace,
    h: &Hamiltonian,
    k_s: f64,
    k_t: f64,
    dt: f64,
    recombination_enabled: bool,
    rng: &mut R,
) -> Result<(PureState, Option<Jump>)> {
    let stepper = Stepper::new(TheoryKind::Kominis, space, h, k_s, k_t, dt, recombination_enabled)?;
    let mut next = state.clone();
    let jump = stepper.step(&mut next, rng.gen())?;
    Ok((next, jump))
}

/// Random stream of trajectory `index`.
pub fn trajectory_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

/// Pure-state decomposition of the initial density matrix.
#[derive(Debug, Clone)]
struct InitialEnsemble {
    weights: Vec<f64>,
    vectors: Vec<CVector>,
}

impl InitialEnsemble {
    fn new(rho0: &DensityMatrix) -> Result<Self> {
        let rho = rho0
            .normalized()
            .ok_or_else(|| Error::InvalidScenario("initial state has zero trace".into()))?;
        let m = rho.mat();
        if rho.purity() >= 1.0 - 1e-12 {
            // Pure: read the vector off the column with the largest population.
            let j = (0..rho.dim())
                .max_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re))
                .unwrap_or(0);
            let col = m.column(j) / C64::new(m[(j, j)].re.sqrt(), 0.0);
            let vec = CVector::from_iterator(rho.dim(), col.iter().copied());
            return Ok(Self { weights: vec![1.0], vectors: vec![PureState::from_vec(vec)?.vec] });
        }
        let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let mut weights = Vec::new();
        let mut vectors = Vec::new();
        for (k, &w) in eig.eigenvalues.iter().enumerate() {
            if w > 1e-15 {
                weights.push(w);
                vectors.push(eig.eigenvectors.column(k).into_owned());
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { weights, vectors })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> PureState {
        let k = if self.weights.len() == 1 {
            0
        } else {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            self.weights
                .iter()
                .position(|w| {
                    acc += w;
                    u < acc
                })
                .unwrap_or(self.weights.len() - 1)
        };
        PureState { vec: self.vectors[k].clone(), alive: true }
    }
}

/// Runs trajectory `index`, calling `visit(step, state)` at every grid point.
fn simulate<F>(
    config: &EnsembleConfig,
    stepper: &Stepper,
    initial: &InitialEnsemble,
    index: usize,
    mut visit: F,
) -> Result<Vec<TrajectoryEvent>>
where
    F: FnMut(usize, &PureState),
{
    let mut rng = trajectory_rng(config.master_seed, index);
    let mut state = initial.sample(&mut rng);
    let mut events = Vec::new();
    let n = config.scenario.n_steps();
    let dt = config.scenario.dt;
    visit(0, &state);
    for step in 1..=n {
        if state.alive {
            let u: f64 = rng.gen();
            if let Some(jump) = stepper.step(&mut state, u)? {
                events.push(TrajectoryEvent::new(step as f64 * dt, jump));
            }
        }
        visit(step, &state);
    }
    Ok(events)
}

/// Full per-step record of trajectory `index`, deterministic in
/// `(master_seed, index)`.
pub fn run_trajectory(config: &EnsembleConfig, index: usize) -> Result<Trajectory> {
    config.validate()?;
    if index >= config.n_traj {
        return Err(Error::InvalidArgument(format!(
            "trajectory index {index} out of range (n_traj = {})",
            config.n_traj
        )));
    }
    let stepper = Stepper::for_config(config)?;
    let initial = InitialEnsemble::new(&config.scenario.rho0)?;
    let times = config.scenario.times();
    let mut states = Vec::with_capacity(times.len());
    let events = simulate(config, &stepper, &initial, index, |_, s| states.push(s.clone()))?;
    Ok(Trajectory { times, states, events })
}

/// Raw sums over an ensemble, before conditioning.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub theory: TheoryKind,
    pub times: Vec<f64>,
    pub n_traj: usize,
    /// `Σ |ψ⟩⟨ψ|` over alive trajectories at each grid time.
    pub sums: Vec<CMatrix>,
    /// Alive trajectories at each grid time.
    pub alive: Vec<usize>,
    /// Event log of each trajectory, by index.
    pub events: Vec<Vec<TrajectoryEvent>>,
}

struct BlockResult {
    sums: Vec<C64>,
    alive: Vec<usize>,
    events: Vec<Vec<TrajectoryEvent>>,
}

fn run_block(
    config: &EnsembleConfig,
    stepper: &Stepper,
    initial: &InitialEnsemble,
    block: usize,
) -> Result<BlockResult> {
    let dim = config.scenario.space.dim;
    let n_times = config.scenario.n_steps() + 1;
    let mut sums = vec![C64::new(0.0, 0.0); n_times * dim * dim];
    let mut alive = vec![0usize; n_times];
    let mut events = Vec::new();
    let start = block * BLOCK;
    let end = (start + BLOCK).min(config.n_traj);
    for index in start..end {
        let ev = simulate(config, stepper, initial, index, |step, state| {
            if !state.alive {
                return;
            }
            alive[step] += 1;
            let cell = &mut sums[step * dim * dim..(step + 1) * dim * dim];
            for i in 0..dim {
                let vi = state.vec[i];
                for j in 0..dim {
                    // column-major, matching nalgebra storage
                    cell[j * dim + i] += vi * state.vec[j].conj();
                }
            }
        })?;
        events.push(ev);
    }
    Ok(BlockResult { sums, alive, events })
}

#[cfg(feature = "parallel")]
fn run_wave(
    config: &EnsembleConfig,
    stepper: &Stepper,
    initial: &InitialEnsemble,
    blocks: std::ops::Range<usize>,
) -> Vec<Result<BlockResult>> {
    use rayon::prelude::*;
    blocks
        .into_par_iter()
        .map(|b| run_block(config, stepper, initial, b))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_wave(
    config: &EnsembleConfig,
    stepper: &Stepper,
    initial: &InitialEnsemble,
    blocks: std::ops::Range<usize>,
) -> Vec<Result<BlockResult>> {
    blocks.map(|b| run_block(config, stepper, initial, b)).collect()
}

/// Runs every trajectory of the ensemble and accumulates `|ψ⟩⟨ψ|` per
/// grid time. Blocks of trajectories are summed independently and folded
/// in block order, so the result does not depend on the thread count.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleRun> {
    config.validate()?;
    let stepper = Stepper::for_config(config)?;
    let initial = InitialEnsemble::new(&config.scenario.rho0)?;
    let dim = config.scenario.space.dim;
    let times = config.scenario.times();
    let n_times = times.len();
    let n_blocks = config.n_traj.div_ceil(BLOCK);

    let mut flat = vec![C64::new(0.0, 0.0); n_times * dim * dim];
    let mut alive = vec![0usize; n_times];
    let mut events = Vec::with_capacity(config.n_traj);
    let mut first = 0;
    while first < n_blocks {
        let last = (first + WAVE).min(n_blocks);
        for block in run_wave(config, &stepper, &initial, first..last) {
            let block = block?;
            flat.iter_mut().zip(&block.sums).for_each(|(a, b)| *a += b);
            alive.iter_mut().zip(&block.alive).for_each(|(a, b)| *a += b);
            events.extend(block.events);
        }
        first = last;
    }

    let sums = flat
        .chunks_exact(dim * dim)
        .map(|c| CMatrix::from_column_slice(dim, dim, c))
        .collect();
    Ok(EnsembleRun {
        theory: config.scenario.theory,
        times,
        n_traj: config.n_traj,
        sums,
        alive,
        events,
    })
}

/// Ensemble-averaged density matrices. `None` marks a grid time where the
/// conditional ensemble is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAverage {
    pub theory: TheoryKind,
    pub conditioning: Conditioning,
    pub times: Vec<f64>,
    pub states: Vec<Option<DensityMatrix>>,
    pub alive: Vec<usize>,
}

impl EnsembleAverage {
    /// First grid time with an empty conditional ensemble.
    pub fn first_gap(&self) -> Option<f64> {
        self.states
            .iter()
            .zip(&self.times)
            .find_map(|(s, &t)| s.is_none().then_some(t))
    }

    /// Converts to a plain series, failing at the first gap.
    pub fn to_rho_series(&self) -> Result<RhoSeries> {
        if let Some(t) = self.first_gap() {
            return Err(Error::EmptyEnsemble(t));
        }
        Ok(RhoSeries {
            theory: self.theory,
            times: self.times.clone(),
            states: self.states.iter().flatten().cloned().collect(),
            max_hermiticity_correction: 0.0,
        })
    }
}

impl EnsembleRun {
    pub fn average(&self, conditioning: Conditioning) -> EnsembleAverage {
        let states = self
            .sums
            .iter()
            .zip(&self.alive)
            .map(|(sum, &alive)| {
                let denom = match conditioning {
                    Conditioning::All => self.n_traj,
                    Conditioning::NonReacted if alive == 0 => return None,
                    Conditioning::NonReacted => alive,
                };
                Some(DensityMatrix::new(sum / C64::new(denom as f64, 0.0)).expect("square"))
            })
            .collect();
        EnsembleAverage {
            theory: self.theory,
            conditioning,
            times: self.times.clone(),
            states,
            alive: self.alive.clone(),
        }
    }
}

/// Ensemble average of `|ψ⟩⟨ψ|` under the chosen conditioning.
pub fn ensemble_average(config: &EnsembleConfig, conditioning: Conditioning) -> Result<EnsembleAverage> {
    Ok(run_ensemble(config)?.average(conditioning))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master_eq::Scenario;
    use crate::spinhilbert::{coherent_st_state, max_abs, mixing_hamiltonian, st_space};

    fn desk(theory: TheoryKind, n_traj: usize, t_end: f64, recombination: bool) -> EnsembleConfig {
        EnsembleConfig {
            scenario: Scenario::desk_example(theory, t_end),
            n_traj,
            master_seed: 11,
            recombination_enabled: recombination,
        }
    }

    #[test]
    fn unraveling_reproduces_kominis_dissipator() {
        // (1 − λdt)ρ + λdt(Q_SρQ_S + Q_TρQ_T) = ρ + dt·D[ρ] with λ = (k_S+k_T)/2.
        let s = st_space();
        let rho = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.3, 0.0), C64::new(0.2, -0.7), C64::new(0.2, 0.7), C64::new(-0.4, 0.0)],
        );
        let (ks, kt, dt) = (1.3, 0.4, 1e-3);
        let lambda = 0.5 * (ks + kt);
        let (qs, qt) = (&s.q_singlet, &s.q_triplet);
        let averaged = &rho * C64::new(1.0 - lambda * dt, 0.0)
            + (qs * &rho * qs + qt * &rho * qt) * C64::new(lambda * dt, 0.0);
        let dissipator = crate::master_eq::kominis_generator(&rho, &s, &Hamiltonian::zeros(2), ks, kt);
        let direct = &rho + dissipator * C64::new(dt, 0.0);
        assert!(max_abs(&(averaged - direct)) <= 1e-14);
    }

    #[test]
    fn triplet_is_dark_under_jones_hore() {
        let s = st_space();
        let h = Hamiltonian::zeros(2);
        let mut state = s.basis_state(1).unwrap();
        let mut rng = trajectory_rng(3, 0);
        for _ in 0..10_000 {
            let (next, jump) = jh_step(&state, &s, &h, 1.0, 0.0, 0.1, &mut rng).unwrap();
            assert!(jump.is_none());
            assert_eq!(next, state);
            state = next;
        }
    }

    #[test]
    fn jh_branch_partition() {
        let s = st_space();
        let stepper = Stepper::new(TheoryKind::JonesHore, &s, &Hamiltonian::zeros(2), 1.0, 0.0, 0.01, true).unwrap();
        let psi = coherent_st_state(&s).unwrap();
        let fire = |u: f64| {
            let mut st = psi.clone();
            (stepper.step(&mut st, u).unwrap(), st)
        };
        // [0, 0.005): recombine; [0.005, 0.01): project to T; else nothing.
        assert_eq!(fire(0.0049).0, Some(Jump::Recombine(Channel::Singlet)));
        let (jump, st) = fire(0.0051);
        assert_eq!(jump, Some(Jump::Project(Channel::Triplet)));
        assert_eq!(st.vec[0], C64::new(0.0, 0.0));
        assert!((st.vec[1].re - 1.0).abs() < 1e-15);
        let (jump, st) = fire(0.0101);
        assert_eq!(jump, None);
        assert_eq!(st, psi);
    }

    #[test]
    fn singlet_can_only_recombine() {
        let s = st_space();
        let stepper = Stepper::new(TheoryKind::JonesHore, &s, &Hamiltonian::zeros(2), 1.0, 0.0, 0.01, true).unwrap();
        let singlet = s.basis_state(0).unwrap();
        let mut st = singlet.clone();
        assert_eq!(stepper.step(&mut st, 0.0099).unwrap(), Some(Jump::Recombine(Channel::Singlet)));
        let mut st = singlet.clone();
        assert_eq!(stepper.step(&mut st, 0.0101).unwrap(), None);
        assert_eq!(st, singlet);
    }

    #[test]
    fn dead_state_rejected() {
        let s = st_space();
        let mut rng = trajectory_rng(0, 0);
        let dead = PureState::dead(2);
        assert!(matches!(
            jh_step(&dead, &s, &Hamiltonian::zeros(2), 1.0, 0.0, 1e-3, &mut rng),
            Err(Error::DeadState)
        ));
        assert!(matches!(
            kominis_step(&dead, &s, &Hamiltonian::zeros(2), 1.0, 0.0, 1e-3, true, &mut rng),
            Err(Error::DeadState)
        ));
    }

    #[test]
    fn step_bound_enforced() {
        let s = st_space();
        let mut rng = trajectory_rng(0, 0);
        let psi = coherent_st_state(&s).unwrap();
        assert!(jh_step(&psi, &s, &Hamiltonian::zeros(2), 1.0, 0.5, 0.1, &mut rng).is_err());
    }

    #[test]
    fn kominis_triplet_projection_is_final() {
        let s = st_space();
        let stepper = Stepper::new(TheoryKind::Kominis, &s, &Hamiltonian::zeros(2), 1.0, 0.0, 0.01, true).unwrap();
        let mut st = coherent_st_state(&s).unwrap();
        // λ = 1/2: [0, 0.0025) project S, [0.0025, 0.005) project T.
        assert_eq!(stepper.step(&mut st, 0.003).unwrap(), Some(Jump::Project(Channel::Triplet)));
        for i in 0..1000 {
            let u = i as f64 / 1000.0;
            assert_eq!(stepper.step(&mut st, u).unwrap(), None);
        }
        assert!(st.alive);
    }

    #[test]
    fn unitary_step_preserves_norm() {
        let s = st_space();
        let h = mixing_hamiltonian(&s, 5.0).unwrap();
        let cfg = EnsembleConfig {
            scenario: Scenario {
                hamiltonian: h,
                rho0: s.basis_state(0).unwrap().density_matrix(),
                ..Scenario::desk_example(TheoryKind::Kominis, 5.0)
            },
            n_traj: 4,
            master_seed: 7,
            recombination_enabled: true,
        };
        for i in 0..4 {
            let traj = run_trajectory(&cfg, i).unwrap();
            for st in traj.states.iter().filter(|s| s.alive) {
                assert!((st.vec.norm() - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn trajectory_determinism() {
        let cfg = desk(TheoryKind::Kominis, 10, 5.0, true);
        for i in 0..10 {
            assert_eq!(run_trajectory(&cfg, i).unwrap(), run_trajectory(&cfg, i).unwrap());
        }
        assert!(run_trajectory(&cfg, 10).is_err());
    }

    #[test]
    fn dead_trajectories_report_zero() {
        let cfg = desk(TheoryKind::JonesHore, 200, 5.0, true);
        let s = &cfg.scenario.space;
        for i in 0..200 {
            let traj = run_trajectory(&cfg, i).unwrap();
            assert!(traj.events.len() <= 1);
            if let Some(ev) = traj.events.iter().find(|e| e.kind == EventKind::Recombine) {
                for (t, st) in traj.times.iter().zip(&traj.states) {
                    if *t >= ev.time {
                        assert!(!st.alive);
                        assert_eq!(st.expectation(&s.q_singlet), 0.0);
                        assert_eq!(st.expectation(&s.q_triplet), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn ensemble_matches_single_trajectories() {
        let cfg = desk(TheoryKind::JonesHore, 70, 2.0, true);
        let run = run_ensemble(&cfg).unwrap();
        for i in [0, 33, 69] {
            assert_eq!(run.events[i], run_trajectory(&cfg, i).unwrap().events);
        }
        let step = 1500;
        let alive = (0..70).filter(|&i| run_trajectory(&cfg, i).unwrap().states[step].alive).count();
        assert_eq!(run.alive[step], alive);
    }

    #[test]
    fn non_reacted_gap_is_flagged() {
        // Start in the singlet: every molecule eventually recombines.
        let mut cfg = desk(TheoryKind::JonesHore, 5, 40.0, true);
        cfg.scenario.rho0 = cfg.scenario.space.basis_state(0).unwrap().density_matrix();
        cfg.scenario.dt = 1e-2;
        let avg = ensemble_average(&cfg, Conditioning::NonReacted).unwrap();
        let gap = avg.first_gap().expect("ensemble should empty");
        assert!(matches!(avg.to_rho_series(), Err(Error::EmptyEnsemble(t)) if t == gap));
        let all = ensemble_average(&cfg, Conditioning::All).unwrap();
        assert!(all.first_gap().is_none());
        assert_eq!(all.to_rho_series().unwrap().last().unwrap().trace(), 0.0);
    }

    #[test]
    fn mixed_initial_state_sampled() {
        let mut cfg = desk(TheoryKind::Kominis, 2000, 0.01, false);
        cfg.scenario.rho0 = DensityMatrix::from_real(2, &[0.25, 0.0, 0.0, 0.75]).unwrap();
        let avg = ensemble_average(&cfg, Conditioning::All).unwrap();
        let rho = avg.states[0].as_ref().unwrap();
        assert!((rho.mat()[(0, 0)].re - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / 2000.0).sqrt());
    }
}
