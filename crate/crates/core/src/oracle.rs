//! Closed-form and brute-force references for the benchmark scenario:
//! no coherent mixing, singlet channel only, start in `(|S⟩+|T⟩)/√2`.
//!
//! Nothing here calls the integrator or the trajectory sampler; the
//! formulas are written down directly so they can serve as ground truth.

use crate::error::{Error, Result};
use crate::master_eq::{RhoSeries, TheoryKind};
use crate::spinhilbert::{CVector, DensityMatrix, PureState, C64};

/// The benchmark scenario: `H = 0`, `k_T = 0`, coherent initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct DeskExample {
    pub k_s: f64,
    pub grid: Vec<f64>,
}

impl DeskExample {
    pub fn new(k_s: f64, grid: Vec<f64>) -> Result<Self> {
        if !(k_s > 0.0) {
            return Err(Error::InvalidArgument("k_s must be positive".into()));
        }
        Ok(Self { k_s, grid })
    }

    pub fn jones_hore(&self) -> Vec<DensityMatrix> {
        self.grid.iter().map(|&t| jh_closed_form(t, self.k_s)).collect()
    }

    pub fn kominis(&self) -> Vec<DensityMatrix> {
        self.grid.iter().map(|&t| kominis_closed_form(t, self.k_s)).collect()
    }
}

/// Jones-Hore single-channel solution:
/// `ρ(t) = [[½e^{-kt}, ½e^{-kt}], [½e^{-kt}, ½]]`.
pub fn jh_closed_form(t: f64, k_s: f64) -> DensityMatrix {
    let x = 0.5 * (-k_s * t).exp();
    DensityMatrix::from_real(2, &[x, x, x, 0.5]).expect("2x2")
}

/// Kominis solution with `H = 0`, `k_T = 0`:
/// `ρ(t) = [[½, ½e^{-kt/2}], [½e^{-kt/2}, ½]]`.
pub fn kominis_closed_form(t: f64, k_s: f64) -> DensityMatrix {
    let c = 0.5 * (-0.5 * k_s * t).exp();
    DensityMatrix::from_real(2, &[0.5, c, c, 0.5]).expect("2x2")
}

/// Two-level atom conditioned on no photon detected up to `t`, in the
/// `{|e⟩, |g⟩}` basis: `(e^{-γt/2}|e⟩ + |g⟩)/N`.
pub fn atom_no_photon_state(t: f64, gamma: f64) -> PureState {
    let e = (-0.5 * gamma * t).exp();
    let norm = (1.0 + e * e).sqrt();
    PureState {
        vec: CVector::from_vec(vec![C64::new(e / norm, 0.0), C64::new(1.0 / norm, 0.0)]),
        alive: true,
    }
}

/// Excited-state population of [`atom_no_photon_state`].
pub fn atom_excited_population(t: f64, gamma: f64) -> f64 {
    let x = (-gamma * t).exp();
    x / (1.0 + x)
}

/// Exact expectation of the three-branch jump process on a time grid:
/// `ρ ← (1 − k dt) ρ + k dt · Q_T ρ Q_T`, iterated without sampling.
pub fn discrete_markov_oracle(k_s: f64, dt: f64, t_end: f64) -> Result<RhoSeries> {
    if !(dt > 0.0) || k_s * dt > 1e-3 {
        return Err(Error::InvalidArgument(format!(
            "discrete oracle needs 0 < k_s·dt ≤ 1e-3, got {}",
            k_s * dt
        )));
    }
    let n = (t_end / dt).round() as usize;
    let p = k_s * dt;
    // Work on the four real entries; the state stays real.
    let (mut ss, mut st, tt) = (0.5, 0.5, 0.5);
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    for i in 0..=n {
        times.push(i as f64 * dt);
        states.push(DensityMatrix::from_real(2, &[ss, st, st, tt]).expect("2x2"));
        // Q_T ρ Q_T keeps only ρ_TT.
        ss *= 1.0 - p;
        st *= 1.0 - p;
    }
    Ok(RhoSeries {
        theory: TheoryKind::JonesHore,
        times,
        states,
        max_hermiticity_correction: 0.0,
    })
}

/// Binary entropy in nats, computed from the definition without any of the
/// diagnostics-module tolerance handling.
fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// `½∫₀¹ s_I(u/(1+u)) du`: the total information gain of the benchmark
/// Jones-Hore scenario as `t → ∞`.
pub fn information_gain_limit() -> f64 {
    0.5 * information_gain_between(0.0, 1.0)
}

/// Information gained from the benchmark reactions over `[t, ∞)`, for `k_s = 1`
/// time units: `½∫₀^{e^{-t}} s_I(u/(1+u)) du`.
pub fn information_gain_tail(t: f64) -> f64 {
    0.5 * information_gain_between(0.0, (-t).exp())
}

/// Composite Simpson on `∫_a^b s_I(u/(1+u)) du` after `u = v²`, which
/// removes the `u ln u` endpoint behaviour.
fn information_gain_between(a: f64, b: f64) -> f64 {
    let f = |v: f64| {
        let u = v * v;
        binary_entropy(u / (1.0 + u)) * 2.0 * v
    };
    let (va, vb) = (a.sqrt(), b.sqrt());
    let n = 20_000;
    let h = (vb - va) / n as f64;
    let mut acc = f(va) + f(vb);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(va + i as f64 * h);
    }
    acc * h / 3.0
}
