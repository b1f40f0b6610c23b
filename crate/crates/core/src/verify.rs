//! Self-check suite: solvers against the closed-form oracles, trajectory
//! ensembles against the master equations, and the algebraic identity
//! behind the projective unraveling.

use std::fmt::Write as _;

use crate::diagnostics::{diagnostic_rows, von_neumann_entropy};
use crate::error::Result;
use crate::master_eq::{evolve_with, jones_hore_generator, kominis_generator, RhoSeries, Scenario, TheoryKind};
use crate::oracle::{information_gain_limit, jh_closed_form, kominis_closed_form};
use crate::spinhilbert::{max_abs, CMatrix, Hamiltonian, SpinSpace, C64};
use crate::trajectories::{ensemble_average, Conditioning, EnsembleConfig};

/// Generator signature shared by both master equations.
pub type GeneratorFn = fn(&CMatrix, &SpinSpace, &Hamiltonian, f64, f64) -> CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed, detail: detail.into() }
    }

    fn from_result(name: &'static str, result: Result<(bool, String)>) -> Self {
        match result {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

/// The suite, parameterized by the generators under test so the harness
/// itself can be mutation-checked.
pub struct Verifier {
    pub kominis: GeneratorFn,
    pub jones_hore: GeneratorFn,
    pub n_traj: usize,
    pub seed: u64,
}

impl Default for Verifier {
    fn default() -> Self {
        Self {
            kominis: kominis_generator,
            jones_hore: jones_hore_generator,
            n_traj: 10_000,
            seed: 2024,
        }
    }
}

fn sup<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

impl Verifier {
    fn evolve(&self, theory: TheoryKind, t_end: f64) -> Result<RhoSeries> {
        let scenario = Scenario::desk_example(theory, t_end);
        let generator = match theory {
            TheoryKind::Kominis => self.kominis,
            TheoryKind::JonesHore => self.jones_hore,
        };
        evolve_with(&scenario, |rho| {
            generator(rho, &scenario.space, &scenario.hamiltonian, scenario.k_s, scenario.k_t)
        })
    }

    fn oracle_consistency(&self) -> Result<(bool, String)> {
        let scenario = Scenario::desk_example(TheoryKind::JonesHore, 1.0);
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for t in [0.2, 1.0, 3.0, 6.0] {
            for (closed, generator) in [
                (jh_closed_form as fn(f64, f64) -> _, self.jones_hore),
                (kominis_closed_form, self.kominis),
            ] {
                let numeric = (closed(t + h, 1.0).into_inner() - closed(t - h, 1.0).into_inner()) / C64::new(2.0 * h, 0.0);
                let rhs = generator(closed(t, 1.0).mat(), &scenario.space, &scenario.hamiltonian, 1.0, 0.0);
                worst = worst.max(max_abs(&(numeric - rhs)));
            }
        }
        Ok((worst <= 1e-6, format!("max |dρ/dt − rhs| = {worst:.2e}")))
    }

    fn kominis_trace_and_purity(&self) -> Result<(bool, String)> {
        let series = self.evolve(TheoryKind::Kominis, 10.0)?;
        let trace_err = sup(series.states.iter().map(|r| (r.trace() - 1.0).abs()));
        let purity_err = sup(
            series
                .times
                .iter()
                .zip(&series.states)
                .map(|(t, r)| (r.purity() - (0.5 + 0.5 * (-t).exp())).abs()),
        );
        Ok((
            trace_err <= 1e-9 && purity_err <= 1e-6,
            format!("trace err {trace_err:.2e}, purity err {purity_err:.2e}"),
        ))
    }

    fn jones_hore_closed_form(&self) -> Result<(bool, String)> {
        let series = self.evolve(TheoryKind::JonesHore, 10.0)?;
        let err = sup(
            series
                .times
                .iter()
                .zip(&series.states)
                .map(|(&t, r)| max_abs(&(r.mat() - jh_closed_form(t, 1.0).mat()))),
        );
        Ok((err <= 1e-6, format!("sup |ρ − ρ_exact| = {err:.2e}")))
    }

    fn jones_hore_entropy_and_information(&self) -> Result<(bool, String)> {
        let series = self.evolve(TheoryKind::JonesHore, 20.0)?;
        let space = Scenario::desk_example(TheoryKind::JonesHore, 1.0).space;
        let rows = diagnostic_rows(&series, &space, 1.0)?;
        let ln3 = 3f64.ln();
        let (t_min, p_min) = rows
            .iter()
            .filter_map(|r| r.purity_norm.map(|p| (r.t, p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((f64::NAN, f64::NAN));
        let (t_peak, s_peak) = rows
            .iter()
            .filter_map(|r| r.svn.map(|s| (r.t, s)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((f64::NAN, f64::NAN));
        let gain_end = rows.last().and_then(|r| r.info_gain).unwrap_or(f64::NAN);
        let gain_peak = rows
            .iter()
            .find(|r| r.t >= t_peak)
            .and_then(|r| r.info_gain)
            .unwrap_or(f64::NAN);
        let s_end = rows.last().and_then(|r| r.svn).unwrap_or(f64::NAN);
        let ok = (t_min - ln3).abs() <= 1e-3
            && (p_min - 0.75).abs() <= 1e-6
            && (t_peak - ln3).abs() <= 1e-3
            && (s_peak - 0.4157).abs() <= 1e-3
            && (gain_end - information_gain_limit()).abs() <= 1e-4
            && gain_end - gain_peak < s_peak - s_end;
        Ok((
            ok,
            format!(
                "purity_norm min {p_min:.7} at t={t_min:.4}; S peak {s_peak:.5} at t={t_peak:.4}; I_end {gain_end:.6}"
            ),
        ))
    }

    fn ensemble_vs_master(&self, theory: TheoryKind) -> Result<(bool, String)> {
        let config = EnsembleConfig {
            scenario: Scenario::desk_example(theory, 10.0),
            n_traj: self.n_traj,
            master_seed: self.seed,
            recombination_enabled: false,
        };
        let avg = ensemble_average(&config, Conditioning::All)?.to_rho_series()?;
        let exact = self.evolve(theory, 10.0)?;
        let mut err: f64 = 0.0;
        for (a, b) in avg.states.iter().zip(&exact.states) {
            let qs = (a.mat()[(0, 0)].re - b.mat()[(0, 0)].re).abs();
            err = err.max(qs).max((a.trace() - b.trace()).abs());
        }
        let tol = 3.0 * 0.5 / (self.n_traj as f64).sqrt();
        Ok((err <= tol, format!("sup error {err:.4} (tolerance {tol:.4})")))
    }

    fn unraveling_identity(&self) -> Result<(bool, String)> {
        let scenario = Scenario::desk_example(TheoryKind::Kominis, 1.0);
        let (qs, qt) = (&scenario.space.q_singlet, &scenario.space.q_triplet);
        let mut worst: f64 = 0.0;
        for (k_s, k_t, a, b, c, d) in [(1.0, 0.0, 0.3, 0.2, -0.7, 0.4), (0.7, 1.9, -1.0, 0.5, 0.25, 2.0)] {
            let rho = CMatrix::from_row_slice(2, 2, &[C64::new(a, 0.0), C64::new(b, c), C64::new(b, -c), C64::new(d, 0.0)]);
            let dt = 1e-3;
            let lambda = 0.5 * (k_s + k_t);
            let averaged = &rho * C64::new(1.0 - lambda * dt, 0.0) + (qs * &rho * qs + qt * &rho * qt) * C64::new(lambda * dt, 0.0);
            let direct = &rho + (self.kominis)(&rho, &scenario.space, &Hamiltonian::zeros(2), k_s, k_t) * C64::new(dt, 0.0);
            worst = worst.max(max_abs(&(averaged - direct)) / max_abs(&rho));
        }
        Ok((worst <= 1e-14, format!("relative defect {worst:.1e}")))
    }

    fn entropy_monotone(&self) -> Result<(bool, String)> {
        let series = self.evolve(TheoryKind::Kominis, 10.0)?;
        let mut prev = 0.0;
        let mut ok = true;
        for rho in &series.states {
            let s = von_neumann_entropy(rho)?;
            ok &= s >= prev - 1e-12;
            prev = s;
        }
        Ok((ok, format!("final entropy {prev:.6}")))
    }

    fn step_bound(&self) -> Result<(bool, String)> {
        let rejected = Scenario::desk_example(TheoryKind::JonesHore, 10.0).with_dt(0.2).validate().is_err();
        Ok((rejected, "dt = 0.2/k_S rejected".into()))
    }

    pub fn run(&self) -> Vec<Check> {
        vec![
            Check::from_result("oracle: closed forms satisfy generators", self.oracle_consistency()),
            Check::from_result("kominis: trace preserved, purity decays", self.kominis_trace_and_purity()),
            Check::from_result("kominis: entropy non-decreasing", self.entropy_monotone()),
            Check::from_result("jones-hore: solver vs closed form", self.jones_hore_closed_form()),
            Check::from_result("jones-hore: purity dip, entropy, information", self.jones_hore_entropy_and_information()),
            Check::from_result("unraveling: averaged map equals dissipator", self.unraveling_identity()),
            Check::from_result("trajectories: jones-hore ensemble", self.ensemble_vs_master(TheoryKind::JonesHore)),
            Check::from_result("trajectories: kominis ensemble", self.ensemble_vs_master(TheoryKind::Kominis)),
            Check::from_result("config: step-size bound", self.step_bound()),
        ]
    }
}

/// Fixed-width pass/fail table.
pub fn report(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{status}  {:width$}  {}", c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(out, "{} checks, {failed} failed", checks.len());
    out
}
