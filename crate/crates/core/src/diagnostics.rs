//! Scalar diagnostics of a density-matrix time series: projector
//! expectations, trace, purity, their trace-normalized variants, the von
//! Neumann entropy of the non-reacted ensemble and the information carried
//! off by reacting molecules. Entropies are in nats.

use crate::error::{Error, Result};
use crate::master_eq::{RhoSeries, TheoryKind};
use crate::spinhilbert::{expectation, DensityMatrix, SpinSpace, POSITIVITY_TOL};

/// Normalized quantities are reported only while `Tr{ρ}` is at least this.
pub const NORMALIZATION_THRESHOLD: f64 = 1e-6;
const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub qs: f64,
    pub qt: f64,
    pub trace: f64,
    pub purity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedObservables {
    pub qs_norm: f64,
    pub qt_norm: f64,
    pub purity_norm: f64,
}

/// One output row. `None` is written as `NA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    pub qs: f64,
    pub qt: f64,
    pub trace: f64,
    pub purity: f64,
    pub qs_norm: Option<f64>,
    pub qt_norm: Option<f64>,
    pub purity_norm: Option<f64>,
    pub svn: Option<f64>,
    pub p_s: Option<f64>,
    pub s_i: Option<f64>,
    pub info_gain: Option<f64>,
}

/// `(⟨Q_S⟩, ⟨Q_T⟩, Tr{ρ}, Tr{ρ²})`.
pub fn basic_observables(rho: &DensityMatrix, space: &SpinSpace) -> Result<Observables> {
    Ok(Observables {
        qs: expectation(&space.q_singlet, rho)?,
        qt: expectation(&space.q_triplet, rho)?,
        trace: rho.trace(),
        purity: rho.purity(),
    })
}

/// `(⟨Q_S⟩/Tr, ⟨Q_T⟩/Tr, Tr{ρ²}/Tr²)`, or `None` below the threshold.
pub fn normalized_observables(rho: &DensityMatrix, space: &SpinSpace) -> Result<Option<NormalizedObservables>> {
    let obs = basic_observables(rho, space)?;
    if obs.trace < NORMALIZATION_THRESHOLD {
        return Ok(None);
    }
    Ok(Some(NormalizedObservables {
        qs_norm: obs.qs / obs.trace,
        qt_norm: obs.qt / obs.trace,
        purity_norm: obs.purity / (obs.trace * obs.trace),
    }))
}

/// `−Σ λ ln λ` over the eigenvalues of `ρ`. Expects a unit-trace input;
/// eigenvalues in `[−1e-9, 0)` count as zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for lambda in rho.eigenvalues() {
        if lambda < POSITIVITY_TOL {
            return Err(Error::Numeric {
                time: f64::NAN,
                reason: format!("negative eigenvalue {lambda:e} in entropy"),
            });
        }
        if lambda > 0.0 {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s)
}

/// Binary entropy `−p ln p − (1−p) ln(1−p)` in nats.
pub fn binary_information(p_s: f64) -> Result<f64> {
    if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&p_s) {
        return Err(Error::InvalidProbability(p_s));
    }
    let p = p_s.clamp(0.0, 1.0);
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Reaction flux times the information of the reacting molecule,
/// `k_S Tr{Q_S ρ} s_I(Tr{Q_S ρ_nr})`.
fn information_flux(rho: &DensityMatrix, space: &SpinSpace, k_s: f64) -> Result<f64> {
    let obs = basic_observables(rho, space)?;
    if obs.trace < NORMALIZATION_THRESHOLD {
        return Ok(0.0);
    }
    let p_s = obs.qs / obs.trace;
    Ok(k_s * obs.qs.max(0.0) * binary_information(p_s)?)
}

/// Cumulative information gained from reacting molecules,
/// `I(t) = ∫₀ᵗ k_S Tr{Q_S ρ} s_I(p_S) dt'`, by trapezoidal quadrature on the
/// series grid.
pub fn information_gain(series: &RhoSeries, space: &SpinSpace, k_s: f64) -> Result<Vec<f64>> {
    if series.theory != TheoryKind::JonesHore {
        return Err(Error::NotJonesHore);
    }
    let flux = series
        .states
        .iter()
        .map(|rho| information_flux(rho, space, k_s))
        .collect::<Result<Vec<_>>>()?;
    let mut gain = Vec::with_capacity(flux.len());
    let mut acc = 0.0;
    for i in 0..flux.len() {
        if i > 0 {
            acc += 0.5 * (series.times[i] - series.times[i - 1]) * (flux[i] + flux[i - 1]);
        }
        gain.push(acc);
    }
    Ok(gain)
}

/// Every diagnostic at every grid time. `info_gain` is filled for
/// Jones-Hore series only.
pub fn diagnostic_rows(series: &RhoSeries, space: &SpinSpace, k_s: f64) -> Result<Vec<DiagnosticRow>> {
    let gain = match series.theory {
        TheoryKind::JonesHore => Some(information_gain(series, space, k_s)?),
        TheoryKind::Kominis => None,
    };
    series
        .times
        .iter()
        .zip(&series.states)
        .enumerate()
        .map(|(i, (&t, rho))| {
            let obs = basic_observables(rho, space)?;
            let norm = normalized_observables(rho, space)?;
            let svn = match rho.normalized() {
                Some(nr) if norm.is_some() => Some(von_neumann_entropy(&nr).map_err(|e| at_time(e, t))?),
                _ => None,
            };
            let p_s = norm.map(|n| n.qs_norm);
            let s_i = p_s.map(binary_information).transpose().map_err(|e| at_time(e, t))?;
            Ok(DiagnosticRow {
                t,
                qs: obs.qs,
                qt: obs.qt,
                trace: obs.trace,
                purity: obs.purity,
                qs_norm: norm.map(|n| n.qs_norm),
                qt_norm: norm.map(|n| n.qt_norm),
                purity_norm: norm.map(|n| n.purity_norm),
                svn,
                p_s,
                s_i,
                info_gain: gain.as_ref().map(|g| g[i]),
            })
        })
        .collect()
}

fn at_time(err: Error, time: f64) -> Error {
    match err {
        Error::Numeric { reason, .. } => Error::Numeric { time, reason },
        other => Error::Numeric { time, reason: other.to_string() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::jh_closed_form;
    use crate::spinhilbert::{coherent_st_state, st_space};
    use proptest::prelude::*;

    #[test]
    fn basic_examples() {
        let s = st_space();
        let psi = coherent_st_state(&s).unwrap().density_matrix();
        let o = basic_observables(&psi, &s).unwrap();
        assert!((o.qs - 0.5).abs() < 1e-15 && (o.qt - 0.5).abs() < 1e-15);
        assert!((o.trace - 1.0).abs() < 1e-15 && (o.purity - 1.0).abs() < 1e-15);

        let late = basic_observables(&jh_closed_form(60.0, 1.0), &s).unwrap();
        assert!(late.qs.abs() < 1e-20 && late.qt == 0.5 && (late.trace - 0.5).abs() < 1e-20);
        assert!((late.purity - 0.25).abs() < 1e-20);

        let mixed = DensityMatrix::from_real(2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        let o = basic_observables(&mixed, &s).unwrap();
        assert_eq!((o.qs, o.qt, o.trace, o.purity), (0.5, 0.5, 1.0, 0.5));
    }

    #[test]
    fn normalized_examples() {
        let s = st_space();
        let late = normalized_observables(&jh_closed_form(60.0, 1.0), &s).unwrap().unwrap();
        assert!(late.qs_norm.abs() < 1e-20);
        assert!((late.qt_norm - 1.0).abs() < 1e-15 && (late.purity_norm - 1.0).abs() < 1e-15);

        let dip = normalized_observables(&jh_closed_form(3f64.ln(), 1.0), &s).unwrap().unwrap();
        assert!((dip.purity_norm - 0.75).abs() < 1e-14);

        let tiny = DensityMatrix::from_real(2, &[1e-7, 0.0, 0.0, 0.0]).unwrap();
        assert!(normalized_observables(&tiny, &s).unwrap().is_none());
    }

    #[test]
    fn entropy_examples() {
        let pure = coherent_st_state(&st_space()).unwrap().density_matrix();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-14);
        let mixed = DensityMatrix::from_real(2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((von_neumann_entropy(&mixed).unwrap() - 2f64.ln()).abs() < 1e-15);
        // Eigenvalues (2 ± √2)/4; reference 0.41649553069968745 (mpmath).
        let nr = jh_closed_form(3f64.ln(), 1.0).normalized().unwrap();
        assert!((von_neumann_entropy(&nr).unwrap() - 0.416_495_530_699_687_4).abs() < 1e-13);
        let bad = DensityMatrix::from_real(2, &[1.1, 0.0, 0.0, -0.1]).unwrap();
        assert!(von_neumann_entropy(&bad).is_err());
        let slightly = DensityMatrix::from_real(2, &[1.0 + 5e-10, 0.0, 0.0, -5e-10]).unwrap();
        assert!(von_neumann_entropy(&slightly).unwrap().abs() < 1e-8);
    }

    #[test]
    fn binary_information_examples() {
        assert!((binary_information(0.5).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(binary_information(0.0).unwrap(), 0.0);
        assert_eq!(binary_information(1.0).unwrap(), 0.0);
        // Reference 0.56233514461880835 (mpmath).
        assert!((binary_information(0.25).unwrap() - 0.562_335_144_618_808_4).abs() < 1e-15);
        assert!(binary_information(1.1).is_err());
        assert!(binary_information(-0.01).is_err());
    }

    proptest! {
        #[test]
        fn binary_information_symmetric(p in 0.0f64..=1.0) {
            let a = binary_information(p).unwrap();
            let b = binary_information(1.0 - p).unwrap();
            prop_assert!((a - b).abs() <= 1e-15);
            prop_assert!(a <= 2f64.ln() + 1e-15);
        }

        #[test]
        fn projector_expectations_sum_to_trace(a in 0.0f64..1.0, b in 0.0f64..1.0, re in -1.0f64..1.0, im in -1.0f64..1.0) {
            use crate::spinhilbert::{CMatrix, C64};
            let s = st_space();
            let z = C64::new(re, im) * (a * b).sqrt();
            let m = CMatrix::from_row_slice(2, 2, &[C64::new(a, 0.0), z, z.conj(), C64::new(b, 0.0)]);
            let rho = DensityMatrix::new(m).unwrap();
            let o = basic_observables(&rho, &s).unwrap();
            prop_assert!((o.qs + o.qt - o.trace).abs() <= 1e-9);
        }

        #[test]
        fn purity_one_iff_entropy_zero(theta in 0.0f64..1.0, mix in 0.0f64..1.0) {
            // ρ = (1 − mix)|ψ⟩⟨ψ| + mix·I/2, |ψ⟩ = (cos θ, sin θ)
            let (c, s) = (theta.cos(), theta.sin());
            let rho = DensityMatrix::from_real(2, &[
                (1.0 - mix) * c * c + mix / 2.0, (1.0 - mix) * c * s,
                (1.0 - mix) * c * s, (1.0 - mix) * s * s + mix / 2.0,
            ]).unwrap();
            let pure = (rho.purity() - 1.0).abs() <= 1e-6;
            let zero_entropy = von_neumann_entropy(&rho).unwrap() <= 1e-6;
            prop_assert!(pure || !zero_entropy);
            if mix == 0.0 {
                prop_assert!(pure && zero_entropy);
            }
        }
    }

    #[test]
    fn information_gain_rejects_kominis() {
        let series = RhoSeries {
            theory: TheoryKind::Kominis,
            times: vec![0.0],
            states: vec![jh_closed_form(0.0, 1.0)],
            max_hermiticity_correction: 0.0,
        };
        assert!(matches!(information_gain(&series, &st_space(), 1.0), Err(Error::NotJonesHore)));
    }

    #[test]
    fn information_gain_on_closed_form() {
        let dt = 1e-3;
        let times: Vec<f64> = (0..=30_000).map(|i| i as f64 * dt).collect();
        let series = RhoSeries {
            theory: TheoryKind::JonesHore,
            states: times.iter().map(|&t| jh_closed_form(t, 1.0)).collect(),
            times,
            max_hermiticity_correction: 0.0,
        };
        let gain = information_gain(&series, &st_space(), 1.0).unwrap();
        assert_eq!(gain[0], 0.0);
        assert!(gain.windows(2).all(|w| w[1] >= w[0]));
        assert!((gain.last().unwrap() - crate::oracle::information_gain_limit()).abs() < 1e-6);
        // Cauchy tail beyond t = 20.
        assert!(gain.last().unwrap() - gain[20_000] <= 1e-4);
    }
}
