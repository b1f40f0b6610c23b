//! Hilbert spaces, singlet/triplet projectors, Hamiltonians and states.
//!
//! Every matrix is dense and expressed in a basis where the electron
//! singlet comes first. For the full radical-pair space the electron
//! ordering is `{S, T+, T0, T-}` and nuclear spins are appended as the
//! minor (fastest-varying) tensor factor, so `Q_S` is the top-left block.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Entrywise tolerance for projector algebra.
pub const PROJECTOR_TOL: f64 = 1e-12;
/// Tolerance on `‖ρ − ρ†‖` for a valid density matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue tolerated before a density matrix counts as non-positive.
pub const POSITIVITY_TOL: f64 = -1e-9;
/// Slack on `Tr{ρ} ≤ 1`.
pub const TRACE_TOL: f64 = 1e-9;

/// Hilbert-space descriptor with the singlet/triplet projector pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSpace {
    pub dim: usize,
    pub q_singlet: CMatrix,
    pub q_triplet: CMatrix,
    pub labels: Vec<String>,
}

impl SpinSpace {
    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dim, self.dim)
    }

    pub fn is_st_space(&self) -> bool {
        self.dim == 2
    }

    fn require_st(&self) -> Result<()> {
        if self.is_st_space() {
            Ok(())
        } else {
            Err(Error::NotStSpace(self.dim))
        }
    }

    /// Basis vector `index` of this space.
    pub fn basis_state(&self, index: usize) -> Result<PureState> {
        if index >= self.dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dim {}",
                self.dim
            )));
        }
        let mut vec = CVector::zeros(self.dim);
        vec[index] = C64::new(1.0, 0.0);
        Ok(PureState { vec, alive: true })
    }

    /// Largest entrywise violation of idempotency, orthogonality and completeness.
    pub fn projector_defect(&self) -> f64 {
        let qs = &self.q_singlet;
        let qt = &self.q_triplet;
        [
            max_abs(&(qs * qs - qs)),
            max_abs(&(qt * qt - qt)),
            max_abs(&(qs * qt)),
            max_abs(&(qs + qt - self.identity())),
            max_abs(&(qs - qs.adjoint())),
            max_abs(&(qt - qt.adjoint())),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// The reduced two-state `{|S⟩, |T⟩}` space.
pub fn st_space() -> SpinSpace {
    let mut q_singlet = CMatrix::zeros(2, 2);
    q_singlet[(0, 0)] = C64::new(1.0, 0.0);
    let mut q_triplet = CMatrix::zeros(2, 2);
    q_triplet[(1, 1)] = C64::new(1.0, 0.0);
    SpinSpace {
        dim: 2,
        q_singlet,
        q_triplet,
        labels: vec!["S".into(), "T".into()],
    }
}

/// Two electron spins plus nuclei with the given multiplicities (2I+1 each).
pub fn radical_pair_space(nuclear_multiplicities: &[usize]) -> Result<SpinSpace> {
    if nuclear_multiplicities.contains(&0) {
        return Err(Error::ZeroMultiplicity);
    }
    let nuclear_dim: usize = nuclear_multiplicities.iter().product();
    let dim = 4 * nuclear_dim;

    let mut q_singlet = CMatrix::zeros(dim, dim);
    for i in 0..nuclear_dim {
        q_singlet[(i, i)] = C64::new(1.0, 0.0);
    }
    let q_triplet = CMatrix::identity(dim, dim) - &q_singlet;

    let electron = ["S", "T+", "T0", "T-"];
    let labels = if nuclear_multiplicities.is_empty() {
        electron.iter().map(|s| s.to_string()).collect()
    } else {
        electron
            .iter()
            .flat_map(|e| (0..nuclear_dim).map(move |n| format!("{e}|{n}")))
            .collect()
    };

    Ok(SpinSpace {
        dim,
        q_singlet,
        q_triplet,
        labels,
    })
}

/// Unitary whose columns are `|S⟩, |T+⟩, |T0⟩, |T-⟩` written in the
/// two-electron product basis `{↑↑, ↑↓, ↓↑, ↓↓}`.
///
/// Use `U† H U` to bring a product-basis Hamiltonian into the basis of
/// [`radical_pair_space`].
pub fn product_to_st_basis() -> CMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let re = |x: f64| C64::new(x, 0.0);
    #[rustfmt::skip]
    let cols = [
        re(0.0), re(r),  re(-r), re(0.0), // S
        re(1.0), re(0.0), re(0.0), re(0.0), // T+
        re(0.0), re(r),  re(r),  re(0.0), // T0
        re(0.0), re(0.0), re(0.0), re(1.0), // T-
    ];
    CMatrix::from_column_slice(4, 4, &cols)
}

/// Hermitian generator of the coherent dynamics, in units of `k_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian(CMatrix);

impl Hamiltonian {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::ShapeMismatch {
                expected: mat.nrows(),
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let defect = max_abs(&(&mat - mat.adjoint()));
        if defect > PROJECTOR_TOL {
            return Err(Error::InvalidArgument(format!(
                "Hamiltonian is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self(mat))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn mat(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == C64::new(0.0, 0.0))
    }
}

/// `H = (ω/2)(|S⟩⟨T| + |T⟩⟨S|)` on the two-state space.
pub fn mixing_hamiltonian(space: &SpinSpace, omega: f64) -> Result<Hamiltonian> {
    space.require_st()?;
    let mut mat = CMatrix::zeros(2, 2);
    mat[(0, 1)] = C64::new(omega / 2.0, 0.0);
    mat[(1, 0)] = C64::new(omega / 2.0, 0.0);
    Ok(Hamiltonian(mat))
}

/// A single molecule's spin state. `alive == false` once it has recombined.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub vec: CVector,
    pub alive: bool,
}

impl PureState {
    /// Normalizes `vec`; rejects the zero vector.
    pub fn from_vec(vec: CVector) -> Result<Self> {
        let norm = vec.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("state vector has zero norm".into()));
        }
        Ok(Self {
            vec: vec / C64::new(norm, 0.0),
            alive: true,
        })
    }

    pub fn dead(dim: usize) -> Self {
        Self {
            vec: CVector::zeros(dim),
            alive: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    /// `⟨ψ|op|ψ⟩`, zero for a dead state.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        if !self.alive {
            return 0.0;
        }
        quadratic_form(op, &self.vec)
    }

    /// `|ψ⟩⟨ψ|`, or the zero matrix once recombined.
    pub fn density_matrix(&self) -> DensityMatrix {
        if !self.alive {
            return DensityMatrix(CMatrix::zeros(self.dim(), self.dim()));
        }
        DensityMatrix(&self.vec * self.vec.adjoint())
    }
}

/// `(|S⟩ + |T⟩)/√2`.
pub fn coherent_st_state(space: &SpinSpace) -> Result<PureState> {
    space.require_st()?;
    let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Ok(PureState {
        vec: CVector::from_vec(vec![r, r]),
        alive: true,
    })
}

/// Spin density matrix of an ensemble. The trace is the surviving fraction
/// and may be below one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Wraps a square matrix without checking the physical invariants; see
    /// [`DensityMatrix::check`].
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::ShapeMismatch {
                expected: mat.nrows(),
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        Ok(Self(mat))
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self(CMatrix::from_row_iterator(
            dim,
            dim,
            entries.iter().map(|&x| C64::new(x, 0.0)),
        )))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn mat(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr{ρ²}`.
    pub fn purity(&self) -> f64 {
        // Tr{ρ²} = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ.
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.0[(i, j)] * self.0[(j, i)]).re;
            }
        }
        acc
    }

    /// `ρ / Tr{ρ}`.
    pub fn normalized(&self) -> Option<DensityMatrix> {
        let tr = self.trace();
        (tr > 0.0).then(|| DensityMatrix(&self.0 / C64::new(tr, 0.0)))
    }

    /// Frobenius norm of `ρ − ρ†` (an upper bound on the operator norm).
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint()).norm()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Checks Hermiticity, positivity and `0 ≤ Tr{ρ} ≤ 1`.
    pub fn check(&self) -> std::result::Result<(), String> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(format!("hermiticity defect {defect:e}"));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < POSITIVITY_TOL {
            return Err(format!("negative eigenvalue {min_eig:e}"));
        }
        let tr = self.trace();
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) {
            return Err(format!("trace {tr} outside [0, 1]"));
        }
        Ok(())
    }
}

/// `Re Tr{op·ρ}`; rejects a non-negligible imaginary part.
pub fn expectation(op: &CMatrix, rho: &DensityMatrix) -> Result<f64> {
    check_shape(op, rho.dim())?;
    let n = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += op[(i, j)] * rho.0[(j, i)];
        }
    }
    if acc.im.abs() > 1e-10 * acc.re.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "expectation has imaginary residue {:e}; operator not Hermitian?",
            acc.im
        )));
    }
    Ok(acc.re)
}

pub(crate) fn check_shape(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::ShapeMismatch {
            expected: dim,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `⟨v|op|v⟩`, real part.
pub(crate) fn quadratic_form(op: &CMatrix, v: &CVector) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..n {
            row += op[(i, j)] * v[j];
        }
        acc += (v[i].conj() * row).re;
    }
    acc
}

/// Ascending eigenvalues of `(m + m†)/2`.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut eig: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn st_space_projectors() {
        let s = st_space();
        assert_eq!(s.dim, 2);
        assert_eq!(s.q_singlet, CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]));
        assert_eq!(&s.q_singlet + &s.q_triplet, s.identity());
        assert_eq!(&s.q_singlet * &s.q_triplet, CMatrix::zeros(2, 2));
        assert_eq!(s.labels, ["S", "T"]);
        assert!(s.projector_defect() <= PROJECTOR_TOL);
    }

    #[test]
    fn radical_pair_ranks() {
        let s = radical_pair_space(&[]).unwrap();
        assert_eq!(s.dim, 4);
        assert_eq!(s.q_singlet.trace().re, 1.0);
        assert_eq!(s.q_triplet.trace().re, 3.0);
        assert_eq!(s.labels, ["S", "T+", "T0", "T-"]);

        let s = radical_pair_space(&[2]).unwrap();
        assert_eq!(s.dim, 8);
        assert_eq!(s.q_singlet.trace().re, 2.0);

        for mult in [vec![3], vec![2, 2], vec![3, 2, 1]] {
            let s = radical_pair_space(&mult).unwrap();
            assert_eq!(s.q_singlet.trace().re + s.q_triplet.trace().re, s.dim as f64);
            assert!(s.projector_defect() <= PROJECTOR_TOL);
        }
    }

    #[test]
    fn zero_multiplicity_rejected() {
        assert!(matches!(radical_pair_space(&[2, 0]), Err(Error::ZeroMultiplicity)));
    }

    #[test]
    fn singlet_projector_matches_product_basis() {
        // |S⟩ = (|↑↓⟩ − |↓↑⟩)/√2 in {↑↑, ↑↓, ↓↑, ↓↓}
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = CVector::from_vec(vec![c(0.0), c(r), c(-r), c(0.0)]);
        let q_product = &s * s.adjoint();
        let u = product_to_st_basis();
        assert!(max_abs(&(u.adjoint() * &u - CMatrix::identity(4, 4))) < 1e-15);
        let q_st = u.adjoint() * q_product * &u;
        let space = radical_pair_space(&[]).unwrap();
        assert!(max_abs(&(q_st - &space.q_singlet)) < 1e-15);
    }

    #[test]
    fn mixing_hamiltonian_entries() {
        let s = st_space();
        assert_eq!(*mixing_hamiltonian(&s, 0.0).unwrap().mat(), CMatrix::zeros(2, 2));
        let h = mixing_hamiltonian(&s, 1.0).unwrap();
        assert_eq!(*h.mat(), CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.5), c(0.5), c(0.0)]));
        let big = radical_pair_space(&[]).unwrap();
        assert!(matches!(mixing_hamiltonian(&big, 1.0), Err(Error::NotStSpace(4))));
    }

    #[test]
    fn coherent_state_observables() {
        let s = st_space();
        let psi = coherent_st_state(&s).unwrap();
        let rho = psi.density_matrix();
        let expected = DensityMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(max_abs(&(rho.mat() - expected.mat())) < 1e-15);
        assert!((expectation(&s.q_singlet, &rho).unwrap() - 0.5).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-15);
        assert!(coherent_st_state(&radical_pair_space(&[]).unwrap()).is_err());
    }

    #[test]
    fn expectation_examples() {
        let s = st_space();
        let singlet = s.basis_state(0).unwrap().density_matrix();
        assert_eq!(expectation(&s.q_singlet, &singlet).unwrap(), 1.0);
        let rho = DensityMatrix::from_real(2, &[0.3, 0.1, 0.1, 0.4]).unwrap();
        assert!((expectation(&s.identity(), &rho).unwrap() - rho.trace()).abs() < 1e-15);
        let wrong = CMatrix::identity(3, 3);
        assert!(matches!(expectation(&wrong, &rho), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(Hamiltonian::new(m).is_err());
    }

    #[test]
    fn dead_state_is_zero() {
        let d = PureState::dead(2);
        assert_eq!(d.density_matrix().trace(), 0.0);
        assert_eq!(d.expectation(&st_space().q_singlet), 0.0);
    }

    fn hermitian(dim: usize, vals: &[f64]) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        let mut k = 0;
        for i in 0..dim {
            m[(i, i)] = c(vals[k]);
            k += 1;
            for j in (i + 1)..dim {
                let z = C64::new(vals[k], vals[k + 1]);
                k += 2;
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    proptest! {
        #[test]
        fn expectation_is_bilinear(
            a in prop::collection::vec(-1.0f64..1.0, 16),
            b in prop::collection::vec(-1.0f64..1.0, 16),
            r in prop::collection::vec(-1.0f64..1.0, 16),
            s in prop::collection::vec(-1.0f64..1.0, 16),
            x in -2.0f64..2.0,
            y in -2.0f64..2.0,
        ) {
            let (a, b) = (hermitian(4, &a), hermitian(4, &b));
            let (r, s) = (hermitian(4, &r), hermitian(4, &s));
            let rho_r = DensityMatrix(r.clone());
            let rho_s = DensityMatrix(s.clone());
            let comb_op = &a * c(x) + &b * c(y);
            let lhs = expectation(&comb_op, &rho_r).unwrap();
            let rhs = x * expectation(&a, &rho_r).unwrap() + y * expectation(&b, &rho_r).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10);
            let comb_rho = DensityMatrix(&r * c(x) + &s * c(y));
            let lhs = expectation(&a, &comb_rho).unwrap();
            let rhs = x * expectation(&a, &rho_r).unwrap() + y * expectation(&a, &rho_s).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10);
        }
    }
}
