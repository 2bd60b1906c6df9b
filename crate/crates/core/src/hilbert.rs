//! Composite Hilbert-space layouts and dense quantum states.
//!
//! A layout is an ordered list of subsystems. Subsystem 0 is the
//! slowest-varying index of the dense amplitude vector (row-major ordering
//! over the subsystem list). Protocol layouts carry exactly one ancilla qubit
//! at subsystem index 0, with |e⟩ ↦ level 0 and |g⟩ ↦ level 1; system layouts
//! carry none, which is what keeps the oracle structurally unable to touch
//! the ancilla.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Tolerance for state-vector normalization checks.
pub const NORM_TOL: f64 = 1e-12;
/// Hermiticity tolerance for observables passed to `expectation`.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Agreement required between the two ancilla-coherence routes.
pub const COHERENCE_XCHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsystemKind {
    AncillaQubit,
    Qubit,
    BosonMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subsystem {
    pub kind: SubsystemKind,
    pub dim: usize,
}

impl Subsystem {
    pub fn qubit() -> Self {
        Subsystem {
            kind: SubsystemKind::Qubit,
            dim: 2,
        }
    }

    pub fn boson_mode(cutoff: usize) -> Self {
        Subsystem {
            kind: SubsystemKind::BosonMode,
            dim: cutoff,
        }
    }
}

/// Ordered list of subsystems with at most one ancilla, fixed at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertLayout {
    subsystems: Vec<Subsystem>,
    total_dim: usize,
}

impl HilbertLayout {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::InvalidGrid {
                reason: "layout needs at least one subsystem".into(),
            });
        }
        for (index, sub) in subsystems.iter().enumerate() {
            let min_dim = 2;
            if sub.dim < min_dim {
                return Err(Error::LevelOutOfRange {
                    subsystem: index,
                    level: sub.dim,
                    dim: min_dim,
                });
            }
            if matches!(sub.kind, SubsystemKind::AncillaQubit) {
                if index != 0 {
                    return Err(Error::InvalidGrid {
                        reason: "ancilla must be subsystem 0".into(),
                    });
                }
                if sub.dim != 2 {
                    return Err(Error::DimensionMismatch {
                        expected: 2,
                        got: sub.dim,
                    });
                }
            }
            if matches!(sub.kind, SubsystemKind::Qubit | SubsystemKind::AncillaQubit) && sub.dim != 2
            {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    got: sub.dim,
                });
            }
        }
        let total_dim = subsystems.iter().map(|s| s.dim).product();
        Ok(HilbertLayout {
            subsystems,
            total_dim,
        })
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn has_ancilla(&self) -> bool {
        matches!(self.subsystems[0].kind, SubsystemKind::AncillaQubit)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    /// Stride of a subsystem index in the row-major amplitude ordering.
    pub fn stride(&self, index: usize) -> usize {
        self.subsystems[index + 1..].iter().map(|s| s.dim).product()
    }

    /// Flat index of a basis state given per-subsystem levels.
    pub fn basis_index(&self, occupation: &[usize]) -> Result<usize> {
        if occupation.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch {
                expected: self.subsystems.len(),
                got: occupation.len(),
            });
        }
        let mut index = 0;
        for (subsystem, (&level, sub)) in occupation.iter().zip(&self.subsystems).enumerate() {
            if level >= sub.dim {
                return Err(Error::LevelOutOfRange {
                    subsystem,
                    level,
                    dim: sub.dim,
                });
            }
            index = index * sub.dim + level;
        }
        Ok(index)
    }

    /// Embed site-local operator matrices, identity on unmentioned subsystems.
    pub fn embed_operator(&self, ops: &[(usize, &CMatrix)]) -> Result<CMatrix> {
        linalg::embed(&self.dims(), ops)
    }
}

/// Ancilla-free layout for system states, Hamiltonians, and the oracle.
///
/// Qubits come first (sites `0..qubits`), then bosonic modes in declaration
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemLayout {
    layout: HilbertLayout,
    qubits: usize,
    mode_cutoffs: Vec<usize>,
}

impl SystemLayout {
    pub fn new(qubits: usize, mode_cutoffs: &[usize]) -> Result<Self> {
        let mut subsystems: Vec<Subsystem> = (0..qubits).map(|_| Subsystem::qubit()).collect();
        for &cutoff in mode_cutoffs {
            subsystems.push(Subsystem::boson_mode(cutoff));
        }
        Ok(SystemLayout {
            layout: HilbertLayout::new(subsystems)?,
            qubits,
            mode_cutoffs: mode_cutoffs.to_vec(),
        })
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn mode_cutoffs(&self) -> &[usize] {
        &self.mode_cutoffs
    }

    pub fn total_dim(&self) -> usize {
        self.layout.total_dim()
    }

    /// Subsystem index of bosonic mode `mode` within this layout.
    pub fn mode_subsystem(&self, mode: usize) -> Result<usize> {
        if mode >= self.mode_cutoffs.len() {
            return Err(Error::SubsystemOutOfRange {
                index: self.qubits + mode,
                count: self.layout.subsystems().len(),
            });
        }
        Ok(self.qubits + mode)
    }

    pub fn embed_operator(&self, ops: &[(usize, &CMatrix)]) -> Result<CMatrix> {
        self.layout.embed_operator(ops)
    }

    /// The corresponding protocol layout: ancilla at subsystem 0, then this
    /// system's subsystems shifted up by one.
    pub fn with_ancilla(&self) -> HilbertLayout {
        let mut subsystems = vec![Subsystem {
            kind: SubsystemKind::AncillaQubit,
            dim: 2,
        }];
        subsystems.extend_from_slice(self.layout.subsystems());
        HilbertLayout::new(subsystems).expect("ancilla extension of a valid layout is valid")
    }
}

/// Dense unit-norm state vector over a layout.
#[derive(Debug, Clone)]
pub struct StateVector {
    layout: HilbertLayout,
    amplitudes: CVector,
}

impl StateVector {
    /// Computational/Fock basis state with the given per-subsystem levels.
    pub fn basis(layout: &HilbertLayout, occupation: &[usize]) -> Result<Self> {
        let index = layout.basis_index(occupation)?;
        let mut amplitudes = CVector::zeros(layout.total_dim());
        amplitudes[index] = linalg::ONE;
        Ok(StateVector {
            layout: layout.clone(),
            amplitudes,
        })
    }

    /// Build from explicit amplitudes, normalizing. Errors on a zero vector
    /// or a length mismatch.
    pub fn from_amplitudes(layout: &HilbertLayout, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if norm < 1e-14 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector {
            layout: layout.clone(),
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Apply a full-dimension unitary in place. The caller guarantees
    /// unitarity; norm preservation is checked in debug builds.
    pub fn apply_unitary(&mut self, u: &CMatrix) -> Result<()> {
        if u.ncols() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                got: u.ncols(),
            });
        }
        self.amplitudes = u * &self.amplitudes;
        debug_assert!((self.norm() - 1.0).abs() < 1e-9, "norm drifted: {}", self.norm());
        Ok(())
    }

    /// Construct from amplitudes already known to be unit-norm, enforcing
    /// the normalization invariant instead of silently rescaling.
    pub(crate) fn from_normalized(layout: &HilbertLayout, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector {
            layout: layout.clone(),
            amplitudes,
        })
    }

    /// ⟨ψ|A|ψ⟩ as a complex number, without Hermiticity checks.
    pub fn expectation_complex(&self, op: &CMatrix) -> Result<C64> {
        if op.ncols() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes.len(),
                got: op.ncols(),
            });
        }
        Ok(self.amplitudes.dotc(&(op * &self.amplitudes)))
    }

    pub fn to_density(&self) -> DensityMatrix {
        let elements = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix {
            layout: self.layout.clone(),
            elements,
        }
    }

    /// Reduced density matrix of a single subsystem.
    pub fn reduced_density(&self, index: usize) -> Result<CMatrix> {
        let count = self.layout.subsystems().len();
        if index >= count {
            return Err(Error::SubsystemOutOfRange { index, count });
        }
        let dim = self.layout.subsystems()[index].dim;
        let stride = self.layout.stride(index);
        let block = dim * stride;
        let total = self.amplitudes.len();
        let mut reduced = CMatrix::zeros(dim, dim);
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                for row in 0..dim {
                    let a = self.amplitudes[base + offset + row * stride];
                    for col in 0..dim {
                        let b = self.amplitudes[base + offset + col * stride];
                        reduced[(row, col)] += a * b.conj();
                    }
                }
            }
        }
        Ok(reduced)
    }
}

/// Dense density matrix over a layout. Validated Hermitian, unit-trace, and
/// positive semidefinite (up to tolerance) at construction; unitary
/// conjugation preserves all three.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    elements: CMatrix,
}

impl DensityMatrix {
    pub fn from_matrix(layout: &HilbertLayout, elements: CMatrix) -> Result<Self> {
        if elements.nrows() != layout.total_dim() || elements.ncols() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                got: elements.nrows(),
            });
        }
        let herm = linalg::hermiticity_deviation(&elements);
        if herm > 1e-12 {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("Hermiticity deviation {herm:.3e}"),
            });
        }
        let trace: C64 = elements.trace();
        if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
            return Err(Error::InvalidDensityMatrix {
                reason: format!("trace {trace}"),
            });
        }
        let eigenvalues = elements.clone().symmetric_eigen().eigenvalues;
        if let Some(min) = eigenvalues.iter().cloned().reduce(f64::min) {
            if min < -1e-10 {
                return Err(Error::InvalidDensityMatrix {
                    reason: format!("negative eigenvalue {min:.3e}"),
                });
            }
        }
        Ok(DensityMatrix {
            layout: layout.clone(),
            elements,
        })
    }

    pub fn pure(state: &StateVector) -> Self {
        state.to_density()
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    /// ρ ← UρU†.
    pub fn conjugate(&mut self, u: &CMatrix) -> Result<()> {
        if u.ncols() != self.elements.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.elements.nrows(),
                got: u.ncols(),
            });
        }
        self.elements = u * &self.elements * u.adjoint();
        Ok(())
    }

    pub fn expectation_complex(&self, op: &CMatrix) -> Result<C64> {
        if op.ncols() != self.elements.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.elements.nrows(),
                got: op.ncols(),
            });
        }
        // Tr(Aρ) without forming the product matrix.
        let mut trace = linalg::ZERO;
        for row in 0..op.nrows() {
            for k in 0..op.ncols() {
                trace += op[(row, k)] * self.elements[(k, row)];
            }
        }
        Ok(trace)
    }

    pub fn reduced_density(&self, index: usize) -> Result<CMatrix> {
        let count = self.layout.subsystems().len();
        if index >= count {
            return Err(Error::SubsystemOutOfRange { index, count });
        }
        let dim = self.layout.subsystems()[index].dim;
        let stride = self.layout.stride(index);
        let block = dim * stride;
        let total = self.layout.total_dim();
        let mut reduced = CMatrix::zeros(dim, dim);
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                for row in 0..dim {
                    for col in 0..dim {
                        reduced[(row, col)] += self.elements
                            [(base + offset + row * stride, base + offset + col * stride)];
                    }
                }
            }
        }
        Ok(reduced)
    }
}

/// A pure or mixed state, so protocol entry points accept either.
#[derive(Debug, Clone)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl State {
    pub fn layout(&self) -> &HilbertLayout {
        match self {
            State::Pure(sv) => sv.layout(),
            State::Mixed(dm) => dm.layout(),
        }
    }

    pub fn apply_unitary(&mut self, u: &CMatrix) -> Result<()> {
        match self {
            State::Pure(sv) => sv.apply_unitary(u),
            State::Mixed(dm) => dm.conjugate(u),
        }
    }

    pub fn expectation_complex(&self, op: &CMatrix) -> Result<C64> {
        match self {
            State::Pure(sv) => sv.expectation_complex(op),
            State::Mixed(dm) => dm.expectation_complex(op),
        }
    }

    pub fn reduced_density(&self, index: usize) -> Result<CMatrix> {
        match self {
            State::Pure(sv) => sv.reduced_density(index),
            State::Mixed(dm) => dm.reduced_density(index),
        }
    }
}

impl From<StateVector> for State {
    fn from(sv: StateVector) -> Self {
        State::Pure(sv)
    }
}

impl From<DensityMatrix> for State {
    fn from(dm: DensityMatrix) -> Self {
        State::Mixed(dm)
    }
}

/// Computational/Fock basis state (`make_state`).
pub fn make_state(layout: &HilbertLayout, occupation: &[usize]) -> Result<StateVector> {
    StateVector::basis(layout, occupation)
}

/// ⟨ψ|A|ψ⟩ or Tr(Aρ) of a Hermitian observable. The imaginary residue is
/// checked against `HERMITICITY_TOL` and discarded.
pub fn expectation(state: &State, op: &CMatrix) -> Result<f64> {
    linalg::check_hermitian(op, HERMITICITY_TOL)?;
    let value = state.expectation_complex(op)?;
    if value.im.abs() > HERMITICITY_TOL {
        return Err(Error::CrossCheckFailed {
            reason: format!(
                "expectation of Hermitian operator has imaginary residue {:.3e}",
                value.im
            ),
        });
    }
    Ok(value.re)
}

/// Ancilla coherence Tr(|e⟩⟨g| ρ) = ⟨g|ρ_anc|e⟩.
///
/// Computed two ways — directly from the amplitudes/elements and as
/// ½(⟨σx⟩ + i⟨σy⟩) on the reduced ancilla state — and cross-checked.
pub fn ancilla_coherence(state: &State) -> Result<C64> {
    let layout = state.layout();
    if !layout.has_ancilla() {
        return Err(Error::MissingAncilla);
    }
    let reduced = state.reduced_density(0)?;
    // |e⟩ = level 0, |g⟩ = level 1: Tr(|e⟩⟨g| ρ) = ρ_anc[g, e].
    let direct = reduced[(1, 0)];
    let sx = reduced[(0, 1)] + reduced[(1, 0)];
    let sy = (reduced[(0, 1)] - reduced[(1, 0)]) * linalg::I;
    let via_pauli = (sx + linalg::I * sy) * C64::new(0.5, 0.0);
    let disagreement = (direct - via_pauli).norm();
    if disagreement > COHERENCE_XCHECK_TOL {
        return Err(Error::CrossCheckFailed {
            reason: format!("ancilla coherence routes disagree by {disagreement:.3e}"),
        });
    }
    Ok(direct)
}

/// Population of the top two Fock levels, maximized over bosonic modes.
/// Zero for layouts without modes.
pub fn fock_leakage(state: &State) -> Result<f64> {
    let layout = state.layout().clone();
    let mut worst: f64 = 0.0;
    for (index, sub) in layout.subsystems().iter().enumerate() {
        if !matches!(sub.kind, SubsystemKind::BosonMode) {
            continue;
        }
        let reduced = state.reduced_density(index)?;
        let top = reduced[(sub.dim - 1, sub.dim - 1)].re;
        let next = if sub.dim >= 2 {
            reduced[(sub.dim - 2, sub.dim - 2)].re
        } else {
            0.0
        };
        worst = worst.max(top + next);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, ONE, ZERO};
    use approx::assert_abs_diff_eq;

    fn sx() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    fn sy() -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[ZERO, -linalg::I, linalg::I, ZERO],
        )
    }

    fn sz() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    fn qubit_layout(n: usize) -> HilbertLayout {
        SystemLayout::new(n, &[]).unwrap().layout().clone()
    }

    #[test]
    fn basis_state_single_qubit() {
        let layout = qubit_layout(1);
        let state = make_state(&layout, &[0]).unwrap();
        assert_eq!(state.amplitudes()[0], ONE);
        assert_eq!(state.amplitudes()[1], ZERO);
    }

    #[test]
    fn basis_ordering_is_row_major() {
        // occupation [1, 0] on two qubits → index 2.
        let layout = qubit_layout(2);
        let state = make_state(&layout, &[1, 0]).unwrap();
        assert_eq!(state.amplitudes()[2], ONE);
        assert_eq!(state.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn basis_state_fock_level() {
        let layout = SystemLayout::new(0, &[3]).unwrap().layout().clone();
        let state = make_state(&layout, &[2]).unwrap();
        assert_eq!(state.amplitudes()[2], ONE);
    }

    #[test]
    fn basis_state_rejects_out_of_range_level() {
        let layout = qubit_layout(1);
        let err = make_state(&layout, &[2]).unwrap_err();
        assert!(matches!(err, Error::LevelOutOfRange { .. }));
    }

    #[test]
    fn expectation_of_sz_on_ground() {
        let layout = qubit_layout(1);
        let state = State::Pure(make_state(&layout, &[0]).unwrap());
        assert_abs_diff_eq!(expectation(&state, &sz()).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn expectation_of_sx_on_plus() {
        let layout = qubit_layout(1);
        let amps = CVector::from_vec(vec![ONE, ONE]);
        let state = State::Pure(StateVector::from_amplitudes(&layout, amps).unwrap());
        assert_abs_diff_eq!(expectation(&state, &sx()).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn expectation_thermal_beta_limit() {
        // ρ ∝ e^{−βσz} at large β concentrates on the σz = −1 level.
        let layout = qubit_layout(1);
        let beta = 60.0f64;
        let p0 = (-beta).exp() / ((-beta).exp() + beta.exp());
        let p1 = 1.0 - p0;
        let mut elements = CMatrix::zeros(2, 2);
        elements[(0, 0)] = C64::new(p0, 0.0);
        elements[(1, 1)] = C64::new(p1, 0.0);
        let rho = DensityMatrix::from_matrix(&layout, elements).unwrap();
        let value = expectation(&State::Mixed(rho), &sz()).unwrap();
        assert_abs_diff_eq!(value, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let layout = qubit_layout(1);
        let state = State::Pure(make_state(&layout, &[0]).unwrap());
        let mut op = sx();
        op[(0, 1)] = C64::new(0.0, 0.5);
        assert!(matches!(
            expectation(&state, &op),
            Err(Error::NonHermitian { .. })
        ));
    }

    fn ancilla_system_layout() -> HilbertLayout {
        SystemLayout::new(1, &[]).unwrap().with_ancilla()
    }

    #[test]
    fn coherence_of_balanced_ancilla() {
        let layout = ancilla_system_layout();
        let amps = CVector::from_vec(vec![ONE, ZERO, ONE, ZERO]);
        let state = State::Pure(StateVector::from_amplitudes(&layout, amps).unwrap());
        let c = ancilla_coherence(&state).unwrap();
        assert_abs_diff_eq!(c.re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn coherence_of_pure_excited_ancilla_is_zero() {
        let layout = ancilla_system_layout();
        let state = State::Pure(make_state(&layout, &[0, 1]).unwrap());
        let c = ancilla_coherence(&state).unwrap();
        assert_abs_diff_eq!(c.norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn coherence_with_relative_phase() {
        // Φ = (|e⟩|0⟩ − i|g⟩|0⟩)/√2 → ⟨g|ρ|e⟩ = −i/2.
        let layout = ancilla_system_layout();
        let amps = CVector::from_vec(vec![ONE, ZERO, -linalg::I, ZERO]);
        let state = State::Pure(StateVector::from_amplitudes(&layout, amps).unwrap());
        let c = ancilla_coherence(&state).unwrap();
        assert_abs_diff_eq!(c.re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.im, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn coherence_requires_ancilla() {
        let layout = qubit_layout(1);
        let state = State::Pure(make_state(&layout, &[0]).unwrap());
        assert!(matches!(
            ancilla_coherence(&state),
            Err(Error::MissingAncilla)
        ));
    }

    #[test]
    fn coherence_of_mixed_state_matches_pure() {
        let layout = ancilla_system_layout();
        let amps = CVector::from_vec(vec![ONE, ZERO, linalg::I, ONE]);
        let sv = StateVector::from_amplitudes(&layout, amps).unwrap();
        let pure = ancilla_coherence(&State::Pure(sv.clone())).unwrap();
        let mixed = ancilla_coherence(&State::Mixed(sv.to_density())).unwrap();
        assert!((pure - mixed).norm() < 1e-14);
    }

    #[test]
    fn embed_sigma_x_on_system_qubit() {
        let layout = ancilla_system_layout();
        let full = layout.embed_operator(&[(1, &sx())]).unwrap();
        let expected = kron(&linalg::identity(2), &sx());
        assert!(linalg::max_abs_diff(&full, &expected) < 1e-15);
    }

    #[test]
    fn embed_zz_matches_direct_kron() {
        let layout = qubit_layout(3);
        let full = layout.embed_operator(&[(1, &sz()), (2, &sz())]).unwrap();
        let expected = kron(&kron(&linalg::identity(2), &sz()), &sz());
        assert!(linalg::max_abs_diff(&full, &expected) < 1e-15);
    }

    #[test]
    fn reduced_density_of_bell_pair_is_maximally_mixed() {
        let layout = qubit_layout(2);
        let amps = CVector::from_vec(vec![ONE, ZERO, ZERO, ONE]);
        let state = StateVector::from_amplitudes(&layout, amps).unwrap();
        let reduced = state.reduced_density(0).unwrap();
        assert!(linalg::max_abs_diff(&reduced, &(linalg::identity(2) * C64::new(0.5, 0.0))) < 1e-14);
    }

    #[test]
    fn leakage_counts_top_two_levels() {
        let layout = SystemLayout::new(0, &[4]).unwrap().layout().clone();
        let amps = CVector::from_vec(vec![
            C64::new(0.8f64.sqrt(), 0.0),
            ZERO,
            C64::new(0.1f64.sqrt(), 0.0),
            C64::new(0.1f64.sqrt(), 0.0),
        ]);
        let state = State::Pure(StateVector::from_amplitudes(&layout, amps).unwrap());
        assert_abs_diff_eq!(fock_leakage(&state).unwrap(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn density_matrix_validation_rejects_bad_trace() {
        let layout = qubit_layout(1);
        let elements = linalg::identity(2);
        assert!(matches!(
            DensityMatrix::from_matrix(&layout, elements),
            Err(Error::InvalidDensityMatrix { .. })
        ));
    }

    #[test]
    fn sy_convention() {
        // σy|0⟩ = i|1⟩ under σz|0⟩ = +|0⟩.
        let v = CVector::from_vec(vec![ONE, ZERO]);
        let w = sy() * v;
        assert_eq!(w[1], linalg::I);
    }
}
