//! Hermitian matrix exponentials and their application as gates.

use crate::error::{Error, Result};
use crate::gates::operator::{ControlledGateSpec, Dynamics, Schedule};
use crate::hilbert::{HilbertLayout, State, StateVector};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Hermiticity tolerance accepted by the exponential routines.
pub const EXPM_HERMITICITY_TOL: f64 = 1e-10;

/// Cached eigendecomposition of a Hermitian matrix, so exponentials at many
/// angles or times reuse one factorization.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Result<Self> {
        linalg::check_hermitian(h, EXPM_HERMITICITY_TOL)?;
        // Symmetrize so roundoff in the input cannot leak into the factorization.
        let symmetrized = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eigen = symmetrized.symmetric_eigen();
        Ok(HermitianEigen {
            eigenvalues: eigen.eigenvalues.iter().copied().collect(),
            eigenvectors: eigen.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Dense exp(−iHt).
    pub fn exponential(&self, t: f64) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (col, &e) in self.eigenvalues.iter().enumerate() {
            let phase = (-linalg::I * e * t).exp();
            for row in 0..scaled.nrows() {
                scaled[(row, col)] *= phase;
            }
        }
        &scaled * self.eigenvectors.adjoint()
    }

    /// exp(−iHt)·v without forming the dense exponential.
    pub fn apply_exponential(&self, t: f64, v: &CVector) -> CVector {
        let mut coords = self.eigenvectors.adjoint() * v;
        for (k, c) in coords.iter_mut().enumerate() {
            *c *= (-linalg::I * self.eigenvalues[k] * t).exp();
        }
        &self.eigenvectors * coords
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

/// exp(−iHt) of a Hermitian matrix via eigendecomposition.
pub fn matrix_exponential(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(HermitianEigen::new(h)?.exponential(t))
}

/// The controlled gate exp(−i·angle·|g⟩⟨g| ⊗ O) over a protocol layout:
/// identity on the |e⟩ block, exp(−i·angle·O) on the |g⟩ block.
pub fn controlled_gate(layout: &HilbertLayout, spec: &ControlledGateSpec) -> Result<CMatrix> {
    if !layout.has_ancilla() {
        return Err(Error::MissingAncilla);
    }
    if !spec.generator.is_hermitian() {
        return Err(Error::NonHermitianOperator {
            role: "a controlled-gate generator",
        });
    }
    let full_dim = layout.total_dim();
    let system_dim = full_dim / 2;
    let generator = spec.generator.matrix_in(layout)?;
    // The embedded generator is I₂ ⊗ O_sys; its lower-right block is O_sys.
    let system_block = generator.view((system_dim, system_dim), (system_dim, system_dim));
    let exp_block = HermitianEigen::new(&system_block.into())?.exponential(spec.angle);
    let mut gate = CMatrix::identity(full_dim, full_dim);
    gate.view_mut((system_dim, system_dim), (system_dim, system_dim))
        .copy_from(&exp_block);
    Ok(gate)
}

/// Apply the segment exponentials of a schedule to a state in order. The
/// Hamiltonians are system operators; on a protocol layout they act
/// identically on both ancilla branches.
pub fn evolve(state: &mut State, schedule: &Schedule) -> Result<()> {
    let layout = state.layout().clone();
    for (hamiltonian, duration) in schedule.segments() {
        let h = hamiltonian.matrix_in(&layout)?;
        let u = matrix_exponential(&h, *duration)?;
        state.apply_unitary(&u)?;
    }
    Ok(())
}

/// Dense evolution operator U(to; from) for the given dynamics over a layout.
pub fn evolution_operator(
    dynamics: &Dynamics,
    layout: &HilbertLayout,
    from: f64,
    to: f64,
) -> Result<CMatrix> {
    let mut u = linalg::identity(layout.total_dim());
    for (hamiltonian, duration) in dynamics.segments_between(from, to)? {
        let h = hamiltonian.matrix_in(layout)?;
        u = matrix_exponential(&h, duration)? * u;
    }
    Ok(u)
}

/// Convenience wrapper for evolving a pure state under a single Hamiltonian.
pub fn evolve_state_vector(
    state: &StateVector,
    hamiltonian: &CMatrix,
    t: f64,
) -> Result<StateVector> {
    let mut out = state.clone();
    let u = matrix_exponential(hamiltonian, t)?;
    out.apply_unitary(&u)?;
    Ok(out)
}
