//! Brute-force ground truth, independent of the protocol machinery.
//!
//! Everything here works in the Heisenberg picture on ancilla-free system
//! layouts: operators are conjugated by exact evolution matrices and
//! multiplied out directly. Evolution matrices come from a local cyclic
//! Jacobi eigensolver rather than the gates module's factorization, so the
//! two paths share nothing but the Kronecker embedding.

use crate::error::{Error, Result};
use crate::gates::{Dynamics, LadderKind};
use crate::hilbert::{DensityMatrix, HilbertLayout, State, StateVector, SystemLayout};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Cyclic Jacobi eigendecomposition of a complex Hermitian matrix.
///
/// Returns (eigenvalues, eigenvector columns). Accuracy is limited by the
/// off-diagonal sweep threshold; at the desk scales used here it reaches
/// ~1e-13 relative error, which is what the oracle tolerances assume.
pub fn jacobi_hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    linalg::check_hermitian(h, 1e-10)?;
    let n = h.nrows();
    let mut a = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut v = linalg::identity(n);
    let scale = linalg::max_abs(&a).max(1.0);
    let threshold = 1e-15 * scale;
    let max_sweeps = 64;

    for _sweep in 0..max_sweeps {
        let mut largest: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                largest = largest.max(a[(p, q)].norm());
            }
        }
        if largest <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= threshold {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let magnitude = apq.norm();
                let phase = apq / C64::new(magnitude, 0.0);
                // Rotation angle from the real 2×2 problem after absorbing
                // the phase of the off-diagonal element.
                let tau = (app - aqq) / (2.0 * magnitude);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_phase = phase * C64::new(s, 0.0);

                // Columns p and q of A and V: right-multiply by J with
                // J[p,p]=c, J[q,q]=c, J[p,q]=−s·e^{iθ}, J[q,p]=s·e^{−iθ}.
                for row in 0..n {
                    let col_p = a[(row, p)];
                    let col_q = a[(row, q)];
                    a[(row, p)] = col_p * C64::new(c, 0.0) + col_q * s_phase.conj();
                    a[(row, q)] = col_q * C64::new(c, 0.0) - col_p * s_phase;
                }
                // Rows p and q: left-multiply by J†.
                for col in 0..n {
                    let row_p = a[(p, col)];
                    let row_q = a[(q, col)];
                    a[(p, col)] = row_p * C64::new(c, 0.0) + row_q * s_phase;
                    a[(q, col)] = row_q * C64::new(c, 0.0) - row_p * s_phase.conj();
                }
                for row in 0..n {
                    let col_p = v[(row, p)];
                    let col_q = v[(row, q)];
                    v[(row, p)] = col_p * C64::new(c, 0.0) + col_q * s_phase.conj();
                    v[(row, q)] = col_q * C64::new(c, 0.0) - col_p * s_phase;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    Ok((eigenvalues, v))
}

/// exp(−iHt) through the oracle's own Jacobi path.
pub fn jacobi_exponential(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let (eigenvalues, vectors) = jacobi_hermitian_eigen(h)?;
    let mut scaled = vectors.clone();
    for (col, &e) in eigenvalues.iter().enumerate() {
        let phase = (-linalg::I * e * t).exp();
        for row in 0..scaled.nrows() {
            scaled[(row, col)] *= phase;
        }
    }
    Ok(&scaled * vectors.adjoint())
}

/// A request for ⟨O_{n−1}(t_{n−1}) … O_0(t_0)⟩ evaluated by brute force.
pub struct HeisenbergRequest<'a> {
    pub system: &'a SystemLayout,
    /// Dense system-dimension operators O_0 … O_{n−1}.
    pub operators: Vec<CMatrix>,
    /// Evaluation times, one per operator.
    pub times: Vec<f64>,
    pub dynamics: &'a Dynamics,
    pub state: &'a State,
}

impl HeisenbergRequest<'_> {
    fn validate(&self) -> Result<()> {
        let dim = self.system.total_dim();
        if self.operators.len() != self.times.len() || self.operators.is_empty() {
            return Err(Error::InvalidPlan {
                reason: format!(
                    "{} operators with {} times",
                    self.operators.len(),
                    self.times.len()
                ),
            });
        }
        for op in &self.operators {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: op.nrows(),
                });
            }
        }
        if self.state.layout() != self.system.layout() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.state.layout().total_dim(),
            });
        }
        Ok(())
    }
}

/// Evolution matrix U(t; 0) for the request's dynamics, built with the
/// oracle's own exponentials.
fn oracle_evolution(system: &SystemLayout, dynamics: &Dynamics, t: f64) -> Result<CMatrix> {
    let mut u = linalg::identity(system.total_dim());
    for (hamiltonian, duration) in dynamics.segments_between(0.0, t)? {
        let h = hamiltonian.system_matrix(system)?;
        u = jacobi_exponential(&h, duration)? * u;
    }
    Ok(u)
}

/// ⟨φ| O_{n−1}(t_{n−1}) … O_0(t_0) |φ⟩ or the trace against ρ₀, with
/// O_k(t_k) = U†(t_k; 0) O_k U(t_k; 0).
pub fn heisenberg_correlator(request: &HeisenbergRequest<'_>) -> Result<C64> {
    request.validate()?;
    let dim = request.system.total_dim();
    let mut product = linalg::identity(dim);
    // Paper order: latest time leftmost. Build right-to-left so the product
    // is O_{n−1}(t_{n−1}) ··· O_0(t_0).
    for (op, &t) in request.operators.iter().zip(&request.times) {
        let u = oracle_evolution(request.system, request.dynamics, t)?;
        let heisenberg = u.adjoint() * op * u;
        product = heisenberg * product;
    }
    request.state.expectation_complex(&product)
}

/// Gibbs state e^{−βH}/Z over a system layout.
pub fn gibbs_state(system: &SystemLayout, h: &CMatrix, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::InvalidGrid {
            reason: format!("beta {beta} must be finite"),
        });
    }
    let dim = system.total_dim();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: h.nrows(),
        });
    }
    let (eigenvalues, vectors) = jacobi_hermitian_eigen(h)?;
    // Shift by the ground energy so the weights never overflow.
    let ground = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = eigenvalues
        .iter()
        .map(|e| (-beta * (e - ground)).exp())
        .collect();
    let partition: f64 = weights.iter().sum();
    let mut scaled = vectors.clone();
    for (col, w) in weights.iter().enumerate() {
        for row in 0..dim {
            scaled[(row, col)] *= C64::new(w / partition, 0.0);
        }
    }
    let elements = &scaled * vectors.adjoint();
    DensityMatrix::from_matrix(system.layout(), elements)
}

/// Ground state of a Hermitian system Hamiltonian (lowest eigenvector from
/// the Jacobi path).
pub fn ground_state(system: &SystemLayout, h: &CMatrix) -> Result<StateVector> {
    let dim = system.total_dim();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: h.nrows(),
        });
    }
    let (eigenvalues, vectors) = jacobi_hermitian_eigen(h)?;
    let ground = eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty spectrum");
    let amplitudes = CVector::from_iterator(dim, vectors.column(ground).iter().copied());
    StateVector::from_amplitudes(system.layout(), amplitudes)
}

/// Dense occupation-basis matrix of a fermionic ladder operator.
///
/// Built by direct enumeration of occupation configurations with the parity
/// convention that makes it equal the dense Jordan–Wigner image: the occupied
/// level of mode p is qubit level 0, and the string sign over modes r < p is
/// +1 for occupied, −1 for empty.
pub fn fermion_matrix(mode: usize, kind: LadderKind, n_modes: usize) -> Result<CMatrix> {
    if mode == 0 || mode > n_modes {
        return Err(Error::FermionModeOutOfRange {
            index: mode,
            modes: n_modes,
        });
    }
    let dim = 1usize << n_modes;
    let mut out = CMatrix::zeros(dim, dim);
    let site = mode - 1;
    // Qubit level of mode r in basis index: bit (n_modes−1−r) counted from
    // the least-significant end (site 0 is the slowest index). Occupation
    // n_r = 1 − level_r.
    let level_of = |index: usize, r: usize| (index >> (n_modes - 1 - r)) & 1;
    for source in 0..dim {
        let occupied = level_of(source, site) == 0;
        let creates = matches!(kind, LadderKind::Creation);
        if creates == occupied {
            continue;
        }
        let target = source ^ (1 << (n_modes - 1 - site));
        let mut sign = 1.0f64;
        for r in 0..site {
            if level_of(source, r) == 1 {
                sign = -sign;
            }
        }
        out[(target, source)] = C64::new(sign, 0.0);
    }
    Ok(out)
}

/// ⟨φ|U|φ⟩ via the standard Hadamard-test circuit: the ancilla is prepared in
/// (|e⟩+|g⟩)/√2, U is applied on the |g⟩ branch, and the coherence readout
/// 2·Tr(|e⟩⟨g|ρ) recovers the matrix element.
pub fn hadamard_test_baseline(state: &StateVector, u: &CMatrix) -> Result<C64> {
    linalg::check_unitary(u, 1e-10)?;
    let dim = state.amplitudes().len();
    if u.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.nrows(),
        });
    }
    let full = hadamard_test_state(state, u)?;
    let coherence = crate::hilbert::ancilla_coherence(&State::Pure(full))?;
    Ok(coherence * C64::new(2.0, 0.0))
}

/// The post-circuit state of the Hadamard test on a full ancilla⊗system
/// layout: (|e⟩⊗|φ⟩ + |g⟩⊗U|φ⟩)/√2.
pub fn hadamard_test_state(state: &StateVector, u: &CMatrix) -> Result<StateVector> {
    let system_dim = state.amplitudes().len();
    if u.nrows() != system_dim || u.ncols() != system_dim {
        return Err(Error::DimensionMismatch {
            expected: system_dim,
            got: u.nrows(),
        });
    }
    let mut amplitudes = CVector::zeros(2 * system_dim);
    let branch_g = u * state.amplitudes();
    let inv_sqrt2 = C64::new(1.0 / 2f64.sqrt(), 0.0);
    for s in 0..system_dim {
        amplitudes[s] = state.amplitudes()[s] * inv_sqrt2;
        amplitudes[system_dim + s] = branch_g[s] * inv_sqrt2;
    }
    let layout = ancilla_extension_of(state.layout())?;
    StateVector::from_amplitudes(&layout, amplitudes)
}

fn ancilla_extension_of(layout: &HilbertLayout) -> Result<HilbertLayout> {
    use crate::hilbert::{Subsystem, SubsystemKind};
    if layout.has_ancilla() {
        return Err(Error::InvalidPlan {
            reason: "state already carries an ancilla".into(),
        });
    }
    let mut subsystems = vec![Subsystem {
        kind: SubsystemKind::AncillaQubit,
        dim: 2,
    }];
    subsystems.extend_from_slice(layout.subsystems());
    HilbertLayout::new(subsystems)
}
