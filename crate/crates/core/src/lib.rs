//! Numerical simulator for the ancilla-based measurement of n-time
//! correlation functions of spin, fermionic, and bosonic operators.
//!
//! The crate is organized around six modules:
//!
//! - [`hilbert`]: composite Hilbert-space layouts (one ancilla qubit, system
//!   qubits, truncated bosonic modes), dense state vectors and density
//!   matrices, expectation values, and the ancilla-coherence readout.
//! - [`gates`]: Pauli-string algebra, operator specifications, Hermitian
//!   matrix exponentials, ancilla-controlled gates, free evolution,
//!   Jordan–Wigner images of fermionic ladder operators, and the
//!   Mølmer–Sørensen / controlled-Z decompositions of many-body exponentials.
//! - [`protocol`]: the measurement protocol itself — ancilla preparation,
//!   interleaved controlled gates and evolutions, coherence readout, and the
//!   decoding of spin, fermionic (via σ± expansion), and bosonic (via
//!   parametric derivatives) correlators for pure and mixed initial states,
//!   plus shot-noise sampling and the Bernstein shot planner.
//! - [`oracle`]: independent brute-force ground truth in the Heisenberg
//!   picture, Gibbs states, direct fermionic matrices, and a Hadamard-test
//!   baseline.
//! - [`response`]: Kubo linear response — response functions from measured
//!   commutator correlators, susceptibilities by quadrature, first-order and
//!   finite-bandwidth predictions, and a driven-evolution cross-check.
//! - [`cli`]: declarative JSON experiment configs and the batch runner behind
//!   the `ntcorr` binary.
//!
//! Conventions used throughout: ħ = 1, σz|0⟩ = +|0⟩, the ancilla occupies
//! subsystem index 0 with |e⟩ ↦ level 0 and |g⟩ ↦ level 1, and subsystem 0 is
//! the slowest-varying index of the dense amplitude vector.

pub mod cli;
pub mod error;
pub mod gates;
pub mod hilbert;
pub mod linalg;
pub mod oracle;
pub mod protocol;
pub mod response;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
