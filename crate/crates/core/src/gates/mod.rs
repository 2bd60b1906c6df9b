//! Operator and gate construction: Pauli strings, operator specifications,
//! matrix exponentials, ancilla-controlled gates, free evolution,
//! Jordan–Wigner images, and the Mølmer–Sørensen / controlled-Z syntheses.

mod decomposition;
mod evolution;
mod jw;
mod operator;
mod pauli;

pub use decomposition::{
    cz_decomposition, gate_count, ms_conjugation_decomposition, ms_gate, sequence_product,
    CzDecomposition, GateStep, IdentifiedExponent, MsDecomposition, DECOMPOSITION_TOL,
};
pub use evolution::{
    controlled_gate, evolution_operator, evolve, evolve_state_vector, matrix_exponential,
    HermitianEigen, EXPM_HERMITICITY_TOL,
};
pub use jw::{jordan_wigner, LadderKind};
pub use operator::{
    lowering, raising, BosonQuadrature, ControlledGateSpec, Dynamics, OperatorSpec,
    QuadratureForm, Schedule, SpinBosonProduct,
};
pub use pauli::{sigma_minus_terms, sigma_plus_terms, simplify, sum_mul, Axis, PauliString};
