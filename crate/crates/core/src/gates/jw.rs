//! Jordan–Wigner images of fermionic ladder operators.
//!
//! Mode p (1-based) maps to qubit site p−1 with a σz parity string on every
//! lower mode: b†_p → σ₊^p ⊗ σz^{p−1} ⊗ … ⊗ σz^1. The occupied level of a
//! mode is qubit level 0 (σz = +1), so that σ₊ creates; this is the same
//! |e⟩/|g⟩ orientation used for the ancilla.

use crate::error::{Error, Result};
use crate::gates::operator::OperatorSpec;
use crate::gates::pauli::{Axis, PauliString};
use crate::linalg::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Creation,
    Annihilation,
}

/// The mapped ladder operator as a two-term sum of Pauli strings (the σ±
/// expansion of the paper's string formula).
pub fn jordan_wigner(mode: usize, kind: LadderKind, n_modes: usize) -> Result<OperatorSpec> {
    if mode == 0 || mode > n_modes {
        return Err(Error::FermionModeOutOfRange {
            index: mode,
            modes: n_modes,
        });
    }
    let site = mode - 1;
    let tail: Vec<(usize, Axis)> = (0..site).map(|s| (s, Axis::Z)).collect();

    let mut x_factors = tail.clone();
    x_factors.push((site, Axis::X));
    let mut y_factors = tail;
    y_factors.push((site, Axis::Y));

    let y_coefficient = match kind {
        LadderKind::Creation => C64::new(0.0, 1.0),
        LadderKind::Annihilation => C64::new(0.0, -1.0),
    };
    let x_term = PauliString::new(&x_factors, C64::new(1.0, 0.0))?;
    let y_term = PauliString::new(&y_factors, y_coefficient)?;
    Ok(OperatorSpec::Sum(vec![
        (0.5, OperatorSpec::Pauli(x_term)),
        (0.5, OperatorSpec::Pauli(y_term)),
    ]))
}
