//! Pauli-string algebra over system qubit sites.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    pub fn matrix(self) -> CMatrix {
        let o = linalg::ONE;
        let z = linalg::ZERO;
        let i = linalg::I;
        match self {
            Axis::I => CMatrix::from_row_slice(2, 2, &[o, z, z, o]),
            Axis::X => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            Axis::Y => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Axis::Z => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }

    /// Single-site product σa·σb = phase · σc.
    fn mul(a: Axis, b: Axis) -> (Axis, C64) {
        use Axis::*;
        let one = linalg::ONE;
        let i = linalg::I;
        match (a, b) {
            (I, other) => (other, one),
            (other, I) => (other, one),
            (X, X) | (Y, Y) | (Z, Z) => (I, one),
            (X, Y) => (Z, i),
            (Y, X) => (Z, -i),
            (Y, Z) => (X, i),
            (Z, Y) => (X, -i),
            (Z, X) => (Y, i),
            (X, Z) => (Y, -i),
        }
    }

    pub fn label(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// A scaled tensor product of Pauli factors on distinct qubit sites.
/// Identity factors are normalized away, so the empty factor map is the
/// (scaled) identity operator.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    factors: BTreeMap<usize, Axis>,
    coefficient: C64,
}

impl PauliString {
    pub fn identity() -> Self {
        PauliString {
            factors: BTreeMap::new(),
            coefficient: linalg::ONE,
        }
    }

    pub fn new(factors: &[(usize, Axis)], coefficient: C64) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(site, axis) in factors {
            if axis == Axis::I {
                continue;
            }
            if map.insert(site, axis).is_some() {
                return Err(Error::DuplicatePauliSite { site });
            }
        }
        Ok(PauliString {
            factors: map,
            coefficient,
        })
    }

    pub fn single(site: usize, axis: Axis) -> Self {
        PauliString::new(&[(site, axis)], linalg::ONE).expect("single factor cannot collide")
    }

    /// Parse a register string such as "XIZ" (site 0 first).
    pub fn parse(label: &str, coefficient: C64) -> Result<Self> {
        let mut factors = Vec::new();
        for (site, ch) in label.chars().enumerate() {
            let axis = match ch.to_ascii_uppercase() {
                'I' => Axis::I,
                'X' => Axis::X,
                'Y' => Axis::Y,
                'Z' => Axis::Z,
                other => {
                    return Err(Error::Config(format!("invalid Pauli label '{other}'")));
                }
            };
            factors.push((site, axis));
        }
        PauliString::new(&factors, coefficient)
    }

    pub fn coefficient(&self) -> C64 {
        self.coefficient
    }

    pub fn factors(&self) -> impl Iterator<Item = (usize, Axis)> + '_ {
        self.factors.iter().map(|(&s, &a)| (s, a))
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn max_site(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        PauliString {
            factors: self.factors.clone(),
            coefficient: self.coefficient * factor,
        }
    }

    /// Split into (coefficient, coefficient-one string).
    pub fn unit(&self) -> (C64, PauliString) {
        (
            self.coefficient,
            PauliString {
                factors: self.factors.clone(),
                coefficient: linalg::ONE,
            },
        )
    }

    /// Hermitian iff the scalar coefficient is real.
    pub fn is_hermitian(&self) -> bool {
        self.coefficient.im == 0.0
    }

    /// Product of two Pauli strings; the result is again a Pauli string with
    /// the accumulated ±1/±i phase folded into its coefficient.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut factors = self.factors.clone();
        let mut coefficient = self.coefficient * other.coefficient;
        for (&site, &axis) in &other.factors {
            match factors.remove(&site) {
                None => {
                    factors.insert(site, axis);
                }
                Some(existing) => {
                    let (product, phase) = Axis::mul(existing, axis);
                    coefficient *= phase;
                    if product != Axis::I {
                        factors.insert(site, product);
                    }
                }
            }
        }
        PauliString {
            factors,
            coefficient,
        }
    }

    /// Dense matrix over `n_qubits` ordered qubit sites (site 0 slowest).
    pub fn dense(&self, n_qubits: usize) -> Result<CMatrix> {
        if let Some(max) = self.max_site() {
            if max >= n_qubits {
                return Err(Error::SubsystemOutOfRange {
                    index: max,
                    count: n_qubits,
                });
            }
        }
        let mut out = CMatrix::identity(1, 1) * self.coefficient;
        for site in 0..n_qubits {
            let local = match self.factors.get(&site) {
                Some(&axis) => axis.matrix(),
                None => linalg::identity(2),
            };
            out = linalg::kron(&out, &local);
        }
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+.4}{:+.4}i)", self.coefficient.re, self.coefficient.im)?;
        if self.factors.is_empty() {
            return write!(f, " I");
        }
        for (site, axis) in &self.factors {
            write!(f, " {}{}", axis.label(), site)?;
        }
        Ok(())
    }
}

/// σ± = ½(σx ± iσy) on one site, as a pair of (coefficient, unit string).
pub fn sigma_plus_terms(site: usize) -> [(C64, PauliString); 2] {
    [
        (C64::new(0.5, 0.0), PauliString::single(site, Axis::X)),
        (C64::new(0.0, 0.5), PauliString::single(site, Axis::Y)),
    ]
}

pub fn sigma_minus_terms(site: usize) -> [(C64, PauliString); 2] {
    [
        (C64::new(0.5, 0.0), PauliString::single(site, Axis::X)),
        (C64::new(0.0, -0.5), PauliString::single(site, Axis::Y)),
    ]
}

/// Multiply two linear combinations of Pauli strings term by term.
pub fn sum_mul(a: &[(C64, PauliString)], b: &[(C64, PauliString)]) -> Vec<(C64, PauliString)> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ca, pa) in a {
        for (cb, pb) in b {
            let product = pa.mul(pb);
            let (phase, unit) = product.unit();
            out.push((ca * cb * phase, unit));
        }
    }
    out
}

/// Merge identical strings and drop negligible coefficients.
pub fn simplify(terms: Vec<(C64, PauliString)>) -> Vec<(C64, PauliString)> {
    let mut merged: Vec<(C64, PauliString)> = Vec::new();
    for (coefficient, string) in terms {
        let (phase, unit) = string.unit();
        let total = coefficient * phase;
        match merged.iter_mut().find(|(_, existing)| *existing == unit) {
            Some((acc, _)) => *acc += total,
            None => merged.push((total, unit)),
        }
    }
    merged.retain(|(c, _)| c.norm() > 1e-14);
    merged
}
