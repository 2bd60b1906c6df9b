//! Mølmer–Sørensen and controlled-Z syntheses of many-body Pauli
//! exponentials, with numeric identification of the resulting exponent.

use crate::error::{Error, Result};
use crate::gates::evolution::HermitianEigen;
use crate::gates::operator::QuadratureForm;
use crate::gates::pauli::{Axis, PauliString};
use crate::hilbert::SystemLayout;
use crate::linalg::{self, CMatrix, C64};

/// Agreement required between a synthesized product and its identified
/// exponential.
pub const DECOMPOSITION_TOL: f64 = 1e-12;

/// Fock cutoff used for the boson-coupled decomposition identity. The
/// identity is exact at any cutoff because the conjugating gates act only on
/// the qubits.
const BOSON_CUTOFF: usize = 8;

/// One gate of a synthesized sequence, in application order.
#[derive(Debug, Clone, PartialEq)]
pub enum GateStep {
    /// U_MS(θ, φ) = exp[−iθ(cos φ Sx + sin φ Sy)²/4] over `sites`.
    MolmerSorensen { theta: f64, phi: f64, sites: Vec<usize> },
    /// exp(i·angle·σ_axis) on one site.
    LocalRotation { site: usize, axis: Axis, angle: f64 },
    /// exp(i·angle·σ_axis ⊗ (a + a†)) coupling one site to one mode.
    SpinBosonRotation { site: usize, axis: Axis, mode: usize, angle: f64 },
    /// Controlled-Z between two sites.
    ControlledZ { a: usize, b: usize },
}

impl GateStep {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateStep::ControlledZ { .. })
    }

    pub fn matrix(&self, system: &SystemLayout) -> Result<CMatrix> {
        match self {
            GateStep::MolmerSorensen { theta, phi, sites } => ms_gate(system, *theta, *phi, sites),
            GateStep::LocalRotation { site, axis, angle } => {
                let local = axis.matrix();
                let embedded = system.embed_operator(&[(*site, &local)])?;
                Ok(HermitianEigen::new(&embedded)?.exponential(-*angle))
            }
            GateStep::SpinBosonRotation { site, axis, mode, angle } => {
                let pauli = PauliString::single(*site, *axis);
                let op = crate::gates::operator::OperatorSpec::spin_boson(
                    pauli,
                    *mode,
                    QuadratureForm::Position,
                );
                let embedded = op.system_matrix(system)?;
                Ok(HermitianEigen::new(&embedded)?.exponential(-*angle))
            }
            GateStep::ControlledZ { a, b } => {
                if *a == *b {
                    return Err(Error::SiteCollision { index: *a });
                }
                let dim = system.total_dim();
                let za = PauliString::single(*a, Axis::Z);
                let zb = PauliString::single(*b, Axis::Z);
                let zz = za.mul(&zb);
                let za_m = crate::gates::operator::OperatorSpec::Pauli(za).system_matrix(system)?;
                let zb_m = crate::gates::operator::OperatorSpec::Pauli(zb).system_matrix(system)?;
                let zz_m = crate::gates::operator::OperatorSpec::Pauli(zz).system_matrix(system)?;
                // CZ = ½(I + Za + Zb − ZaZb).
                Ok((linalg::identity(dim) + za_m + zb_m - zz_m) * C64::new(0.5, 0.0))
            }
        }
    }
}

/// Product of a gate sequence given in application order (first gate first).
pub fn sequence_product(system: &SystemLayout, sequence: &[GateStep]) -> Result<CMatrix> {
    let mut product = linalg::identity(system.total_dim());
    for step in sequence {
        product = step.matrix(system)? * product;
    }
    Ok(product)
}

/// The Mølmer–Sørensen collective-spin gate
/// exp[−iθ(cos φ Sx + sin φ Sy)²/4] on the listed qubit sites.
pub fn ms_gate(system: &SystemLayout, theta: f64, phi: f64, sites: &[usize]) -> Result<CMatrix> {
    if sites.is_empty() {
        return Err(Error::InvalidDecomposition {
            required: "at least one site",
            got: "empty site list".into(),
        });
    }
    for &site in sites {
        if site >= system.qubits() {
            return Err(Error::InvalidDecomposition {
                required: "qubit sites only",
                got: format!("site {site} is not a qubit"),
            });
        }
    }
    let dim = system.total_dim();
    let mut collective = CMatrix::zeros(dim, dim);
    for &site in sites {
        let local = Axis::X.matrix() * C64::new(phi.cos(), 0.0)
            + Axis::Y.matrix() * C64::new(phi.sin(), 0.0);
        collective += system.embed_operator(&[(site, &local)])?;
    }
    let generator = (&collective * &collective) * C64::new(0.25, 0.0);
    Ok(HermitianEigen::new(&generator)?.exponential(theta))
}

/// The Pauli exponential exp(i·angle·P) identified from a gate product.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiedExponent {
    /// Unit-coefficient Pauli string P.
    pub pauli: PauliString,
    /// Signed angle, ±φ for input angle φ.
    pub angle: f64,
    /// Whether P is multiplied by the quadrature (a + a†).
    pub boson_coupled: bool,
    /// Max-norm residual between the product and the identified exponential.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct MsDecomposition {
    pub sequence: Vec<GateStep>,
    pub unitary: CMatrix,
    pub exponent: IdentifiedExponent,
}

/// Conjugate a single-site rotation by a Mølmer–Sørensen pair,
/// U_MS(−π/2, 0) · C(φ) · U_MS(π/2, 0), and identify numerically which
/// many-body Pauli exponential the product equals. The center gate C is the
/// rotation exp(iφσ_center) on qubit 0, or exp(iφσ_center⊗(a+a†)) when boson
/// coupling is requested.
pub fn ms_conjugation_decomposition(
    k: usize,
    phi: f64,
    center: Axis,
    boson_coupled: bool,
) -> Result<MsDecomposition> {
    if k == 0 {
        return Err(Error::InvalidDecomposition {
            required: "k >= 1",
            got: "k = 0".into(),
        });
    }
    if !matches!(center, Axis::Z | Axis::Y) {
        return Err(Error::InvalidDecomposition {
            required: "center axis z or y",
            got: format!("{:?}", center),
        });
    }
    let modes: &[usize] = if boson_coupled { &[BOSON_CUTOFF] } else { &[] };
    let system = SystemLayout::new(k, modes)?;
    let sites: Vec<usize> = (0..k).collect();

    let center_step = if boson_coupled {
        GateStep::SpinBosonRotation {
            site: 0,
            axis: center,
            mode: 0,
            angle: phi,
        }
    } else {
        GateStep::LocalRotation {
            site: 0,
            axis: center,
            angle: phi,
        }
    };
    let sequence = vec![
        GateStep::MolmerSorensen {
            theta: std::f64::consts::FRAC_PI_2,
            phi: 0.0,
            sites: sites.clone(),
        },
        center_step,
        GateStep::MolmerSorensen {
            theta: -std::f64::consts::FRAC_PI_2,
            phi: 0.0,
            sites,
        },
    ];
    let unitary = sequence_product(&system, &sequence)?;
    let exponent = identify_exponent(&system, &unitary, phi, boson_coupled)?;
    Ok(MsDecomposition {
        sequence,
        unitary,
        exponent,
    })
}

/// Exhaustively compare `unitary` against exp(i·s·φ·P) for every Pauli string
/// P over the system's qubits and s = ±1 (with the (a+a†) factor when
/// requested). Exactly the stated candidates are tried, so a match certifies
/// the identity within `DECOMPOSITION_TOL`.
fn identify_exponent(
    system: &SystemLayout,
    unitary: &CMatrix,
    phi: f64,
    boson_coupled: bool,
) -> Result<IdentifiedExponent> {
    let k = system.qubits();
    // For P² = I: exp(iαP) = cos α · I + i sin α · P, and
    // exp(iαP⊗Q) = I⊗cos(αQ) + iP⊗sin(αQ). The sign-dependent pieces are
    // shared by every candidate string.
    let sign_parts: Vec<(f64, SignParts)> = [1.0f64, -1.0]
        .into_iter()
        .map(|sign| -> Result<(f64, SignParts)> {
            let angle = sign * phi;
            let parts = if boson_coupled {
                let cutoff = system.mode_cutoffs()[0];
                let eigen = HermitianEigen::new(&QuadratureForm::Position.local_matrix(cutoff))?;
                let plus = eigen.exponential(-angle); // exp(iαQ)
                let minus = eigen.exponential(angle); // exp(−iαQ)
                let cos_q = (&plus + &minus) * C64::new(0.5, 0.0);
                let sin_q = (&plus - &minus) * C64::new(0.0, -0.5);
                SignParts::Boson {
                    base: linalg::kron(&linalg::identity(1 << k), &cos_q),
                    sin_q,
                }
            } else {
                SignParts::Plain { angle }
            };
            Ok((angle, parts))
        })
        .collect::<Result<_>>()?;

    let mut best_residual = f64::INFINITY;
    for code in 0..4usize.pow(k as u32) {
        let mut factors = Vec::new();
        let mut rem = code;
        for site in 0..k {
            let axis = match rem % 4 {
                0 => Axis::I,
                1 => Axis::X,
                2 => Axis::Y,
                _ => Axis::Z,
            };
            rem /= 4;
            factors.push((site, axis));
        }
        let pauli = PauliString::new(&factors, linalg::ONE)?;
        let pauli_dense = pauli.dense(k)?;
        for (angle, parts) in &sign_parts {
            let candidate = match parts {
                SignParts::Plain { angle } => {
                    linalg::identity(1 << k) * C64::new(angle.cos(), 0.0)
                        + &pauli_dense * C64::new(0.0, angle.sin())
                }
                SignParts::Boson { base, sin_q } => {
                    base + linalg::kron(&pauli_dense, sin_q) * linalg::I
                }
            };
            let residual = linalg::max_abs_diff(unitary, &candidate);
            if residual < best_residual {
                best_residual = residual;
            }
            if residual <= DECOMPOSITION_TOL {
                return Ok(IdentifiedExponent {
                    pauli,
                    angle: *angle,
                    boson_coupled,
                    residual,
                });
            }
        }
    }
    Err(Error::NoCandidateMatch { best_residual })
}

enum SignParts {
    Plain { angle: f64 },
    Boson { base: CMatrix, sin_q: CMatrix },
}

#[derive(Debug, Clone)]
pub struct CzDecomposition {
    pub sequence: Vec<GateStep>,
    pub unitary: CMatrix,
    /// Number of two-qubit gates in the sequence, always 2(k−1).
    pub cz_count: usize,
    /// Max-norm residual against exp(−iφ σy ⊗ σz ⊗ … ⊗ σz).
    pub residual: f64,
}

/// Synthesize exp(−iφ σy₁ ⊗ σz₂ ⊗ … ⊗ σz_k) from 2(k−1) controlled-Z gates
/// around one local rotation.
pub fn cz_decomposition(k: usize, phi: f64) -> Result<CzDecomposition> {
    if k < 2 {
        return Err(Error::InvalidDecomposition {
            required: "k >= 2",
            got: format!("k = {k}"),
        });
    }
    let system = SystemLayout::new(k, &[])?;
    let mut sequence = Vec::new();
    for target in (1..k).rev() {
        sequence.push(GateStep::ControlledZ { a: 0, b: target });
    }
    sequence.push(GateStep::LocalRotation {
        site: 0,
        axis: Axis::Y,
        angle: -phi,
    });
    for target in 1..k {
        sequence.push(GateStep::ControlledZ { a: 0, b: target });
    }
    let unitary = sequence_product(&system, &sequence)?;

    let mut factors = vec![(0usize, Axis::Y)];
    factors.extend((1..k).map(|s| (s, Axis::Z)));
    let target = PauliString::new(&factors, linalg::ONE)?;
    let target_dense = target.dense(k)?;
    let expected = linalg::identity(1 << k) * C64::new(phi.cos(), 0.0)
        + target_dense * C64::new(0.0, -phi.sin());
    let residual = linalg::max_abs_diff(&unitary, &expected);
    let cz_count = sequence.iter().filter(|s| s.is_two_qubit()).count();
    Ok(CzDecomposition {
        sequence,
        unitary,
        cz_count,
        residual,
    })
}

/// Total gate count (m+q)·n − q for an order-n correlator measured with m
/// gates per controlled operation and q per evolution segment.
pub fn gate_count(n: u64, m: u64, q: u64) -> Result<u64> {
    if n < 1 || m < 1 {
        return Err(Error::InvalidGateCount { n, m });
    }
    Ok((m + q) * n - q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff};

    #[test]
    fn single_qubit_ms_is_a_global_phase() {
        let system = SystemLayout::new(1, &[]).unwrap();
        let theta = 0.73;
        let u = ms_gate(&system, theta, 0.0, &[0]).unwrap();
        let expected = identity(2) * (-linalg::I * C64::new(theta / 4.0, 0.0)).exp();
        assert!(max_abs_diff(&u, &expected) < 1e-13);
    }

    #[test]
    fn ms_inverse_pair_cancels() {
        let system = SystemLayout::new(3, &[]).unwrap();
        let sites = [0, 1, 2];
        let forward = ms_gate(&system, std::f64::consts::FRAC_PI_2, 0.0, &sites).unwrap();
        let backward = ms_gate(&system, -std::f64::consts::FRAC_PI_2, 0.0, &sites).unwrap();
        assert!(max_abs_diff(&(forward * backward), &identity(8)) < 1e-12);
    }

    #[test]
    fn ms_matches_direct_exponentiation() {
        let system = SystemLayout::new(2, &[]).unwrap();
        let theta = std::f64::consts::FRAC_PI_2;
        let u = ms_gate(&system, theta, 0.0, &[0, 1]).unwrap();
        let sx0 = system.embed_operator(&[(0, &Axis::X.matrix())]).unwrap();
        let sx1 = system.embed_operator(&[(1, &Axis::X.matrix())]).unwrap();
        let s = sx0 + sx1;
        let generator = (&s * &s) * C64::new(0.25, 0.0);
        let direct = crate::gates::evolution::matrix_exponential(&generator, theta).unwrap();
        assert!(max_abs_diff(&u, &direct) < 1e-12);
    }

    #[test]
    fn ms_rejects_bosonic_site() {
        let system = SystemLayout::new(1, &[4]).unwrap();
        assert!(ms_gate(&system, 1.0, 0.0, &[1]).is_err());
    }

    #[test]
    fn k1_collapses_to_local_rotation() {
        let dec = ms_conjugation_decomposition(1, 0.41, Axis::Z, false).unwrap();
        assert_eq!(dec.exponent.pauli, PauliString::single(0, Axis::Z));
        assert!((dec.exponent.angle - 0.41).abs() < 1e-15);
        assert!(dec.exponent.residual < DECOMPOSITION_TOL);
    }

    #[test]
    fn k3_z_center_gives_weight_three_string() {
        let dec = ms_conjugation_decomposition(3, 0.37, Axis::Z, false).unwrap();
        assert_eq!(dec.exponent.pauli.weight(), 3);
        assert!(dec.exponent.residual < DECOMPOSITION_TOL);
    }

    #[test]
    fn boson_coupled_k2_identified() {
        let dec = ms_conjugation_decomposition(2, 0.29, Axis::Z, true).unwrap();
        assert!(dec.exponent.boson_coupled);
        assert!(dec.exponent.residual < DECOMPOSITION_TOL);
        assert_eq!(dec.exponent.pauli.weight(), 2);
    }

    #[test]
    fn cz_three_qubit_identity() {
        let dec = cz_decomposition(3, 0.53).unwrap();
        assert_eq!(dec.cz_count, 4);
        assert!(dec.residual < DECOMPOSITION_TOL, "residual {}", dec.residual);
    }

    #[test]
    fn cz_two_qubit_identity() {
        let dec = cz_decomposition(2, 1.1).unwrap();
        assert_eq!(dec.cz_count, 2);
        assert!(dec.residual < DECOMPOSITION_TOL);
    }

    #[test]
    fn cz_zero_angle_is_identity() {
        let dec = cz_decomposition(4, 0.0).unwrap();
        assert!(max_abs_diff(&dec.unitary, &identity(16)) < 1e-12);
    }

    #[test]
    fn gate_count_formula() {
        assert_eq!(gate_count(3, 4, 1).unwrap(), 14);
        assert_eq!(gate_count(2, 4, 2).unwrap(), 10);
        assert_eq!(gate_count(1, 7, 3).unwrap(), 7);
        assert!(gate_count(0, 1, 0).is_err());
    }
}
