//! Operator specifications: Pauli strings, bosonic quadratures, spin-boson
//! products, and weighted sums, plus piecewise-constant schedules.

use crate::error::{Error, Result};
use crate::gates::pauli::PauliString;
use crate::hilbert::{HilbertLayout, SubsystemKind, SystemLayout};
use crate::linalg::{self, CMatrix, C64};

/// Fock-basis lowering operator a on a mode truncated at `cutoff` levels.
pub fn lowering(cutoff: usize) -> CMatrix {
    let mut a = CMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Fock-basis raising operator a†.
pub fn raising(cutoff: usize) -> CMatrix {
    lowering(cutoff).adjoint()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureForm {
    /// a + a†
    Position,
    /// i(a† − a)
    Momentum,
    /// a
    Lowering,
    /// a†
    Raising,
    /// a†a
    Number,
}

impl QuadratureForm {
    pub fn is_hermitian(self) -> bool {
        !matches!(self, QuadratureForm::Lowering | QuadratureForm::Raising)
    }

    pub fn local_matrix(self, cutoff: usize) -> CMatrix {
        let a = lowering(cutoff);
        let adag = raising(cutoff);
        match self {
            QuadratureForm::Position => &a + &adag,
            QuadratureForm::Momentum => (&adag - &a) * linalg::I,
            QuadratureForm::Lowering => a,
            QuadratureForm::Raising => adag,
            QuadratureForm::Number => &adag * &a,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            QuadratureForm::Position => "a+adag",
            QuadratureForm::Momentum => "i(adag-a)",
            QuadratureForm::Lowering => "a",
            QuadratureForm::Raising => "adag",
            QuadratureForm::Number => "adag a",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BosonQuadrature {
    pub mode: usize,
    pub form: QuadratureForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinBosonProduct {
    pub pauli: PauliString,
    pub quadrature: BosonQuadrature,
}

/// The operators O_k and Hamiltonians of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Pauli(PauliString),
    Quadrature(BosonQuadrature),
    SpinBoson(SpinBosonProduct),
    /// Real-weighted sum of sub-operators.
    Sum(Vec<(f64, OperatorSpec)>),
}

impl OperatorSpec {
    pub fn pauli(string: PauliString) -> Self {
        OperatorSpec::Pauli(string)
    }

    pub fn quadrature(mode: usize, form: QuadratureForm) -> Self {
        OperatorSpec::Quadrature(BosonQuadrature { mode, form })
    }

    pub fn spin_boson(pauli: PauliString, mode: usize, form: QuadratureForm) -> Self {
        OperatorSpec::SpinBoson(SpinBosonProduct {
            pauli,
            quadrature: BosonQuadrature { mode, form },
        })
    }

    /// Structural Hermiticity: coefficient reality for Pauli strings, the
    /// quadrature form for bosonic factors, and real weights with Hermitian
    /// terms for sums.
    pub fn is_hermitian(&self) -> bool {
        match self {
            OperatorSpec::Pauli(p) => p.is_hermitian(),
            OperatorSpec::Quadrature(q) => q.form.is_hermitian(),
            OperatorSpec::SpinBoson(sb) => sb.pauli.is_hermitian() && sb.quadrature.form.is_hermitian(),
            OperatorSpec::Sum(terms) => terms.iter().all(|(_, op)| op.is_hermitian()),
        }
    }

    /// True when the operator involves any bosonic factor.
    pub fn has_boson(&self) -> bool {
        match self {
            OperatorSpec::Pauli(_) => false,
            OperatorSpec::Quadrature(_) | OperatorSpec::SpinBoson(_) => true,
            OperatorSpec::Sum(terms) => terms.iter().any(|(_, op)| op.has_boson()),
        }
    }

    /// Expand a purely spinorial operator into (coefficient, unit Pauli
    /// string) terms; errors when bosonic content is present.
    pub fn spin_terms(&self) -> Result<Vec<(C64, PauliString)>> {
        match self {
            OperatorSpec::Pauli(p) => {
                let (coefficient, unit) = p.unit();
                Ok(vec![(coefficient, unit)])
            }
            OperatorSpec::Quadrature(_) | OperatorSpec::SpinBoson(_) => {
                Err(Error::NonHermitianOperator {
                    role: "a spin correlator operator (bosonic content routes to correlate_boson)",
                })
            }
            OperatorSpec::Sum(terms) => {
                let mut out = Vec::new();
                for (weight, op) in terms {
                    for (c, p) in op.spin_terms()? {
                        out.push((C64::new(*weight, 0.0) * c, p));
                    }
                }
                Ok(out)
            }
        }
    }

    /// Dense matrix over the system layout (no ancilla).
    pub fn system_matrix(&self, system: &SystemLayout) -> Result<CMatrix> {
        self.matrix_in(system.layout())
    }

    /// Dense matrix over an arbitrary layout; qubit sites map to the layout's
    /// qubit subsystems in order and modes to its bosonic subsystems, so the
    /// same specification embeds into a system layout or its ancilla
    /// extension.
    pub fn matrix_in(&self, layout: &HilbertLayout) -> Result<CMatrix> {
        let dim = layout.total_dim();
        match self {
            OperatorSpec::Pauli(p) => {
                let qubits = qubit_subsystems(layout);
                let matrices: Vec<(usize, CMatrix)> = p
                    .factors()
                    .map(|(site, axis)| {
                        qubits
                            .get(site)
                            .copied()
                            .ok_or(Error::SubsystemOutOfRange {
                                index: site,
                                count: qubits.len(),
                            })
                            .map(|subsystem| (subsystem, axis.matrix()))
                    })
                    .collect::<Result<_>>()?;
                let refs: Vec<(usize, &CMatrix)> =
                    matrices.iter().map(|(s, m)| (*s, m)).collect();
                Ok(layout.embed_operator(&refs)? * p.coefficient())
            }
            OperatorSpec::Quadrature(q) => {
                let modes = mode_subsystems(layout);
                let subsystem = *modes.get(q.mode).ok_or(Error::SubsystemOutOfRange {
                    index: q.mode,
                    count: modes.len(),
                })?;
                let cutoff = layout.subsystems()[subsystem].dim;
                let local = q.form.local_matrix(cutoff);
                layout.embed_operator(&[(subsystem, &local)])
            }
            OperatorSpec::SpinBoson(sb) => {
                let pauli = OperatorSpec::Pauli(sb.pauli.clone()).matrix_in(layout)?;
                let quad = OperatorSpec::Quadrature(sb.quadrature).matrix_in(layout)?;
                Ok(pauli * quad)
            }
            OperatorSpec::Sum(terms) => {
                let mut acc = CMatrix::zeros(dim, dim);
                for (weight, op) in terms {
                    acc += op.matrix_in(layout)? * C64::new(*weight, 0.0);
                }
                Ok(acc)
            }
        }
    }
}

fn qubit_subsystems(layout: &HilbertLayout) -> Vec<usize> {
    layout
        .subsystems()
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s.kind, SubsystemKind::Qubit))
        .map(|(i, _)| i)
        .collect()
}

fn mode_subsystems(layout: &HilbertLayout) -> Vec<usize> {
    layout
        .subsystems()
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s.kind, SubsystemKind::BosonMode))
        .map(|(i, _)| i)
        .collect()
}

/// Piecewise-constant Hamiltonian history: ordered (Hamiltonian, duration)
/// segments with non-negative durations.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    segments: Vec<(OperatorSpec, f64)>,
}

impl Schedule {
    pub fn new(segments: Vec<(OperatorSpec, f64)>) -> Result<Self> {
        for (index, (hamiltonian, duration)) in segments.iter().enumerate() {
            if !hamiltonian.is_hermitian() {
                return Err(Error::InvalidSchedule {
                    index,
                    reason: "Hamiltonian is not Hermitian".into(),
                });
            }
            if !duration.is_finite() || *duration < 0.0 {
                return Err(Error::InvalidSchedule {
                    index,
                    reason: format!("duration {duration} must be finite and non-negative"),
                });
            }
        }
        Ok(Schedule { segments })
    }

    pub fn segments(&self) -> &[(OperatorSpec, f64)] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|(_, d)| d).sum()
    }
}

/// System dynamics: a single Hamiltonian or a piecewise-constant history
/// starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    TimeIndependent(OperatorSpec),
    PiecewiseConstant(Schedule),
}

impl Dynamics {
    pub fn time_independent(hamiltonian: OperatorSpec) -> Result<Self> {
        if !hamiltonian.is_hermitian() {
            return Err(Error::NonHermitianOperator {
                role: "a Hamiltonian",
            });
        }
        Ok(Dynamics::TimeIndependent(hamiltonian))
    }

    /// Effective (Hamiltonian, signed duration) segments realizing
    /// U(to; from). For `to < from` the segments run in reverse with negated
    /// durations, i.e. U(to; from) = U(from; to)†.
    pub fn segments_between(&self, from: f64, to: f64) -> Result<Vec<(OperatorSpec, f64)>> {
        if to >= from {
            self.forward_segments(from, to)
        } else {
            let mut forward = self.forward_segments(to, from)?;
            forward.reverse();
            Ok(forward.into_iter().map(|(h, d)| (h, -d)).collect())
        }
    }

    fn forward_segments(&self, from: f64, to: f64) -> Result<Vec<(OperatorSpec, f64)>> {
        debug_assert!(to >= from);
        match self {
            Dynamics::TimeIndependent(h) => Ok(vec![(h.clone(), to - from)]),
            Dynamics::PiecewiseConstant(schedule) => {
                if to > schedule.total_duration() + 1e-12 {
                    return Err(Error::InvalidGrid {
                        reason: format!(
                            "time {to} exceeds schedule duration {}",
                            schedule.total_duration()
                        ),
                    });
                }
                let mut out = Vec::new();
                let mut start = 0.0;
                for (hamiltonian, duration) in schedule.segments() {
                    let end = start + duration;
                    let lo = from.max(start);
                    let hi = to.min(end);
                    if hi > lo + 1e-15 {
                        out.push((hamiltonian.clone(), hi - lo));
                    }
                    start = end;
                }
                Ok(out)
            }
        }
    }
}

/// An ancilla-controlled gate exp(−i·angle·|g⟩⟨g| ⊗ O).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledGateSpec {
    pub generator: OperatorSpec,
    pub angle: f64,
}

impl ControlledGateSpec {
    pub fn new(generator: OperatorSpec, angle: f64) -> Result<Self> {
        if !generator.is_hermitian() {
            return Err(Error::NonHermitianOperator {
                role: "a controlled-gate generator",
            });
        }
        Ok(ControlledGateSpec { generator, angle })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::pauli::Axis;
    use crate::linalg::{identity, kron, max_abs_diff, ONE};

    #[test]
    fn ladder_matrix_entries() {
        let adag = raising(3);
        assert_eq!(adag[(1, 0)], ONE);
        assert!((adag[(2, 1)].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(adag[(0, 0)], linalg::ZERO);
    }

    #[test]
    fn truncated_commutator_artifact() {
        // [a, a†] = I − d·|d−1⟩⟨d−1| on a d-level truncation.
        for d in [2usize, 5, 8] {
            let a = lowering(d);
            let adag = raising(d);
            let comm = &a * &adag - &adag * &a;
            let mut expected = identity(d);
            expected[(d - 1, d - 1)] -= C64::new(d as f64, 0.0);
            assert!(max_abs_diff(&comm, &expected) < 1e-13);
        }
    }

    #[test]
    fn hermiticity_flags() {
        assert!(OperatorSpec::quadrature(0, QuadratureForm::Position).is_hermitian());
        assert!(OperatorSpec::quadrature(0, QuadratureForm::Momentum).is_hermitian());
        assert!(OperatorSpec::quadrature(0, QuadratureForm::Number).is_hermitian());
        assert!(!OperatorSpec::quadrature(0, QuadratureForm::Lowering).is_hermitian());
        assert!(!OperatorSpec::quadrature(0, QuadratureForm::Raising).is_hermitian());
        let with_i = PauliString::single(0, Axis::X).scaled(linalg::I);
        assert!(!OperatorSpec::Pauli(with_i).is_hermitian());
    }

    #[test]
    fn pauli_embeds_into_ancilla_layout() {
        let system = SystemLayout::new(2, &[]).unwrap();
        let spec = OperatorSpec::Pauli(PauliString::single(1, Axis::X));
        let sys_matrix = spec.system_matrix(&system).unwrap();
        let full = spec.matrix_in(&system.with_ancilla()).unwrap();
        assert!(max_abs_diff(&full, &kron(&identity(2), &sys_matrix)) < 1e-15);
    }

    #[test]
    fn spin_boson_product_matrix() {
        let system = SystemLayout::new(1, &[3]).unwrap();
        let spec = OperatorSpec::spin_boson(
            PauliString::single(0, Axis::Z),
            0,
            QuadratureForm::Position,
        );
        let direct = kron(
            &Axis::Z.matrix(),
            &QuadratureForm::Position.local_matrix(3),
        );
        assert!(max_abs_diff(&spec.system_matrix(&system).unwrap(), &direct) < 1e-15);
    }

    #[test]
    fn sum_expansion_collects_terms() {
        let sum = OperatorSpec::Sum(vec![
            (0.5, OperatorSpec::Pauli(PauliString::single(0, Axis::X))),
            (
                0.5,
                OperatorSpec::Pauli(PauliString::single(0, Axis::Y).scaled(linalg::I)),
            ),
        ]);
        let terms = sum.spin_terms().unwrap();
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0].0, C64::new(0.5, 0.0));
        assert_eq!(terms[1].0, C64::new(0.0, 0.5));
    }

    #[test]
    fn schedule_rejects_negative_duration() {
        let h = OperatorSpec::Pauli(PauliString::single(0, Axis::Z));
        assert!(matches!(
            Schedule::new(vec![(h, -0.5)]),
            Err(Error::InvalidSchedule { .. })
        ));
    }

    #[test]
    fn piecewise_segments_are_sliced_and_reversible() {
        let h1 = OperatorSpec::Pauli(PauliString::single(0, Axis::Z));
        let h2 = OperatorSpec::Pauli(PauliString::single(0, Axis::X));
        let schedule = Schedule::new(vec![(h1.clone(), 1.0), (h2.clone(), 1.0)]).unwrap();
        let dynamics = Dynamics::PiecewiseConstant(schedule);
        let forward = dynamics.segments_between(0.5, 1.5).unwrap();
        assert_eq!(forward.len(), 2);
        assert!((forward[0].1 - 0.5).abs() < 1e-12);
        assert!((forward[1].1 - 0.5).abs() < 1e-12);
        let backward = dynamics.segments_between(1.5, 0.5).unwrap();
        assert_eq!(backward[0].0, h2);
        assert!((backward[0].1 + 0.5).abs() < 1e-12);
    }
}
