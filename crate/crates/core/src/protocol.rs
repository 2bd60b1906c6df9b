//! The measurement protocol: ancilla preparation, interleaved controlled
//! gates and free evolutions, coherence readout, and correlator decoding.
//!
//! An order-n correlator ⟨O_{n−1}(t_{n−1}) … O_0(t_0)⟩ is obtained from one
//! ancilla coherence Tr(|e⟩⟨g|ρ) = ½(−i)ⁿ⟨…⟩ as 2·iⁿ·coherence. Spin
//! operators enter at gate angle π/2, where exp(−i(π/2)O) = −iO; bosonic and
//! spin-boson operators enter through central finite differences of the
//! coherence around gate angle 0, where ∂exp(−iθO)|₀ = −iO. Non-Hermitian
//! operators (σ±, fermionic ladders) are expanded linearly into Pauli
//! strings, one protocol run per combination.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gates::{Dynamics, HermitianEigen, OperatorSpec};
use crate::hilbert::{
    ancilla_coherence, fock_leakage, DensityMatrix, HilbertLayout, State, StateVector,
    SubsystemKind, SystemLayout,
};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Gate-angle handling for one controlled step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleMode {
    /// Spin operators: the gate runs at Ωτ = π/2.
    FixedHalfPi,
    /// Bosonic operators: the coherence is differentiated at Ωτ = 0, so the
    /// step sweeps stencil angles.
    Derivative,
}

/// One controlled gate of the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledStep {
    pub generator: OperatorSpec,
    pub angle_mode: AngleMode,
}

impl ControlledStep {
    pub fn fixed(generator: OperatorSpec) -> Self {
        ControlledStep {
            generator,
            angle_mode: AngleMode::FixedHalfPi,
        }
    }

    pub fn derivative(generator: OperatorSpec) -> Self {
        ControlledStep {
            generator,
            angle_mode: AngleMode::Derivative,
        }
    }
}

/// One element of the interleaved gate/evolution sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanStep {
    /// Apply controlled gate `index` (into the plan's controlled list).
    Controlled { index: usize },
    /// Free evolution of the system under `hamiltonian` for `duration`.
    /// Negative durations realize reversed-order time grids.
    Evolution {
        hamiltonian: OperatorSpec,
        duration: f64,
    },
}

/// Ordered interleaving of controlled gates and free-evolution segments for
/// an order-n correlator over the time grid t_0 ≤ … ≤ t_{n−1}.
#[derive(Debug, Clone)]
pub struct ProtocolPlan {
    system: SystemLayout,
    layout: HilbertLayout,
    controlled: Vec<ControlledStep>,
    steps: Vec<PlanStep>,
    times: Vec<f64>,
}

impl ProtocolPlan {
    /// Canonical plan: controlled gate k at time t_k, free evolution carved
    /// from `dynamics` between consecutive times. Times must be
    /// non-decreasing.
    pub fn new(
        system: &SystemLayout,
        dynamics: &Dynamics,
        controlled: Vec<ControlledStep>,
        times: &[f64],
    ) -> Result<Self> {
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidPlan {
                reason: "times must be non-decreasing".into(),
            });
        }
        Self::with_time_grid(system, dynamics, controlled, times)
    }

    /// As [`ProtocolPlan::new`] but allowing non-monotone time grids, which
    /// yield negative-duration (reversed) evolution segments. Used to realize
    /// reversed-operator-order correlators such as ⟨B(0)A(t)⟩.
    pub fn new_allowing_reversed(
        system: &SystemLayout,
        dynamics: &Dynamics,
        controlled: Vec<ControlledStep>,
        times: &[f64],
    ) -> Result<Self> {
        Self::with_time_grid(system, dynamics, controlled, times)
    }

    fn with_time_grid(
        system: &SystemLayout,
        dynamics: &Dynamics,
        controlled: Vec<ControlledStep>,
        times: &[f64],
    ) -> Result<Self> {
        if controlled.is_empty() {
            return Err(Error::InvalidPlan {
                reason: "an order-n correlator needs n >= 1 controlled steps".into(),
            });
        }
        if controlled.len() != times.len() {
            return Err(Error::InvalidPlan {
                reason: format!(
                    "{} controlled steps with {} times",
                    controlled.len(),
                    times.len()
                ),
            });
        }
        let mut steps = Vec::new();
        for index in 0..controlled.len() {
            steps.push(PlanStep::Controlled { index });
            if index + 1 < controlled.len() {
                for (hamiltonian, duration) in
                    dynamics.segments_between(times[index], times[index + 1])?
                {
                    if duration.abs() > 1e-15 {
                        steps.push(PlanStep::Evolution {
                            hamiltonian,
                            duration,
                        });
                    }
                }
            }
        }
        Self::with_steps(system, controlled, steps, times)
    }

    /// Fully explicit constructor for non-canonical step sequences (extra
    /// evolution segments, custom interleavings). Controlled steps must
    /// appear exactly once each, in order.
    pub fn with_steps(
        system: &SystemLayout,
        controlled: Vec<ControlledStep>,
        steps: Vec<PlanStep>,
        times: &[f64],
    ) -> Result<Self> {
        if controlled.is_empty() {
            return Err(Error::InvalidPlan {
                reason: "an order-n correlator needs n >= 1 controlled steps".into(),
            });
        }
        for step in &controlled {
            if !step.generator.is_hermitian() {
                return Err(Error::NonHermitianOperator {
                    role: "a controlled-gate generator",
                });
            }
        }
        let controlled_order: Vec<usize> = steps
            .iter()
            .filter_map(|s| match s {
                PlanStep::Controlled { index } => Some(*index),
                _ => None,
            })
            .collect();
        let expected: Vec<usize> = (0..controlled.len()).collect();
        if controlled_order != expected {
            return Err(Error::InvalidPlan {
                reason: "steps must apply each controlled gate exactly once, in order".into(),
            });
        }
        for step in &steps {
            if let PlanStep::Evolution {
                hamiltonian,
                duration,
            } = step
            {
                if !hamiltonian.is_hermitian() {
                    return Err(Error::NonHermitianOperator {
                        role: "an evolution Hamiltonian",
                    });
                }
                if !duration.is_finite() {
                    return Err(Error::InvalidPlan {
                        reason: format!("non-finite evolution duration {duration}"),
                    });
                }
            }
        }
        Ok(ProtocolPlan {
            layout: system.with_ancilla(),
            system: system.clone(),
            controlled,
            steps,
            times: times.to_vec(),
        })
    }

    pub fn order(&self) -> usize {
        self.controlled.len()
    }

    pub fn system(&self) -> &SystemLayout {
        &self.system
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn controlled(&self) -> &[ControlledStep] {
        &self.controlled
    }

    pub fn steps(&self) -> &[PlanStep] {
        &self.steps
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Indices of derivative-mode controlled steps.
    pub fn derivative_steps(&self) -> Vec<usize> {
        self.controlled
            .iter()
            .enumerate()
            .filter(|(_, s)| s.angle_mode == AngleMode::Derivative)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A plan with every Hermitian generator eigendecomposed once, so runs at
/// many gate angles (stencil sweeps, shot batches) reuse the factorizations.
pub(crate) struct CompiledPlan<'p> {
    plan: &'p ProtocolPlan,
    controlled_eigen: Vec<HermitianEigen>,
    /// Eigendecompositions for evolution steps, deduplicated by Hamiltonian.
    evolution_eigen: Vec<HermitianEigen>,
    /// For each plan step: None for controlled steps, Some((eigen index,
    /// duration)) for evolution steps.
    step_evolution: Vec<Option<(usize, f64)>>,
}

impl<'p> CompiledPlan<'p> {
    pub fn new(plan: &'p ProtocolPlan) -> Result<Self> {
        let mut controlled_eigen = Vec::with_capacity(plan.controlled.len());
        for step in &plan.controlled {
            let matrix = step.generator.system_matrix(&plan.system)?;
            controlled_eigen.push(HermitianEigen::new(&matrix)?);
        }
        let mut evolution_eigen: Vec<HermitianEigen> = Vec::new();
        let mut seen: Vec<&OperatorSpec> = Vec::new();
        let mut step_evolution = Vec::with_capacity(plan.steps.len());
        for step in &plan.steps {
            match step {
                PlanStep::Controlled { .. } => step_evolution.push(None),
                PlanStep::Evolution {
                    hamiltonian,
                    duration,
                } => {
                    let index = match seen.iter().position(|s| *s == hamiltonian) {
                        Some(i) => i,
                        None => {
                            let matrix = hamiltonian.system_matrix(&plan.system)?;
                            evolution_eigen.push(HermitianEigen::new(&matrix)?);
                            seen.push(hamiltonian);
                            evolution_eigen.len() - 1
                        }
                    };
                    step_evolution.push(Some((index, *duration)));
                }
            }
        }
        Ok(CompiledPlan {
            plan,
            controlled_eigen,
            evolution_eigen,
            step_evolution,
        })
    }

    fn effective_angle(&self, index: usize, overrides: &[Option<f64>]) -> f64 {
        let explicit = overrides.get(index).copied().flatten();
        explicit.unwrap_or(match self.plan.controlled[index].angle_mode {
            AngleMode::FixedHalfPi => std::f64::consts::FRAC_PI_2,
            AngleMode::Derivative => 0.0,
        })
    }

    /// Run the protocol: prepare (|e⟩+|g⟩)/√2 ⊗ system state, apply the
    /// steps, and read out coherence and Fock leakage.
    pub fn run(&self, initial: &State, overrides: &[Option<f64>]) -> Result<ProtocolOutcome> {
        if initial.layout() != self.plan.system.layout() {
            return Err(Error::DimensionMismatch {
                expected: self.plan.system.total_dim(),
                got: initial.layout().total_dim(),
            });
        }
        let state = match initial {
            State::Pure(sv) => self.run_pure(sv, overrides)?,
            State::Mixed(dm) => self.run_mixed(dm, overrides)?,
        };
        let coherence = ancilla_coherence(&state)?;
        let leakage = fock_leakage(&state)?;
        Ok(ProtocolOutcome {
            state,
            coherence,
            leakage,
        })
    }

    fn run_pure(&self, system_state: &StateVector, overrides: &[Option<f64>]) -> Result<State> {
        let dim = self.plan.system.total_dim();
        let inv_sqrt2 = C64::new(1.0 / 2f64.sqrt(), 0.0);
        // Ancilla is the slowest index: [0, dim) is the |e⟩ branch, [dim,
        // 2·dim) the |g⟩ branch.
        let mut amplitudes = CVector::zeros(2 * dim);
        for s in 0..dim {
            amplitudes[s] = system_state.amplitudes()[s] * inv_sqrt2;
            amplitudes[dim + s] = system_state.amplitudes()[s] * inv_sqrt2;
        }
        for (step, evolution) in self.plan.steps.iter().zip(&self.step_evolution) {
            match step {
                PlanStep::Controlled { index } => {
                    let angle = self.effective_angle(*index, overrides);
                    let g_branch = CVector::from_iterator(
                        dim,
                        (0..dim).map(|s| amplitudes[dim + s]),
                    );
                    let rotated = self.controlled_eigen[*index].apply_exponential(angle, &g_branch);
                    for s in 0..dim {
                        amplitudes[dim + s] = rotated[s];
                    }
                }
                PlanStep::Evolution { .. } => {
                    let (eigen_index, duration) =
                        evolution.expect("evolution step carries its eigen pair");
                    let eigen = &self.evolution_eigen[eigen_index];
                    for branch in 0..2 {
                        let offset = branch * dim;
                        let local = CVector::from_iterator(
                            dim,
                            (0..dim).map(|s| amplitudes[offset + s]),
                        );
                        let evolved = eigen.apply_exponential(duration, &local);
                        for s in 0..dim {
                            amplitudes[offset + s] = evolved[s];
                        }
                    }
                }
            }
        }
        Ok(State::Pure(StateVector::from_normalized(
            &self.plan.layout,
            amplitudes,
        )?))
    }

    fn run_mixed(&self, rho0: &DensityMatrix, overrides: &[Option<f64>]) -> Result<State> {
        let dim = self.plan.system.total_dim();
        // ρ̃₀ = ½(|e⟩+|g⟩)(⟨e|+⟨g|) ⊗ ρ₀.
        let half = C64::new(0.5, 0.0);
        let plus_projector = CMatrix::from_row_slice(2, 2, &[half, half, half, half]);
        let full = linalg::kron(&plus_projector, rho0.elements());
        let mut state = State::Mixed(DensityMatrix::from_matrix(&self.plan.layout, full)?);
        for (step, evolution) in self.plan.steps.iter().zip(&self.step_evolution) {
            match step {
                PlanStep::Controlled { index } => {
                    let angle = self.effective_angle(*index, overrides);
                    let block = self.controlled_eigen[*index].exponential(angle);
                    let mut gate = linalg::identity(2 * dim);
                    gate.view_mut((dim, dim), (dim, dim)).copy_from(&block);
                    state.apply_unitary(&gate)?;
                }
                PlanStep::Evolution { .. } => {
                    let (eigen_index, duration) =
                        evolution.expect("evolution step carries its eigen pair");
                    let u_system = self.evolution_eigen[eigen_index].exponential(duration);
                    let u = linalg::kron(&linalg::identity(2), &u_system);
                    state.apply_unitary(&u)?;
                }
            }
        }
        Ok(state)
    }
}

/// Final state and readouts of one protocol execution.
pub struct ProtocolOutcome {
    /// The post-protocol ancilla⊗system state.
    pub state: State,
    /// Tr(|e⟩⟨g| ρ).
    pub coherence: C64,
    /// Population of the top two Fock levels, maximized over modes.
    pub leakage: f64,
}

/// Execute a plan once. The ancilla content of `initial` is irrelevant:
/// `initial` is a system state and the ancilla is prepared in (|e⟩+|g⟩)/√2.
/// `angle_overrides` may replace the per-step defaults (π/2 for fixed steps,
/// 0 for derivative steps); pass `&[]` for all defaults.
pub fn run_protocol(
    initial: &State,
    plan: &ProtocolPlan,
    angle_overrides: &[Option<f64>],
) -> Result<ProtocolOutcome> {
    CompiledPlan::new(plan)?.run(initial, angle_overrides)
}

/// Invert the coherence relation: correlator = 2·iⁿ·coherence.
pub fn decode_spin_correlator(coherence: C64, order: usize) -> C64 {
    let i_power = match order % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    coherence * i_power * C64::new(2.0, 0.0)
}

/// How a correlator value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMode {
    Exact,
    Sampled,
}

/// Finite-difference metadata attached to bosonic correlator results.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeMeta {
    /// Central-difference step in angle units.
    pub step: f64,
    pub stencil: &'static str,
    /// Whether one Richardson extrapolation (h and h/2) was applied.
    pub richardson: bool,
}

/// A measured correlator with its provenance.
#[derive(Debug, Clone)]
pub struct CorrelationResult {
    pub value: C64,
    pub order: usize,
    pub mode: CorrelationMode,
    /// Shots per ancilla observable; 0 in exact mode.
    pub shots_per_observable: u64,
    pub derivative_meta: Option<DerivativeMeta>,
    /// Fock truncation diagnostic; 0 for mode-free layouts.
    pub leakage: f64,
}

/// Finite-difference configuration for bosonic correlators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    /// Central-difference step (angle units).
    pub step: f64,
    /// Apply one Richardson extrapolation (combine h and h/2).
    pub richardson: bool,
    /// Maximum tolerated Fock leakage before failing with a truncation error.
    pub leakage_threshold: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step: 1e-3,
            richardson: false,
            leakage_threshold: 1e-6,
        }
    }
}

/// One multiplicative term of the linear expansion of the requested
/// operators: a scalar coefficient and the per-step controlled gates.
struct ExpansionTerm {
    coefficient: C64,
    controlled: Vec<ControlledStep>,
}

/// Expand the operator list into protocol terms. Spin operators (Pauli
/// strings and their sums) expand linearly into fixed-angle steps; Hermitian
/// bosonic operators become derivative steps with any real scale folded into
/// the coefficient.
fn expand_operators(operators: &[OperatorSpec]) -> Result<Vec<ExpansionTerm>> {
    let mut terms = vec![ExpansionTerm {
        coefficient: C64::new(1.0, 0.0),
        controlled: Vec::new(),
    }];
    for op in operators {
        if op.has_boson() {
            let (scale, generator) = boson_generator(op)?;
            for term in &mut terms {
                term.coefficient *= scale;
                term.controlled.push(ControlledStep::derivative(generator.clone()));
            }
        } else {
            let expansion = op.spin_terms()?;
            if expansion.is_empty() {
                return Err(Error::InvalidPlan {
                    reason: "operator expands to zero terms".into(),
                });
            }
            let mut next = Vec::with_capacity(terms.len() * expansion.len());
            for term in &terms {
                for (coefficient, pauli) in &expansion {
                    let mut controlled = term.controlled.clone();
                    controlled.push(ControlledStep::fixed(OperatorSpec::Pauli(pauli.clone())));
                    next.push(ExpansionTerm {
                        coefficient: term.coefficient * coefficient,
                        controlled,
                    });
                }
            }
            terms = next;
        }
    }
    Ok(terms)
}

/// Split a Hermitian bosonic operator into a real scale and a unit-scale
/// derivative generator.
fn boson_generator(op: &OperatorSpec) -> Result<(C64, OperatorSpec)> {
    if !op.is_hermitian() {
        return Err(Error::NonHermitianOperator {
            role: "a bosonic correlator operator",
        });
    }
    match op {
        OperatorSpec::Quadrature(_) => Ok((C64::new(1.0, 0.0), op.clone())),
        OperatorSpec::SpinBoson(sb) => {
            let (coefficient, unit) = sb.pauli.unit();
            debug_assert_eq!(coefficient.im, 0.0, "hermiticity already checked");
            Ok((
                coefficient,
                OperatorSpec::spin_boson(unit, sb.quadrature.mode, sb.quadrature.form),
            ))
        }
        OperatorSpec::Sum(_) => Err(Error::InvalidPlan {
            reason: "weighted sums containing bosonic factors are not supported as correlator \
                     operators; pass the quadrature or spin-boson product directly"
                .into(),
        }),
        OperatorSpec::Pauli(_) => unreachable!("caller checked has_boson"),
    }
}

fn system_of(initial: &State) -> Result<SystemLayout> {
    SystemLayout::from_layout(initial.layout())
}

fn validate_times(operators: &[OperatorSpec], times: &[f64]) -> Result<()> {
    if operators.is_empty() || operators.len() != times.len() {
        return Err(Error::InvalidPlan {
            reason: format!(
                "{} operators with {} times",
                operators.len(),
                times.len()
            ),
        });
    }
    Ok(())
}

/// Exact-mode correlator of spin (Pauli-string or weighted-sum) operators.
pub fn correlate_spin(
    initial: &State,
    dynamics: &Dynamics,
    operators: &[OperatorSpec],
    times: &[f64],
) -> Result<CorrelationResult> {
    validate_times(operators, times)?;
    for op in operators {
        if op.has_boson() {
            return Err(Error::InvalidPlan {
                reason: "bosonic operator in correlate_spin; use correlate_boson".into(),
            });
        }
    }
    let (value, leakage) = correlate_exact(initial, dynamics, operators, times, None)?;
    Ok(CorrelationResult {
        value,
        order: operators.len(),
        mode: CorrelationMode::Exact,
        shots_per_observable: 0,
        derivative_meta: None,
        leakage,
    })
}

/// Exact-mode correlator allowing bosonic and spin-boson operators, which
/// are evaluated through central finite differences of the coherence.
pub fn correlate_boson(
    initial: &State,
    dynamics: &Dynamics,
    operators: &[OperatorSpec],
    times: &[f64],
    fd: &FdConfig,
) -> Result<CorrelationResult> {
    validate_times(operators, times)?;
    if fd.step <= 0.0 || !fd.step.is_finite() {
        return Err(Error::InvalidFdStep { h: fd.step });
    }
    let has_derivative = operators.iter().any(|op| op.has_boson());
    let (value, leakage) = correlate_exact(initial, dynamics, operators, times, Some(fd))?;
    let cutoffs = system_of(initial)?.mode_cutoffs().to_vec();
    if leakage > fd.leakage_threshold {
        let suggested = cutoffs.iter().copied().max().unwrap_or(2) + 4;
        return Err(Error::TruncationLeakage {
            leakage,
            threshold: fd.leakage_threshold,
            suggested_cutoff: suggested,
        });
    }
    Ok(CorrelationResult {
        value,
        order: operators.len(),
        mode: CorrelationMode::Exact,
        shots_per_observable: 0,
        derivative_meta: has_derivative.then_some(DerivativeMeta {
            step: fd.step,
            stencil: "central-2",
            richardson: fd.richardson,
        }),
        leakage,
    })
}

/// Mixed-state correlator: the protocol applied to ρ̃₀ = ancilla ⊗ ρ₀.
/// Dispatches on operator content; `fd` is required when bosonic operators
/// are present.
pub fn correlate_mixed(
    rho0: &DensityMatrix,
    dynamics: &Dynamics,
    operators: &[OperatorSpec],
    times: &[f64],
    fd: Option<&FdConfig>,
) -> Result<CorrelationResult> {
    let state = State::Mixed(rho0.clone());
    if operators.iter().any(|op| op.has_boson()) {
        let default = FdConfig::default();
        correlate_boson(&state, dynamics, operators, times, fd.unwrap_or(&default))
    } else {
        correlate_spin(&state, dynamics, operators, times)
    }
}

/// Shared exact-mode driver: expand, run (with stencils for derivative
/// steps), decode, and combine linearly.
fn correlate_exact(
    initial: &State,
    dynamics: &Dynamics,
    operators: &[OperatorSpec],
    times: &[f64],
    fd: Option<&FdConfig>,
) -> Result<(C64, f64)> {
    let system = system_of(initial)?;
    let order = operators.len();
    let terms = expand_operators(operators)?;
    let mut combined = linalg::ZERO;
    let mut worst_leakage: f64 = 0.0;
    for term in terms {
        let plan = ProtocolPlan::new(&system, dynamics, term.controlled, times)?;
        let compiled = CompiledPlan::new(&plan)?;
        let derivative_steps = plan.derivative_steps();
        let (derivative, leakage) = if derivative_steps.is_empty() {
            let outcome = compiled.run(initial, &[])?;
            (outcome.coherence, outcome.leakage)
        } else {
            let fd = fd.ok_or(Error::InvalidPlan {
                reason: "bosonic operators need a finite-difference configuration".into(),
            })?;
            stencil_difference(&compiled, initial, &derivative_steps, fd)?
        };
        combined += term.coefficient * derivative;
        worst_leakage = worst_leakage.max(leakage);
    }
    Ok((decode_spin_correlator(combined, order), worst_leakage))
}

/// k-th order mixed central difference of the coherence over the derivative
/// steps, with optional Richardson extrapolation.
fn stencil_difference(
    compiled: &CompiledPlan<'_>,
    initial: &State,
    derivative_steps: &[usize],
    fd: &FdConfig,
) -> Result<(C64, f64)> {
    let (coarse, leak_a) = central_difference(compiled, initial, derivative_steps, fd.step)?;
    if !fd.richardson {
        return Ok((coarse, leak_a));
    }
    let (fine, leak_b) = central_difference(compiled, initial, derivative_steps, fd.step / 2.0)?;
    let extrapolated = (fine * C64::new(4.0, 0.0) - coarse) / C64::new(3.0, 0.0);
    Ok((extrapolated, leak_a.max(leak_b)))
}

fn central_difference(
    compiled: &CompiledPlan<'_>,
    initial: &State,
    derivative_steps: &[usize],
    h: f64,
) -> Result<(C64, f64)> {
    let k = derivative_steps.len();
    let order = compiled.plan.order();
    let mut total = linalg::ZERO;
    let mut worst_leakage: f64 = 0.0;
    for point in 0..(1usize << k) {
        let mut overrides: Vec<Option<f64>> = vec![None; order];
        let mut parity = 1.0f64;
        for (bit, &step_index) in derivative_steps.iter().enumerate() {
            let sign = if (point >> bit) & 1 == 0 { 1.0 } else { -1.0 };
            parity *= sign;
            overrides[step_index] = Some(sign * h);
        }
        let outcome = compiled.run(initial, &overrides)?;
        total += outcome.coherence * C64::new(parity, 0.0);
        worst_leakage = worst_leakage.max(outcome.leakage);
    }
    let scale = (2.0 * h).powi(k as i32);
    Ok((total / C64::new(scale, 0.0), worst_leakage))
}

/// Bernstein shot budget: L = ⌈4(1+c)/δ²⌉ repetitions guarantee precision δ
/// on a bounded ±1 observable with probability ≥ 1 − e^{−c}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotPlan {
    pub delta: f64,
    pub confidence_exponent: f64,
    pub shots: u64,
}

pub fn plan_shots(delta: f64, c: f64) -> Result<ShotPlan> {
    if !(delta > 0.0 && delta <= 2.0) || !(c > 0.0) || !delta.is_finite() || !c.is_finite() {
        return Err(Error::InvalidShotParams { delta, c });
    }
    let shots = (4.0 * (1.0 + c) / (delta * delta)).ceil() as u64;
    Ok(ShotPlan {
        delta,
        confidence_exponent: c,
        shots,
    })
}

/// A sampled correlator alongside the per-observable means it was decoded
/// from, for calibration against the Bernstein bound.
#[derive(Debug, Clone)]
pub struct SampledCorrelation {
    pub result: CorrelationResult,
    pub sampled_sx: f64,
    pub sampled_sy: f64,
    pub exact_sx: f64,
    pub exact_sy: f64,
    pub exact_value: C64,
}

/// Simulate the shot-noise experiment: run the plan exactly, then draw
/// `shots` ideal ±1 ancilla measurements per observable with
/// p(+1) = (1+⟨σ⟩)/2, and decode the sampled means. Deterministic for a
/// fixed seed.
pub fn sample_correlator(
    initial: &State,
    plan: &ProtocolPlan,
    shot_plan: &ShotPlan,
    rng_seed: u64,
) -> Result<SampledCorrelation> {
    if plan
        .controlled()
        .iter()
        .any(|s| s.angle_mode != AngleMode::FixedHalfPi)
    {
        return Err(Error::InvalidPlan {
            reason: "sampling supports fixed-angle (spin) plans only".into(),
        });
    }
    let outcome = run_protocol(initial, plan, &[])?;
    let reduced = outcome.state.reduced_density(0)?;
    let exact_sx = (reduced[(0, 1)] + reduced[(1, 0)]).re;
    let exact_sy = ((reduced[(0, 1)] - reduced[(1, 0)]) * linalg::I).re;

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut draw_mean = |expectation: f64| -> f64 {
        let p_plus = ((1.0 + expectation) / 2.0).clamp(0.0, 1.0);
        let mut sum = 0i64;
        for _ in 0..shot_plan.shots {
            let outcome: f64 = rng.random();
            sum += if outcome < p_plus { 1 } else { -1 };
        }
        sum as f64 / shot_plan.shots as f64
    };
    let sampled_sx = draw_mean(exact_sx);
    let sampled_sy = draw_mean(exact_sy);

    let sampled_coherence = C64::new(sampled_sx, sampled_sy) * C64::new(0.5, 0.0);
    let value = decode_spin_correlator(sampled_coherence, plan.order());
    let exact_value = decode_spin_correlator(outcome.coherence, plan.order());
    Ok(SampledCorrelation {
        result: CorrelationResult {
            value,
            order: plan.order(),
            mode: CorrelationMode::Sampled,
            shots_per_observable: shot_plan.shots,
            derivative_meta: None,
            leakage: outcome.leakage,
        },
        sampled_sx,
        sampled_sy,
        exact_sx,
        exact_sy,
        exact_value,
    })
}

impl SystemLayout {
    /// Recover the system description from an ancilla-free layout whose
    /// subsystems are qubits followed by modes.
    pub fn from_layout(layout: &HilbertLayout) -> Result<SystemLayout> {
        if layout.has_ancilla() {
            return Err(Error::InvalidPlan {
                reason: "expected a system state without ancilla".into(),
            });
        }
        let mut qubits = 0usize;
        let mut modes: Vec<usize> = Vec::new();
        for sub in layout.subsystems() {
            match sub.kind {
                SubsystemKind::Qubit => {
                    if !modes.is_empty() {
                        return Err(Error::InvalidPlan {
                            reason: "system layouts list qubits before modes".into(),
                        });
                    }
                    qubits += 1;
                }
                SubsystemKind::BosonMode => modes.push(sub.dim),
                SubsystemKind::AncillaQubit => unreachable!("checked above"),
            }
        }
        SystemLayout::new(qubits, &modes)
    }
}
