//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("basis level {level} out of range for subsystem {subsystem} (dim {dim})")]
    LevelOutOfRange {
        subsystem: usize,
        level: usize,
        dim: usize,
    },

    #[error("subsystem index {index} out of range (layout has {count} subsystems)")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("operators collide on subsystem {index}")]
    SiteCollision { index: usize },

    #[error("duplicate qubit site {site} in Pauli string")]
    DuplicatePauliSite { site: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e}, tolerance {tolerance:.1e})")]
    NonHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("operator is structurally non-Hermitian and cannot be used as {role}")]
    NonHermitianOperator { role: &'static str },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("density matrix invalid: {reason}")]
    InvalidDensityMatrix { reason: String },

    #[error("layout has no ancilla subsystem")]
    MissingAncilla,

    #[error("fermionic mode index {index} out of range 1..={modes}")]
    FermionModeOutOfRange { index: usize, modes: usize },

    #[error("invalid protocol plan: {reason}")]
    InvalidPlan { reason: String },

    #[error("schedule segment {index} invalid: {reason}")]
    InvalidSchedule { index: usize, reason: String },

    #[error(
        "Fock truncation leakage {leakage:.3e} exceeds threshold {threshold:.1e}; \
         retry with a cutoff of at least {suggested_cutoff}"
    )]
    TruncationLeakage {
        leakage: f64,
        threshold: f64,
        suggested_cutoff: usize,
    },

    #[error("shot plan parameters out of range: delta={delta}, c={c} (need 0 < delta <= 2 and c > 0)")]
    InvalidShotParams { delta: f64, c: f64 },

    #[error("finite-difference step must be positive, got {h}")]
    InvalidFdStep { h: f64 },

    #[error("quadrature grid too coarse: refinement disagreement {disagreement:.3e} exceeds tolerance {tolerance:.1e}")]
    QuadratureTooCoarse { disagreement: f64, tolerance: f64 },

    #[error("grid invalid: {reason}")]
    InvalidGrid { reason: String },

    #[error("gate sequence product matches no candidate Pauli exponential (max residual {best_residual:.3e}); this indicates an implementation bug")]
    NoCandidateMatch { best_residual: f64 },

    #[error("decomposition requires {required}, got {got}")]
    InvalidDecomposition { required: &'static str, got: String },

    #[error("gate count parameters out of range: n={n}, m={m}")]
    InvalidGateCount { n: u64, m: u64 },

    #[error("time integration did not converge: change {change:.3e} after {steps} steps (tolerance {tolerance:.1e})")]
    NonConvergence {
        change: f64,
        steps: usize,
        tolerance: f64,
    },

    #[error("internal cross-check failed: {reason}")]
    CrossCheckFailed { reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 parse, 3 validation, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Json(_) | Error::Io(_) | Error::Config(_) => 2,
            Error::TruncationLeakage { .. }
            | Error::QuadratureTooCoarse { .. }
            | Error::NonConvergence { .. }
            | Error::NoCandidateMatch { .. }
            | Error::CrossCheckFailed { .. } => 4,
            _ => 3,
        }
    }
}
