use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gram matrix is degenerate: {0}")]
    DegenerateGram(String),
    #[error("gram matrix is not symmetric (residual {0:.3e})")]
    AsymmetricGram(f64),
    #[error("operator is not self-adjoint w.r.t. gram (residual {0:.3e})")]
    NotSelfAdjoint(f64),
    #[error("operator is not traceless (|tr| = {0:.3e})")]
    NotTraceless(f64),
    #[error("operator is zero")]
    ZeroOperator,
    #[error("invalid plane-wave data: {0}")]
    InvalidSpec(String),
    #[error("profile is constant on the interval (range {0:.3e})")]
    ConstantProfile(f64),
    #[error("t = {0} lies outside the interval")]
    OutOfInterval(f64),
    #[error("finite-difference step too large: {0}")]
    StepTooLarge(String),
    #[error("metric degenerate at sample point (|det| = {0:.3e})")]
    NondegenerateCheckFailed(f64),
    #[error("integration leaves the interval: [{0}, {1}]")]
    IntervalViolation(f64, f64),
    #[error("adaptive step failure: {0}")]
    StepFailure(String),
    #[error("sigma invariant failed: {0}")]
    InvalidSigma(String),
    #[error("operands belong to different plane-wave specs")]
    SpecMismatch,
    #[error("operands belong to different sigma elements")]
    SigmaMismatch,
    #[error("invalid Killing triple: {0}")]
    InvalidKilling(String),
    #[error("Riccati curve fails its defining equation (residual {0:.3e})")]
    ResidualTooLarge(f64),
    #[error("subspace dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subspace is not sigma-invariant (residual {0:.3e})")]
    NotInvariant(f64),
    #[error("no Z-spectral system exists for (m, k) = ({0}, {1})")]
    NoSystemFound(usize, i64),
    #[error("integer matrix search exhausted (coefficient bound {0})")]
    SearchExhausted(i64),
    #[error("Floquet multipliers are complex (trace {0:.6})")]
    ComplexMultipliers(f64),
    #[error("Floquet root search entered the complex-multiplier gap: {0}")]
    FloquetGap(String),
    #[error("trace part of the constructed curvature data is constant")]
    ConstantTrace,
    #[error("degenerate sigma spectrum; eigenvector ordering is ambiguous")]
    EigenOrderingAmbiguous,
    #[error("failed to find a cyclic vector for the lattice construction")]
    CyclicVectorFailure,
    #[error("emitted certificate failed verification: {0}")]
    CertificateFailed(String),
    #[error("sigma fits neither the translational nor the dilational normal form")]
    UnclassifiableSigma,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
