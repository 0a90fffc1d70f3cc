use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },
    #[error("matrix rank exceeds 3 (fourth eigenvalue {eigenvalue:e})")]
    RankExceeded { eigenvalue: f64 },
    #[error("coordinate matrix has rank {rank}, need 3")]
    RankDeficient { rank: usize },
    #[error("permutation {perm} is not an automorphism (deviation {deviation:e})")]
    NotAnAutomorphism { perm: String, deviation: f64 },
    #[error("stabilizer is ill-separated: {perm} deviates by {deviation:e} (tolerance {tol:e})")]
    ToleranceAmbiguity {
        perm: String,
        deviation: f64,
        tol: f64,
    },
    #[error("gauge pins are inconsistent: {0}")]
    InfeasiblePins(String),
    #[error("expected {expected} parameters, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown case id {0:?}")]
    InvalidCase(String),
    #[error("coordinates do not fit the ansatz: {0}")]
    FitMismatch(String),
    #[error("neighbours of vertex {vertex} are not coplanar (residual {residual:e})")]
    NotCoplanar { vertex: usize, residual: f64 },
    #[error("denting vertex {vertex} would not move it")]
    DegenerateResult { vertex: usize },
    #[error("tangent field vanishes (|tau| = {norm:e}, scale {scale:e})")]
    DegeneratePoint { norm: f64, scale: f64 },
    #[error("curve step {step} failed: residual {residual:e}")]
    StepFailure { step: usize, residual: f64 },
    #[error("only {found} states with separated traces, need {needed}")]
    InsufficientSpread { found: usize, needed: usize },
}
