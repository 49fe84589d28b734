use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("bump escapes grid")]
    BumpEscapesGrid,

    #[error("grid too small for stencil: need {needed} points along the axis, have {have}")]
    GridTooSmall { needed: usize, have: usize },

    #[error("Sobolev order s = {0} exceeds the numeric differentiation budget (s <= 4)")]
    SobolevOrderTooHigh(u32),

    #[error("surface not timelike at point (delta = {0})")]
    NotTimelike(f64),

    #[error("degenerate induced metric (varsigma = {0})")]
    DegenerateMetric(f64),

    #[error("not subluminal: |c| = {0} >= 1")]
    NotSubluminal(f64),

    #[error("not superluminal: c = {0} <= 1")]
    NotSuperluminal(f64),

    #[error("constructed surface fails the membrane equation (residual {0:e})")]
    NotASolution(f64),

    #[error("regime {regime} is inconsistent with speed c = {c}")]
    RegimeMismatch { regime: &'static str, c: f64 },

    #[error("insufficient stencil data: {0}")]
    InsufficientStencil(String),

    #[error("xi station {0} lies outside the covered wedge")]
    OutsideWedge(f64),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("inequality violated: rhs {rhs:e} vanishes where lhs = {lhs:e}")]
    InequalityViolation { lhs: f64, rhs: f64 },

    #[error("delta must lie in (0, 3/20), got {0}")]
    DeltaOutOfRange(f64),

    #[error("decay fit needs at least 5 stations with positive values, got {0}")]
    TooFewStations(usize),

    #[error("slab is not fully covered by the time stack")]
    SlabNotCovered,

    #[error("derivative budget exceeded: {0}")]
    DerivativeBudget(String),

    #[error("degenerate (null) surface - run aborted at step {step} (delta = {delta:e})")]
    DegenerateSurface { step: usize, delta: f64 },

    #[error("non-finite value encountered at step {0}")]
    NonFinite(usize),

    #[error("unknown profile `{0}`")]
    UnknownProfile(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
