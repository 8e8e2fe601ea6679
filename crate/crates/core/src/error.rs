use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("site {site} out of range for lattice with {len} sites")]
    SiteOutOfRange { site: usize, len: usize },
    #[error("hermiticity violated: {0}")]
    Hermiticity(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),
    #[error("gapless: smallest |eigenvalue| is {gap:e}")]
    Gapless { gap: f64 },
    #[error("unknown mode {mode} (space has {n_modes} modes)")]
    UnknownMode { mode: usize, n_modes: usize },
    #[error("parity error: {0}")]
    Parity(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("dimension guard: {sites} sites exceeds the limit of {max}")]
    DimensionGuard { sites: usize, max: usize },
    #[error("degenerate ground state at s = {s}: gap {gap:e}")]
    DegenerateFlow { s: f64, gap: f64 },
    #[error("flow aborted at s = {s} (gap {gap:e}); last good s = {last_good_s}")]
    FlowAborted { s: f64, gap: f64, last_good_s: f64 },
    #[error("relative bound unavailable: {0}")]
    UnboundedRelative(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("refusing to build: {0}")]
    RefuseToBuild(String),
}
