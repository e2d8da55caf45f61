use thiserror::Error;

/// Errors raised by the maps, domains and analysis routines.
///
/// Step failures (`ZeroOrbit`, `DiscontinuityPoint`, ...) are ordinary data
/// for orbit drivers: they end an orbit and are recorded as its termination
/// cause.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate matrix (determinant {det})")]
    DegenerateMatrix { det: f64 },
    #[error("pole: |cx + d| = {denominator:e} at x = {x}")]
    Pole { x: f64, denominator: f64 },
    #[error("orientation-reversing matrix has no planar extension")]
    OrientationReversing,
    #[error("x = {x} lies outside [{lo}, {hi}]")]
    OutOfInterval { x: f64, lo: f64, hi: f64 },
    #[error("orbit reached the termination point at x = {x}")]
    ZeroOrbit { x: f64 },
    #[error("x = {x} is a discontinuity point of the map")]
    DiscontinuityPoint { x: f64 },
    #[error("R^j x is infinite at x = {x}")]
    Unbounded { x: f64 },
    #[error("x = {x} is a parabolic fixed point")]
    FixedPoint { x: f64 },
    #[error("{what} is not supported for q = {q}")]
    UnsupportedQ { q: u32, what: &'static str },
    #[error("domain {0} has infinite area")]
    InfiniteArea(String),
    #[error("no closed-form area is known for {0}")]
    NoClosedForm(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("orbit terminated after {steps} steps: {cause}")]
    OrbitTerminated { steps: usize, cause: Box<Error> },
    #[error("no return to the target domain within {max_iters} iterations")]
    NoReturn { max_iters: usize },
    #[error("fiber interval [{lo}, {hi}] leaves I")]
    EmptyFiber { lo: f64, hi: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
