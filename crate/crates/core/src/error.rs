use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("radii squares too close for the closed form: |a_{i}^2 - a_{j}^2| = {gap:e}")]
    NearDegenerateRadii { i: usize, j: usize, gap: f64 },

    #[error("degenerate radii: {0}")]
    DegenerateRadii(String),

    #[error("quadrature budget exceeded after {subdivisions} subdivisions (last change {last_change:e})")]
    QuadratureBudgetExceeded { subdivisions: usize, last_change: f64 },

    #[error("derivative order {k} exceeds 2N+2 = {max}")]
    DerivativeOrderTooHigh { k: usize, max: usize },

    #[error("radius {radius} outside kernel table range [0, {max}]")]
    TableRangeExceeded { radius: f64, max: f64 },

    #[error("time step {dt} violates stability limit {limit}")]
    UnstableTimestep { dt: f64, limit: f64 },

    #[error("frequency lattice too coarse: {0}")]
    LatticeTooCoarse(String),

    #[error("insufficient samples: relative standard error {rel_se:.3} > 0.25")]
    InsufficientSamples { rel_se: f64 },

    #[error("tail fit failed: {0}")]
    FitFailed(String),

    #[error("counterexample: {0}")]
    CounterexampleFound(String),

    #[error("bound violated: lhs {lhs:e} > rhs {rhs:e} ({context})")]
    BoundViolated { lhs: f64, rhs: f64, context: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
