use thiserror::Error;

/// Errors raised by the geometry, group and measure routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({re}, {im}) is not strictly inside the unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("degenerate geometry: {0}")]
    Degenerate(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("isometry is not hyperbolic (|trace| = {trace})")]
    NotHyperbolic { trace: f64 },

    #[error("ping-pong violation between arcs of letters {first} and {second}")]
    PingPong { first: String, second: String },

    #[error("enumeration budget of {budget} nodes exceeded; complete only up to radius {achieved:.3}")]
    MemoryBudget { budget: usize, achieved: f64 },

    #[error("fold did not terminate within {0} steps")]
    FoldDiverged(usize),

    #[error("bump potentials need a group with a compact fundamental domain")]
    NonCompactDomain,

    #[error("orbit table carries potential integrals for {found:?}, not {expected}")]
    PotentialMismatch { expected: String, found: Option<String> },

    #[error("annulus window [{n0}, {n1}] outside the complete range (n <= {complete})")]
    WindowOutsideCompleteRange { n0: i64, n1: i64, complete: i64 },

    #[error("annulus sum vanishes at n = {0}; enumeration radius too small")]
    EmptyAnnulus(i64),

    #[error("parameter s = {s} is not above the critical exponent estimate {delta} by the required margin")]
    BelowCriticalExponent { s: f64, delta: f64 },

    #[error("arc holds {found} atoms, at least {required} required")]
    SparseArc { found: usize, required: usize },

    #[error("only {found} usable grid points, at least {required} required")]
    TooFewPoints { found: usize, required: usize },

    #[error("Liouville rejection sampler efficiency {0:.4} below floor")]
    RejectionFloor(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
