use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dense conversion needs {required} bytes but the budget is {budget} bytes; raise the budget or use the step-integrator path")]
    MemoryBudget { required: usize, budget: usize },

    #[error("eigensolver failed (info = {info}) for sector {sector} at g1 = {g1}, g2 = {g2}")]
    SolverFailure {
        info: i32,
        sector: String,
        g1: f64,
        g2: f64,
    },

    #[error("LAPACK routine {routine} returned info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("eigenvector residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("super-parity cross-block entry {value:.3e} at ({row}, {col}) exceeds 1e-12; basis convention is broken")]
    ParityBlockLeak { row: usize, col: usize, value: f64 },

    #[error("no eigenvalue within {tol:.1e} of zero; steady state is missing (truncation or solver failure)")]
    NoZeroMode { tol: f64 },

    #[error("all eigenvalues are non-decaying; no gap is defined")]
    NoDecayingMode,

    #[error("steady-state candidate has trace magnitude {trace:.3e} < 1e-12 and cannot be normalized")]
    UnnormalizableSteadyState { trace: f64 },

    #[error("overlap matrix is near-singular (condition estimate {cond:.3e}, smallest pivot {pivot:.3e} at index {index}); defective or near-degenerate eigenvalue cluster")]
    SingularOverlap {
        cond: f64,
        pivot: f64,
        index: usize,
    },

    #[error("zero vector has no participation ratio")]
    ZeroVector,

    #[error("left/right pair is not biorthogonal: <L|R> = {overlap:.3e}, expected 1 within {tol:.1e}")]
    NotBiorthogonal { overlap: f64, tol: f64 },

    #[error("left and right amplitudes have disjoint support; biorthogonal participation ratio is undefined")]
    DisjointSupport,

    #[error("trace drifted to {trace} after {steps} drive steps (tolerance 1e-6); aborting evolution")]
    TraceDrift { trace: f64, steps: usize },

    #[error("non-finite value after {steps} drive steps; aborting evolution")]
    NonFinite { steps: usize },

    #[error("density matrix has eigenvalue {eigenvalue:.3e} below -1e-6; not a valid state")]
    InvalidState { eigenvalue: f64 },

    #[error("{0}")]
    Stats(String),

    #[error("fit needs at least 3 points with positive gaps; got {0}")]
    FitUnderdetermined(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("cache file is malformed: {0}")]
    CacheFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
