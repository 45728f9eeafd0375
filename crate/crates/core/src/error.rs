use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("degenerate affine map: slope is zero")]
    DegenerateMap,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("point outside the domain: {0}")]
    OutOfDomain(String),
    #[error("orbit hits a partition boundary at step {step}")]
    BoundaryHit { step: usize },
    #[error("parameter b is required for the three-dimensional map")]
    MissingB,
    #[error("cannot parse rational {0:?}: expected \"p/q\"")]
    ParseRational(String),
    #[error("cannot parse word {0:?}")]
    ParseWord(String),
    #[error("windows are not aligned: {0}")]
    MisalignedWindows(String),
    #[error("diagram depth {depth} is insufficient: successors of level {level} are not built")]
    InsufficientDepth { depth: usize, level: i64 },
    #[error("successors of vertex {0} are not built")]
    SuccessorsNotBuilt(usize),
    #[error("parity mismatch: n = {n}, j = {j}")]
    ParityMismatch { n: i64, j: i64 },
    #[error("stopping time exceeds the cap of {cap} steps")]
    ExceededCap { cap: usize },
    #[error("word starts inside E (ββ); Q is undefined there")]
    InsideE,
    #[error("lags must be nondecreasing and start at 0")]
    UnsortedLags,
    #[error("observable and lag lists differ in length ({observables} vs {lags})")]
    LagCountMismatch { observables: usize, lags: usize },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("only {found} usable lags in the window, need at least 4")]
    InsufficientUsableLags { found: usize },
    #[error("enumeration budget of {budget} words exceeded")]
    BudgetExceeded { budget: usize },
    #[error("observable {name} needs a {arity}-dimensional domain")]
    ObservableArity { name: String, arity: usize },
    #[error("unknown observable {0:?}")]
    UnknownObservable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
