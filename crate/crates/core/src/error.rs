use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("qubit {index} out of range for frame of {len} qubits")]
    QubitOutOfRange { index: usize, len: usize },

    #[error("qubit {0} measured twice in one trial")]
    AlreadyMeasured(usize),

    #[error("two-qubit gate applied to the same qubit {0}")]
    SameQubit(usize),

    #[error("blocks overlap at qubit {0}")]
    OverlappingBlocks(usize),

    #[error("split vote with located errors disallowed")]
    SplitVote,

    #[error("odd number of defects ({0})")]
    OddDefectCount(usize),

    #[error("syndrome not cleared: {0} odd cells remain")]
    UnclearedSyndrome(usize),

    #[error("expected {expected} readouts, got {got}")]
    MissingReadouts { expected: usize, got: usize },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("fit did not converge: {0}")]
    FitNonConvergence(String),

    #[error("degenerate fit data: {0}")]
    FitDegenerate(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
