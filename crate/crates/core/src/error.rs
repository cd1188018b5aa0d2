use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model error: {0}")]
    Model(String),

    #[error("malformed path: {0}")]
    MalformedPath(String),

    #[error("dominating rate {omega} is below exit rate {exit_rate}")]
    DominatingRate { omega: f64, exit_rate: f64 },

    #[error("invalid slice configuration: {0}")]
    SliceConfig(String),

    #[error("jump observation at t = {time} matches no uniformized transition")]
    UnmatchedObservation { time: f64 },

    #[error("empty restriction at transition {index}: observed label and clamped label disagree")]
    EmptyRestriction { index: usize },

    #[error("infeasible slice: frontier emptied at transition {index}")]
    InfeasibleSlice { index: usize },

    #[error("backward pass found no admissible predecessor at transition {index}")]
    BackwardConsistency { index: usize },

    #[error("inference error: {0}")]
    Inference(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
