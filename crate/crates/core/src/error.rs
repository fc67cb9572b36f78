use thiserror::Error;

use crate::rules::RuleReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("complex is not a disk: {0}")]
    NotADisk(String),

    #[error("edge {edge} is asked to split into {first} and {second} sub-edges by its two tiles")]
    BoundaryMismatch {
        edge: usize,
        first: usize,
        second: usize,
    },

    #[error("unknown tile type `{0}`")]
    UnknownTileType(String),

    #[error("invalid rule:\n{0}")]
    InvalidRule(RuleReport),

    #[error("tile budget exceeded: {needed} tiles needed, limit {limit} (reached stage {stage})")]
    BudgetExceeded {
        needed: usize,
        limit: usize,
        stage: usize,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("annulus has no fat path between its boundary components")]
    Disconnected,

    #[error("all weights are zero")]
    ZeroArea,

    #[error("cutting-plane iteration cap hit: primal sum of squares {primal}, oracle shortest length {shortest}")]
    IterationCap { primal: f64, shortest: f64 },

    #[error("tower has {have} stages, {need} required")]
    InsufficientStages { have: usize, need: usize },

    #[error("embedding system is singular: {0}")]
    SingularEmbedding(String),
}
