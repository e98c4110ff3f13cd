use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("member {member:?} appears more than once in snapshot {snapshot}")]
    DuplicateMember { member: String, snapshot: usize },

    #[error("cluster {cluster} of snapshot {snapshot} is empty")]
    EmptyCluster { snapshot: usize, cluster: usize },

    #[error("snapshot {snapshot}: member ids must be non-empty strings")]
    EmptyMemberId { snapshot: usize },

    #[error("snapshot index {missing} is missing (snapshot indices must be contiguous from 0)")]
    SnapshotGap { missing: usize },

    #[error("sequence contains no snapshots")]
    EmptySequence,

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("snapshots must be processed in order: expected {expected}, got {got}")]
    Sequencing { expected: usize, got: usize },

    #[error("instance too large for the brute-force oracle: {0}")]
    OracleTooLarge(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid result document: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
