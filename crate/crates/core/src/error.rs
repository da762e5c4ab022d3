use alloc::string::String;

/// Errors raised by the evidential reasoning core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("frame id must not be empty")]
    EmptyFrameId,
    #[error("frame '{0}' must list at least one proposition")]
    EmptyFrame(String),
    #[error("frame '{frame}' has an empty proposition label")]
    EmptyLabel { frame: String },
    #[error("frame '{frame}' repeats proposition label '{label}'")]
    DuplicateLabel { frame: String, label: String },
    #[error("frame '{frame}' has no proposition '{label}'")]
    UnknownLabel { frame: String, label: String },
    #[error("frame '{0}' is not registered")]
    UnknownFrame(String),
    #[error("frame '{0}' is already registered")]
    DuplicateFrame(String),

    #[error("mass {0} is negative or not finite")]
    InvalidMass(f64),
    #[error("masses sum to {sum}, which exceeds 1")]
    MassSumExceeded { sum: f64 },
    #[error("the empty set cannot carry mass in a closed-world body of evidence")]
    EmptyFocalSet,
    #[error("proposition index {index} is outside a frame of size {size}")]
    ForeignSet { index: usize, size: usize },
    #[error("frame mismatch: expected '{expected}', found '{found}'")]
    FrameMismatch { expected: String, found: String },
    #[error("frame size mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("operation requires a closed-world body of evidence (no mass on the empty set)")]
    OpenWorldInput,

    #[error("discount rate {0} is outside [0, 1]")]
    InvalidRate(f64),
    #[error("total conflict: the evidence has no surviving mass after combination")]
    TotalConflict,
    #[error("fusion needs at least {needed} inputs, got {got}")]
    TooFewInputs { needed: usize, got: usize },
    #[error("combination produced {focal_sets} focal sets, above the limit of {limit}")]
    ResourceLimit { focal_sets: usize, limit: usize },

    #[error("frames '{a}' and '{b}' already share a compatibility relation")]
    DuplicateRelation { a: String, b: String },
    #[error("a compatibility relation needs two distinct frames, got '{0}' twice")]
    SelfRelation(String),
    #[error("no compatibility relation links '{a}' and '{b}'")]
    NoRelation { a: String, b: String },
    #[error("relation {a}<->{b} has no pair ({label_a}, {label_b})")]
    MissingPair { a: String, b: String, label_a: String, label_b: String },
    #[error("frame '{to}' is unreachable from frame '{from}'")]
    UnreachableFrame { from: String, to: String },

    #[error("frame of size {size} exceeds the exact lattice cap of {cap}; use the restricted influence path")]
    FrameTooLarge { size: usize, cap: usize },
    #[error("influence needs at least one contribution")]
    EmptyContributions,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
