use thiserror::Error;

use crate::constraints::ConstraintViolation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("component #{index} has an empty reference")]
    EmptyReference { index: usize },
    #[error("component `{reference}` has no pins")]
    NoPins { reference: String },
    #[error("duplicate component reference `{0}`")]
    DuplicateReference(String),
    #[error("net `{0}` has no members")]
    EmptyNet(String),
    #[error("net `{name}` has id {id}, expected {expected} (ids must be dense from 1)")]
    NetIdNotDense {
        name: String,
        id: u32,
        expected: u32,
    },
    #[error("net `{net}` references unknown component `{reference}`")]
    UnknownReference { net: String, reference: String },
    #[error("net `{net}` references pin {pin} of `{reference}`, which has {pin_count} pins")]
    PinOutOfRange {
        net: String,
        reference: String,
        pin: u32,
        pin_count: u32,
    },
    #[error("net `{net}` lists `{reference}` pin {pin} twice")]
    DuplicateMember {
        net: String,
        reference: String,
        pin: u32,
    },
    #[error("`{reference}` pin {pin} belongs to both `{first}` and `{second}`")]
    PinInTwoNets {
        reference: String,
        pin: u32,
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: pin `{pin}` of `{reference}` is not a positive integer")]
    NonNumericPin {
        line: usize,
        column: usize,
        reference: String,
        pin: String,
    },
    #[error(transparent)]
    Semantic(#[from] CircuitError),
}

/// A JSON document that does not match the expected schema.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AspError {
    #[error("references `{first}` and `{second}` both mangle to atom `{atom}`")]
    AtomCollision {
        first: String,
        second: String,
        atom: String,
    },
    #[error("reference `{reference}` mangles to `{atom}`, which is not a valid atom")]
    InvalidAtom { reference: String, atom: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("layout has no placements, so it has no extent")]
    EmptyLayout,
    #[error("`{reference}` pin {pin} is placed twice")]
    DuplicatePlacement { reference: String, pin: u32 },
    #[error("`{reference}` pin {pin} has no placement")]
    MissingPlacement { reference: String, pin: u32 },
    #[error("placement for `{reference}` pin {pin} does not match any circuit pin")]
    UnknownPin { reference: String, pin: u32 },
    #[error("grid dimensions must be at least 1x1")]
    EmptyGrid,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PostprocessError {
    #[error("layout is infeasible ({} violation(s))", .0.len())]
    Infeasible(Vec<ConstraintViolation>),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error(
        "layout is not normalized: minimum strip {min_strip}, minimum position {min_position}"
    )]
    NotNormalized { min_strip: i32, min_position: i32 },
    #[error("cell size {0} is below the minimum of 8")]
    CellTooSmall(u32),
    #[error("cut after position {after_position} on strip {strip} lies outside the board")]
    CutOutside { strip: i32, after_position: i32 },
    #[error("cut after position {after_position} on strip {strip} falls on the hole of `{reference}` pin {pin}")]
    CutOnPin {
        strip: i32,
        after_position: i32,
        reference: String,
        pin: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("search space of {assignments} assignments exceeds the brute-force limit of {limit}")]
    TooLarge { assignments: f64, limit: f64 },
    #[error("time limit must be positive")]
    InvalidTimeLimit,
    #[error("warm-start layout is not feasible: {0}")]
    InvalidIncumbent(String),
}
