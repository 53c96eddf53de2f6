//! Stripboard layout synthesis: netlist import, placement constraints, an
//! exact branch-and-bound placer, post-processing and rendering.

pub mod asp;
pub mod circuit;
pub mod constraints;
pub mod error;
pub mod ir;
pub mod layout;
pub mod netlist;
pub mod postprocess;
pub mod render;
pub mod solver;

pub use asp::emit_asp_facts;
pub use circuit::{Circuit, CircuitBuilder, Component, ComponentKind, Net, NetMember, PinId};
pub use constraints::{
    check_all, CheckModel, ConstraintViolation, Propagator, SpanRules, ViolationKind,
};
pub use error::{
    CircuitError, LayoutError, NetlistError, PostprocessError, RenderError, SchemaError, SolveError,
};
pub use ir::{circuit_to_json, json_to_circuit, IrError};
pub use layout::{
    board_extent, lex_compare, objective_tuple, BoardExtent, Cut, GridConfig, Layout,
    ObjectiveTuple, PinPlacement,
};
pub use netlist::parse_netlist;
pub use postprocess::{
    claimed_extent, derive_cuts, finalize, normalize, reconstruct_nets, verify, CheckEvidence,
    VerificationReport,
};
pub use render::{render, RenderFormat, RenderOptions, Theme};
pub use solver::{
    brute_force_solve, canonical_assignments, solve, solve_phase1, solve_phase2, Mode, SolveConfig,
    SolveResult, Status,
};
